use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Exponent tuple `I = (i_1, ..., i_N)` of the monomial `z^I`.
///
/// Ordered graded-lexicographically: first by total order `|I|`, then
/// lexicographically on the entries.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs at least one variable");
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// The index `e_k` of the coordinate `z_k` (0-based).
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut e = vec![0; dim];
        e[k] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }

    /// `λ^I = Π λ_k^{i_k}`.
    pub fn power_of(&self, values: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(values)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, v)| acc * v.powu(e))
    }

    /// `|λ^I|`, computed on moduli.
    pub fn modulus_power_of(&self, moduli: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(moduli)
            .fold(1.0, |acc, (&e, m)| acc * m.powi(e as i32))
    }

    /// Largest variable index with a non-zero exponent.
    pub fn last_variable(&self) -> Option<usize> {
        self.0.iter().rposition(|&e| e > 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `I - e_k`, if `i_k > 0`.
    pub fn lower(&self, k: usize) -> Option<MultiIndex> {
        if self.0[k] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[k] -= 1;
        Some(MultiIndex(e))
    }

    /// All multi-indices in `dim` variables with `|I| = order`, ascending.
    pub fn of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; dim];
        fill(&mut cur, 0, order, &mut out);
        out.sort();
        out
    }
}

fn fill(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        fill(cur, pos + 1, remaining - e, out);
    }
    cur[pos] = 0;
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex::new(v)
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let a = MultiIndex::from([0, 2]);
        let b = MultiIndex::from([1, 1]);
        let c = MultiIndex::from([2, 0]);
        let d = MultiIndex::from([3, 0]);
        let e = MultiIndex::from([1, 0]);
        let mut v = vec![d.clone(), c.clone(), a.clone(), e.clone(), b.clone()];
        v.sort();
        assert_eq!(v, vec![e, a, b, c, d]);
    }

    #[test]
    fn of_order_counts() {
        // C(order + dim - 1, dim - 1)
        assert_eq!(MultiIndex::of_order(2, 3).len(), 4);
        assert_eq!(MultiIndex::of_order(3, 2).len(), 6);
        assert_eq!(MultiIndex::of_order(1, 5).len(), 1);
    }

    #[test]
    fn powers() {
        let i = MultiIndex::from([2, 1]);
        let l = [Complex64::new(0.5, 0.0), Complex64::new(0.0, 2.0)];
        let p = i.power_of(&l);
        assert!((p - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((i.modulus_power_of(&[0.5, 2.0]) - 0.5).abs() < 1e-15);
        assert_eq!(i.last_variable(), Some(1));
        assert_eq!(MultiIndex::zero(3).last_variable(), None);
    }
}
