//! Monomial tables shared by every jet of a given `(dim, degree)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::MultiIndex;

const NONE: u32 = u32::MAX;

/// Graded-lex enumeration of the monomials `z^I`, `1 <= |I| <= degree`,
/// with product and factorization tables.
#[derive(Debug)]
pub(crate) struct Basis {
    pub dim: usize,
    pub degree: usize,
    pub monomials: Vec<MultiIndex>,
    pub orders: Vec<usize>,
    lookup: HashMap<MultiIndex, usize>,
    /// `start[d]` is the offset of the first monomial of order `d` (d = 1..=degree+1).
    start: Vec<usize>,
    mul: Vec<u32>,
    /// For order >= 2: `(parent, k)` with `monomial = parent + e_k`.
    pub split: Vec<Option<(usize, usize)>>,
    /// `lower[m * dim + k]`: index of `I - e_k`; `NONE` if `i_k = 0` or `I = e_k`.
    lower: Vec<u32>,
}

impl Basis {
    fn build(dim: usize, degree: usize) -> Basis {
        let mut monomials = Vec::new();
        let mut start = vec![0; degree + 2];
        for d in 1..=degree {
            start[d] = monomials.len();
            monomials.extend(MultiIndex::of_order(dim, d as u32));
        }
        start[degree + 1] = monomials.len();
        let n = monomials.len();
        let lookup: HashMap<MultiIndex, usize> = monomials
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let orders: Vec<usize> = monomials.iter().map(|m| m.order() as usize).collect();

        let mut mul = vec![NONE; n * n];
        for a in 0..n {
            for b in 0..n {
                if orders[a] + orders[b] <= degree {
                    let s = monomials[a].add(&monomials[b]);
                    mul[a * n + b] = lookup[&s] as u32;
                }
            }
        }

        let split = monomials
            .iter()
            .map(|m| {
                if m.order() < 2 {
                    return None;
                }
                let k = m.last_variable().expect("non-zero index");
                let parent = m.lower(k).expect("positive exponent");
                Some((lookup[&parent], k))
            })
            .collect();

        let mut lower = vec![NONE; n * dim];
        for (i, m) in monomials.iter().enumerate() {
            for k in 0..dim {
                if let Some(l) = m.lower(k) {
                    if l.order() > 0 {
                        lower[i * dim + k] = lookup[&l] as u32;
                    }
                }
            }
        }

        Basis {
            dim,
            degree,
            monomials,
            orders,
            lookup,
            start,
            mul,
            split,
            lower,
        }
    }

    /// Shared basis for `(dim, degree)`.
    pub fn get(dim: usize, degree: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard
            .entry((dim, degree))
            .or_insert_with(|| Arc::new(Basis::build(dim, degree)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    /// Index of `e_k`.
    pub fn variable(&self, k: usize) -> usize {
        // Order-1 monomials sorted lexicographically: e_{dim-1} < ... < e_0.
        self.dim - 1 - k
    }

    /// Number of monomials of order at most `d`.
    pub fn count_up_to(&self, d: usize) -> usize {
        self.start[d.min(self.degree) + 1]
    }

    /// Range of monomials of order exactly `d`.
    #[cfg(test)]
    pub fn range_of_order(&self, d: usize) -> std::ops::Range<usize> {
        self.start[d]..self.start[d + 1]
    }

    #[cfg(test)]
    pub fn product(&self, a: usize, b: usize) -> Option<usize> {
        let p = self.mul[a * self.len() + b];
        (p != NONE).then_some(p as usize)
    }

    /// `Some(Some(idx))` for `I - e_k` of positive order, `Some(None)` when
    /// `I = e_k` (the constant monomial), `None` if `i_k = 0`.
    pub fn lowered(&self, m: usize, k: usize) -> Option<Option<usize>> {
        if self.monomials[m].get(k) == 0 {
            return None;
        }
        let l = self.lower[m * self.dim + k];
        Some((l != NONE).then_some(l as usize))
    }

    /// `out += a * b`, truncated at the basis degree.
    pub fn mul_acc(&self, a: &[num_complex::Complex64], b: &[num_complex::Complex64], out: &mut [num_complex::Complex64]) {
        let n = self.len();
        for (ia, &ca) in a.iter().enumerate() {
            if ca.re == 0.0 && ca.im == 0.0 {
                continue;
            }
            let oa = self.orders[ia];
            if oa >= self.degree {
                break;
            }
            let limit = self.start[self.degree - oa + 1];
            let row = &self.mul[ia * n..ia * n + limit];
            for (ib, &cb) in b[..limit].iter().enumerate() {
                if cb.re == 0.0 && cb.im == 0.0 {
                    continue;
                }
                out[row[ib] as usize] += ca * cb;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_variables() {
        let b = Basis::get(2, 6);
        assert_eq!(b.len(), 27);
        let b3 = Basis::get(3, 6);
        assert_eq!(b3.len(), 83);
        for k in 0..3 {
            assert_eq!(b3.monomials[b3.variable(k)], MultiIndex::unit(3, k));
        }
        assert_eq!(b3.count_up_to(1), 3);
        assert_eq!(b3.range_of_order(2).len(), 6);
    }

    #[test]
    fn product_table_truncates() {
        let b = Basis::get(2, 2);
        let x = b.variable(0);
        let y = b.variable(1);
        let xy = b.product(x, y).unwrap();
        assert_eq!(b.monomials[xy], MultiIndex::from([1, 1]));
        assert_eq!(b.product(xy, x), None);
    }
}
