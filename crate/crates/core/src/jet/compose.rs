use num_complex::Complex64;

use super::basis::Basis;
use super::map::{invert_linear, JetMap};
use crate::error::{contract, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Values `inner^I` for every basis monomial `I`, each truncated at the basis degree.
pub(crate) fn substitution_powers(basis: &Basis, inner: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = basis.len();
    let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for i in 0..n {
        let v = match basis.split[i] {
            None => inner[basis.dim - 1 - i].clone(),
            Some((p, k)) => {
                let mut out = vec![ZERO; n];
                basis.mul_acc(&powers[p], &inner[k], &mut out);
                out
            }
        };
        powers.push(v);
    }
    powers
}

impl JetMap {
    /// `self ∘ inner`, truncated at the common degree.
    pub fn compose(&self, inner: &JetMap) -> Result<JetMap> {
        if self.dim() != inner.dim() || self.degree() != inner.degree() {
            return Err(contract(format!(
                "compose shape mismatch: outer ({}, {}), inner ({}, {})",
                self.dim(),
                self.degree(),
                inner.dim(),
                inner.degree()
            )));
        }
        let basis = self.basis().clone();
        let powers = substitution_powers(&basis, inner.raw());
        let n = basis.len();
        let coeffs = self
            .raw()
            .iter()
            .map(|row| {
                let mut out = vec![ZERO; n];
                for (i, &c) in row.iter().enumerate() {
                    if c == ZERO {
                        continue;
                    }
                    let p = &powers[i];
                    // powers[i] starts at order |I|
                    let from = basis.count_up_to(basis.orders[i] - 1);
                    for t in from..n {
                        out[t] += c * p[t];
                    }
                }
                out
            })
            .collect();
        Ok(JetMap::from_raw(basis, coeffs))
    }

    /// Compositional inverse up to the truncation degree.
    pub fn invert(&self) -> Result<JetMap> {
        let linv = invert_linear(&self.linear_part())?;
        let ginv = JetMap::linear(&linv, self.degree())?;
        let id = JetMap::identity(self.dim(), self.degree());
        // each pass fixes one more degree
        let mut g = ginv.clone();
        for _ in 1..self.degree() {
            let defect = id.sub(&self.compose(&g)?)?;
            g = g.add(&ginv.compose(&defect)?)?;
        }
        Ok(g)
    }

    /// `self^{∘k}` by repeated squaring; `k = 0` gives the identity.
    pub fn iterate(&self, k: usize) -> Result<JetMap> {
        let mut result = JetMap::identity(self.dim(), self.degree());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = base.compose(&result)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(result)
    }
}
