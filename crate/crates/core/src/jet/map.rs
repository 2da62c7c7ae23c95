use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::Basis;
use super::MultiIndex;
use crate::error::{contract, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Truncated jet of an origin-fixing holomorphic map germ of `C^N`.
///
/// Component `j` is `Σ_{1<=|I|<=D} c_{j,I} z^I`. Coefficients live in a
/// dense table over the graded-lex monomial basis; zero entries are
/// treated as absent everywhere (iteration, norms, serialization).
#[derive(Clone)]
pub struct JetMap {
    basis: Arc<Basis>,
    coeffs: Vec<Vec<Complex64>>,
}

impl JetMap {
    pub fn zero(dim: usize, degree: usize) -> JetMap {
        assert!(dim >= 1 && degree >= 1, "jets need dim >= 1 and degree >= 1");
        let basis = Basis::get(dim, degree);
        let coeffs = vec![vec![ZERO; basis.len()]; dim];
        JetMap { basis, coeffs }
    }

    pub fn identity(dim: usize, degree: usize) -> JetMap {
        let mut j = JetMap::zero(dim, degree);
        for k in 0..dim {
            let v = j.basis.variable(k);
            j.coeffs[k][v] = ONE;
        }
        j
    }

    /// `z ↦ diag(values)·z`.
    pub fn diagonal(values: &[Complex64], degree: usize) -> JetMap {
        let mut j = JetMap::zero(values.len(), degree);
        for (k, &v) in values.iter().enumerate() {
            let idx = j.basis.variable(k);
            j.coeffs[k][idx] = v;
        }
        j
    }

    /// `z ↦ M·z`.
    pub fn linear(matrix: &DMatrix<Complex64>, degree: usize) -> Result<JetMap> {
        if matrix.nrows() != matrix.ncols() {
            return Err(contract("linear part must be square"));
        }
        let n = matrix.nrows();
        let mut j = JetMap::zero(n, degree);
        for r in 0..n {
            for c in 0..n {
                let idx = j.basis.variable(c);
                j.coeffs[r][idx] = matrix[(r, c)];
            }
        }
        Ok(j)
    }

    /// Builds a jet from `(component, index, coefficient)` triples; repeated
    /// keys accumulate.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<JetMap>
    where
        I: IntoIterator<Item = (usize, MultiIndex, Complex64)>,
    {
        let mut j = JetMap::zero(dim, degree);
        for (c, idx, v) in terms {
            j.add_to(c, &idx, v)?;
        }
        Ok(j)
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub(crate) fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub(crate) fn raw(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub(crate) fn from_raw(basis: Arc<Basis>, coeffs: Vec<Vec<Complex64>>) -> JetMap {
        debug_assert_eq!(coeffs.len(), basis.dim);
        JetMap { basis, coeffs }
    }

    fn check_key(&self, component: usize, index: &MultiIndex) -> Result<usize> {
        if component >= self.dim() {
            return Err(contract(format!("component {component} out of range")));
        }
        if index.dim() != self.dim() {
            return Err(contract(format!("index {index} has wrong dimension")));
        }
        let o = index.order() as usize;
        if o == 0 || o > self.degree() {
            return Err(contract(format!(
                "index {index} outside 1..={} (jets fix the origin and are truncated)",
                self.degree()
            )));
        }
        Ok(self.basis.index_of(index).expect("index in basis"))
    }

    /// Coefficient of `z^I` in component `component` (0-based); zero when absent
    /// or beyond the truncation degree.
    pub fn coeff(&self, component: usize, index: &MultiIndex) -> Complex64 {
        match self.basis.index_of(index) {
            Some(i) if component < self.dim() => self.coeffs[component][i],
            _ => ZERO,
        }
    }

    pub fn set_coeff(&mut self, component: usize, index: &MultiIndex, value: Complex64) -> Result<()> {
        let i = self.check_key(component, index)?;
        self.coeffs[component][i] = value;
        Ok(())
    }

    pub fn add_to(&mut self, component: usize, index: &MultiIndex, value: Complex64) -> Result<()> {
        let i = self.check_key(component, index)?;
        self.coeffs[component][i] += value;
        Ok(())
    }

    /// Non-zero terms, component-major, graded-lex within a component.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().enumerate().flat_map(move |(c, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != ZERO)
                .map(move |(i, &v)| (c, &self.basis.monomials[i], v))
        })
    }

    /// Linear part as an `N×N` matrix.
    pub fn linear_part(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| self.coeffs[r][self.basis.variable(c)])
    }

    /// Diagonal of the linear part.
    pub fn linear_diagonal(&self) -> Vec<Complex64> {
        (0..self.dim())
            .map(|k| self.coeffs[k][self.basis.variable(k)])
            .collect()
    }

    /// Maximal total degree among non-zero terms of `component` (0 if none).
    pub fn component_degree(&self, component: usize) -> usize {
        self.coeffs[component]
            .iter()
            .rposition(|v| *v != ZERO)
            .map_or(0, |i| self.basis.orders[i])
    }

    /// Maximal total degree among all non-zero terms.
    pub fn actual_degree(&self) -> usize {
        (0..self.dim()).map(|c| self.component_degree(c)).max().unwrap_or(0)
    }

    /// Terms of order exactly `order`.
    pub fn homogeneous_part(&self, order: usize) -> Result<JetMap> {
        if order == 0 || order > self.degree() {
            return Err(contract(format!(
                "homogeneous degree {order} outside 1..={}",
                self.degree()
            )));
        }
        Ok(self.filter_orders(|o| o == order))
    }

    pub(crate) fn filter_orders(&self, keep: impl Fn(usize) -> bool) -> JetMap {
        let mut out = self.clone();
        for row in out.coeffs.iter_mut() {
            for (i, v) in row.iter_mut().enumerate() {
                if !keep(self.basis.orders[i]) {
                    *v = ZERO;
                }
            }
        }
        out
    }

    /// Drops all terms of order above `degree` and re-bases the jet.
    pub fn truncate(&self, degree: usize) -> JetMap {
        self.with_degree(degree.min(self.degree()))
    }

    /// Same map viewed at another truncation degree (zero-padded when raising).
    pub fn with_degree(&self, degree: usize) -> JetMap {
        let basis = Basis::get(self.dim(), degree);
        let keep = basis.len().min(self.basis.len());
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                let mut r = vec![ZERO; basis.len()];
                r[..keep].copy_from_slice(&row[..keep]);
                r
            })
            .collect();
        JetMap { basis, coeffs }
    }

    /// Max coefficient modulus, optionally restricted to one homogeneous degree.
    pub fn coefficient_norm(&self, degree_filter: Option<usize>) -> f64 {
        self.norm_where(|o| degree_filter.is_none_or(|d| d == o))
    }

    /// Max coefficient modulus over the orders selected by `keep`.
    pub fn norm_where(&self, keep: impl Fn(usize) -> bool) -> f64 {
        let orders = &self.basis.orders;
        self.coeffs
            .iter()
            .flat_map(|row| row.iter().enumerate())
            .filter(|(i, _)| keep(orders[*i]))
            .fold(0.0, |m, (_, v)| m.max(v.norm()))
    }

    /// Sum of coefficient moduli of order `>= 2` over all components.
    pub fn nonlinear_l1(&self) -> f64 {
        let orders = &self.basis.orders;
        self.coeffs
            .iter()
            .flat_map(|row| row.iter().enumerate())
            .filter(|(i, _)| orders[*i] >= 2)
            .map(|(_, v)| v.norm())
            .sum()
    }

    fn check_same_shape(&self, other: &JetMap) -> Result<()> {
        if self.dim() != other.dim() || self.degree() != other.degree() {
            return Err(contract(format!(
                "shape mismatch: ({}, {}) vs ({}, {})",
                self.dim(),
                self.degree(),
                other.dim(),
                other.degree()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &JetMap) -> Result<JetMap> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (r, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &JetMap) -> Result<JetMap> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (r, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (a, b) in r.iter_mut().zip(o) {
                *a -= b;
            }
        }
        Ok(out)
    }

    /// `max |c_{j,I} - d_{j,I}|`.
    pub fn distance(&self, other: &JetMap) -> Result<f64> {
        Ok(self.sub(other)?.coefficient_norm(None))
    }

    pub fn scale(&self, s: Complex64) -> JetMap {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// `diag(values)·f`: scales component `j` by `values[j]`.
    pub fn scale_components(&self, values: &[Complex64]) -> JetMap {
        assert_eq!(values.len(), self.dim());
        let mut out = self.clone();
        for (row, &s) in out.coeffs.iter_mut().zip(values) {
            row.iter_mut().for_each(|v| *v *= s);
        }
        out
    }

    /// `M·f` for a constant matrix `M`.
    pub fn left_linear(&self, m: &DMatrix<Complex64>) -> Result<JetMap> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(contract("matrix dimension mismatch"));
        }
        let mut out = JetMap::zero(self.dim(), self.degree());
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let s = m[(r, c)];
                if s == ZERO {
                    continue;
                }
                for (a, b) in out.coeffs[r].iter_mut().zip(&self.coeffs[c]) {
                    *a += s * b;
                }
            }
        }
        Ok(out)
    }

    /// Values of every basis monomial at `z`.
    pub(crate) fn monomial_values(basis: &Basis, z: &[Complex64]) -> Vec<Complex64> {
        let mut vals = vec![ZERO; basis.len()];
        for i in 0..basis.len() {
            vals[i] = match basis.split[i] {
                None => {
                    let k = basis.dim - 1 - i;
                    z[k]
                }
                Some((p, k)) => vals[p] * z[k],
            };
        }
        vals
    }

    /// Exact polynomial evaluation.
    pub fn evaluate(&self, z: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(z.len(), self.dim(), "point dimension mismatch");
        let vals = JetMap::monomial_values(&self.basis, z);
        self.coeffs
            .iter()
            .map(|row| row.iter().zip(&vals).map(|(c, v)| c * v).sum())
            .collect()
    }

    /// Component `component` of the map at `z`.
    pub fn evaluate_component(&self, component: usize, z: &[Complex64]) -> Complex64 {
        let vals = JetMap::monomial_values(&self.basis, z);
        self.coeffs[component].iter().zip(&vals).map(|(c, v)| c * v).sum()
    }

    /// Jacobian matrix `∂f_r/∂z_k` at `z`.
    pub fn jacobian(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        assert_eq!(z.len(), self.dim(), "point dimension mismatch");
        let b = &self.basis;
        let vals = JetMap::monomial_values(b, z);
        let n = self.dim();
        let mut jac = DMatrix::from_element(n, n, ZERO);
        for r in 0..n {
            for (i, &c) in self.coeffs[r].iter().enumerate() {
                if c == ZERO {
                    continue;
                }
                for k in 0..n {
                    if let Some(lower) = b.lowered(i, k) {
                        let e = b.monomials[i].get(k) as f64;
                        let v = lower.map_or(ONE, |l| vals[l]);
                        jac[(r, k)] += c * e * v;
                    }
                }
            }
        }
        jac
    }
}

impl PartialEq for JetMap {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.degree() == other.degree() && self.coeffs == other.coeffs
    }
}

impl fmt::Debug for JetMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetMap(dim={}, degree={}) {{", self.dim(), self.degree())?;
        for (c, idx, v) in self.terms() {
            write!(f, " [{}]{}: {}{:+}i;", c + 1, idx, v.re, v.im)?;
        }
        write!(f, " }}")
    }
}

/// Inverse of the linear part, if it is non-singular.
pub(crate) fn invert_linear(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if scale == 0.0 {
        return Err(Error::NonInvertible);
    }
    let inv = m.clone().try_inverse().ok_or(Error::NonInvertible)?;
    // reject numerically singular matrices
    let cond = scale * inv.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::NonInvertible);
    }
    Ok(inv)
}
