//! Multipliers, resonance classification and the integer cutoffs derived
//! from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::jet::{Complex, MultiIndex};

/// Default absolute tolerance for resonance detection.
pub const TOL_RES: f64 = 1e-9;
/// Upper edge of the near-resonance advisory band.
pub const NEAR_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    Continuous,
    Discrete,
}

/// Diagonal linear data `Λ = diag(α)` or `A = diag(λ)`.
///
/// In continuous mode `λ_j = exp(α_j)` is derived; in discrete mode only
/// the multipliers exist.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    mode: SpectrumMode,
    alphas: Option<Vec<Complex64>>,
    lambdas: Vec<Complex64>,
}

impl Spectrum {
    /// Multipliers ordered `0 < |λ_N| <= ... <= |λ_1| < 1`.
    pub fn discrete(lambdas: Vec<Complex64>) -> Result<Spectrum> {
        if lambdas.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        for (k, l) in lambdas.iter().enumerate() {
            let m = l.norm();
            if !(m > 0.0 && m < 1.0) {
                return Err(Error::InvalidSpectrum(format!(
                    "|lambda_{}| = {m} is not in (0, 1)",
                    k + 1
                )));
            }
        }
        for k in 1..lambdas.len() {
            if lambdas[k].norm() > lambdas[k - 1].norm() {
                return Err(Error::InvalidSpectrum(format!(
                    "moduli must be non-increasing: |lambda_{}| > |lambda_{}|",
                    k + 1,
                    k
                )));
            }
        }
        Ok(Spectrum {
            mode: SpectrumMode::Discrete,
            alphas: None,
            lambdas,
        })
    }

    /// Generators ordered `Re α_N <= ... <= Re α_1 < 0`.
    pub fn continuous(alphas: Vec<Complex64>) -> Result<Spectrum> {
        if alphas.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        for (k, a) in alphas.iter().enumerate() {
            if !(a.re < 0.0) || !a.im.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "Re alpha_{} = {} is not negative",
                    k + 1,
                    a.re
                )));
            }
        }
        for k in 1..alphas.len() {
            if alphas[k].re > alphas[k - 1].re {
                return Err(Error::InvalidSpectrum(format!(
                    "real parts must be non-increasing: Re alpha_{} > Re alpha_{}",
                    k + 1,
                    k
                )));
            }
        }
        let lambdas = alphas.iter().map(|a| a.exp()).collect();
        Ok(Spectrum {
            mode: SpectrumMode::Continuous,
            alphas: Some(alphas),
            lambdas,
        })
    }

    /// Sorts `values` into the required order first. Returns the spectrum and
    /// the permutation: sorted position `k` holds input entry `perm[k]`.
    pub fn sorted(mode: SpectrumMode, values: Vec<Complex64>) -> Result<(Spectrum, Vec<usize>)> {
        let key = |v: &Complex64| match mode {
            SpectrumMode::Discrete => v.norm(),
            SpectrumMode::Continuous => v.re,
        };
        let mut perm: Vec<usize> = (0..values.len()).collect();
        perm.sort_by(|&a, &b| key(&values[b]).total_cmp(&key(&values[a])));
        let sorted: Vec<Complex64> = perm.iter().map(|&k| values[k]).collect();
        let spec = match mode {
            SpectrumMode::Discrete => Spectrum::discrete(sorted)?,
            SpectrumMode::Continuous => Spectrum::continuous(sorted)?,
        };
        Ok((spec, perm))
    }

    pub fn mode(&self) -> SpectrumMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn alphas(&self) -> Option<&[Complex64]> {
        self.alphas.as_deref()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l.norm()).collect()
    }

    /// `|λ_1|`, the slowest contraction rate.
    pub fn lambda_max(&self) -> f64 {
        self.lambdas[0].norm()
    }

    /// `|λ_N|`, the fastest contraction rate.
    pub fn lambda_min(&self) -> f64 {
        self.lambdas[self.dim() - 1].norm()
    }

    /// The discretized spectrum `λ = e^α` (identity in discrete mode).
    pub fn to_discrete(&self) -> Spectrum {
        Spectrum {
            mode: SpectrumMode::Discrete,
            alphas: None,
            lambdas: self.lambdas.clone(),
        }
    }
}

/// Wire form `{"mode": ..., "values": [{"re", "im"}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub mode: SpectrumMode,
    pub values: Vec<Complex>,
}

impl From<&Spectrum> for SpectrumJson {
    fn from(s: &Spectrum) -> Self {
        let values = match s.mode {
            SpectrumMode::Discrete => &s.lambdas,
            SpectrumMode::Continuous => s.alphas.as_ref().expect("continuous spectrum has alphas"),
        };
        SpectrumJson {
            mode: s.mode,
            values: values.iter().map(|&v| v.into()).collect(),
        }
    }
}

impl TryFrom<&SpectrumJson> for Spectrum {
    type Error = Error;

    fn try_from(w: &SpectrumJson) -> Result<Spectrum> {
        let values: Vec<Complex64> = w.values.iter().map(|&v| v.into()).collect();
        match w.mode {
            SpectrumMode::Discrete => Spectrum::discrete(values),
            SpectrumMode::Continuous => Spectrum::continuous(values),
        }
    }
}

impl Serialize for Spectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = SpectrumJson::deserialize(d)?;
        Spectrum::try_from(&w).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResonanceKind {
    #[serde(rename = "complex")]
    Complex,
    #[serde(rename = "real-pure")]
    RealPure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceEntry {
    /// 1-based component.
    pub target: usize,
    pub index: MultiIndex,
    pub kind: ResonanceKind,
    /// `| |λ_j| - |λ^I| |` (continuous mode: on real parts of generators).
    pub real_defect: f64,
    /// `|λ_j - λ^I|` (continuous mode: `|α_j - <I, α>|`).
    pub complex_defect: f64,
}

impl ResonanceEntry {
    /// The defect matching the entry's kind.
    pub fn defect(&self) -> f64 {
        match self.kind {
            ResonanceKind::Complex => self.complex_defect,
            ResonanceKind::RealPure => self.real_defect,
        }
    }

    /// 0-based component.
    pub fn component(&self) -> usize {
        self.target - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearResonance {
    pub target: usize,
    pub index: MultiIndex,
    pub real_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub entries: Vec<ResonanceEntry>,
    /// Pairs with real defect in `(tolerance, NEAR_BAND]`.
    pub near: Vec<NearResonance>,
    pub max_degree: usize,
    pub tolerance: f64,
}

impl ResonanceReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Kind of the resonance `(component, index)`, if any (0-based component).
    pub fn kind_of(&self, component: usize, index: &MultiIndex) -> Option<ResonanceKind> {
        self.entries
            .iter()
            .find(|e| e.target == component + 1 && &e.index == index)
            .map(|e| e.kind)
    }

    pub fn near_of(&self, component: usize, index: &MultiIndex) -> Option<&NearResonance> {
        self.near
            .iter()
            .find(|e| e.target == component + 1 && &e.index == index)
    }

    pub fn complex(&self) -> impl Iterator<Item = &ResonanceEntry> {
        self.entries.iter().filter(|e| e.kind == ResonanceKind::Complex)
    }

    pub fn has_complex(&self) -> bool {
        self.complex().next().is_some()
    }
}

/// Real and complex defects of the pair `(j, I)` (0-based `j`).
pub fn resonance_defects(spec: &Spectrum, j: usize, index: &MultiIndex) -> (f64, f64) {
    match spec.alphas() {
        Some(alphas) => {
            let s: Complex64 = index
                .entries()
                .iter()
                .zip(alphas)
                .map(|(&e, a)| a * e as f64)
                .sum();
            ((alphas[j].re - s.re).abs(), (alphas[j] - s).norm())
        }
        None => {
            let lj = spec.lambdas[j];
            let li = index.power_of(&spec.lambdas);
            ((lj.norm() - li.norm()).abs(), (lj - li).norm())
        }
    }
}

/// Every `(j, I)` with `2 <= |I| <= max_degree` whose real defect is within
/// `tol`, with complex ones marked, plus the near-resonance advisory list.
pub fn enumerate_resonances(spec: &Spectrum, max_degree: usize, tol: f64) -> ResonanceReport {
    let n = spec.dim();
    let mut entries = Vec::new();
    let mut near = Vec::new();
    for order in 2..=max_degree as u32 {
        for index in MultiIndex::of_order(n, order) {
            for j in 0..n {
                let (real, cplx) = resonance_defects(spec, j, &index);
                if real <= tol {
                    debug_assert!(
                        index.entries()[j..].iter().all(|&e| e == 0),
                        "resonance ({}, {index}) uses a variable at or after the target",
                        j + 1
                    );
                    let kind = if cplx <= tol {
                        ResonanceKind::Complex
                    } else {
                        ResonanceKind::RealPure
                    };
                    entries.push(ResonanceEntry {
                        target: j + 1,
                        index: index.clone(),
                        kind,
                        real_defect: real,
                        complex_defect: cplx,
                    });
                } else if real <= NEAR_BAND {
                    near.push(NearResonance {
                        target: j + 1,
                        index: index.clone(),
                        real_defect: real,
                    });
                }
            }
        }
    }
    ResonanceReport {
        entries,
        near,
        max_degree,
        tolerance: tol,
    }
}

/// Smallest `q` with `|λ_1|^q < |λ_N|`; no term of degree `>= q` can be resonant.
///
/// Powers within [`TOL_RES`] of `|λ_N|` count as equal, matching the
/// resonance tolerance.
pub fn resonance_cutoff_q(spec: &Spectrum) -> usize {
    let (l1, ln) = (spec.lambda_max(), spec.lambda_min());
    let mut q = 1;
    let mut p = l1;
    while p >= ln - TOL_RES {
        q += 1;
        p *= l1;
    }
    q
}

/// Smallest `l >= 1` with `|λ_1|^l < 1/β`.
pub fn koenigs_degree_l(spec: &Spectrum, beta: f64) -> Result<usize> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(contract(format!("beta must be finite and >= 1, got {beta}")));
    }
    let l1 = spec.lambda_max();
    let target = 1.0 / beta;
    let mut l = 1;
    let mut p = l1;
    while p >= target {
        l += 1;
        p *= l1;
    }
    Ok(l)
}

/// `C_k = M / r^k + ‖A‖ / r^(k-1)`.
pub fn taylor_constant(m: f64, r: f64, a_norm: f64, k: u32) -> Result<f64> {
    if !(m > 0.0) || !(r > 0.0) || k < 2 {
        return Err(contract("taylor_constant needs M > 0, r > 0, k >= 2"));
    }
    Ok(m / r.powi(k as i32) + a_norm / r.powi(k as i32 - 1))
}
