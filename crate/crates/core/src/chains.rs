//! Discrete Loewner chains built from Koenigs-type limits, with
//! subordination, normality and uniqueness probes.
//!
//! Chains are stored normalized: entry `n` holds `H_n = A^n f_n`, which is
//! tangent to the identity and of moderate size, while `f_n` itself grows
//! like `|λ_N|^{-n}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::families::{growth_constants, DiscreteFamily, FamilyKind, TriangularFamily};
use crate::jet::JetMap;
use crate::normalize::{normalize_family, NormalizationResult, NormalizeOptions};
use crate::spectrum::Spectrum;

/// Coefficients of the step difference below this count as agreement.
const AGREEMENT_TOL: f64 = 1e-9;
/// Deltas below this floor are rounding noise and excluded from rate fits.
const DELTA_FLOOR: f64 = 1e-13;
/// Fewer points than this give no slope estimate.
const MIN_FIT_POINTS: usize = 5;
const RATE_SLACK: f64 = 1.1;
/// Deltas below this multiple of the iterate size are rounding.
const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOptions {
    /// Stop once two consecutive deltas are at most this.
    pub tol_conv: f64,
    pub m_max: usize,
    /// Iterations skipped before fitting the contraction rate.
    pub burn_in: usize,
    pub normalize: NormalizeOptions,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            tol_conv: 1e-11,
            m_max: 200,
            burn_in: 3,
            normalize: NormalizeOptions::default(),
        }
    }
}

/// Convergence record of one Koenigs limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoenigsReport {
    pub n: usize,
    pub iterations: usize,
    pub deltas: Vec<f64>,
    /// Order `k` with `family = T + O(|z|^k)`.
    pub agreement_order: usize,
    pub beta: f64,
    /// `|λ_1|^k < 1/β`.
    pub gap_condition: bool,
    /// Agreement at every jet degree: the limit is stationary.
    pub exact: bool,
    /// First iteration from which every step equals the normal form; later
    /// deltas are rounding only and are left out of the fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary_from: Option<usize>,
    /// `c^k β` with `c = (|λ_1| + β^{-1/k}) / 2`.
    pub predicted_ratio: f64,
    /// `exp` of the least-squares slope of `ln δ` after burn-in, over at
    /// least five deltas above the rounding floor.
    pub fitted_ratio: Option<f64>,
    /// Deltas stay under `C (1.1 c^k β)^i` and the fitted ratio, if any, is
    /// below `1.1 c^k β`. Vacuous without the gap condition.
    pub rate_ok: bool,
}

/// `A^n`-normalized chain entries `H_n = A^n f_n` for `n = 0..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainJets {
    pub spectrum: Spectrum,
    pub normalized: Vec<JetMap>,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<KoenigsReport>,
}

/// `diag(d) ∘ F ∘ diag(e)`: scales coefficient `(j, I)` by `d_j e^I`.
pub fn diagonal_sandwich(f: &JetMap, d: &[Complex64], e: &[Complex64]) -> JetMap {
    let mut out = JetMap::zero(f.dim(), f.degree());
    for (c, idx, v) in f.terms() {
        out.set_coeff(c, idx, v * d[c] * idx.power_of(e))
            .expect("key taken from a jet of the same shape");
    }
    out
}

fn powers(lambdas: &[Complex64], n: i32) -> Vec<Complex64> {
    lambdas.iter().map(|l| l.powi(n)).collect()
}

impl ChainJets {
    /// From normalized entries `H_n`.
    pub fn from_normalized(spectrum: Spectrum, normalized: Vec<JetMap>, provenance: impl Into<String>) -> Result<Self> {
        let id = JetMap::identity(spectrum.dim(), normalized.first().map_or(1, |h| h.degree()));
        for (n, h) in normalized.iter().enumerate() {
            if h.linear_part() != id.linear_part() {
                let dev = (h.linear_part() - id.linear_part()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
                if dev > 1e-12 {
                    return Err(contract(format!("entry {n} is not tangent to the identity after scaling")));
                }
            }
        }
        Ok(ChainJets {
            spectrum,
            normalized,
            provenance: provenance.into(),
            convergence: vec![],
        })
    }

    /// From unnormalized entries `f_n` with linear part `A^{-n}`.
    pub fn from_entries(spectrum: Spectrum, entries: Vec<JetMap>, provenance: impl Into<String>) -> Result<Self> {
        let normalized = entries
            .iter()
            .enumerate()
            .map(|(n, f)| f.scale_components(&powers(spectrum.lambdas(), n as i32)))
            .collect();
        ChainJets::from_normalized(spectrum, normalized, provenance)
    }

    pub fn horizon(&self) -> usize {
        self.normalized.len() - 1
    }

    /// `w_n`: size of the nonlinear part of `H_n`.
    pub fn weights(&self) -> Vec<f64> {
        self.normalized.iter().map(|h| h.norm_where(|o| o >= 2)).collect()
    }

    /// `H_n = A^n f_n`.
    pub fn normalized_entry(&self, n: usize) -> &JetMap {
        &self.normalized[n]
    }

    /// `f_n = A^{-n} H_n`.
    pub fn entry(&self, n: usize) -> JetMap {
        self.normalized[n].scale_components(&powers(self.spectrum.lambdas(), -(n as i32)))
    }
}

/// Largest `k` such that every step of `family` in `range` agrees with `T`
/// in all degrees `< k`.
fn agreement_order(family: &DiscreteFamily, t: &TriangularFamily, range: std::ops::Range<usize>) -> Result<usize> {
    let mut k = family.degree() + 1;
    for n in range {
        let d = family.step(n).sub(t.step(n))?;
        for deg in 1..k {
            if d.coefficient_norm(Some(deg)) > AGREEMENT_TOL {
                k = deg;
                break;
            }
        }
    }
    Ok(k)
}

/// Lipschitz constant used for the Koenigs gap condition.
fn koenigs_beta(t: &TriangularFamily) -> f64 {
    if t.is_linear() {
        1.0 / t.family().spectrum().lambda_min()
    } else {
        growth_constants(t).beta
    }
}

struct Limit<'a> {
    family: &'a DiscreteFamily,
    t: &'a TriangularFamily,
    k: usize,
    beta: f64,
}

impl Limit<'_> {
    /// Step `j` of the family with the degrees below `k` pinned to `T`.
    fn pinned_step(&self, j: usize) -> Result<JetMap> {
        let high = self.family.step(j).filter_orders(|o| o >= self.k);
        let low = self.t.step(j).filter_orders(|o| o < self.k);
        low.add(&high)
    }

    /// `h_n = lim_j T_{j,n} ∘ φ_{n,j}`.
    fn run(&self, n: usize, opts: &ChainOptions) -> Result<(JetMap, KoenigsReport)> {
        let spec = self.family.spectrum();
        let dim = spec.dim();
        let degree = self.family.degree();
        let linear_t = self.t.is_linear();
        let mut s = JetMap::identity(dim, degree); // T_{j,n}
        let mut p = JetMap::identity(dim, degree); // φ_{n,j}
        let mut y = JetMap::identity(dim, degree);
        let mut deltas = Vec::new();
        let mut streak = 0;
        let mut last_moving = None;
        let mut j = n;
        while streak < 2 {
            if deltas.len() >= opts.m_max {
                return Err(Error::NonConvergence {
                    entry: n,
                    iterations: deltas.len(),
                    last: deltas.last().copied().unwrap_or(f64::NAN),
                    history: deltas,
                });
            }
            let step = self.pinned_step(j)?;
            if step != *self.t.step(j) {
                last_moving = Some(deltas.len());
            }
            p = step.compose(&p)?;
            j += 1;
            let next = if linear_t {
                p.scale_components(&powers(spec.lambdas(), -((j - n) as i32)))
            } else {
                s = s.compose(self.t.inverse_step(j - 1))?;
                s.compose(&p)?
            };
            let delta = next.distance(&y)?;
            if !delta.is_finite() {
                return Err(Error::NonConvergence {
                    entry: n,
                    iterations: deltas.len() + 1,
                    last: delta,
                    history: deltas,
                });
            }
            deltas.push(delta);
            streak = if delta <= opts.tol_conv { streak + 1 } else { 0 };
            y = next;
        }
        let stationary_from = match last_moving {
            Some(i) if i + 1 < deltas.len() => Some(i + 1),
            Some(_) => None,
            None => Some(0),
        };
        let floor = DELTA_FLOOR.max(ROUNDING_FLOOR * y.coefficient_norm(None));
        let fit_len = stationary_from.unwrap_or(deltas.len());
        let mut report = rate_report(n, deltas, fit_len, floor, self.k, self.beta, spec, opts.burn_in);
        report.exact = self.k > degree;
        report.stationary_from = stationary_from;
        Ok((y, report))
    }
}

#[allow(clippy::too_many_arguments)]
fn rate_report(
    n: usize,
    deltas: Vec<f64>,
    fit_len: usize,
    floor: f64,
    k: usize,
    beta: f64,
    spec: &Spectrum,
    burn_in: usize,
) -> KoenigsReport {
    let l1 = spec.lambda_max();
    let gap_condition = l1.powi(k as i32) * beta < 1.0;
    let c = (l1 + beta.powf(-1.0 / k as f64)) / 2.0;
    let predicted_ratio = c.powi(k as i32) * beta;
    let pts: Vec<(f64, f64)> = deltas[..fit_len]
        .iter()
        .enumerate()
        .skip(burn_in)
        .filter(|(_, d)| **d > floor)
        .map(|(i, d)| (i as f64, d.ln()))
        .collect();
    let fitted_ratio = (pts.len() >= MIN_FIT_POINTS).then(|| least_squares_slope(&pts).exp());
    // envelope δ_i <= C q^i with C set by the burn-in deltas
    let q = predicted_ratio * RATE_SLACK;
    let head = burn_in.min(fit_len);
    let scale = deltas[..head].iter().enumerate().map(|(i, d)| d / q.powi(i as i32)).fold(0.0, f64::max);
    let envelope_ok = pts.iter().all(|&(i, ln_d)| ln_d <= (scale * q.powi(i as i32)).ln());
    let rate_ok = !gap_condition || (envelope_ok && fitted_ratio.is_none_or(|r| r <= q));
    KoenigsReport {
        n,
        iterations: deltas.len(),
        deltas,
        agreement_order: k,
        beta,
        gap_condition,
        exact: false,
        stationary_from: None,
        predicted_ratio,
        fitted_ratio,
        rate_ok,
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `h_n = lim_j T_{j,n} ∘ φ_{n,j}` for a family agreeing with `T` to some
/// order. Degrees where they agree are taken from `T` exactly.
pub fn koenigs_intertwiner(
    family: &DiscreteFamily,
    t: &TriangularFamily,
    n: usize,
    opts: &ChainOptions,
) -> Result<(JetMap, KoenigsReport)> {
    if family.spectrum() != t.family().spectrum() || family.degree() != t.family().degree() {
        return Err(contract("family and normal form must share spectrum and degree"));
    }
    let k = agreement_order(family, t, n..n + opts.m_max)?;
    let limit = Limit {
        family,
        t,
        k,
        beta: koenigs_beta(t),
    };
    limit.run(n, opts)
}

/// Chain `f_n = lim_m T_{m,0} ∘ K_m ∘ φ_{n,m}` for `n = 0..=horizon`,
/// evaluated as `A^n f_n = (A^n T_{n,0}) ∘ h_n ∘ K_n`.
pub fn build_chain(normalization: &NormalizationResult, horizon: usize, opts: &ChainOptions) -> Result<ChainJets> {
    let t = &normalization.normal_form;
    let psi = &normalization.final_family;
    let spec = &normalization.spectrum;
    let limit = Limit {
        family: psi,
        t,
        k: normalization.agreement_order,
        beta: normalization.beta,
    };
    // A^n T_{n,0}, advanced as A ∘ N_n ∘ T_{n+1,n}
    let a = JetMap::diagonal(spec.lambdas(), psi.degree());
    let mut scaled_reversed = JetMap::identity(spec.dim(), psi.degree());
    let mut normalized = Vec::with_capacity(horizon + 1);
    let mut convergence = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        if n > 0 {
            scaled_reversed = a.compose(&scaled_reversed.compose(t.inverse_step(n - 1))?)?;
        }
        let (h, report) = limit.run(n, opts)?;
        normalized.push(scaled_reversed.compose(&h)?.compose(normalization.conjugator(n))?);
        convergence.push(report);
    }
    let mut chain = ChainJets::from_normalized(spec.clone(), normalized, "koenigs-limit")?;
    chain.convergence = convergence;
    Ok(chain)
}

/// Normalizes `family` (extended with enough trailing steps for the limits)
/// and builds its chain over the family's horizon.
pub fn construct_chain(family: &DiscreteFamily, opts: &ChainOptions) -> Result<(NormalizationResult, ChainJets)> {
    let horizon = family.horizon();
    let extended = match family.kind() {
        FamilyKind::Table => family.extended(opts.m_max + 2),
        FamilyKind::Periodic { .. } => family.clone(),
    };
    let normalization = normalize_family(&extended, &opts.normalize)?;
    let chain = build_chain(&normalization, horizon, opts)?;
    Ok((normalization, chain))
}

/// `A^n T_{m,0} ∘ K_m ∘ φ_{n,m}` at a fixed `m`: the defining expression
/// before the limit, for cross-checks at moderate `m - n`.
pub fn direct_chain_term(
    family: &DiscreteFamily,
    normalization: &NormalizationResult,
    n: usize,
    m: usize,
) -> Result<JetMap> {
    let reversed = normalization.normal_form.reversed_map(m, 0)?;
    let g = reversed.compose(normalization.conjugator(m))?;
    let x = g.compose(&family.two_index_map(n, m)?)?;
    Ok(x.scale_components(&powers(normalization.spectrum.lambdas(), n as i32)))
}

/// `max_{n <= m} ‖H_m ∘ φ_{n,m} - A^{m-n} H_n‖`, the subordination
/// `f_m ∘ φ_{n,m} = f_n` multiplied on the left by `A^m`.
pub fn subordination_residual(chain: &ChainJets, family: &DiscreteFamily) -> Result<f64> {
    let horizon = chain.horizon().min(family.horizon());
    let lam = chain.spectrum.lambdas();
    let mut worst: f64 = 0.0;
    for n in 0..=horizon {
        let mut phi = JetMap::identity(family.dim(), family.degree());
        for m in n..=horizon {
            if m > n {
                phi = family.step(m - 1).compose(&phi)?;
            }
            let lhs = chain.normalized_entry(m).compose(&phi)?;
            let rhs = chain.normalized_entry(n).scale_components(&powers(lam, (m - n) as i32));
            worst = worst.max(lhs.distance(&rhs)?);
        }
    }
    Ok(worst)
}

/// `f_m ∘ φ_{n,m}`, which equals `f_n` at jet level.
pub fn extend_chain_jet(chain: &ChainJets, family: &DiscreteFamily, n: usize, m: usize) -> Result<JetMap> {
    if n > m || m > chain.horizon() {
        return Err(contract(format!("extension ({n}, {m}) outside the chain horizon")));
    }
    chain.entry(m).compose(&family.two_index_map(n, m)?)
}

/// Same as [`extend_chain_jet`], multiplied by `A^n`.
pub fn extend_chain_jet_normalized(chain: &ChainJets, family: &DiscreteFamily, n: usize, m: usize) -> Result<JetMap> {
    if n > m || m > chain.horizon() {
        return Err(contract(format!("extension ({n}, {m}) outside the chain horizon")));
    }
    let lam = chain.spectrum.lambdas();
    let x = chain.normalized_entry(m).compose(&family.two_index_map(n, m)?)?;
    Ok(x.scale_components(&powers(lam, -((m - n) as i32))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    /// `Ψ_0`.
    pub psi: JetMap,
    /// `max_n ‖Ψ_n - Ψ_0‖`.
    pub max_deviation: f64,
    pub n_independent: bool,
    /// `‖Ψ_0 - id‖`.
    pub distance_from_identity: f64,
}

/// `Ψ_n = g_n ∘ f_n^{-1} = A^{-n} (G_n ∘ F_n^{-1}) A^n` with `F, G` the
/// normalized entries.
pub fn transfer_map(chain_f: &ChainJets, chain_g: &ChainJets, n: usize) -> Result<JetMap> {
    if chain_f.spectrum != chain_g.spectrum {
        return Err(contract("chains have different linear parts"));
    }
    let lam = chain_f.spectrum.lambdas();
    let x = chain_g.normalized_entry(n).compose(&chain_f.normalized_entry(n).invert()?)?;
    Ok(diagonal_sandwich(&x, &powers(lam, -(n as i32)), &powers(lam, n as i32)))
}

/// Computes `Ψ_n` for every common `n` and checks it is one fixed jet.
pub fn transfer_report(chain_f: &ChainJets, chain_g: &ChainJets, tol: f64) -> Result<TransferReport> {
    let psi = transfer_map(chain_f, chain_g, 0)?;
    let horizon = chain_f.horizon().min(chain_g.horizon());
    let mut max_deviation: f64 = 0.0;
    for n in 1..=horizon {
        max_deviation = max_deviation.max(transfer_map(chain_f, chain_g, n)?.distance(&psi)?);
    }
    let distance_from_identity = psi.distance(&JetMap::identity(psi.dim(), psi.degree()))?;
    Ok(TransferReport {
        psi,
        max_deviation,
        n_independent: max_deviation <= tol,
        distance_from_identity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityThresholds {
    pub bound_cap: f64,
    /// Slopes at or below this are flat.
    pub slope_tol: f64,
    /// Slopes above this are growth.
    pub slope_growing: f64,
    /// Running max at the horizon over running max at half the horizon.
    pub doubling_ratio: f64,
}

impl Default for NormalityThresholds {
    fn default() -> Self {
        NormalityThresholds {
            bound_cap: 1e6,
            slope_tol: 1e-3,
            slope_growing: 1e-2,
            doubling_ratio: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityDiagnostic {
    /// `w_n = ‖A^n f_n‖` over degrees `>= 2`.
    pub weights: Vec<f64>,
    /// Least-squares slope of `ln w_n` over the last half.
    pub slope: f64,
    pub max_weight: f64,
    pub growth_ratio: f64,
    pub verdict: Verdict,
}

/// Weights below this are treated as zero.
const WEIGHT_FLOOR: f64 = 1e-14;

pub fn normality_from_weights(weights: Vec<f64>, th: &NormalityThresholds) -> Result<NormalityDiagnostic> {
    let h = weights.len() - 1;
    if h < 8 {
        return Err(contract("normality diagnostic needs a horizon of at least 8"));
    }
    let pts: Vec<(f64, f64)> = (h / 2..=h)
        .map(|n| (n as f64, weights[n].max(WEIGHT_FLOOR).ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let max_weight = weights.iter().copied().fold(0.0, f64::max);
    let half_max = weights[..=h / 2].iter().copied().fold(0.0, f64::max);
    let growth_ratio = if half_max > 1e-10 {
        max_weight / half_max
    } else if max_weight > 1e-10 {
        f64::INFINITY
    } else {
        1.0
    };
    let doubled = growth_ratio >= th.doubling_ratio * (1.0 - 1e-9);
    let verdict = if max_weight > th.bound_cap || slope > th.slope_growing || doubled {
        Verdict::Growing
    } else if slope <= th.slope_tol {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    Ok(NormalityDiagnostic {
        weights,
        slope,
        max_weight,
        growth_ratio,
        verdict,
    })
}

pub fn normality_diagnostic(chain: &ChainJets, th: &NormalityThresholds) -> Result<NormalityDiagnostic> {
    normality_from_weights(chain.weights(), th)
}
