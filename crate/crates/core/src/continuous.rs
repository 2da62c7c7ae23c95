//! Continuous time: piecewise-constant dilation Herglotz fields, jet-level
//! integration of the Loewner ODE, discretization, real-time chains and
//! Loewner PDE residuals.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chains::ChainJets;
use crate::error::{contract, Result};
use crate::families::DiscreteFamily;
use crate::jet::JetMap;
use crate::spectrum::{Spectrum, SpectrumMode};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_DELTA: f64 = 1e-3;
pub const SAMPLE_RADIUS: f64 = 0.05;
/// Allowed positive part of `Re <H(z,t), z>` at a sample.
pub const DISSIPATIVITY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub t_start: f64,
    pub t_end: f64,
    /// Higher-order part of the field on `[t_start, t_end)`.
    pub perturbation: JetMap,
}

/// `H(z, t) = Λz + P_t(z)` with `P_t` piecewise constant in `t` on `[0, T]`
/// and `P_t = 0` after `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzSpec {
    spectrum: Spectrum,
    degree: usize,
    schedule: Vec<ScheduleEntry>,
    horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipativityReport {
    /// `max Re <H(z,t), z>` over the samples.
    pub max_value: f64,
    pub worst_time: f64,
    /// `max |H(z,t)|` over the samples, a stand-in for the uniform bound
    /// of the field on the ball.
    pub sup_field: f64,
    pub samples: usize,
    pub ok: bool,
}

impl HerglotzSpec {
    /// Validates the partition and the zero linear parts, then samples the
    /// dissipativity inequality on the unit ball.
    pub fn new(spectrum: Spectrum, degree: usize, schedule: Vec<ScheduleEntry>, horizon: f64) -> Result<Self> {
        let h = HerglotzSpec::unchecked(spectrum, degree, schedule, horizon)?;
        let rep = h.dissipativity();
        if !rep.ok {
            return Err(contract(format!(
                "field is not dissipative: Re <H(z,t), z> = {:.3e} at t = {}",
                rep.max_value, rep.worst_time
            )));
        }
        Ok(h)
    }

    /// Structural checks only.
    pub fn unchecked(spectrum: Spectrum, degree: usize, schedule: Vec<ScheduleEntry>, horizon: f64) -> Result<Self> {
        if spectrum.mode() != SpectrumMode::Continuous {
            return Err(contract("a Herglotz field needs a continuous-mode spectrum"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(contract("horizon must be positive"));
        }
        let mut t = 0.0;
        for (k, e) in schedule.iter().enumerate() {
            if (e.t_start - t).abs() > 1e-12 || !(e.t_end > e.t_start) {
                return Err(contract(format!("schedule entry {k} does not continue the partition at t = {t}")));
            }
            if e.perturbation.dim() != spectrum.dim() || e.perturbation.degree() != degree {
                return Err(contract(format!("schedule entry {k} has the wrong jet shape")));
            }
            if e.perturbation.coefficient_norm(Some(1)) != 0.0 {
                return Err(contract(format!("schedule entry {k} has a linear part")));
            }
            t = e.t_end;
        }
        if !schedule.is_empty() && (t - horizon).abs() > 1e-12 {
            return Err(contract(format!("schedule ends at {t}, horizon is {horizon}")));
        }
        Ok(HerglotzSpec {
            spectrum,
            degree,
            schedule,
            horizon,
        })
    }

    /// `H = Λz` on `[0, T]`.
    pub fn linear(spectrum: Spectrum, degree: usize, horizon: f64) -> Result<Self> {
        HerglotzSpec::new(spectrum, degree, vec![], horizon)
    }

    /// One perturbation on every unit interval `[n, n+1)`, `n < horizon`.
    pub fn autonomous(spectrum: Spectrum, perturbation: JetMap, horizon: usize) -> Result<Self> {
        let degree = perturbation.degree();
        let schedule = (0..horizon)
            .map(|n| ScheduleEntry {
                t_start: n as f64,
                t_end: (n + 1) as f64,
                perturbation: perturbation.clone(),
            })
            .collect();
        HerglotzSpec::new(spectrum, degree, schedule, horizon as f64)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn schedule(&self) -> &[ScheduleEntry] {
        &self.schedule
    }

    /// Segment index active at `t` (right-continuous).
    fn segment_at(&self, t: f64) -> Option<usize> {
        self.schedule.iter().position(|e| t >= e.t_start && t < e.t_end).or_else(|| {
            // t = T belongs to the last segment
            self.schedule.last().filter(|e| t == e.t_end).map(|_| self.schedule.len() - 1)
        })
    }

    /// `P_t`, or `None` where the field is linear.
    pub fn perturbation_at(&self, t: f64) -> Option<&JetMap> {
        self.segment_at(t).map(|k| &self.schedule[k].perturbation)
    }

    /// `H(z, t)`.
    pub fn field(&self, z: &[Complex64], t: f64) -> Vec<Complex64> {
        let alphas = self.alphas();
        let mut out: Vec<Complex64> = z.iter().zip(alphas).map(|(z, a)| a * z).collect();
        if let Some(p) = self.perturbation_at(t) {
            for (o, v) in out.iter_mut().zip(p.evaluate(z)) {
                *o += v;
            }
        }
        out
    }

    fn alphas(&self) -> &[Complex64] {
        self.spectrum.alphas().expect("continuous mode checked at construction")
    }

    /// Samples `Re <H(z,t), z>` on radii up to 0.99 and one time per segment.
    pub fn dissipativity(&self) -> DissipativityReport {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x4865_726c);
        let mut dirs: Vec<Vec<Complex64>> = (0..n)
            .map(|k| (0..n).map(|j| Complex64::new((j == k) as u8 as f64, 0.0)).collect())
            .collect();
        for _ in 0..96 {
            let v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-3 {
                dirs.push(v.iter().map(|c| c / norm).collect());
            }
        }
        let mut times: Vec<f64> = self.schedule.iter().map(|e| 0.5 * (e.t_start + e.t_end)).collect();
        if times.is_empty() {
            times.push(0.0);
        }
        let mut rep = DissipativityReport {
            max_value: f64::NEG_INFINITY,
            worst_time: 0.0,
            sup_field: 0.0,
            samples: 0,
            ok: true,
        };
        for &t in &times {
            for d in &dirs {
                for r in [0.1, 0.3, 0.6, 0.9, 0.99] {
                    let z: Vec<Complex64> = d.iter().map(|c| c * r).collect();
                    let h = self.field(&z, t);
                    let v: f64 = h.iter().zip(&z).map(|(h, z)| (h * z.conj()).re).sum();
                    let size = h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    rep.sup_field = rep.sup_field.max(size);
                    rep.samples += 1;
                    if v > rep.max_value {
                        rep.max_value = v;
                        rep.worst_time = t;
                    }
                }
            }
        }
        rep.ok = rep.max_value <= DISSIPATIVITY_MARGIN;
        rep
    }
}

#[derive(Serialize, Deserialize)]
struct HerglotzJson {
    spectrum: Spectrum,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    schedule: Vec<ScheduleEntry>,
    #[serde(rename = "T")]
    horizon: f64,
}

impl Serialize for HerglotzSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HerglotzJson {
            spectrum: self.spectrum.clone(),
            degree: Some(self.degree),
            schedule: self.schedule.clone(),
            horizon: self.horizon,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HerglotzSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = HerglotzJson::deserialize(d)?;
        let degree = j
            .degree
            .or_else(|| j.schedule.first().map(|e| e.perturbation.degree()))
            .unwrap_or(6);
        HerglotzSpec::new(j.spectrum, degree, j.schedule, j.horizon).map_err(serde::de::Error::custom)
    }
}

fn exp_diag(alphas: &[Complex64], tau: f64) -> Vec<Complex64> {
    alphas.iter().map(|a| (a * tau).exp()).collect()
}

/// Right-hand side for the nonlinear part: `Λψ + P ∘ (e^{Λτ} z + ψ)`.
fn rhs(alphas: &[Complex64], p: &JetMap, tau: f64, psi: &JetMap) -> Result<JetMap> {
    let phi = JetMap::diagonal(&exp_diag(alphas, tau), psi.degree()).add(psi)?;
    psi.scale_components(alphas).add(&p.compose(&phi)?)
}

fn axpy(x: &JetMap, h: f64, k: &JetMap) -> Result<JetMap> {
    x.add(&k.scale(Complex64::new(h, 0.0)))
}

/// Jet of `φ_{s,t}`: the linear block is `e^{Λ(t-s)}` in closed form and the
/// higher coefficients are advanced by classical RK4 at a fixed step, with
/// steps split at schedule breakpoints.
pub fn integrate_evolution(h: &HerglotzSpec, s: f64, t: f64, step: f64) -> Result<JetMap> {
    if !(step > 0.0) {
        return Err(contract("integration step must be positive"));
    }
    if !(0.0 <= s && s <= t) || !t.is_finite() {
        return Err(contract(format!("need 0 <= s <= t, got s = {s}, t = {t}")));
    }
    let alphas = h.alphas();
    let mut psi = JetMap::zero(h.dim(), h.degree);
    let mut cuts: Vec<f64> = vec![s];
    for e in &h.schedule {
        if e.t_start > s && e.t_start < t {
            cuts.push(e.t_start);
        }
    }
    cuts.push(t);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let Some(p) = h.perturbation_at(a).filter(|_| b > a) else {
            // ψ' = Λψ has the closed-form solution
            psi = psi.scale_components(&exp_diag(alphas, b - a));
            continue;
        };
        let n = ((b - a) / step - 1e-9).ceil().max(1.0) as usize;
        let dt = (b - a) / n as f64;
        for i in 0..n {
            // time measured from s, so the linear block is e^{Λ(τ - s)}
            let tau = a + i as f64 * dt - s;
            let k1 = rhs(alphas, p, tau, &psi)?;
            let k2 = rhs(alphas, p, tau + dt / 2.0, &axpy(&psi, dt / 2.0, &k1)?)?;
            let k3 = rhs(alphas, p, tau + dt / 2.0, &axpy(&psi, dt / 2.0, &k2)?)?;
            let k4 = rhs(alphas, p, tau + dt, &axpy(&psi, dt, &k3)?)?;
            let incr = k1.add(&k2.scale(2.0.into()))?.add(&k3.scale(2.0.into()))?.add(&k4)?;
            psi = axpy(&psi, dt / 6.0, &incr)?;
        }
    }
    JetMap::diagonal(&exp_diag(alphas, t - s), h.degree).add(&psi)
}

/// Steps `φ_{n,n+1}` for `n < ⌊T⌋`, in discrete mode `λ = e^α`.
pub fn discretize(h: &HerglotzSpec, step: f64) -> Result<DiscreteFamily> {
    let horizon = h.horizon.floor() as usize;
    if horizon < 1 {
        return Err(contract("discretization needs T >= 1"));
    }
    let steps = (0..horizon)
        .map(|n| integrate_evolution(h, n as f64, (n + 1) as f64, step))
        .collect::<Result<Vec<_>>>()?;
    DiscreteFamily::from_steps(h.spectrum.to_discrete(), steps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityTransfer {
    /// `sup_{u in [0,1]} ‖e^{-Λu}‖ ‖e^{Λu}‖`.
    pub constant: f64,
    pub max_discrete: f64,
    pub max_continuous: f64,
    /// `max_continuous <= constant * max_discrete`.
    pub holds: bool,
}

/// Real-time chain stored as `e^{Λs} f_s` at the sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousChain {
    pub spectrum: Spectrum,
    pub times: Vec<f64>,
    pub normalized: Vec<JetMap>,
    /// Change from using `⌈s⌉ + 1` instead of `⌈s⌉`, where available.
    pub well_definedness: Vec<Option<f64>>,
    pub transfer: NormalityTransfer,
    #[serde(default)]
    pub pde_residuals: Vec<(f64, f64)>,
}

impl ContinuousChain {
    /// `f_s` at sample `k`.
    pub fn entry(&self, k: usize) -> JetMap {
        let a = self.spectrum.alphas().expect("continuous mode");
        self.normalized[k].scale_components(&exp_diag(a, -self.times[k]))
    }

    pub fn index_of(&self, s: f64) -> Option<usize> {
        self.times.iter().position(|t| (t - s).abs() <= 1e-12)
    }

    /// Weights `‖e^{Λs} f_s‖` over degrees `>= 2`.
    pub fn weights(&self) -> Vec<f64> {
        self.normalized.iter().map(|g| g.norm_where(|o| o >= 2)).collect()
    }
}

/// `e^{Λs} f_j ∘ φ_{s,j}` from the normalized discrete entry `H_j`.
fn real_time_entry(chain: &ChainJets, h: &HerglotzSpec, s: f64, j: usize, step: f64) -> Result<JetMap> {
    let phi = integrate_evolution(h, s, j as f64, step)?;
    let a = h.alphas();
    Ok(chain.normalized_entry(j).compose(&phi)?.scale_components(&exp_diag(a, s - j as f64)))
}

/// `f_s = f_j ∘ φ_{s,j}` with `j = ⌈s⌉` for each requested time.
pub fn extend_to_real_times(chain: &ChainJets, h: &HerglotzSpec, times: &[f64], step: f64) -> Result<ContinuousChain> {
    if chain.spectrum != h.spectrum.to_discrete() {
        return Err(contract("chain and field have different spectra"));
    }
    let horizon = chain.horizon();
    let mut normalized = Vec::with_capacity(times.len());
    let mut well = Vec::with_capacity(times.len());
    for &s in times {
        if !(s >= 0.0) || s > horizon as f64 {
            return Err(contract(format!("time {s} outside [0, {horizon}]")));
        }
        let j = s.ceil() as usize;
        let g = real_time_entry(chain, h, s, j, step)?;
        let dev = g.linear_part() - JetMap::identity(h.dim(), 1).linear_part();
        if dev.iter().any(|v| v.norm() > 1e-12) {
            return Err(contract(format!("linear part of f_{s} is not e^(-Λs)")));
        }
        well.push(if j < horizon {
            Some(real_time_entry(chain, h, s, j + 1, step)?.distance(&g)?)
        } else {
            None
        });
        normalized.push(g);
    }
    let alphas = h.alphas();
    let re_max = alphas.iter().map(|a| a.re).fold(f64::NEG_INFINITY, f64::max);
    let re_min = alphas.iter().map(|a| a.re).fold(f64::INFINITY, f64::min);
    let max_discrete = chain
        .normalized
        .iter()
        .map(|g| g.norm_where(|o| o >= 2))
        .fold(0.0, f64::max);
    let max_continuous = normalized.iter().map(|g| g.norm_where(|o| o >= 2)).fold(0.0, f64::max);
    let constant = (re_max - re_min).exp();
    Ok(ContinuousChain {
        spectrum: h.spectrum.clone(),
        times: times.to_vec(),
        normalized,
        well_definedness: well,
        transfer: NormalityTransfer {
            constant,
            max_discrete,
            max_continuous,
            holds: max_continuous <= constant * max_discrete * (1.0 + 1e-12),
        },
        pde_residuals: vec![],
    })
}

/// `max ‖g_t ∘ φ_{s,t} - e^{Λ(t-s)} g_s‖` over sampled pairs, `g = e^{Λs} f_s`.
pub fn continuous_subordination(chain: &ContinuousChain, h: &HerglotzSpec, step: f64) -> Result<f64> {
    let a = h.alphas();
    let hops = chain
        .times
        .windows(2)
        .map(|w| integrate_evolution(h, w[0], w[1], step))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..chain.times.len() {
        let mut phi = JetMap::identity(h.dim(), h.degree);
        for k in i + 1..chain.times.len() {
            phi = hops[k - 1].compose(&phi)?;
            let lhs = chain.normalized[k].compose(&phi)?;
            let rhs = chain.normalized[i].scale_components(&exp_diag(a, chain.times[k] - chain.times[i]));
            worst = worst.max(lhs.distance(&rhs)?);
        }
    }
    Ok(worst)
}

/// Seeded sample points in the ball of `radius`.
pub fn sample_points(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
            let r = radius * rng.gen_range(0.5..1.0);
            v.iter().map(|c| c * (r / norm)).collect()
        })
        .collect()
}

/// `max_z |(f_{s+δ}(z) - f_{s-δ}(z)) / 2δ + d_z f_s(z) H(z, s)|` with `s ± δ`
/// taken from the chain's sample times.
pub fn pde_residual(chain: &ContinuousChain, h: &HerglotzSpec, s: f64, delta: f64, samples: &[Vec<Complex64>]) -> Result<f64> {
    let (Some(lo), Some(mid), Some(hi)) = (chain.index_of(s - delta), chain.index_of(s), chain.index_of(s + delta)) else {
        return Err(contract(format!("no samples at {s} ± {delta} for central differences")));
    };
    let (f_lo, f_mid, f_hi) = (chain.entry(lo), chain.entry(mid), chain.entry(hi));
    let mut worst: f64 = 0.0;
    for z in samples {
        let dt: Vec<Complex64> = f_hi
            .evaluate(z)
            .iter()
            .zip(f_lo.evaluate(z))
            .map(|(a, b)| (a - b) / (2.0 * delta))
            .collect();
        let hz = nalgebra::DVector::from_vec(h.field(z, s));
        let jh = f_mid.jacobian(z) * hz;
        let r = dt.iter().zip(jh.iter()).map(|(a, b)| (a + b).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Extends `chain` to `{s - δ, s, s + δ}` and returns the PDE residual.
pub fn pde_probe(chain: &ChainJets, h: &HerglotzSpec, s: f64, delta: f64, step: f64, samples: &[Vec<Complex64>]) -> Result<f64> {
    let c = extend_to_real_times(chain, h, &[s - delta, s, s + delta], step)?;
    pde_residual(&c, h, s, delta, samples)
}

/// Adds `eps z_1^2` to the last component of every `f_s`.
pub fn perturbed_chain(chain: &ContinuousChain, eps: f64) -> ContinuousChain {
    let dim = chain.spectrum.dim();
    let a = chain.spectrum.alphas().expect("continuous mode");
    let mut out = chain.clone();
    let mut sq = vec![0u32; dim];
    sq[0] = 2;
    let idx = crate::jet::MultiIndex::new(sq);
    for (k, g) in out.normalized.iter_mut().enumerate() {
        // e^{Λs} scales the last component by e^{α_N s}
        let w = Complex64::new(eps, 0.0) * (a[dim - 1] * chain.times[k]).exp();
        g.add_to(dim - 1, &idx, w).expect("degree >= 2");
    }
    out
}
