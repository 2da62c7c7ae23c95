//! Discrete dilation evolution families, triangular families and their
//! quantitative constants.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::jet::{JetMap, MultiIndex};
use crate::spectrum::{Spectrum, SpectrumMode};

/// Maximum deviation allowed between a step's linear part and `diag(λ)`.
const LINEAR_PART_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// Explicit steps `0..len`, then the linear step `A z` forever.
    Table,
    /// `φ_{n,n+1} = steps[n mod period]`.
    Periodic { period: usize },
}

/// A discrete dilation evolution family, known through its one-step jets.
///
/// Two-index maps are memoized over aligned dyadic blocks, so any `φ_{n,m}`
/// costs `O(log(m - n))` compositions once the blocks exist.
pub struct DiscreteFamily {
    spectrum: Spectrum,
    degree: usize,
    kind: FamilyKind,
    steps: Vec<JetMap>,
    tail: JetMap,
    horizon: usize,
    blocks: RwLock<HashMap<(usize, u32), Arc<JetMap>>>,
}

impl Clone for DiscreteFamily {
    fn clone(&self) -> Self {
        DiscreteFamily {
            spectrum: self.spectrum.clone(),
            degree: self.degree,
            kind: self.kind,
            steps: self.steps.clone(),
            tail: self.tail.clone(),
            horizon: self.horizon,
            blocks: RwLock::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for DiscreteFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteFamily")
            .field("spectrum", &self.spectrum)
            .field("degree", &self.degree)
            .field("kind", &self.kind)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

fn check_step(spec: &Spectrum, degree: usize, n: usize, step: &JetMap) -> Result<()> {
    if step.dim() != spec.dim() || step.degree() != degree {
        return Err(contract(format!(
            "step {n} has shape ({}, {}), expected ({}, {degree})",
            step.dim(),
            step.degree(),
            spec.dim()
        )));
    }
    let lin = step.linear_part();
    for r in 0..spec.dim() {
        for c in 0..spec.dim() {
            let want = if r == c { spec.lambdas()[r] } else { Complex64::new(0.0, 0.0) };
            if (lin[(r, c)] - want).norm() > LINEAR_PART_TOL {
                return Err(contract(format!("step {n} linear part is not diag(lambda)")));
            }
        }
    }
    Ok(())
}

impl DiscreteFamily {
    fn build(spectrum: Spectrum, degree: usize, kind: FamilyKind, steps: Vec<JetMap>, horizon: usize) -> Result<Self> {
        if spectrum.mode() != SpectrumMode::Discrete {
            return Err(contract("families need a discrete-mode spectrum"));
        }
        if degree < 1 {
            return Err(contract("degree must be >= 1"));
        }
        for (n, s) in steps.iter().enumerate() {
            check_step(&spectrum, degree, n, s)?;
        }
        let tail = JetMap::diagonal(spectrum.lambdas(), degree);
        Ok(DiscreteFamily {
            spectrum,
            degree,
            kind,
            steps,
            tail,
            horizon,
            blocks: RwLock::new(HashMap::new()),
        })
    }

    /// Table family with `steps[n] = φ_{n,n+1}`; horizon is `steps.len()`.
    pub fn from_steps(spectrum: Spectrum, steps: Vec<JetMap>) -> Result<Self> {
        let degree = steps.first().map(|s| s.degree()).ok_or_else(|| contract("no steps"))?;
        let horizon = steps.len();
        DiscreteFamily::build(spectrum, degree, FamilyKind::Table, steps, horizon)
    }

    /// Table family generated by `step(n)` for `n < horizon`.
    pub fn from_fn(spectrum: Spectrum, horizon: usize, step: impl Fn(usize) -> JetMap) -> Result<Self> {
        DiscreteFamily::from_steps(spectrum, (0..horizon.max(1)).map(step).collect())
            .map(|f| f.with_horizon(horizon))
    }

    /// `φ_{n,n+1} = period_steps[n mod p]`, observed up to `horizon`.
    pub fn periodic(spectrum: Spectrum, period_steps: Vec<JetMap>, horizon: usize) -> Result<Self> {
        let degree = period_steps
            .first()
            .map(|s| s.degree())
            .ok_or_else(|| contract("empty period"))?;
        let period = period_steps.len();
        DiscreteFamily::build(spectrum, degree, FamilyKind::Periodic { period }, period_steps, horizon)
    }

    /// `φ_{n,n+1} = A z`.
    pub fn linear(spectrum: Spectrum, degree: usize, horizon: usize) -> Result<Self> {
        let step = JetMap::diagonal(spectrum.lambdas(), degree);
        DiscreteFamily::periodic(spectrum, vec![step], horizon)
    }

    fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    /// Same steps, observed over `extra` more indices (linear tail for tables).
    pub fn extended(&self, extra: usize) -> DiscreteFamily {
        self.clone().with_horizon(self.horizon + extra)
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

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn period(&self) -> Option<usize> {
        match self.kind {
            FamilyKind::Periodic { period } => Some(period),
            FamilyKind::Table => None,
        }
    }

    /// `φ_{n,n+1}` for any `n` (the generator rule, not limited by the horizon).
    pub fn step(&self, n: usize) -> &JetMap {
        match self.kind {
            FamilyKind::Periodic { period } => &self.steps[n % period],
            FamilyKind::Table => self.steps.get(n).unwrap_or(&self.tail),
        }
    }

    /// The stored steps (one period, or the explicit table).
    pub fn stored_steps(&self) -> &[JetMap] {
        &self.steps
    }

    /// Every distinct step the generator can produce.
    pub fn distinct_steps(&self) -> Vec<&JetMap> {
        let mut v: Vec<&JetMap> = self.steps.iter().collect();
        if self.kind == FamilyKind::Table {
            v.push(&self.tail);
        }
        v
    }

    /// Same kind and horizon with new stored steps.
    pub fn with_steps(&self, steps: Vec<JetMap>) -> Result<DiscreteFamily> {
        let kind = match self.kind {
            FamilyKind::Periodic { .. } => FamilyKind::Periodic { period: steps.len() },
            FamilyKind::Table => FamilyKind::Table,
        };
        DiscreteFamily::build(self.spectrum.clone(), self.degree, kind, steps, self.horizon)
    }

    /// Rebuilds the family with every stored step mapped by `f(n, step)`.
    pub fn map_steps(&self, f: impl Fn(usize, &JetMap) -> Result<JetMap>) -> Result<DiscreteFamily> {
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(n, s)| f(n, s))
            .collect::<Result<Vec<_>>>()?;
        DiscreteFamily::build(self.spectrum.clone(), self.degree, self.kind, steps, self.horizon)
    }

    fn block(&self, start: usize, log: u32) -> Result<Arc<JetMap>> {
        if log == 0 {
            return Ok(Arc::new(self.step(start).clone()));
        }
        let key = match self.kind {
            FamilyKind::Periodic { period } => (start % period, log),
            FamilyKind::Table if start >= self.steps.len() => (self.steps.len(), log),
            FamilyKind::Table => (start, log),
        };
        if let Some(b) = self.blocks.read().expect("memo poisoned").get(&key) {
            return Ok(b.clone());
        }
        let half = 1usize << (log - 1);
        let lo = self.block(start, log - 1)?;
        let hi = self.block(start + half, log - 1)?;
        let b = Arc::new(hi.compose(&lo)?);
        self.blocks.write().expect("memo poisoned").insert(key, b.clone());
        Ok(b)
    }

    /// `φ_{n,m} = φ_{m-1,m} ∘ ... ∘ φ_{n,n+1}`, identity when `n = m`.
    pub fn two_index_map(&self, n: usize, m: usize) -> Result<JetMap> {
        if n > m || m > self.horizon {
            return Err(contract(format!(
                "two-index map ({n}, {m}) outside 0 <= n <= m <= {}",
                self.horizon
            )));
        }
        let mut acc = JetMap::identity(self.dim(), self.degree);
        let mut pos = n;
        while pos < m {
            // largest aligned dyadic block starting at pos and fitting before m
            let mut log = 0u32;
            while pos.is_multiple_of(1usize << (log + 1)) && pos + (1usize << (log + 1)) <= m {
                log += 1;
            }
            let b = self.block(pos, log)?;
            acc = b.compose(&acc)?;
            pos += 1usize << log;
        }
        Ok(acc)
    }

    /// Sup of coefficient moduli of order `>= 2` over all distinct steps.
    pub fn coefficient_bound(&self) -> f64 {
        self.distinct_steps()
            .iter()
            .map(|s| s.norm_where(|o| o >= 2))
            .fold(0.0, f64::max)
    }
}

/// True when component `j` is `λ_j z_j` plus terms of order `>= 2` in
/// `z_1..z_{j-1}` only.
pub fn is_triangular(t: &JetMap) -> bool {
    let n = t.dim();
    for (c, idx, _) in t.terms() {
        if idx.order() == 1 {
            if idx.get(c) != 1 {
                return false;
            }
        } else if idx.entries()[c..n].iter().any(|&e| e != 0) {
            return false;
        }
    }
    t.linear_diagonal().iter().all(|l| l.norm() > 0.0)
}

fn check_triangular(t: &JetMap) -> Result<()> {
    if is_triangular(t) {
        Ok(())
    } else {
        Err(contract("map is not triangular with invertible diagonal"))
    }
}

/// Inverse of a triangular map by back-substitution
/// `z_j = (w_j - t_j(z_1..z_{j-1})) / λ_j`, at the map's own degree.
pub fn triangular_inverse_step(t: &JetMap) -> Result<JetMap> {
    check_triangular(t)?;
    let diag = t.linear_diagonal();
    let inv_diag: Vec<Complex64> = diag.iter().map(|l| l.inv()).collect();
    let shear = t.sub(&JetMap::diagonal(&diag, t.degree()))?;
    let w = JetMap::identity(t.dim(), t.degree());
    let mut g = JetMap::diagonal(&inv_diag, t.degree());
    // component j is final after j passes
    for _ in 1..t.dim() {
        g = w.sub(&shear.compose(&g)?)?.scale_components(&inv_diag);
    }
    Ok(g)
}

/// Degrees of the components of the exact inverse of a triangular map
/// with component degrees `mu`.
pub fn inverse_component_degrees(t: &JetMap) -> Vec<usize> {
    let mut deg = vec![1usize; t.dim()];
    for j in 0..t.dim() {
        for (c, idx, _) in t.terms() {
            if c == j && idx.order() >= 2 {
                let d: usize = idx
                    .entries()
                    .iter()
                    .zip(&deg)
                    .map(|(&e, &dk)| e as usize * dk)
                    .sum();
                deg[j] = deg[j].max(d);
            }
        }
    }
    deg
}

/// Exact polynomial inverse of a triangular map, raised to the degree
/// needed to hold it without truncation.
pub fn triangular_inverse_exact(t: &JetMap) -> Result<JetMap> {
    check_triangular(t)?;
    let d = inverse_component_degrees(t).into_iter().max().unwrap_or(1).max(t.degree());
    triangular_inverse_step(&t.with_degree(d))
}

/// Exact value of `T^{-1}(w)` for a triangular `T`.
pub fn eval_triangular_inverse(t: &JetMap, w: &[Complex64]) -> Vec<Complex64> {
    let diag = t.linear_diagonal();
    let mut z = vec![Complex64::new(0.0, 0.0); t.dim()];
    for j in 0..t.dim() {
        // z_j.. are still zero, so this is t_j(z_1..z_{j-1})
        let tj = t.evaluate_component(j, &z);
        z[j] = (w[j] - tj) / diag[j];
    }
    z
}

/// Structure and size certificate of a triangular family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularCertificate {
    /// `μ^(j) = max_n deg` of component `j` (at least 1).
    pub component_degrees: Vec<usize>,
    /// Sup of coefficient moduli of the steps.
    pub coeff_bound: f64,
    /// Sup of the step degrees.
    pub degree_bound: usize,
}

/// A family of triangular automorphisms `T_{n,n+1}`.
#[derive(Debug, Clone)]
pub struct TriangularFamily {
    family: DiscreteFamily,
    certificate: TriangularCertificate,
    inverses: Vec<JetMap>,
    inverse_tail: Option<JetMap>,
}

impl TriangularFamily {
    pub fn new(family: DiscreteFamily) -> Result<Self> {
        let n = family.dim();
        let mut mu = vec![1usize; n];
        for s in family.distinct_steps() {
            check_triangular(s)?;
            for (j, m) in mu.iter_mut().enumerate() {
                *m = (*m).max(s.component_degree(j));
            }
        }
        let coeff_bound = family
            .distinct_steps()
            .iter()
            .map(|s| s.coefficient_norm(None))
            .fold(0.0, f64::max);
        let inverses = family
            .stored_steps()
            .iter()
            .map(triangular_inverse_step)
            .collect::<Result<Vec<_>>>()?;
        let inverse_tail = match family.kind() {
            FamilyKind::Table => Some(triangular_inverse_step(&family.tail)?),
            FamilyKind::Periodic { .. } => None,
        };
        let degree_bound = *mu.iter().max().expect("dim >= 1");
        Ok(TriangularFamily {
            family,
            certificate: TriangularCertificate {
                component_degrees: mu,
                coeff_bound,
                degree_bound,
            },
            inverses,
            inverse_tail,
        })
    }

    /// The linear family `T_{n,n+1} = A z`.
    pub fn linear(spectrum: Spectrum, degree: usize, horizon: usize) -> Result<Self> {
        TriangularFamily::new(DiscreteFamily::linear(spectrum, degree, horizon)?)
    }

    pub fn family(&self) -> &DiscreteFamily {
        &self.family
    }

    pub fn certificate(&self) -> &TriangularCertificate {
        &self.certificate
    }

    pub fn step(&self, n: usize) -> &JetMap {
        self.family.step(n)
    }

    /// `T_{n+1,n}` as a jet.
    pub fn inverse_step(&self, n: usize) -> &JetMap {
        match self.family.kind() {
            FamilyKind::Periodic { period } => &self.inverses[n % period],
            FamilyKind::Table => self
                .inverses
                .get(n)
                .unwrap_or_else(|| self.inverse_tail.as_ref().expect("table tail")),
        }
    }

    /// True when every step is `A z`.
    pub fn is_linear(&self) -> bool {
        self.certificate.degree_bound == 1
    }

    pub fn two_index_map(&self, n: usize, m: usize) -> Result<JetMap> {
        self.family.two_index_map(n, m)
    }

    /// `T_{m,n} = (T_{n,m})^{-1}`, composed from per-step inverses.
    pub fn reversed_map(&self, m: usize, n: usize) -> Result<JetMap> {
        if n > m || m > self.family.horizon() {
            return Err(contract(format!(
                "reversed map ({m}, {n}) outside 0 <= n <= m <= {}",
                self.family.horizon()
            )));
        }
        let mut acc = JetMap::identity(self.family.dim(), self.family.degree());
        for k in n..m {
            acc = acc.compose(self.inverse_step(k))?;
        }
        Ok(acc)
    }

    /// Exact `T_{k,0}(z)`.
    pub fn eval_reversed(&self, k: usize, z: &[Complex64]) -> Vec<Complex64> {
        let mut w = z.to_vec();
        for step in (0..k).rev() {
            w = eval_triangular_inverse(self.step(step), &w);
        }
        w
    }

    /// Exact `T_{0,k}(z)`.
    pub fn eval_forward(&self, k: usize, z: &[Complex64]) -> Vec<Complex64> {
        let mut w = z.to_vec();
        for step in 0..k {
            w = self.step(step).evaluate(&w);
        }
        w
    }
}

/// `μ^(1)···μ^(N)`, a bound on `deg T_{0,k}` for every `k`.
pub fn degree_bound_composed(family: &TriangularFamily) -> usize {
    family.certificate.component_degrees.iter().product()
}

/// Degree bound for the reversed maps `T_{k,0}`.
pub fn reversed_degree_bound(family: &TriangularFamily) -> usize {
    let n = family.family.dim();
    let mut mu = vec![1usize; n];
    for s in family.family.distinct_steps() {
        for (j, d) in inverse_component_degrees(s).into_iter().enumerate() {
            mu[j] = mu[j].max(d);
        }
    }
    mu.iter().product()
}

/// Constants `γ = M C^d` and `β = 2N√N γ` bounding `T_{k,0}` on the unit polydisc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    /// Raw sup of `|T_{n+1,n}|` over the boundary samples.
    pub c_sampled: f64,
    /// `max(1, 1.05 · c_sampled)`.
    pub c: f64,
    pub d: usize,
    pub m: f64,
    pub gamma: f64,
    pub beta: f64,
}

/// Points of the distinguished boundary `|z_k| = 1`: a `16^N` grid for
/// `N <= 3`, `2^N · 64` seeded random points otherwise.
pub fn torus_samples(dim: usize) -> Vec<Vec<Complex64>> {
    let tau = std::f64::consts::TAU;
    if dim <= 3 {
        let mut pts = vec![vec![]];
        for _ in 0..dim {
            pts = pts
                .into_iter()
                .flat_map(|p: Vec<Complex64>| {
                    (0..16).map(move |k| {
                        let mut q = p.clone();
                        q.push(Complex64::from_polar(1.0, tau * k as f64 / 16.0));
                        q
                    })
                })
                .collect();
        }
        pts
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x70_72_75);
        (0..(64usize << dim))
            .map(|_| (0..dim).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..tau))).collect())
            .collect()
    }
}

fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn growth_constants(family: &TriangularFamily) -> GrowthConstants {
    let n = family.family.dim();
    let samples = torus_samples(n);
    let c_sampled = family
        .family
        .distinct_steps()
        .iter()
        .flat_map(|s| samples.iter().map(move |z| sup_norm(&eval_triangular_inverse(s, z))))
        .fold(0.0, f64::max);
    let c = (1.05 * c_sampled).max(1.0);
    let d = reversed_degree_bound(family);
    let m = binomial(d + n, n);
    let gamma = m * c.powi(d as i32);
    let beta = 2.0 * n as f64 * (n as f64).sqrt() * gamma;
    GrowthConstants {
        c_sampled,
        c,
        d,
        m,
        gamma,
        beta,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionReport {
    /// `max_z |T_{0,n}(z)|` (sup norm) for `n = 0..=n_max`.
    pub max_modulus: Vec<f64>,
    /// Worst `|T^{(1)}_{0,n}(z) - λ_1^n z_1|`.
    pub first_component_defect: f64,
    pub threshold: f64,
    pub converged: bool,
}

/// Evaluates `T_{0,n}` on the samples for `n <= n_max`.
pub fn attraction_check(
    family: &TriangularFamily,
    samples: &[Vec<Complex64>],
    n_max: usize,
    threshold: f64,
) -> AttractionReport {
    let l1 = family.family.spectrum().lambdas()[0];
    let mut max_modulus = vec![0.0; n_max + 1];
    let mut defect: f64 = 0.0;
    for z in samples {
        let mut w = z.clone();
        let mut p = Complex64::new(1.0, 0.0);
        max_modulus[0] = f64::max(max_modulus[0], sup_norm(&w));
        for k in 1..=n_max {
            w = family.step(k - 1).evaluate(&w);
            p *= l1;
            max_modulus[k] = f64::max(max_modulus[k], sup_norm(&w));
            defect = defect.max((w[0] - p * z[0]).norm());
        }
    }
    let converged = max_modulus[n_max] < threshold;
    AttractionReport {
        max_modulus,
        first_component_defect: defect,
        threshold,
        converged,
    }
}

/// Radius `s` with `|φ_{n,n+1}(z)| <= α|z|` for `|z| <= s`, from
/// `|φ(z)| <= |λ_1||z| + C|z|^2` on the unit ball, `C` the largest
/// `ℓ1` sum of nonlinear coefficient moduli over the steps.
pub fn contraction_radius(family: &DiscreteFamily, alpha: f64) -> Result<f64> {
    let l1 = family.spectrum().lambda_max();
    if !(alpha > l1 && alpha < 1.0) {
        return Err(contract(format!("alpha = {alpha} must lie in (|lambda_1|, 1) = ({l1}, 1)")));
    }
    let c = family
        .distinct_steps()
        .iter()
        .map(|s| s.nonlinear_l1())
        .fold(0.0, f64::max);
    if c == 0.0 {
        return Ok(1.0);
    }
    Ok(((alpha - l1) / c).min(1.0))
}

/// Wire form of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub spectrum: Spectrum,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<JetMap>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorJson {
    Periodic { steps: Vec<JetMap>, horizon: usize },
    Table { steps: Vec<JetMap> },
    Scenario {
        name: String,
        #[serde(default)]
        params: serde_json::Value,
    },
}

impl FamilyJson {
    /// Families given by steps or by a periodic/table generator; scenario
    /// generators are resolved by the scenarios module.
    pub fn to_family(&self) -> Result<DiscreteFamily> {
        let fam = match (&self.steps, &self.generator) {
            (Some(steps), None) => DiscreteFamily::from_steps(self.spectrum.clone(), steps.clone()),
            (None, Some(GeneratorJson::Table { steps })) => {
                DiscreteFamily::from_steps(self.spectrum.clone(), steps.clone())
            }
            (None, Some(GeneratorJson::Periodic { steps, horizon })) => {
                DiscreteFamily::periodic(self.spectrum.clone(), steps.clone(), *horizon)
            }
            (None, Some(GeneratorJson::Scenario { .. })) => {
                return Err(Error::Parse("scenario generators are resolved by name".into()))
            }
            _ => return Err(Error::Parse("family needs exactly one of steps or generator".into())),
        }
        .map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(d) = self.degree {
            if d != fam.degree() {
                return Err(Error::Parse(format!("declared degree {d} but steps have {}", fam.degree())));
            }
        }
        Ok(fam)
    }

    pub fn from_family(f: &DiscreteFamily) -> FamilyJson {
        let generator = match f.kind() {
            FamilyKind::Table => GeneratorJson::Table {
                steps: f.stored_steps().to_vec(),
            },
            FamilyKind::Periodic { .. } => GeneratorJson::Periodic {
                steps: f.stored_steps().to_vec(),
                horizon: f.horizon(),
            },
        };
        FamilyJson {
            spectrum: f.spectrum().clone(),
            degree: Some(f.degree()),
            steps: None,
            generator: Some(generator),
        }
    }
}

/// `(λ_1 z_1, λ_2 z_2 + a z_1^2)` at the given degree.
pub fn quadratic_shear_step(lambdas: [Complex64; 2], a: Complex64, degree: usize) -> JetMap {
    let mut s = JetMap::diagonal(&lambdas, degree);
    if degree >= 2 {
        s.set_coeff(1, &MultiIndex::from([2, 0]), a).expect("valid key");
    }
    s
}
