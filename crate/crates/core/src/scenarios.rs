//! Named counterexample scenarios: two distinct normal chains for one linear
//! family, a resonant semigroup without normal chains, an adversarial
//! pure-real-resonance family, and a periodic family whose pure real
//! resonances do not obstruct a normal chain.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chains::{
    construct_chain, normality_diagnostic, subordination_residual, transfer_report, ChainJets, ChainOptions,
    NormalityThresholds, Verdict,
};
use crate::continuous::{discretize, integrate_evolution, HerglotzSpec};
use crate::error::{Error, Result};
use crate::families::{quadratic_shear_step, DiscreteFamily, FamilyJson, GeneratorJson};
use crate::jet::{Complex, JetMap, MultiIndex};
use crate::normalize::{autonomous_linearize, normalize_family, NormalizeOptions, Policy};
use crate::spectrum::{enumerate_resonances, Spectrum, TOL_RES};

/// Horizon at which the adversary's growth claims are required to hold.
pub const ADVERSARY_HORIZON: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    TwoNormalChains,
    ComplexResonanceSemigroup,
    PureRealResonanceAdversary,
    PeriodicNoComplexResonance,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::TwoNormalChains,
        ScenarioName::ComplexResonanceSemigroup,
        ScenarioName::PureRealResonanceAdversary,
        ScenarioName::PeriodicNoComplexResonance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::TwoNormalChains => "two_normal_chains",
            ScenarioName::ComplexResonanceSemigroup => "complex_resonance_semigroup",
            ScenarioName::PureRealResonanceAdversary => "pure_real_resonance_adversary",
            ScenarioName::PeriodicNoComplexResonance => "periodic_no_complex_resonance",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown scenario '{s}'")))
    }
}

fn cx(re: f64, im: f64) -> Complex {
    Complex { re, im }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoChainsParams {
    pub alpha: [Complex; 2],
    /// Multiplier of the shear term of the second chain.
    pub shear: f64,
    pub horizon: usize,
    pub degree: usize,
}

impl Default for TwoChainsParams {
    fn default() -> Self {
        TwoChainsParams {
            alpha: [cx(-1.0, 0.0), cx(-2.0, 0.0)],
            shear: 1.0,
            horizon: 32,
            degree: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemigroupParams {
    pub alpha1: Complex,
    /// Defaults to `2 α_1`.
    pub alpha2: Option<Complex>,
    pub c: Complex,
    pub a0: Complex,
    pub horizon: usize,
    pub degree: usize,
    pub step: f64,
}

impl Default for SemigroupParams {
    fn default() -> Self {
        SemigroupParams {
            alpha1: cx(-1.0, 0.0),
            alpha2: None,
            c: cx(0.05, 0.0),
            a0: cx(0.0, 0.0),
            horizon: 128,
            degree: 3,
            step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversaryParams {
    pub lambda1_modulus: f64,
    /// `λ_1 = |λ_1| e^{iπ ρ}`, so that `ζ = λ_1^2 / λ_2` turns by `ρ` when `λ_2 > 0`.
    pub rotation: f64,
    pub lambda2: Complex,
    pub r: f64,
    pub arcs: usize,
    pub horizon: usize,
    pub degree: usize,
    /// Negative control: all forcing coefficients zero.
    pub zero_forcing: bool,
}

impl Default for AdversaryParams {
    fn default() -> Self {
        AdversaryParams {
            lambda1_modulus: 0.6,
            rotation: (5f64.sqrt() - 1.0) / 2.0,
            lambda2: cx(0.36, 0.0),
            r: 0.1,
            arcs: 8,
            horizon: ADVERSARY_HORIZON,
            degree: 2,
            zero_forcing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicParams {
    pub alpha: [Complex; 2],
    /// Coefficient of `z_1 z_2` in the first field component.
    pub b: Complex,
    /// Coefficient of `z_1^2` in the second field component.
    pub c: Complex,
    pub horizon: usize,
    pub degree: usize,
    pub step: f64,
}

impl Default for PeriodicParams {
    fn default() -> Self {
        PeriodicParams {
            alpha: [cx(-0.5, 0.9), cx(-1.0, 0.4)],
            b: cx(0.1, 0.0),
            c: cx(0.3, 0.0),
            horizon: 32,
            degree: 5,
            step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    TwoNormalChains(TwoChainsParams),
    ComplexResonanceSemigroup(SemigroupParams),
    PureRealResonanceAdversary(AdversaryParams),
    PeriodicNoComplexResonance(PeriodicParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub claim: String,
    pub paper_ref: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub params: Value,
    pub assertions: Vec<Assertion>,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub passed: bool,
}

struct Suite {
    assertions: Vec<Assertion>,
    warnings: Vec<String>,
}

impl Suite {
    fn new() -> Self {
        Suite {
            assertions: vec![],
            warnings: vec![],
        }
    }

    fn check(&mut self, claim: &str, formula: &str, pass: bool, detail: String) {
        self.assertions.push(Assertion {
            claim: claim.into(),
            paper_ref: formula.into(),
            pass,
            detail,
        });
    }

    /// Records an error from a computation as a failed assertion.
    fn attempt<T>(&mut self, claim: &str, formula: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(claim, formula, false, e.to_string());
                None
            }
        }
    }
}

fn to_c(c: &Complex) -> Complex64 {
    Complex64::from(*c)
}

impl Scenario {
    /// Parses `params` (an object, or null for the defaults) and checks the
    /// scenario's constraints.
    pub fn build(name: &str, params: &Value) -> Result<Scenario> {
        let name: ScenarioName = name.parse()?;
        let params = if params.is_null() { Value::Object(Default::default()) } else { params.clone() };
        let bad = |e: serde_json::Error| Error::Scenario(format!("{name}: {e}"));
        let s = match name {
            ScenarioName::TwoNormalChains => Scenario::TwoNormalChains(serde_json::from_value(params).map_err(bad)?),
            ScenarioName::ComplexResonanceSemigroup => {
                Scenario::ComplexResonanceSemigroup(serde_json::from_value(params).map_err(bad)?)
            }
            ScenarioName::PureRealResonanceAdversary => {
                Scenario::PureRealResonanceAdversary(serde_json::from_value(params).map_err(bad)?)
            }
            ScenarioName::PeriodicNoComplexResonance => {
                Scenario::PeriodicNoComplexResonance(serde_json::from_value(params).map_err(bad)?)
            }
        };
        s.validate()?;
        Ok(s)
    }

    pub fn default_for(name: ScenarioName) -> Scenario {
        Scenario::build(name.as_str(), &Value::Null).expect("defaults satisfy the constraints")
    }

    pub fn name(&self) -> ScenarioName {
        match self {
            Scenario::TwoNormalChains(_) => ScenarioName::TwoNormalChains,
            Scenario::ComplexResonanceSemigroup(_) => ScenarioName::ComplexResonanceSemigroup,
            Scenario::PureRealResonanceAdversary(_) => ScenarioName::PureRealResonanceAdversary,
            Scenario::PeriodicNoComplexResonance(_) => ScenarioName::PeriodicNoComplexResonance,
        }
    }

    pub fn params_json(&self) -> Value {
        match self {
            Scenario::TwoNormalChains(p) => serde_json::to_value(p),
            Scenario::ComplexResonanceSemigroup(p) => serde_json::to_value(p),
            Scenario::PureRealResonanceAdversary(p) => serde_json::to_value(p),
            Scenario::PeriodicNoComplexResonance(p) => serde_json::to_value(p),
        }
        .expect("plain data")
    }

    fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Scenario(m));
        let (horizon, degree) = self.shape();
        if degree < 2 {
            return fail("degree must be at least 2".into());
        }
        if horizon < 1 {
            return fail("horizon must be at least 1".into());
        }
        match self {
            Scenario::TwoNormalChains(p) => {
                let (a1, a2) = (to_c(&p.alpha[0]), to_c(&p.alpha[1]));
                Spectrum::continuous(vec![a1, a2]).map_err(|e| Error::Scenario(e.to_string()))?;
                if a2.re > 2.0 * a1.re {
                    return fail(format!("requires Re α2 <= 2 Re α1, got {} > {}", a2.re, 2.0 * a1.re));
                }
            }
            Scenario::ComplexResonanceSemigroup(p) => {
                let a1 = to_c(&p.alpha1);
                if let Some(a2) = &p.alpha2 {
                    if (to_c(a2) - 2.0 * a1).norm() > 1e-12 {
                        return fail(format!("requires α2 = 2 α1, got α2 = {}", to_c(a2)));
                    }
                }
                Spectrum::continuous(vec![a1, 2.0 * a1]).map_err(|e| Error::Scenario(e.to_string()))?;
                if !(p.step > 0.0) {
                    return fail("integration step must be positive".into());
                }
            }
            Scenario::PureRealResonanceAdversary(p) => {
                let l2 = to_c(&p.lambda2);
                if (p.lambda1_modulus * p.lambda1_modulus - l2.norm()).abs() > 1e-12 {
                    return fail(format!(
                        "requires |λ1|^2 = |λ2|, got {} and {}",
                        p.lambda1_modulus * p.lambda1_modulus,
                        l2.norm()
                    ));
                }
                let (_, zeta) = p.spectrum_and_zeta()?;
                if (zeta - 1.0).norm() <= 1e-9 {
                    return fail("requires λ1^2 != λ2".into());
                }
                if p.arcs < 1 || !(p.r > 0.0) {
                    return fail("requires r > 0 and at least one arc".into());
                }
            }
            Scenario::PeriodicNoComplexResonance(p) => {
                let spec = p.spectrum()?;
                let report = enumerate_resonances(&spec.to_discrete(), p.degree, TOL_RES);
                if let Some(e) = report.complex().next() {
                    return fail(format!("requires no complex resonance, found target {} index {}", e.target, e.index));
                }
                if !(p.step > 0.0) {
                    return fail("integration step must be positive".into());
                }
            }
        }
        Ok(())
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Scenario::TwoNormalChains(p) => (p.horizon, p.degree),
            Scenario::ComplexResonanceSemigroup(p) => (p.horizon, p.degree),
            Scenario::PureRealResonanceAdversary(p) => (p.horizon, p.degree),
            Scenario::PeriodicNoComplexResonance(p) => (p.horizon, p.degree),
        }
    }

    /// The same scenario with the assertions expected to fail.
    pub fn negative_control(&self) -> Scenario {
        match self.clone() {
            Scenario::TwoNormalChains(mut p) => {
                p.shear = 0.0;
                Scenario::TwoNormalChains(p)
            }
            Scenario::ComplexResonanceSemigroup(mut p) => {
                p.c = cx(0.0, 0.0);
                Scenario::ComplexResonanceSemigroup(p)
            }
            Scenario::PureRealResonanceAdversary(mut p) => {
                p.zero_forcing = true;
                Scenario::PureRealResonanceAdversary(p)
            }
            Scenario::PeriodicNoComplexResonance(mut p) => {
                // α2 = 2 α1 turns the z1^2 term into a complex resonance
                p.alpha[1] = cx(2.0 * p.alpha[0].re, 2.0 * p.alpha[0].im);
                Scenario::PeriodicNoComplexResonance(p)
            }
        }
    }

    /// The discrete family the scenario is about.
    pub fn family(&self) -> Result<DiscreteFamily> {
        match self {
            Scenario::TwoNormalChains(p) => {
                let spec = Spectrum::continuous(vec![to_c(&p.alpha[0]), to_c(&p.alpha[1])])?;
                DiscreteFamily::linear(spec.to_discrete(), p.degree, p.horizon)
            }
            Scenario::ComplexResonanceSemigroup(p) => {
                let spec = p.spectrum()?.to_discrete();
                let l = spec.lambdas();
                let step = quadratic_shear_step([l[0], l[1]], l[1] * to_c(&p.c), p.degree);
                DiscreteFamily::periodic(spec, vec![step], p.horizon)
            }
            Scenario::PureRealResonanceAdversary(p) => {
                let (spec, zeta) = p.spectrum_and_zeta()?;
                let (a, _) = adversary_forcing(zeta, p.horizon, p.r, p.arcs);
                let l = spec.lambdas();
                let (l1, l2) = (l[0], l[1]);
                DiscreteFamily::from_fn(spec.clone(), p.horizon, |n| {
                    let an = if p.zero_forcing { 0.0 } else { a[n] };
                    quadratic_shear_step([l1, l2], Complex64::new(an, 0.0), p.degree)
                })
            }
            Scenario::PeriodicNoComplexResonance(p) => {
                let h = p.field()?;
                let one = integrate_evolution(&h, 0.0, 1.0, p.step)?;
                DiscreteFamily::periodic(h.spectrum().to_discrete(), vec![one], p.horizon)
            }
        }
    }

    pub fn run(&self) -> ScenarioReport {
        let suite = match self {
            Scenario::TwoNormalChains(p) => run_two_chains(p),
            Scenario::ComplexResonanceSemigroup(p) => run_semigroup(p),
            Scenario::PureRealResonanceAdversary(p) => run_adversary(p),
            Scenario::PeriodicNoComplexResonance(p) => run_periodic(p),
        };
        let passed = suite.assertions.iter().all(|a| a.pass);
        ScenarioReport {
            name: self.name().to_string(),
            params: self.params_json(),
            assertions: suite.assertions,
            warnings: suite.warnings,
            passed,
        }
    }
}

impl SemigroupParams {
    fn spectrum(&self) -> Result<Spectrum> {
        let a1 = to_c(&self.alpha1);
        Spectrum::continuous(vec![a1, 2.0 * a1])
    }
}

impl AdversaryParams {
    fn spectrum_and_zeta(&self) -> Result<(Spectrum, Complex64)> {
        let l1 = Complex64::from_polar(self.lambda1_modulus, PI * self.rotation);
        let l2 = to_c(&self.lambda2);
        let spec = Spectrum::discrete(vec![l1, l2]).map_err(|e| Error::Scenario(e.to_string()))?;
        let zeta = l1 * l1 / l2;
        Ok((spec, zeta / zeta.norm()))
    }
}

impl PeriodicParams {
    fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::continuous(vec![to_c(&self.alpha[0]), to_c(&self.alpha[1])]).map_err(|e| Error::Scenario(e.to_string()))
    }

    fn field(&self) -> Result<HerglotzSpec> {
        let mut p = JetMap::zero(2, self.degree);
        p.set_coeff(0, &MultiIndex::from([1, 1]), to_c(&self.b))?;
        p.set_coeff(1, &MultiIndex::from([2, 0]), to_c(&self.c))?;
        HerglotzSpec::autonomous(self.spectrum()?, p, self.horizon.max(1))
    }
}

/// Arc forcing: `a_{m-1,m} = r/2` when `ζ^m` (m = 1..=horizon) lies in the
/// arc hit most often, `0` otherwise. Returns the forcing indexed by step
/// `m - 1` and the chosen arc (0-based).
pub fn adversary_forcing(zeta: Complex64, horizon: usize, r: f64, arcs: usize) -> (Vec<f64>, usize) {
    let arc_of = |m: usize| {
        let arg = (zeta.powu(m as u32)).arg().rem_euclid(2.0 * PI);
        ((arg / (2.0 * PI / arcs as f64)) as usize).min(arcs - 1)
    };
    let mut hits = vec![0usize; arcs];
    for m in 1..=horizon {
        hits[arc_of(m)] += 1;
    }
    let best = (0..arcs).max_by_key(|&k| (hits[k], std::cmp::Reverse(k))).unwrap_or(0);
    let a = (1..=horizon).map(|m| if arc_of(m) == best { r / 2.0 } else { 0.0 }).collect();
    (a, best)
}

/// `P_n = Σ_{j=1}^{n} a_{j-1,j} ζ^j` for `n = 0..=a.len()`.
pub fn forcing_partial_sums(zeta: Complex64, a: &[f64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &aj) in a.iter().enumerate() {
        acc += aj * zeta.powu(j as u32 + 1);
        out.push(acc);
    }
    out
}

/// Running max of `|P_n|` at the horizon over its value at half the horizon.
pub fn running_max_ratio(sums: &[Complex64]) -> f64 {
    let h = sums.len() - 1;
    let run = |k: usize| sums[..=k].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let half = run(h / 2);
    if half == 0.0 {
        if run(h) == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        run(h) / half
    }
}

fn chain_for(family: &DiscreteFamily) -> Result<ChainJets> {
    Ok(construct_chain(family, &ChainOptions::default())?.1)
}

fn run_two_chains(p: &TwoChainsParams) -> Suite {
    let mut s = Suite::new();
    let (a1, a2) = (to_c(&p.alpha[0]), to_c(&p.alpha[1]));
    let shear = |t: f64| {
        quadratic_shear_step(
            [Complex64::new(1.0, 0.0); 2],
            p.shear * ((a2 - 2.0 * a1) * t).exp(),
            p.degree,
        )
    };
    let flow = |t: f64| JetMap::diagonal(&[(a1 * t).exp(), (a2 * t).exp()], p.degree);

    let mut worst: f64 = 0.0;
    for (s0, t0) in [(0.0, 0.5), (0.3, 1.7), (1.0, 4.25), (2.5, 2.5)] {
        let lhs = shear(t0).compose(&flow(t0 - s0)).expect("same shape");
        let rhs = flow(t0 - s0).compose(&shear(s0)).expect("same shape");
        worst = worst.max(lhs.distance(&rhs).expect("same shape"));
    }
    s.check(
        "shear family intertwines the linear flow",
        "k_t ∘ e^{Λ(t-s)} = e^{Λ(t-s)} ∘ k_s",
        worst <= 1e-12,
        format!("max defect {worst:.3e}"),
    );

    let Some(family) = s.attempt("linear family", "φ_{s,t} = e^{Λ(t-s)} z", Scenario::TwoNormalChains(p.clone()).family())
    else {
        return s;
    };
    let spec = family.spectrum().clone();
    let Some(built) = s.attempt("chain construction", "f_s = e^{-Λs} z", chain_for(&family)) else {
        return s;
    };
    let id = JetMap::identity(2, p.degree);
    let dev = built.normalized.iter().map(|h| h.distance(&id).unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    s.check(
        "constructed chain is the linear chain",
        "f_s = e^{-Λs} z",
        dev <= 1e-12,
        format!("max ‖e^{{Λn}} f_n - id‖ = {dev:.3e}"),
    );
    let shear_chain = ChainJets::from_normalized(spec, (0..=p.horizon).map(|n| shear(n as f64)).collect(), "shear");
    let Some(shear_chain) = s.attempt("shear chain", "e^{-Λs} k_s", shear_chain) else {
        return s;
    };
    let th = NormalityThresholds::default();
    for (label, chain) in [("e^{-Λs} z", &built), ("e^{-Λs} k_s", &shear_chain)] {
        if let Some(res) = s.attempt("subordination", label, subordination_residual(chain, &family)) {
            s.check(
                &format!("{label} is subordinate to the family"),
                "f_s = f_t ∘ φ_{s,t}",
                res <= 1e-9,
                format!("residual {res:.3e}"),
            );
        }
        if let Some(d) = s.attempt("normality", label, normality_diagnostic(chain, &th)) {
            s.check(
                &format!("{label} is normal"),
                "(e^{Λs} f_s) bounded",
                d.verdict == Verdict::Bounded,
                format!("verdict {:?}, max weight {:.3e}, slope {:.3e}", d.verdict, d.max_weight, d.slope),
            );
        }
    }
    if let Some(t) = s.attempt("transfer", "Ψ = g_n ∘ f_n^{-1}", transfer_report(&built, &shear_chain, 1e-9)) {
        s.check(
            "transfer map is one fixed jet",
            "g_n ∘ f_n^{-1} independent of n",
            t.n_independent,
            format!("max deviation {:.3e}", t.max_deviation),
        );
        s.check(
            "the two chains differ",
            "Ψ != id",
            t.distance_from_identity > 1e-6,
            format!("‖Ψ - id‖ = {:.3e}", t.distance_from_identity),
        );
    }
    s
}

fn run_semigroup(p: &SemigroupParams) -> Suite {
    let mut s = Suite::new();
    let (a1, c, a0) = (to_c(&p.alpha1), to_c(&p.c), to_c(&p.a0));
    let a2 = 2.0 * a1;
    let psi = |t: f64| {
        quadratic_shear_step([(a1 * t).exp(), (a2 * t).exp()], (a2 * t).exp() * c * t, p.degree)
    };
    let mut worst: f64 = 0.0;
    for (t0, s0) in [(0.5, 0.25), (1.0, 1.0), (0.3, 2.2)] {
        let d = psi(t0).compose(&psi(s0)).and_then(|x| x.distance(&psi(t0 + s0)));
        worst = worst.max(d.unwrap_or(f64::INFINITY));
    }
    s.check(
        "closed-form maps form a semigroup",
        "ψ_t ∘ ψ_s = ψ_{t+s}",
        worst <= 1e-14,
        format!("max defect {worst:.3e}"),
    );

    // field H = (α1 z1, α2 z2 + c z1^2) integrates to ψ_1
    let field = p.spectrum().and_then(|spec| {
        let mut pert = JetMap::zero(2, p.degree);
        pert.set_coeff(1, &MultiIndex::from([2, 0]), c)?;
        HerglotzSpec::autonomous(spec, pert, 2)
    });
    if let Some(h) = s.attempt("generator", "H(z) = (α1 z1, α2 z2 + c z1^2)", field) {
        if let Some(fam) = s.attempt("discretization", "φ_{n,n+1} = ψ_1", discretize(&h, p.step)) {
            let d = fam.step(0).distance(&psi(1.0)).unwrap_or(f64::INFINITY);
            s.check(
                "integrated time-one map is ψ_1",
                "ψ_t(z) = (e^{α1 t} z1, e^{α2 t}(z2 + c t z1^2))",
                d <= 1e-9,
                format!("distance {d:.3e} at step {}", p.step),
            );
        }
    }

    let Some(family) = s.attempt("family", "φ_{s,t} = ψ_{t-s}", Scenario::ComplexResonanceSemigroup(p.clone()).family())
    else {
        return s;
    };
    if let Some(norm) = s.attempt("normalization", "T keeps z1^2", normalize_family(&family, &NormalizeOptions::default())) {
        let kept = norm.normal_form.step(0).coeff(1, &MultiIndex::from([2, 0]));
        let want = (a2).exp() * c;
        s.check(
            "normal form keeps the resonant z1^2 term",
            "λ^I = λ_j at (j, I) = (2, (2,0))",
            (kept - want).norm() <= 1e-12 * want.norm().max(1.0),
            format!("T coefficient {kept}, expected {want}"),
        );
    }
    let Some(chain) = s.attempt("chain", "h_t ∘ φ_{0,t} = e^{Λt} h_0", chain_for(&family)) else {
        return s;
    };
    // shift the free constant a_0 by the shear (z1, z2 + a0 z1^2), which
    // commutes with A when λ1^2 = λ2
    let shift = quadratic_shear_step([Complex64::new(1.0, 0.0); 2], a0, p.degree);
    let shifted = chain
        .normalized
        .iter()
        .map(|h| shift.compose(h))
        .collect::<Result<Vec<_>>>()
        .and_then(|v| ChainJets::from_normalized(chain.spectrum.clone(), v, "koenigs-limit"));
    let Some(chain) = s.attempt("shifted chain", "a_0", shifted) else {
        return s;
    };
    let idx = MultiIndex::from([2, 0]);
    let law = (0..=p.horizon)
        .map(|n| (chain.normalized_entry(n).coeff(1, &idx) - (a0 - c * n as f64)).norm())
        .fold(0.0, f64::max);
    s.check(
        "shear coefficient of the chain is a_0 - c n",
        "a_t = a_0 - c t",
        law <= 1e-10,
        format!("max deviation {law:.3e} over n <= {}", p.horizon),
    );
    if let Some(res) = s.attempt("subordination", "f_n = f_m ∘ φ_{n,m}", subordination_residual(&chain, &family)) {
        s.check("chain is subordinate", "f_n = f_m ∘ φ_{n,m}", res <= 1e-9, format!("residual {res:.3e}"));
    }
    if let Some(d) = s.attempt("normality", "(h_n) not normal", normality_diagnostic(&chain, &NormalityThresholds::default())) {
        s.check(
            "chain is not normal",
            "a_t = a_0 - c t unbounded",
            d.verdict == Verdict::Growing,
            format!("verdict {:?}, growth ratio {:.3}, slope {:.3e}", d.verdict, d.growth_ratio, d.slope),
        );
    }
    s
}

fn run_adversary(p: &AdversaryParams) -> Suite {
    let mut s = Suite::new();
    let Some((spec, zeta)) = s.attempt("spectrum", "|λ1|^2 = |λ2|", p.spectrum_and_zeta()) else {
        return s;
    };
    let (mut a, arc) = adversary_forcing(zeta, p.horizon, p.r, p.arcs);
    if p.zero_forcing {
        a.iter_mut().for_each(|x| *x = 0.0);
    }
    let sums = forcing_partial_sums(zeta, &a);
    let ratio = running_max_ratio(&sums);
    let short = p.horizon < ADVERSARY_HORIZON;
    let required = |s: &mut Suite, claim: &str, formula: &str, pass: bool, detail: String| {
        if short && !pass {
            s.warnings.push(format!("{claim}: not established at horizon {} ({detail})", p.horizon));
            s.check(claim, formula, true, format!("advisory below horizon {ADVERSARY_HORIZON}: {detail}"));
        } else {
            s.check(claim, formula, pass, detail);
        }
    };
    required(
        &mut s,
        "partial sums grow along the selected arc",
        "Σ a_{j-1,j} ζ^j unbounded",
        ratio >= 2.0,
        format!(
            "arc {} of {}, running max {:.4} at {} vs {:.4} at {}, ratio {ratio:.4}",
            arc + 1,
            p.arcs,
            sums.iter().map(|c| c.norm()).fold(0.0, f64::max),
            p.horizon,
            sums[..=p.horizon / 2].iter().map(|c| c.norm()).fold(0.0, f64::max),
            p.horizon / 2
        ),
    );

    let Some(family) = s.attempt("family", "φ_{n,n+1} = (λ1 z1, λ2 z2 + a z1^2)", Scenario::PureRealResonanceAdversary(p.clone()).family())
    else {
        return s;
    };
    let Some(chain) = s.attempt("chain", "h_{n+1} ∘ φ_{n,n+1} = A h_n", chain_for(&family)) else {
        return s;
    };
    let l1 = spec.lambdas()[0];
    let idx = MultiIndex::from([2, 0]);
    let mut law: f64 = 0.0;
    for (n, pn) in sums.iter().enumerate() {
        // α_n ζ^n λ1^2 = α_0 λ1^2 - P_n with α_0 = 0
        let want = -pn / (zeta.powu(n as u32) * l1 * l1);
        let got = chain.normalized_entry(n).coeff(1, &idx);
        law = law.max((got - want).norm() / want.norm().max(1.0));
    }
    s.check(
        "chain coefficient follows the partial sums",
        "α_n ζ^n λ1^2 = α_0 λ1^2 - Σ a_{j-1,j} ζ^j",
        law <= 1e-9,
        format!("max relative deviation {law:.3e}"),
    );
    if let Some(res) = s.attempt("subordination", "f_n = f_m ∘ φ_{n,m}", subordination_residual(&chain, &family)) {
        s.check("chain is subordinate", "f_n = f_m ∘ φ_{n,m}", res <= 1e-9, format!("residual {res:.3e}"));
    }
    if let Some(d) = s.attempt("normality", "(h_n) not normal", normality_diagnostic(&chain, &NormalityThresholds::default())) {
        required(
            &mut s,
            "chain is not normal",
            "no normal family (h_n) solves h_{n+1} ∘ φ_{n,n+1} = A h_n",
            d.verdict == Verdict::Growing,
            format!("verdict {:?}, growth ratio {:.4}, slope {:.3e}", d.verdict, d.growth_ratio, d.slope),
        );
    }
    s
}

fn run_periodic(p: &PeriodicParams) -> Suite {
    let mut s = Suite::new();
    let Some(family) = s.attempt("family", "φ_{n,n+1} = φ_{0,1}", Scenario::PeriodicNoComplexResonance(p.clone()).family())
    else {
        return s;
    };
    let spec = family.spectrum().clone();
    let report = enumerate_resonances(&spec, p.degree, TOL_RES);
    s.check(
        "only pure real resonances occur",
        "|λ^I| = |λ_j|, λ^I != λ_j",
        !report.has_complex(),
        format!("{} resonances, {} complex", report.entries.len(), report.complex().count()),
    );
    let Some((norm, chain)) = s.attempt("chain", "periodic normalization", construct_chain(&family, &ChainOptions::default()))
    else {
        return s;
    };
    s.check(
        "periodic normalization linearizes",
        "T_{n,m} = A^{m-n}",
        norm.policy == Policy::Periodic && norm.normal_form.is_linear(),
        format!("policy {:?}, agreement order {}", norm.policy, norm.agreement_order),
    );
    if let Some(res) = s.attempt("subordination", "f_n = f_m ∘ φ_{n,m}", subordination_residual(&chain, &family)) {
        s.check("chain is subordinate", "f_n = f_m ∘ φ_{n,m}", res <= 1e-9, format!("residual {res:.3e}"));
    }
    if let Some(d) = s.attempt("normality", "(h_n) normal", normality_diagnostic(&chain, &NormalityThresholds::default())) {
        s.check(
            "chain is normal",
            "(A^n f_n) bounded",
            d.verdict == Verdict::Bounded,
            format!("verdict {:?}, max weight {:.3e}, slope {:.3e}", d.verdict, d.max_weight, d.slope),
        );
    }
    if let Some(h) = s.attempt("linearizer", "h ∘ φ = A h", autonomous_linearize(family.step(0), &spec, TOL_RES)) {
        let dev = chain
            .normalized
            .iter()
            .map(|g| g.distance(&h).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        s.check(
            "chain equals the autonomous linearizer chain",
            "f_n = A^{-n} h",
            dev <= 1e-9,
            format!("max ‖A^n f_n - h‖ = {dev:.3e}"),
        );
    }
    s
}

/// Family for a `{"kind": "scenario"}` generator.
pub fn scenario_family(name: &str, params: &Value) -> Result<DiscreteFamily> {
    Scenario::build(name, params)?.family()
}

/// Resolves any family JSON, including `{"kind": "scenario"}` generators.
/// A scenario's declared spectrum must match the one it builds.
pub fn resolve_family(json: &FamilyJson) -> Result<DiscreteFamily> {
    let Some(GeneratorJson::Scenario { name, params }) = &json.generator else {
        return json.to_family();
    };
    let fam = scenario_family(name, params)?;
    let same = fam.spectrum().mode() == json.spectrum.mode()
        && fam
            .spectrum()
            .lambdas()
            .iter()
            .zip(json.spectrum.lambdas())
            .all(|(a, b)| (a - b).norm() <= 1e-12)
        && fam.dim() == json.spectrum.dim();
    if !same {
        return Err(Error::Parse(format!("declared spectrum does not match scenario '{name}'")));
    }
    Ok(fam)
}
