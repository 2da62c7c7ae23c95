//! Degree-by-degree elimination of non-resonant terms of a discrete
//! dilation family, leaving a triangular normal form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::families::{growth_constants, DiscreteFamily, FamilyKind, TriangularFamily};
use crate::jet::{JetMap, MultiIndex};
use crate::spectrum::{
    enumerate_resonances, koenigs_degree_l, resonance_cutoff_q, ResonanceReport, Spectrum, NEAR_BAND,
    TOL_RES,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default cap on homological coefficients before aborting.
pub const ALPHA_CAP: f64 = 1e12;

/// The forcing sequence `a_n` of one homological equation.
#[derive(Debug, Clone, Copy)]
pub enum Forcing<'a> {
    /// `a_n` for `n < len`, zero afterwards.
    Table(&'a [Complex64]),
    /// `a_n = values[n mod p]`.
    Periodic(&'a [Complex64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `|λ_j| < |λ^I|`: `α_0 = 0`, recursion forward.
    Forward,
    /// `|λ_j| > |λ^I|`: summed from the end of the horizon backward.
    Backward,
    /// The unique `p`-periodic solution.
    Periodic,
    /// Skipped; the term stays in the normal form.
    Resonant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomologicalSolution {
    /// 1-based component.
    pub target: usize,
    pub index: MultiIndex,
    pub branch: Branch,
    /// `α_n` for `n = 0..=len` (tables) or `n = 0..p` (periodic).
    pub alpha: Vec<Complex64>,
    /// `min(|ρ|, 1/|ρ|)` with `ρ = λ_j / λ^I`.
    pub divisor_magnitude: f64,
    /// `| |λ_j| - |λ^I| |`.
    pub real_defect: f64,
    #[serde(skip)]
    ratio: Complex64,
}

impl HomologicalSolution {
    /// `α_n` for any `n`, extending tables with the homogeneous recursion.
    pub fn alpha_at(&self, n: usize) -> Complex64 {
        match self.branch {
            Branch::Resonant => ZERO,
            Branch::Periodic => self.alpha[n % self.alpha.len()],
            Branch::Backward => self.alpha.get(n).copied().unwrap_or(ZERO),
            Branch::Forward => match self.alpha.get(n) {
                Some(&a) => a,
                None => {
                    let last = self.alpha.len() - 1;
                    self.alpha[last] * self.ratio.powu((n - last) as u32)
                }
            },
        }
    }

    pub fn sup_alpha(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// Solves `λ^I α_{n+1} + a_n = λ_j α_n` for component `j` (0-based).
///
/// Tables use the bounded branch selected by `|λ_j|` vs `|λ^I|` and skip real
/// resonances. Periodic forcing gets the periodic solution and is skipped
/// only when `ρ^p = 1`.
pub fn solve_homological(
    spec: &Spectrum,
    j: usize,
    index: &MultiIndex,
    forcing: Forcing<'_>,
    tol_res: f64,
) -> HomologicalSolution {
    let lj = spec.lambdas()[j];
    let li = index.power_of(spec.lambdas());
    let rho = lj / li;
    let real_defect = (lj.norm() - li.norm()).abs();
    let divisor_magnitude = rho.norm().min(1.0 / rho.norm());
    let mut sol = HomologicalSolution {
        target: j + 1,
        index: index.clone(),
        branch: Branch::Resonant,
        alpha: vec![],
        divisor_magnitude,
        real_defect,
        ratio: rho,
    };
    match forcing {
        Forcing::Periodic(a) => {
            let p = a.len();
            let rho_p = rho.powu(p as u32);
            if (Complex64::new(1.0, 0.0) - rho_p).norm() <= tol_res {
                sol.alpha = vec![ZERO; p];
                return sol;
            }
            // α_p = ρ^p α_0 + s when started from α_0
            let mut s = ZERO;
            for &an in a {
                s = rho * s - an / li;
            }
            let mut alpha = Vec::with_capacity(p);
            let mut cur = s / (Complex64::new(1.0, 0.0) - rho_p);
            for &an in a {
                alpha.push(cur);
                cur = rho * cur - an / li;
            }
            sol.branch = Branch::Periodic;
            sol.alpha = alpha;
        }
        Forcing::Table(a) => {
            let len = a.len();
            if real_defect <= tol_res {
                sol.alpha = vec![ZERO; len + 1];
                return sol;
            }
            let mut alpha = vec![ZERO; len + 1];
            if lj.norm() < li.norm() {
                for n in 0..len {
                    alpha[n + 1] = (lj * alpha[n] - a[n]) / li;
                }
                sol.branch = Branch::Forward;
            } else {
                // α_len = 0 is exact: the forcing vanishes from len on
                for n in (0..len).rev() {
                    alpha[n] = (li * alpha[n + 1] + a[n]) / lj;
                }
                sol.branch = Branch::Backward;
            }
            sol.alpha = alpha;
        }
    }
    sol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Bounded solutions on a finite table; all real resonances are kept.
    Table,
    /// Periodic solutions over one period; only `ρ^p = 1` terms are kept.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizeOptions {
    pub tol_res: f64,
    pub alpha_cap: f64,
    /// Run stages through the jet degree instead of stopping at the Koenigs degree.
    pub full_elimination: bool,
    /// Overrides the policy implied by the family kind.
    pub policy: Option<Policy>,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            tol_res: TOL_RES,
            alpha_cap: ALPHA_CAP,
            full_elimination: false,
            policy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub target: usize,
    pub index: MultiIndex,
    pub kind: String,
    pub real_defect: f64,
    pub divisor_magnitude: f64,
}

/// One elimination stage.
#[derive(Debug, Clone)]
pub struct Stage {
    pub degree: usize,
    /// `k_n`, indexed like the family's conjugators.
    pub conjugators: Vec<JetMap>,
    pub solutions: Vec<HomologicalSolution>,
    /// `(target, index)` of the terms moved into the normal form.
    pub resonant_terms: Vec<(usize, MultiIndex)>,
    /// Family after the stage.
    pub family: DiscreteFamily,
    /// Normal form after the stage.
    pub normal_form: Vec<JetMap>,
    /// `max_n ‖(φ^{i+1}_n - T^{i+1}_n)|_{deg <= i}‖`.
    pub residual_norm: f64,
}

/// Data shared by the stages of one run.
struct Frame {
    policy: Policy,
    /// Number of step indices carried (table horizon or period).
    steps: usize,
    /// Number of conjugators (`steps + 1` for tables, `steps` for periodic).
    conjugators: usize,
}

impl Frame {
    fn next(&self, n: usize) -> usize {
        match self.policy {
            Policy::Periodic => (n + 1) % self.steps,
            Policy::Table => n + 1,
        }
    }
}

/// One stage: removes the non-resonant degree-`i` terms of `family`.
pub fn stage_eliminate(
    family: &DiscreteFamily,
    normal_form: &[JetMap],
    report: &ResonanceReport,
    i: usize,
    options: &NormalizeOptions,
    warnings: &mut Vec<Warning>,
) -> Result<Stage> {
    let frame = frame_of(family, options)?;
    stage_in_frame(family, normal_form, report, i, options, &frame, warnings)
}

fn frame_of(family: &DiscreteFamily, options: &NormalizeOptions) -> Result<Frame> {
    let policy = options.policy.unwrap_or(match family.kind() {
        FamilyKind::Periodic { .. } => Policy::Periodic,
        FamilyKind::Table => Policy::Table,
    });
    match policy {
        Policy::Periodic => {
            let p = family
                .period()
                .ok_or_else(|| contract("periodic policy needs a periodic family"))?;
            Ok(Frame {
                policy,
                steps: p,
                conjugators: p,
            })
        }
        Policy::Table => Ok(Frame {
            policy,
            steps: family.horizon(),
            conjugators: family.horizon() + 1,
        }),
    }
}

fn stage_in_frame(
    family: &DiscreteFamily,
    normal_form: &[JetMap],
    report: &ResonanceReport,
    i: usize,
    options: &NormalizeOptions,
    frame: &Frame,
    warnings: &mut Vec<Warning>,
) -> Result<Stage> {
    let spec = family.spectrum();
    let (dim, degree) = (family.dim(), family.degree());
    let q = resonance_cutoff_q(spec);
    let steps: Vec<&JetMap> = (0..frame.steps).map(|n| family.step(n)).collect();
    let mut t_next: Vec<JetMap> = normal_form.to_vec();
    let mut solutions = Vec::new();
    let mut resonant_terms = Vec::new();
    let mut shears: Vec<Vec<(usize, MultiIndex, Complex64)>> = vec![vec![]; frame.conjugators];

    for index in MultiIndex::of_order(dim, i as u32) {
        for j in 0..dim {
            let a: Vec<Complex64> = steps.iter().map(|s| s.coeff(j, &index)).collect();
            if a.iter().all(|x| *x == ZERO) {
                continue;
            }
            let forcing = match frame.policy {
                Policy::Periodic => Forcing::Periodic(&a),
                Policy::Table => Forcing::Table(&a),
            };
            let sol = solve_homological(spec, j, &index, forcing, options.tol_res);
            if sol.branch == Branch::Resonant {
                if i >= q {
                    return Err(contract(format!(
                        "resonant term ({}, {index}) at degree {i} >= q = {q}",
                        j + 1
                    )));
                }
                for (t, &an) in t_next.iter_mut().zip(&a) {
                    t.add_to(j, &index, an)?;
                }
                resonant_terms.push((j + 1, index.clone()));
                warnings.push(Warning {
                    target: j + 1,
                    index: index.clone(),
                    kind: match report.kind_of(j, &index) {
                        Some(crate::spectrum::ResonanceKind::Complex) => "resonant-complex".into(),
                        Some(crate::spectrum::ResonanceKind::RealPure) => "resonant-real-pure".into(),
                        None => "resonant-periodic".into(),
                    },
                    real_defect: sol.real_defect,
                    divisor_magnitude: sol.divisor_magnitude,
                });
                solutions.push(sol);
                continue;
            }
            if sol.real_defect <= NEAR_BAND {
                warnings.push(Warning {
                    target: j + 1,
                    index: index.clone(),
                    kind: "near-resonance".into(),
                    real_defect: sol.real_defect,
                    divisor_magnitude: sol.divisor_magnitude,
                });
            }
            let sup = sol.sup_alpha();
            if !(sup <= options.alpha_cap) {
                return Err(Error::SmallDivisor {
                    target: j + 1,
                    index: index.clone(),
                    magnitude: sup,
                    divisor: sol.divisor_magnitude,
                });
            }
            for (n, sh) in shears.iter_mut().enumerate() {
                let al = sol.alpha_at(n);
                if al != ZERO {
                    sh.push((j, index.clone(), al));
                }
            }
            solutions.push(sol);
        }
    }

    let identity = JetMap::identity(dim, degree);
    let conjugators: Vec<JetMap> = shears
        .iter()
        .map(|list| {
            // later shears are applied after earlier ones
            let mut k = identity.clone();
            for (j, index, al) in list {
                let mut s = identity.clone();
                s.set_coeff(*j, index, *al)?;
                k = s.compose(&k)?;
            }
            Ok(k)
        })
        .collect::<Result<_>>()?;

    let new_family = if conjugators.iter().all(|k| *k == identity) {
        family.clone()
    } else {
        let inverses = conjugators
            .iter()
            .map(|k| k.invert())
            .collect::<Result<Vec<_>>>()?;
        let steps = (0..frame.steps)
            .map(|n| conjugators[frame.next(n)].compose(&family.step(n).compose(&inverses[n])?))
            .collect::<Result<Vec<_>>>()?;
        family.with_steps(steps)?
    };

    let residual_norm = (0..frame.steps)
        .map(|n| {
            let d = new_family.step(n).sub(&t_next[n]).expect("same shape");
            d.norm_where(|o| o <= i)
        })
        .fold(0.0, f64::max);

    Ok(Stage {
        degree: i,
        conjugators,
        solutions,
        resonant_terms,
        family: new_family,
        normal_form: t_next,
        residual_norm,
    })
}

/// Output of [`normalize_family`].
#[derive(Debug, Clone)]
pub struct NormalizationResult {
    pub spectrum: Spectrum,
    pub report: ResonanceReport,
    pub policy: Policy,
    /// Resonance cutoff `q`.
    pub q: usize,
    /// Koenigs degree `l`.
    pub l: usize,
    /// Lipschitz constant used for `l`.
    pub beta: f64,
    pub stages: Vec<Stage>,
    /// `K_n = k^{last}_n ∘ ... ∘ k^2_n`.
    pub cumulative: Vec<JetMap>,
    pub normal_form: TriangularFamily,
    /// The family conjugated by the `K_n`.
    pub final_family: DiscreteFamily,
    /// Degree `k` with `φ^{final} = T + O(|z|^k)`.
    pub agreement_order: usize,
    pub warnings: Vec<Warning>,
}

impl NormalizationResult {
    /// `K_n` (indices wrap for periodic runs).
    pub fn conjugator(&self, n: usize) -> &JetMap {
        match self.policy {
            Policy::Periodic => &self.cumulative[n % self.cumulative.len()],
            Policy::Table => &self.cumulative[n],
        }
    }

    /// Number of step indices covered (horizon or period).
    pub fn covered_steps(&self) -> usize {
        match self.policy {
            Policy::Periodic => self.cumulative.len(),
            Policy::Table => self.cumulative.len() - 1,
        }
    }

    pub fn stage_residuals(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.residual_norm).collect()
    }

    /// `max_n ‖K_{n+1} ∘ φ_n - φ^{final}_n ∘ K_n‖` against the original family.
    pub fn conjugation_residual(&self, family: &DiscreteFamily) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for n in 0..self.covered_steps() {
            let lhs = self.conjugator(n + 1).compose(family.step(n))?;
            let rhs = self.final_family.step(n).compose(self.conjugator(n))?;
            worst = worst.max(lhs.distance(&rhs)?);
        }
        Ok(worst)
    }
}

/// Runs the stages `2..` up to `max(q - 1, l)` (or the jet degree), where
/// `l` is the Koenigs degree for the normal form's Lipschitz constant.
pub fn normalize_family(family: &DiscreteFamily, options: &NormalizeOptions) -> Result<NormalizationResult> {
    let spec = family.spectrum().clone();
    let degree = family.degree();
    if degree < 2 {
        return Err(contract("normalization needs degree >= 2"));
    }
    let frame = frame_of(family, options)?;
    let report = enumerate_resonances(&spec, degree, options.tol_res);
    let q = resonance_cutoff_q(&spec);

    let identity = JetMap::identity(family.dim(), degree);
    let mut cumulative = vec![identity; frame.conjugators];
    let mut current = family.clone();
    let mut normal_form: Vec<JetMap> = (0..frame.steps)
        .map(|_| JetMap::diagonal(spec.lambdas(), degree))
        .collect();
    let mut stages = Vec::new();
    let mut warnings = Vec::new();

    let mut run = |i: usize,
                   current: &mut DiscreteFamily,
                   normal_form: &mut Vec<JetMap>,
                   cumulative: &mut Vec<JetMap>,
                   stages: &mut Vec<Stage>|
     -> Result<()> {
        let st = stage_in_frame(current, normal_form, &report, i, options, &frame, &mut warnings)?;
        for (k, c) in cumulative.iter_mut().zip(&st.conjugators) {
            *k = c.compose(k)?;
        }
        *current = st.family.clone();
        *normal_form = st.normal_form.clone();
        stages.push(st);
        Ok(())
    };

    // every resonant term has degree < q, so T is final after these
    let first_last = (q - 1).min(degree);
    for i in 2..=first_last {
        run(i, &mut current, &mut normal_form, &mut cumulative, &mut stages)?;
    }
    let t_family = normal_form_family(&spec, &normal_form, family, &frame)?;
    let beta = if t_family.is_linear() {
        1.0 / spec.lambda_min()
    } else {
        growth_constants(&t_family).beta
    };
    let l = koenigs_degree_l(&spec, beta)?;
    let last = if options.full_elimination {
        degree
    } else {
        l.max(q - 1).min(degree)
    };
    for i in first_last.max(1) + 1..=last {
        run(i, &mut current, &mut normal_form, &mut cumulative, &mut stages)?;
    }

    let last_stage = stages.last().map_or(1, |s| s.degree);
    Ok(NormalizationResult {
        spectrum: spec.clone(),
        report,
        policy: frame.policy,
        q,
        l,
        beta,
        stages,
        cumulative,
        normal_form: t_family,
        final_family: current,
        agreement_order: last_stage + 1,
        warnings,
    })
}

fn normal_form_family(
    spec: &Spectrum,
    steps: &[JetMap],
    family: &DiscreteFamily,
    frame: &Frame,
) -> Result<TriangularFamily> {
    let fam = match frame.policy {
        Policy::Periodic => DiscreteFamily::periodic(spec.clone(), steps.to_vec(), family.horizon())?,
        Policy::Table => DiscreteFamily::from_steps(spec.clone(), steps.to_vec())?,
    };
    TriangularFamily::new(fam)
}

/// Poincaré linearizer: `h` tangent to the identity with `h ∘ φ = A h`.
///
/// Solved coefficient by coefficient: at order `i`,
/// `h_{j,I} = [h_{<i} ∘ φ]_{j,I} / (λ_j - λ^I)`.
pub fn autonomous_linearize(map: &JetMap, spec: &Spectrum, tol_res: f64) -> Result<JetMap> {
    let lam = spec.lambdas();
    if map.dim() != spec.dim() {
        return Err(contract("map and spectrum dimensions differ"));
    }
    let lin = map.linear_part();
    for r in 0..map.dim() {
        for c in 0..map.dim() {
            let want = if r == c { lam[r] } else { ZERO };
            if (lin[(r, c)] - want).norm() > 1e-12 {
                return Err(contract("linear part is not diag(lambda)"));
            }
        }
    }
    let report = enumerate_resonances(spec, map.degree(), tol_res);
    if let Some(e) = report.complex().next() {
        return Err(Error::ComplexResonance {
            target: e.target,
            index: e.index.clone(),
        });
    }
    let mut h = JetMap::identity(map.dim(), map.degree());
    for i in 2..=map.degree() {
        let known = h.compose(map)?;
        for index in MultiIndex::of_order(map.dim(), i as u32) {
            let li = index.power_of(lam);
            for j in 0..map.dim() {
                let k = known.coeff(j, &index);
                if k != ZERO {
                    h.set_coeff(j, &index, k / (lam[j] - li))?;
                }
            }
        }
    }
    Ok(h)
}
