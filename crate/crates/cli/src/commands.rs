use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use loewner_core::chains::{construct_chain, normality_diagnostic, subordination_residual, ChainJets, NormalityThresholds};
use loewner_core::continuous::{
    continuous_subordination, discretize, extend_to_real_times, integrate_evolution, pde_probe, sample_points, HerglotzSpec,
    DEFAULT_DELTA, DEFAULT_STEP, SAMPLE_RADIUS,
};
use loewner_core::families::FamilyJson;
use loewner_core::normalize::normalize_family;
use loewner_core::scenarios::{resolve_family, Scenario, ScenarioReport};
use loewner_core::spectrum::{enumerate_resonances, SpectrumJson};
use loewner_core::{DiscreteFamily, Error, JetMap, Result, Spectrum};
use serde_json::Value;

use crate::config::RunConfig;
use crate::output::*;

const DEFAULT_RESONANCE_DEGREE: usize = 6;
const PDE_SAMPLES: usize = 16;
/// The normality fit needs this many entries.
const MIN_VERDICT_ENTRIES: usize = 8;

/// A finished command: the JSON document and the exit code.
pub struct Outcome {
    pub json: String,
    pub code: i32,
}

fn done<T: serde::Serialize>(value: &T, code: i32) -> Result<Outcome> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    Ok(Outcome { json, code })
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(value: Value, what: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn resonances(path: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let wire: SpectrumJson = parse(read_json(path)?, "spectrum")?;
    let values = wire.values.iter().map(|&v| v.into()).collect();
    let (spectrum, permutation) = Spectrum::sorted(wire.mode, values)?;
    let reordered = permutation.iter().enumerate().any(|(k, &p)| k != p);
    let report = enumerate_resonances(&spectrum, cfg.degree.unwrap_or(DEFAULT_RESONANCE_DEGREE), cfg.tol_res);
    let out = ResonancesOutput {
        header: SortHeader {
            reordered,
            permutation,
            index_order: "sorted".into(),
        },
        spectrum,
        report,
    };
    done(&out, 0)
}

/// Truncates to `degree` and re-observes over `horizon` steps.
fn reshape(fam: DiscreteFamily, degree: Option<usize>, horizon: Option<usize>) -> Result<DiscreteFamily> {
    if degree.is_none() && horizon.is_none() {
        return Ok(fam);
    }
    let d = degree.unwrap_or(fam.degree());
    if d > fam.degree() {
        return Err(Error::Contract(format!("--degree {d} exceeds the input degree {}", fam.degree())));
    }
    let h = horizon.unwrap_or(fam.horizon());
    let spec = fam.spectrum().clone();
    let steps = fam.stored_steps().iter().map(|s| s.truncate(d));
    if fam.period().is_some() {
        DiscreteFamily::periodic(spec, steps.collect(), h)
    } else {
        let mut v: Vec<JetMap> = steps.take(h).collect();
        v.resize(h, JetMap::diagonal(spec.lambdas(), d));
        DiscreteFamily::from_steps(spec, v)
    }
}

fn load_family(value: Value, cfg: &RunConfig) -> Result<DiscreteFamily> {
    let json: FamilyJson = parse(value, "family")?;
    reshape(resolve_family(&json)?, cfg.degree, cfg.horizon)
}

pub fn normalize(path: &Path, full: bool, cfg: &RunConfig) -> Result<Outcome> {
    let fam = load_family(read_json(path)?, cfg)?;
    let opts = loewner_core::normalize::NormalizeOptions {
        full_elimination: full,
        ..cfg.normalize_options()
    };
    let res = normalize_family(&fam, &opts)?;
    let out = NormalizeOutput {
        spectrum: res.spectrum.clone(),
        policy: res.policy,
        q: res.q,
        l: res.l,
        beta: res.beta,
        agreement_order: res.agreement_order,
        report: res.report.clone(),
        stages: res
            .stages
            .iter()
            .map(|s| StageOutput {
                degree: s.degree,
                residual_norm: s.residual_norm,
                resonant_terms: s.resonant_terms.clone(),
                conjugators: s.conjugators.clone(),
            })
            .collect(),
        conjugators: res.cumulative.clone(),
        normal_form: FamilyJson::from_family(res.normal_form.family()),
        normal_form_linear: res.normal_form.is_linear(),
        conjugation_residual: res.conjugation_residual(&fam)?,
        warnings: res.warnings.clone(),
    };
    done(&out, 0)
}

fn is_herglotz(value: &Value) -> bool {
    value.get("schedule").is_some()
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: impl Iterator<Item = (String, f64)>) -> Result<()> {
    let io = |e: std::io::Error| Error::Parse(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut text = format!("{header}\n");
    for (x, y) in rows {
        writeln!(text, "{x},{y:e}").expect("writing to a string");
    }
    fs::write(dir.join(name), text).map_err(io)
}

/// Error of the map over `[0, min(1, T)]` at steps `8h, 4h, 2h, h` against `h / 4`.
fn step_errors(h: &HerglotzSpec, step: f64) -> Result<Vec<(f64, f64)>> {
    let t = h.horizon().min(1.0);
    let reference = integrate_evolution(h, 0.0, t, step / 4.0)?;
    [8.0, 4.0, 2.0, 1.0]
        .iter()
        .map(|m| {
            let s = step * m;
            Ok((s, integrate_evolution(h, 0.0, t, s)?.distance(&reference)?))
        })
        .collect()
}

pub fn chain(path: &Path, times: &[f64], cfg: &RunConfig) -> Result<Outcome> {
    let value = read_json(path)?;
    let opts = cfg.chain_options();
    let th = NormalityThresholds::default();
    let out = if is_herglotz(&value) {
        if cfg.horizon.is_some() {
            return Err(Error::Contract("--horizon does not apply to Herglotz inputs; the field sets T".into()));
        }
        let mut h: HerglotzSpec = parse(value, "Herglotz field")?;
        if let Some(d) = cfg.degree {
            if d > h.degree() {
                return Err(Error::Contract(format!("--degree {d} exceeds the field degree {}", h.degree())));
            }
            h = truncate_field(&h, d)?;
        }
        let step = cfg.step.unwrap_or(DEFAULT_STEP);
        let fam = discretize(&h, step)?;
        let (norm, chain) = construct_chain(&fam, &opts)?;
        let mut out = discrete_output(InputKind::Herglotz, &fam, &norm, chain, &th)?;
        out.dissipativity = Some(h.dissipativity());
        if !times.is_empty() {
            let cc = extend_to_real_times(&out.chain, &h, times, step)?;
            out.continuous_subordination = Some(continuous_subordination(&cc, &h, step)?);
            let pts = sample_points(h.dim(), SAMPLE_RADIUS, PDE_SAMPLES, cfg.seed);
            for &s in times {
                let inside = s - DEFAULT_DELTA >= 0.0 && s + DEFAULT_DELTA <= h.horizon();
                let residual = if inside {
                    Some(pde_probe(&out.chain, &h, s, DEFAULT_DELTA, step, &pts)?)
                } else {
                    None
                };
                out.pde.push(PdeEntry {
                    time: s,
                    delta: DEFAULT_DELTA,
                    residual,
                });
            }
            out.real_time = Some(cc);
        }
        if let Some(dir) = &cfg.plot_data {
            let rows = step_errors(&h, step)?;
            write_csv(dir, "steps.csv", "step,error", rows.into_iter().map(|(s, e)| (format!("{s:e}"), e)))?;
        }
        out
    } else {
        if !times.is_empty() {
            return Err(Error::Contract("--times needs a Herglotz input".into()));
        }
        let fam = load_family(value, cfg)?;
        let (norm, chain) = construct_chain(&fam, &opts)?;
        discrete_output(InputKind::Family, &fam, &norm, chain, &th)?
    };
    if let Some(dir) = &cfg.plot_data {
        let w = out.chain.weights().into_iter().enumerate().map(|(n, w)| (n.to_string(), w));
        write_csv(dir, "weights.csv", "n,w_n", w)?;
    }
    done(&out, 0)
}

fn truncate_field(h: &HerglotzSpec, degree: usize) -> Result<HerglotzSpec> {
    let schedule = h
        .schedule()
        .iter()
        .map(|e| loewner_core::continuous::ScheduleEntry {
            perturbation: e.perturbation.truncate(degree),
            ..e.clone()
        })
        .collect();
    HerglotzSpec::new(h.spectrum().clone(), degree, schedule, h.horizon())
}

fn verdict(chain: &ChainJets, th: &NormalityThresholds) -> Option<loewner_core::chains::NormalityDiagnostic> {
    (chain.horizon() + 1 >= MIN_VERDICT_ENTRIES).then(|| normality_diagnostic(chain, th).expect("long enough"))
}

fn discrete_output(
    input: InputKind,
    fam: &DiscreteFamily,
    norm: &loewner_core::normalize::NormalizationResult,
    chain: ChainJets,
    th: &NormalityThresholds,
) -> Result<ChainOutput> {
    Ok(ChainOutput {
        input,
        agreement_order: norm.agreement_order,
        normal_form_linear: norm.normal_form.is_linear(),
        subordination_residual: subordination_residual(&chain, fam)?,
        normality: verdict(&chain, th),
        warnings: norm.warnings.clone(),
        chain,
        real_time: None,
        continuous_subordination: None,
        pde: vec![],
        dissipativity: None,
    })
}

pub fn scenario(name: &str, params: Option<&str>, negative_control: bool, cfg: &RunConfig) -> Result<Outcome> {
    let mut p: Value = match params {
        Some(text) => serde_json::from_str(text).map_err(|e| Error::Parse(format!("--params: {e}")))?,
        None => Value::Object(Default::default()),
    };
    let Some(obj) = p.as_object_mut() else {
        return Err(Error::Parse("--params must be a JSON object".into()));
    };
    if let Some(h) = cfg.horizon {
        obj.insert("horizon".into(), h.into());
    }
    if let Some(d) = cfg.degree {
        obj.insert("degree".into(), d.into());
    }
    if let Some(s) = cfg.step {
        obj.insert("step".into(), s.into());
    }
    let mut sc = Scenario::build(name, &p)?;
    if negative_control {
        sc = sc.negative_control();
    }
    let report: ScenarioReport = sc.run();
    let code = if report.passed { 0 } else { 1 };
    done(&report, code)
}

pub fn verify(family: &Path, chain: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let fam = load_family(read_json(family)?, cfg)?;
    let value = read_json(chain)?;
    let chain: ChainJets = if value.get("chain").is_some() {
        parse::<ChainOutput>(value, "chain output")?.chain
    } else {
        parse(value, "chain")?
    };
    let residual = subordination_residual(&chain, &fam)?;
    let normality = verdict(&chain, &NormalityThresholds::default());
    let passed = residual <= cfg.tol_residual;
    let out = VerifyOutput {
        subordination_residual: residual,
        tolerance: cfg.tol_residual,
        normality,
        passed,
    };
    done(&out, if passed { 0 } else { 1 })
}
