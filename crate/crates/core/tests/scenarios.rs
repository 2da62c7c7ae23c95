use loewner_core::families::{FamilyJson, GeneratorJson};
use loewner_core::scenarios::*;
use loewner_core::{Complex64, Error};
use serde_json::json;

fn failed(rep: &ScenarioReport) -> Vec<&str> {
    rep.assertions.iter().filter(|a| !a.pass).map(|a| a.claim.as_str()).collect()
}

#[test]
fn default_scenarios_pass_and_controls_fail() {
    for name in ScenarioName::ALL {
        let sc = Scenario::default_for(name);
        let rep = sc.run();
        assert!(rep.passed, "{name}: {:?}", failed(&rep));
        assert!(rep.warnings.is_empty());
        let neg = sc.negative_control().run();
        assert!(!neg.passed, "{name} control passed");
    }
}

#[test]
fn controls_fail_on_the_expected_claim() {
    let fails = |name: ScenarioName| {
        let rep = Scenario::default_for(name).negative_control().run();
        failed(&rep).into_iter().map(String::from).collect::<Vec<_>>()
    };
    assert_eq!(fails(ScenarioName::TwoNormalChains), ["the two chains differ"]);
    assert_eq!(fails(ScenarioName::ComplexResonanceSemigroup), ["chain is not normal"]);
    assert!(fails(ScenarioName::PureRealResonanceAdversary).contains(&"chain is not normal".to_string()));
    assert!(fails(ScenarioName::PeriodicNoComplexResonance).contains(&"chain is normal".to_string()));
}

#[test]
fn semigroup_law_for_both_slopes() {
    for c in [0.01, 0.05] {
        let sc = Scenario::build("complex_resonance_semigroup", &json!({"c": {"re": c, "im": 0.0}, "a0": {"re": 0.3, "im": -0.1}}))
            .unwrap();
        let rep = sc.run();
        assert!(rep.passed, "c = {c}: {:?}", failed(&rep));
    }
}

#[test]
fn constraints_are_enforced() {
    let e = Scenario::build("two_normal_chains", &json!({"alpha": [{"re": -1.0, "im": 0.0}, {"re": -1.5, "im": 0.0}]}));
    assert!(matches!(e, Err(Error::Scenario(m)) if m.contains("Re α2 <= 2 Re α1")));
    let e = Scenario::build("complex_resonance_semigroup", &json!({"alpha2": {"re": -1.5, "im": 0.0}}));
    assert!(matches!(e, Err(Error::Scenario(m)) if m.contains("α2 = 2 α1")));
    let e = Scenario::build("pure_real_resonance_adversary", &json!({"lambda2": {"re": 0.3, "im": 0.0}}));
    assert!(matches!(e, Err(Error::Scenario(m)) if m.contains("|λ1|^2 = |λ2|")));
    let e = Scenario::build("pure_real_resonance_adversary", &json!({"rotation": 0.0}));
    assert!(matches!(e, Err(Error::Scenario(m)) if m.contains("λ1^2 != λ2")));
    let e = Scenario::build("periodic_no_complex_resonance", &json!({"alpha": [{"re": -0.5, "im": 0.9}, {"re": -1.0, "im": 1.8}]}));
    assert!(matches!(e, Err(Error::Scenario(m)) if m.contains("complex resonance")));
    assert!(matches!(Scenario::build("nope", &json!(null)), Err(Error::Scenario(_))));
    assert!(Scenario::build("two_normal_chains", &json!({"bogus": 1})).is_err());
}

#[test]
fn short_adversary_run_warns_but_passes() {
    let sc = Scenario::build("pure_real_resonance_adversary", &json!({"horizon": 16})).unwrap();
    let rep = sc.run();
    assert!(rep.passed);
    assert!(!rep.warnings.is_empty());
}

#[test]
fn arc_forcing_matches_direct_construction() {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * g);
    let (a, arc) = adversary_forcing(zeta, 256, 0.1, 8);
    // direct: count arcs by angle in turns
    let mut hits = [0usize; 8];
    let arc_of = |m: usize| ((m as f64 * g).fract() * 8.0) as usize;
    for m in 1..=256 {
        hits[arc_of(m)] += 1;
    }
    let best = (0..8).rev().max_by_key(|&k| hits[k]).unwrap();
    assert_eq!(arc, best);
    for m in 1..=256 {
        assert_eq!(a[m - 1], if arc_of(m) == best { 0.05 } else { 0.0 });
    }
    let sums = forcing_partial_sums(zeta, &a);
    let direct: Complex64 = (1..=256).map(|j| a[j - 1] * zeta.powu(j as u32)).sum();
    assert!((sums[256] - direct).norm() < 1e-12);
    assert!(running_max_ratio(&sums) >= 2.0);
}

#[test]
fn scenario_generator_resolves() {
    let sc = Scenario::default_for(ScenarioName::ComplexResonanceSemigroup);
    let fam = sc.family().unwrap();
    let json = FamilyJson {
        spectrum: fam.spectrum().clone(),
        degree: None,
        steps: None,
        generator: Some(GeneratorJson::Scenario {
            name: "complex_resonance_semigroup".into(),
            params: json!({}),
        }),
    };
    let text = serde_json::to_string(&json).unwrap();
    assert!(text.contains("\"kind\":\"scenario\""));
    let back: FamilyJson = serde_json::from_str(&text).unwrap();
    assert_eq!(resolve_family(&back).unwrap().step(0), fam.step(0));
    let other = FamilyJson {
        generator: Some(GeneratorJson::Scenario {
            name: "pure_real_resonance_adversary".into(),
            params: json!({}),
        }),
        ..json
    };
    assert!(matches!(resolve_family(&other), Err(Error::Parse(_))));
}

#[test]
fn report_json_round_trip() {
    let rep = Scenario::default_for(ScenarioName::TwoNormalChains).run();
    let text = serde_json::to_string(&rep).unwrap();
    let back: ScenarioReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, rep);
    for key in ["\"name\"", "\"assertions\"", "\"claim\"", "\"paper_ref\"", "\"pass\"", "\"detail\""] {
        assert!(text.contains(key));
    }
}
