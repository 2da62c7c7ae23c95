mod common;

use common::*;
use loewner_core::jet::JetJson;
use loewner_core::{Complex64, Error, JetMap};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn shear(a: Complex64, degree: usize) -> JetMap {
    // (z1, z2 + a z1^2)
    let mut f = JetMap::identity(2, degree);
    f.set_coeff(1, &idx([2, 0]), a).unwrap();
    f
}

#[test]
fn compose_with_identity_is_noop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_jet(&mut rng, 3, 4, 1.0);
    let id = JetMap::identity(3, 4);
    assert_eq!(f.compose(&id).unwrap().distance(&f).unwrap(), 0.0);
    assert!(id.compose(&f).unwrap().distance(&f).unwrap() < 1e-15);
}

#[test]
fn shear_squared() {
    let s = shear(r(1.0), 2);
    let ss = s.compose(&s).unwrap();
    assert_eq!(ss, shear(r(2.0), 2));
}

#[test]
fn linear_compose_multiplies() {
    let a = JetMap::diagonal(&[r(0.5), c(0.0, 0.3)], 3);
    let b = JetMap::diagonal(&[r(2.0), r(-1.0)], 3);
    let ab = a.compose(&b).unwrap();
    assert_eq!(ab, JetMap::diagonal(&[r(1.0), c(0.0, -0.3)], 3));
}

#[test]
fn compose_matches_naive_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (dim, deg) in [(1, 6), (2, 6), (3, 4), (4, 3)] {
        let f = random_jet(&mut rng, dim, deg, 1.0);
        let g = random_jet(&mut rng, dim, deg, 1.0);
        let fast = f.compose(&g).unwrap();
        let slow = naive_compose(&f, &g);
        assert!(fast.distance(&slow).unwrap() < 1e-11, "dim {dim} deg {deg}");
    }
}

#[test]
fn compose_shape_mismatch_is_contract_error() {
    let a = JetMap::identity(2, 3);
    let b = JetMap::identity(2, 4);
    let c3 = JetMap::identity(3, 3);
    assert!(matches!(a.compose(&b), Err(Error::Contract(_))));
    assert!(matches!(a.compose(&c3), Err(Error::Contract(_))));
}

#[test]
fn invert_examples() {
    let id = JetMap::identity(2, 6);
    assert_eq!(id.invert().unwrap(), id);
    assert!(shear(r(1.0), 6).invert().unwrap().distance(&shear(r(-1.0), 6)).unwrap() < 1e-15);

    let (l1, l2, a) = (c(0.6, 0.2), r(0.3), c(1.5, -0.5));
    let mut f = JetMap::diagonal(&[l1, l2], 6);
    f.set_coeff(1, &idx([2, 0]), a).unwrap();
    let mut expect = JetMap::diagonal(&[l1.inv(), l2.inv()], 6);
    expect.set_coeff(1, &idx([2, 0]), -a / (l2 * l1 * l1)).unwrap();
    let g = f.invert().unwrap();
    assert!(g.distance(&expect).unwrap() < 1e-13);
    let id = JetMap::identity(2, 6);
    assert!(naive_compose(&f, &g).distance(&id).unwrap() < 1e-13);
    assert!(naive_compose(&g, &f).distance(&id).unwrap() < 1e-13);
}

#[test]
fn singular_linear_part_is_rejected() {
    let f = JetMap::diagonal(&[r(1.0), r(0.0)], 3);
    assert_eq!(f.invert().unwrap_err(), Error::NonInvertible);
}

#[test]
fn homogeneous_parts_partition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_jet(&mut rng, 2, 5, 1.0);
    let mut sum = JetMap::zero(2, 5);
    for i in 1..=5 {
        sum = sum.add(&f.homogeneous_part(i).unwrap()).unwrap();
    }
    assert_eq!(sum, f);
    assert_eq!(f.homogeneous_part(1).unwrap().linear_part(), f.linear_part());
    assert!(f.homogeneous_part(0).is_err());
    assert!(f.homogeneous_part(6).is_err());

    let mut g = JetMap::diagonal(&[r(0.5), r(0.2)], 3);
    g.set_coeff(1, &idx([2, 0]), r(0.7)).unwrap();
    let p2 = g.homogeneous_part(2).unwrap();
    assert_eq!(p2.terms().count(), 1);
    assert_eq!(p2.coeff(1, &idx([2, 0])), r(0.7));
}

#[test]
fn evaluate_examples() {
    let s = shear(r(1.0), 3);
    assert_eq!(s.evaluate(&[r(1.0), r(0.0)]), vec![r(1.0), r(1.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = random_jet(&mut rng, 3, 4, 1.0);
    assert!(f.evaluate(&[r(0.0); 3]).iter().all(|v| v.norm() == 0.0));
    let z = rand_point(&mut rng, 3, 0.8);
    let a = f.evaluate(&z);
    let b = naive_eval(&f, &z);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-13);
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_jet(&mut rng, 2, 5, 1.0);
    let z = rand_point(&mut rng, 2, 0.5);
    let jac = f.jacobian(&z);
    let h = 1e-6;
    for k in 0..2 {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[k] += h;
        zm[k] -= h;
        let (fp, fm) = (f.evaluate(&zp), f.evaluate(&zm));
        for row in 0..2 {
            let fd = (fp[row] - fm[row]) / (2.0 * h);
            assert!((fd - jac[(row, k)]).norm() < 1e-7);
        }
    }
}

#[test]
fn coefficient_norm_examples() {
    assert_eq!(JetMap::zero(2, 3).coefficient_norm(None), 0.0);
    let mut f = JetMap::identity(2, 3);
    f.set_coeff(1, &idx([2, 0]), c(3.0, 4.0)).unwrap();
    assert_eq!(f.coefficient_norm(Some(2)), 5.0);
    assert_eq!(f.coefficient_norm(Some(3)), 0.0);
    assert_eq!(f.coefficient_norm(None), 5.0);
}

#[test]
fn set_coeff_rejects_out_of_range_keys() {
    let mut f = JetMap::zero(2, 3);
    assert!(f.set_coeff(0, &idx([0, 0]), r(1.0)).is_err());
    assert!(f.set_coeff(0, &idx([2, 2]), r(1.0)).is_err());
    assert!(f.set_coeff(2, &idx([1, 0]), r(1.0)).is_err());
    assert!(f.set_coeff(0, &idx([1, 0, 0]), r(1.0)).is_err());
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_jet(&mut rng, 2, 3, 1.0);
    let s = serde_json::to_string(&f).unwrap();
    let back: JetMap = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f);

    let wire: JetJson = serde_json::from_str(
        r#"{"dim":2,"degree":2,"components":[{"monomials":[{"index":[1,0],"re":1,"im":0}]},
           {"monomials":[{"index":[0,1],"re":1,"im":0},{"index":[2,0],"re":1,"im":0}]}]}"#,
    )
    .unwrap();
    assert_eq!(JetMap::try_from(&wire).unwrap(), shear(r(1.0), 2));
    let bad = r#"{"dim":2,"degree":2,"components":[{"monomials":[{"index":[0,0],"re":1,"im":0}]},{"monomials":[]}]}"#;
    assert!(serde_json::from_str::<JetMap>(bad).is_err());
}

fn jet_strategy(dim: usize, degree: usize) -> impl Strategy<Value = JetMap> {
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_jet(&mut rng, dim, degree, 1.0)
    })
}

fn rel_distance(a: &JetMap, b: &JetMap) -> f64 {
    let scale = a.coefficient_norm(None).max(b.coefficient_norm(None)).max(1.0);
    a.distance(b).unwrap() / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn associativity(f in jet_strategy(2, 6), g in jet_strategy(2, 6), h in jet_strategy(2, 6)) {
        let l = f.compose(&g).unwrap().compose(&h).unwrap();
        let r = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert!(rel_distance(&l, &r) <= 1e-12);
    }

    #[test]
    fn inversion_round_trip(f in jet_strategy(3, 5)) {
        let g = f.invert().unwrap();
        let id = JetMap::identity(3, 5);
        prop_assert!(f.compose(&g).unwrap().distance(&id).unwrap() <= 1e-10);
        prop_assert!(g.compose(&f).unwrap().distance(&id).unwrap() <= 1e-10);
    }

    #[test]
    fn truncation_consistency(f in jet_strategy(2, 6), g in jet_strategy(2, 6), d in 1usize..6) {
        let full = f.compose(&g).unwrap().truncate(d);
        let low = f.truncate(d).compose(&g.truncate(d)).unwrap();
        prop_assert!(full.distance(&low).unwrap() <= 1e-12 * full.coefficient_norm(None).max(1.0));
    }

    #[test]
    fn evaluation_commutes_with_composition(f in jet_strategy(2, 4), g in jet_strategy(2, 4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rad = 0.01;
        let z = rand_point(&mut rng, 2, rad);
        let lhs = f.compose(&g).unwrap().evaluate(&z);
        let rhs = f.evaluate(&g.evaluate(&z));
        let bound = 10.0 * rad.powi(5) * f.coefficient_norm(None) * g.coefficient_norm(None).max(1.0).powi(5) * 20.0;
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).norm() <= bound);
        }
    }
}
