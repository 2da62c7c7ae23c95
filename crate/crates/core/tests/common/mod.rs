//! Shared helpers for integration tests: a naive sparse polynomial oracle
//! and random jet generators.
#![allow(dead_code)]

use std::collections::BTreeMap;

use loewner_core::{Complex64, JetMap, MultiIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Poly = BTreeMap<Vec<u32>, Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn idx<const N: usize>(e: [u32; N]) -> MultiIndex {
    MultiIndex::from(e)
}

pub fn to_polys(f: &JetMap) -> Vec<Poly> {
    let mut out = vec![Poly::new(); f.dim()];
    for (comp, i, v) in f.terms() {
        out[comp].insert(i.entries().to_vec(), v);
    }
    out
}

fn poly_mul(a: &Poly, b: &Poly, degree: u32) -> Poly {
    let mut out = Poly::new();
    for (ia, ca) in a {
        for (ib, cb) in b {
            let e: Vec<u32> = ia.iter().zip(ib).map(|(x, y)| x + y).collect();
            if e.iter().sum::<u32>() <= degree {
                *out.entry(e).or_default() += ca * cb;
            }
        }
    }
    out
}

/// Composition by literal substitution, multiplying out each monomial factor by factor.
pub fn naive_compose(f: &JetMap, g: &JetMap) -> JetMap {
    let n = f.dim();
    let d = f.degree() as u32;
    let gp = to_polys(g);
    let mut out = JetMap::zero(n, f.degree());
    for (comp, i, v) in f.terms() {
        let mut acc: Poly = Poly::new();
        acc.insert(vec![0; n], Complex64::new(1.0, 0.0));
        for (k, &e) in i.entries().iter().enumerate() {
            for _ in 0..e {
                acc = poly_mul(&acc, &gp[k], d);
            }
        }
        for (e, w) in acc {
            if e.iter().sum::<u32>() >= 1 {
                out.add_to(comp, &MultiIndex::new(e), v * w).unwrap();
            }
        }
    }
    out
}

/// Naive evaluation straight from the term list.
pub fn naive_eval(f: &JetMap, z: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); f.dim()];
    for (comp, i, v) in f.terms() {
        let mut m = v;
        for (k, &e) in i.entries().iter().enumerate() {
            m *= z[k].powu(e);
        }
        out[comp] += m;
    }
    out
}

pub fn rand_c(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Random jet with a well-conditioned linear part (diagonally dominant)
/// and higher coefficients of modulus at most `scale`.
pub fn random_jet(rng: &mut ChaCha8Rng, dim: usize, degree: usize, scale: f64) -> JetMap {
    let mut f = JetMap::zero(dim, degree);
    for comp in 0..dim {
        for order in 1..=degree as u32 {
            for i in MultiIndex::of_order(dim, order) {
                let v = if order == 1 {
                    if i.get(comp) == 1 {
                        Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU))
                    } else {
                        rand_c(rng, 0.2)
                    }
                } else {
                    rand_c(rng, scale)
                };
                f.set_coeff(comp, &i, v).unwrap();
            }
        }
    }
    f
}

pub fn rand_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::from_polar(radius * rng.gen_range(0.0..1.0f64).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

use loewner_core::spectrum::{enumerate_resonances, Spectrum};
use loewner_core::DiscreteFamily;

/// Two multipliers with no real resonance up to `degree`, every real
/// defect at least `margin`.
pub fn no_resonance_spectrum(rng: &mut ChaCha8Rng, degree: usize, margin: f64) -> Spectrum {
    loop {
        let m1 = rng.gen_range(0.3..0.8);
        let m2 = m1 * rng.gen_range(0.15..0.95);
        let s = Spectrum::discrete(vec![
            Complex64::from_polar(m1, rng.gen_range(0.0..std::f64::consts::TAU)),
            Complex64::from_polar(m2, rng.gen_range(0.0..std::f64::consts::TAU)),
        ])
        .unwrap();
        if enumerate_resonances(&s, degree, margin).is_empty() {
            return s;
        }
    }
}

/// Step with linear part `diag(λ)` and random higher terms.
pub fn random_step(rng: &mut ChaCha8Rng, spec: &Spectrum, degree: usize, scale: f64) -> JetMap {
    let n = spec.dim();
    let mut s = JetMap::diagonal(spec.lambdas(), degree);
    for comp in 0..n {
        for order in 2..=degree as u32 {
            for i in MultiIndex::of_order(n, order) {
                s.set_coeff(comp, &i, rand_c(rng, scale)).unwrap();
            }
        }
    }
    s
}

pub fn random_family(rng: &mut ChaCha8Rng, spec: &Spectrum, degree: usize, horizon: usize, scale: f64) -> DiscreteFamily {
    let steps = (0..horizon).map(|_| random_step(rng, spec, degree, scale)).collect();
    DiscreteFamily::from_steps(spec.clone(), steps).unwrap()
}
