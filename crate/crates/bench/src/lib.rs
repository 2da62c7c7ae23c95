//! Fixtures for the criterion benchmarks under `benches/`.

use loewner_core::{Complex64, DiscreteFamily, JetMap, MultiIndex, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Jet with linear part `diag(λ)` and random coefficients of modulus below `scale`.
pub fn random_jet(rng: &mut ChaCha8Rng, lambdas: &[Complex64], degree: usize, scale: f64) -> JetMap {
    let n = lambdas.len();
    let mut f = JetMap::diagonal(lambdas, degree);
    for comp in 0..n {
        for order in 2..=degree as u32 {
            for i in MultiIndex::of_order(n, order) {
                let v = Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
                f.set_coeff(comp, &i, v).expect("valid key");
            }
        }
    }
    f
}

/// Multipliers `0.6, 0.6·0.55, ...` with distinct arguments; no real
/// resonance for the dimensions and degrees benchmarked.
pub fn spectrum(dim: usize) -> Spectrum {
    let lambdas = (0..dim)
        .map(|k| Complex64::from_polar(0.6 * 0.55f64.powi(k as i32), 0.7 + 1.3 * k as f64))
        .collect();
    Spectrum::discrete(lambdas).expect("sorted and contracting")
}

pub fn random_family(dim: usize, degree: usize, horizon: usize, seed: u64) -> DiscreteFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = spectrum(dim);
    let steps = (0..horizon).map(|_| random_jet(&mut rng, spec.lambdas(), degree, 0.3)).collect();
    DiscreteFamily::from_steps(spec, steps).expect("consistent steps")
}
