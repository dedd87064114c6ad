//! Inputs shared by the benchmarks.

use spreadcs::seed::rng_from_seed;
use spreadcs::Complex64;

use rand_distr::{Distribution, StandardNormal};

pub fn random_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect()
}
