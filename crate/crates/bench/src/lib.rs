//! Fixtures shared by the benchmarks.

use pacbam::prelude::*;

/// A Model 1 dataset of the benchmark's size.
pub fn fixture(n: usize, p: usize) -> SimOutput {
    simulate(&SimSpec::new(1, n, p, 17).expect("valid spec")).expect("simulation succeeds")
}

pub fn config(p: usize, iterations: usize) -> SamplerConfig {
    SamplerConfig::builder(p)
        .temperature(Temperature::Practical { noise_var: 0.1 })
        .iterations(iterations)
        .seed(5)
        .build()
        .expect("valid config")
}
