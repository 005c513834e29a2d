//! Shared instance generators for unit tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::io::{generate_ccsp, CvrpSource, GenerationParams};
use crate::model::{CcspInstance, EdgeMetric};

/// A small random instance with benchmark-style k-nearest cover sets.
pub(crate) fn random_cover_instance(rng: &mut ChaCha8Rng) -> CcspInstance {
    let n = rng.gen_range(8..20);
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0..60) as f64, rng.gen_range(0..60) as f64))
        .collect();
    let mut demands: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=8)).collect();
    demands[0] = 0;
    let src = CvrpSource {
        name: format!("rand-n{n}"),
        dimension: n,
        capacity: rng.gen_range(10..=20),
        coords,
        demands,
        depot: 0,
        metric: if rng.gen_bool(0.5) {
            EdgeMetric::RoundedEuclidean
        } else {
            EdgeMetric::ExactEuclidean
        },
    };
    let fraction = rng.gen_range(0.2..0.5);
    let cover = rng.gen_range(2..=4);
    generate_ccsp(&src, &GenerationParams::new(fraction, cover).unwrap()).unwrap()
}

/// A tiny random instance: few vertices, few demands, capacity tuned so one
/// to three vehicles are needed. Suitable for exhaustive oracles.
pub(crate) fn tiny_instance(rng: &mut ChaCha8Rng) -> CcspInstance {
    let n = rng.gen_range(4..=8); // |V_0| <= 7
    let coords: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0..40) as f64, rng.gen_range(0..40) as f64))
        .collect();
    let mut demands: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
    demands[0] = 0;
    let demand_count = rng.gen_range(1..=4.min(n - 1));
    let src = CvrpSource {
        name: format!("tiny-n{n}"),
        dimension: n,
        capacity: rng.gen_range(6..=12),
        coords,
        demands,
        depot: 0,
        metric: if rng.gen_bool(0.5) {
            EdgeMetric::RoundedEuclidean
        } else {
            EdgeMetric::ExactEuclidean
        },
    };
    let fraction = demand_count as f64 / n as f64 + 1e-9;
    let cover = rng.gen_range(2..=3);
    generate_ccsp(&src, &GenerationParams::new(fraction, cover).unwrap()).unwrap()
}
