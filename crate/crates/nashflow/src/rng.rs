//! Deterministic random sampling.
//!
//! Everything random in this crate flows through [`substream`]: a ChaCha8
//! generator keyed by a user seed with the 64-bit stream counter set to a
//! task-local index (pair index, sample row, …). The integer output stream of
//! ChaCha8 is identical on every platform, so reports and sample tables are
//! bit-reproducible, and work split across substreams is schedule-independent.
//!
//! Normal variates use the basic Box–Muller transform (not a ziggurat) so the
//! mapping from generator output to samples is fixed and easy to document.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for substream `stream` of the given seed.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One pair of independent standard normal draws via Box–Muller.
pub fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.gen(); // uniform in [0, 1)
    let u2: f64 = rng.gen();
    // 1 - u1 lies in (0, 1], so the log is finite.
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Fill `out` with standard normal draws, consuming pairs in order.
pub fn fill_normal(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let mut i = 0;
    while i + 1 < out.len() {
        let (a, b) = normal_pair(rng);
        out[i] = a;
        out[i + 1] = b;
        i += 2;
    }
    if i < out.len() {
        out[i] = normal_pair(rng).0;
    }
}

/// Uniform draw from the m-simplex, i.e. Dirichlet(1, …, 1): normalized
/// independent Exp(1) variates.
pub fn dirichlet_uniform(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..m)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        // All draws were exactly zero; vanishing-probability corner case.
        return vec![1.0 / m as f64; m];
    }
    for x in &mut v {
        *x /= total;
    }
    v
}
