//! Expected nearest-neighbor distances: the closed forms for a density of
//! the form `d/dr exp(-λ V0 r^k)`, the one-dimensional uniform model checked
//! by Monte Carlo, and the constant `δ` with its continued fraction.

pub mod contfrac;
pub mod decimal;
pub mod quadrature;

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::exec;
use crate::rng::stream_rng;

pub use contfrac::{continued_fraction_convergents, Convergent, ConvergentReport, StopReason};
pub use decimal::{delta_constant, Decimal};

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn dimension(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidArgument("dimension k must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Volume of a set of volume `v0` scaled by `r` in `k` dimensions.
pub fn scaled_volume(v0: f64, r: f64, k: u32) -> Result<f64> {
    positive("V0", v0)?;
    positive("r", r)?;
    dimension(k)?;
    Ok(v0 * r.powi(k as i32))
}

/// Density of the nearest-neighbor distance, `kλV0 r^(k-1) exp(-λV0 r^k)`.
pub fn nn_distance_density(r: f64, k: u32, lambda: f64, v0: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let c = lambda * v0;
    k as f64 * c * r.powi(k as i32 - 1) * (-c * r.powi(k as i32)).exp()
}

/// `E(r) = Γ(1 + 1/k) / (λ V0)^(1/k)`.
pub fn expected_nn_distance(k: u32, lambda: f64, v0: f64) -> Result<f64> {
    dimension(k)?;
    positive("lambda", lambda)?;
    positive("V0", v0)?;
    let kf = k as f64;
    Ok(gamma(1.0 + 1.0 / kf) / (lambda * v0).powf(1.0 / kf))
}

/// `Γ(1 + 1/k)^k / λ`: the scaled volume at the expected radius, which does
/// not depend on `V0`.
pub fn volume_at_expected(k: u32, lambda: f64) -> Result<f64> {
    dimension(k)?;
    positive("lambda", lambda)?;
    let kf = k as f64;
    Ok(gamma(1.0 + 1.0 / kf).powi(k as i32) / lambda)
}

/// Upper integration limit with `exp(-λV0 R^k) < 1e-14`.
pub fn tail_cutoff(k: u32, lambda: f64, v0: f64) -> f64 {
    // exp(-36) ~ 2.3e-16
    (36.0 / (lambda * v0)).powf(1.0 / k as f64)
}

/// `∫ r f(r) dr` over `(0, R)` by adaptive quadrature.
pub fn expected_nn_distance_by_quadrature(k: u32, lambda: f64, v0: f64) -> Result<quadrature::Quadrature> {
    dimension(k)?;
    positive("lambda", lambda)?;
    positive("V0", v0)?;
    let upper = tail_cutoff(k, lambda, v0);
    Ok(quadrature::integrate(
        |r| r * nn_distance_density(r, k, lambda, v0),
        0.0,
        upper,
        0.0,
        1e-13,
        2000,
    ))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.standard_error
    }
}

const MC_CHUNK: u64 = 1 << 14;

/// Monte Carlo estimate of `E[min(|x_1|, …, |x_n|)]` for `x_i` i.i.d.
/// uniform on `[-L, L]`. Work is split into fixed chunks, each with its own
/// generator stream, so the result depends only on `seed`.
pub fn uniform_interval_expected_nn(n: u32, l: f64, samples: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    positive("L", l)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial = exec::map_range(chunks as usize, |c| mc_chunk(n, l, samples, seed, c as u64));
    Ok(merge_chunks(partial, samples, seed))
}

/// Single-threaded [`uniform_interval_expected_nn`]; identical output.
pub fn uniform_interval_expected_nn_sequential(n: u32, l: f64, samples: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 || samples == 0 {
        return Err(Error::InvalidArgument("need at least one point and one sample".into()));
    }
    positive("L", l)?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial = exec::map_range_sequential(chunks as usize, |c| mc_chunk(n, l, samples, seed, c as u64));
    Ok(merge_chunks(partial, samples, seed))
}

fn mc_chunk(n: u32, l: f64, samples: u64, seed: u64, chunk: u64) -> (f64, f64) {
    let mut rng = stream_rng(seed, chunk);
    let start = chunk * MC_CHUNK;
    let end = (start + MC_CHUNK).min(samples);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in start..end {
        let m = (0..n)
            .map(|_| rng.random_range(-l..=l).abs())
            .fold(f64::INFINITY, f64::min);
        sum += m;
        sum_sq += m * m;
    }
    (sum, sum_sq)
}

fn merge_chunks(partial: Vec<(f64, f64)>, samples: u64, seed: u64) -> MonteCarloEstimate {
    let (sum, sum_sq) = partial
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let count = samples as f64;
    let mean = sum / count;
    let variance = if samples > 1 {
        ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0)
    } else {
        0.0
    };
    MonteCarloEstimate {
        mean,
        standard_error: (variance / count).sqrt(),
        samples,
        seed,
    }
}

/// The guess `L/(n+1)` for the expected distance from 0 to the nearest of
/// `n` uniform points on `[-L, L]`. Shown analytically for `n = 1` and
/// `n = 3` only; pair it with the Monte Carlo estimate.
pub fn conjectured_expected_nn(n: u32, l: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    positive("L", l)?;
    Ok(l / (n as f64 + 1.0))
}
