use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{EstimateWithError, Method};
use crate::error::{Error, Result};
use crate::gaussian::log_halfnormal_mgf;
use crate::rate::critical_constants;
use crate::rng::{derive_seed, seeded_rng};
use crate::sk::{is_local_min, SkInstance, SpinConfiguration};

/// Upper limit on `n² · samples` for the naive estimator.
const NAIVE_BUDGET: f64 = 1e13;
const BLOCK: u64 = 1024;

/// Fraction of sampled instances (instance `k` seeded with
/// `derive_seed(seed, k)`) for which the all-ones configuration is a local
/// minimum, with its binomial standard error.
pub fn mc_local_opt_probability(n: usize, samples: u64, seed: u64) -> Result<EstimateWithError> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "local optimality needs n >= 2, got {n}"
        )));
    }
    if (n as f64).powi(2) * samples as f64 > NAIVE_BUDGET {
        return Err(Error::Resource(format!(
            "{samples} instances of size {n} exceed the sampling budget"
        )));
    }
    let sigma = SpinConfiguration::all_up(n);
    let hits = (0..samples)
        .into_par_iter()
        .map(|k| {
            let inst = SkInstance::sample(n, derive_seed(seed, k))?;
            Ok(u64::from(is_local_min(&inst, &sigma)?))
        })
        .sum::<Result<u64>>()?;
    let p = hits as f64 / samples as f64;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    Ok(EstimateWithError::from_value(p, se, Method::NaiveMc).with_samples(samples))
}

fn tilted_half_normal<R: Rng>(rng: &mut R, lambda: f64) -> f64 {
    loop {
        let x = lambda + rng.sample::<f64, _>(StandardNormal);
        if x > 0.0 {
            return x;
        }
    }
}

/// Importance-sampling estimate of `log E exp(‖N‖₁²/(4(n−1)))`: each `|Nᵢ|`
/// is drawn from the half-normal tilted by `λ = v*/2` (a unit normal centred
/// at `λ` and conditioned positive) and reweighted by `e^{−λS} M(λ)ⁿ`.
///
/// Samples come in blocks of 1024, block `b` seeded with
/// `derive_seed(seed, b)`, and block sums are added in block order, so the
/// result does not depend on the number of threads.
pub fn exp_moment_tilted_mc(n: usize, samples: u64, seed: u64) -> Result<EstimateWithError> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "the exponential moment needs n >= 3, got {n}"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("tilted Monte Carlo needs at least 2 samples".into()));
    }
    let nf = n as f64;
    let v_star = critical_constants().v_star;
    let lambda = 0.5 * v_star;
    let c = 0.25 / (nf - 1.0);
    let n_log_mgf = nf * log_halfnormal_mgf(lambda);
    let log_weight = |s: f64| c * s * s - lambda * s + n_log_mgf;
    // Weights near the tilted mean are O(1) after this shift.
    let shift = log_weight(nf * v_star);

    let blocks = samples.div_ceil(BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded_rng(derive_seed(seed, b));
            let count = BLOCK.min(samples - b * BLOCK);
            let (mut w1, mut w2) = (0.0, 0.0);
            for _ in 0..count {
                let s: f64 = (0..n).map(|_| tilted_half_normal(&mut rng, lambda)).sum();
                let w = (log_weight(s) - shift).exp();
                w1 += w;
                w2 += w * w;
            }
            (w1, w2)
        })
        .collect();
    let (w1, w2) = sums.iter().fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let m = samples as f64;
    let mean = w1 / m;
    let var = (w2 / m - mean * mean).max(0.0) * m / (m - 1.0);
    let se = (var / m).sqrt();
    Ok(EstimateWithError::from_log(shift + mean.ln(), se / mean, Method::TiltedMc).with_samples(samples))
}
