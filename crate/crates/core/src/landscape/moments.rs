use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::density::{default_grid_step, halfnormal_sum_density, GridDensity, LogIntegral};
use super::montecarlo::exp_moment_tilted_mc;
use super::orthant::local_opt_probability;
use super::{EstimateWithError, Method};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Below,
    Above,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Below => "below",
            Side::Above => "above",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "below" => Ok(Side::Below),
            "above" => Ok(Side::Above),
            _ => Err(Error::InvalidArgument(format!("unknown side '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Convolution,
    TiltedMc { samples: u64, seed: u64 },
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "the exponential moment needs n >= 3, got {n}"
        )));
    }
    Ok(())
}

fn moment_exponent(n: usize) -> f64 {
    0.25 / (n as f64 - 1.0)
}

/// `log E exp(‖N‖₁²/(4(n−1)))`.
pub fn exp_moment(n: usize, method: MomentMethod) -> Result<EstimateWithError> {
    check_n(n)?;
    match method {
        MomentMethod::Convolution => halfnormal_sum_density(n, default_grid_step(n))?.log_exp_moment(),
        MomentMethod::TiltedMc { samples, seed } => exp_moment_tilted_mc(n, samples, seed),
    }
}

/// `log E[exp(‖N‖₁²/(4(n−1))) 1{‖N‖₁ ≤ bound}]` (or `≥ bound`).
pub fn truncated_exp_moment(n: usize, bound: f64, side: Side) -> Result<EstimateWithError> {
    check_n(n)?;
    halfnormal_sum_density(n, default_grid_step(n))?.truncated_exp_moment(bound, side)
}

/// `P{−H(σ)/n^{3/2} ≥ Δ | σ locally optimal}`.
pub fn conditional_energy_tail(n: usize, delta: f64) -> Result<EstimateWithError> {
    check_n(n)?;
    halfnormal_sum_density(n, default_grid_step(n))?.conditional_energy_tail(delta)
}

/// `E[−H(σ)/n^{3/2} | σ locally optimal]`.
pub fn conditional_energy_mean(n: usize) -> Result<EstimateWithError> {
    check_n(n)?;
    halfnormal_sum_density(n, default_grid_step(n))?.conditional_energy_mean()
}

/// The same moment obtained from the orthant probability through
/// `log E = log P + n log 2 + ½ log((2n−2)/(n−2))`.
pub fn log_exp_moment_from_probability(n: usize) -> Result<EstimateWithError> {
    check_n(n)?;
    let p = local_opt_probability(n)?;
    let nf = n as f64;
    let log_value =
        p.log_value + nf * std::f64::consts::LN_2 + 0.5 * ((2.0 * nf - 2.0) / (nf - 2.0)).ln();
    Ok(EstimateWithError::from_log(log_value, p.log_error, Method::OrthantQuadrature))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpMomentBounds {
    pub jensen_lower: f64,
    pub log_sobolev_upper: f64,
}

/// Bounds on `log E exp(λ‖N‖₁²)`, `λ = 1/(4(n−1))`, from Jensen and from the
/// Gaussian log-Sobolev inequality, with `E‖N‖₁² = n + n(n−1)·2/π`.
pub fn exp_moment_bounds(n: usize) -> Result<ExpMomentBounds> {
    check_n(n)?;
    let nf = n as f64;
    let lambda = moment_exponent(n);
    let second = nf + nf * (nf - 1.0) * 2.0 / std::f64::consts::PI;
    let jensen_lower = lambda * second;
    Ok(ExpMomentBounds {
        jensen_lower,
        log_sobolev_upper: jensen_lower * (1.0 + nf * lambda / (1.0 - nf * lambda)),
    })
}

impl GridDensity {
    fn log_error(&self, i: LogIntegral) -> f64 {
        i.log_error + self.log_mass().abs()
    }

    fn check_moment_n(&self) -> Result<()> {
        check_n(self.n)
    }

    fn moment_integral(&self, extra: impl Fn(f64) -> f64, lo: f64, hi: f64) -> LogIntegral {
        let c = moment_exponent(self.n);
        self.log_integral(|s| c * s * s + extra(s), lo, hi)
    }

    pub fn log_exp_moment(&self) -> Result<EstimateWithError> {
        self.check_moment_n()?;
        let i = self.moment_integral(|_| 0.0, self.grid_start, self.end());
        Ok(EstimateWithError::from_log(i.log_value, self.log_error(i), Method::Convolution))
    }

    pub fn truncated_exp_moment(&self, bound: f64, side: Side) -> Result<EstimateWithError> {
        self.check_moment_n()?;
        if bound.is_nan() || bound < 0.0 {
            return Err(domain("bound", bound, "must be nonnegative"));
        }
        let (lo, hi) = match side {
            Side::Below => (self.grid_start, bound),
            Side::Above => (bound, self.end()),
        };
        let i = self.moment_integral(|_| 0.0, lo, hi);
        Ok(EstimateWithError::from_log(i.log_value, self.log_error(i), Method::Convolution))
    }

    /// Ratio of the moment restricted to `‖N‖₁ ≥ 2Δn^{3/2}/sqrt(n−2)` to the
    /// full moment.
    pub fn conditional_energy_tail(&self, delta: f64) -> Result<EstimateWithError> {
        self.check_moment_n()?;
        if delta.is_nan() || delta < 0.0 {
            return Err(domain("delta", delta, "must be nonnegative"));
        }
        let nf = self.n as f64;
        let bound = 2.0 * delta * nf.powf(1.5) / (nf - 2.0).sqrt();
        let part = self.moment_integral(|_| 0.0, bound, self.end());
        let total = self.moment_integral(|_| 0.0, self.grid_start, self.end());
        let value = (part.log_value - total.log_value).exp().min(1.0);
        let error = value * (part.log_error + total.log_error);
        Ok(EstimateWithError::from_value(value, error, Method::Convolution))
    }

    /// `sqrt(n−2)/(2n^{3/2}) · E[S e^{S²/(4(n−1))}] / E[e^{S²/(4(n−1))}]`.
    pub fn conditional_energy_mean(&self) -> Result<EstimateWithError> {
        self.check_moment_n()?;
        let nf = self.n as f64;
        let first = self.moment_integral(f64::ln, self.grid_start, self.end());
        let total = self.moment_integral(|_| 0.0, self.grid_start, self.end());
        let scale = (nf - 2.0).sqrt() / (2.0 * nf.powf(1.5));
        let value = scale * (first.log_value - total.log_value).exp();
        let error = value * (first.log_error + total.log_error);
        Ok(EstimateWithError::from_value(value, error, Method::Convolution))
    }
}
