//! Probability that a fixed configuration is a local minimum, and the law of
//! its energy given that it is.
//!
//! The local fields `Z` of a fixed `σ` are a centred Gaussian vector with
//! covariance `(n−2)·Id + 𝟙𝟙ᵀ`, so `Z = sqrt(n−2)·X + g·𝟙` with `X, g`
//! independent standard normal. Two equivalent representations follow:
//!
//! ```text
//! P{σ locally optimal} = E_g Φ(g / sqrt(n−2))ⁿ                                 (orthant)
//!                      = 2⁻ⁿ sqrt((n−2)/(2n−2)) · E exp(‖N‖₁² / (4(n−1)))      (moment)
//! ```
//!
//! and, with `S = ‖N‖₁`, the conditional energy satisfies
//! `−H(σ)/n^{3/2} = sqrt(n−2)·S / (2n^{3/2})` under the law with density
//! proportional to `p_S(s)·exp(s²/(4(n−1)))`.

mod density;
mod moments;
mod montecarlo;
mod orthant;
mod tail;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

pub use density::{default_grid_step, halfnormal_sum_density, GridDensity, MAX_GRID_POINTS};
pub use moments::{
    conditional_energy_mean, conditional_energy_tail, exp_moment, exp_moment_bounds,
    log_exp_moment_from_probability, truncated_exp_moment, ExpMomentBounds, MomentMethod, Side,
};
pub use montecarlo::{exp_moment_tilted_mc, mc_local_opt_probability};
pub use orthant::{expected_count, local_opt_probability, ExpectedCount};
pub use tail::{tail_probability, TailReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    OrthantQuadrature,
    Convolution,
    TiltedMc,
    NaiveMc,
    BruteForce,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::OrthantQuadrature => "orthant-quadrature",
            Method::Convolution => "convolution",
            Method::TiltedMc => "tilted-mc",
            Method::NaiveMc => "naive-mc",
            Method::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [
            Method::OrthantQuadrature,
            Method::Convolution,
            Method::TiltedMc,
            Method::NaiveMc,
            Method::BruteForce,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// A numerical estimate together with how it was obtained and how far off it
/// may be. Exponentially large or small quantities are best read from
/// `log_value`; `value` may overflow to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub log_value: f64,
    pub method: Method,
    /// Absolute error bound or standard error of `value`.
    pub error: f64,
    /// Absolute error bound or standard error of `log_value`.
    pub log_error: f64,
    pub n_samples: Option<u64>,
}

impl EstimateWithError {
    pub(crate) fn from_log(log_value: f64, log_error: f64, method: Method) -> Self {
        let value = log_value.exp();
        Self {
            value,
            log_value,
            method,
            error: value * log_error,
            log_error,
            n_samples: None,
        }
    }

    pub(crate) fn from_value(value: f64, error: f64, method: Method) -> Self {
        Self {
            value,
            log_value: value.ln(),
            method,
            error,
            log_error: if value > 0.0 { error / value } else { f64::INFINITY },
            n_samples: None,
        }
    }

    pub(crate) fn with_samples(mut self, n_samples: u64) -> Self {
        self.n_samples = Some(n_samples);
        self
    }
}
