//! Scalar standard-normal primitives.
//!
//! Besides the density `f` and distribution function `Φ` this module provides
//! `φ(λ) = log(2Φ(λ))` with its first two derivatives, which is the
//! non-trivial part of the cumulant generating function of `|N(0,1)|`:
//!
//! ```text
//! log E exp(λ|N|) = λ²/2 + φ(λ)
//! ```
//!
//! The distribution function is computed from `erfc`; for arguments below
//! `-8` everything goes through the log of the Mills ratio so that
//! `n · log Φ(λ)` stays finite for very negative `λ`.

use serde::Serialize;

use crate::error::{domain, Result};

/// `1/sqrt(2π)`
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `log(sqrt(2π))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;
/// `sqrt(2/π) = E|N(0,1)|`
pub const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

const LOG_TAIL_CUTOFF: f64 = -8.0;

pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `Φ(x) = P{N ≤ x}`.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x < LOG_TAIL_CUTOFF {
        std_normal_log_cdf(x).exp()
    } else {
        0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// `log Φ(x)`, accurate in the far left tail where `Φ` itself underflows.
pub fn std_normal_log_cdf(x: f64) -> f64 {
    if x < LOG_TAIL_CUTOFF {
        std_normal_log_pdf(x) + mills_ratio(-x).ln()
    } else if x > 0.0 {
        // Φ(x) = 1 - Φ(-x); keep the small complement exact.
        (-0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)).ln_1p()
    } else {
        (0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)).ln()
    }
}

/// Mills ratio `(1 - Φ(t)) / f(t)` for `t ≥ 8`, by the Laplace continued
/// fraction `1/(t + 1/(t + 2/(t + 3/(t + ...))))` evaluated with Lentz's method.
fn mills_ratio(t: f64) -> f64 {
    debug_assert!(t >= -LOG_TAIL_CUTOFF);
    const TINY: f64 = 1e-300;
    let mut value = t;
    let mut c = t;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = t + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = t + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        value *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / value
}

/// `φ(λ) = log(2Φ(λ))`.
pub fn phi(lambda: f64) -> f64 {
    std::f64::consts::LN_2 + std_normal_log_cdf(lambda)
}

/// `φ'(λ) = f(λ)/Φ(λ)`, the inverse Mills ratio of the left tail.
pub fn phi_prime(lambda: f64) -> f64 {
    if lambda < LOG_TAIL_CUTOFF {
        1.0 / mills_ratio(-lambda)
    } else {
        std_normal_pdf(lambda) / std_normal_cdf(lambda)
    }
}

/// `φ''(λ) = -λ φ'(λ) - φ'(λ)²`.
pub fn phi_double_prime(lambda: f64) -> f64 {
    let h = phi_prime(lambda);
    -h * (lambda + h)
}

/// `log E exp(λ|N(0,1)|) = λ²/2 + φ(λ)`. Valid for every real `λ`.
pub fn log_halfnormal_mgf(lambda: f64) -> f64 {
    0.5 * lambda * lambda + phi(lambda)
}

/// `E exp(λ|N(0,1)|)` for `λ ≥ 0`.
pub fn halfnormal_mgf(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(domain("lambda", lambda, "half-normal MGF requires lambda >= 0"));
    }
    Ok(log_halfnormal_mgf(lambda).exp())
}

/// Outcome of the numerical check that `φ'' > -0.95` on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixBoundReport {
    /// Largest value of `g(λ) = (f/Φ)(λ) (λ + (f/Φ)(λ)) = -φ''(λ)` found.
    pub sup_value: f64,
    pub holds: bool,
    pub grid_step: f64,
}

const APPENDIX_THRESHOLD: f64 = 0.95;
const APPENDIX_GRID_END: f64 = 50.0;

/// Grid supremum of `-φ''` over `[0, 50]` combined with the closed-form
/// domination `g(λ) ≤ 2λf(λ) + 2f(λ)²` beyond 50 (both terms decrease there,
/// so the bound at 50 covers the whole tail).
pub fn verify_appendix_bound(grid_step: f64) -> Result<AppendixBoundReport> {
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(domain("grid_step", grid_step, "must lie in (0, 0.01]"));
    }
    let points = (APPENDIX_GRID_END / grid_step).ceil() as usize;
    let grid_sup = (0..=points)
        .map(|k| (k as f64 * grid_step).min(APPENDIX_GRID_END))
        .map(|lambda| -phi_double_prime(lambda))
        .fold(f64::NEG_INFINITY, f64::max);
    let f_end = std_normal_pdf(APPENDIX_GRID_END);
    let tail_bound = 2.0 * APPENDIX_GRID_END * f_end + 2.0 * f_end * f_end;
    let sup_value = grid_sup.max(tail_bound);
    Ok(AppendixBoundReport {
        sup_value,
        holds: sup_value < APPENDIX_THRESHOLD,
        grid_step,
    })
}

/// Break points of the three-range argument for the `-0.95` bound, and the
/// bound it gives on the middle range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixBreakpoints {
    /// `(0.95 - 2/π) / sqrt(2/π)`
    pub lambda_1: f64,
    /// `sqrt(log((2/π) / (0.95 - sqrt(2/(πe)))))`
    pub lambda_2: f64,
    /// `2 λ₂ f(λ₂) + 4 f(λ₁)²`
    pub interval_bound: f64,
}

pub fn appendix_breakpoints() -> AppendixBreakpoints {
    let two_over_pi = 2.0 / std::f64::consts::PI;
    let lambda_1 = (APPENDIX_THRESHOLD - two_over_pi) / HALF_NORMAL_MEAN;
    let lambda_2 = (two_over_pi
        / (APPENDIX_THRESHOLD - (two_over_pi / std::f64::consts::E).sqrt()))
    .ln()
    .sqrt();
    let f1 = std_normal_pdf(lambda_1);
    let interval_bound = 2.0 * lambda_2 * std_normal_pdf(lambda_2) + 4.0 * f1 * f1;
    AppendixBreakpoints {
        lambda_1,
        lambda_2,
        interval_bound,
    }
}
