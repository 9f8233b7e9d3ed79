//! Legendre transform of the half-normal cumulant generating function.
//!
//! For `x ≥ sqrt(2/π)`:
//!
//! ```text
//! μ*(x)   = sup_{λ ≥ 0} λx − λ²/2 − φ(λ)
//! λ*(x)   = the maximiser, i.e. the root of λ + φ'(λ) = x
//! R_c(x)  = c x²/2 − μ*(x),     R = R_{1/2}
//! ```
//!
//! `R` is strictly concave with a unique maximiser `v*`; its maximum `α*`
//! is the growth exponent of the number of local optima (after subtracting
//! `log 2`). Since `(μ*)' = λ*`, stationarity `R'(v*) = 0` reads
//! `λ*(v*) = v*/2`, which reduces to the scalar equation `f(λ) = λΦ(λ)`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gaussian::{phi, phi_double_prime, phi_prime, std_normal_cdf, std_normal_pdf, HALF_NORMAL_MEAN};

/// Lower end of the domain of `μ*`.
pub const X_MIN: f64 = HALF_NORMAL_MEAN;

const DOMAIN_SLACK: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub x: f64,
    pub lambda_star: f64,
    pub mu_star: f64,
    /// `R(x) = x²/4 − μ*(x)`
    pub r_half: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConstants {
    pub v_star: f64,
    pub alpha_star: f64,
    pub lambda_at_vstar: f64,
    /// `α* − log 2`, the limit of `(1/n) log P{σ locally optimal}`.
    pub exponent: f64,
}

fn check_domain(x: f64) -> Result<()> {
    if x.is_finite() && x >= X_MIN - DOMAIN_SLACK {
        Ok(())
    } else {
        Err(domain("x", x, "rate function is defined on [sqrt(2/pi), inf)"))
    }
}

/// Root of an increasing function on `[lo, hi]` with `g(lo) ≤ 0 ≤ g(hi)`:
/// Newton steps, falling back to bisection whenever a step leaves the bracket.
fn bracketed_newton<G, D>(g: G, dg: D, mut lo: f64, mut hi: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let value = g(t);
        if value.abs() <= ROOT_TOL {
            return Ok(t);
        }
        if value < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = dg(t);
        let newton = t - value / slope;
        t = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            return Ok(t);
        }
    }
    Err(Error::Numerical(format!(
        "root finding did not converge in [{lo}, {hi}]"
    )))
}

/// The unique `λ ≥ 0` with `λ + φ'(λ) = x`.
pub fn lambda_star(x: f64) -> Result<f64> {
    check_domain(x)?;
    if x <= X_MIN {
        return Ok(0.0);
    }
    // λ + φ'(λ) > λ, so λ = x already overshoots.
    bracketed_newton(
        |l| l + phi_prime(l) - x,
        |l| 1.0 + phi_double_prime(l),
        0.0,
        x,
    )
}

fn legendre_objective(lambda: f64, x: f64) -> f64 {
    lambda * x - 0.5 * lambda * lambda - phi(lambda)
}

/// `μ*(x) = λ*x − λ*²/2 − φ(λ*)` with `λ* = λ*(x)`.
pub fn mu_star(x: f64) -> Result<f64> {
    let lambda = lambda_star(x)?;
    Ok(legendre_objective(lambda, x).max(0.0))
}

/// `R_c(x) = c x²/2 − μ*(x)` for `c ∈ [1/2, 1]`.
pub fn r_c(x: f64, c: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&c) {
        return Err(domain("c", c, "must lie in [1/2, 1]"));
    }
    let mu = mu_star(x)?;
    let r = 0.5 * c * x * x - mu;
    let r_half = 0.25 * x * x - mu;
    debug_assert!(r_half <= r + 1e-15 * r.abs().max(1.0));
    debug_assert!(r <= r_half + (2.0 * c - 1.0) * x * x / 4.0 + 1e-12 * r.abs().max(1.0));
    Ok(r)
}

/// `R(x) = x²/4 − μ*(x)`.
pub fn r_half(x: f64) -> Result<f64> {
    r_c(x, 0.5)
}

pub fn rate_point(x: f64) -> Result<RatePoint> {
    let lambda = lambda_star(x)?;
    let mu = legendre_objective(lambda, x).max(0.0);
    Ok(RatePoint {
        x,
        lambda_star: lambda,
        mu_star: mu,
        r_half: 0.25 * x * x - mu,
    })
}

fn solve_critical_constants() -> Result<CriticalConstants> {
    // f(λ) − λΦ(λ) is strictly decreasing on [0.3, 0.8] and changes sign.
    let lambda = bracketed_newton(
        |l| l * std_normal_cdf(l) - std_normal_pdf(l),
        |l| std_normal_cdf(l) + 2.0 * l * std_normal_pdf(l),
        0.3,
        0.8,
    )?;
    let v_star = 2.0 * lambda;
    let alpha_star = r_half(v_star)?;
    let lambda_at_vstar = lambda_star(v_star)?;
    Ok(CriticalConstants {
        v_star,
        alpha_star,
        lambda_at_vstar,
        exponent: alpha_star - std::f64::consts::LN_2,
    })
}

/// `v*`, `α*` and friends. Computed once per process.
pub fn critical_constants() -> CriticalConstants {
    static CONSTANTS: OnceLock<CriticalConstants> = OnceLock::new();
    *CONSTANTS.get_or_init(|| {
        solve_critical_constants().expect("the stationarity equation has a bracketed root")
    })
}

/// Distance from `v*` below which `θ` is a 0/0 form.
pub const THETA_EXCLUSION: f64 = 1e-6;

/// `θ(x) = (α* − R(x)) / (x − v*)²`.
pub fn theta_ratio(x: f64) -> Result<f64> {
    let cc = critical_constants();
    if (x - cc.v_star).abs() < THETA_EXCLUSION {
        return Err(domain("x", x, "theta is undefined within 1e-6 of v*"));
    }
    let r = r_half(x)?;
    Ok((cc.alpha_star - r) / (x - cc.v_star).powi(2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSample {
    pub x: f64,
    pub finite_difference: f64,
    /// `1 / (1 + φ''(λ*(x)))` from the implicit function theorem.
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub step: f64,
    pub samples: Vec<DerivativeSample>,
    /// Every finite difference lies in `[1 − 1e-3, 20 + 1e-3]`.
    pub within_bounds: bool,
    pub max_analytic_gap: f64,
}

pub const DERIVATIVE_STEP: f64 = 1e-5;

/// Central differences of `λ*` on a grid, checked against `1 ≤ λ*' ≤ 20`.
pub fn lambda_star_derivative_check(x_grid: &[f64]) -> Result<DerivativeReport> {
    let h = DERIVATIVE_STEP;
    let mut samples = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if !(x >= X_MIN + h) {
            return Err(domain("x", x, "derivative check needs x >= sqrt(2/pi) + 1e-5"));
        }
        let fd = (lambda_star(x + h)? - lambda_star(x - h)?) / (2.0 * h);
        let analytic = 1.0 / (1.0 + phi_double_prime(lambda_star(x)?));
        samples.push(DerivativeSample {
            x,
            finite_difference: fd,
            analytic,
        });
    }
    let within_bounds = samples
        .iter()
        .all(|s| (1.0 - 1e-3..=20.0 + 1e-3).contains(&s.finite_difference));
    let max_analytic_gap = samples
        .iter()
        .map(|s| (s.finite_difference - s.analytic).abs())
        .fold(0.0, f64::max);
    Ok(DerivativeReport {
        step: h,
        samples,
        within_bounds,
        max_analytic_gap,
    })
}

/// Uniform grid `start, start + step, ...` up to `stop` inclusive (with a
/// half-step tolerance against rounding).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let count = ((stop - start) / step + 0.5).floor() as usize;
    (0..=count).map(|k| start + k as f64 * step).collect()
}
