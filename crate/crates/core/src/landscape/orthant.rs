use serde::Serialize;

use super::{EstimateWithError, Method};
use crate::error::{Error, Result};
use crate::gaussian::{phi_double_prime, phi_prime, std_normal_log_cdf, std_normal_log_pdf};
use crate::quadrature::integrate;
use crate::rate::critical_constants;

/// Nats below the peak at which the integrand is cut off.
const CUTOFF_NATS: f64 = 45.0;
const REL_TOL: f64 = 1e-12;

/// `log f(g) + n log Φ(g/s)` with `s = sqrt(n−2)`, its first and second
/// derivatives.
struct LogIntegrand {
    n: f64,
    s: f64,
}

impl LogIntegrand {
    fn value(&self, g: f64) -> f64 {
        std_normal_log_pdf(g) + self.n * std_normal_log_cdf(g / self.s)
    }

    // d/dt log Φ(t) = φ'(t) since φ = log 2Φ.
    fn slope(&self, g: f64) -> f64 {
        -g + self.n / self.s * phi_prime(g / self.s)
    }

    fn curvature(&self, g: f64) -> f64 {
        -1.0 + self.n / (self.s * self.s) * phi_double_prime(g / self.s)
    }
}

/// The log-integrand is concave, so its slope has a single root in
/// `[0, 0.8·n/s + 1]` (φ' ≤ sqrt(2/π) on the positive axis).
fn mode(li: &LogIntegrand) -> f64 {
    let mut lo = 0.0;
    let mut hi = 0.8 * li.n / li.s + 1.0;
    let mut g = 0.5 * (lo + hi);
    for _ in 0..200 {
        let d = li.slope(g);
        if d > 0.0 {
            lo = g;
        } else {
            hi = g;
        }
        let step = g - d / li.curvature(g);
        g = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-14 * hi.max(1.0) || d.abs() < 1e-14 {
            break;
        }
    }
    g
}

/// Walk away from the mode in steps of `width` until the log-integrand has
/// dropped `CUTOFF_NATS` below the peak.
fn cutoff(li: &LogIntegrand, from: f64, peak: f64, width: f64, direction: f64) -> f64 {
    let mut g = from;
    loop {
        g += direction * width;
        if li.value(g) < peak - CUTOFF_NATS {
            return g;
        }
    }
}

/// `P{σ locally optimal} = ∫ f(g) Φ(g/sqrt(n−2))ⁿ dg`, the same for every `σ`.
///
/// The integrand is evaluated as `exp(ℓ(g) − ℓ(g*))` around its mode `g*`
/// and integrated between the points where it has fallen `e^{-45}` below
/// the peak, so `log_value` is accurate long after `value` underflows.
pub fn local_opt_probability(n: usize) -> Result<EstimateWithError> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "local optimality needs n >= 2, got {n}"
        )));
    }
    if n == 2 {
        return Ok(EstimateWithError::from_value(0.5, 0.0, Method::OrthantQuadrature));
    }
    let li = LogIntegrand {
        n: n as f64,
        s: ((n - 2) as f64).sqrt(),
    };
    let g0 = mode(&li);
    let peak = li.value(g0);
    let width = 1.0 / (-li.curvature(g0)).sqrt();
    let lo = cutoff(&li, g0, peak, width, -1.0);
    let hi = cutoff(&li, g0, peak, width, 1.0);
    // Rounding in n·log Φ limits the attainable accuracy for very large n.
    let rel_tol = REL_TOL.max(16.0 * f64::EPSILON * li.n);
    let integral = integrate(|g| (li.value(g) - peak).exp(), lo, hi, rel_tol, 0.0)?;
    // Mass outside [lo, hi] is at most e^{-45} times a few widths by concavity.
    let truncation = 2.0 * width * (-CUTOFF_NATS).exp();
    let log_error = (integral.error + truncation) / integral.value;
    Ok(EstimateWithError::from_log(
        peak + integral.value.ln(),
        log_error,
        Method::OrthantQuadrature,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedCount {
    pub n: usize,
    /// `log E[#local minima] = n log 2 + log P{σ locally optimal}`
    pub log_count: f64,
    /// `log_count / n − α*`
    pub exponent_residual: f64,
}

pub fn expected_count(n: usize) -> Result<ExpectedCount> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "expected count is computed for n >= 3, got {n}"
        )));
    }
    let p = local_opt_probability(n)?;
    let log_count = n as f64 * std::f64::consts::LN_2 + p.log_value;
    Ok(ExpectedCount {
        n,
        log_count,
        exponent_residual: log_count / n as f64 - critical_constants().alpha_star,
    })
}
