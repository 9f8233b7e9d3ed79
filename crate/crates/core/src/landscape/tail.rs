use serde::Serialize;

use super::density::{default_grid_step, halfnormal_sum_density, GridDensity};
use super::{EstimateWithError, Method};
use crate::error::Result;
use crate::rate::mu_star;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    pub n: usize,
    pub x: f64,
    /// `log P{‖N‖₁ ≥ nx}`
    pub log_tail: EstimateWithError,
    pub mu_star: f64,
    /// `−log_tail/n − μ*(x)`, nonnegative by the Chernoff bound.
    pub r_n: f64,
}

pub fn tail_probability(n: usize, x: f64) -> Result<TailReport> {
    mu_star(x)?;
    halfnormal_sum_density(n, default_grid_step(n))?.tail_probability(x)
}

impl GridDensity {
    pub fn tail_probability(&self, x: f64) -> Result<TailReport> {
        let mu = mu_star(x)?;
        let nf = self.n as f64;
        let tail = self.log_integral(|_| 0.0, nf * x, self.end());
        let log_error = tail.log_error + self.log_mass().abs();
        Ok(TailReport {
            n: self.n,
            x,
            log_tail: EstimateWithError::from_log(tail.log_value, log_error, Method::Convolution),
            mu_star: mu,
            r_n: -tail.log_value / nf - mu,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{std_normal_cdf, HALF_NORMAL_MEAN};

    #[test]
    fn one_half_normal() {
        let t = tail_probability(1, 1.0).unwrap();
        let exact = 2.0 * (1.0 - std_normal_cdf(1.0));
        assert!((t.log_tail.value - exact).abs() < 1e-8);
        assert!((t.log_tail.value - 0.3173).abs() < 1e-4);
        assert!(t.r_n >= 0.0);
    }

    #[test]
    fn central_limit_at_the_mean() {
        let t = tail_probability(256, HALF_NORMAL_MEAN).unwrap();
        assert!((t.log_tail.value - 0.5).abs() < 0.01, "{}", t.log_tail.value);
        assert!(t.mu_star.abs() < 1e-12);
        assert!(t.r_n >= 0.0);
    }

    #[test]
    fn chernoff_domination_and_decay() {
        for x in [1.0, 1.2, 1.5] {
            let r: Vec<f64> = [8usize, 32, 128]
                .iter()
                .map(|&n| tail_probability(n, x).unwrap().r_n)
                .collect();
            assert!(r.iter().all(|&v| v >= -1e-9), "x = {x}: {r:?}");
            assert!(r[0] > r[1] && r[1] > r[2], "x = {x}: {r:?}");
        }
    }

    #[test]
    fn domain() {
        assert!(tail_probability(4, 0.5).is_err());
        assert!(tail_probability(0, 1.0).is_err());
    }
}
