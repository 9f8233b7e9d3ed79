//! Density of `S = |N₁| + … + |Nₙ|` on a uniform grid.
//!
//! A plain FFT convolution carries an absolute error of about `1e-16` times
//! the peak density, which ruins the far tails that the exponential moment
//! is made of. Each convolution power is therefore computed for several
//! exponentially tilted laws `q_θ(x) = f(x − θ)/Φ(θ)`, `x ≥ 0`, whose `n`-fold
//! sums are centred at different points; the density is then read off at
//! every grid point from the tilt under which that point is typical, via
//! `p(s) = Q_θ(s) e^{−θs} M(θ)ⁿ` with `M` the half-normal MGF.
//!
//! The convolution integrals use Gregory end corrections, and the first
//! few outputs (whose integration range spans fewer than 15 cells) are
//! integrated exactly against degree-15 interpolants of both factors.

use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};
use crate::gaussian::{
    log_halfnormal_mgf, phi_double_prime, phi_prime, std_normal_log_cdf, std_normal_log_pdf,
    HALF_NORMAL_MEAN,
};
use crate::quadrature::{gauss_legendre, gregory_end_weights, GREGORY_ORDER};
use crate::rate::{critical_constants, mu_star};

/// Largest grid accepted by [`halfnormal_sum_density`].
pub const MAX_GRID_POINTS: usize = 1 << 26;

const TAIL_SIGMAS: f64 = 12.0;
/// The grid extends at least until `exp(s²/(4(n−1))) p(s)` is this many
/// nats below the Jensen lower bound on its integral.
const MOMENT_CUTOFF_NATS: f64 = 50.0;
const THETA_MIN: f64 = -3.0;
/// Distance between neighbouring tilt centres, in standard deviations.
const TILT_SPACING: f64 = 5.0;
/// Grid points more than this many nats below the peak of every tilted law
/// are at the FFT noise floor and are reported as `−∞`.
const NOISE_NATS: f64 = 25.0;

const HEAD_NODES: usize = 2 * GREGORY_ORDER;
const HEAD_OUTPUTS: usize = 2 * GREGORY_ORDER - 1;
const INTERP_POINTS: usize = 8;
const PARTIAL_CELL_POINTS: usize = 8;

/// `min(0.01·sqrt(n), 0.05)`
pub fn default_grid_step(n: usize) -> f64 {
    (0.01 * (n as f64).sqrt()).min(0.05)
}

/// Right end of the grid: `n·sqrt(2/π) + 12·sqrt(n)`, pushed further out when
/// the integrand of the exponential moment is still significant there.
fn support_end(n: usize) -> Result<f64> {
    let nf = n as f64;
    let mut end = nf * HALF_NORMAL_MEAN + TAIL_SIGMAS * nf.sqrt();
    if n >= 3 {
        let c = 0.25 / (nf - 1.0);
        let jensen = c * (nf + nf * (nf - 1.0) * 2.0 / std::f64::consts::PI);
        let mut s = nf * critical_constants().v_star;
        while c * s * s - nf * mu_star(s / nf)? > jensen - MOMENT_CUTOFF_NATS {
            s += nf.sqrt();
        }
        end = end.max(s);
    }
    Ok(end)
}

fn lagrange_basis(t: f64, nodes: usize, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate().take(nodes) {
        let mut v = 1.0;
        for k in (0..nodes).filter(|&k| k != i) {
            v *= (t - k as f64) / (i as f64 - k as f64);
        }
        *o = v;
    }
}

/// `W[m][i][j] = ∫₀ᵐ ℓᵢ(t) ℓⱼ(m − t) dt` (grid units) for the Lagrange basis
/// on nodes `0..16`. The integrand is a polynomial of degree 30, so the
/// 16-point Gauss rule is exact.
fn head_weights() -> &'static [f64] {
    static WEIGHTS: OnceLock<Vec<f64>> = OnceLock::new();
    WEIGHTS.get_or_init(|| {
        let (x, w) = gauss_legendre(HEAD_NODES);
        let mut out = vec![0.0; HEAD_OUTPUTS * HEAD_NODES * HEAD_NODES];
        let mut li = [0.0; HEAD_NODES];
        let mut lj = [0.0; HEAD_NODES];
        for m in 1..HEAD_OUTPUTS {
            let half = 0.5 * m as f64;
            let block = &mut out[m * HEAD_NODES * HEAD_NODES..(m + 1) * HEAD_NODES * HEAD_NODES];
            for (&xq, &wq) in x.iter().zip(&w) {
                let t = half * (1.0 + xq);
                lagrange_basis(t, HEAD_NODES, &mut li);
                lagrange_basis(m as f64 - t, HEAD_NODES, &mut lj);
                for i in 0..HEAD_NODES {
                    for j in 0..HEAD_NODES {
                        block[i * HEAD_NODES + j] += half * wq * li[i] * lj[j];
                    }
                }
            }
        }
        out
    })
}

/// Discretised `(a ∗ b)(s) = ∫₀ˢ a(y) b(s − y) dy` for functions supported
/// on `[0, ∞)` and sampled on `len` grid points.
struct Convolver {
    len: usize,
    step: f64,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Convolver {
    fn new(len: usize, step: f64) -> Self {
        let size = (2 * len).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            len,
            step,
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    fn spectrum(&self, a: &[f64]) -> Vec<Complex<f64>> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.size];
        for (b, &v) in buf.iter_mut().zip(a) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        buf
    }

    fn convolve(&self, a: &[f64], fa: &[Complex<f64>], b: &[f64], fb: &[Complex<f64>]) -> Vec<f64> {
        let mut prod: Vec<Complex<f64>> = fa.iter().zip(fb).map(|(x, y)| x * y).collect();
        self.inverse.process(&mut prod);
        let scale = 1.0 / self.size as f64;
        let ends = gregory_end_weights(HEAD_OUTPUTS);
        let mut c = vec![0.0; self.len];
        for m in HEAD_OUTPUTS..self.len {
            let mut v = prod[m].re * scale;
            for (k, g) in ends.iter().enumerate() {
                v += (g - 1.0) * (a[k] * b[m - k] + a[m - k] * b[k]);
            }
            c[m] = self.step * v;
        }
        let w = head_weights();
        let nodes = HEAD_NODES.min(self.len);
        for (m, cm) in c.iter_mut().enumerate().take(HEAD_OUTPUTS) {
            let block = &w[m * HEAD_NODES * HEAD_NODES..];
            let mut v = 0.0;
            for i in 0..nodes {
                for j in 0..nodes {
                    v += block[i * HEAD_NODES + j] * a[i] * b[j];
                }
            }
            *cm = self.step * v;
        }
        c
    }

    /// `n`-fold convolution power by binary exponentiation.
    fn power(&self, base: Vec<f64>, n: usize) -> Vec<f64> {
        let mut acc: Option<(Vec<f64>, Vec<Complex<f64>>)> = None;
        let mut p = base;
        let mut fp = self.spectrum(&p);
        let mut k = n;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => (p.clone(), fp.clone()),
                    Some((a, fa)) => {
                        let c = self.convolve(&a, &fa, &p, &fp);
                        let fc = self.spectrum(&c);
                        (c, fc)
                    }
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            p = self.convolve(&p, &fp, &p, &fp);
            fp = self.spectrum(&p);
        }
        acc.expect("n >= 1").0
    }
}

fn tilted_mean(theta: f64) -> f64 {
    theta + phi_prime(theta)
}

fn tilted_variance(theta: f64) -> f64 {
    1.0 + phi_double_prime(theta)
}

/// Tilts whose `n`-fold sums are centred `TILT_SPACING` standard deviations
/// apart, from `THETA_MIN` until the centre passes `n·x_max`.
fn tilts(n: usize, x_max: f64) -> Vec<f64> {
    let mut theta = THETA_MIN;
    let mut out = vec![theta];
    while tilted_mean(theta) < x_max {
        let target = tilted_mean(theta) + TILT_SPACING * (tilted_variance(theta) / n as f64).sqrt();
        // tilted_mean(t) > t, so the root lies in [theta, target].
        let (mut lo, mut hi) = (theta, target);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if tilted_mean(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        theta = 0.5 * (lo + hi);
        out.push(theta);
    }
    out
}

/// `log ∫ p(s) e^{w(s)} ds` and an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogIntegral {
    pub log_value: f64,
    pub log_error: f64,
}

/// The density of `‖N‖₁` for `N` standard normal in dimension `n`, tabulated
/// as `log_density[k] = log p(grid_start + k·grid_step)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub n: usize,
    pub grid_start: f64,
    pub grid_step: f64,
    pub log_density: Vec<f64>,
}

pub fn halfnormal_sum_density(n: usize, grid_step: f64) -> Result<GridDensity> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let max_step = 0.01 * (n as f64).sqrt();
    if !(grid_step > 0.0 && grid_step <= max_step * (1.0 + 1e-12)) {
        return Err(domain("grid_step", grid_step, "must lie in (0, 0.01 sqrt(n)]"));
    }
    let end = support_end(n)?;
    let intervals = (end / grid_step).ceil();
    if intervals + 1.0 > MAX_GRID_POINTS as f64 {
        return Err(Error::Resource(format!(
            "density grid for n = {n} with step {grid_step} needs {intervals} points, limit {MAX_GRID_POINTS}"
        )));
    }
    let len = intervals as usize + 1;
    let s = |k: usize| k as f64 * grid_step;

    if n == 1 {
        let log_density = (0..len)
            .map(|k| std::f64::consts::LN_2 + std_normal_log_pdf(s(k)))
            .collect();
        return Ok(GridDensity {
            n,
            grid_start: 0.0,
            grid_step,
            log_density,
        });
    }

    let conv = Convolver::new(len, grid_step);
    let mut log_density = vec![f64::NEG_INFINITY; len];
    let mut height = vec![f64::NEG_INFINITY; len];
    for theta in tilts(n, s(len - 1) / n as f64) {
        let log_norm = std_normal_log_cdf(theta);
        let base = (0..len)
            .map(|k| (std_normal_log_pdf(s(k) - theta) - log_norm).exp())
            .collect();
        let q = conv.power(base, n);
        let log_peak = q.iter().copied().fold(0.0, f64::max).ln();
        let shift = n as f64 * log_halfnormal_mgf(theta);
        for (k, &qk) in q.iter().enumerate() {
            if qk <= 0.0 {
                continue;
            }
            let lq = qk.ln();
            if lq - log_peak > height[k] {
                height[k] = lq - log_peak;
                log_density[k] = lq - theta * s(k) + shift;
            }
        }
    }
    for (ld, h) in log_density.iter_mut().zip(&height) {
        if *h < -NOISE_NATS {
            *ld = f64::NEG_INFINITY;
        }
    }
    Ok(GridDensity {
        n,
        grid_start: 0.0,
        grid_step,
        log_density,
    })
}

fn log_sum_exp(terms: &[(f64, f64)]) -> f64 {
    let m = terms
        .iter()
        .map(|t| t.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|&(v, w)| w * (v - m).exp()).sum::<f64>().ln()
}

impl GridDensity {
    pub fn len(&self) -> usize {
        self.log_density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_density.is_empty()
    }

    pub fn abscissa(&self, k: usize) -> f64 {
        self.grid_start + k as f64 * self.grid_step
    }

    /// Last grid point; the density is treated as zero beyond it.
    pub fn end(&self) -> f64 {
        self.abscissa(self.len() - 1)
    }

    /// `log p(s)` between grid points, by 8-point Lagrange interpolation of
    /// the density (or of its logarithm where it varies over many orders of
    /// magnitude).
    pub fn log_density_at(&self, s: f64) -> f64 {
        if s < self.grid_start || s > self.end() {
            return f64::NEG_INFINITY;
        }
        let t = (s - self.grid_start) / self.grid_step;
        let order = INTERP_POINTS.min(self.len());
        let first = (t.floor() as isize - (order as isize / 2 - 1)).clamp(0, (self.len() - order) as isize) as usize;
        let vals = &self.log_density[first..first + order];
        let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        let mut basis = [0.0; INTERP_POINTS];
        lagrange_basis(t - first as f64, order, &mut basis);
        let linear = vals.iter().any(|&v| v < m - 30.0);
        if linear {
            let p: f64 = vals.iter().zip(&basis).map(|(v, b)| b * (v - m).exp()).sum();
            if p > 0.0 {
                m + p.ln()
            } else {
                f64::NEG_INFINITY
            }
        } else {
            vals.iter().zip(&basis).map(|(v, b)| b * v).sum()
        }
    }

    fn partial_cell<F: Fn(f64) -> f64>(&self, log_weight: &F, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
        let (x, w) = RULE.get_or_init(|| gauss_legendre(PARTIAL_CELL_POINTS));
        let half = 0.5 * (b - a);
        for (&xq, &wq) in x.iter().zip(w) {
            let s = a + half * (1.0 + xq);
            out.push((self.log_density_at(s) + log_weight(s), half * wq));
        }
    }

    /// `log ∫_lo^hi p(s) e^{w(s)} ds` with `w = log_weight`. The error is the
    /// change when the Gregory end corrections drop from order 8 to order 4,
    /// plus a rounding floor.
    pub(crate) fn log_integral<F: Fn(f64) -> f64>(&self, log_weight: F, lo: f64, hi: f64) -> LogIntegral {
        let h = self.grid_step;
        let lo = lo.max(self.grid_start);
        let hi = hi.min(self.end());
        if hi <= lo {
            return LogIntegral {
                log_value: f64::NEG_INFINITY,
                log_error: 0.0,
            };
        }
        let snap = |t: f64| if (t - t.round()).abs() < 1e-9 { t.round() } else { t };
        let a = snap((lo - self.grid_start) / h);
        let b = snap((hi - self.grid_start) / h);
        let k_lo = a.ceil() as usize;
        let k_hi = b.floor() as usize;

        let mut terms = Vec::new();
        let mut low_order = Vec::new();
        if k_lo > k_hi {
            self.partial_cell(&log_weight, lo, hi, &mut terms);
            low_order.clone_from(&terms);
        } else {
            if a < k_lo as f64 {
                self.partial_cell(&log_weight, lo, self.abscissa(k_lo), &mut terms);
            }
            if b > k_hi as f64 {
                self.partial_cell(&log_weight, self.abscissa(k_hi), hi, &mut terms);
            }
            low_order.clone_from(&terms);
            let m = k_hi - k_lo;
            if m > 0 {
                let ends = gregory_end_weights(m);
                let ends4 = gregory_end_weights(m.min(7));
                for k in k_lo..=k_hi {
                    let from_end = (k - k_lo).min(k_hi - k);
                    let v = self.log_density[k] + log_weight(self.abscissa(k));
                    terms.push((v, h * ends.get(from_end).copied().unwrap_or(1.0)));
                    low_order.push((v, h * ends4.get(from_end).copied().unwrap_or(1.0)));
                }
            }
        }
        let log_value = log_sum_exp(&terms);
        let log_error = if log_value.is_finite() {
            // Floor for rounding in the weighted sum.
            (log_sum_exp(&low_order) - log_value).abs() + f64::EPSILON * (terms.len() as f64).sqrt()
        } else {
            0.0
        };
        LogIntegral {
            log_value,
            log_error,
        }
    }

    /// `log ∫ p`, zero up to discretisation error.
    pub fn log_mass(&self) -> f64 {
        self.log_integral(|_| 0.0, self.grid_start, self.end()).log_value
    }

    pub fn mean(&self) -> f64 {
        let first = self.log_integral(f64::ln, self.grid_start, self.end()).log_value;
        (first - self.log_mass()).exp()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let second = self
            .log_integral(|s| 2.0 * (s - mean).abs().ln(), self.grid_start, self.end())
            .log_value;
        (second - self.log_mass()).exp()
    }

    /// `log P{S ≥ s}`.
    pub fn log_tail(&self, s: f64) -> f64 {
        self.log_integral(|_| 0.0, s, self.end()).log_value
    }
}
