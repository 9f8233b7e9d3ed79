//! The invariant suite behind `sk-landscape selfcheck`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    appendix_breakpoints, halfnormal_mgf, phi, std_normal_cdf, std_normal_log_cdf, std_normal_pdf,
    verify_appendix_bound,
};
use crate::landscape::{
    default_grid_step, exp_moment_bounds, halfnormal_sum_density, local_opt_probability,
    log_exp_moment_from_probability,
};
use crate::quadrature::integrate;
use crate::rate::{
    critical_constants, lambda_star_derivative_check, mu_star, r_half, theta_ratio, uniform_grid,
    THETA_EXCLUSION, X_MIN,
};
use crate::rng::{derive_seed, seeded_rng};
use crate::sk::{energy, energy_scale, enumerate_local_optima, local_fields, SkInstance, SpinConfiguration};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Quick => "quick",
            Level::Full => "full",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(Error::InvalidArgument(format!("unknown level '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub level: Level,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SelfCheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type Outcome = Result<(bool, String)>;

fn gaussian_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in -80..=80 {
        let x = k as f64 * 0.1;
        worst = worst.max((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs());
        if x > -8.0 {
            worst = worst.max((std_normal_log_cdf(x) - std_normal_cdf(x).ln()).abs());
        }
        worst = worst.max((phi(x) - (2.0 * std_normal_cdf(x)).ln()).abs());
    }
    let mut mgf_gap: f64 = 0.0;
    for lambda in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let direct = integrate(|x| 2.0 * std_normal_pdf(x) * (lambda * x).exp(), 0.0, 40.0, 1e-13, 0.0)?;
        mgf_gap = mgf_gap.max((halfnormal_mgf(lambda)? / direct.value - 1.0).abs());
    }
    Ok((
        worst < 1e-12 && mgf_gap < 1e-9,
        format!("max identity gap {worst:.3e}, max MGF relative gap {mgf_gap:.3e}"),
    ))
}

fn appendix_bound() -> Outcome {
    let report = verify_appendix_bound(1e-3)?;
    let bp = appendix_breakpoints();
    let interval_ok = (bp.interval_bound - 0.92685).abs() < 5e-4;
    Ok((
        report.holds && interval_ok,
        format!(
            "sup -phi'' = {:.6}, interval bound = {:.5}",
            report.sup_value, bp.interval_bound
        ),
    ))
}

fn critical_constant_check() -> Outcome {
    use std::f64::consts::PI;
    let cc = critical_constants();
    let ok = (cc.v_star / 2.0 - 0.506).abs() <= 1e-3
        && (cc.alpha_star - 0.199).abs() <= 1e-3
        && cc.alpha_star > 1.0 / (2.0 * PI)
        && cc.alpha_star < 2.0 / (3.0 * PI);
    Ok((ok, format!("v*/2 = {:.6}, alpha* = {:.6}", cc.v_star / 2.0, cc.alpha_star)))
}

fn rate_duality() -> Outcome {
    let lambdas = uniform_grid(0.0, 4.0, 1e-3);
    let mut worst: f64 = 0.0;
    for x in [0.9, 1.0, 1.2, 1.5, 2.0, 3.0] {
        let sup = lambdas
            .iter()
            .map(|&l| l * x - 0.5 * l * l - phi(l))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((mu_star(x)? - sup).abs());
    }
    Ok((worst < 1e-5, format!("max |mu* - grid sup| = {worst:.3e}")))
}

fn rate_concavity() -> Outcome {
    let h = 0.01;
    let xs = uniform_grid(X_MIN + h, 3.0, h);
    let mut max_second = f64::NEG_INFINITY;
    for &x in &xs {
        let d2 = r_half(x + h)? - 2.0 * r_half(x)? + r_half(x - h)?;
        max_second = max_second.max(d2 / (h * h));
    }
    Ok((max_second < 0.0, format!("max second difference of R = {max_second:.4}")))
}

fn rate_derivatives() -> Outcome {
    let grid = uniform_grid(X_MIN + 1e-3, 3.0, 0.01);
    let report = lambda_star_derivative_check(&grid)?;
    let v = critical_constants().v_star;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in grid.iter().filter(|&&x| (x - v).abs() >= THETA_EXCLUSION) {
        let t = theta_ratio(x)?;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let theta_ok = lo >= 0.25 && hi <= 10.0;
    Ok((
        report.within_bounds && theta_ok,
        format!(
            "lambda*' within [1, 20]: {}, theta range [{lo:.4}, {hi:.4}]",
            report.within_bounds
        ),
    ))
}

fn flip_identity(triples: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..triples {
        let n = 3 + (k % 30) as usize;
        let inst = SkInstance::sample(n, derive_seed(0x5eed, k))?;
        let mut rng = seeded_rng(derive_seed(0xf11b, k));
        let sigma = SpinConfiguration::random(n, &mut rng);
        let i = (k as usize * 7) % n;
        let fields = local_fields(&inst, &sigma)?;
        let flipped = energy(&inst, &sigma.flipped(i))?;
        let gap = (flipped - (fields.energy + 2.0 * fields.z[i])).abs();
        worst = worst.max(gap / fields.energy.abs().max(1.0));
    }
    Ok((worst < 1e-9, format!("{triples} triples, max relative gap {worst:.3e}")))
}

fn representation(ns: &[usize]) -> Outcome {
    let mut worst: f64 = 0.0;
    for &n in ns {
        let d = halfnormal_sum_density(n, default_grid_step(n))?;
        let conv = d.log_exp_moment()?.log_value;
        let orth = log_exp_moment_from_probability(n)?.log_value;
        worst = worst.max((conv - orth).abs());
    }
    Ok((
        worst < 1e-7,
        format!("n in {}..={}: max log gap {worst:.3e}", ns[0], ns[ns.len() - 1]),
    ))
}

fn chernoff(require_decrease: bool) -> Outcome {
    let ns = [8usize, 32, 128];
    let densities = ns
        .iter()
        .map(|&n| halfnormal_sum_density(n, default_grid_step(n)))
        .collect::<Result<Vec<_>>>()?;
    let mut min_r = f64::INFINITY;
    let mut decreasing = true;
    for x in [1.0, 1.2, 1.5] {
        let r = densities
            .iter()
            .map(|d| d.tail_probability(x).map(|t| t.r_n))
            .collect::<Result<Vec<_>>>()?;
        min_r = r.iter().copied().fold(min_r, f64::min);
        decreasing &= r.windows(2).all(|w| w[1] < w[0]);
    }
    let ok = min_r >= -1e-9 && (decreasing || !require_decrease);
    Ok((ok, format!("min r_n = {min_r:.4e}, decreasing in n: {decreasing}")))
}

fn sandwich() -> Outcome {
    let mut ok = true;
    for n in [4usize, 16, 64, 256] {
        let b = exp_moment_bounds(n)?;
        let e = log_exp_moment_from_probability(n)?.log_value;
        ok &= b.jensen_lower <= e && e <= b.log_sobolev_upper;
    }
    Ok((ok, "n in {4, 16, 64, 256}".into()))
}

fn enumeration_cross_check() -> Outcome {
    let n = 12;
    let instances = 500u64;
    let mut counts = Vec::new();
    let mut energies = Vec::new();
    for k in 0..instances {
        let inst = SkInstance::sample(n, derive_seed(0xe12, k))?;
        let optima = enumerate_local_optima(&inst)?;
        counts.push(optima.count as f64);
        energies.push(optima.energies.iter().map(|h| -h * energy_scale(n)).sum::<f64>());
    }
    let m = instances as f64;
    let mean = counts.iter().sum::<f64>() / m;
    let se = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
    let expected = 2f64.powi(n as i32) * local_opt_probability(n)?.value;
    let ratio = energies.iter().sum::<f64>() / counts.iter().sum::<f64>();
    let resid: Vec<f64> = energies.iter().zip(&counts).map(|(e, c)| e - ratio * c).collect();
    let ratio_se = (resid.iter().map(|r| r * r).sum::<f64>() / (m - 1.0) / m).sqrt() / mean;
    let conditional = halfnormal_sum_density(n, default_grid_step(n))?
        .conditional_energy_mean()?
        .value;
    let ok = (mean - expected).abs() < 3.0 * se && (ratio - conditional).abs() < 3.0 * ratio_se;
    Ok((
        ok,
        format!(
            "mean count {mean:.3} ± {se:.3} vs {expected:.3}; mean energy {ratio:.4} ± {ratio_se:.4} vs {conditional:.4}"
        ),
    ))
}

pub fn run_selfcheck(level: Level) -> SelfCheckReport {
    let full = level == Level::Full;
    let rep_ns: Vec<usize> = if full {
        (3..=64).collect()
    } else {
        vec![3, 4, 8, 16, 32, 64]
    };
    let mut plan: Vec<(&'static str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("gaussian-identities", Box::new(gaussian_identities)),
        ("appendix-bound", Box::new(appendix_bound)),
        ("critical-constants", Box::new(critical_constant_check)),
        ("rate-duality", Box::new(rate_duality)),
        ("rate-concavity", Box::new(rate_concavity)),
        ("rate-derivatives", Box::new(rate_derivatives)),
        ("flip-identity", Box::new(|| flip_identity(10_000))),
        ("representation-equivalence", Box::new(|| representation(&rep_ns))),
        ("chernoff-domination", Box::new(move || chernoff(full))),
        ("sandwich-bounds", Box::new(sandwich)),
    ];
    if full {
        plan.push(("enumeration-cross-check", Box::new(enumeration_cross_check)));
    }
    let checks: Vec<CheckResult> = plan
        .into_iter()
        .map(|(name, check)| match check() {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect();
    SelfCheckReport {
        level,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
