use rayon::prelude::*;
use sk_landscape::landscape::{
    default_grid_step, exp_moment, expected_count, halfnormal_sum_density, local_opt_probability,
    mc_local_opt_probability, EstimateWithError, MomentMethod,
};
use sk_landscape::rate::{critical_constants, rate_point, theta_ratio, uniform_grid, THETA_EXCLUSION, X_MIN};
use sk_landscape::rng::{derive_seed, seeded_rng};
use sk_landscape::selfcheck::{run_selfcheck, Level as CheckLevel};
use sk_landscape::sk::{
    energy_scale, enumerate_local_optima, greedy_descent, DescentRule, SkInstance, SpinConfiguration,
    MAX_ENUMERATION_SPINS,
};

use crate::cli::{Command, Level, ProbMethod};
use crate::error::CliError;
use crate::output::{Cell, Payload, Table};

/// Budget on `n² · replicas` for `simulate`.
const SIMULATION_BUDGET: f64 = 1e11;
/// Budget on `2ⁿ · n · instances` for brute-force probabilities.
const ENUMERATION_BUDGET: f64 = 1e12;

pub struct Outcome {
    pub payload: Payload,
    /// Set when the run completed but a check it performs did not pass.
    pub failure: Option<String>,
}

impl Outcome {
    fn table(t: Table) -> Self {
        Outcome {
            payload: Payload::Table(t),
            failure: None,
        }
    }
}

/// Parse `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Config(format!("grid '{text}' is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse::<f64>().map_err(|_| bad())?;
    }
    let [start, stop, step] = v;
    if !(start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite() && stop >= start) {
        return Err(CliError::Config(format!(
            "grid '{text}' needs finite start <= stop and a positive step"
        )));
    }
    Ok(uniform_grid(start, stop, step))
}

fn constants() -> Outcome {
    use std::f64::consts::{LN_2, PI};
    let cc = critical_constants();
    let (low, high) = (1.0 / (2.0 * PI), 2.0 / (3.0 * PI));
    let ok = cc.alpha_star > low && cc.alpha_star < high;
    let mut t = Table::new(&[
        "v_star",
        "half_v_star",
        "alpha_star",
        "alpha_star_minus_log2",
        "lambda_at_vstar",
        "bracket_low",
        "bracket_high",
        "bracket_ok",
    ]);
    t.push(vec![
        cc.v_star.into(),
        (cc.v_star / 2.0).into(),
        cc.alpha_star.into(),
        (cc.alpha_star - LN_2).into(),
        cc.lambda_at_vstar.into(),
        low.into(),
        high.into(),
        ok.into(),
    ]);
    Outcome {
        payload: Payload::Table(t),
        failure: (!ok).then(|| format!("alpha* = {} outside ({low}, {high})", cc.alpha_star)),
    }
}

fn rate_table(x_grid: &str) -> Result<Outcome, CliError> {
    let v_star = critical_constants().v_star;
    let mut t = Table::new(&["x", "lambda_star", "mu_star", "R", "theta_ratio"]);
    for x in parse_grid(x_grid)? {
        if x < X_MIN {
            return Err(CliError::Config(format!("x = {x} is below sqrt(2/pi)")));
        }
        let p = rate_point(x)?;
        let theta = if (x - v_star).abs() < THETA_EXCLUSION {
            None
        } else {
            Some(theta_ratio(x)?)
        };
        t.push(vec![
            x.into(),
            p.lambda_star.into(),
            p.mu_star.into(),
            p.r_half.into(),
            Cell::opt_float(theta),
        ]);
    }
    Ok(Outcome::table(t))
}

struct ProbRow {
    value: f64,
    log_value: f64,
    error: f64,
    log_error: f64,
    n_samples: Option<u64>,
}

impl From<EstimateWithError> for ProbRow {
    fn from(e: EstimateWithError) -> Self {
        ProbRow {
            value: e.value,
            log_value: e.log_value,
            error: e.error,
            log_error: e.log_error,
            n_samples: e.n_samples,
        }
    }
}

/// `log P = log E − n log 2 − ½ log((2n−2)/(n−2))`.
fn probability_from_moment(n: usize, moment: EstimateWithError) -> ProbRow {
    let nf = n as f64;
    let log_value =
        moment.log_value - nf * std::f64::consts::LN_2 - 0.5 * ((2.0 * nf - 2.0) / (nf - 2.0)).ln();
    let value = log_value.exp();
    ProbRow {
        value,
        log_value,
        error: value * moment.log_error,
        log_error: moment.log_error,
        n_samples: moment.n_samples,
    }
}

fn brute_force_probability(n: usize, instances: u64, seed: u64) -> Result<ProbRow, CliError> {
    if n > MAX_ENUMERATION_SPINS {
        return Err(CliError::Resource(format!(
            "brute force is limited to n <= {MAX_ENUMERATION_SPINS}"
        )));
    }
    if instances < 2 {
        return Err(CliError::Config("brute force needs at least 2 instances".into()));
    }
    if 2f64.powi(n as i32) * n as f64 * instances as f64 > ENUMERATION_BUDGET {
        return Err(CliError::Resource(format!(
            "{instances} exhaustive searches at n = {n} exceed the budget"
        )));
    }
    let (sum, sum_sq) = (0..instances)
        .into_par_iter()
        .map(|k| {
            let inst = SkInstance::sample(n, derive_seed(seed, k))?;
            let c = enumerate_local_optima(&inst)?.count;
            Ok((c as u128, (c as u128) * (c as u128)))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
        .map_err(|e: sk_landscape::Error| CliError::from(e))?;
    let m = instances as f64;
    let mean = sum as f64 / m;
    let var = (sum_sq as f64 - m * mean * mean) / (m - 1.0);
    let scale = 2f64.powi(-(n as i32));
    let value = mean * scale;
    let error = (var.max(0.0) / m).sqrt() * scale;
    Ok(ProbRow {
        value,
        log_value: value.ln(),
        error,
        log_error: error / value,
        n_samples: Some(instances),
    })
}

fn prob(ns: &[usize], method: ProbMethod, samples: u64, seed: u64) -> Result<Outcome, CliError> {
    let mut t = Table::new(&["n", "method", "value", "log_value", "error", "log_error", "n_samples"]);
    for &n in ns {
        let (name, row): (&str, ProbRow) = match method {
            ProbMethod::OrthantQuadrature => ("orthant-quadrature", local_opt_probability(n)?.into()),
            ProbMethod::NaiveMc => ("naive-mc", mc_local_opt_probability(n, samples, seed)?.into()),
            ProbMethod::Convolution => (
                "convolution",
                probability_from_moment(n, exp_moment(n, MomentMethod::Convolution)?),
            ),
            ProbMethod::TiltedMc => (
                "tilted-mc",
                probability_from_moment(n, exp_moment(n, MomentMethod::TiltedMc { samples, seed })?),
            ),
            ProbMethod::BruteForce => ("brute-force", brute_force_probability(n, samples, seed)?),
        };
        t.push(vec![
            n.into(),
            name.into(),
            row.value.into(),
            row.log_value.into(),
            row.error.into(),
            row.log_error.into(),
            row.n_samples.map_or(Cell::Empty, Cell::from),
        ]);
    }
    Ok(Outcome::table(t))
}

fn exponent(ns: &[usize]) -> Result<Outcome, CliError> {
    let mut t = Table::new(&["n", "log_count_over_n", "residual"]);
    for &n in ns {
        let c = expected_count(n)?;
        t.push(vec![n.into(), (c.log_count / n as f64).into(), c.exponent_residual.into()]);
    }
    Ok(Outcome::table(t))
}

fn tail(ns: &[usize], x_grid: &str) -> Result<Outcome, CliError> {
    let xs = parse_grid(x_grid)?;
    if let Some(x) = xs.iter().find(|&&x| x < X_MIN) {
        return Err(CliError::Config(format!("x = {x} is below sqrt(2/pi)")));
    }
    let mut t = Table::new(&["n", "x", "log_tail", "log_tail_error", "mu_star", "r_n"]);
    for &n in ns {
        let d = halfnormal_sum_density(n, default_grid_step(n))?;
        for &x in &xs {
            let r = d.tail_probability(x)?;
            t.push(vec![
                n.into(),
                x.into(),
                r.log_tail.log_value.into(),
                r.log_tail.log_error.into(),
                r.mu_star.into(),
                r.r_n.into(),
            ]);
        }
    }
    Ok(Outcome::table(t))
}

fn conditional(n: usize, delta_grid: &str) -> Result<Outcome, CliError> {
    let deltas = parse_grid(delta_grid)?;
    if let Some(d) = deltas.iter().find(|&&d| d < 0.0) {
        return Err(CliError::Config(format!("delta = {d} is negative")));
    }
    if n < 3 {
        return Err(CliError::Config(format!("conditional law needs n >= 3, got {n}")));
    }
    let density = halfnormal_sum_density(n, default_grid_step(n))?;
    let mean = density.conditional_energy_mean()?.value;
    let mut t = Table::new(&["n", "delta", "tail", "tail_error", "mean_energy"]);
    for delta in deltas {
        let e = density.conditional_energy_tail(delta)?;
        t.push(vec![n.into(), delta.into(), e.value.into(), e.error.into(), mean.into()]);
    }
    Ok(Outcome::table(t))
}

/// Replica `r` uses instance seed `derive_seed(rs, 0)`, start seed
/// `derive_seed(rs, 1)` and descent seed `derive_seed(rs, 2)` with
/// `rs = derive_seed(seed, r)`.
fn simulate(n: usize, replicas: u64, rule: DescentRule, seed: u64) -> Result<Outcome, CliError> {
    if n < 2 {
        return Err(CliError::Config(format!("simulation needs n >= 2, got {n}")));
    }
    if (n as f64).powi(2) * replicas as f64 > SIMULATION_BUDGET {
        return Err(CliError::Resource(format!(
            "{replicas} replicas at n = {n} exceed the simulation budget"
        )));
    }
    let rows = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let rs = derive_seed(seed, r);
            let inst = SkInstance::sample(n, derive_seed(rs, 0))?;
            let start = SpinConfiguration::random(n, &mut seeded_rng(derive_seed(rs, 1)));
            let trace = greedy_descent(&inst, &start, rule, derive_seed(rs, 2))?;
            Ok(vec![
                seed.into(),
                r.into(),
                rule.as_str().into(),
                trace.flips.len().into(),
                trace.final_energy().into(),
                trace.normalized_energy.into(),
            ])
        })
        .collect::<Result<Vec<_>, sk_landscape::Error>>()?;
    let mut t = Table::new(&["seed", "replica", "rule", "flips", "final_energy", "normalized_energy"]);
    rows.into_iter().for_each(|row| t.push(row));
    Ok(Outcome::table(t))
}

/// One row per local minimum; instance `k` is seeded with
/// `derive_seed(seed, k)`, which is the value in the `seed` column.
fn enumerate(n: usize, instances: u64, seed: u64) -> Result<Outcome, CliError> {
    if n > MAX_ENUMERATION_SPINS {
        return Err(CliError::Resource(format!(
            "enumeration is limited to n <= {MAX_ENUMERATION_SPINS}, got {n}"
        )));
    }
    let per_instance = (0..instances)
        .into_par_iter()
        .map(|k| {
            let s = derive_seed(seed, k);
            let inst = SkInstance::sample(n, s)?;
            let optima = enumerate_local_optima(&inst)?;
            Ok((s, optima))
        })
        .collect::<Result<Vec<_>, sk_landscape::Error>>()?;
    let mut t = Table::new(&["seed", "count", "normalized_energy"]);
    for (s, optima) in per_instance {
        for h in &optima.energies {
            t.push(vec![s.into(), optima.count.into(), (h * energy_scale(n)).into()]);
        }
    }
    Ok(Outcome::table(t))
}

fn selfcheck(level: Level) -> Outcome {
    let report = run_selfcheck(match level {
        Level::Quick => CheckLevel::Quick,
        Level::Full => CheckLevel::Full,
    });
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    Outcome {
        payload: Payload::Json(json),
        failure: (!failed.is_empty()).then(|| failed.join(", ")),
    }
}

pub fn run(command: &Command, seed: u64) -> Result<Outcome, CliError> {
    match command {
        Command::Constants => Ok(constants()),
        Command::RateTable { x_grid } => rate_table(x_grid),
        Command::Prob { sizes, method, samples } => prob(&sizes.values(), *method, *samples, seed),
        Command::Exponent { sizes } => exponent(&sizes.values()),
        Command::Tail { sizes, x_grid } => tail(&sizes.values(), x_grid),
        Command::Conditional { n, delta_grid } => conditional(*n, delta_grid),
        Command::Simulate { n, replicas, rule } => simulate(*n, *replicas, *rule, seed),
        Command::Enumerate { n, replicas } => enumerate(*n, *replicas, seed),
        Command::Selfcheck { level } => Ok(selfcheck(*level)),
    }
}
