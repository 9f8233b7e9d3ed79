//! Acceptance criteria. Each prints one line; the test fails if any is red.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use sk_landscape::gaussian::{appendix_breakpoints, halfnormal_mgf, std_normal_pdf, verify_appendix_bound};
use sk_landscape::landscape::{
    default_grid_step, exp_moment, exp_moment_bounds, expected_count, halfnormal_sum_density,
    local_opt_probability, log_exp_moment_from_probability, mc_local_opt_probability, MomentMethod,
};
use sk_landscape::quadrature::integrate;
use sk_landscape::rate::{
    critical_constants, lambda_star_derivative_check, theta_ratio, uniform_grid, THETA_EXCLUSION, X_MIN,
};
use sk_landscape::rng::{derive_seed, seeded_rng};
use sk_landscape::sk::{
    energy, energy_scale, enumerate_local_optima, greedy_descent, local_fields, DescentRule, SkInstance,
    SpinConfiguration,
};

const BIN: &str = env!("CARGO_BIN_EXE_sk-landscape");

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn criterion_1() -> Verdict {
    use std::f64::consts::PI;
    let out = cli(&["constants", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).expect("constants emits json");
    let half = v["half_v_star"].as_f64().unwrap();
    let alpha = v["alpha_star"].as_f64().unwrap();
    let ok = out.status.success()
        && (half - 0.506).abs() <= 0.001
        && (alpha - 0.199).abs() <= 0.001
        && alpha > 1.0 / (2.0 * PI)
        && alpha < 2.0 / (3.0 * PI);
    verdict(ok, format!("v*/2 = {half:.6}, alpha* = {alpha:.6}"))
}

fn criterion_2() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, seed) in [(3usize, 11u64), (8, 12), (15, 13)] {
        let exact = local_opt_probability(n).unwrap().value;
        let mc = mc_local_opt_probability(n, 1_000_000, seed).unwrap();
        let z = (mc.value - exact) / mc.error;
        ok &= z.abs() < 3.0;
        parts.push(format!("n={n}: {exact:.6} vs {:.6} (z = {z:+.2})", mc.value));
    }
    let p3 = local_opt_probability(3).unwrap().value;
    ok &= (p3 - 0.25).abs() < 1e-9;
    parts.push(format!("|P(3) - 1/4| = {:.1e}", (p3 - 0.25).abs()));
    verdict(ok, parts.join("; "))
}

fn criterion_3() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in 3..=64 {
        let conv = exp_moment(n, MomentMethod::Convolution).unwrap().log_value;
        let orth = log_exp_moment_from_probability(n).unwrap().log_value;
        worst = worst.max((conv - orth).abs());
    }
    verdict(worst < 1e-7, format!("n = 3..64, max log gap {worst:.2e}"))
}

fn criterion_4() -> Verdict {
    let r: Vec<f64> = [16usize, 64, 1024]
        .iter()
        .map(|&n| expected_count(n).unwrap().exponent_residual.abs())
        .collect();
    verdict(
        r[2] < 0.02 && r[2] < r[1] && r[1] < r[0],
        format!("|residual| at 16, 64, 1024: {:.3e}, {:.3e}, {:.3e}", r[0], r[1], r[2]),
    )
}

fn criterion_5() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 16, 64, 256] {
        let b = exp_moment_bounds(n).unwrap();
        let e = exp_moment(n, MomentMethod::Convolution).unwrap().log_value;
        ok &= b.jensen_lower <= e && e <= b.log_sobolev_upper;
        parts.push(format!("n={n}: {:.4} <= {e:.4} <= {:.4}", b.jensen_lower, b.log_sobolev_upper));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_6() -> Verdict {
    let ns = [8usize, 32, 128];
    let densities: Vec<_> = ns
        .iter()
        .map(|&n| halfnormal_sum_density(n, default_grid_step(n)).unwrap())
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for x in [1.0, 1.2, 1.5] {
        let r: Vec<f64> = densities.iter().map(|d| d.tail_probability(x).unwrap().r_n).collect();
        ok &= r.iter().all(|&v| v >= 0.0) && r[0] > r[1] && r[1] > r[2];
        parts.push(format!("x={x}: r_n = {:.4}, {:.4}, {:.4}", r[0], r[1], r[2]));
    }
    verdict(ok, parts.join("; "))
}

fn criterion_7() -> Verdict {
    let half = critical_constants().v_star / 2.0;
    let d = halfnormal_sum_density(1024, default_grid_step(1024)).unwrap();
    let above = d.conditional_energy_tail(half + 0.05).unwrap().value;
    let below = d.conditional_energy_tail(half - 0.05).unwrap().value;
    let mean = d.conditional_energy_mean().unwrap().value;
    verdict(
        above <= 0.01 && below >= 0.99 && (mean - half).abs() < 0.02,
        format!("tail(v*/2+0.05) = {above:.3e}, tail(v*/2-0.05) = {below:.6}, mean = {mean:.5}"),
    )
}

fn criterion_8() -> Verdict {
    let n = 12;
    let instances = 500u64;
    let mut counts = Vec::new();
    let mut energies = Vec::new();
    let mut endpoints_ok = true;
    let mut rng = seeded_rng(808);
    for k in 0..instances {
        let inst = SkInstance::sample(n, derive_seed(8, k)).unwrap();
        let optima = enumerate_local_optima(&inst).unwrap();
        counts.push(optima.count as f64);
        energies.push(optima.energies.iter().map(|h| -h * energy_scale(n)).sum::<f64>());
        for rule in DescentRule::ALL {
            let start = SpinConfiguration::random(n, &mut rng);
            let trace = greedy_descent(&inst, &start, rule, k).unwrap();
            endpoints_ok &= optima.contains(&trace.final_state);
        }
    }
    let m = instances as f64;
    let mean = counts.iter().sum::<f64>() / m;
    let se = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
    let expected = 2f64.powi(n as i32) * local_opt_probability(n).unwrap().value;
    let count_ok = (mean - expected).abs() < 3.0 * se;

    let ratio = energies.iter().sum::<f64>() / counts.iter().sum::<f64>();
    let resid: Vec<f64> = energies.iter().zip(&counts).map(|(e, c)| e - ratio * c).collect();
    let ratio_se = (resid.iter().map(|r| r * r).sum::<f64>() / (m - 1.0) / m).sqrt() / mean;
    let conditional = halfnormal_sum_density(n, default_grid_step(n))
        .unwrap()
        .conditional_energy_mean()
        .unwrap()
        .value;
    let energy_ok = (ratio - conditional).abs() < 3.0 * ratio_se;
    verdict(
        count_ok && energy_ok && endpoints_ok,
        format!(
            "(a) count {mean:.3} ± {se:.3} vs {expected:.3}; (b) energy {ratio:.4} ± {ratio_se:.4} vs {conditional:.4}; (c) endpoints enumerated: {endpoints_ok}"
        ),
    )
}

fn criterion_9() -> Verdict {
    let appendix = verify_appendix_bound(1e-3).unwrap();
    let interval = appendix_breakpoints().interval_bound;
    let appendix_ok = appendix.sup_value < 0.95 && (interval - 0.92685).abs() < 5e-4;

    let mut mgf_gap: f64 = 0.0;
    for lambda in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let direct = integrate(|x| 2.0 * std_normal_pdf(x) * (lambda * x).exp(), 0.0, 45.0, 1e-13, 0.0)
            .unwrap()
            .value;
        mgf_gap = mgf_gap.max((halfnormal_mgf(lambda).unwrap() / direct - 1.0).abs());
    }

    let grid = uniform_grid(X_MIN + 1e-3, 4.0, 0.01);
    let deriv = lambda_star_derivative_check(&grid).unwrap();
    let v_star = critical_constants().v_star;
    let thetas: Vec<f64> = grid
        .iter()
        .filter(|&&x| (x - v_star).abs() >= THETA_EXCLUSION)
        .map(|&x| theta_ratio(x).unwrap())
        .collect();
    let theta_ok = thetas.iter().all(|t| (0.25..=10.0).contains(t));

    let mut flip_gap: f64 = 0.0;
    for k in 0..10_000u64 {
        let n = 3 + (k % 40) as usize;
        let inst = SkInstance::sample(n, derive_seed(99, k)).unwrap();
        let sigma = SpinConfiguration::random(n, &mut seeded_rng(derive_seed(100, k)));
        let i = (k as usize) % n;
        let f = local_fields(&inst, &sigma).unwrap();
        let flipped = energy(&inst, &sigma.flipped(i)).unwrap();
        flip_gap = flip_gap.max((flipped - f.energy - 2.0 * f.z[i]).abs());
    }

    verdict(
        appendix_ok && mgf_gap < 1e-9 && deriv.within_bounds && theta_ok && flip_gap < 1e-9,
        format!(
            "sup = {:.5}, interval = {interval:.5}, MGF gap {mgf_gap:.1e}, lambda*' in [1,20]: {}, theta in [1/4,10]: {theta_ok}, flip gap {flip_gap:.1e}",
            appendix.sup_value, deriv.within_bounds
        ),
    )
}

fn run_to(dir: &Path, name: &str, threads: &str, args: &[&str]) -> (bool, Vec<u8>, Vec<u8>) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap();
    full.extend(["--threads", threads, "--no-timestamp", "--output", out_str]);
    let status = cli(&full).status.success();
    let body = std::fs::read(&out).unwrap_or_default();
    let manifest = std::fs::read(dir.join(format!("{name}.manifest.json"))).unwrap_or_default();
    (status, body, manifest)
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let invocations: [&[&str]; 6] = [
        &["simulate", "--n", "200", "--replicas", "1000", "--rule", "steepest", "--seed", "7"],
        &["simulate", "--n", "60", "--replicas", "300", "--rule", "random-improvement", "--seed", "3"],
        &["enumerate", "--n", "14", "--replicas", "40", "--seed", "5"],
        &["prob", "--n-list", "3,8", "--method", "naive-mc", "--samples", "200000", "--seed", "1"],
        &["prob", "--n", "64", "--method", "tilted-mc", "--samples", "50000", "--seed", "2"],
        &["conditional", "--n", "256", "--delta-grid", "0.3:0.7:0.01"],
    ];
    let mut ok = true;
    for (k, args) in invocations.iter().enumerate() {
        let a = run_to(dir.path(), &format!("a{k}"), "1", args);
        let b = run_to(dir.path(), &format!("b{k}"), "8", args);
        let c = run_to(dir.path(), &format!("c{k}"), "8", args);
        ok &= a.0 && b.0 && c.0 && !a.1.is_empty();
        ok &= a.1 == b.1 && b.1 == c.1;
        // Same config, same manifest up to the output path.
        let strip = |m: &[u8], tag: &str| String::from_utf8_lossy(m).replace(tag, "");
        ok &= strip(&b.2, &format!("b{k}")) == strip(&c.2, &format!("c{k}"));
    }
    verdict(ok, format!("{} invocations at threads 1 and 8", invocations.len()))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Verdict, Duration);
    let criteria: [Criterion; 10] = [
        ("1 critical constants", criterion_1, Duration::from_secs(1)),
        ("2 exact vs Monte Carlo probability", criterion_2, Duration::from_secs(300)),
        ("3 representation identity", criterion_3, Duration::from_secs(120)),
        ("4 exponent convergence", criterion_4, Duration::from_secs(60)),
        ("5 sandwich bounds", criterion_5, Duration::from_secs(60)),
        ("6 Chernoff/LDP", criterion_6, Duration::from_secs(120)),
        ("7 conditional concentration", criterion_7, Duration::from_secs(120)),
        ("8 enumeration cross-check", criterion_8, Duration::from_secs(600)),
        ("9 property suites", criterion_9, Duration::from_secs(60)),
        ("10 determinism", criterion_10, Duration::MAX),
    ];
    let mut failed = Vec::new();
    for (name, check, budget) in criteria {
        let started = Instant::now();
        let v = check();
        let elapsed = started.elapsed();
        let passed = v.passed && elapsed <= budget;
        println!(
            "{} criterion {name} [{:.2}s]: {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
        if !passed {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
