use sk_landscape::landscape::{
    conditional_energy_mean, default_grid_step, exp_moment, exp_moment_bounds,
    halfnormal_sum_density, local_opt_probability, log_exp_moment_from_probability,
    mc_local_opt_probability, GridDensity, Method, MomentMethod, Side,
};
use sk_landscape::rate::critical_constants;

fn density(n: usize) -> GridDensity {
    halfnormal_sum_density(n, default_grid_step(n)).unwrap()
}

#[test]
fn representation_identity_for_all_small_n() {
    for n in 3..=64 {
        let conv = exp_moment(n, MomentMethod::Convolution).unwrap();
        let orth = log_exp_moment_from_probability(n).unwrap();
        assert_eq!(conv.method, Method::Convolution);
        assert!(
            (conv.log_value - orth.log_value).abs() < 1e-7,
            "n = {n}: {} vs {}",
            conv.log_value,
            orth.log_value
        );
    }
}

#[test]
fn large_density_invariants() {
    let d = density(1024);
    let mu = (2.0 / std::f64::consts::PI).sqrt();
    assert!(d.log_mass().abs() < 1e-8, "{}", d.log_mass());
    assert!((d.mean() / (1024.0 * mu) - 1.0).abs() < 1e-6);
    assert!((d.variance() / (1024.0 * (1.0 - mu * mu)) - 1.0).abs() < 1e-4);
    let m = d.log_exp_moment().unwrap().log_value;
    let o = log_exp_moment_from_probability(1024).unwrap().log_value;
    assert!((m - o).abs() < 1e-7, "{m} vs {o}");
}

#[test]
fn sandwich_bounds() {
    for n in [4usize, 16, 64, 256] {
        let b = exp_moment_bounds(n).unwrap();
        let e = exp_moment(n, MomentMethod::Convolution).unwrap().log_value;
        assert!(b.jensen_lower <= e && e <= b.log_sobolev_upper, "n = {n}");
    }
}

#[test]
fn conditional_concentration_at_1024() {
    let cc = critical_constants();
    let d = density(1024);
    let above = d.conditional_energy_tail(cc.v_star / 2.0 + 0.05).unwrap().value;
    let below = d.conditional_energy_tail(cc.v_star / 2.0 - 0.05).unwrap().value;
    let at = d.conditional_energy_tail(cc.v_star / 2.0).unwrap().value;
    assert!(above <= 0.01, "{above}");
    assert!(below >= 0.99, "{below}");
    assert!(at > 0.01 && at < 0.99, "{at}");
    let mean = d.conditional_energy_mean().unwrap().value;
    assert!((mean - cc.v_star / 2.0).abs() < 0.02, "{mean}");
}

#[test]
fn conditional_mean_approaches_half_v_star() {
    let half = critical_constants().v_star / 2.0;
    let gaps: Vec<f64> = [64usize, 256, 1024]
        .iter()
        .map(|&n| (conditional_energy_mean(n).unwrap().value - half).abs())
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn split_at_v_star_is_exponentially_tight() {
    let cc = critical_constants();
    let mut prev = f64::INFINITY;
    for n in [64usize, 256, 1024] {
        let d = density(n);
        let nf = n as f64;
        let full = d.log_exp_moment().unwrap().log_value;
        let mut worst: f64 = 0.0;
        for side in [Side::Below, Side::Above] {
            let part = d.truncated_exp_moment(cc.v_star * nf, side).unwrap().log_value;
            assert!(part < full);
            worst = worst.max((part - nf * cc.alpha_star).abs() / nf);
        }
        assert!(worst < prev, "n = {n}: {worst} vs {prev}");
        prev = worst;
    }
    assert!(prev < 0.01);
}

#[test]
fn tilted_mc_agrees_with_convolution() {
    for (i, n) in [16usize, 64, 256].into_iter().enumerate() {
        let mc = exp_moment(
            n,
            MomentMethod::TiltedMc {
                samples: 200_000,
                seed: 17 + i as u64,
            },
        )
        .unwrap();
        let conv = exp_moment(n, MomentMethod::Convolution).unwrap();
        assert_eq!(mc.n_samples, Some(200_000));
        assert!(
            (mc.log_value - conv.log_value).abs() < 3.0 * mc.log_error,
            "n = {n}: {} ± {} vs {}",
            mc.log_value,
            mc.log_error,
            conv.log_value
        );
    }
}

#[test]
fn naive_monte_carlo_matches_quadrature() {
    for (n, seed) in [(2usize, 1u64), (3, 2), (12, 3), (15, 4)] {
        let mc = mc_local_opt_probability(n, 1_000_000, seed).unwrap();
        let exact = local_opt_probability(n).unwrap().value;
        assert!(
            (mc.value - exact).abs() < 3.0 * mc.error,
            "n = {n}: {} ± {} vs {exact}",
            mc.value,
            mc.error
        );
    }
}
