use serde::Serialize;

use super::{fields_unchecked, SkInstance, SpinConfiguration};
use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_local_optima`].
pub const MAX_ENUMERATION_SPINS: usize = 26;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalOptima {
    pub count: u64,
    /// `H` of each optimum, aligned with `states`.
    pub energies: Vec<f64>,
    /// Bit `i` set means spin `i` is `+1`.
    pub states: Vec<u64>,
}

impl LocalOptima {
    pub fn contains(&self, sigma: &SpinConfiguration) -> bool {
        let mask = sigma.to_mask();
        self.states.contains(&mask)
    }
}

/// Visit all `2ⁿ` configurations and collect the local minima.
///
/// The last spin is pinned to `+1` and the other `n − 1` run through a
/// reflected Gray code, one flip and one O(n) field update per step; every
/// optimum found is recorded together with its negation, which has the same
/// fields and energy.
pub fn enumerate_local_optima(inst: &SkInstance) -> Result<LocalOptima> {
    let n = inst.n();
    if n > MAX_ENUMERATION_SPINS {
        return Err(Error::Resource(format!(
            "enumeration is limited to n <= {MAX_ENUMERATION_SPINS}, got {n}"
        )));
    }
    let full: u64 = (1u64 << n) - 1;
    let start = SpinConfiguration::all_up(n);
    let mut spins = vec![1.0f64; n];
    let mut z = fields_unchecked(inst, &start);
    let mut negative = z.iter().filter(|&&v| v < 0.0).count();
    let mut mask = full;

    let mut energies = Vec::new();
    let mut states = Vec::new();
    let mut record = |z: &[f64], mask: u64| {
        let h = -0.5 * z.iter().sum::<f64>();
        energies.push(h);
        states.push(mask);
        energies.push(h);
        states.push(!mask & full);
    };

    if negative == 0 {
        record(&z, mask);
    }
    for step in 1u64..1u64 << (n - 1) {
        let i = step.trailing_zeros() as usize;
        let si = spins[i];
        let row = inst.row(i);
        for j in 0..n {
            if j == i {
                continue;
            }
            let old = z[j];
            let new = old + 2.0 * si * spins[j] * row[j];
            negative = negative + usize::from(new < 0.0) - usize::from(old < 0.0);
            z[j] = new;
        }
        let old = z[i];
        z[i] = -old;
        negative = negative + usize::from(-old < 0.0) - usize::from(old < 0.0);
        spins[i] = -si;
        mask ^= 1 << i;
        if negative == 0 {
            record(&z, mask);
        }
    }

    Ok(LocalOptima {
        count: states.len() as u64,
        energies,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use crate::sk::{energy, greedy_descent, is_local_min, DescentRule};

    fn brute_force(inst: &SkInstance) -> Vec<u64> {
        let n = inst.n();
        (0..1u64 << n)
            .filter(|&m| is_local_min(inst, &SpinConfiguration::from_mask(n, m)).unwrap())
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..30u64 {
            let n = 2 + (seed as usize % 11);
            let inst = SkInstance::sample(n, seed).unwrap();
            let found = enumerate_local_optima(&inst).unwrap();
            let mut states = found.states.clone();
            states.sort_unstable();
            assert_eq!(states, brute_force(&inst));
            for (&m, &h) in found.states.iter().zip(&found.energies) {
                let direct = energy(&inst, &SpinConfiguration::from_mask(n, m)).unwrap();
                assert!((direct - h).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn count_even_and_at_least_two() {
        for seed in 0..50u64 {
            let inst = SkInstance::sample(9, seed).unwrap();
            let found = enumerate_local_optima(&inst).unwrap();
            assert!(found.count >= 2 && found.count % 2 == 0);
        }
    }

    #[test]
    fn three_spins_always_have_exactly_two() {
        for seed in 0..1000u64 {
            let inst = SkInstance::sample(3, seed).unwrap();
            assert_eq!(enumerate_local_optima(&inst).unwrap().count, 2, "seed {seed}");
        }
    }

    #[test]
    fn descent_endpoints_are_enumerated() {
        let mut rng = seeded_rng(42);
        for seed in 0..20u64 {
            let inst = SkInstance::sample(16, seed).unwrap();
            let optima = enumerate_local_optima(&inst).unwrap();
            for rule in DescentRule::ALL {
                let start = SpinConfiguration::random(16, &mut rng);
                let trace = greedy_descent(&inst, &start, rule, seed).unwrap();
                assert!(optima.contains(&trace.final_state));
            }
        }
    }

    #[test]
    fn resource_guard() {
        let inst = SkInstance::sample(27, 0).unwrap();
        assert!(matches!(enumerate_local_optima(&inst), Err(Error::Resource(_))));
    }
}
