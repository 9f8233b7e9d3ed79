//! The SK Hamiltonian `H(σ) = Σ_{i<j} σᵢσⱼWᵢⱼ` on dense Gaussian couplings.
//!
//! Spin indices are 0-based throughout.

mod cut;
mod descent;
mod enumerate;

pub use cut::{cut_energy_identity, cut_value, is_locally_optimal_cut, spins_from_subset};
pub use descent::{greedy_descent, DescentRule, DescentTrace};
pub use enumerate::{enumerate_local_optima, LocalOptima, MAX_ENUMERATION_SPINS};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::CouplingStream;

/// Symmetric zero-diagonal coupling matrix with the seed it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SkInstance {
    n: usize,
    seed: u64,
    weights: Vec<f64>,
}

impl SkInstance {
    /// Draw the upper triangle i.i.d. standard normal from the `(seed, i, j)`
    /// keyed stream and mirror it.
    pub fn sample(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "an SK instance needs at least 2 spins, got {n}"
            )));
        }
        let mut weights = vec![0.0; n * n];
        let mut stream = CouplingStream::new(seed);
        let mut row = vec![0.0; n];
        for i in 0..n - 1 {
            let upper = &mut row[..n - i - 1];
            stream.fill_row(i, i + 1, upper);
            for (k, &w) in upper.iter().enumerate() {
                let j = i + 1 + k;
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Ok(Self { n, seed, weights })
    }

    /// Build from an explicit row-major matrix; it must be symmetric with a
    /// zero diagonal. The seed is recorded as 0.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n < 2 || weights.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected a {n}x{n} matrix with n >= 2, got {} entries",
                weights.len()
            )));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("W[{i}][{i}] must be 0")));
            }
            for j in 0..i {
                if weights[i * n + j] != weights[j * n + i] || !weights[i * n + j].is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "W must be finite and symmetric (entry {i},{j})"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            seed: 0,
            weights,
        })
    }

    /// Convenience constructor from the strict upper triangle, row by row.
    pub fn from_upper_triangle(n: usize, upper: &[f64]) -> Result<Self> {
        if n < 2 || upper.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidArgument(format!(
                "expected {} upper-triangle entries for n = {n}",
                n * n.saturating_sub(1) / 2
            )));
        }
        let mut weights = vec![0.0; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let w = *it.next().expect("length checked");
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Self::from_weights(n, weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// `Σ_{i<j} Wᵢⱼ`
    pub fn upper_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i)[i + 1..].iter().sum::<f64>())
            .sum()
    }

    fn check_dims(&self, sigma: &SpinConfiguration) -> Result<()> {
        if sigma.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: sigma.len(),
            });
        }
        Ok(())
    }
}

/// Shorthand for [`SkInstance::sample`].
pub fn sample_instance(n: usize, seed: u64) -> Result<SkInstance> {
    SkInstance::sample(n, seed)
}

/// A vector of ±1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("spin value {bad} is not +/-1")));
        }
        Ok(Self { spins })
    }

    pub fn all_up(n: usize) -> Self {
        Self { spins: vec![1; n] }
    }

    /// Bit `i` set means `σᵢ = +1`. Requires `n ≤ 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask representation holds at most 64 spins");
        Self {
            spins: (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect(),
        }
    }

    pub fn to_mask(&self) -> u64 {
        assert!(self.len() <= 64, "mask representation holds at most 64 spins");
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |m, (i, _)| m | 1 << i)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            spins: (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn get(&self, i: usize) -> f64 {
        f64::from(self.spins[i])
    }

    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    /// `σ⁽ⁱ⁾`
    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    /// `-σ`
    pub fn negated(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }
}

/// Local fields `Zᵢ(σ) = -Σ_{j≠i} σᵢσⱼWᵢⱼ = (H(σ⁽ⁱ⁾) − H(σ))/2` and the energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFields {
    pub z: Vec<f64>,
    pub energy: f64,
}

pub fn energy(inst: &SkInstance, sigma: &SpinConfiguration) -> Result<f64> {
    inst.check_dims(sigma)?;
    let n = inst.n;
    let mut h = 0.0;
    for i in 0..n {
        let row = inst.row(i);
        let inner: f64 = (i + 1..n).map(|j| sigma.get(j) * row[j]).sum();
        h += sigma.get(i) * inner;
    }
    Ok(h)
}

pub fn local_fields(inst: &SkInstance, sigma: &SpinConfiguration) -> Result<LocalFields> {
    inst.check_dims(sigma)?;
    let z = fields_unchecked(inst, sigma);
    // −H = Σ Z / 2
    let energy = -0.5 * z.iter().sum::<f64>();
    Ok(LocalFields { z, energy })
}

pub(crate) fn fields_unchecked(inst: &SkInstance, sigma: &SpinConfiguration) -> Vec<f64> {
    (0..inst.n)
        .map(|i| {
            let dot: f64 = inst
                .row(i)
                .iter()
                .zip(sigma.spins())
                .map(|(w, &s)| w * f64::from(s))
                .sum();
            // the diagonal is zero, so the j = i term drops out
            -sigma.get(i) * dot
        })
        .collect()
}

/// `σ` is a local minimum iff every `Zᵢ(σ) ≥ 0` (ties count as optimal).
pub fn is_local_min(inst: &SkInstance, sigma: &SpinConfiguration) -> Result<bool> {
    inst.check_dims(sigma)?;
    Ok(fields_unchecked(inst, sigma).iter().all(|&z| z >= 0.0))
}

/// Energy normalisation `n^{-3/2}`.
pub fn energy_scale(n: usize) -> f64 {
    (n as f64).powf(-1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use proptest::prelude::{any, prop_assert_eq, proptest};

    /// Naive double loop over all ordered pairs, halved.
    fn energy_oracle(inst: &SkInstance, sigma: &SpinConfiguration) -> f64 {
        let n = inst.n();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    total += sigma.get(i) * sigma.get(j) * inst.weight(i, j);
                }
            }
        }
        total / 2.0
    }

    fn example3() -> SkInstance {
        SkInstance::from_upper_triangle(3, &[1.0, -2.0, 0.5]).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_symmetric() {
        let a = SkInstance::sample(5, 1).unwrap();
        let b = SkInstance::sample(5, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, SkInstance::sample(5, 2).unwrap());
        for i in 0..5 {
            assert_eq!(a.weight(i, i), 0.0);
            for j in 0..5 {
                assert_eq!(a.weight(i, j), a.weight(j, i));
            }
        }
        assert!(SkInstance::sample(1, 0).is_err());
    }

    #[test]
    fn entries_depend_only_on_position() {
        // W[i][j] of a small instance equals the same entry of a bigger one.
        let small = SkInstance::sample(6, 77).unwrap();
        let big = SkInstance::sample(11, 77).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(small.weight(i, j), big.weight(i, j));
            }
        }
    }

    #[test]
    fn sampled_weights_are_standard_normal() {
        let mut values = Vec::new();
        let mut seed = 0;
        while values.len() < 1_000_000 {
            let inst = SkInstance::sample(200, seed).unwrap();
            for i in 0..200 {
                values.extend_from_slice(&inst.row(i)[i + 1..]);
            }
            seed += 1;
        }
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        assert!(mean.abs() < 4.0 / m.sqrt(), "mean {mean}");
        // Var of the sample variance of a normal is 2/m.
        assert!((var - 1.0).abs() < 4.0 * (2.0 / m).sqrt(), "var {var}");
    }

    #[test]
    fn two_spin_energy() {
        let inst = SkInstance::from_upper_triangle(2, &[0.7]).unwrap();
        let up = SpinConfiguration::all_up(2);
        assert_eq!(energy(&inst, &up).unwrap(), 0.7);
    }

    #[test]
    fn three_spin_fields_example() {
        let inst = example3();
        let up = SpinConfiguration::all_up(3);
        let lf = local_fields(&inst, &up).unwrap();
        assert_eq!(lf.z, vec![1.0, -1.5, 1.5]);
        assert!((lf.energy + 0.5).abs() < 1e-15);
        assert!((energy(&inst, &up).unwrap() + 0.5).abs() < 1e-15);
        assert!(!is_local_min(&inst, &up).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let inst = example3();
        let sigma = SpinConfiguration::all_up(4);
        assert!(matches!(
            energy(&inst, &sigma),
            Err(Error::DimensionMismatch { expected: 3, got: 4 })
        ));
        assert!(local_fields(&inst, &sigma).is_err());
        assert!(is_local_min(&inst, &sigma).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(SpinConfiguration::new(vec![1, 0, -1]).is_err());
        assert!(SkInstance::from_weights(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(SkInstance::from_weights(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn energy_matches_oracle_and_field_identities() {
        let mut rng = seeded_rng(5);
        for t in 0..100u64 {
            let n = 3 + (t as usize % 20);
            let inst = SkInstance::sample(n, t).unwrap();
            let sigma = SpinConfiguration::random(n, &mut rng);
            let h = energy(&inst, &sigma).unwrap();
            assert!((h - energy_oracle(&inst, &sigma)).abs() <= 1e-9 * h.abs().max(1.0));
            let lf = local_fields(&inst, &sigma).unwrap();
            assert!((lf.energy - h).abs() <= 1e-9 * h.abs().max(1.0));
            let i = rng.random_range(0..n);
            let flipped = energy(&inst, &sigma.flipped(i)).unwrap();
            assert!(((flipped - h) / 2.0 - lf.z[i]).abs() <= 1e-9 * h.abs().max(1.0));
        }
    }

    #[test]
    fn global_minimum_is_local_minimum() {
        let inst = SkInstance::sample(10, 3).unwrap();
        let best = (0..1u64 << 10)
            .map(|m| SpinConfiguration::from_mask(10, m))
            .min_by(|a, b| energy(&inst, a).unwrap().total_cmp(&energy(&inst, b).unwrap()))
            .unwrap();
        assert!(is_local_min(&inst, &best).unwrap());
    }

    #[test]
    fn mask_round_trip() {
        let s = SpinConfiguration::from_mask(7, 0b1010011);
        assert_eq!(s.to_mask(), 0b1010011);
        assert_eq!(s.negated().to_mask(), !0b1010011u64 & 0x7f);
    }

    proptest! {
        #[test]
        fn global_flip_symmetry(seed in any::<u64>(), n in 2usize..30, mask in any::<u64>()) {
            let inst = SkInstance::sample(n, seed).unwrap();
            let sigma = SpinConfiguration::from_mask(n, mask);
            let neg = sigma.negated();
            prop_assert_eq!(energy(&inst, &sigma).unwrap(), energy(&inst, &neg).unwrap());
            let a = local_fields(&inst, &sigma).unwrap();
            let b = local_fields(&inst, &neg).unwrap();
            prop_assert_eq!(&a.z, &b.z);
            prop_assert_eq!(is_local_min(&inst, &sigma).unwrap(), is_local_min(&inst, &neg).unwrap());
        }
    }
}
