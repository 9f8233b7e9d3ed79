//! Cuts of the complete graph weighted by `W`.
//!
//! `Cut(S) = Σ_{i∈S, j∉S} Wᵢⱼ = (−H(σ_S) + Σ_{i<j} Wᵢⱼ) / 2` where `σ_S` is
//! `+1` on `S`, so locally maximal cuts are exactly local minima of `H`.

use super::{energy, SkInstance, SpinConfiguration};
use crate::error::{Error, Result};

fn membership(n: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::InvalidArgument(format!(
                "vertex {i} out of range for n = {n}"
            )));
        }
        inside[i] = true;
    }
    Ok(inside)
}

pub fn spins_from_subset(n: usize, subset: &[usize]) -> Result<SpinConfiguration> {
    let inside = membership(n, subset)?;
    SpinConfiguration::new(inside.iter().map(|&b| if b { 1 } else { -1 }).collect())
}

fn cut_of(inst: &SkInstance, inside: &[bool]) -> f64 {
    let n = inst.n();
    let mut total = 0.0;
    for i in (0..n).filter(|&i| inside[i]) {
        let row = inst.row(i);
        total += (0..n).filter(|&j| !inside[j]).map(|j| row[j]).sum::<f64>();
    }
    total
}

pub fn cut_value(inst: &SkInstance, subset: &[usize]) -> Result<f64> {
    let inside = membership(inst.n(), subset)?;
    Ok(cut_of(inst, &inside))
}

/// Checks `Cut(S) = (−H(σ_S) + Σ_{i<j} Wᵢⱼ)/2` to `1e-9` relative.
pub fn cut_energy_identity(inst: &SkInstance, subset: &[usize]) -> Result<bool> {
    let cut = cut_value(inst, subset)?;
    let sigma = spins_from_subset(inst.n(), subset)?;
    let h = energy(inst, &sigma)?;
    let total = inst.upper_sum();
    let rhs = 0.5 * (total - h);
    let scale = cut.abs().max(h.abs()).max(total.abs()).max(1.0);
    Ok((cut - rhs).abs() <= 1e-9 * scale)
}

/// No single vertex can change sides and increase the cut. Evaluated by
/// recomputing the cut after every move, independently of the local fields.
pub fn is_locally_optimal_cut(inst: &SkInstance, subset: &[usize]) -> Result<bool> {
    let mut inside = membership(inst.n(), subset)?;
    let base = cut_of(inst, &inside);
    for v in 0..inst.n() {
        inside[v] = !inside[v];
        let moved = cut_of(inst, &inside);
        inside[v] = !inside[v];
        if moved > base {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sk::is_local_min;

    #[test]
    fn empty_and_full_subsets() {
        let inst = SkInstance::sample(6, 1).unwrap();
        assert_eq!(cut_value(&inst, &[]).unwrap(), 0.0);
        assert_eq!(cut_value(&inst, &[0, 1, 2, 3, 4, 5]).unwrap(), 0.0);
        assert!(cut_energy_identity(&inst, &[]).unwrap());
        // H(−1) = ΣW
        let down = spins_from_subset(6, &[]).unwrap();
        assert!((energy(&inst, &down).unwrap() - inst.upper_sum()).abs() < 1e-12);
    }

    #[test]
    fn invalid_index() {
        let inst = SkInstance::sample(4, 1).unwrap();
        assert!(cut_value(&inst, &[4]).is_err());
        assert!(is_locally_optimal_cut(&inst, &[0, 9]).is_err());
    }

    #[test]
    fn identity_and_local_optimality_agree_on_all_subsets() {
        for seed in 0..5u64 {
            let inst = SkInstance::sample(8, seed).unwrap();
            for mask in 0u64..256 {
                let subset: Vec<usize> = (0..8).filter(|&i| mask >> i & 1 == 1).collect();
                assert!(cut_energy_identity(&inst, &subset).unwrap());
                let sigma = spins_from_subset(8, &subset).unwrap();
                assert_eq!(
                    is_locally_optimal_cut(&inst, &subset).unwrap(),
                    is_local_min(&inst, &sigma).unwrap(),
                    "seed {seed}, mask {mask:#b}"
                );
            }
        }
    }
}
