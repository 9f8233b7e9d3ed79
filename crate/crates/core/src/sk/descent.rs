use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use super::{energy_scale, fields_unchecked, SkInstance, SpinConfiguration};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Which improving spin to flip next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescentRule {
    /// Most negative field; lowest index on ties.
    Steepest,
    /// Lowest index with a negative field.
    FirstImprovement,
    /// Uniform among negative fields.
    RandomImprovement,
}

impl DescentRule {
    pub const ALL: [DescentRule; 3] = [
        DescentRule::Steepest,
        DescentRule::FirstImprovement,
        DescentRule::RandomImprovement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DescentRule::Steepest => "steepest",
            DescentRule::FirstImprovement => "first-improvement",
            DescentRule::RandomImprovement => "random-improvement",
        }
    }
}

impl fmt::Display for DescentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DescentRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DescentRule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown descent rule '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentTrace {
    pub initial_energy: f64,
    /// Index flipped at each step.
    pub flips: Vec<usize>,
    /// `H` after each flip.
    pub energies: Vec<f64>,
    pub final_state: SpinConfiguration,
    /// Local fields of the final state, maintained incrementally.
    pub final_fields: Vec<f64>,
    /// `n^{-3/2} H(final)`
    pub normalized_energy: f64,
}

impl DescentTrace {
    pub fn final_energy(&self) -> f64 {
        self.energies.last().copied().unwrap_or(self.initial_energy)
    }
}

/// Flip spin `i` and update fields and energy in O(n).
pub(crate) fn apply_flip(
    inst: &SkInstance,
    sigma: &mut SpinConfiguration,
    z: &mut [f64],
    energy: &mut f64,
    i: usize,
) {
    let si = sigma.get(i);
    let row = inst.row(i);
    *energy += 2.0 * z[i];
    for (j, zj) in z.iter_mut().enumerate() {
        if j != i {
            *zj += 2.0 * si * sigma.get(j) * row[j];
        }
    }
    z[i] = -z[i];
    sigma.flip(i);
}

/// Single-spin-flip descent until every field is nonnegative.
///
/// Only strictly negative fields are flipped, so `H` strictly decreases and
/// the walk cannot revisit a state.
pub fn greedy_descent(
    inst: &SkInstance,
    start: &SpinConfiguration,
    rule: DescentRule,
    rng_seed: u64,
) -> Result<DescentTrace> {
    inst.check_dims(start)?;
    let mut sigma = start.clone();
    let mut z = fields_unchecked(inst, &sigma);
    let initial_energy = -0.5 * z.iter().sum::<f64>();
    let mut energy = initial_energy;
    let mut rng = seeded_rng(rng_seed);
    let mut flips = Vec::new();
    let mut energies = Vec::new();
    let mut candidates = Vec::new();

    loop {
        let next = match rule {
            DescentRule::Steepest => {
                let (idx, &zmin) = z
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                    .expect("n >= 2");
                (zmin < 0.0).then_some(idx)
            }
            DescentRule::FirstImprovement => z.iter().position(|&zi| zi < 0.0),
            DescentRule::RandomImprovement => {
                candidates.clear();
                candidates.extend(z.iter().enumerate().filter(|(_, &zi)| zi < 0.0).map(|(i, _)| i));
                (!candidates.is_empty()).then(|| candidates[rng.random_range(0..candidates.len())])
            }
        };
        let Some(i) = next else { break };
        apply_flip(inst, &mut sigma, &mut z, &mut energy, i);
        flips.push(i);
        energies.push(energy);
    }

    let normalized_energy = energy * energy_scale(inst.n());
    Ok(DescentTrace {
        initial_energy,
        flips,
        energies,
        final_state: sigma,
        final_fields: z,
        normalized_energy,
    })
}
