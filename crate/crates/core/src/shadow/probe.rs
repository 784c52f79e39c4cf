//! Report-only comparison of central pseudotrajectories started from
//! different stable corrections `z_0`.

use serde::Serialize;

use super::passes::{combine_detail, run_stable, run_unstable};
use super::prepare;
use crate::error::{Result, ShadowError};
use crate::pseudotraj::Pseudotrajectory;
use crate::system::{Strong, SystemModel};
use crate::torus::{self, Displacement};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbePair {
    pub a: usize,
    pub b: usize,
    /// `dist(y^a_k, y^b_k)`
    pub dist: Vec<f64>,
    /// distance of `y^b_k` from the central leaf of `y^a_k`
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub power: u32,
    /// error bound of the (possibly subsampled) trajectory the passes ran on
    pub d: f64,
    /// `L d`, the admissible seed radius
    pub seed_radius: f64,
    pub seeds: Vec<Vec<f64>>,
    pub lemma1_violations: usize,
    pub pairs: Vec<ProbePair>,
}

/// `L d` for the trajectory the probe would run on, the largest admissible
/// seed norm.
pub fn probe_seed_radius(sys: &SystemModel, traj: &Pseudotrajectory) -> Result<f64> {
    let prep = prepare(sys, traj, None)?;
    Ok(prep.constants.l * prep.sub.d())
}

/// Reruns the stable pass from each seed and compares the resulting central
/// pseudotrajectories pairwise.
pub fn plaque_probe(
    sys: &SystemModel,
    traj: &Pseudotrajectory,
    seeds: &[Displacement],
) -> Result<ProbeReport> {
    let prep = prepare(sys, traj, None)?;
    let (psys, sub, c) = (&prep.psys, &prep.sub, &prep.constants);
    let radius = c.l * sub.d();
    let s_dim = psys.strong_dim(Strong::Stable);
    for (i, s) in seeds.iter().enumerate() {
        if s.dim() != s_dim {
            return Err(ShadowError::InvalidInput(format!(
                "seed {i} has dimension {}, stable leaves have dimension {s_dim}",
                s.dim()
            )));
        }
        if !(s.norm() <= radius) {
            return Err(ShadowError::InvalidInput(format!(
                "seed {i} has norm {} above L d = {radius}",
                s.norm()
            )));
        }
    }
    let unstable = run_unstable(psys, sub, c)?;
    let mut violations = unstable.z.violations;
    let mut outputs = Vec::with_capacity(seeds.len());
    for s in seeds {
        let stable = run_stable(psys, sub, c, s)?;
        violations += stable.z.violations;
        outputs.push(combine_detail(psys, &stable.points, &unstable.points, c, sub.d())?.points);
    }
    let mut pairs = Vec::new();
    for a in 0..outputs.len() {
        for b in a + 1..outputs.len() {
            let mut dist = Vec::with_capacity(outputs[a].len());
            let mut residual = Vec::with_capacity(outputs[a].len());
            for (ya, yb) in outputs[a].iter().zip(&outputs[b]) {
                dist.push(torus::toral_dist(ya, yb)?);
                residual.push(psys.central_decomposition(ya, yb)?.1);
            }
            pairs.push(ProbePair { a, b, dist, residual });
        }
    }
    Ok(ProbeReport {
        power: prep.power,
        d: sub.d(),
        seed_radius: radius,
        seeds: seeds.iter().map(|s| s.comps.clone()).collect(),
        lemma1_violations: violations,
        pairs,
    })
}
