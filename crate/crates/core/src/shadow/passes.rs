//! The h-step maps and the forward / backward correction passes.
//!
//! The stable pass runs `z_{k+1} = h_k^s(z_k)` from `z_0` (zero unless a
//! probe seed is given). The unstable pass is its mirror, run backward from
//! `z_N = 0` with `f^{-1}`. Every step is checked against `|z| ≤ L d`; a
//! failed check is counted, not fatal, so a full run can report how often
//! the bound broke.

use serde::Serialize;

use super::constants::ShadowConstants;
use crate::error::{Result, ShadowError};
use crate::pseudotraj::Pseudotrajectory;
use crate::system::{IntersectionSide, Strong, SystemModel, WeakLeaf};
use crate::torus::{self, Displacement, TorusPoint};

/// Corrections `z_k` in strong-leaf chart coordinates at `x_k`, with the
/// running Lemma 1 bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionSequence {
    pub values: Vec<Displacement>,
    /// `L d`
    pub bound: f64,
    pub max_norm: f64,
    pub violations: usize,
    /// first `(k, |z_k|)` above the bound
    pub first_violation: Option<(usize, f64)>,
}

impl CorrectionSequence {
    fn new(len: usize, bound: f64) -> Self {
        CorrectionSequence {
            values: Vec::with_capacity(len),
            bound,
            max_norm: 0.0,
            violations: 0,
            first_violation: None,
        }
    }

    fn push(&mut self, k: usize, z: Displacement) {
        let norm = z.norm();
        self.max_norm = self.max_norm.max(norm);
        if norm > self.bound {
            self.violations += 1;
            self.first_violation.get_or_insert((k, norm));
        }
        self.values.push(z);
    }

    fn as_error(&self) -> Option<ShadowError> {
        self.first_violation.map(|(k, norm)| ShadowError::Lemma1Violation {
            k,
            norm,
            bound: self.bound,
        })
    }
}

/// Result of one pass: the corrected points and the checks made on them.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PassRun {
    pub points: Vec<TorusPoint>,
    pub z: CorrectionSequence,
    /// largest weak-leaf distance between `f(y_k)` and `y_{k+1}`
    pub max_weak_dist: f64,
    /// largest residual of `y_{k+1}` off that weak leaf
    pub max_weak_residual: f64,
    /// largest `dist(x_k, y_k)`
    pub max_dist_to_x: f64,
}

struct Step {
    z: Displacement,
    point: TorusPoint,
}

/// Moves the corrected point `y_from` one step to the chart at `to`:
/// `forward` selects `f` with the s ∩ cu product, otherwise `f^{-1}` (taken
/// near `to`) with u ∩ cs.
fn step(sys: &SystemModel, y_from: &TorusPoint, to: &TorusPoint, forward: bool) -> Result<Step> {
    let (q, side, strong) = if forward {
        (sys.apply(y_from)?, IntersectionSide::StableCenterUnstable, Strong::Stable)
    } else {
        (
            sys.apply_inverse_near(to, y_from)?,
            IntersectionSide::UnstableCenterStable,
            Strong::Unstable,
        )
    };
    let p = sys.leaf_intersection(to, &q, side, sys.hyperbolicity().delta0)?;
    let z = sys.strong_log(to, strong, &p.point)?;
    Ok(Step {
        z: Displacement::new(z),
        point: p.point,
    })
}

fn single_step(
    sys: &SystemModel,
    from: &TorusPoint,
    to: &TorusPoint,
    z: &Displacement,
    constants: &ShadowConstants,
    d: f64,
    forward: bool,
) -> Result<Displacement> {
    let strong = if forward { Strong::Stable } else { Strong::Unstable };
    let y = sys.strong_exp(from, strong, &z.comps)?;
    let out = step(sys, &y, to, forward)?.z;
    let bound = constants.l * d;
    let norm = out.norm();
    if norm > bound {
        return Err(ShadowError::Lemma1Violation { k: 0, norm, bound });
    }
    Ok(out)
}

/// `h^s_k`: carries a stable correction `z` at `x_k` to `x_next`.
/// A bound failure is reported with `k = 0`.
pub fn h_s_step(
    sys: &SystemModel,
    x_k: &TorusPoint,
    x_next: &TorusPoint,
    z: &Displacement,
    constants: &ShadowConstants,
    d: f64,
) -> Result<Displacement> {
    single_step(sys, x_k, x_next, z, constants, d, true)
}

/// `h^u_k`: carries an unstable correction `z` at `x_{k+1}` back to `x_k`.
pub fn h_u_step(
    sys: &SystemModel,
    x_next: &TorusPoint,
    x_k: &TorusPoint,
    z: &Displacement,
    constants: &ShadowConstants,
    d: f64,
) -> Result<Displacement> {
    single_step(sys, x_next, x_k, z, constants, d, false)
}

fn check_traj(sys: &SystemModel, traj: &Pseudotrajectory, constants: &ShadowConstants) -> Result<()> {
    if traj.dim() != sys.dim() {
        return Err(ShadowError::InvalidInput(format!(
            "trajectory has dimension {}, system has {}",
            traj.dim(),
            sys.dim()
        )));
    }
    if traj.d() > constants.d0 {
        return Err(ShadowError::StepTooLarge {
            d: traj.d(),
            d0: constants.d0,
        });
    }
    Ok(())
}

pub(crate) fn run_stable(
    sys: &SystemModel,
    traj: &Pseudotrajectory,
    constants: &ShadowConstants,
    z0: &Displacement,
) -> Result<PassRun> {
    check_traj(sys, traj, constants)?;
    let x = traj.points();
    let bound = constants.l * traj.d();
    let mut z = CorrectionSequence::new(x.len(), bound);
    let y0 = sys.strong_exp(&x[0], Strong::Stable, &z0.comps)?;
    z.push(0, z0.clone());
    let mut points = vec![y0];
    let (mut max_weak_dist, mut max_weak_residual) = (0.0f64, 0.0f64);
    for k in 0..x.len() - 1 {
        let y = &points[k];
        let s = step(sys, y, &x[k + 1], true)?;
        let (wd, wr) = sys.weak_leaf_membership(&sys.apply(y)?, &s.point, WeakLeaf::CenterUnstable)?;
        max_weak_dist = max_weak_dist.max(wd);
        max_weak_residual = max_weak_residual.max(wr);
        z.push(k + 1, s.z);
        points.push(s.point);
    }
    let max_dist_to_x = max_dist(x, &points)?;
    Ok(PassRun {
        points,
        z,
        max_weak_dist,
        max_weak_residual,
        max_dist_to_x,
    })
}

pub(crate) fn run_unstable(
    sys: &SystemModel,
    traj: &Pseudotrajectory,
    constants: &ShadowConstants,
) -> Result<PassRun> {
    check_traj(sys, traj, constants)?;
    let x = traj.points();
    let n = x.len() - 1;
    let bound = constants.l * traj.d();
    let mut rev_z = CorrectionSequence::new(x.len(), bound);
    rev_z.push(n, Displacement::zeros(sys.strong_dim(Strong::Unstable)));
    let mut rev_points = vec![x[n].clone()];
    let (mut max_weak_dist, mut max_weak_residual) = (0.0f64, 0.0f64);
    for k in (0..n).rev() {
        let y_next = rev_points.last().unwrap();
        let s = step(sys, y_next, &x[k], false)?;
        // forward reading: y^u_{k+1} on the centre-stable leaf of f(y^u_k)
        let (wd, wr) = sys.weak_leaf_membership(&sys.apply(&s.point)?, y_next, WeakLeaf::CenterStable)?;
        max_weak_dist = max_weak_dist.max(wd);
        max_weak_residual = max_weak_residual.max(wr);
        rev_z.push(k, s.z);
        rev_points.push(s.point);
    }
    rev_z.values.reverse();
    rev_points.reverse();
    let max_dist_to_x = max_dist(x, &rev_points)?;
    Ok(PassRun {
        points: rev_points,
        z: rev_z,
        max_weak_dist,
        max_weak_residual,
        max_dist_to_x,
    })
}

fn max_dist(a: &[TorusPoint], b: &[TorusPoint]) -> Result<f64> {
    a.iter()
        .zip(b)
        .try_fold(0.0f64, |m, (p, q)| Ok(m.max(torus::toral_dist(p, q)?)))
}

/// Forward pass from `z_0 = 0`; fails on the first Lemma 1 violation.
pub fn stable_pass(
    sys: &SystemModel,
    traj: &Pseudotrajectory,
    constants: &ShadowConstants,
) -> Result<(Vec<TorusPoint>, CorrectionSequence)> {
    let run = run_stable(sys, traj, constants, &Displacement::zeros(sys.strong_dim(Strong::Stable)))?;
    if let Some(e) = run.z.as_error() {
        return Err(e);
    }
    Ok((run.points, run.z))
}

/// Backward pass from `z_N = 0`; fails on the first Lemma 1 violation.
pub fn unstable_pass(
    sys: &SystemModel,
    traj: &Pseudotrajectory,
    constants: &ShadowConstants,
) -> Result<(Vec<TorusPoint>, CorrectionSequence)> {
    let run = run_unstable(sys, traj, constants)?;
    if let Some(e) = run.z.as_error() {
        return Err(e);
    }
    Ok((run.points, run.z))
}

pub(crate) struct Combined {
    pub points: Vec<TorusPoint>,
    /// largest strong / weak leaf distance used by the intersections
    pub max_leaf_dist: f64,
}

pub(crate) fn combine_detail(
    sys: &SystemModel,
    y_s: &[TorusPoint],
    y_u: &[TorusPoint],
    constants: &ShadowConstants,
    d: f64,
) -> Result<Combined> {
    if y_s.len() != y_u.len() {
        return Err(ShadowError::InvalidInput(format!(
            "sequence lengths differ: {} vs {}",
            y_s.len(),
            y_u.len()
        )));
    }
    let limit = 4.0 * constants.l * d;
    let mut points = Vec::with_capacity(y_s.len());
    let mut max_leaf_dist = 0.0f64;
    for (s, u) in y_s.iter().zip(y_u) {
        let dist = torus::toral_dist(s, u)?;
        if dist > limit {
            return Err(ShadowError::TooFarApart { dist, limit });
        }
        let p = sys.leaf_intersection(u, s, IntersectionSide::StableCenterUnstable, sys.hyperbolicity().delta0)?;
        max_leaf_dist = max_leaf_dist.max(p.strong_dist).max(p.weak_dist);
        points.push(p.point);
    }
    Ok(Combined {
        points,
        max_leaf_dist,
    })
}

/// `y_k = W^s(y^u_k) ∩ W^cu(y^s_k)`: the strong stable coordinate comes from
/// `y^s_k`, the centre and unstable ones from `y^u_k`.
pub fn combine(
    sys: &SystemModel,
    y_s: &[TorusPoint],
    y_u: &[TorusPoint],
    constants: &ShadowConstants,
    d: f64,
) -> Result<Vec<TorusPoint>> {
    Ok(combine_detail(sys, y_s, y_u, constants, d)?.points)
}

