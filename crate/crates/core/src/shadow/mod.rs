//! The shadowing construction: constants, the stable and unstable correction
//! passes, their combination into a central pseudotrajectory, and the
//! certificate checks run on the result.

mod constants;
mod oracle;
mod passes;
mod probe;

use serde::Serialize;

pub use constants::{derive_constants, ShadowConstants, DEFAULT_MU, L_SAFETY, MU_MARGIN};
pub use oracle::linear_series_oracle;
pub use passes::{combine, h_s_step, h_u_step, stable_pass, unstable_pass, CorrectionSequence};
pub use probe::{plaque_probe, probe_seed_radius, ProbePair, ProbeReport};

use crate::error::{Result, ShadowError};
use crate::pseudotraj::{self, CentralJumpRecord, Pseudotrajectory};
use crate::system::{Strong, SystemModel, CENTRAL_LEAF_TOL};
use crate::torus::{self, Displacement, TorusPoint};

/// Largest one-step defect accepted as a true orbit when there is no centre.
pub const ORBIT_DEFECT_TOL: f64 = 1e-10;
/// Largest power tried when looking for `λ > 2 L0` in a single step.
pub const MAX_REDUCTION_POWER: u32 = 16;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShadowOptions {
    pub mu_hint: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingResult {
    /// the central pseudotrajectory, claimed bound `𝓛 d`
    pub y: Pseudotrajectory,
    /// stable / unstable pass points on the indices the passes ran on
    pub y_s: Vec<TorusPoint>,
    pub y_u: Vec<TorusPoint>,
    pub z_s: CorrectionSequence,
    pub z_u: CorrectionSequence,
    pub jumps: Vec<CentralJumpRecord>,
    pub sup_dist: f64,
    pub max_central_jump: f64,
    pub max_transversal_residual: f64,
    /// `max_k dist(f(y_k), y_{k+1})`, only when the centre is trivial
    pub orbit_defect: Option<f64>,
    pub constants: ShadowConstants,
    /// power of the map the passes ran on
    pub power: u32,
    /// Lipschitz constant for the original step (`𝓛` when `power = 1`)
    pub lipschitz: f64,
    pub d: f64,
    pub lemma1_violations: usize,
    pub diagnostics: Vec<String>,
    pub certified: bool,
}

/// File names recorded in the JSON report.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportFiles {
    pub input_csv: String,
    pub output_csv: String,
}

#[derive(Serialize)]
struct Report<'a> {
    constants: &'a ShadowConstants,
    d: f64,
    power: u32,
    lipschitz: f64,
    sup_dist: f64,
    max_central_jump: f64,
    max_transversal_residual: f64,
    orbit_defect: Option<f64>,
    lemma1_violations: usize,
    certified: bool,
    diagnostics: &'a [String],
    files: &'a ReportFiles,
    jumps: &'a [CentralJumpRecord],
}

impl ShadowingResult {
    /// The JSON report, with `jumps` listed last.
    pub fn report_json(&self, files: &ReportFiles) -> String {
        let r = Report {
            constants: &self.constants,
            d: self.d,
            power: self.power,
            lipschitz: self.lipschitz,
            sup_dist: self.sup_dist,
            max_central_jump: self.max_central_jump,
            max_transversal_residual: self.max_transversal_residual,
            orbit_defect: self.orbit_defect,
            lemma1_violations: self.lemma1_violations,
            certified: self.certified,
            diagnostics: &self.diagnostics,
            files,
            jumps: &self.jumps,
        };
        serde_json::to_string_pretty(&r).expect("report fields are finite")
    }
}

/// Smallest power of `sys` that contracts / expands in one step with
/// `λ > 2 L0`.
pub fn reduction_power(sys: &SystemModel) -> Result<u32> {
    for p in 1..=MAX_REDUCTION_POWER {
        let Ok(ps) = sys.system_power(p) else { break };
        let h = ps.hyperbolicity();
        if h.m == 1 && h.lambda > 2.0 * h.l0 {
            return Ok(p);
        }
    }
    Err(ShadowError::ConstantsInfeasible(format!(
        "no power up to {MAX_REDUCTION_POWER} has lambda > 2 L0"
    )))
}

pub(crate) struct Prepared {
    pub psys: SystemModel,
    /// every `power`-th point, claimed bound `d (1 + R + ... + R^{power-1})`
    pub sub: Pseudotrajectory,
    pub power: u32,
    pub constants: ShadowConstants,
    /// `1 + R + ... + R^{power-1}` with `R` the step bound of `sys`
    pub growth: f64,
}

pub(crate) fn prepare(sys: &SystemModel, traj: &Pseudotrajectory, mu_hint: Option<f64>) -> Result<Prepared> {
    if traj.dim() != sys.dim() {
        return Err(ShadowError::InvalidInput(format!(
            "trajectory has dimension {}, system has {}",
            traj.dim(),
            sys.dim()
        )));
    }
    let v = pseudotraj::validate(sys, traj)?;
    if !v.pass {
        return Err(ShadowError::InvalidInput(format!(
            "not a {}-pseudotrajectory: error {} at k = {}",
            traj.d(),
            v.max_error,
            v.worst_index.unwrap_or(0)
        )));
    }
    let power = reduction_power(sys)?;
    let psys = sys.system_power(power)?;
    let constants = derive_constants(psys.hyperbolicity(), psys.sup_df(), mu_hint)?;
    let r = sys.sup_df();
    let growth: f64 = (0..power).map(|i| r.powi(i as i32)).sum();
    let d_power = traj.d() * growth;
    if d_power > constants.d0 {
        return Err(ShadowError::StepTooLarge {
            d: traj.d(),
            d0: constants.d0 / growth,
        });
    }
    let sub: Vec<TorusPoint> = traj.points().iter().step_by(power as usize).cloned().collect();
    Ok(Prepared {
        psys,
        sub: Pseudotrajectory::new(sub, d_power)?,
        power,
        constants,
        growth,
    })
}

/// Runs the full construction with default options.
pub fn central_shadow(sys: &SystemModel, traj: &Pseudotrajectory) -> Result<ShadowingResult> {
    central_shadow_with(sys, traj, &ShadowOptions::default())
}

/// Builds the central pseudotrajectory shadowing `traj` and checks every
/// bound of the construction on it. Input errors and `d > d0` are returned
/// as errors; a broken bound yields `certified = false` with diagnostics.
pub fn central_shadow_with(
    sys: &SystemModel,
    traj: &Pseudotrajectory,
    opts: &ShadowOptions,
) -> Result<ShadowingResult> {
    let prep = prepare(sys, traj, opts.mu_hint)?;
    let (psys, sub, c) = (&prep.psys, &prep.sub, &prep.constants);
    let dp = sub.d();
    let ld = c.l * dp;
    let stable = passes::run_stable(psys, sub, c, &Displacement::zeros(psys.strong_dim(Strong::Stable)))?;
    let unstable = passes::run_unstable(psys, sub, c)?;
    let combined = passes::combine_detail(psys, &stable.points, &unstable.points, c, dp)?;

    let mut diagnostics = Vec::new();
    let lemma1_violations = stable.z.violations + unstable.z.violations;
    for (name, z) in [("stable", &stable.z), ("unstable", &unstable.z)] {
        if let Some((k, norm)) = z.first_violation {
            diagnostics.push(format!(
                "{name} pass: {} corrections above L d = {ld:e}, first at k = {k} with |z| = {norm:e}",
                z.violations
            ));
        }
    }
    for (name, run) in [("stable", &stable), ("unstable", &unstable)] {
        if run.max_weak_residual > CENTRAL_LEAF_TOL {
            diagnostics.push(format!(
                "{name} pass: consecutive points off the weak leaf by {:e}",
                run.max_weak_residual
            ));
        }
        if run.max_weak_dist > ld {
            diagnostics.push(format!(
                "{name} pass: weak-leaf step {:e} above L d = {ld:e}",
                run.max_weak_dist
            ));
        }
        if run.max_dist_to_x > 2.0 * ld {
            diagnostics.push(format!(
                "{name} pass: distance to the input {:e} above 2 L d = {:e}",
                run.max_dist_to_x,
                2.0 * ld
            ));
        }
    }
    if combined.max_leaf_dist > 4.0 * c.l0 * ld {
        diagnostics.push(format!(
            "combination: leaf distance {:e} above 4 L0 L d = {:e}",
            combined.max_leaf_dist,
            4.0 * c.l0 * ld
        ));
    }

    let p = prep.power as usize;
    let n = traj.points().len();
    let mut y: Vec<TorusPoint> = Vec::with_capacity(n);
    for k in 0..n {
        let next = if k % p == 0 {
            combined.points[k / p].clone()
        } else {
            sys.apply(&y[k - 1])?
        };
        y.push(next);
    }

    let lipschitz = if p == 1 {
        c.l_total
    } else {
        let r = sys.sup_df();
        let before_last: f64 = (0..p - 1).map(|i| r.powi(i as i32)).sum();
        before_last + r.powi(p as i32 - 1) * c.l_total * prep.growth
    };
    let eps = lipschitz * traj.d();
    let y = Pseudotrajectory::new(y, eps)?;
    let check = pseudotraj::verify_central(sys, &y, eps)?;
    let sup_dist = pseudotraj::shadowing_distance(traj, &y)?;

    let orbit_defect = if psys.center_dim() == 0 {
        let mut m = 0.0f64;
        for w in y.points().windows(2) {
            m = m.max(torus::toral_dist(&sys.apply(&w[0])?, &w[1])?);
        }
        if m > ORBIT_DEFECT_TOL {
            diagnostics.push(format!(
                "no centre but one-step defect {m:e} above {ORBIT_DEFECT_TOL:e}"
            ));
        }
        Some(m)
    } else {
        None
    };
    if sup_dist > eps {
        diagnostics.push(format!("sup distance {sup_dist:e} above {eps:e}"));
    }
    if check.max_central_dist > eps {
        diagnostics.push(format!(
            "central jump {:e} above {eps:e}",
            check.max_central_dist
        ));
    }
    if check.max_residual > CENTRAL_LEAF_TOL {
        diagnostics.push(format!(
            "jump off the central leaf by {:e}",
            check.max_residual
        ));
    }

    Ok(ShadowingResult {
        certified: diagnostics.is_empty(),
        y,
        y_s: stable.points,
        y_u: unstable.points,
        z_s: stable.z,
        z_u: unstable.z,
        max_central_jump: check.max_central_dist,
        max_transversal_residual: check.max_residual,
        jumps: check.records,
        sup_dist,
        orbit_defect,
        constants: prep.constants,
        power: prep.power,
        lipschitz,
        d: traj.d(),
        lemma1_violations,
        diagnostics,
    })
}
