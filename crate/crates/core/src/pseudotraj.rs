//! Finite `d`-pseudotrajectories: generation, validation, central-jump
//! verification and CSV round-tripping.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, ShadowError};
use crate::system::{SystemModel, CENTRAL_LEAF_TOL};
use crate::torus::{self, Displacement, TorusPoint};

/// A finite sequence `x_0, ..., x_N` with a claimed one-step error bound `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudotrajectory {
    points: Vec<TorusPoint>,
    d: f64,
}

/// One step of a central pseudotrajectory: how far `f(y_k)` is from
/// `y_{k+1}` along the central leaf, and how far off that leaf it sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentralJumpRecord {
    pub k: usize,
    pub central_dist: f64,
    pub transversal_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub max_error: f64,
    /// `k` with the largest `dist(f(x_k), x_{k+1})`; `None` for a single point
    pub worst_index: Option<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralVerification {
    pub records: Vec<CentralJumpRecord>,
    pub max_central_dist: f64,
    pub max_residual: f64,
    pub pass: bool,
}

impl Pseudotrajectory {
    pub fn new(points: Vec<TorusPoint>, d: f64) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(ShadowError::InvalidInput("empty trajectory".into()));
        };
        let n = first.dim();
        if let Some(k) = points.iter().position(|p| p.dim() != n) {
            return Err(ShadowError::InvalidInput(format!(
                "point {k} has dimension {}, expected {n}",
                points[k].dim()
            )));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(ShadowError::InvalidInput(format!(
                "claimed error bound {d} must be finite and nonnegative"
            )));
        }
        Ok(Pseudotrajectory { points, d })
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Number of steps `N` (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn with_d(mut self, d: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(ShadowError::InvalidInput(format!(
                "claimed error bound {d} must be finite and nonnegative"
            )));
        }
        self.d = d;
        Ok(self)
    }

    /// Writes `k,c1,...,cn` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("c{i}")).collect();
        writeln!(w, "k,{}", header.join(","))?;
        for (k, p) in self.points.iter().enumerate() {
            write!(w, "{k}")?;
            for c in p.coords() {
                write!(w, ",{c:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    /// Reads the format of [`write_csv`](Self::write_csv); the claimed bound
    /// is not part of the file and must be supplied.
    pub fn read_csv<R: BufRead>(r: R, d: f64) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| ShadowError::InvalidInput("empty csv".into()))?
            .map_err(|e| ShadowError::InvalidInput(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        let n = cols.len().saturating_sub(1);
        let expected: Vec<String> = (1..=n).map(|i| format!("c{i}")).collect();
        if n == 0 || cols[0] != "k" || cols[1..] != expected.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            return Err(ShadowError::InvalidInput(format!("bad csv header '{header}'")));
        }
        let mut points = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line.map_err(|e| ShadowError::InvalidInput(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != n + 1 {
                return Err(ShadowError::InvalidInput(format!(
                    "row {row}: expected {} fields, got {}",
                    n + 1,
                    fields.len()
                )));
            }
            if fields[0].parse::<usize>().ok() != Some(points.len()) {
                return Err(ShadowError::InvalidInput(format!(
                    "row {row}: index '{}' out of sequence",
                    fields[0]
                )));
            }
            let coords = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| ShadowError::InvalidInput(format!("row {row}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            points.push(torus::wrap(&coords)?);
        }
        Pseudotrajectory::new(points, d)
    }
}

/// Uniform sample from the closed Euclidean ball of radius `r` in `R^n`.
fn ball_sample(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Displacement {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let v = Displacement::new(v);
        if v.norm() <= 1.0 {
            return v.scaled(r);
        }
    }
}

fn check_len(x0: &TorusPoint, sys: &SystemModel, n_steps: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(ShadowError::InvalidInput("N must be positive".into()));
    }
    if x0.dim() != sys.dim() {
        return Err(ShadowError::InvalidInput(format!(
            "x0 has dimension {}, system has {}",
            x0.dim(),
            sys.dim()
        )));
    }
    Ok(())
}

/// `x_{k+1} = exp(f(x_k), η_k)` with `η_k` uniform in the ball of radius `d`.
pub fn generate_noisy(
    sys: &SystemModel,
    x0: &TorusPoint,
    n_steps: usize,
    d: f64,
    seed: u64,
) -> Result<Pseudotrajectory> {
    check_len(x0, sys, n_steps)?;
    let delta0 = sys.hyperbolicity().delta0;
    if !(d >= 0.0 && d < delta0) {
        return Err(ShadowError::InvalidInput(format!(
            "noise level {d} must lie in [0, {delta0})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_steps + 1);
    points.push(x0.clone());
    for _ in 0..n_steps {
        let fx = sys.apply(points.last().unwrap())?;
        // wrapping can add an ulp to the realised distance; redraw in that case
        let next = loop {
            let eta = ball_sample(&mut rng, sys.dim(), d);
            let y = torus::chart_exp(&fx, &eta)?;
            if torus::toral_dist(&fx, &y)? <= d {
                break y;
            }
        };
        points.push(next);
    }
    Pseudotrajectory::new(points, d)
}

/// Rounds every image `f(x_k)` to the lattice `g Z^n`; the claimed bound is
/// `g √n / 2`.
pub fn generate_rounded(
    sys: &SystemModel,
    x0: &TorusPoint,
    n_steps: usize,
    grid: f64,
) -> Result<Pseudotrajectory> {
    check_len(x0, sys, n_steps)?;
    let n = sys.dim() as f64;
    let limit = sys.hyperbolicity().delta0 / n.sqrt();
    if !(grid > 0.0 && grid < limit) {
        return Err(ShadowError::InvalidInput(format!(
            "grid {grid} must lie in (0, {limit})"
        )));
    }
    let mut points = Vec::with_capacity(n_steps + 1);
    points.push(x0.clone());
    for _ in 0..n_steps {
        let fx = sys.apply(points.last().unwrap())?;
        let rounded: Vec<f64> = fx.coords().iter().map(|c| (c / grid).round() * grid).collect();
        points.push(torus::wrap(&rounded)?);
    }
    Pseudotrajectory::new(points, grid * n.sqrt() / 2.0)
}

/// Largest one-step error `dist(f(x_k), x_{k+1})` against the claimed bound.
pub fn validate(sys: &SystemModel, traj: &Pseudotrajectory) -> Result<ValidationReport> {
    let mut max_error = 0.0;
    let mut worst_index = None;
    for (k, w) in traj.points.windows(2).enumerate() {
        let e = torus::toral_dist(&sys.apply(&w[0])?, &w[1])?;
        if worst_index.is_none() || e > max_error {
            max_error = e;
            worst_index = Some(k);
        }
    }
    Ok(ValidationReport {
        max_error,
        worst_index,
        pass: max_error <= traj.d,
    })
}

/// Central jumps `f(y_k) → y_{k+1}`; passes iff every transversal residual is
/// within the leaf tolerance and every central distance is at most `eps`.
pub fn verify_central(
    sys: &SystemModel,
    traj: &Pseudotrajectory,
    eps: f64,
) -> Result<CentralVerification> {
    let mut records = Vec::with_capacity(traj.steps());
    for (k, w) in traj.points.windows(2).enumerate() {
        let (central_dist, transversal_residual) = sys.central_decomposition(&sys.apply(&w[0])?, &w[1])?;
        records.push(CentralJumpRecord {
            k,
            central_dist,
            transversal_residual,
        });
    }
    let max_central_dist = records.iter().map(|r| r.central_dist).fold(0.0, f64::max);
    let max_residual = records
        .iter()
        .map(|r| r.transversal_residual)
        .fold(0.0, f64::max);
    Ok(CentralVerification {
        pass: max_residual <= CENTRAL_LEAF_TOL && max_central_dist <= eps,
        records,
        max_central_dist,
        max_residual,
    })
}

/// `max_k dist(x_k, y_k)`.
pub fn shadowing_distance(x: &Pseudotrajectory, y: &Pseudotrajectory) -> Result<f64> {
    if x.points.len() != y.points.len() {
        return Err(ShadowError::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.points.len(),
            y.points.len()
        )));
    }
    let mut max = 0.0f64;
    for (a, b) in x.points.iter().zip(&y.points) {
        max = max.max(torus::toral_dist(a, b)?);
    }
    Ok(max)
}
