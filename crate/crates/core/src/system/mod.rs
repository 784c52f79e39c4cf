//! Partially hyperbolic model maps on `T^2` / `T^3` with exactly known
//! invariant foliations.
//!
//! Two families are supported:
//!
//! * [`SystemKind::LinearPH`]: a unimodular integer matrix acting on `T^n`.
//!   The splitting is the real eigenspace decomposition (moduli below, equal
//!   to and above one) and every foliation is linear.
//! * [`SystemKind::SkewProductPH`]: a circle extension of a linear Anosov map
//!   of `T^2`. Central leaves are the circle fibers, weak leaves are products
//!   of base eigenlines with the fiber, and strong leaves are the graphs
//!   computed in [`skew`].
//!
//! Rates are stored for the `m`-th iterate of the model's step, where `m` is
//! the smallest power at which the strong bundles contract / expand in one
//! application.

mod leaves;
pub mod skew;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShadowError};
use crate::linalg::{self, IntMatrix, Spectrum};
use crate::torus::{self, TorusPoint};

pub use leaves::{IntersectionSide, LeafIntersection, WeakLeaf, CENTRAL_LEAF_TOL};
pub use skew::Strong;
use skew::SkewData;

/// Locality radius of the leaf-intersection solver for all toral models.
pub const DELTA0: f64 = 0.1;
/// Default truncation tolerance of the strong-leaf series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
/// Frames with a larger condition number are rejected by the leaf solver.
pub const MAX_FRAME_COND: f64 = 1e8;
const MAX_POWER: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    LinearPH,
    SkewProductPH,
}

/// Orthonormal bases of `E^s`, `E^c`, `E^u` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitFrame {
    pub basis_s: Vec<Vec<f64>>,
    pub basis_c: Vec<Vec<f64>>,
    pub basis_u: Vec<Vec<f64>>,
}

impl SplitFrame {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.basis_s.len(), self.basis_c.len(), self.basis_u.len())
    }

    /// Columns `[basis_s | basis_c | basis_u]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let cols: Vec<&Vec<f64>> = self
            .basis_s
            .iter()
            .chain(&self.basis_c)
            .chain(&self.basis_u)
            .collect();
        let n = cols.len();
        DMatrix::from_fn(n, n, |i, j| cols[j][i])
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix().singular_values();
        sv.max() / sv.min()
    }

    /// Operator norms of the oblique projections onto `E^s`, `E^c`, `E^u`,
    /// `E^cs`, `E^cu` along the complementary bundles.
    pub fn projection_norms(&self) -> Result<Vec<f64>> {
        let f = self.matrix();
        let inv = f
            .clone()
            .try_inverse()
            .ok_or(ShadowError::DegenerateFrame { cond: f64::INFINITY })?;
        let (s, c, _) = self.dims();
        let n = f.nrows();
        let proj = |lo: usize, hi: usize| -> f64 {
            if lo == hi {
                return 0.0;
            }
            let p = f.columns(lo, hi - lo) * inv.rows(lo, hi - lo);
            linalg::spectral_norm(&p)
        };
        Ok(vec![
            proj(0, s),
            proj(s, s + c),
            proj(s + c, n),
            proj(0, s + c),
            proj(s, n),
        ])
    }
}

/// Rates for the `m`-th iterate of the model step plus the constants of the
/// local product structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityData {
    pub nu: f64,
    pub nu_hat: f64,
    pub gamma: f64,
    pub gamma_hat: f64,
    pub lambda: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub delta0: f64,
    pub m: u32,
    pub l: u32,
}

impl HyperbolicityData {
    /// Builds the record from rates, filling `λ` and the minimal `l` with
    /// `λ^l > 2 L0`.
    pub fn from_rates(
        nu: f64,
        nu_hat: f64,
        gamma: f64,
        gamma_hat: f64,
        l0: f64,
        m: u32,
    ) -> Result<Self> {
        let lambda = (1.0 / nu).min(1.0 / nu_hat);
        let l = (1..=MAX_POWER)
            .find(|&l| lambda.powi(l as i32) > 2.0 * l0)
            .ok_or_else(|| {
                ShadowError::NotPartiallyHyperbolic(format!(
                    "no power l <= {MAX_POWER} with lambda^l > 2 L0 (lambda = {lambda})"
                ))
            })?;
        Ok(HyperbolicityData {
            nu,
            nu_hat,
            gamma,
            gamma_hat,
            lambda,
            l0,
            delta0: DELTA0,
            m,
            l,
        })
    }

    pub fn rates_ordered(&self) -> bool {
        self.nu < 1.0
            && self.nu_hat < 1.0
            && self.nu < self.gamma
            && self.gamma <= self.gamma_hat
            && self.gamma_hat < 1.0 / self.nu_hat
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LinearData {
    /// inverse of the frame matrix; rows are coefficient functionals
    frame_inv: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Linear(LinearData),
    Skew(SkewData),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    kind: SystemKind,
    /// matrix of the generating map (whole map, or the base for skew products)
    generator: IntMatrix,
    /// the model step is the `power`-th iterate of the generator
    power: u32,
    step_matrix: IntMatrix,
    step_inverse: IntMatrix,
    model: Model,
    frame: SplitFrame,
    frame_cond: f64,
    hyp: HyperbolicityData,
    sup_df: f64,
    series_tol: f64,
}

fn sub_block(a: &DMatrix<f64>, basis: &[Vec<f64>]) -> DMatrix<f64> {
    // Q^T A Q for an orthonormal basis Q of an A-invariant subspace
    let n = a.nrows();
    let k = basis.len();
    let q = DMatrix::from_fn(n, k, |i, j| basis[j][i]);
    q.transpose() * a * q
}

fn linear_rates(
    step: &IntMatrix,
    step_inv: &IntMatrix,
    frame: &SplitFrame,
    q: u32,
) -> Result<(f64, f64, f64, f64)> {
    let a = step.pow(q)?.to_dmatrix();
    let ainv = step_inv.pow(q)?.to_dmatrix();
    let nu = linalg::spectral_norm(&sub_block(&a, &frame.basis_s));
    let nu_hat = linalg::spectral_norm(&sub_block(&ainv, &frame.basis_u));
    let (gamma, gamma_hat) = if frame.basis_c.is_empty() {
        (1.0, 1.0)
    } else {
        let c = sub_block(&a, &frame.basis_c);
        (linalg::min_singular(&c), linalg::spectral_norm(&c))
    };
    Ok((nu, nu_hat, gamma, gamma_hat))
}

fn skew_rates(sk: &SkewData, q: u32) -> (f64, f64, f64, f64) {
    let ws = sk.slope_bound(Strong::Stable);
    let wu = sk.slope_bound(Strong::Unstable);
    let qi = q as i32;
    let nu = sk.mu_s.abs().powi(qi) * (1.0 + ws * ws).sqrt();
    let nu_hat = (1.0 + wu * wu).sqrt() / sk.mu_u.abs().powi(qi);
    (nu, nu_hat, 1.0, 1.0)
}

fn skew_l0(sk: &SkewData) -> f64 {
    // s∩cu: dist_s <= sqrt(1+W_s^2)|a|, dist_cu <= |(b, c + W_s a)|,
    // with (a, b) the base coefficients of the chart displacement.
    let bound = |w: f64, own: usize, other: usize| -> f64 {
        let al = sk.dual[own];
        let be = sk.dual[other];
        let strong = (1.0 + w * w).sqrt() * al[0].hypot(al[1]);
        let mut weak: f64 = 0.0;
        for sign in [-1.0, 1.0] {
            let m = DMatrix::from_row_slice(
                2,
                3,
                &[be[0], be[1], 0.0, sign * w * al[0], sign * w * al[1], 1.0],
            );
            weak = weak.max(linalg::spectral_norm(&m));
        }
        strong.max(weak)
    };
    let ws = sk.slope_bound(Strong::Stable);
    let wu = sk.slope_bound(Strong::Unstable);
    bound(ws, 0, 1).max(bound(wu, 1, 0))
}

fn floor_l0(l0: f64) -> f64 {
    l0.max(1.0 + 1e-12)
}

impl SystemModel {
    /// Linear partially hyperbolic automorphism of `T^n` (n = 2 or 3).
    pub fn build_linear(matrix: IntMatrix) -> Result<Self> {
        let det = matrix.det();
        if det.abs() != 1 {
            return Err(ShadowError::InvalidSystem(format!(
                "matrix is not unimodular (det = {det})"
            )));
        }
        let eig = match linalg::spectrum(&matrix) {
            Spectrum::Real(e) => e,
            Spectrum::Repeated(r) => {
                return Err(ShadowError::NotPartiallyHyperbolic(format!(
                    "repeated eigenvalue {r} of modulus one"
                )))
            }
            Spectrum::Complex { modulus, .. } => {
                return Err(ShadowError::NotPartiallyHyperbolic(format!(
                    "complex eigenvalue pair of modulus {modulus} has no one-dimensional rate band"
                )))
            }
        };
        let mut s = Vec::new();
        let mut c = Vec::new();
        let mut u = Vec::new();
        for e in &eig {
            let v = linalg::eigenvector(&matrix, e.value);
            if e.unit {
                c.push(v);
            } else if e.value.abs() < 1.0 {
                s.push(v);
            } else {
                u.push(v);
            }
        }
        if s.is_empty() || u.is_empty() {
            return Err(ShadowError::NotPartiallyHyperbolic(
                "no contracting or expanding direction".into(),
            ));
        }
        let frame = SplitFrame {
            basis_s: linalg::orthonormalize(&s),
            basis_c: linalg::orthonormalize(&c),
            basis_u: linalg::orthonormalize(&u),
        };
        let inverse = matrix.inverse_unimodular()?;
        Self::assemble_linear(matrix.clone(), 1, matrix, inverse, frame)
    }

    fn assemble_linear(
        generator: IntMatrix,
        power: u32,
        step: IntMatrix,
        step_inv: IntMatrix,
        frame: SplitFrame,
    ) -> Result<Self> {
        let frame_cond = frame.condition_number();
        let frame_inv = frame
            .matrix()
            .try_inverse()
            .ok_or(ShadowError::DegenerateFrame { cond: frame_cond })?;
        let l0 = floor_l0(
            frame
                .projection_norms()?
                .into_iter()
                .fold(0.0, f64::max),
        );
        let mut found = None;
        for q in 1..=MAX_POWER {
            let (nu, nu_hat, g, gh) = linear_rates(&step, &step_inv, &frame, q)?;
            let trial = HyperbolicityData::from_rates(nu, nu_hat, g, gh, l0, q);
            if let Ok(h) = trial {
                if h.rates_ordered() {
                    found = Some(h);
                    break;
                }
            }
        }
        let hyp = found.ok_or_else(|| {
            ShadowError::NotPartiallyHyperbolic("rate ordering fails for every power".into())
        })?;
        let sup_df = linalg::spectral_norm(&step.to_dmatrix());
        Ok(SystemModel {
            kind: SystemKind::LinearPH,
            generator,
            power,
            step_matrix: step,
            step_inverse: step_inv,
            model: Model::Linear(LinearData { frame_inv }),
            frame,
            frame_cond,
            hyp,
            sup_df,
            series_tol: DEFAULT_SERIES_TOL,
        })
    }

    /// Circle extension `(x, θ) ↦ (A x, θ + c0 + c1 sin(2π x_1))` of `T^3`.
    pub fn build_skew_product(base: IntMatrix, c0: f64, c1: f64, series_tol: f64) -> Result<Self> {
        let sk = SkewData::new(base.clone(), c0, c1, series_tol)?;
        Self::assemble_skew(sk, 1)
    }

    fn assemble_skew(sk: SkewData, power: u32) -> Result<Self> {
        let step = sk.base.pow(power)?;
        let step_inv = sk.base_inv.pow(power)?;
        let l0 = floor_l0(skew_l0(&sk));
        let mut found = None;
        for q in 1..=MAX_POWER {
            let (nu, nu_hat, g, gh) = skew_rates(&sk, power * q);
            if let Ok(h) = HyperbolicityData::from_rates(nu, nu_hat, g, gh, l0, q) {
                if h.rates_ordered() {
                    found = Some(h);
                    break;
                }
            }
        }
        let hyp = found.ok_or_else(|| {
            ShadowError::NotPartiallyHyperbolic("strong bundles never contract".into())
        })?;
        // sup |Df^p| <= max(|A^p|, 1) + Lip(φ) Σ_{j<p} |A^j|
        let mut grad = 0.0;
        for j in 0..power {
            grad += linalg::spectral_norm(&sk.base.pow(j)?.to_dmatrix());
        }
        let sup_df = linalg::spectral_norm(&step.to_dmatrix()).max(1.0) + sk.lip() * grad;
        let frame = Self::skew_frame(&sk, &[0.0, 0.0]);
        let frame_cond = frame.condition_number();
        let series_tol = sk.series_tol;
        Ok(SystemModel {
            kind: SystemKind::SkewProductPH,
            generator: sk.base.clone(),
            power,
            step_matrix: step,
            step_inverse: step_inv,
            model: Model::Skew(sk),
            frame,
            frame_cond,
            hyp,
            sup_df,
            series_tol,
        })
    }

    fn skew_frame(sk: &SkewData, base: &[f64]) -> SplitFrame {
        let unit = |v: [f64; 2], w: f64| {
            let n = (v[0] * v[0] + v[1] * v[1] + w * w).sqrt();
            vec![v[0] / n, v[1] / n, w / n]
        };
        SplitFrame {
            basis_s: vec![unit(sk.v_s, sk.strong_slope(Strong::Stable, base))],
            basis_c: vec![vec![0.0, 0.0, 1.0]],
            basis_u: vec![unit(sk.v_u, sk.strong_slope(Strong::Unstable, base))],
        }
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SystemKind::LinearPH => self.generator.dim(),
            SystemKind::SkewProductPH => 3,
        }
    }

    /// Matrix of the model step (the base matrix for skew products).
    pub fn matrix(&self) -> &IntMatrix {
        &self.step_matrix
    }

    pub fn generator(&self) -> &IntMatrix {
        &self.generator
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn fiber_params(&self) -> Option<(f64, f64)> {
        match &self.model {
            Model::Skew(sk) => Some((sk.c0, sk.c1)),
            Model::Linear(_) => None,
        }
    }

    pub fn hyperbolicity(&self) -> &HyperbolicityData {
        &self.hyp
    }

    /// `R = sup |Df|` of the model step (an upper bound for skew products).
    pub fn sup_df(&self) -> f64 {
        self.sup_df
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    /// Reference frame (constant for linear systems; at the base origin for
    /// skew products).
    pub fn frame(&self) -> &SplitFrame {
        &self.frame
    }

    pub fn frame_condition(&self) -> f64 {
        self.frame_cond
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.frame.dims()
    }

    pub fn center_dim(&self) -> usize {
        self.frame.basis_c.len()
    }

    pub fn frame_at(&self, x: &TorusPoint) -> SplitFrame {
        match &self.model {
            Model::Linear(_) => self.frame.clone(),
            Model::Skew(sk) => Self::skew_frame(sk, &x.coords()[..2]),
        }
    }

    fn check_point(&self, x: &TorusPoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(ShadowError::InvalidInput(format!(
                "point has dimension {}, system has {}",
                x.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// The model step `f`.
    pub fn apply(&self, x: &TorusPoint) -> Result<TorusPoint> {
        self.check_point(x)?;
        match &self.model {
            Model::Linear(_) => torus::wrap(&self.step_matrix.apply(x.coords())),
            Model::Skew(sk) => {
                let c = x.coords();
                let mut b = [c[0], c[1]];
                let mut th = c[2];
                for _ in 0..self.power {
                    th += sk.phi(&b);
                    b = sk.base_step(&b);
                }
                torus::wrap(&[b[0], b[1], th])
            }
        }
    }

    /// The inverse step `f^{-1}`.
    pub fn apply_inverse(&self, x: &TorusPoint) -> Result<TorusPoint> {
        self.check_point(x)?;
        match &self.model {
            Model::Linear(_) => torus::wrap(&self.step_inverse.apply(x.coords())),
            Model::Skew(sk) => {
                let c = x.coords();
                let mut b = [c[0], c[1]];
                let mut th = c[2];
                for _ in 0..self.power {
                    b = sk.base_step_inv(&b);
                    th -= sk.phi(&b);
                }
                torus::wrap(&[b[0], b[1], th])
            }
        }
    }

    /// `f^{-1}(y)` evaluated as a displacement from `anchor`, for `y` near
    /// `f(anchor)`. Exact when `y = f(anchor)`, and free of the cancellation
    /// that `apply_inverse` suffers from reducing large coordinates mod 1.
    pub fn apply_inverse_near(&self, anchor: &TorusPoint, y: &TorusPoint) -> Result<TorusPoint> {
        let fa = self.apply(anchor)?;
        let e = torus::chart_log(&fa, y)?;
        match &self.model {
            Model::Linear(_) => torus::translate(anchor, &self.step_inverse.apply(&e.comps)),
            Model::Skew(sk) => {
                let a = anchor.coords();
                let mut db = [e.comps[0], e.comps[1]];
                for _ in 0..self.power {
                    let v = sk.base_inv.apply(&db);
                    db = [v[0], v[1]];
                }
                let mut bq = [a[0] + db[0], a[1] + db[1]];
                let mut ba = [a[0], a[1]];
                let mut cocycle_gap = 0.0;
                for _ in 0..self.power {
                    cocycle_gap += sk.phi(&bq) - sk.phi(&ba);
                    bq = sk.base_step(&bq);
                    ba = sk.base_step(&ba);
                }
                let raw = [a[0] + db[0], a[1] + db[1], a[2] + e.comps[2] - cocycle_gap];
                torus::wrap(&raw)
            }
        }
    }

    /// Fiber increment of one model step at base point `x_b` (the composite
    /// cocycle `Σ_{j<p} φ(A^j x_b)` for a `p`-th power).
    pub fn fiber_increment(&self, x_b: &[f64]) -> Option<f64> {
        let Model::Skew(sk) = &self.model else {
            return None;
        };
        let mut b = [x_b[0], x_b[1]];
        let mut sum = 0.0;
        for _ in 0..self.power {
            sum += sk.phi(&b);
            b = sk.base_step(&b);
        }
        Some(sum)
    }

    /// Jacobian of the model step at `x`.
    pub fn differential(&self, x: &TorusPoint) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        match &self.model {
            Model::Linear(_) => Ok(self.step_matrix.to_dmatrix()),
            Model::Skew(sk) => {
                let mut b = [x.coords()[0], x.coords()[1]];
                let mut acc = DMatrix::<f64>::identity(3, 3);
                for _ in 0..self.power {
                    let mut j = DMatrix::<f64>::zeros(3, 3);
                    for r in 0..2 {
                        for s in 0..2 {
                            j[(r, s)] = sk.base.get(r, s) as f64;
                        }
                    }
                    j[(2, 0)] = sk.dphi(&b, &[1.0, 0.0]);
                    j[(2, 2)] = 1.0;
                    acc = j * acc;
                    b = sk.base_step(&b);
                }
                Ok(acc)
            }
        }
    }

    /// The `p`-th iterate as a model with the same foliations.
    pub fn system_power(&self, p: u32) -> Result<SystemModel> {
        if p == 0 {
            return Err(ShadowError::InvalidInput("power must be at least 1".into()));
        }
        if p == 1 {
            return Ok(self.clone());
        }
        let power = self.power.checked_mul(p).ok_or_else(|| {
            ShadowError::InvalidInput("power overflow".into())
        })?;
        match &self.model {
            Model::Linear(_) => Self::assemble_linear(
                self.generator.clone(),
                power,
                self.step_matrix.pow(p)?,
                self.step_inverse.pow(p)?,
                self.frame.clone(),
            ),
            Model::Skew(sk) => Self::assemble_skew(sk.clone(), power),
        }
    }

    fn skew(&self) -> Result<&SkewData> {
        match &self.model {
            Model::Skew(sk) => Ok(sk),
            Model::Linear(_) => Err(ShadowError::InvalidInput(
                "operation requires a skew product system".into(),
            )),
        }
    }

    fn strong_fiber_offset(&self, side: Strong, x_b: &TorusPoint, y_b: &TorusPoint) -> Result<f64> {
        let sk = self.skew()?;
        if x_b.dim() != 2 || y_b.dim() != 2 {
            return Err(ShadowError::InvalidInput("base points must be two-dimensional".into()));
        }
        let dist = torus::toral_dist(x_b, y_b)?;
        if dist >= self.hyp.delta0 {
            return Err(ShadowError::ChartDomainExceeded {
                norm: dist,
                limit: self.hyp.delta0,
            });
        }
        let v = torus::chart_log(x_b, y_b)?;
        let (a, b) = sk.base_coeffs(&v.comps);
        let (along, across) = match side {
            Strong::Stable => (a, b),
            Strong::Unstable => (b, a),
        };
        if across.abs() > CENTRAL_LEAF_TOL {
            return Err(ShadowError::NotOnLeaf {
                residual: across.abs(),
            });
        }
        Ok(sk.strong_offset(side, x_b.coords(), along))
    }

    /// Fiber offset `θ(y_b) - θ(x_b)` of the strong stable leaf over the base
    /// stable line, `Σ_{k≥0} φ(A^k x_b) - φ(A^k y_b)`.
    pub fn strong_stable_fiber_offset(&self, x_b: &TorusPoint, y_b: &TorusPoint) -> Result<f64> {
        self.strong_fiber_offset(Strong::Stable, x_b, y_b)
    }

    /// Fiber offset of the strong unstable leaf,
    /// `Σ_{k≥1} φ(A^{-k} y_b) - φ(A^{-k} x_b)`.
    pub fn strong_unstable_fiber_offset(&self, x_b: &TorusPoint, y_b: &TorusPoint) -> Result<f64> {
        self.strong_fiber_offset(Strong::Unstable, x_b, y_b)
    }
}

/// Free-function form of [`SystemModel::system_power`].
pub fn system_power(sys: &SystemModel, p: u32) -> Result<SystemModel> {
    sys.system_power(p)
}
