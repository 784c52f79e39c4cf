//! Circle extensions `(x, θ) ↦ (A x, θ + φ(x))` over a linear Anosov map of
//! `T^2`, with `φ(x) = c0 + c1 sin(2π x_1)`.
//!
//! Strong leaves are graphs over the base eigenlines. Their fiber offsets and
//! slopes are the standard cocycle series, summed until the geometric tail
//! bound drops below `series_tol`.

use std::f64::consts::PI;

use crate::linalg::{self, IntMatrix, Spectrum};
use crate::error::{Result, ShadowError};

const MAX_TERMS: usize = 400;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, 8 points.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];
const PANEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strong {
    Stable,
    Unstable,
}

/// Base eigen-data and fiber map of a skew product generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewData {
    pub base: IntMatrix,
    pub base_inv: IntMatrix,
    pub c0: f64,
    pub c1: f64,
    /// signed stable / unstable eigenvalues of the base
    pub mu_s: f64,
    pub mu_u: f64,
    pub v_s: [f64; 2],
    pub v_u: [f64; 2],
    /// rows are the coefficient functionals of the base frame (v_s, v_u)
    pub dual: [[f64; 2]; 2],
    pub series_tol: f64,
}

fn wrap1(c: f64) -> f64 {
    let r = c - c.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl SkewData {
    pub fn new(base: IntMatrix, c0: f64, c1: f64, series_tol: f64) -> Result<Self> {
        if base.dim() != 2 {
            return Err(ShadowError::InvalidSystem(
                "skew product base must be a 2x2 matrix".into(),
            ));
        }
        if base.det().abs() != 1 {
            return Err(ShadowError::InvalidSystem(format!(
                "base determinant {} is not +-1",
                base.det()
            )));
        }
        if !c0.is_finite() || !c1.is_finite() {
            return Err(ShadowError::InvalidSystem("fiber parameters must be finite".into()));
        }
        if !(series_tol.is_finite() && series_tol > 0.0) {
            return Err(ShadowError::InvalidSystem("series_tol must be positive".into()));
        }
        let eig = match linalg::spectrum(&base) {
            Spectrum::Real(e) if e.iter().all(|r| !r.unit) => e,
            _ => {
                return Err(ShadowError::InvalidSystem(
                    "base matrix is not Anosov (eigenvalue on the unit circle)".into(),
                ))
            }
        };
        let mu_s = eig[0].value;
        let mu_u = eig[1].value;
        let vs = linalg::eigenvector(&base, mu_s);
        let vu = linalg::eigenvector(&base, mu_u);
        let v_s = [vs[0], vs[1]];
        let v_u = [vu[0], vu[1]];
        let det = v_s[0] * v_u[1] - v_u[0] * v_s[1];
        let dual = [
            [v_u[1] / det, -v_u[0] / det],
            [-v_s[1] / det, v_s[0] / det],
        ];
        let base_inv = base.inverse_unimodular()?;
        Ok(SkewData {
            base,
            base_inv,
            c0,
            c1,
            mu_s,
            mu_u,
            v_s,
            v_u,
            dual,
            series_tol,
        })
    }

    pub fn lip(&self) -> f64 {
        2.0 * PI * self.c1.abs()
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        self.c0 + self.c1 * (2.0 * PI * x[0]).sin()
    }

    /// Derivative of `φ` at `x` in the direction `dir`.
    pub fn dphi(&self, x: &[f64], dir: &[f64]) -> f64 {
        2.0 * PI * self.c1 * (2.0 * PI * x[0]).cos() * dir[0]
    }

    /// `φ(p) - φ(p + δ)` for a displacement with first component `delta`,
    /// written to avoid cancellation for small `delta`.
    fn phi_drop(&self, p0: f64, delta: f64) -> f64 {
        -2.0 * self.c1 * (PI * (2.0 * p0 + delta)).cos() * (PI * delta).sin()
    }

    pub fn base_step(&self, x: &[f64]) -> [f64; 2] {
        let v = self.base.apply(x);
        [wrap1(v[0]), wrap1(v[1])]
    }

    pub fn base_step_inv(&self, x: &[f64]) -> [f64; 2] {
        let v = self.base_inv.apply(x);
        [wrap1(v[0]), wrap1(v[1])]
    }

    /// Coordinates of a base displacement in the (v_s, v_u) frame.
    pub fn base_coeffs(&self, v: &[f64]) -> (f64, f64) {
        (
            self.dual[0][0] * v[0] + self.dual[0][1] * v[1],
            self.dual[1][0] * v[0] + self.dual[1][1] * v[1],
        )
    }

    pub fn direction(&self, side: Strong) -> [f64; 2] {
        match side {
            Strong::Stable => self.v_s,
            Strong::Unstable => self.v_u,
        }
    }

    /// Per-step factor by which the strong displacement shrinks along the
    /// series (|μ_s| forward, 1/|μ_u| backward).
    fn ratio(&self, side: Strong) -> f64 {
        match side {
            Strong::Stable => self.mu_s.abs(),
            Strong::Unstable => 1.0 / self.mu_u.abs(),
        }
    }

    fn terms_needed(&self, side: Strong, scale: f64) -> usize {
        let r = self.ratio(side);
        let amp = self.lip() * scale;
        if amp == 0.0 {
            return 0;
        }
        // amp * r^k / (1 - r) < tol
        let mut k = 0;
        let mut tail = amp / (1.0 - r);
        while tail >= self.series_tol && k < MAX_TERMS {
            tail *= r;
            k += 1;
        }
        k
    }

    /// Fiber offset of the strong leaf through `(x_b, θ)` above the base
    /// point `x_b + t v`, where `v` is the unit stable (unstable) eigenvector.
    pub fn strong_offset(&self, side: Strong, x_b: &[f64], t: f64) -> f64 {
        if t == 0.0 || self.c1 == 0.0 {
            return 0.0;
        }
        let dir0 = self.direction(side)[0];
        let n = self.terms_needed(side, (t * dir0).abs());
        let mut sum = 0.0;
        match side {
            Strong::Stable => {
                // Σ_{k≥0} φ(A^k x) - φ(A^k x + t μ_s^k v_s)
                let mut p = [x_b[0], x_b[1]];
                let mut delta = t * dir0;
                for _ in 0..n.max(1) {
                    sum += self.phi_drop(p[0], delta);
                    p = self.base_step(&p);
                    delta *= self.mu_s;
                }
            }
            Strong::Unstable => {
                // Σ_{k≥1} φ(A^{-k} x + t μ_u^{-k} v_u) - φ(A^{-k} x)
                let mut p = self.base_step_inv(x_b);
                let mut delta = t * dir0 / self.mu_u;
                for _ in 0..n.max(1) {
                    sum -= self.phi_drop(p[0], delta);
                    p = self.base_step_inv(&p);
                    delta /= self.mu_u;
                }
            }
        }
        sum
    }

    /// Slope of the strong leaf over its base eigenline at base point `p`:
    /// the fiber component of the tangent `(v, w)`.
    pub fn strong_slope(&self, side: Strong, p: &[f64]) -> f64 {
        if self.c1 == 0.0 {
            return 0.0;
        }
        let dir0 = self.direction(side)[0];
        let n = self.terms_needed(side, dir0.abs()).max(1);
        let amp = 2.0 * PI * self.c1 * dir0;
        let mut sum = 0.0;
        match side {
            Strong::Stable => {
                let mut q = [p[0], p[1]];
                let mut factor = 1.0;
                for _ in 0..n {
                    sum -= factor * (2.0 * PI * q[0]).cos();
                    q = self.base_step(&q);
                    factor *= self.mu_s;
                }
            }
            Strong::Unstable => {
                let mut q = self.base_step_inv(p);
                let mut factor = 1.0 / self.mu_u;
                for _ in 0..n {
                    sum += factor * (2.0 * PI * q[0]).cos();
                    q = self.base_step_inv(&q);
                    factor /= self.mu_u;
                }
            }
        }
        amp * sum
    }

    /// Upper bound on `|strong_slope|` over the whole base.
    pub fn slope_bound(&self, side: Strong) -> f64 {
        let dir0 = self.direction(side)[0].abs();
        let r = self.ratio(side);
        match side {
            Strong::Stable => self.lip() * dir0 / (1.0 - r),
            Strong::Unstable => self.lip() * dir0 * r / (1.0 - r),
        }
    }

    fn point_on_line(&self, side: Strong, x_b: &[f64], t: f64) -> [f64; 2] {
        let d = self.direction(side);
        [wrap1(x_b[0] + t * d[0]), wrap1(x_b[1] + t * d[1])]
    }

    /// Signed arc length of the strong leaf from base parameter 0 to `t`.
    pub fn arc_length(&self, side: Strong, x_b: &[f64], t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        if self.c1 == 0.0 {
            return t;
        }
        let panels = ((t.abs() / PANEL).ceil() as usize).max(1);
        let h = t / panels as f64;
        let mut total = 0.0;
        for j in 0..panels {
            let mid = (j as f64 + 0.5) * h;
            for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let tau = mid + 0.5 * h * node;
                let w = self.strong_slope(side, &self.point_on_line(side, x_b, tau));
                total += weight * (1.0 + w * w).sqrt();
            }
        }
        total * 0.5 * h
    }

    /// Base parameter `t` whose leaf arc length from `x_b` equals `s`.
    pub fn param_for_arc(&self, side: Strong, x_b: &[f64], s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        if self.c1 == 0.0 {
            return s;
        }
        let w0 = self.strong_slope(side, x_b);
        let mut t = s / (1.0 + w0 * w0).sqrt();
        for _ in 0..50 {
            let g = self.arc_length(side, x_b, t) - s;
            let w = self.strong_slope(side, &self.point_on_line(side, x_b, t));
            let step = g / (1.0 + w * w).sqrt();
            t -= step;
            if step.abs() <= 4.0 * f64::EPSILON * t.abs() {
                break;
            }
        }
        t
    }

    /// Base part of the strong-leaf point at parameter `t`, with its fiber.
    pub fn leaf_point(&self, side: Strong, x: &[f64], t: f64) -> [f64; 3] {
        let b = self.point_on_line(side, &x[..2], t);
        [b[0], b[1], wrap1(x[2] + self.strong_offset(side, &x[..2], t))]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(c1: f64) -> SkewData {
        let a = IntMatrix::new(vec![vec![2, 1], vec![1, 1]]).unwrap();
        SkewData::new(a, 0.0, c1, 1e-12).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_degree_15_exactly() {
        let f = |x: f64| x.powi(14) + 3.0 * x.powi(7) + 1.0;
        let q: f64 = GL_NODES.iter().zip(GL_WEIGHTS).map(|(x, w)| w * f(*x)).sum();
        assert!((q - (2.0 / 15.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_gives_flat_leaves() {
        let s = cat(0.0);
        assert_eq!(s.strong_offset(Strong::Stable, &[0.3, 0.7], 0.05), 0.0);
        assert_eq!(s.strong_slope(Strong::Unstable, &[0.3, 0.7]), 0.0);
        assert_eq!(s.arc_length(Strong::Stable, &[0.3, 0.7], -0.02), -0.02);
    }

    #[test]
    fn offset_derivative_is_slope() {
        let s = cat(0.1);
        let x = [0.3, 0.7];
        for side in [Strong::Stable, Strong::Unstable] {
            for t in [0.0, 0.013, -0.04] {
                let h = 1e-4;
                let fd = (s.strong_offset(side, &x, t + h) - s.strong_offset(side, &x, t - h))
                    / (2.0 * h);
                let p = s.point_on_line(side, &x, t);
                let w = s.strong_slope(side, &p);
                assert!((fd - w).abs() < 1e-6, "{side:?} t={t}: {fd} vs {w}");
                assert!(w.abs() <= s.slope_bound(side));
            }
        }
    }

    #[test]
    fn arc_length_inverts() {
        let s = cat(0.1);
        let x = [0.12, 0.55];
        for side in [Strong::Stable, Strong::Unstable] {
            for target in [1e-7, 3e-3, -0.07] {
                let t = s.param_for_arc(side, &x, target);
                let back = s.arc_length(side, &x, t);
                assert!((back - target).abs() < 1e-15 + 1e-13 * target.abs());
                assert!(t.abs() <= target.abs());
            }
        }
    }

    #[test]
    fn arc_length_matches_polyline() {
        // independent check: length of a fine polyline through leaf points
        let s = cat(0.1);
        let x = [0.3, 0.7, 0.0];
        let t = 0.08;
        let n = 20_000;
        let mut len = 0.0;
        let mut prev = [0.0, 0.0, 0.0];
        for i in 1..=n {
            let tau = t * i as f64 / n as f64;
            let th = s.strong_offset(Strong::Stable, &x[..2], tau);
            let cur = [tau * s.v_s[0], tau * s.v_s[1], th];
            len += ((cur[0] - prev[0]).powi(2) + (cur[1] - prev[1]).powi(2) + (cur[2] - prev[2]).powi(2)).sqrt();
            prev = cur;
        }
        let arc = s.arc_length(Strong::Stable, &x[..2], t);
        assert!((arc - len).abs() < 1e-9, "{arc} vs {len}");
    }
}
