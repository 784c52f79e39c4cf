//! Local leaf geometry: strong-leaf charts, the local product structure
//! `W^s(x) ∩ W^cu(y)` / `W^u(x) ∩ W^cs(y)`, and distances along central and
//! weak leaves.

use serde::Serialize;

use super::skew::Strong;
use super::{Model, SystemModel, MAX_FRAME_COND};
use crate::error::{Result, ShadowError};
use crate::linalg;
use crate::torus::{self, min_rep, Displacement, TorusPoint, CHART_RADIUS};

/// Transversal tolerance for "lies on the same leaf".
pub const CENTRAL_LEAF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntersectionSide {
    /// `W^s(x) ∩ W^cu(y)`
    StableCenterUnstable,
    /// `W^u(x) ∩ W^cs(y)`
    UnstableCenterStable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeakLeaf {
    CenterStable,
    CenterUnstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafIntersection {
    pub point: TorusPoint,
    /// leaf distance from `x` along its strong leaf
    pub strong_dist: f64,
    /// leaf distance from `y` along its weak leaf
    pub weak_dist: f64,
}

struct LinearParts {
    s: Vec<f64>,
    c: Vec<f64>,
    u: Vec<f64>,
}

impl SystemModel {
    fn linear_parts(&self, v: &[f64]) -> LinearParts {
        let Model::Linear(lin) = &self.model else {
            unreachable!("linear_parts on a skew product")
        };
        let n = v.len();
        let coeff: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| lin.frame_inv[(i, j)] * v[j]).sum())
            .collect();
        let (s, c, _) = self.frame.dims();
        LinearParts {
            s: coeff[..s].to_vec(),
            c: coeff[s..s + c].to_vec(),
            u: coeff[s + c..].to_vec(),
        }
    }

    fn combine_basis(&self, parts: &[(&[Vec<f64>], &[f64])]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (basis, coeffs) in parts {
            for (b, c) in basis.iter().zip(coeffs.iter()) {
                out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
            }
        }
        out
    }

    pub fn strong_dim(&self, side: Strong) -> usize {
        match side {
            Strong::Stable => self.frame.basis_s.len(),
            Strong::Unstable => self.frame.basis_u.len(),
        }
    }

    /// Exponential chart along the strong leaf of `x`: `coords` are leaf
    /// coordinates in an orthonormal basis of `E^τ(x)` (arc length for the
    /// one-dimensional leaves of skew products).
    pub fn strong_exp(&self, x: &TorusPoint, side: Strong, coords: &[f64]) -> Result<TorusPoint> {
        if coords.len() != self.strong_dim(side) {
            return Err(ShadowError::InvalidInput(format!(
                "expected {} strong coordinates, got {}",
                self.strong_dim(side),
                coords.len()
            )));
        }
        let norm = linalg::norm(coords);
        if norm >= CHART_RADIUS {
            return Err(ShadowError::ChartDomainExceeded {
                norm,
                limit: CHART_RADIUS,
            });
        }
        match &self.model {
            Model::Linear(_) => {
                let basis = match side {
                    Strong::Stable => &self.frame.basis_s,
                    Strong::Unstable => &self.frame.basis_u,
                };
                let v = self.combine_basis(&[(basis, coords)]);
                torus::chart_exp(x, &Displacement::new(v))
            }
            Model::Skew(sk) => {
                let c = x.coords();
                let t = sk.param_for_arc(side, &c[..2], coords[0]);
                torus::wrap(&sk.leaf_point(side, c, t))
            }
        }
    }

    /// Inverse of [`strong_exp`](Self::strong_exp); fails with `NotOnLeaf`
    /// when `y` is off the strong leaf of `x` by more than the leaf tolerance.
    pub fn strong_log(&self, x: &TorusPoint, side: Strong, y: &TorusPoint) -> Result<Vec<f64>> {
        let v = torus::chart_log(x, y)?;
        match &self.model {
            Model::Linear(_) => {
                let p = self.linear_parts(&v.comps);
                let (own, rest) = match side {
                    Strong::Stable => (p.s, self.combine_basis(&[(&self.frame.basis_c, &p.c), (&self.frame.basis_u, &p.u)])),
                    Strong::Unstable => (p.u, self.combine_basis(&[(&self.frame.basis_s, &p.s), (&self.frame.basis_c, &p.c)])),
                };
                let residual = linalg::norm(&rest);
                if residual > CENTRAL_LEAF_TOL {
                    return Err(ShadowError::NotOnLeaf { residual });
                }
                Ok(own)
            }
            Model::Skew(sk) => {
                let (a, b) = sk.base_coeffs(&v.comps[..2]);
                let (along, across) = match side {
                    Strong::Stable => (a, b),
                    Strong::Unstable => (b, a),
                };
                let xc = x.coords();
                let expected = xc[2] + sk.strong_offset(side, &xc[..2], along);
                let fiber_gap = min_rep(y.coords()[2] - expected);
                let residual = across.hypot(fiber_gap);
                if residual > CENTRAL_LEAF_TOL {
                    return Err(ShadowError::NotOnLeaf { residual });
                }
                Ok(vec![sk.arc_length(side, &xc[..2], along)])
            }
        }
    }

    /// The unique local intersection `W^s(x) ∩ W^cu(y)` (or `W^u(x) ∩ W^cs(y)`)
    /// for `dist(x, y) < delta <= δ0`.
    pub fn leaf_intersection(
        &self,
        x: &TorusPoint,
        y: &TorusPoint,
        side: IntersectionSide,
        delta: f64,
    ) -> Result<LeafIntersection> {
        if !(delta > 0.0 && delta <= self.hyp.delta0) {
            return Err(ShadowError::InvalidInput(format!(
                "intersection radius {delta} must lie in (0, {}]",
                self.hyp.delta0
            )));
        }
        let dist = torus::toral_dist(x, y)?;
        if dist >= delta {
            return Err(ShadowError::TooFarApart { dist, limit: delta });
        }
        if self.frame_cond > MAX_FRAME_COND {
            return Err(ShadowError::DegenerateFrame {
                cond: self.frame_cond,
            });
        }
        let v = torus::chart_log(x, y)?;
        match &self.model {
            Model::Linear(_) => {
                let p = self.linear_parts(&v.comps);
                let f = &self.frame;
                let (strong, weak) = match side {
                    IntersectionSide::StableCenterUnstable => (
                        self.combine_basis(&[(&f.basis_s, &p.s)]),
                        self.combine_basis(&[(&f.basis_c, &p.c), (&f.basis_u, &p.u)]),
                    ),
                    IntersectionSide::UnstableCenterStable => (
                        self.combine_basis(&[(&f.basis_u, &p.u)]),
                        self.combine_basis(&[(&f.basis_s, &p.s), (&f.basis_c, &p.c)]),
                    ),
                };
                Ok(LeafIntersection {
                    point: torus::translate(x, &strong)?,
                    strong_dist: linalg::norm(&strong),
                    weak_dist: linalg::norm(&weak),
                })
            }
            Model::Skew(sk) => {
                let (a, b) = sk.base_coeffs(&v.comps[..2]);
                let (strong_side, along, across) = match side {
                    IntersectionSide::StableCenterUnstable => (Strong::Stable, a, b),
                    IntersectionSide::UnstableCenterStable => (Strong::Unstable, b, a),
                };
                let xc = x.coords();
                let z = torus::wrap(&sk.leaf_point(strong_side, xc, along))?;
                let fiber_gap = min_rep(z.coords()[2] - y.coords()[2]);
                Ok(LeafIntersection {
                    strong_dist: sk.arc_length(strong_side, &xc[..2], along).abs(),
                    weak_dist: across.hypot(fiber_gap),
                    point: z,
                })
            }
        }
    }

    /// Central-leaf distance of `y` from `x` together with the transversal
    /// residual (how far `y` is from the central leaf of `x`).
    pub fn central_decomposition(&self, x: &TorusPoint, y: &TorusPoint) -> Result<(f64, f64)> {
        let dist = torus::toral_dist(x, y)?;
        match &self.model {
            Model::Linear(_) => {
                let Ok(v) = torus::chart_log(x, y) else {
                    return Ok((dist, dist));
                };
                let p = self.linear_parts(&v.comps);
                let f = &self.frame;
                let center = self.combine_basis(&[(&f.basis_c, &p.c)]);
                let rest = self.combine_basis(&[(&f.basis_s, &p.s), (&f.basis_u, &p.u)]);
                Ok((linalg::norm(&center), linalg::norm(&rest)))
            }
            Model::Skew(_) => {
                let (xc, yc) = (x.coords(), y.coords());
                let residual = min_rep(yc[0] - xc[0]).hypot(min_rep(yc[1] - xc[1]));
                Ok((min_rep(yc[2] - xc[2]).abs(), residual))
            }
        }
    }

    /// Inner distance along the common central leaf of `x` and `y`.
    pub fn central_leaf_distance(&self, x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
        let (d, residual) = self.central_decomposition(x, y)?;
        if residual > CENTRAL_LEAF_TOL {
            return Err(ShadowError::NotOnLeaf { residual });
        }
        Ok(d)
    }

    /// Distance from `x` to `y` along the weak leaf `W^cs(x)` / `W^cu(x)`,
    /// with the residual of `y` off that leaf.
    pub fn weak_leaf_membership(
        &self,
        x: &TorusPoint,
        y: &TorusPoint,
        leaf: WeakLeaf,
    ) -> Result<(f64, f64)> {
        let v = torus::chart_log(x, y)?;
        match &self.model {
            Model::Linear(_) => {
                let p = self.linear_parts(&v.comps);
                let f = &self.frame;
                let (inside, off) = match leaf {
                    WeakLeaf::CenterUnstable => (
                        self.combine_basis(&[(&f.basis_c, &p.c), (&f.basis_u, &p.u)]),
                        self.combine_basis(&[(&f.basis_s, &p.s)]),
                    ),
                    WeakLeaf::CenterStable => (
                        self.combine_basis(&[(&f.basis_s, &p.s), (&f.basis_c, &p.c)]),
                        self.combine_basis(&[(&f.basis_u, &p.u)]),
                    ),
                };
                Ok((linalg::norm(&inside), linalg::norm(&off)))
            }
            Model::Skew(sk) => {
                let (a, b) = sk.base_coeffs(&v.comps[..2]);
                let (along, across) = match leaf {
                    WeakLeaf::CenterUnstable => (b, a),
                    WeakLeaf::CenterStable => (a, b),
                };
                Ok((along.hypot(v.comps[2]), across.abs()))
            }
        }
    }
}
