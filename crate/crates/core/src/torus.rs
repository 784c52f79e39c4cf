//! Flat torus `T^n = R^n / Z^n`: canonical points, minimal-representative
//! displacements and the exponential chart.
//!
//! On the flat torus the exponential map at any point is a translation, so
//! `chart_exp` / `chart_log` are exact isometries on balls of radius below
//! [`CHART_RADIUS`]. No distortion factor ever enters the shadowing bounds
//! through the charts.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShadowError};

/// Radius of the exponential chart (half the injectivity radius of `T^n`).
pub const CHART_RADIUS: f64 = 0.5;

/// A point on `T^n` with every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

/// A tangent vector in chart coordinates (units of torus coordinate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub comps: Vec<f64>,
}

fn wrap_coord(c: f64) -> f64 {
    let r = c - c.floor();
    // c slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Minimal representative of `c` modulo 1 in `[-0.5, 0.5]`; the tie at
/// exactly one half goes to `+0.5`.
pub(crate) fn min_rep(c: f64) -> f64 {
    let r = c - c.round();
    if r == -0.5 {
        0.5
    } else {
        r
    }
}

impl TorusPoint {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl Displacement {
    pub fn new(comps: Vec<f64>) -> Self {
        Displacement { comps }
    }

    pub fn zeros(n: usize) -> Self {
        Displacement { comps: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Displacement {
        Displacement::new(self.comps.iter().map(|c| c * s).collect())
    }
}

/// Reduces each coordinate modulo 1 into `[0, 1)`.
pub fn wrap(raw: &[f64]) -> Result<TorusPoint> {
    if raw.is_empty() {
        return Err(ShadowError::InvalidInput("empty coordinate vector".into()));
    }
    if let Some(bad) = raw.iter().find(|c| !c.is_finite()) {
        return Err(ShadowError::InvalidInput(format!(
            "non-finite coordinate {bad}"
        )));
    }
    Ok(TorusPoint {
        coords: raw.iter().copied().map(wrap_coord).collect(),
    })
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(ShadowError::InvalidInput(format!(
            "dimension mismatch: {a} vs {b}"
        )));
    }
    Ok(())
}

fn min_diff(x: &TorusPoint, y: &TorusPoint) -> Vec<f64> {
    x.coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| min_rep(b - a))
        .collect()
}

/// Flat-metric distance between two torus points.
pub fn toral_dist(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(min_diff(x, y).iter().map(|c| c * c).sum::<f64>().sqrt())
}

/// Inverse exponential chart: the minimal displacement `v` with
/// `wrap(x + v) = y`.
pub fn chart_log(x: &TorusPoint, y: &TorusPoint) -> Result<Displacement> {
    check_dims(x.dim(), y.dim())?;
    let v = Displacement::new(min_diff(x, y));
    let norm = v.norm();
    if norm >= CHART_RADIUS {
        return Err(ShadowError::ChartDomainExceeded {
            norm,
            limit: CHART_RADIUS,
        });
    }
    Ok(v)
}

/// Exponential chart: `wrap(x + v)` for `|v| < 0.5`.
pub fn chart_exp(x: &TorusPoint, v: &Displacement) -> Result<TorusPoint> {
    check_dims(x.dim(), v.dim())?;
    let norm = v.norm();
    if norm >= CHART_RADIUS {
        return Err(ShadowError::ChartDomainExceeded {
            norm,
            limit: CHART_RADIUS,
        });
    }
    translate(x, &v.comps)
}

/// `wrap(x + v)` without the chart-radius restriction.
pub(crate) fn translate(x: &TorusPoint, v: &[f64]) -> Result<TorusPoint> {
    check_dims(x.dim(), v.len())?;
    let raw: Vec<f64> = x.coords.iter().zip(v).map(|(a, b)| a + b).collect();
    wrap(&raw)
}
