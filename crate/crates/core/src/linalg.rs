//! Integer matrices of size 2 and 3 with closed-form eigen-data.
//!
//! Roots of the characteristic polynomial come from the quadratic formula or
//! the trigonometric form of the cubic; unit-modulus roots are detected with
//! exact integer arithmetic (a monic integer polynomial with constant term
//! `±1` can only have `±1` as rational roots).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShadowError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntMatrix {
    rows: Vec<Vec<i64>>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if !(2..=3).contains(&n) {
            return Err(ShadowError::InvalidSystem(format!(
                "only 2x2 and 3x3 matrices are supported, got {n} rows"
            )));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(ShadowError::InvalidSystem("matrix is not square".into()));
        }
        Ok(IntMatrix { rows })
    }

    /// Accepts real entries and rejects any that are not integers.
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            let mut row = Vec::with_capacity(r.len());
            for &v in r {
                if !v.is_finite() || v.fract() != 0.0 || v.abs() > 1e15 {
                    return Err(ShadowError::InvalidSystem(format!(
                        "matrix entry {v} is not an integer"
                    )));
                }
                row.push(v as i64);
            }
            out.push(row);
        }
        IntMatrix::new(out)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        IntMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn trace(&self) -> i64 {
        (0..self.dim()).map(|i| self.rows[i][i]).sum()
    }

    pub fn det(&self) -> i64 {
        let m = &self.rows;
        match self.dim() {
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        }
    }

    /// Sum of the principal 2x2 minors (equals `det` for n = 2).
    fn principal_minor_sum(&self) -> i64 {
        let m = &self.rows;
        match self.dim() {
            2 => self.det(),
            _ => {
                (m[0][0] * m[1][1] - m[0][1] * m[1][0])
                    + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
                    + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            }
        }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let n = self.dim();
        let mut rows = vec![vec![0i64; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc: i64 = 0;
                for k in 0..n {
                    acc = self.rows[i][k]
                        .checked_mul(other.rows[k][j])
                        .and_then(|v| acc.checked_add(v))
                        .ok_or_else(|| {
                            ShadowError::InvalidSystem("integer overflow in matrix power".into())
                        })?;
                }
                *cell = acc;
            }
        }
        Ok(IntMatrix { rows })
    }

    pub fn pow(&self, p: u32) -> Result<IntMatrix> {
        let mut acc = IntMatrix::identity(self.dim());
        for _ in 0..p {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Exact inverse of a unimodular matrix (adjugate over the determinant).
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let det = self.det();
        if det.abs() != 1 {
            return Err(ShadowError::InvalidSystem(format!(
                "determinant {det} is not +-1"
            )));
        }
        let m = &self.rows;
        let rows = match self.dim() {
            2 => vec![vec![m[1][1], -m[0][1]], vec![-m[1][0], m[0][0]]],
            _ => {
                let cof = |i: usize, j: usize| -> i64 {
                    let r: Vec<usize> = (0..3).filter(|&x| x != i).collect();
                    let c: Vec<usize> = (0..3).filter(|&x| x != j).collect();
                    let minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]];
                    if (i + j) % 2 == 0 {
                        minor
                    } else {
                        -minor
                    }
                };
                // adjugate is the transposed cofactor matrix
                (0..3).map(|i| (0..3).map(|j| cof(j, i)).collect()).collect()
            }
        };
        let rows = rows
            .into_iter()
            .map(|r: Vec<i64>| r.into_iter().map(|v| v * det).collect())
            .collect();
        Ok(IntMatrix { rows })
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.rows[i][j] as f64)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| *a as f64 * b).sum())
            .collect()
    }

    /// Characteristic polynomial `x^n + c[n-1] x^(n-1) + ... + c[0]`,
    /// coefficients listed from the constant term upwards.
    pub fn char_poly(&self) -> Vec<i64> {
        match self.dim() {
            2 => vec![self.det(), -self.trace()],
            _ => vec![-self.det(), self.principal_minor_sum(), -self.trace()],
        }
    }
}

/// Closed-form spectrum of an integer unimodular matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// All eigenvalues real and simple, ascending by modulus; `unit` flags
    /// the exact roots `±1`.
    Real(Vec<RealEigen>),
    /// A complex-conjugate pair together with the remaining real roots.
    Complex { modulus: f64, real: Vec<f64> },
    /// Repeated root (only possible at `±1` for unimodular integer matrices).
    Repeated(i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealEigen {
    pub value: f64,
    pub unit: bool,
}

fn eval_poly(c: &[i64], x: f64) -> (f64, f64) {
    // value and derivative of monic polynomial with coefficients c
    let n = c.len();
    let mut p = 1.0;
    let mut dp = 0.0;
    for k in (0..n).rev() {
        dp = dp * x + p;
        p = p * x + c[k] as f64;
    }
    (p, dp)
}

fn eval_poly_int(c: &[i64], x: i64) -> i64 {
    let mut p = 1i64;
    for k in (0..c.len()).rev() {
        p = p * x + c[k];
    }
    p
}

fn polish(c: &[i64], mut x: f64) -> f64 {
    for _ in 0..3 {
        let (p, dp) = eval_poly(c, x);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.abs() <= f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

/// Real roots of `x^2 + b x + c` for integer `b`, `c` with positive
/// discriminant, computed without cancellation.
fn quadratic_real_roots(b: i64, c: i64) -> [f64; 2] {
    let disc = (b * b - 4 * c) as f64;
    let sq = disc.sqrt();
    let q = -0.5 * (b as f64 + if b >= 0 { sq } else { -sq });
    [q, c as f64 / q]
}

fn sort_by_modulus(mut v: Vec<RealEigen>) -> Vec<RealEigen> {
    v.sort_by(|a, b| a.value.abs().total_cmp(&b.value.abs()));
    v
}

pub fn spectrum(m: &IntMatrix) -> Spectrum {
    let c = m.char_poly();
    match m.dim() {
        2 => quadratic_spectrum(c[1], c[0], None),
        _ => {
            for r in [1i64, -1] {
                if eval_poly_int(&c, r) == 0 {
                    // deflate: x^3 + a x^2 + b x + c0 = (x - r)(x^2 + q1 x + q0)
                    let q1 = c[2] + r;
                    let q0 = c[1] + r * q1;
                    return quadratic_spectrum(q1, q0, Some(r));
                }
            }
            cubic_spectrum(&c)
        }
    }
}

fn quadratic_spectrum(b: i64, c: i64, extra_unit: Option<i64>) -> Spectrum {
    let disc = b * b - 4 * c;
    if disc == 0 {
        // double root -b/2 must be an integer root of a monic polynomial
        return Spectrum::Repeated(-b / 2);
    }
    if disc < 0 {
        let real = extra_unit.map(|r| vec![r as f64]).unwrap_or_default();
        return Spectrum::Complex {
            modulus: (c as f64).abs().sqrt(),
            real,
        };
    }
    let mut eig: Vec<RealEigen> = quadratic_real_roots(b, c)
        .iter()
        .map(|&v| {
            let unit = v.round().abs() == 1.0 && {
                let r = v.round() as i64;
                r * r + b * r + c == 0
            };
            RealEigen {
                value: if unit { v.round() } else { v },
                unit,
            }
        })
        .collect();
    if let Some(r) = extra_unit {
        if eig.iter().any(|e| e.unit && e.value as i64 == r) {
            return Spectrum::Repeated(r);
        }
        eig.push(RealEigen {
            value: r as f64,
            unit: true,
        });
    }
    Spectrum::Real(sort_by_modulus(eig))
}

fn cubic_spectrum(c: &[i64]) -> Spectrum {
    let (a, b, c0) = (c[2] as i128, c[1] as i128, c[0] as i128);
    let disc = 18 * a * b * c0 - 4 * a * a * a * c0 + a * a * b * b - 4 * b * b * b - 27 * c0 * c0;
    let (af, bf, cf) = (a as f64, b as f64, c0 as f64);
    // depressed cubic y^3 + p y + q with x = y - a/3
    let p = bf - af * af / 3.0;
    let q = 2.0 * af * af * af / 27.0 - af * bf / 3.0 + cf;
    let shift = -af / 3.0;
    if disc > 0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let roots = (0..3).map(|k| {
            let y = r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            RealEigen {
                value: polish(c, y + shift),
                unit: false,
            }
        });
        Spectrum::Real(sort_by_modulus(roots.collect()))
    } else {
        // one real root, complex pair (disc == 0 cannot happen without a +-1 root)
        let half = q / 2.0;
        let inner = (half * half + p * p * p / 27.0).sqrt();
        let y = (-half + inner).cbrt() + (-half - inner).cbrt();
        let real = polish(c, y + shift);
        let modulus = (cf.abs() / real.abs()).sqrt();
        Spectrum::Complex {
            modulus,
            real: vec![real],
        }
    }
}

/// Unit eigenvector of `m` for a simple real eigenvalue, with its first
/// non-negligible component made positive.
pub fn eigenvector(m: &IntMatrix, value: f64) -> Vec<f64> {
    let n = m.dim();
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m.get(i, j) as f64 - if i == j { value } else { 0.0 })
                .collect()
        })
        .collect();
    let mut v = if n == 2 {
        let c1 = vec![shifted[0][1], -shifted[0][0]];
        let c2 = vec![shifted[1][1], -shifted[1][0]];
        if norm(&c1) >= norm(&c2) {
            c1
        } else {
            c2
        }
    } else {
        let mut best = vec![0.0; 3];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let c = cross(&shifted[i], &shifted[j]);
            if norm(&c) > norm(&best) {
                best = c;
            }
        }
        best
    };
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal basis of the span of `vs` (modified Gram-Schmidt).
pub fn orthonormalize(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for q in &out {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let nw = norm(&w);
        w.iter_mut().for_each(|a| *a /= nw);
        out.push(w);
    }
    out
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Smallest singular value of a square matrix.
pub fn min_singular(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().min()
}
