#![allow(dead_code)]

use central_shadow::linalg::IntMatrix;
use central_shadow::system::DEFAULT_SERIES_TOL;
use central_shadow::torus::{self, TorusPoint};
use central_shadow::SystemModel;

pub const MU_S: f64 = 0.381_966_011_250_105_2;
pub const MU_U: f64 = 2.618_033_988_749_895;

pub fn cat_id() -> SystemModel {
    SystemModel::build_linear(
        IntMatrix::new(vec![vec![2, 1, 0], vec![1, 1, 0], vec![0, 0, 1]]).unwrap(),
    )
    .unwrap()
}

pub fn cat2() -> SystemModel {
    SystemModel::build_linear(IntMatrix::new(vec![vec![2, 1], vec![1, 1]]).unwrap()).unwrap()
}

pub fn skew() -> SystemModel {
    SystemModel::build_skew_product(
        IntMatrix::new(vec![vec![2, 1], vec![1, 1]]).unwrap(),
        0.01,
        0.1,
        DEFAULT_SERIES_TOL,
    )
    .unwrap()
}

pub fn pt(c: &[f64]) -> TorusPoint {
    torus::wrap(c).unwrap()
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Unit eigenvectors of the cat block, from `(2 - μ) v0 + v1 = 0`, first
/// component positive.
pub fn cat_vs() -> [f64; 2] {
    unit([1.0, MU_S - 2.0])
}

pub fn cat_vu() -> [f64; 2] {
    unit([1.0, MU_U - 2.0])
}

/// Stable and unstable components of a displacement in the (orthogonal)
/// cat splitting.
pub fn cat_su(v: &[f64]) -> (f64, f64) {
    let (s, u) = (cat_vs(), cat_vu());
    (s[0] * v[0] + s[1] * v[1], u[0] * v[0] + u[1] * v[1])
}

pub fn displace(x: &TorusPoint, v: &[f64]) -> TorusPoint {
    let raw: Vec<f64> = x.coords().iter().zip(v).map(|(a, b)| a + b).collect();
    torus::wrap(&raw).unwrap()
}

pub fn orbit(sys: &SystemModel, x0: &TorusPoint, n: usize) -> Vec<TorusPoint> {
    let mut v = vec![x0.clone()];
    for _ in 0..n {
        v.push(sys.apply(v.last().unwrap()).unwrap());
    }
    v
}

/// Chart errors `e_k = log_{f(x_k)} x_{k+1}`.
pub fn chart_errors(sys: &SystemModel, x: &[TorusPoint]) -> Vec<Vec<f64>> {
    x.windows(2)
        .map(|w| torus::chart_log(&sys.apply(&w[0]).unwrap(), &w[1]).unwrap().comps)
        .collect()
}
