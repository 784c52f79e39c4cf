//! Strong-leaf geometry checked against orbit-difference oracles.
//!
//! Base orbits of rational points are computed exactly in integers; the two
//! orbits on a strong leaf are then followed in difference form, so no
//! unstable growth of rounding error enters the comparison.

mod common;

use std::f64::consts::PI;

use central_shadow::linalg::IntMatrix;
use central_shadow::system::{IntersectionSide, Strong, DEFAULT_SERIES_TOL};
use central_shadow::torus::{self, TorusPoint};
use central_shadow::SystemModel;
use common::*;

fn skew_with(c0: f64, c1: f64) -> SystemModel {
    SystemModel::build_skew_product(
        IntMatrix::new(vec![vec![2, 1], vec![1, 1]]).unwrap(),
        c0,
        c1,
        DEFAULT_SERIES_TOL,
    )
    .unwrap()
}

/// Exact base orbit of `(a, b) / q` under `A` (`forward`) or `A^{-1}`.
fn rational_orbit(a: i64, b: i64, q: i64, steps: usize, forward: bool) -> Vec<[f64; 2]> {
    let (mut a, mut b) = (a, b);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push([a as f64 / q as f64, b as f64 / q as f64]);
        (a, b) = if forward {
            ((2 * a + b).rem_euclid(q), (a + b).rem_euclid(q))
        } else {
            ((a - b).rem_euclid(q), (2 * b - a).rem_euclid(q))
        };
    }
    out
}

fn phi(c0: f64, c1: f64, x: &[f64]) -> f64 {
    c0 + c1 * (2.0 * PI * x[0]).sin()
}

#[test]
fn stable_offset_is_limit_of_orbit_differences() {
    let (c0, c1) = (0.0, 0.1);
    let sys = skew_with(c0, c1);
    let vs = cat_vs();
    let t = 0.01;
    let orbit = rational_orbit(3, 7, 10, 60, true);
    // θ_60(y) - θ_60(x) with equal starting fibers
    let gap: f64 = orbit
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let s = t * MU_S.powi(j as i32);
            phi(c0, c1, &[x[0] + s * vs[0], x[1] + s * vs[1]]) - phi(c0, c1, x)
        })
        .sum();
    let xb = pt(&[0.3, 0.7]);
    let yb = pt(&[0.3 + t * vs[0], 0.7 + t * vs[1]]);
    let sigma = sys.strong_stable_fiber_offset(&xb, &yb).unwrap();
    assert!((sigma + gap).abs() < 2.0 * DEFAULT_SERIES_TOL, "{sigma} vs {}", -gap);
    assert!(sigma.abs() > 1e-4);
}

#[test]
fn unstable_offset_is_limit_of_backward_differences() {
    let (c0, c1) = (0.02, 0.1);
    let sys = skew_with(c0, c1);
    let vu = cat_vu();
    let t = -0.02;
    let back = rational_orbit(3, 7, 10, 61, false);
    let gap: f64 = (1..61)
        .map(|k| {
            let s = t / MU_U.powi(k as i32);
            let x = back[k];
            phi(c0, c1, &[x[0] + s * vu[0], x[1] + s * vu[1]]) - phi(c0, c1, &x)
        })
        .sum();
    let xb = pt(&[0.3, 0.7]);
    let yb = pt(&[0.3 + t * vu[0], 0.7 + t * vu[1]]);
    let sigma = sys.strong_unstable_fiber_offset(&xb, &yb).unwrap();
    assert!((sigma - gap).abs() < 2.0 * DEFAULT_SERIES_TOL, "{sigma} vs {gap}");
}

/// `dist(f^k x, f^k z)` for `z = exp^s_x(s)` and `k = 0..=kmax`, in
/// difference form over an exact base orbit.
fn forward_gaps(sys: &SystemModel, c: (f64, f64), num: (i64, i64), theta: f64, s: f64, kmax: usize) -> Vec<f64> {
    let q = 1 << 20;
    let x = torus::wrap(&[num.0 as f64 / q as f64, num.1 as f64 / q as f64, theta]).unwrap();
    let z = sys.strong_exp(&x, Strong::Stable, &[s]).unwrap();
    let v = torus::chart_log(&x, &z).unwrap().comps;
    let vs = cat_vs();
    let t = v[0] * vs[0] + v[1] * vs[1];
    let orbit = rational_orbit(num.0, num.1, q, kmax + 1, true);
    let mut dtheta = v[2];
    let mut out = Vec::with_capacity(kmax + 1);
    for (k, xb) in orbit.iter().enumerate() {
        let tk = t * MU_S.powi(k as i32);
        out.push(tk.hypot(dtheta));
        dtheta += phi(c.0, c.1, &[xb[0] + tk * vs[0], xb[1] + tk * vs[1]]) - phi(c.0, c.1, xb);
    }
    out
}

#[test]
fn strong_stable_leaves_contract_at_rate_nu() {
    let cases = [(0.01, 0.1), (0.0, 0.15), (0.3, 0.05)];
    let mut rng = 0x9E3779B97F4A7C15u64;
    for (c0, c1) in cases {
        let sys = skew_with(c0, c1);
        let nu = sys.hyperbolicity().nu;
        for _ in 0..40 {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (rng >> 44) as i64;
            let b = ((rng >> 20) & 0xFFFFF) as i64;
            let s = ((rng & 0xFFFF) as f64 / 65536.0 - 0.5) * 2.0 * 0.099;
            let gaps = forward_gaps(&sys, (c0, c1), (a, b), 0.25, s, 30);
            assert!(gaps[0] <= s.abs() + 1e-12 && gaps[0] >= s.abs() * 0.9);
            for (k, g) in gaps.iter().enumerate().skip(1) {
                let bound = nu.powi(k as i32) * s.abs();
                assert!(*g <= bound + 2.0 * DEFAULT_SERIES_TOL, "k = {k}: {g} > {bound}");
            }
        }
    }
}

#[test]
fn linear_strong_leaves_contract_at_rate_nu() {
    let sys = cat_id();
    let nu = sys.hyperbolicity().nu;
    assert!((nu - MU_S).abs() < 1e-15);
    let x = pt(&[0.125, 0.5, 0.75]);
    for s in [0.09, -0.05, 1e-4] {
        let z = sys.strong_exp(&x, Strong::Stable, &[s]).unwrap();
        let v = torus::chart_log(&x, &z).unwrap().comps;
        let (ts, tu) = cat_su(&v);
        assert!((ts - s).abs() < 1e-16 && tu.abs() < 1e-16 && v[2] == 0.0);
        for k in 1..=30 {
            // f^k z - f^k x = μ_s^k s v_s
            assert!((MU_S.powi(k) * s).abs() <= nu.powi(k) * s.abs() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn skew_intersection_matches_offset_oracle() {
    let (c0, c1) = (0.01, 0.1);
    let sys = skew_with(c0, c1);
    let (vs, vu) = (cat_vs(), cat_vu());
    let x = pt(&[0.3, 0.7, 0.2]);
    // y = x + a v_s + b v_u in the base, arbitrary fiber
    let (a, b) = (0.03, -0.02);
    let y = pt(&[0.3 + a * vs[0] + b * vu[0], 0.7 + a * vs[1] + b * vu[1], 0.21]);
    let p = sys
        .leaf_intersection(&x, &y, IntersectionSide::StableCenterUnstable, 0.1)
        .unwrap();
    // base of p is x_b + a v_s; fiber from the orbit-difference oracle
    let orbit = rational_orbit(3, 7, 10, 60, true);
    let gap: f64 = orbit
        .iter()
        .enumerate()
        .map(|(j, xb)| {
            let s = a * MU_S.powi(j as i32);
            phi(c0, c1, &[xb[0] + s * vs[0], xb[1] + s * vs[1]]) - phi(c0, c1, xb)
        })
        .sum();
    let expect: TorusPoint = pt(&[0.3 + a * vs[0], 0.7 + a * vs[1], 0.2 - gap]);
    assert!(torus::toral_dist(&p.point, &expect).unwrap() < 1e-12);
}
