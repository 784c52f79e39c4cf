//! Constant selection for the shadowing construction.

use serde::Serialize;

use crate::error::{Result, ShadowError};
use crate::system::HyperbolicityData;

/// Default `μ` tried first.
pub const DEFAULT_MU: f64 = 0.1;
/// Required margin `(1+μ)² L0 / λ ≤ MU_MARGIN`.
pub const MU_MARGIN: f64 = 0.9;
/// Safety factor on the infimum of admissible `L`.
pub const L_SAFETY: f64 = 1.01;
const D0_SAFETY: f64 = 0.99;
const MU_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShadowConstants {
    pub mu: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub d0: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "L_cu")]
    pub l_cu: f64,
    #[serde(rename = "L_cs")]
    pub l_cs: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L_total")]
    pub l_total: f64,
    pub lambda: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub delta0: f64,
}

/// Candidates `0.5, 0.25, 0.1, 0.05, 0.025, 0.01, ...` in decreasing order.
fn mu_candidates() -> impl Iterator<Item = f64> {
    (1..)
        .flat_map(|e| [5.0, 2.5, 1.0].map(|m| m / 10f64.powi(e)))
        .take_while(|&m| m >= MU_FLOOR)
}

fn eq2_lhs(mu: f64, l0: f64, lambda: f64) -> f64 {
    (1.0 + mu).powi(2) * l0 / lambda
}

/// Chooses `μ` and `L`, then the derived constants, for a system whose rates
/// already satisfy `λ > 2 L0`.
pub fn derive_constants(hyp: &HyperbolicityData, r: f64, mu_hint: Option<f64>) -> Result<ShadowConstants> {
    let (lambda, l0, delta0) = (hyp.lambda, hyp.l0, hyp.delta0);
    if !(lambda.is_finite() && l0 >= 1.0 && l0.is_finite() && delta0 > 0.0) {
        return Err(ShadowError::InvalidInput(format!(
            "bad hyperbolicity data: lambda = {lambda}, L0 = {l0}, delta0 = {delta0}"
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(ShadowError::InvalidInput(format!("R = {r} must be positive")));
    }
    if lambda <= 2.0 * l0 {
        return Err(ShadowError::ConstantsInfeasible(format!(
            "lambda = {lambda} does not exceed 2 L0 = {}; raise the power of the map",
            2.0 * l0
        )));
    }
    let hint = mu_hint.unwrap_or(DEFAULT_MU);
    if !(hint > 0.0 && hint < 1.0) {
        return Err(ShadowError::InvalidInput(format!("mu hint {hint} must lie in (0, 1)")));
    }
    let admissible = |m: f64| eq2_lhs(m, l0, lambda) <= MU_MARGIN;
    let mu = if admissible(hint) {
        hint
    } else {
        mu_candidates().find(|&m| admissible(m)).ok_or_else(|| {
            ShadowError::ConstantsInfeasible(format!(
                "no mu >= {MU_FLOOR} with (1+mu)^2 L0/lambda <= {MU_MARGIN} (lambda = {lambda}, L0 = {l0})"
            ))
        })?
    };
    let l = L_SAFETY * l0 * (1.0 + mu) / (1.0 - eq2_lhs(mu, l0, lambda));
    let l_cu = (4.0 * l0 + 1.0 + 4.0 * r * l0) * l;
    let l_cs = l_cu;
    let l1 = (1.0 + mu) * l_cu.max(l_cs);
    let l_total = l1.max(2.0 * l + 4.0 * l0);
    // the combination step needs 4 L0 L d < δ0, which also gives d < δ0 / 2L;
    // the h-steps need the image of an Ld-correction within δ0 of the next point
    let d0 = D0_SAFETY * delta0 * (1.0 / (4.0 * l0 * l)).min(1.0 / (1.0 + r * l));
    let c = ShadowConstants {
        mu,
        l,
        d0,
        r,
        l_cu,
        l_cs,
        l1,
        l_total,
        lambda,
        l0,
        delta0,
    };
    c.check()?;
    Ok(c)
}

impl ShadowConstants {
    /// Re-checks every defining inequality.
    pub fn check(&self) -> Result<()> {
        let fail = |what: &str| Err(ShadowError::ConstantsInfeasible(what.to_string()));
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return fail("mu outside (0, 1)");
        }
        if eq2_lhs(self.mu, self.l0, self.lambda) >= 1.0 {
            return fail("(1+mu)^2 L0 / lambda >= 1");
        }
        if self.l0 * (1.0 + self.l * (1.0 + self.mu) / self.lambda) * (1.0 + self.mu) >= self.l {
            return fail("L0 (1 + L(1+mu)/lambda)(1+mu) >= L");
        }
        if self.l <= 1.0 {
            return fail("L <= 1");
        }
        if self.d0 >= self.delta0 / (2.0 * self.l) || 4.0 * self.l0 * self.l * self.d0 >= self.delta0 {
            return fail("d0 too large for the local product structure");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp(lambda: f64, l0: f64) -> HyperbolicityData {
        HyperbolicityData {
            nu: 1.0 / lambda,
            nu_hat: 1.0 / lambda,
            gamma: 1.0,
            gamma_hat: 1.0,
            lambda,
            l0,
            delta0: 0.1,
            m: 1,
            l: 1,
        }
    }

    #[test]
    fn golden_values() {
        let g = 2.6180339887;
        let c = derive_constants(&hyp(g, 1.0), g, None).unwrap();
        assert_eq!(c.mu, 0.1);
        assert!((1.21 / g - 0.46218).abs() < 1e-5);
        assert!((c.l - 2.0657).abs() < 1e-4, "{}", c.l);
        assert!((c.l_cu - 31.961).abs() < 1e-3, "{}", c.l_cu);
        assert!((c.l1 - 35.157).abs() < 1e-3, "{}", c.l1);
        assert_eq!(c.l_total, c.l1);
    }

    #[test]
    fn infeasible_when_lambda_small() {
        assert!(matches!(
            derive_constants(&hyp(1.5, 1.2), 2.0, None),
            Err(ShadowError::ConstantsInfeasible(_))
        ));
    }

    #[test]
    fn falls_back_to_smaller_mu() {
        let c = derive_constants(&hyp(2.1, 1.0), 2.0, Some(0.5)).unwrap();
        assert!(c.mu < 0.5);
        assert!((1.0 + c.mu).powi(2) / 2.1 <= MU_MARGIN);
        assert_eq!(c.mu, 0.25);
        let c = derive_constants(&hyp(2.01, 1.0), 2.0, None).unwrap();
        assert_eq!(c.mu, 0.1);
    }

    #[test]
    fn bad_hint_rejected() {
        assert!(derive_constants(&hyp(2.6, 1.0), 2.0, Some(1.5)).is_err());
        assert!(derive_constants(&hyp(2.6, 1.0), -1.0, None).is_err());
    }

    #[test]
    fn candidates_descend() {
        let v: Vec<f64> = mu_candidates().take(7).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.1, 0.05, 0.025, 0.01, 0.005]);
    }
}
