//! Experiment configuration: one strict JSON document per run.
//!
//! Numeric fields accept JSON numbers or decimal strings. Unknown keys are
//! rejected at every level.

use std::path::Path;

use central_shadow::linalg::IntMatrix;
use central_shadow::pseudotraj::{generate_noisy, generate_rounded};
use central_shadow::system::DEFAULT_SERIES_TOL;
use central_shadow::torus::{self, Displacement};
use central_shadow::{Pseudotrajectory, ShadowError, SystemModel};
use serde::de::{self, Deserializer};
use serde::Deserialize;

/// A real number given as a JSON number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(f64),
            S(String),
        }
        let v = match Raw::deserialize(d)? {
            Raw::N(v) => v,
            Raw::S(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| de::Error::custom(format!("not a decimal number: {s:?}")))?,
        };
        if !v.is_finite() {
            return Err(de::Error::custom("number must be finite"));
        }
        Ok(Num(v))
    }
}

fn to_u64(n: Num, what: &str) -> Result<u64, ShadowError> {
    let v = n.0;
    if v < 0.0 || v.fract() != 0.0 || v > 2f64.powi(53) {
        return Err(ShadowError::InvalidInput(format!(
            "{what} must be a non-negative integer, got {v}"
        )));
    }
    Ok(v as u64)
}

fn to_i64(n: Num, what: &str) -> Result<i64, ShadowError> {
    let v = n.0;
    if v.fract() != 0.0 || v.abs() > 2f64.powi(53) {
        return Err(ShadowError::InvalidInput(format!("{what} must be an integer, got {v}")));
    }
    Ok(v as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Linear,
    SkewProduct,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub kind: Kind,
    /// the full matrix for `linear`, the 2x2 base matrix for `skew_product`
    pub matrix: Vec<Vec<Num>>,
    pub c0: Option<Num>,
    pub c1: Option<Num>,
    pub series_tol: Option<Num>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    Noisy,
    Rounded,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub x0: Vec<Num>,
    pub steps: Num,
    #[serde(default)]
    pub generator: Generator,
    pub d: Option<Num>,
    pub d_list: Option<Vec<Num>>,
    pub grid: Option<Num>,
    pub seed: Option<Num>,
}

/// A probe seed, as a multiple of the admissible radius `L d`: a scalar for
/// one-dimensional stable leaves or a vector of components.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Seed {
    Scalar(Num),
    Vector(Vec<Num>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub trajectory: Option<TrajectorySpec>,
    pub mu_hint: Option<Num>,
    pub probe_seeds: Option<Vec<Seed>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ShadowError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ShadowError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ShadowError> {
        serde_json::from_str(text).map_err(|e| ShadowError::InvalidInput(format!("config: {e}")))
    }

    pub fn build_system(&self) -> Result<SystemModel, ShadowError> {
        let s = &self.system;
        let rows = s
            .matrix
            .iter()
            .map(|r| r.iter().map(|&v| to_i64(v, "matrix entry")).collect())
            .collect::<Result<Vec<Vec<i64>>, _>>()?;
        let m = IntMatrix::new(rows)?;
        match s.kind {
            Kind::Linear => {
                if s.c0.is_some() || s.c1.is_some() || s.series_tol.is_some() {
                    return Err(ShadowError::InvalidInput(
                        "c0, c1 and series_tol apply to skew_product only".into(),
                    ));
                }
                SystemModel::build_linear(m)
            }
            Kind::SkewProduct => {
                let (Some(c0), Some(c1)) = (s.c0, s.c1) else {
                    return Err(ShadowError::InvalidInput("skew_product needs c0 and c1".into()));
                };
                let tol = s.series_tol.map_or(DEFAULT_SERIES_TOL, |t| t.0);
                SystemModel::build_skew_product(m, c0.0, c1.0, tol)
            }
        }
    }

    pub fn mu_hint(&self) -> Option<f64> {
        self.mu_hint.map(|m| m.0)
    }

    pub fn trajectory(&self) -> Result<&TrajectorySpec, ShadowError> {
        self.trajectory
            .as_ref()
            .ok_or_else(|| ShadowError::InvalidInput("config has no trajectory section".into()))
    }

    /// Seeds scaled by `radius`.
    pub fn seeds(&self, radius: f64) -> Result<Vec<Displacement>, ShadowError> {
        let Some(seeds) = &self.probe_seeds else {
            return Err(ShadowError::InvalidInput("config has no probe_seeds".into()));
        };
        if seeds.len() < 2 {
            return Err(ShadowError::InvalidInput("probe needs at least two seeds".into()));
        }
        Ok(seeds
            .iter()
            .map(|s| {
                let comps = match s {
                    Seed::Scalar(v) => vec![v.0],
                    Seed::Vector(v) => v.iter().map(|c| c.0).collect(),
                };
                Displacement::new(comps.into_iter().map(|c| c * radius).collect())
            })
            .collect())
    }
}

impl TrajectorySpec {
    /// The single noise level of a `shadow` or `probe` run.
    pub fn single_d(&self) -> Result<f64, ShadowError> {
        match (self.generator, self.d, self.grid, &self.d_list) {
            (_, _, _, Some(_)) => Err(ShadowError::InvalidInput(
                "d_list is for sweep; give d (noisy) or grid (rounded)".into(),
            )),
            (Generator::Noisy, Some(d), None, None) => Ok(d.0),
            (Generator::Rounded, None, Some(g), None) => Ok(g.0),
            (Generator::Noisy, ..) => Err(ShadowError::InvalidInput("noisy generator needs d and no grid".into())),
            (Generator::Rounded, ..) => Err(ShadowError::InvalidInput("rounded generator needs grid and no d".into())),
        }
    }

    /// Sweep levels in increasing order. For the rounded generator each `d`
    /// is converted to the grid with `g √n / 2 = d`.
    pub fn sweep_ds(&self) -> Result<Vec<f64>, ShadowError> {
        if self.d.is_some() || self.grid.is_some() {
            return Err(ShadowError::InvalidInput("sweep takes d_list only".into()));
        }
        let mut ds: Vec<f64> = self
            .d_list
            .as_ref()
            .ok_or_else(|| ShadowError::InvalidInput("sweep needs d_list".into()))?
            .iter()
            .map(|d| d.0)
            .collect();
        if ds.len() < 4 {
            return Err(ShadowError::InvalidInput(format!(
                "sweep needs at least 4 d values, got {}",
                ds.len()
            )));
        }
        if ds.iter().any(|&d| !(d > 0.0)) {
            return Err(ShadowError::InvalidInput("sweep d values must be positive".into()));
        }
        ds.sort_by(f64::total_cmp);
        if ds.windows(2).any(|w| w[0] == w[1]) {
            return Err(ShadowError::InvalidInput("sweep d values must be distinct".into()));
        }
        Ok(ds)
    }

    /// Generates the pseudotrajectory; `level` is `d` for noisy runs and the
    /// grid for rounded ones.
    pub fn generate(&self, sys: &SystemModel, level: f64) -> Result<Pseudotrajectory, ShadowError> {
        let raw: Vec<f64> = self.x0.iter().map(|c| c.0).collect();
        let x0 = torus::wrap(&raw)?;
        let steps = to_u64(self.steps, "steps")? as usize;
        match self.generator {
            Generator::Noisy => {
                let seed = self.seed.map_or(Ok(0), |s| to_u64(s, "seed"))?;
                generate_noisy(sys, &x0, steps, level, seed)
            }
            Generator::Rounded => {
                if self.seed.is_some() {
                    return Err(ShadowError::InvalidInput("rounded generator takes no seed".into()));
                }
                generate_rounded(sys, &x0, steps, level)
            }
        }
    }

    /// Generator level for a sweep value `d`.
    pub fn level_for(&self, d: f64, dim: usize) -> f64 {
        match self.generator {
            Generator::Noisy => d,
            Generator::Rounded => 2.0 * d / (dim as f64).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAT: &str = r#"{"system": {"kind": "linear", "matrix": [[2, 1], [1, "1"]]},
        "trajectory": {"x0": ["0.1", 0.2], "steps": 10, "d": "1e-5", "seed": 3}}"#;

    #[test]
    fn accepts_numbers_and_decimal_strings() {
        let c = ExperimentConfig::parse(CAT).unwrap();
        let t = c.trajectory().unwrap();
        assert_eq!(t.single_d().unwrap(), 1e-5);
        assert_eq!(t.x0[0], Num(0.1));
        assert_eq!(c.build_system().unwrap().dim(), 2);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = CAT.replace("\"seed\"", "\"sead\"");
        assert!(matches!(ExperimentConfig::parse(&bad), Err(ShadowError::InvalidInput(_))));
        let bad = r#"{"system": {"kind": "linear", "matrix": [[2, 1], [1, 1]], "extra": 1}}"#;
        assert!(ExperimentConfig::parse(bad).is_err());
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(ExperimentConfig::parse(&CAT.replace("\"1e-5\"", "\"1e-5x\"")).is_err());
        let c = ExperimentConfig::parse(&CAT.replace("[1, \"1\"]", "[1, 1.5]")).unwrap();
        assert!(c.build_system().is_err());
    }

    #[test]
    fn sweep_levels_are_sorted_and_checked() {
        let text = CAT.replace("\"d\": \"1e-5\"", "\"d_list\": [1e-3, 1e-6, \"1e-4\", 1e-5]");
        let c = ExperimentConfig::parse(&text).unwrap();
        let t = c.trajectory().unwrap();
        assert_eq!(t.sweep_ds().unwrap(), vec![1e-6, 1e-5, 1e-4, 1e-3]);
        assert!(t.single_d().is_err());
        let short = CAT.replace("\"d\": \"1e-5\"", "\"d_list\": [1e-3]");
        let c = ExperimentConfig::parse(&short).unwrap();
        assert!(c.trajectory().unwrap().sweep_ds().is_err());
    }

    #[test]
    fn skew_needs_fiber_parameters() {
        let c = ExperimentConfig::parse(r#"{"system": {"kind": "skew_product", "matrix": [[2, 1], [1, 1]]}}"#).unwrap();
        assert!(c.build_system().is_err());
        let c = ExperimentConfig::parse(
            r#"{"system": {"kind": "skew_product", "matrix": [[2, 1], [1, 1]], "c0": 0.01, "c1": "0.1"}}"#,
        )
        .unwrap();
        assert_eq!(c.build_system().unwrap().dim(), 3);
    }

    #[test]
    fn seeds_scale_by_radius() {
        let text = CAT.replace("\"trajectory\"", "\"probe_seeds\": [0, 0.5, [-1]], \"trajectory\"");
        let c = ExperimentConfig::parse(&text).unwrap();
        let s = c.seeds(2.0).unwrap();
        assert_eq!(s[1].comps, vec![1.0]);
        assert_eq!(s[2].comps, vec![-2.0]);
    }
}
