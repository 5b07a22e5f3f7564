//! Experiment configuration: JSON schema, defaults, validation, and
//! compilation of frame expressions into evaluable uniton data.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::expr::{parse_expr, Expr};
use crate::geometry::GridDomain;
use crate::linalg::{CMatrix, CVector};

pub const CHECK_NAMES: &[&str] = &[
    "unitarity",
    "factorization",
    "gram",
    "cocycle",
    "s1_structure",
    "extended_order",
    "harmonicity_order",
];

fn default_checks() -> Vec<String> {
    CHECK_NAMES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub unitons: Vec<UnitonSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub mu: MuSpec,
    #[serde(default = "default_lambda_samples")]
    pub lambda_samples: usize,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_lambda_samples() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitonSpec {
    /// Columns of the frame matrix; each column is n expressions.
    pub columns: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            xmin: -1.0,
            xmax: 1.0,
            ymin: -1.0,
            ymax: 1.0,
            nx: 33,
            ny: 33,
        }
    }
}

impl GridSpec {
    pub fn domain(&self) -> Result<GridDomain> {
        if self.nx < 5 || self.ny < 5 {
            return Err(Error::Config(format!(
                "grid.nx and grid.ny must be at least 5, got {} x {}",
                self.nx, self.ny
            )));
        }
        let hx = (self.xmax - self.xmin) / (self.nx - 1) as f64;
        let hy = (self.ymax - self.ymin) / (self.ny - 1) as f64;
        if !(hx > 0.0 && hy > 0.0) {
            return Err(Error::Config(
                "grid extents must satisfy xmax > xmin and ymax > ymin".into(),
            ));
        }
        if (hx - hy).abs() > 1e-12 * hx.max(hy) {
            return Err(Error::Config(format!(
                "grid spacing must be uniform in both directions, got hx = {hx}, hy = {hy}"
            )));
        }
        GridDomain::new(self.nx, self.ny, self.xmin, self.ymin, hx)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Overrides the point counts while keeping the physical extents.
    pub fn with_points(&self, n: usize) -> GridSpec {
        GridSpec {
            nx: n,
            ny: n,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuSpec {
    /// μ = t e^{iθ} for `samples` values of t equispaced on [-1, 1].
    Line { line_angle: f64, samples: usize },
    /// Explicit list of [re, im] pairs.
    List { list: Vec<[f64; 2]> },
}

impl Default for MuSpec {
    fn default() -> Self {
        MuSpec::Line {
            line_angle: 0.0,
            samples: 21,
        }
    }
}

impl MuSpec {
    pub fn values(&self) -> Vec<Complex64> {
        match self {
            MuSpec::Line {
                line_angle,
                samples,
            } => {
                let dir = Complex64::from_polar(1.0, *line_angle);
                if *samples == 1 {
                    return vec![Complex64::new(0.0, 0.0)];
                }
                (0..*samples)
                    .map(|k| {
                        let v = dir * (-1.0 + 2.0 * k as f64 / (*samples - 1) as f64);
                        // +0.0 clears negative zeros so reports are sign-stable.
                        Complex64::new(v.re + 0.0, v.im + 0.0)
                    })
                    .collect()
            }
            MuSpec::List { list } => list
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let empty = match self {
            MuSpec::Line { samples, .. } => *samples == 0,
            MuSpec::List { list } => list.is_empty(),
        };
        if empty {
            return Err(Error::Config(
                "mu sweep must contain at least one value".into(),
            ));
        }
        Ok(())
    }
}

/// All tolerances used by the check harness, echoed into every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Algebraic identities: unitarity defects, factor reconstruction.
    #[serde(default = "d_algebraic")]
    pub algebraic: f64,
    /// Subspace comparisons (principal angles) and nesting residuals.
    #[serde(default = "d_subspace")]
    pub subspace: f64,
    /// Homomorphism defect of the μ = 0 limit.
    #[serde(default = "d_cocycle")]
    pub cocycle: f64,
    /// Lower bound on the scale-free Gram determinant.
    #[serde(default = "d_gram_min")]
    pub gram_min: f64,
    /// Accepted band for measured convergence orders of O(h²) residuals.
    #[serde(default = "d_order_low")]
    pub order_low: f64,
    #[serde(default = "d_order_high")]
    pub order_high: f64,
    /// Residuals below this floor pass order checks outright (the
    /// quantity is zero up to rounding, so no order can be measured).
    #[serde(default = "d_residual_floor")]
    pub residual_floor: f64,
}

fn d_algebraic() -> f64 {
    1e-9
}
fn d_subspace() -> f64 {
    1e-8
}
fn d_cocycle() -> f64 {
    1e-8
}
fn d_gram_min() -> f64 {
    1e-10
}
fn d_order_low() -> f64 {
    1.7
}
fn d_order_high() -> f64 {
    2.3
}
fn d_residual_floor() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: d_algebraic(),
            subspace: d_subspace(),
            cocycle: d_cocycle(),
            gram_min: d_gram_min(),
            order_low: d_order_low(),
            order_high: d_order_high(),
            residual_floor: d_residual_floor(),
        }
    }
}

impl Tolerances {
    pub fn override_entry(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "algebraic" => self.algebraic = value,
            "subspace" => self.subspace = value,
            "cocycle" => self.cocycle = value,
            "gram_min" => self.gram_min = value,
            "order_low" => self.order_low = value,
            "order_high" => self.order_high = value,
            "residual_floor" => self.residual_floor = value,
            _ => {
                return Err(Error::Config(format!(
                    "unknown tolerance '{key}' (known: algebraic, subspace, cocycle, \
                     gram_min, order_low, order_high, residual_floor)"
                )))
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.unitons.is_empty() {
            return Err(Error::Config(
                "at least one uniton frame is required".into(),
            ));
        }
        for (u, spec) in self.unitons.iter().enumerate() {
            if spec.columns.is_empty() {
                return Err(Error::Config(format!("uniton {u} has no columns")));
            }
            if spec.columns.len() >= self.n {
                return Err(Error::Config(format!(
                    "uniton {u} has {} columns; a proper subspace of C^{} needs fewer",
                    spec.columns.len(),
                    self.n
                )));
            }
            for (c, col) in spec.columns.iter().enumerate() {
                if col.len() != self.n {
                    return Err(Error::Config(format!(
                        "uniton {u}, column {c} has {} entries, expected n = {}",
                        col.len(),
                        self.n
                    )));
                }
                for (r, entry) in col.iter().enumerate() {
                    parse_expr(entry).map_err(|e| {
                        Error::Config(format!("uniton {u}, column {c}, entry {r}: {e}"))
                    })?;
                }
            }
        }
        self.grid.domain()?;
        self.mu.validate()?;
        if self.lambda_samples < 4 {
            return Err(Error::Config(format!(
                "lambda_samples must be at least 4, got {}",
                self.lambda_samples
            )));
        }
        for name in &self.checks {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown check '{name}' (known: {})",
                    CHECK_NAMES.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<CompiledExperiment> {
        let grid = self.grid.domain()?;
        let unitons = self
            .unitons
            .iter()
            .map(|spec| {
                spec.columns
                    .iter()
                    .map(|col| {
                        col.iter()
                            .map(|e| parse_expr(e))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledExperiment {
            n: self.n,
            grid,
            unitons,
        })
    }

    pub fn has_check(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c == name)
    }
}

/// Parsed frames ready for evaluation on a grid.
#[derive(Debug, Clone)]
pub struct CompiledExperiment {
    pub n: usize,
    pub grid: GridDomain,
    /// unitons[j][c][r]: row r of column c of the frame of uniton j.
    pub unitons: Vec<Vec<Vec<Expr>>>,
}

impl CompiledExperiment {
    /// Evaluates the frame matrix of uniton `j` at a point.
    pub fn frame_at(&self, j: usize, z: Complex64) -> CMatrix {
        let cols: Vec<CVector> = self.unitons[j]
            .iter()
            .map(|col| CVector::from_iterator(col.len(), col.iter().map(|e| e.eval(z))))
            .collect();
        CMatrix::from_columns(&cols)
    }

    pub fn uniton_field(&self) -> Result<crate::geometry::UnitonField> {
        let fns: Vec<Box<dyn Fn(Complex64) -> CMatrix + Sync>> = (0..self.unitons.len())
            .map(|j| {
                let me = self.clone();
                Box::new(move |z| me.frame_at(j, z)) as Box<dyn Fn(Complex64) -> CMatrix + Sync>
            })
            .collect();
        let refs: Vec<&(dyn Fn(Complex64) -> CMatrix + Sync)> =
            fns.iter().map(|f| f.as_ref()).collect();
        crate::geometry::UnitonField::from_frames(self.grid, self.n, &refs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg =
            ExperimentConfig::from_json(r#"{"n": 2, "unitons": [{"columns": [["1", "z"]]}]}"#)
                .unwrap();
        assert_eq!(cfg.grid.nx, 33);
        assert_eq!(cfg.lambda_samples, 64);
        assert_eq!(cfg.mu.values().len(), 21);
        assert!(cfg.has_check("unitarity"));
        assert_eq!(cfg.tolerances.algebraic, 1e-9);
        let grid = cfg.grid.domain().unwrap();
        assert_eq!(grid.nx(), 33);
        assert!((grid.h() - 2.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn errors_name_the_offending_field() {
        let err =
            ExperimentConfig::from_json(r#"{"n": 2, "unitons": [{"columns": [["1", "z", "0"]]}]}"#)
                .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("uniton 0, column 0"), "got: {msg}");

        let err =
            ExperimentConfig::from_json(r#"{"n": 2, "unitons": [{"columns": [["1", "w"]]}]}"#)
                .unwrap_err();
        assert!(err.to_string().contains("entry 1"), "got: {err}");

        let err = ExperimentConfig::from_json(
            r#"{"n": 2, "unitons": [{"columns": [["1", "z"]]}, {"columns": [["1", "0"], ["0", "1"]]}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("proper subspace"), "got: {err}");
    }

    #[test]
    fn unknown_fields_and_checks_are_rejected() {
        assert!(ExperimentConfig::from_json(
            r#"{"n": 2, "unitons": [{"columns": [["1", "z"]]}], "grib": 3}"#
        )
        .is_err());
        let err = ExperimentConfig::from_json(
            r#"{"n": 2, "unitons": [{"columns": [["1", "z"]]}], "checks": ["unicorn"]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown check"), "got: {err}");
    }

    #[test]
    fn mu_spec_variants() {
        let cfg = ExperimentConfig::from_json(
            r#"{"n": 2, "unitons": [{"columns": [["1", "z"]]}],
                "mu": {"line_angle": 0.0, "samples": 3}}"#,
        )
        .unwrap();
        let vals = cfg.mu.values();
        assert_eq!(vals.len(), 3);
        assert!((vals[0].re + 1.0).abs() < 1e-15);
        assert!(vals[1].norm() < 1e-15);
        assert!((vals[2].re - 1.0).abs() < 1e-15);

        let cfg = ExperimentConfig::from_json(
            r#"{"n": 2, "unitons": [{"columns": [["1", "z"]]}],
                "mu": {"list": [[0.0, 0.0], [0.5, 0.5]]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.mu.values()[1], Complex64::new(0.5, 0.5));
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.override_entry("gram_min", 1e-12).unwrap();
        assert_eq!(t.gram_min, 1e-12);
        assert!(t.override_entry("bogus", 1.0).is_err());
    }

    #[test]
    fn compiled_frames_evaluate() {
        let cfg = ExperimentConfig::from_json(
            r#"{"n": 3, "unitons": [
                {"columns": [["1", "z", "z^2"]]},
                {"columns": [["1", "z", "z^2"], ["0", "1", "2*z"]]}
            ]}"#,
        )
        .unwrap();
        let compiled = cfg.compile().unwrap();
        let z = Complex64::new(0.5, 0.25);
        let f = compiled.frame_at(1, z);
        assert_eq!(f.ncols(), 2);
        assert_eq!(f[(2, 0)], z * z);
        assert_eq!(f[(2, 1)], 2.0 * z);
        let uf = compiled.uniton_field().unwrap();
        assert_eq!(uf.factor_count(), 2);
    }
}
