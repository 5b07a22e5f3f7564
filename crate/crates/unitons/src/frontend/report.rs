//! Report types and output emission. Every run produces a JSON report
//! echoing the config, the effective tolerances, and per-check results;
//! sweeps additionally produce a flat CSV table with a fixed column order.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::frontend::config::ExperimentConfig;
use crate::looppoly::MatrixLaurentPoly;

pub const CSV_HEADER: &str =
    "mu_re,mu_im,unitarity,ext_residual,harm_residual,cocycle,gram_det_min,factor_error";

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// One μ slice of a sweep. `cocycle` is NaN on rows where it is not
/// evaluated (the homomorphism property is claimed only at μ = 0).
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub mu_re: f64,
    pub mu_im: f64,
    pub unitarity: f64,
    pub ext_residual: f64,
    pub harm_residual: f64,
    pub cocycle: f64,
    pub gram_det_min: f64,
    pub factor_error: f64,
}

/// S¹-invariance diagnostics of the μ = 0 slice.
#[derive(Debug, Clone, Serialize)]
pub struct S1Block {
    pub nesting: f64,
    pub dz_residual: f64,
    pub dzbar_residual: f64,
    pub exponents: Option<Vec<i64>>,
    pub exponent_sum: Option<i64>,
    pub det_degree: i64,
    pub spectrum_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridEcho {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub grid: GridEcho,
    pub rows: Vec<SweepRow>,
    pub s1: Option<S1Block>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizeReport {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub grid: GridEcho,
    pub unitarity: f64,
    pub factor_count: usize,
    /// Factor dimensions at the grid center.
    pub factor_dims: Vec<usize>,
    /// Whether count and dimensions are the same at every grid point.
    pub dims_uniform: bool,
    pub det_degree: i64,
    pub max_product_error: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Laurent coefficients of one loop, for external consumption:
/// `coeffs[k]` is the matrix of λ^{kmin+k}, entries as [re, im].
#[derive(Debug, Clone, Serialize)]
pub struct LoopEcho {
    pub n: usize,
    pub kmin: i64,
    pub coeffs: Vec<Vec<Vec<[f64; 2]>>>,
}

impl LoopEcho {
    pub fn from_loop(l: &MatrixLaurentPoly) -> Self {
        let n = l.n();
        let coeffs = (l.kmin()..=l.kmax())
            .map(|k| {
                let m = l.coeff(k);
                (0..n)
                    .map(|r| (0..n).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                    .collect()
            })
            .collect();
        LoopEcho {
            n,
            kmin: l.kmin(),
            coeffs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformReport {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub grid: GridEcho,
    pub mu: [f64; 2],
    pub row: SweepRow,
    pub factor_count: usize,
    pub factor_dims: Vec<usize>,
    /// The deformed loop at the grid center point.
    pub center_loop: LoopEcho,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSet {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub unitarity: f64,
    pub ext_residual: f64,
    pub harm_residual: f64,
    pub grassmann_residual: f64,
    pub harmonic_map_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub coarse: ResidualSet,
    pub fine: ResidualSet,
    /// log₂(coarse/fine); near 2 for an O(h²) residual.
    pub ext_order: f64,
    pub harm_order: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// The union type the CLI serializes; each variant flattens to its own
/// shape with a distinguishing `command` field.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Report {
    Sweep(SweepReport),
    Factorize(FactorizeReport),
    Deform(DeformReport),
    Verify(VerifyReport),
}

impl Report {
    pub fn checks(&self) -> &[CheckResult] {
        match self {
            Report::Sweep(r) => &r.checks,
            Report::Factorize(r) => &r.checks,
            Report::Deform(r) => &r.checks,
            Report::Verify(r) => &r.checks,
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            Report::Sweep(r) => r.passed,
            Report::Factorize(r) => r.passed,
            Report::Deform(r) => r.passed,
            Report::Verify(r) => r.passed,
        }
    }

    pub fn table(&self) -> Option<String> {
        match self {
            Report::Sweep(r) => Some(sweep_csv(&r.rows)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Fixed-width scientific notation: deterministic, full double precision,
/// uniform across platforms.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 + 160 * rows.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            r.mu_re,
            r.mu_im,
            r.unitarity,
            r.ext_residual,
            r.harm_residual,
            r.cocycle,
            r.gram_det_min,
            r.factor_error,
        ];
        let line: Vec<String> = cells.iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Writes report.json (and table.csv for sweeps) under `dir`.
pub fn emit_outputs(report: &Report, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json_path = dir.join("report.json");
    std::fs::write(&json_path, report.to_json()?)?;
    written.push(json_path);
    if let Some(table) = report.table() {
        let csv_path = dir.join("table.csv");
        std::fs::write(&csv_path, table)?;
        written.push(csv_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape_and_header() {
        let rows = vec![SweepRow {
            mu_re: 0.5,
            mu_im: 0.0,
            unitarity: 1e-15,
            ext_residual: 2e-4,
            harm_residual: 3e-4,
            cocycle: f64::NAN,
            gram_det_min: 0.75,
            factor_error: 1e-14,
        }];
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 8);
        assert!(row.starts_with("5.0000000000000000e-1,0.0000000000000000e0,"));
        assert!(row.contains("NaN"));
        assert!(lines.next().is_none());

        assert_eq!(sweep_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn float_format_is_stable() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.03125), "-3.1250000000000000e-2");
        let v = 0.1 + 0.2;
        assert_eq!(fmt_float(v), "3.0000000000000004e-1");
    }

    #[test]
    fn loop_echo_round_trips_coefficients() {
        use crate::linalg::CMatrix;
        use num_complex::Complex64;
        let m0 = CMatrix::identity(2, 2);
        let m1 = CMatrix::from_diagonal_element(2, 2, Complex64::new(0.0, 1.0));
        let l = MatrixLaurentPoly::new(2, 0, vec![m0, m1]);
        let echo = LoopEcho::from_loop(&l);
        assert_eq!(echo.kmin, 0);
        assert_eq!(echo.coeffs.len(), 2);
        assert_eq!(echo.coeffs[0][0][0], [1.0, 0.0]);
        assert_eq!(echo.coeffs[1][1][1], [0.0, 1.0]);
    }
}
