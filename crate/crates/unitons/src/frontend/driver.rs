//! Drivers for the CLI subcommands. Each one builds the configured
//! uniton field, computes the quantities its report promises, and runs
//! the subset of requested checks it knows how to evaluate.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorization::factorize_segal;
use crate::frontend::config::{CompiledExperiment, ExperimentConfig};
use crate::frontend::report::{
    CheckResult, DeformReport, FactorizeReport, GridEcho, LoopEcho, ResidualSet, S1Block,
    SweepReport, SweepRow, VerifyReport,
};
use crate::geometry::{
    cocycle_defect_field, extended_solution_residual, grassmann_residual, harmonic_map_residual,
    harmonicity_residual, s1_structure_residuals, spectrum_exponents, DeformedField, FamilyField,
    GridDomain,
};

const COCYCLE_SAMPLES: usize = 16;

fn grid_echo(grid: GridDomain) -> GridEcho {
    GridEcho {
        nx: grid.nx(),
        ny: grid.ny(),
        h: grid.h(),
    }
}

fn center(grid: GridDomain) -> (usize, usize) {
    (grid.nx() / 2, grid.ny() / 2)
}

fn sweep_row(mu: Complex64, d: &DeformedField, lambda_samples: usize) -> SweepRow {
    let cocycle = if mu.norm() == 0.0 {
        cocycle_defect_field(&d.loops, COCYCLE_SAMPLES)
    } else {
        f64::NAN
    };
    SweepRow {
        mu_re: mu.re,
        mu_im: mu.im,
        unitarity: d.loops.unitarity_defect(lambda_samples),
        ext_residual: extended_solution_residual(&d.loops),
        harm_residual: harmonicity_residual(&d.loops),
        cocycle,
        gram_det_min: d.gram_rel_det_min,
        factor_error: d.factor_error,
    }
}

fn s1_block(d: &DeformedField) -> Result<S1Block> {
    let s = s1_structure_residuals(&d.bundles)?;
    let grid = d.loops.grid();
    let (cx, cy) = center(grid);
    let det_degree = d.loops.get(cx, cy).det_degree()?;
    let (exponents, exponent_sum, spectrum_error) = match spectrum_exponents(&d.loops) {
        Ok(e) => {
            let sum = e.iter().sum();
            (Some(e), Some(sum), None)
        }
        Err(err) => (None, None, Some(err.to_string())),
    };
    Ok(S1Block {
        nesting: s.nesting,
        dz_residual: s.dz_residual,
        dzbar_residual: s.dzbar_residual,
        exponents,
        exponent_sum,
        det_degree,
        spectrum_error,
    })
}

fn unitarity_check(worst: f64, tol: f64) -> CheckResult {
    CheckResult::new(
        "unitarity",
        worst <= tol,
        format!("max defect {worst:.3e}, tolerance {tol:.3e}"),
    )
}

fn factorization_check(worst: f64, tol: f64) -> CheckResult {
    CheckResult::new(
        "factorization",
        worst <= tol,
        format!("max product reconstruction error {worst:.3e}, tolerance {tol:.3e}"),
    )
}

fn gram_check(min: f64, floor: f64) -> CheckResult {
    CheckResult::new(
        "gram",
        min >= floor,
        format!("min relative Gram determinant {min:.3e}, floor {floor:.3e}"),
    )
}

fn cocycle_check(defect: f64, tol: f64) -> CheckResult {
    CheckResult::new(
        "cocycle",
        defect <= tol,
        format!("max homomorphism defect {defect:.3e} at mu = 0, tolerance {tol:.3e}"),
    )
}

fn s1_check(block: &S1Block, subspace_tol: f64, h: f64) -> CheckResult {
    // ∂-inclusion residuals are finite-difference limited, so their
    // tolerance cannot drop below the stencil error scale.
    let fd_tol = subspace_tol.max(10.0 * h * h);
    let spectrum_ok = block.exponent_sum == Some(block.det_degree);
    let passed = block.nesting <= subspace_tol
        && block.dz_residual <= fd_tol
        && block.dzbar_residual <= fd_tol
        && spectrum_ok;
    let spectrum_txt = match (&block.exponents, &block.spectrum_error) {
        (Some(e), _) => format!("exponents {:?} with det degree {}", e, block.det_degree),
        (_, Some(err)) => format!("spectrum fit failed: {err}"),
        _ => String::from("spectrum unavailable"),
    };
    CheckResult::new(
        "s1_structure",
        passed,
        format!(
            "nesting {:.3e} (tol {:.3e}), dz {:.3e} and dzbar {:.3e} (tol {:.3e}), {}",
            block.nesting,
            subspace_tol,
            block.dz_residual,
            block.dzbar_residual,
            fd_tol,
            spectrum_txt
        ),
    )
}

/// Deforms the configured field across the μ grid and collects one table
/// row per μ plus S¹-invariance diagnostics of the μ = 0 slice.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let compiled = cfg.compile()?;
    let uf = compiled.uniton_field()?;
    let family = FamilyField::from_unitons(&uf)?;
    let grid = compiled.grid;

    let mut rows = Vec::new();
    let mut s1 = None;
    for mu in cfg.mu.values() {
        let d = family
            .deform(mu)
            .map_err(|e| Error::Inconsistent(format!("sweep failed at mu = {mu}: {e}")))?;
        if mu.norm() == 0.0 && s1.is_none() {
            s1 = Some(s1_block(&d)?);
        }
        rows.push(sweep_row(mu, &d, cfg.lambda_samples));
    }

    let t = &cfg.tolerances;
    let mut checks = Vec::new();
    if cfg.has_check("unitarity") {
        let worst = rows.iter().map(|r| r.unitarity).fold(0.0, f64::max);
        checks.push(unitarity_check(worst, t.algebraic));
    }
    if cfg.has_check("factorization") {
        let worst = rows.iter().map(|r| r.factor_error).fold(0.0, f64::max);
        checks.push(factorization_check(worst, t.algebraic));
    }
    if cfg.has_check("gram") {
        let min = rows
            .iter()
            .map(|r| r.gram_det_min)
            .fold(f64::INFINITY, f64::min);
        checks.push(gram_check(min, t.gram_min));
    }
    if cfg.has_check("cocycle") {
        if let Some(r) = rows.iter().find(|r| r.mu_re == 0.0 && r.mu_im == 0.0) {
            checks.push(cocycle_check(r.cocycle, t.cocycle));
        }
    }
    if cfg.has_check("s1_structure") {
        if let Some(block) = &s1 {
            checks.push(s1_check(block, t.subspace, grid.h()));
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(SweepReport {
        command: "sweep",
        config: cfg.clone(),
        grid: grid_echo(grid),
        rows,
        s1,
        checks,
        passed,
    })
}

/// Deforms the configured field at a single μ and reports one row plus
/// the deformed loop at the grid center.
pub fn run_deform(cfg: &ExperimentConfig, mu: Complex64) -> Result<DeformReport> {
    let compiled = cfg.compile()?;
    let uf = compiled.uniton_field()?;
    let family = FamilyField::from_unitons(&uf)?;
    let grid = compiled.grid;
    let d = family
        .deform(mu)
        .map_err(|e| Error::Inconsistent(format!("deformation failed at mu = {mu}: {e}")))?;
    let row = sweep_row(mu, &d, cfg.lambda_samples);
    let (cx, cy) = center(grid);
    let factor_dims: Vec<usize> = d.bundles.iter().map(|b| b.get(cx, cy).dim()).collect();
    let center_loop = LoopEcho::from_loop(d.loops.get(cx, cy));

    let t = &cfg.tolerances;
    let mut checks = Vec::new();
    if cfg.has_check("unitarity") {
        checks.push(unitarity_check(row.unitarity, t.algebraic));
    }
    if cfg.has_check("factorization") {
        checks.push(factorization_check(row.factor_error, t.algebraic));
    }
    if cfg.has_check("gram") {
        checks.push(gram_check(row.gram_det_min, t.gram_min));
    }
    if cfg.has_check("cocycle") && mu.norm() == 0.0 {
        checks.push(cocycle_check(row.cocycle, t.cocycle));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(DeformReport {
        command: "deform",
        config: cfg.clone(),
        grid: grid_echo(grid),
        mu: [mu.re, mu.im],
        row,
        factor_count: d.bundles.len(),
        factor_dims,
        center_loop,
        checks,
        passed,
    })
}

/// Rebuilds Blaschke-Potapov factors of the configured loop field from
/// scratch at every grid point and reports the reconstruction quality.
pub fn run_factorize(cfg: &ExperimentConfig) -> Result<FactorizeReport> {
    let compiled = cfg.compile()?;
    let uf = compiled.uniton_field()?;
    let loops = uf.loop_field();
    let grid = compiled.grid;
    let unitarity = loops.unitarity_defect(cfg.lambda_samples);

    let results: Vec<(Vec<usize>, f64)> = grid
        .points()
        .into_par_iter()
        .map(|(ix, iy)| {
            let input = loops.get(ix, iy);
            let fact = factorize_segal(input).map_err(|e| {
                Error::Inconsistent(format!(
                    "factorization failed at z = {}: {e}",
                    grid.z(ix, iy)
                ))
            })?;
            let dims = fact.factors().iter().map(|s| s.dim()).collect();
            Ok((dims, fact.verify_product(input, COCYCLE_SAMPLES)))
        })
        .collect::<Result<Vec<_>>>()?;

    let (cx, cy) = center(grid);
    let center_dims = results[grid.idx(cx, cy)].0.clone();
    let dims_uniform = results.iter().all(|(d, _)| *d == center_dims);
    let max_product_error = results.iter().map(|&(_, e)| e).fold(0.0, f64::max);
    let det_degree = loops.get(cx, cy).det_degree()?;

    let t = &cfg.tolerances;
    let mut checks = Vec::new();
    if cfg.has_check("unitarity") {
        checks.push(unitarity_check(unitarity, t.algebraic));
    }
    if cfg.has_check("factorization") {
        checks.push(factorization_check(max_product_error, t.algebraic));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(FactorizeReport {
        command: "factorize",
        config: cfg.clone(),
        grid: grid_echo(grid),
        unitarity,
        factor_count: center_dims.len(),
        factor_dims: center_dims,
        dims_uniform,
        det_degree,
        max_product_error,
        checks,
        passed,
    })
}

fn residual_set(c: &CompiledExperiment, lambda_samples: usize) -> Result<ResidualSet> {
    let uf = c.uniton_field()?;
    let loops = uf.loop_field();
    Ok(ResidualSet {
        nx: c.grid.nx(),
        ny: c.grid.ny(),
        h: c.grid.h(),
        unitarity: loops.unitarity_defect(lambda_samples),
        ext_residual: extended_solution_residual(&loops),
        harm_residual: harmonicity_residual(&loops),
        grassmann_residual: grassmann_residual(&loops)?,
        harmonic_map_residual: harmonic_map_residual(&loops),
    })
}

fn order_check(
    name: &str,
    coarse: f64,
    fine: f64,
    order: f64,
    low: f64,
    high: f64,
    floor: f64,
) -> CheckResult {
    if fine <= floor {
        return CheckResult::new(
            name,
            true,
            format!("residual {fine:.3e} is below the rounding floor {floor:.3e}"),
        );
    }
    CheckResult::new(
        name,
        order >= low && order <= high,
        format!(
            "measured order {order:.2} (residual {coarse:.3e} at h, {fine:.3e} at h/2), \
             accepted band [{low}, {high}]"
        ),
    )
}

/// Measures every residual at the configured grid and at its refinement,
/// and checks the implied convergence orders.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let compiled = cfg.compile()?;
    let mut refined = compiled.clone();
    refined.grid = compiled.grid.refine();

    let coarse = residual_set(&compiled, cfg.lambda_samples)?;
    let fine = residual_set(&refined, cfg.lambda_samples)?;
    let ext_order = (coarse.ext_residual / fine.ext_residual).log2();
    let harm_order = (coarse.harm_residual / fine.harm_residual).log2();

    let t = &cfg.tolerances;
    let mut checks = Vec::new();
    if cfg.has_check("unitarity") {
        checks.push(unitarity_check(
            coarse.unitarity.max(fine.unitarity),
            t.algebraic,
        ));
    }
    if cfg.has_check("extended_order") {
        checks.push(order_check(
            "extended_order",
            coarse.ext_residual,
            fine.ext_residual,
            ext_order,
            t.order_low,
            t.order_high,
            t.residual_floor,
        ));
    }
    if cfg.has_check("harmonicity_order") {
        checks.push(order_check(
            "harmonicity_order",
            coarse.harm_residual,
            fine.harm_residual,
            harm_order,
            t.order_low,
            t.order_high,
            t.residual_floor,
        ));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        command: "verify",
        config: cfg.clone(),
        coarse,
        fine,
        ext_order,
        harm_order,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::report::sweep_csv;

    fn one_uniton_cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"n": 2, "unitons": [{{"columns": [["1", "z"]]}}],
                "grid": {{"xmin": -1.0, "xmax": 1.0, "ymin": -1.0, "ymax": 1.0, "nx": 9, "ny": 9}},
                "mu": {{"list": [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]}}{extra}}}"#
        ))
        .unwrap()
    }

    fn e5_cfg(mu_json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"n": 2,
                "unitons": [{{"columns": [["1", "0"]]}}, {{"columns": [["1", "1"]]}}],
                "grid": {{"xmin": -1.0, "xmax": 1.0, "ymin": -1.0, "ymax": 1.0, "nx": 5, "ny": 5}},
                "mu": {mu_json}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn one_uniton_sweep_is_a_fixed_point() {
        let cfg = one_uniton_cfg("");
        let rep = run_sweep(&cfg).unwrap();
        assert!(rep.passed, "checks: {:?}", rep.checks);
        assert_eq!(rep.rows.len(), 3);
        for r in &rep.rows {
            assert!(r.unitarity < 1e-12);
            assert!(r.factor_error < 1e-12);
            assert!(r.gram_det_min > 0.9);
        }
        let s1 = rep.s1.as_ref().unwrap();
        assert_eq!(s1.exponents.as_deref(), Some(&[1, 0][..]));
        assert_eq!(s1.det_degree, 1);
        assert!(s1.nesting < 1e-12);
        assert!(rep.rows[0].cocycle < 1e-12);
        assert!(rep.rows[1].cocycle.is_nan());
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = one_uniton_cfg("");
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(sweep_csv(&a.rows), sweep_csv(&b.rows));
        assert_eq!(
            crate::frontend::report::Report::Sweep(a).to_json().unwrap(),
            crate::frontend::report::Report::Sweep(b).to_json().unwrap()
        );
    }

    #[test]
    fn e5_deform_limit_and_checks() {
        let cfg = e5_cfg(r#"{"list": [[0.0, 0.0]]}"#);
        let rep = run_deform(&cfg, num_complex::Complex64::new(0.0, 0.0)).unwrap();
        assert!(rep.passed, "checks: {:?}", rep.checks);
        assert_eq!(rep.factor_dims, vec![1, 1]);
        // Φ⁰ = diag(1, λ²) for the E5 pair.
        assert_eq!(rep.center_loop.kmin, 0);
        assert_eq!(rep.center_loop.coeffs.len(), 3);
        assert!((rep.center_loop.coeffs[0][0][0][0] - 1.0).abs() < 1e-12);
        assert!((rep.center_loop.coeffs[2][1][1][0] - 1.0).abs() < 1e-12);
        assert!(rep.center_loop.coeffs[1][0][1][0].abs() < 1e-12);
        assert!(rep.row.cocycle < 1e-12);
        assert!((rep.row.gram_det_min - 0.5).abs() < 1e-12);
    }

    #[test]
    fn e5_sweep_fails_with_tight_gram_floor() {
        let mut cfg = e5_cfg(r#"{"line_angle": 0.0, "samples": 5}"#);
        cfg.tolerances.override_entry("gram_min", 0.9).unwrap();
        let rep = run_sweep(&cfg).unwrap();
        assert!(!rep.passed);
        let gram = rep.checks.iter().find(|c| c.name == "gram").unwrap();
        assert!(!gram.passed);
        let others_ok = rep
            .checks
            .iter()
            .filter(|c| c.name != "gram")
            .all(|c| c.passed);
        assert!(others_ok, "checks: {:?}", rep.checks);
    }

    #[test]
    fn factorize_reports_uniform_dims() {
        let cfg = e5_cfg(r#"{"list": [[1.0, 0.0]]}"#);
        let rep = run_factorize(&cfg).unwrap();
        assert!(rep.passed, "checks: {:?}", rep.checks);
        assert!(rep.dims_uniform);
        assert_eq!(rep.factor_dims, vec![1, 1]);
        assert_eq!(rep.det_degree, 2);
        assert!(rep.max_product_error < 1e-10);
    }

    #[test]
    fn verify_measures_second_order() {
        let cfg = one_uniton_cfg(r#", "lambda_samples": 16"#);
        let rep = run_verify(&cfg).unwrap();
        assert!(rep.passed, "checks: {:?}", rep.checks);
        assert!(rep.fine.h < rep.coarse.h);
        assert!(
            rep.ext_order > 1.7 && rep.ext_order < 2.3,
            "ext order {}",
            rep.ext_order
        );
        assert!(
            rep.harm_order > 1.7 && rep.harm_order < 2.3,
            "harm order {}",
            rep.harm_order
        );
    }
}
