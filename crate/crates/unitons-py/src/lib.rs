//! Python bindings for the loop-group toolkit: polynomial loops into
//! U(n), their uniton factorizations, and the deformation family μ ↦ Φ^μ.
//!
//! Matrices cross the boundary as row-major nested lists of Python
//! complex numbers; subspaces as lists of spanning column vectors.
//! Failures surface as ValueError carrying the library's message.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use unitons::deformation::DeformationFamily;
use unitons::error::Error;
use unitons::factorization::{factorize_segal, Factorization};
use unitons::frontend::config::ExperimentConfig;
use unitons::frontend::driver::run_sweep;
use unitons::frontend::report::{sweep_csv, Report};
use unitons::linalg::CMatrix;
use unitons::looppoly::{product_of_factors, MatrixLaurentPoly, Subspace};

fn verr(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows_to_matrix(rows: &[Vec<Complex64>]) -> PyResult<CMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if nr == 0 || nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(PyValueError::new_err(
            "expected a nonempty rectangular nested list",
        ));
    }
    if rows
        .iter()
        .flatten()
        .any(|x| !x.re.is_finite() || !x.im.is_finite())
    {
        return Err(PyValueError::new_err("entries must be finite"));
    }
    Ok(CMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix_to_columns(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)]).collect())
        .collect()
}

/// A subspace of C^n, stored as an orthonormal frame.
#[pyclass(name = "Subspace", module = "unitons_py", from_py_object)]
#[derive(Clone)]
struct PySubspace {
    inner: Subspace,
}

#[pymethods]
impl PySubspace {
    /// Span of the given columns (each a length-n list of complex numbers).
    #[new]
    fn new(columns: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let m = rows_to_matrix(&columns)?.transpose();
        Ok(Self {
            inner: Subspace::from_columns(&m).map_err(verr)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn ambient(&self) -> usize {
        self.inner.ambient()
    }

    /// Orthonormal spanning columns.
    fn frame(&self) -> Vec<Vec<Complex64>> {
        matrix_to_columns(self.inner.frame())
    }

    /// Largest principal angle to another subspace of the same ambient
    /// space, in radians.
    fn max_angle_to(&self, other: &PySubspace) -> PyResult<f64> {
        if self.inner.ambient() != other.inner.ambient() {
            return Err(PyValueError::new_err("ambient dimensions differ"));
        }
        Ok(self.inner.max_angle_to(&other.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Subspace(dim={}, ambient={})",
            self.inner.dim(),
            self.inner.ambient()
        )
    }
}

/// A Laurent-polynomial loop λ ↦ Σ_k T_k λ^k with n x n matrix coefficients.
#[pyclass(name = "Loop", module = "unitons_py", from_py_object)]
#[derive(Clone)]
struct PyLoop {
    inner: MatrixLaurentPoly,
}

#[pymethods]
impl PyLoop {
    /// Loop with coefficients `coeffs[j]` (row-major n x n) at power kmin + j.
    #[new]
    fn new(n: usize, kmin: i64, coeffs: Vec<Vec<Vec<Complex64>>>) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("ambient dimension must be positive"));
        }
        if coeffs.is_empty() {
            return Err(PyValueError::new_err("coefficient list must be nonempty"));
        }
        let mut mats = Vec::with_capacity(coeffs.len());
        for c in &coeffs {
            let m = rows_to_matrix(c)?;
            if m.nrows() != n || m.ncols() != n {
                return Err(PyValueError::new_err("each coefficient must be n x n"));
            }
            mats.push(m);
        }
        Ok(Self {
            inner: MatrixLaurentPoly::new(n, kmin, mats),
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("ambient dimension must be positive"));
        }
        Ok(Self {
            inner: MatrixLaurentPoly::identity(n),
        })
    }

    /// Product Π (π_α + λ π_α^⊥) over the given subspaces of C^n.
    #[staticmethod]
    fn from_factors(n: usize, factors: Vec<PySubspace>) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("ambient dimension must be positive"));
        }
        if factors.iter().any(|f| f.inner.ambient() != n) {
            return Err(PyValueError::new_err(
                "factor ambient dimensions differ from n",
            ));
        }
        let alphas: Vec<Subspace> = factors.into_iter().map(|f| f.inner).collect();
        Ok(Self {
            inner: product_of_factors(n, &alphas),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn kmin(&self) -> i64 {
        self.inner.kmin()
    }

    #[getter]
    fn kmax(&self) -> i64 {
        self.inner.kmax()
    }

    /// Coefficient matrix of λ^k (zero outside [kmin, kmax]).
    fn coeff(&self, k: i64) -> Vec<Vec<Complex64>> {
        matrix_to_rows(&self.inner.coeff(k))
    }

    /// Value at λ; raises for λ = 0 when negative powers are present.
    fn eval(&self, lam: Complex64) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(matrix_to_rows(&self.inner.try_eval(lam).map_err(verr)?))
    }

    fn multiply(&self, other: &PyLoop) -> PyResult<Self> {
        if self.inner.n() != other.inner.n() {
            return Err(PyValueError::new_err("ambient dimensions differ"));
        }
        Ok(Self {
            inner: self.inner.multiply(&other.inner),
        })
    }

    /// λ ↦ L(1/λ̄)^H; the pointwise inverse for loops unitary on the circle.
    fn circle_adjoint(&self) -> Self {
        Self {
            inner: self.inner.circle_adjoint(),
        }
    }

    /// Degree of det L as a monomial in λ; raises when the determinant
    /// is not a monomial (the loop is then not of Blaschke-Potapov form).
    fn det_degree(&self) -> PyResult<i64> {
        self.inner.det_degree().map_err(verr)
    }

    /// The loop λ ↦ L(μλ) L(μ)^{-1}, defined for μ ≠ 0.
    fn substitute_scale(&self, mu: Complex64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.substitute_scale(mu).map_err(verr)?,
        })
    }

    /// Right-normalizes so the value at λ = 1 is the identity.
    fn normalize_at_one(&self) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.normalize_at_one().map_err(verr)?,
        })
    }

    /// max over circle samples of ‖L(λ)^H L(λ) - I‖.
    fn unitarity_defect(&self, samples: usize) -> f64 {
        self.inner.unitarity_defect(samples)
    }

    /// max over circle samples of ‖L(λ) - M(λ)‖.
    fn sup_distance(&self, other: &PyLoop, samples: usize) -> PyResult<f64> {
        if self.inner.n() != other.inner.n() {
            return Err(PyValueError::new_err("ambient dimensions differ"));
        }
        Ok(self.inner.sup_distance(&other.inner, samples))
    }

    fn __repr__(&self) -> String {
        format!(
            "Loop(n={}, kmin={}, kmax={})",
            self.inner.n(),
            self.inner.kmin(),
            self.inner.kmax()
        )
    }
}

/// A uniton factorization b = Π (π_{α_k} + λ π_{α_k}^⊥).
#[pyclass(name = "Factorization", module = "unitons_py")]
struct PyFactorization {
    inner: Factorization,
}

#[pymethods]
impl PyFactorization {
    #[getter]
    fn factors(&self) -> Vec<PySubspace> {
        self.inner
            .factors()
            .iter()
            .map(|s| PySubspace { inner: s.clone() })
            .collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings().to_vec()
    }

    /// Sum of codim α_k = degree of the determinant of the product.
    #[getter]
    fn codim_sum(&self) -> usize {
        self.inner.codim_sum()
    }

    /// The assembled product loop.
    fn product(&self) -> PyLoop {
        PyLoop {
            inner: self.inner.product().clone(),
        }
    }

    /// max over circle samples of ‖Π factors - b‖.
    fn verify_product(&self, b: &PyLoop, samples: usize) -> PyResult<f64> {
        if self.inner.n() != b.inner.n() {
            return Err(PyValueError::new_err("ambient dimensions differ"));
        }
        Ok(self.inner.verify_product(&b.inner, samples))
    }

    fn __len__(&self) -> usize {
        self.inner.factors().len()
    }

    fn __repr__(&self) -> String {
        let dims: Vec<usize> = self.inner.factors().iter().map(|f| f.dim()).collect();
        format!(
            "Factorization(n={}, factor_dims={:?})",
            self.inner.n(),
            dims
        )
    }
}

/// A loop with the graded filtration data needed to deform it: evaluating
/// at μ yields the factorization of Φ^μ, including the μ = 0 limit.
#[pyclass(name = "DeformationFamily", module = "unitons_py")]
struct PyDeformationFamily {
    inner: DeformationFamily,
}

#[pymethods]
impl PyDeformationFamily {
    /// Family through the given polynomial loop (unitary on the circle,
    /// identity at λ = 1 after normalization).
    #[new]
    fn new(b: &PyLoop) -> PyResult<Self> {
        Ok(Self {
            inner: DeformationFamily::segal(&b.inner).map_err(verr)?,
        })
    }

    /// Family through the product of the given factor subspaces.
    #[staticmethod]
    fn from_factors(n: usize, factors: Vec<PySubspace>) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("ambient dimension must be positive"));
        }
        if factors.iter().any(|f| f.inner.ambient() != n) {
            return Err(PyValueError::new_err(
                "factor ambient dimensions differ from n",
            ));
        }
        let alphas: Vec<Subspace> = factors.into_iter().map(|f| f.inner).collect();
        Ok(Self {
            inner: DeformationFamily::from_factors(n, &alphas).map_err(verr)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn level_count(&self) -> usize {
        self.inner.level_count()
    }

    fn base(&self) -> PyLoop {
        PyLoop {
            inner: self.inner.base().clone(),
        }
    }

    /// Scale-free Gram determinant of the transformed filtration basis;
    /// bounded away from zero iff the deformation at μ is well posed.
    fn gram_rel_det(&self, mu: Complex64) -> f64 {
        self.inner.gram_rel_det(mu)
    }

    /// Uniton factorization of the deformed loop at μ.
    fn deform(&self, mu: Complex64) -> PyResult<PyFactorization> {
        Ok(PyFactorization {
            inner: self.inner.deform(mu).map_err(verr)?,
        })
    }

    /// The deformed loop at μ, normalized to the identity at λ = 1.
    fn deform_loop(&self, mu: Complex64) -> PyResult<PyLoop> {
        Ok(PyLoop {
            inner: self.inner.deform_loop(mu).map_err(verr)?,
        })
    }

    /// max over sample pairs of ‖Φ^0(λ_1 λ_2) - Φ^0(λ_1) Φ^0(λ_2)‖:
    /// the μ = 0 limit is a homomorphism S^1 → U(n), so this is a
    /// pure numerical residual.
    fn cocycle_defect_max(&self, samples: usize) -> PyResult<f64> {
        self.inner.cocycle_defect_max(samples).map_err(verr)
    }

    /// Fits polynomials in t to the Gram entries and loop coefficients
    /// along the ray μ = t e^{iθ} and reports the fit residuals.
    fn analyticity_probe<'py>(
        &self,
        py: Python<'py>,
        theta: f64,
        t_samples: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let rep = self
            .inner
            .analyticity_probe(theta, t_samples)
            .map_err(verr)?;
        let d = PyDict::new(py);
        d.set_item("theta", rep.theta)?;
        d.set_item("gram_fit_degree", rep.gram_fit_degree)?;
        d.set_item("gram_max_residual", rep.gram_max_residual)?;
        d.set_item("loop_fit_degree", rep.loop_fit_degree)?;
        d.set_item("loop_max_residual", rep.loop_max_residual)?;
        d.set_item("lambda0", rep.lambda0)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "DeformationFamily(n={}, levels={})",
            self.inner.n(),
            self.inner.level_count()
        )
    }
}

/// Factors a polynomial loop (unitary on the circle, b(1) = I) into
/// unitons via its Segal filtration.
#[pyfunction]
fn factorize(b: &PyLoop) -> PyResult<PyFactorization> {
    Ok(PyFactorization {
        inner: factorize_segal(&b.inner).map_err(verr)?,
    })
}

/// Runs a full μ-sweep experiment from a JSON configuration string and
/// returns (report_json, table_csv), byte-identical across repeated runs.
#[pyfunction]
fn run_sweep_json(config_json: &str) -> PyResult<(String, String)> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(verr)?;
    let rep = run_sweep(&cfg).map_err(verr)?;
    let csv = sweep_csv(&rep.rows);
    let json = Report::Sweep(rep).to_json().map_err(verr)?;
    Ok((json, csv))
}

#[pymodule]
fn unitons_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySubspace>()?;
    m.add_class::<PyLoop>()?;
    m.add_class::<PyFactorization>()?;
    m.add_class::<PyDeformationFamily>()?;
    m.add_function(wrap_pyfunction!(factorize, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep_json, m)?)?;
    Ok(())
}
