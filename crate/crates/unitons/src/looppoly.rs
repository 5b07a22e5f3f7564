//! Matrix Laurent polynomials Σ λ^k T_k and Blaschke-Potapov factors.
//!
//! A loop here is a finite Laurent series with n x n complex matrix
//! coefficients, usually unitary on |λ| = 1. The basic building block is
//! the factor π_α + λ π_α^⊥ attached to a subspace α ⊂ C^n; products of
//! such factors are exactly the polynomial loops with unitary values and
//! value I at λ = 1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, max_abs_entry, max_principal_angle, null_space_floored, orthonormalize_in_order,
    phase_fix_columns, spectral_norm, unit_circle_points, CMatrix,
};

/// Relative threshold below which a coefficient matrix is trimmed away.
pub const TRIM_REL_TOL: f64 = 1e-12;

/// Relative threshold for trimming scalar Laurent coefficients
/// (determinants computed by circle sampling carry slightly larger crumbs).
pub const SCALAR_TRIM_REL_TOL: f64 = 1e-10;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Scalar Laurent polynomial Σ c_k λ^k on a finite exponent window.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    kmin: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentPoly {
    /// Builds and trims; an all-zero input collapses to the zero polynomial
    /// stored as a single zero coefficient at exponent 0.
    pub fn new(kmin: i64, coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "coefficient list must be nonempty");
        let max = coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        if max == 0.0 {
            return LaurentPoly {
                kmin: 0,
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        let cut = SCALAR_TRIM_REL_TOL * max;
        let first = coeffs.iter().position(|c| c.norm() > cut).unwrap();
        let last = coeffs.iter().rposition(|c| c.norm() > cut).unwrap();
        LaurentPoly {
            kmin: kmin + first as i64,
            coeffs: coeffs[first..=last].to_vec(),
        }
    }

    pub fn zero() -> Self {
        LaurentPoly {
            kmin: 0,
            coeffs: vec![Complex64::new(0.0, 0.0)],
        }
    }

    pub fn kmin(&self) -> i64 {
        self.kmin
    }

    pub fn kmax(&self) -> i64 {
        self.kmin + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k < self.kmin || k > self.kmax() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.kmin) as usize]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()))
    }

    pub fn try_eval(&self, lambda: Complex64) -> Result<Complex64> {
        if lambda == Complex64::new(0.0, 0.0) && self.kmin < 0 && !self.is_zero() {
            return Err(Error::Domain(
                "evaluation at 0 with negative exponents".into(),
            ));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * lambda + c;
        }
        if self.kmin != 0 {
            if lambda == Complex64::new(0.0, 0.0) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            acc *= lambda.powi(self.kmin as i32);
        }
        Ok(acc)
    }

    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        self.try_eval(lambda).expect("evaluation in domain")
    }

    /// Exponent and coefficient of the largest term, plus the ratio of the
    /// largest remaining coefficient to it. A loop that is unitary on the
    /// circle has monomial determinant, so the ratio is a defect measure.
    pub fn dominant_monomial(&self) -> (i64, Complex64, f64) {
        let mut best = 0;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() > self.coeffs[best].norm() {
                best = i;
            }
        }
        let lead = self.coeffs[best];
        let mut rest = 0.0f64;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i != best {
                rest = rest.max(c.norm());
            }
        }
        let ratio = if lead.norm() == 0.0 {
            0.0
        } else {
            rest / lead.norm()
        };
        (self.kmin + best as i64, lead, ratio)
    }
}

/// Matrix Laurent polynomial. Coefficients are stored contiguously from
/// `kmin`; the list is never empty and its outer entries are nonzero after
/// trimming (the zero loop is one zero matrix at exponent 0).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLaurentPoly {
    n: usize,
    kmin: i64,
    coeffs: Vec<CMatrix>,
}

impl MatrixLaurentPoly {
    pub fn new(n: usize, kmin: i64, coeffs: Vec<CMatrix>) -> Self {
        assert!(n > 0, "ambient dimension must be positive");
        assert!(!coeffs.is_empty(), "coefficient list must be nonempty");
        for c in &coeffs {
            assert_eq!((c.nrows(), c.ncols()), (n, n), "coefficient shape mismatch");
            assert!(
                c.iter().all(|x| x.re.is_finite() && x.im.is_finite()),
                "coefficients must be finite"
            );
        }
        let max = coeffs.iter().fold(0.0f64, |a, c| a.max(max_abs_entry(c)));
        if max == 0.0 {
            return MatrixLaurentPoly {
                n,
                kmin: 0,
                coeffs: vec![CMatrix::zeros(n, n)],
            };
        }
        let cut = TRIM_REL_TOL * max;
        let first = coeffs.iter().position(|c| max_abs_entry(c) > cut).unwrap();
        let last = coeffs.iter().rposition(|c| max_abs_entry(c) > cut).unwrap();
        MatrixLaurentPoly {
            n,
            kmin: kmin + first as i64,
            coeffs: coeffs[first..=last].to_vec(),
        }
    }

    pub fn identity(n: usize) -> Self {
        MatrixLaurentPoly {
            n,
            kmin: 0,
            coeffs: vec![CMatrix::identity(n, n)],
        }
    }

    pub fn zero(n: usize) -> Self {
        MatrixLaurentPoly {
            n,
            kmin: 0,
            coeffs: vec![CMatrix::zeros(n, n)],
        }
    }

    pub fn constant(m: CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "constant loop must be square");
        Self::new(m.nrows(), 0, vec![m])
    }

    pub fn monomial(m: CMatrix, k: i64) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "monomial loop must be square");
        Self::new(m.nrows(), k, vec![m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kmin(&self) -> i64 {
        self.kmin
    }

    pub fn kmax(&self) -> i64 {
        self.kmin + self.coeffs.len() as i64 - 1
    }

    /// Polynomial degree; requires kmin >= 0.
    pub fn degree(&self) -> Result<usize> {
        if self.kmin < 0 {
            return Err(Error::Domain(format!(
                "loop has negative exponents (kmin = {})",
                self.kmin
            )));
        }
        Ok(self.kmax() as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == 0.0
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .fold(0.0f64, |a, c| a.max(max_abs_entry(c)))
    }

    pub fn coeff(&self, k: i64) -> CMatrix {
        if k < self.kmin || k > self.kmax() {
            CMatrix::zeros(self.n, self.n)
        } else {
            self.coeffs[(k - self.kmin) as usize].clone()
        }
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn try_eval(&self, lambda: Complex64) -> Result<CMatrix> {
        if lambda == Complex64::new(0.0, 0.0) && self.kmin < 0 && !self.is_zero() {
            return Err(Error::Domain(
                "evaluation at 0 with negative exponents".into(),
            ));
        }
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc * lambda + c;
        }
        if self.kmin != 0 {
            if lambda == Complex64::new(0.0, 0.0) {
                return Ok(CMatrix::zeros(self.n, self.n));
            }
            acc *= lambda.powi(self.kmin as i32);
        }
        Ok(acc)
    }

    /// Evaluation; panics when λ = 0 meets negative exponents
    /// (use `try_eval` where that can happen).
    pub fn eval(&self, lambda: Complex64) -> CMatrix {
        self.try_eval(lambda).expect("evaluation in domain")
    }

    /// Coefficient-wise convolution product (self * other as functions).
    pub fn multiply(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![CMatrix::zeros(self.n, self.n); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if max_abs_entry(a) == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(self.n, self.kmin + other.kmin, out)
    }

    /// The loop λ ↦ L(1/λ̄)^H, i.e. T_k ↦ T_{-k}^H. On the unit circle this
    /// is the pointwise adjoint, so for unitary loops it is the inverse.
    pub fn circle_adjoint(&self) -> Self {
        let coeffs: Vec<CMatrix> = self.coeffs.iter().rev().map(|c| c.adjoint()).collect();
        Self::new(self.n, -self.kmax(), coeffs)
    }

    /// det L as a scalar Laurent polynomial, recovered exactly by sampling
    /// at n(kmax - kmin) + 1 unit roots and inverting the finite Fourier sum
    /// over the known exponent window [n kmin, n kmax].
    pub fn determinant(&self) -> LaurentPoly {
        if self.is_zero() {
            return LaurentPoly::zero();
        }
        let n = self.n as i64;
        let window = self.coeffs.len() as i64 - 1;
        let dmin = n * self.kmin;
        let dmax = n * self.kmax();
        let count = (n * window + 1) as usize;
        let points = unit_circle_points(count);
        let dets: Vec<Complex64> = points.iter().map(|&l| self.eval(l).determinant()).collect();
        let mut coeffs = Vec::with_capacity((dmax - dmin + 1) as usize);
        for k in dmin..=dmax {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &l) in points.iter().enumerate() {
                acc += dets[j] * l.powi(-(k as i32));
            }
            acc /= count as f64;
            coeffs.push(acc);
        }
        LaurentPoly::new(dmin, coeffs)
    }

    /// Degree of det L for a loop unitary on the circle, where the
    /// determinant is a single monomial c λ^d with |c| = 1. Errors when the
    /// determinant is not numerically monomial.
    pub fn det_degree(&self) -> Result<i64> {
        let det = self.determinant();
        if det.is_zero() {
            return Err(Error::Domain("determinant vanishes identically".into()));
        }
        let (deg, _, ratio) = det.dominant_monomial();
        if ratio > 1e-8 {
            return Err(Error::RankTolerance(format!(
                "determinant is not a monomial (secondary/leading ratio {ratio:.3e})"
            )));
        }
        Ok(deg)
    }

    /// λ ↦ L(μλ), i.e. T_k ↦ μ^k T_k. At μ = 0 only the k = 0 coefficient
    /// survives; that case requires kmin >= 0.
    pub fn substitute_scale(&self, mu: Complex64) -> Result<Self> {
        if mu == Complex64::new(0.0, 0.0) {
            if self.kmin < 0 && !self.is_zero() {
                return Err(Error::Domain("scaling by 0 with negative exponents".into()));
            }
            return Ok(Self::new(self.n, 0, vec![self.coeff(0)]));
        }
        let coeffs: Vec<CMatrix> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * mu.powi((self.kmin + i as i64) as i32))
            .collect();
        Ok(Self::new(self.n, self.kmin, coeffs))
    }

    /// max over sampled |λ|=1 of ||L(λ)^H L(λ) - I||_2.
    pub fn unitarity_defect(&self, samples: usize) -> f64 {
        let id = CMatrix::identity(self.n, self.n);
        unit_circle_points(samples.max(1))
            .into_iter()
            .map(|l| {
                let v = self.eval(l);
                spectral_norm(&(v.adjoint() * &v - &id))
            })
            .fold(0.0, f64::max)
    }

    /// Right-normalizes so the value at λ = 1 becomes I.
    pub fn normalize_at_one(&self) -> Result<Self> {
        let v1 = self.eval(one());
        let inv = v1
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("value at λ = 1 is singular, cannot normalize".into()))?;
        let coeffs: Vec<CMatrix> = self.coeffs.iter().map(|c| c * &inv).collect();
        Ok(Self::new(self.n, self.kmin, coeffs))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let coeffs: Vec<CMatrix> = self.coeffs.iter().map(|m| m * c).collect();
        Self::new(self.n, self.kmin, coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::linear_combination(&[(one(), self), (one(), other)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::linear_combination(&[(one(), self), (Complex64::new(-1.0, 0.0), other)])
    }

    /// Σ c_i L_i over a shared exponent window.
    pub fn linear_combination(terms: &[(Complex64, &Self)]) -> Self {
        assert!(!terms.is_empty(), "need at least one term");
        let n = terms[0].1.n;
        let kmin = terms.iter().map(|(_, l)| l.kmin).min().unwrap();
        let kmax = terms.iter().map(|(_, l)| l.kmax()).max().unwrap();
        let mut coeffs = vec![CMatrix::zeros(n, n); (kmax - kmin + 1) as usize];
        for (c, l) in terms {
            assert_eq!(l.n, n, "dimension mismatch");
            for (i, m) in l.coeffs.iter().enumerate() {
                coeffs[(l.kmin - kmin) as usize + i] += m * *c;
            }
        }
        Self::new(n, kmin, coeffs)
    }

    /// max over sampled |λ|=1 of ||self(λ) - other(λ)||_2.
    pub fn sup_distance(&self, other: &Self, samples: usize) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        unit_circle_points(samples.max(1))
            .into_iter()
            .map(|l| spectral_norm(&(self.eval(l) - other.eval(l))))
            .fold(0.0, f64::max)
    }
}

/// Subspace of C^n held as an orthonormal frame (n x d).
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    frame: CMatrix,
}

impl Subspace {
    /// Spans the given columns, orthonormalizing them in order. Fails when
    /// the columns are numerically rank deficient.
    pub fn from_columns(cols: &CMatrix) -> Result<Self> {
        let frame = orthonormalize_in_order(cols, 1e-9)?;
        Ok(Subspace {
            ambient: cols.nrows(),
            frame,
        })
    }

    /// Wraps a frame that is already orthonormal (validated to 1e-10).
    pub fn from_orthonormal(frame: CMatrix) -> Result<Self> {
        let gram = frame.adjoint() * &frame;
        let defect = spectral_norm(&(gram - CMatrix::identity(frame.ncols(), frame.ncols())));
        if defect > 1e-10 {
            return Err(Error::RankTolerance(format!(
                "frame is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Subspace {
            ambient: frame.nrows(),
            frame,
        })
    }

    /// Null space of m (a constraint matrix built from unit-normalized
    /// data, so the singular value cutoff is floored at unit scale), with
    /// phases pinned for reproducibility.
    pub fn from_null_space(m: &CMatrix, rel_tol: f64) -> Self {
        let mut frame = null_space_floored(m, rel_tol, 1.0);
        phase_fix_columns(&mut frame, 1e-6);
        Subspace {
            ambient: m.ncols(),
            frame,
        }
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            ambient: n,
            frame: CMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            ambient: n,
            frame: CMatrix::identity(n, n),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn projector(&self) -> CMatrix {
        &self.frame * self.frame.adjoint()
    }

    pub fn perp_projector(&self) -> CMatrix {
        CMatrix::identity(self.ambient, self.ambient) - self.projector()
    }

    pub fn perp(&self) -> Subspace {
        Subspace::from_null_space(&self.frame.adjoint(), 1e-12)
    }

    /// Largest principal angle to another subspace; pi/2 when dims differ.
    pub fn max_angle_to(&self, other: &Subspace) -> f64 {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        max_principal_angle(&self.frame, &other.frame)
    }

    pub fn angles_to(&self, other: &Subspace) -> Vec<f64> {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        linalg::principal_angles(&self.frame, &other.frame)
    }
}

/// Blaschke-Potapov factor π_α + λ π_α^⊥.
#[derive(Debug, Clone)]
pub struct BPFactor {
    pub alpha: Subspace,
}

impl BPFactor {
    pub fn new(alpha: Subspace) -> Self {
        BPFactor { alpha }
    }

    pub fn eval(&self, lambda: Complex64) -> CMatrix {
        self.alpha.projector() + self.alpha.perp_projector() * lambda
    }

    pub fn to_loop(&self) -> MatrixLaurentPoly {
        MatrixLaurentPoly::new(
            self.alpha.ambient(),
            0,
            vec![self.alpha.projector(), self.alpha.perp_projector()],
        )
    }
}

/// Product of factors attached to the given subspaces, left to right.
pub fn product_of_factors(n: usize, alphas: &[Subspace]) -> MatrixLaurentPoly {
    let mut acc = MatrixLaurentPoly::identity(n);
    for a in alphas {
        assert_eq!(a.ambient(), n, "ambient mismatch");
        acc = acc.multiply(&BPFactor::new(a.clone()).to_loop());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cplx, CVector};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        cplx(re, 0.0)
    }

    fn diag2(a: Complex64, b: Complex64) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(vec![a, b]))
    }

    /// diag(1, λ) as a loop.
    fn diag_one_lambda() -> MatrixLaurentPoly {
        let e1 = diag2(c(1.0), c(0.0));
        let e2 = diag2(c(0.0), c(1.0));
        MatrixLaurentPoly::new(2, 0, vec![e1, e2])
    }

    #[test]
    fn eval_scalar_loop() {
        // λ^{-1} + 2 + 3λ at λ = i is 2 + 3i - i = 2 + 2i.
        let p = LaurentPoly::new(-1, vec![c(1.0), c(2.0), c(3.0)]);
        let v = p.eval(cplx(0.0, 1.0));
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 2.0, epsilon = 1e-14);
        assert!(p.try_eval(c(0.0)).is_err());
    }

    #[test]
    fn trimming_drops_tiny_outer_coefficients() {
        let tiny = diag2(c(1e-15), c(0.0));
        let body = diag2(c(1.0), c(2.0));
        let l = MatrixLaurentPoly::new(2, -1, vec![tiny.clone(), body.clone(), tiny]);
        assert_eq!(l.kmin(), 0);
        assert_eq!(l.kmax(), 0);
        assert_eq!(l.coeff(0), body);
    }

    #[test]
    fn zero_loop_normal_form() {
        let l = MatrixLaurentPoly::new(2, 5, vec![CMatrix::zeros(2, 2)]);
        assert!(l.is_zero());
        assert_eq!(l.kmin(), 0);
        assert_eq!(l.kmax(), 0);
    }

    #[test]
    fn multiply_matches_pointwise_product() {
        let a = diag_one_lambda();
        let b = MatrixLaurentPoly::new(
            2,
            -1,
            vec![
                CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
                CMatrix::identity(2, 2),
            ],
        );
        let prod = a.multiply(&b);
        for l in unit_circle_points(7) {
            let direct = a.eval(l) * b.eval(l);
            assert!(spectral_norm(&(prod.eval(l) - direct)) < 1e-13);
        }
        assert_eq!(prod.kmin(), -1);
        assert_eq!(prod.kmax(), 1);
    }

    #[test]
    fn circle_adjoint_is_pointwise_adjoint_on_circle() {
        let a = diag_one_lambda();
        let adj = a.circle_adjoint();
        for l in unit_circle_points(9) {
            assert!(spectral_norm(&(adj.eval(l) - a.eval(l).adjoint())) < 1e-13);
        }
        // Involution, exactly.
        assert_eq!(adj.circle_adjoint(), a);
    }

    #[test]
    fn determinant_of_diag_loop() {
        // det diag(1, λ) = λ.
        let det = diag_one_lambda().determinant();
        assert_eq!(det.kmin(), 1);
        assert_eq!(det.kmax(), 1);
        assert_abs_diff_eq!(det.coeff(1).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(det.coeff(1).im, 0.0, epsilon = 1e-12);
        assert_eq!(diag_one_lambda().det_degree().unwrap(), 1);
    }

    #[test]
    fn determinant_with_negative_exponents() {
        // det diag(λ^{-1}, λ) = 1.
        let l = MatrixLaurentPoly::new(
            2,
            -1,
            vec![
                diag2(c(1.0), c(0.0)),
                CMatrix::zeros(2, 2),
                diag2(c(0.0), c(1.0)),
            ],
        );
        let det = l.determinant();
        assert_eq!(det.kmin(), 0);
        assert_eq!(det.kmax(), 0);
        assert_abs_diff_eq!(det.coeff(0).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn substitute_scale_composes() {
        let l = diag_one_lambda();
        let mu1 = cplx(0.6, 0.2);
        let mu2 = cplx(-0.3, 0.4);
        let a = l
            .substitute_scale(mu1)
            .unwrap()
            .substitute_scale(mu2)
            .unwrap();
        let b = l.substitute_scale(mu1 * mu2).unwrap();
        assert!(a.sup_distance(&b, 16) < 1e-14);
    }

    #[test]
    fn substitute_scale_at_zero_keeps_constant_coefficient() {
        let l = diag_one_lambda();
        let at0 = l.substitute_scale(c(0.0)).unwrap();
        assert_eq!(at0.kmax(), 0);
        assert_eq!(at0.coeff(0), diag2(c(1.0), c(0.0)));
        let neg = MatrixLaurentPoly::monomial(CMatrix::identity(2, 2), -1);
        assert!(neg.substitute_scale(c(0.0)).is_err());
    }

    #[test]
    fn unitarity_defect_flags_scaling() {
        let l = diag_one_lambda();
        assert!(l.unitarity_defect(16) < 1e-15);
        assert_abs_diff_eq!(l.scale(c(2.0)).unitarity_defect(16), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn normalize_at_one() {
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                cplx(0.0, 1.0),
                c(0.0),
                c(0.0),
                cplx(
                    std::f64::consts::FRAC_1_SQRT_2,
                    std::f64::consts::FRAC_1_SQRT_2,
                ),
            ],
        );
        let l = diag_one_lambda().multiply(&MatrixLaurentPoly::constant(u));
        let norm = l.normalize_at_one().unwrap();
        assert!(spectral_norm(&(norm.eval(c(1.0)) - CMatrix::identity(2, 2))) < 1e-13);
        assert!(norm.unitarity_defect(16) < 1e-13);
    }

    #[test]
    fn bp_factor_shapes() {
        // α = {0} gives λ I, α = C^n gives I.
        let zero = BPFactor::new(Subspace::zero(2)).to_loop();
        assert_eq!(zero.kmin(), 1);
        assert_eq!(zero.kmax(), 1);
        assert_eq!(zero.coeff(1), CMatrix::identity(2, 2));
        let full = BPFactor::new(Subspace::full(2)).to_loop();
        assert_eq!(full.kmin(), 0);
        assert_eq!(full.kmax(), 0);

        // Factor times its circle adjoint is I.
        let alpha =
            Subspace::from_columns(&CMatrix::from_row_slice(2, 1, &[c(1.0), cplx(0.5, -0.5)]))
                .unwrap();
        let f = BPFactor::new(alpha).to_loop();
        let prod = f.multiply(&f.circle_adjoint());
        assert!(prod.sup_distance(&MatrixLaurentPoly::identity(2), 16) < 1e-14);
    }

    #[test]
    fn subspace_projectors_and_perp() {
        let alpha =
            Subspace::from_columns(&CMatrix::from_row_slice(3, 1, &[c(1.0), c(1.0), c(0.0)]))
                .unwrap();
        let p = alpha.projector();
        assert!(spectral_norm(&(&p * &p - &p)) < 1e-13);
        let perp = alpha.perp();
        assert_eq!(perp.dim(), 2);
        assert!(spectral_norm(&(alpha.frame().adjoint() * perp.frame())) < 1e-13);
    }

    #[test]
    fn sup_distance_between_loops() {
        let a = diag_one_lambda();
        let b = MatrixLaurentPoly::identity(2);
        // |1 - λ| reaches 2 at λ = -1.
        assert_abs_diff_eq!(a.sup_distance(&b, 16), 2.0, epsilon = 1e-12);
    }
}
