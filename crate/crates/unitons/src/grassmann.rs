//! The Grassmannian model: W = b H_+ inside the Hardy space H_+ of
//! C^n-valued power series, and the finite-dimensional complement
//! K = H_+ ⊖ W that encodes a polynomial unitary loop b.
//!
//! Everything is finite here: when deg b = m, the complement K consists of
//! vector polynomials of degree at most m - 1, and dim K = deg det b. The
//! H_+ inner product of two polynomials is the Euclidean inner product of
//! their stacked coefficient vectors, ⟨p, q⟩ = Σ_k q̂_k^H p̂_k (linear in p).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    max_principal_angle, null_space_floored, orthonormal_range, orthonormal_range_abs,
    spectral_norm, CMatrix, CVector,
};
use crate::looppoly::MatrixLaurentPoly;

/// Relative tolerance for rank decisions when carving K out of H_+.
pub const NULLSPACE_REL_TOL: f64 = 1e-9;

/// C^n-valued polynomial in λ, coefficient j = coefficient of λ^j.
/// The zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPoly {
    n: usize,
    coeffs: Vec<CVector>,
}

impl VectorPoly {
    pub fn new(n: usize, coeffs: Vec<CVector>) -> Self {
        for c in &coeffs {
            assert_eq!(c.len(), n, "coefficient length mismatch");
        }
        let max = coeffs.iter().fold(0.0f64, |a, c| a.max(c.camax()));
        if max == 0.0 {
            return VectorPoly { n, coeffs: vec![] };
        }
        let cut = crate::looppoly::TRIM_REL_TOL * max;
        let last = coeffs.iter().rposition(|c| c.camax() > cut).unwrap();
        VectorPoly {
            n,
            coeffs: coeffs[..=last].to_vec(),
        }
    }

    pub fn zero(n: usize) -> Self {
        VectorPoly { n, coeffs: vec![] }
    }

    pub fn constant(v: CVector) -> Self {
        let n = v.len();
        Self::new(n, vec![v])
    }

    pub fn monomial(v: CVector, degree: usize) -> Self {
        let n = v.len();
        let mut coeffs = vec![CVector::zeros(n); degree + 1];
        coeffs[degree] = v;
        Self::new(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, j: usize) -> CVector {
        if j < self.coeffs.len() {
            self.coeffs[j].clone()
        } else {
            CVector::zeros(self.n)
        }
    }

    pub fn coeffs(&self) -> &[CVector] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> CVector {
        let mut acc = CVector::zeros(self.n);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Multiplication by λ (the shift T).
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(CVector::zeros(self.n));
        coeffs.extend(self.coeffs.iter().cloned());
        VectorPoly { n: self.n, coeffs }
    }

    pub fn shift_by(&self, k: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..k {
            out = out.shift();
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.n, self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![CVector::zeros(self.n); len];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[j] += c;
        }
        for (j, c) in other.coeffs.iter().enumerate() {
            coeffs[j] += c;
        }
        Self::new(self.n, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Stacked coefficient vector padded with zeros up to degree `upto`.
    pub fn stacked(&self, upto: usize) -> CVector {
        let mut out = CVector::zeros(self.n * (upto + 1));
        for (j, c) in self.coeffs.iter().enumerate() {
            assert!(j <= upto, "polynomial degree exceeds padding degree");
            out.rows_mut(j * self.n, self.n).copy_from(c);
        }
        out
    }

    /// Truncates to the given degree, dropping higher coefficients.
    pub fn truncate(&self, degree: usize) -> Self {
        let take = (degree + 1).min(self.coeffs.len());
        Self::new(self.n, self.coeffs[..take].to_vec())
    }
}

/// H_+ inner product ⟨p, q⟩ = Σ_k q̂_k^H p̂_k, conjugate linear in q.
pub fn hplus_inner(p: &VectorPoly, q: &VectorPoly) -> Complex64 {
    assert_eq!(p.n, q.n, "dimension mismatch");
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..p.coeffs.len().min(q.coeffs.len()) {
        acc += q.coeffs[j].dotc(&p.coeffs[j]);
    }
    acc
}

/// The polynomial L(λ) v for a constant vector v and polynomial loop L.
pub fn apply_loop(l: &MatrixLaurentPoly, v: &CVector) -> VectorPoly {
    assert!(l.kmin() >= 0, "loop must be polynomial");
    assert_eq!(l.n(), v.len(), "dimension mismatch");
    let mut coeffs = vec![CVector::zeros(l.n()); (l.kmax() + 1) as usize];
    for k in l.kmin()..=l.kmax() {
        coeffs[k as usize] = l.coeff(k) * v;
    }
    VectorPoly::new(l.n(), coeffs)
}

/// Column i of a polynomial loop as a vector polynomial.
pub fn loop_column(l: &MatrixLaurentPoly, i: usize) -> VectorPoly {
    let mut e = CVector::zeros(l.n());
    e[i] = Complex64::new(1.0, 0.0);
    apply_loop(l, &e)
}

/// Orthonormal basis of a finite-dimensional subspace of vector
/// polynomials of bounded degree.
#[derive(Debug, Clone)]
pub struct ComplementSpace {
    n: usize,
    max_degree: usize,
    basis: Vec<VectorPoly>,
}

impl ComplementSpace {
    /// Wraps an H_+-orthonormal basis (validated to 1e-8).
    pub fn from_orthonormal(n: usize, max_degree: usize, basis: Vec<VectorPoly>) -> Result<Self> {
        let space = ComplementSpace {
            n,
            max_degree,
            basis,
        };
        let defect = space.orthonormality_defect();
        if defect > 1e-8 {
            return Err(Error::RankTolerance(format!(
                "basis is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(space)
    }

    /// Orthonormalizes a spanning set; fails if it is numerically dependent,
    /// since the span would then have lost a dimension silently.
    pub fn from_spanning(n: usize, max_degree: usize, polys: &[VectorPoly]) -> Result<Self> {
        if polys.is_empty() {
            return Ok(ComplementSpace {
                n,
                max_degree,
                basis: vec![],
            });
        }
        let rows = n * (max_degree + 1);
        let mut m = CMatrix::zeros(rows, polys.len());
        for (j, p) in polys.iter().enumerate() {
            assert_eq!(p.n(), n, "dimension mismatch");
            m.set_column(j, &p.stacked(max_degree));
        }
        let q = orthonormal_range(&m, NULLSPACE_REL_TOL);
        if q.ncols() != polys.len() {
            return Err(Error::RankTolerance(format!(
                "spanning set of {} polynomials has numerical rank {}",
                polys.len(),
                q.ncols()
            )));
        }
        let basis = columns_to_polys(n, max_degree, &q);
        Ok(ComplementSpace {
            n,
            max_degree,
            basis,
        })
    }

    pub(crate) fn from_parts(n: usize, max_degree: usize, basis: Vec<VectorPoly>) -> Self {
        ComplementSpace {
            n,
            max_degree,
            basis,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn basis(&self) -> &[VectorPoly] {
        &self.basis
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.dim();
        let mut gram = CMatrix::identity(d, d);
        for i in 0..d {
            for j in 0..d {
                gram[(i, j)] -= hplus_inner(&self.basis[i], &self.basis[j]);
            }
        }
        spectral_norm(&gram)
    }

    /// Stacked coefficient matrix of the basis, padded to degree `upto`.
    pub fn coeff_matrix(&self, upto: usize) -> CMatrix {
        let rows = self.n * (upto + 1);
        let mut m = CMatrix::zeros(rows, self.dim());
        for (j, p) in self.basis.iter().enumerate() {
            m.set_column(j, &p.stacked(upto));
        }
        m
    }

    /// Norm of the orthogonal projection of p onto this space.
    pub fn component_norm(&self, p: &VectorPoly) -> f64 {
        self.basis
            .iter()
            .map(|q| hplus_inner(p, q).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest principal angle between the spans, as subspaces of the
    /// polynomials of degree up to max(self, other).
    pub fn max_angle_to(&self, other: &ComplementSpace) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let upto = self.max_degree.max(other.max_degree);
        let a = orthonormal_range(&self.coeff_matrix(upto), 1e-12);
        let b = orthonormal_range(&other.coeff_matrix(upto), 1e-12);
        max_principal_angle(&a, &b)
    }
}

fn columns_to_polys(n: usize, max_degree: usize, m: &CMatrix) -> Vec<VectorPoly> {
    (0..m.ncols())
        .map(|j| {
            let col = m.column(j);
            let coeffs: Vec<CVector> = (0..=max_degree)
                .map(|d| col.rows(d * n, n).into_owned())
                .collect();
            VectorPoly::new(n, coeffs)
        })
        .collect()
}

/// Orthonormal basis of K = H_+ ⊖ b H_+ for a polynomial loop b that is
/// unitary on the circle. K sits inside the polynomials of degree
/// ≤ deg b - 1; membership of p is the linear system ⟨p, λ^j b e_i⟩ = 0
/// for 0 ≤ j < deg b, 1 ≤ i ≤ n, and dim K must equal deg det b.
pub fn complement_basis(b: &MatrixLaurentPoly) -> Result<ComplementSpace> {
    let m = b.degree()?;
    let defect = b.unitarity_defect(4 * (m + 1));
    if defect > 1e-9 {
        return Err(Error::NotUnitary { defect, tol: 1e-9 });
    }
    let expected = b.det_degree()?;
    if expected < 0 {
        return Err(Error::Domain(format!(
            "polynomial loop with negative determinant degree {expected}"
        )));
    }
    complement_basis_general(b, expected as usize)
}

/// Complement basis for a polynomial loop that need not be unitary on the
/// circle, as long as H_+ ⊖ b H_+ still consists of polynomials of degree
/// ≤ deg b - 1 and has known dimension. This covers rescaled unitary
/// loops λ ↦ b(μλ): their shift-invariant subspace equals that of the
/// unitary loop b^μ, with the same complement dimension deg det b.
pub fn complement_basis_general(b: &MatrixLaurentPoly, expected: usize) -> Result<ComplementSpace> {
    let n = b.n();
    let m = b.degree()?;
    if m == 0 || expected == 0 {
        if expected != 0 {
            return Err(Error::Inconsistent(
                "constant loop with nonzero determinant degree".into(),
            ));
        }
        return Ok(ComplementSpace::from_parts(n, 0, vec![]));
    }

    // Row block j, column block k holds b_{k-j}^H: row (j,i), col (k,l)
    // is the coefficient of p̂_k[l] in ⟨p, λ^j b e_i⟩.
    let rows = n * m;
    let cols = n * m;
    let mut sys = CMatrix::zeros(rows, cols);
    for j in 0..m {
        for k in 0..m {
            let rel = k as i64 - j as i64;
            if rel < b.kmin() || rel > b.kmax() {
                continue;
            }
            let block = b.coeff(rel).adjoint();
            sys.view_mut((j * n, k * n), (n, n)).copy_from(&block);
        }
    }
    let ns = null_space_floored(&sys, NULLSPACE_REL_TOL, 1.0);
    if ns.ncols() != expected {
        return Err(Error::RankTolerance(format!(
            "complement dimension {} does not match determinant degree {}",
            ns.ncols(),
            expected
        )));
    }
    let basis = columns_to_polys(n, m - 1, &ns);
    Ok(ComplementSpace::from_parts(n, m - 1, basis))
}

/// Orthonormal basis of a complement space ordered by polynomial degree:
/// degrees are nondecreasing, the elements of degree ≤ j span everything of
/// degree ≤ j in the space, and each element is trimmed to its exact degree.
#[derive(Debug, Clone)]
pub struct GradedBasis {
    n: usize,
    polys: Vec<VectorPoly>,
    degrees: Vec<usize>,
}

impl GradedBasis {
    /// Wraps an explicit basis after checking the grading contract: each
    /// member has the stated exact degree and the degrees are
    /// nondecreasing. Orthonormality is the caller's responsibility where
    /// the consumer needs it (Gram matrices do not).
    pub fn new(n: usize, polys: Vec<VectorPoly>, degrees: Vec<usize>) -> Result<Self> {
        if polys.len() != degrees.len() {
            return Err(Error::Domain(format!(
                "{} polynomials but {} degrees",
                polys.len(),
                degrees.len()
            )));
        }
        for (k, (p, &d)) in polys.iter().zip(&degrees).enumerate() {
            if p.n() != n {
                return Err(Error::Domain(format!(
                    "member {k} has {} components, expected {n}",
                    p.n()
                )));
            }
            if p.degree() != Some(d) {
                return Err(Error::Domain(format!(
                    "member {k} has degree {:?}, stated degree {d}",
                    p.degree()
                )));
            }
            if k > 0 && degrees[k - 1] > d {
                return Err(Error::Domain(format!(
                    "degrees must be nondecreasing, got {} before {d}",
                    degrees[k - 1]
                )));
            }
        }
        Ok(GradedBasis { n, polys, degrees })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.polys.len()
    }

    pub fn polys(&self) -> &[VectorPoly] {
        &self.polys
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.last().copied().unwrap_or(0)
    }

    /// Number of basis members of degree ≤ d.
    pub fn count_degree_at_most(&self, d: usize) -> usize {
        self.degrees.iter().filter(|&&g| g <= d).count()
    }

    /// The first `count` members as a complement space (orthonormal since
    /// the graded basis is).
    pub fn prefix(&self, count: usize) -> ComplementSpace {
        let polys = self.polys[..count].to_vec();
        let max_degree = polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
        ComplementSpace::from_parts(self.n, max_degree, polys)
    }

    pub fn to_complement(&self) -> ComplementSpace {
        self.prefix(self.dim())
    }
}

/// Reorders/combines an orthonormal basis of K into a degree-graded one.
///
/// Stage d finds the members of K of degree ≤ d: coordinates x (in the
/// given basis) whose stacked coefficients vanish above degree d. New
/// directions beyond stage d - 1 are split off orthonormally, truncated to
/// degree d, and renormalized.
pub fn degree_graded_basis(space: &ComplementSpace) -> Result<GradedBasis> {
    let n = space.n();
    let d = space.dim();
    if d == 0 {
        return Ok(GradedBasis {
            n,
            polys: vec![],
            degrees: vec![],
        });
    }
    let maxdeg = space.max_degree();
    let coeff = space.coeff_matrix(maxdeg);

    let mut polys: Vec<VectorPoly> = Vec::with_capacity(d);
    let mut degrees: Vec<usize> = Vec::with_capacity(d);
    let mut prev = CMatrix::zeros(d, 0);

    for stage in 0..=maxdeg {
        // Coefficient rows strictly above degree `stage`.
        let high_rows = n * (maxdeg - stage);
        let candidates = if high_rows == 0 {
            CMatrix::identity(d, d)
        } else {
            let high = coeff.rows(n * (stage + 1), high_rows).into_owned();
            null_space_floored(&high, NULLSPACE_REL_TOL, 1.0)
        };
        let r_new = candidates.ncols();
        let r_prev = prev.ncols();
        if r_new < r_prev {
            return Err(Error::RankTolerance(format!(
                "degree filtration lost rank at degree {stage} ({r_new} < {r_prev})"
            )));
        }
        if r_new == r_prev {
            continue;
        }
        // Split off the directions orthogonal to the previous stages.
        let fresh = &candidates - &prev * (prev.adjoint() * &candidates);
        let basis_new = orthonormal_range_abs(&fresh, 0.5);
        if basis_new.ncols() != r_new - r_prev {
            return Err(Error::RankTolerance(format!(
                "ambiguous degree split at degree {stage}: expected {} new directions, found {}",
                r_new - r_prev,
                basis_new.ncols()
            )));
        }
        for j in 0..basis_new.ncols() {
            let coords = basis_new.column(j).into_owned();
            let stacked = &coeff * &coords;
            let poly = columns_to_polys(n, maxdeg, &CMatrix::from_columns(&[stacked]))
                .pop()
                .unwrap();
            // Truncate the numerically-zero tail above the stage degree and
            // renormalize, so the stored degree is exact.
            let poly = poly.truncate(stage);
            let norm = poly.norm();
            if norm < 0.5 {
                return Err(Error::RankTolerance(format!(
                    "degree-{stage} member lost most of its mass when truncated (norm {norm:.3e})"
                )));
            }
            let poly = poly.scale(Complex64::new(1.0 / norm, 0.0));
            polys.push(poly);
            degrees.push(stage);
        }
        let mut grown = CMatrix::zeros(d, r_prev + basis_new.ncols());
        grown.view_mut((0, 0), (d, r_prev)).copy_from(&prev);
        grown
            .view_mut((0, r_prev), (d, basis_new.ncols()))
            .copy_from(&basis_new);
        prev = grown;
    }
    if polys.len() != d {
        return Err(Error::RankTolerance(format!(
            "graded basis has {} members, expected {}",
            polys.len(),
            d
        )));
    }
    Ok(GradedBasis { n, polys, degrees })
}

/// The Segal filtration K_1 ⊂ ... ⊂ K_m of the complement: K_k consists of
/// the members of degree ≤ k - 1, i.e. K_k = K ∩ (W + λ^k H_+)^⊥.
pub fn segal_levels(graded: &GradedBasis, m: usize) -> Vec<ComplementSpace> {
    assert!(
        graded.dim() == 0 || graded.max_degree() + 1 <= m,
        "filtration length shorter than the basis degrees"
    );
    (1..=m)
        .map(|k| graded.prefix(graded.count_degree_at_most(k - 1)))
        .collect()
}

/// Reproducing kernel column k_ζ e_i = (1 - ζ̄ λ)^{-1} (I - b(λ) b(ζ)^H) e_i,
/// a polynomial of degree ≤ deg b - 1 lying in the complement of b H_+.
pub fn reproducing_kernel(b: &MatrixLaurentPoly, zeta: Complex64, i: usize) -> Result<VectorPoly> {
    let n = b.n();
    assert!(i < n, "column index out of range");
    let m = b.degree()?;
    let bz = b.try_eval(zeta)?;
    let mut e = CVector::zeros(n);
    e[i] = Complex64::new(1.0, 0.0);
    let w = bz.adjoint() * &e;
    // Numerator N(λ) = e_i - b(λ) w, degree ≤ m.
    let mut num = vec![CVector::zeros(n); m + 1];
    num[0] += &e;
    for k in 0..=m {
        num[k] -= b.coeff(k as i64) * &w;
    }
    // Synthetic division by (1 - ζ̄ λ): q_k = N_k + ζ̄ q_{k-1}; the final
    // carry must vanish for the division to be exact.
    let zbar = zeta.conj();
    let mut q = Vec::with_capacity(m.max(1));
    let mut carry = CVector::zeros(n);
    for (k, nk) in num.iter().enumerate() {
        let qk = nk + &carry * zbar;
        if k < m {
            q.push(qk.clone());
        } else if qk.norm() > 1e-10 * (1.0 + w.norm()) {
            return Err(Error::Inconsistent(format!(
                "kernel division leaves a remainder of norm {:.3e}; \
                 the loop is not inner at this point",
                qk.norm()
            )));
        }
        carry = qk;
    }
    if m == 0 {
        return Ok(VectorPoly::zero(n));
    }
    Ok(VectorPoly::new(n, q))
}

/// max |entry| over the coefficients of a set of polynomials; a scale
/// reference for residual tolerances.
pub fn polys_max_abs(polys: &[VectorPoly]) -> f64 {
    polys
        .iter()
        .flat_map(|p| p.coeffs().iter())
        .fold(0.0f64, |a, c| a.max(c.camax()))
}

/// Stacks polynomials into a matrix in degree window [0, upto].
pub fn polys_coeff_matrix(n: usize, upto: usize, polys: &[VectorPoly]) -> CMatrix {
    let mut m = CMatrix::zeros(n * (upto + 1), polys.len());
    for (j, p) in polys.iter().enumerate() {
        m.set_column(j, &p.stacked(upto));
    }
    m
}
