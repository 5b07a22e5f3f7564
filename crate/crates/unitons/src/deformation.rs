//! The deformation family μ ↦ b^μ of a polynomial unitary loop.
//!
//! For μ ≠ 0 the scaled loop λ ↦ b(μλ) has nonvanishing determinant off
//! the origin, so it splits as b^μ G^μ with b^μ a Blaschke-Potapov
//! product and G^μ analytic and invertible on the closed disc; b^μ is the
//! deformation of b at μ, and b^μ H_+ = b(μ·) H_+.
//!
//! Writing K = H_+ ⊖ b H_+ and fixing a degree-graded basis {p_k} of K
//! with deg p_k = d_k, the transformed polynomials
//!
//!   q_k^μ(λ) = μ̄^{d_k} p_k(λ / μ̄),   coefficientwise  q̂_{k,j} = μ̄^{d_k - j} p̂_{k,j},
//!
//! span K^μ = H_+ ⊖ b(μ·) H_+: expanding ⟨q_k^μ, λ^j b(μ·) e_i⟩ by
//! Parseval, the weights μ̄^{-t} cancel the conjugated μ^t from the scaled
//! loop termwise, so orthogonality to b H_+ transports exactly. (The
//! conjugate is forced by the sesquilinear pairing; the unconjugated
//! rescaling lands in the complement of b(μ̄·) H_+ instead.) The formula
//! is polynomial in μ̄, so it extends through μ = 0, where only the
//! leading coefficient of each p_k survives and b^0 becomes S^1-invariant.
//! The Gram matrix of {q_k^μ} has entries polynomial in μ and μ̄ and stays
//! invertible at μ = 0 because a degree-graded basis has independent
//! leading coefficients within each degree.
//!
//! b^μ itself is recovered by running the filtration factorization on the
//! transformed Segal levels; this also yields the deformed unitons α_j(μ).

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::factorization::{factorize_from_filtration, Factorization};
use crate::grassmann::{
    complement_basis, degree_graded_basis, hplus_inner, segal_levels, ComplementSpace, GradedBasis,
    VectorPoly,
};
use crate::linalg::{spectral_norm, unit_circle_points, CMatrix};
use crate::looppoly::{MatrixLaurentPoly, Subspace};

/// Relative determinant below which the transformed Gram matrix is
/// declared singular and the deformation refused.
pub const GRAM_REL_DET_TOL: f64 = 1e-10;

/// Transforms a graded basis of H_+ ⊖ b H_+ into one of H_+ ⊖ b(μ·) H_+:
/// coefficient j of member k is scaled by μ̄^{d_k - j}. Degrees are
/// preserved for μ ≠ 0; at μ = 0 each member collapses to its leading
/// monomial.
pub fn transform_basis(graded: &GradedBasis, mu: Complex64) -> Vec<VectorPoly> {
    graded
        .polys()
        .iter()
        .zip(graded.degrees())
        .map(|(p, &d)| transform_poly(p, d, mu))
        .collect()
}

fn transform_poly(p: &VectorPoly, degree: usize, mu: Complex64) -> VectorPoly {
    let w = mu.conj();
    let coeffs = (0..=degree)
        .map(|j| p.coeff(j) * w.powu((degree - j) as u32))
        .collect();
    VectorPoly::new(p.n(), coeffs)
}

/// Hermitian Gram matrix G_{ij} = ⟨ q_i, q_j ⟩ of a set of polynomials.
pub fn gram_of(polys: &[VectorPoly]) -> CMatrix {
    let d = polys.len();
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = hplus_inner(&polys[i], &polys[j]);
        }
    }
    g
}

/// |det G| normalized by ||G||^dim, a scale-free invertibility measure.
pub fn gram_rel_det(g: &CMatrix) -> f64 {
    let d = g.nrows();
    if d == 0 {
        return 1.0;
    }
    let norm = spectral_norm(g);
    if norm == 0.0 {
        return 0.0;
    }
    let det = g.determinant().norm();
    det / norm.powi(d as i32)
}

/// Diagnostics of the multiplicative decomposition b(μλ) = b^μ(λ) G^μ(λ).
#[derive(Debug, Clone)]
pub struct OuterPartReport {
    /// Largest negative-exponent coefficient relative to the loop scale
    /// (must be numerical noise: G^μ extends holomorphically to the disc).
    pub negative_part: f64,
    /// min |det G^μ| over the sampled closed disc; det G^μ is the constant
    /// μ^{deg det b} up to a unimodular factor, so this should be |μ|^d.
    pub min_abs_det: f64,
    /// Winding number of det G^μ around the boundary circle (0 when the
    /// determinant never vanishes on the disc).
    pub winding: i64,
}

/// Residuals of polynomial least-squares fits along the ray/line
/// μ = t e^{iθ}, t ∈ [-1, 1]: the Gram entries are exactly polynomial in
/// t, the loop values b^μ(λ0) are real-analytic and fit by a higher-degree
/// polynomial as a smoothness proxy.
#[derive(Debug, Clone)]
pub struct AnalyticityReport {
    pub theta: f64,
    pub gram_fit_degree: usize,
    pub gram_max_residual: f64,
    pub loop_fit_degree: usize,
    pub loop_max_residual: f64,
    pub lambda0: Complex64,
}

/// A loop together with the graded filtration data needed to deform it.
#[derive(Debug)]
pub struct DeformationFamily {
    base: MatrixLaurentPoly,
    graded: GradedBasis,
    levels: Vec<GradedBasis>,
    phi0: OnceLock<MatrixLaurentPoly>,
}

impl Clone for DeformationFamily {
    fn clone(&self) -> Self {
        DeformationFamily {
            base: self.base.clone(),
            graded: self.graded.clone(),
            levels: self.levels.clone(),
            phi0: OnceLock::new(),
        }
    }
}

impl DeformationFamily {
    /// Family through the Segal filtration of b (polynomial, unitary on
    /// the circle, b(1) = I).
    pub fn segal(b: &MatrixLaurentPoly) -> Result<Self> {
        let m = b.degree()?;
        let k = complement_basis(b)?;
        let graded = degree_graded_basis(&k)?;
        let prefix_counts: Vec<usize> = segal_levels(&graded, m.max(1))
            .iter()
            .map(|l| l.dim())
            .collect();
        let levels = prefix_counts
            .iter()
            .map(|&c| graded_prefix(&graded, c))
            .collect();
        Ok(DeformationFamily {
            base: b.clone(),
            graded,
            levels,
            phi0: OnceLock::new(),
        })
    }

    /// Family subordinate to an arbitrary uniton factorization: level k is
    /// the complement of the partial product b_1 ... b_k. Deforming at
    /// μ = 1 returns exactly the given factors, since a factor is uniquely
    /// determined by its predecessor product and its level.
    pub fn from_factors(n: usize, factors: &[Subspace]) -> Result<Self> {
        let mut partial = MatrixLaurentPoly::identity(n);
        let mut levels = Vec::with_capacity(factors.len());
        for (j, alpha) in factors.iter().enumerate() {
            if alpha.ambient() != n {
                return Err(Error::Domain(format!(
                    "factor {j} lives in C^{}, expected C^{n}",
                    alpha.ambient()
                )));
            }
            if alpha.dim() == n {
                return Err(Error::Domain(format!(
                    "factor {j} is the whole space and contributes the identity"
                )));
            }
            partial = partial.multiply(&crate::looppoly::BPFactor::new(alpha.clone()).to_loop());
            levels.push(degree_graded_basis(&complement_basis(&partial)?)?);
        }
        let graded = levels
            .last()
            .cloned()
            .unwrap_or_else(|| graded_prefix_empty(n));
        Ok(DeformationFamily {
            base: partial,
            graded,
            levels,
            phi0: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &MatrixLaurentPoly {
        &self.base
    }

    pub fn graded(&self) -> &GradedBasis {
        &self.graded
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Gram matrix of the transformed full basis at μ.
    pub fn gram_matrix(&self, mu: Complex64) -> CMatrix {
        gram_of(&transform_basis(&self.graded, mu))
    }

    pub fn gram_rel_det(&self, mu: Complex64) -> f64 {
        gram_rel_det(&self.gram_matrix(mu))
    }

    /// The deformed factorization at μ: transformed levels, orthonormalized
    /// and fed through the filtration factorization.
    pub fn deform(&self, mu: Complex64) -> Result<Factorization> {
        let rel_det = self.gram_rel_det(mu);
        if rel_det < GRAM_REL_DET_TOL {
            return Err(Error::GramSingular { rel_det });
        }
        let mut levels = Vec::with_capacity(self.levels.len());
        for graded in &self.levels {
            let transformed = transform_basis(graded, mu);
            let max_degree = graded.max_degree();
            levels.push(ComplementSpace::from_spanning(
                self.n(),
                max_degree,
                &transformed,
            )?);
        }
        factorize_from_filtration(self.n(), &levels)
    }

    /// The deformed loop b^μ (product of the deformed factors).
    pub fn deform_loop(&self, mu: Complex64) -> Result<MatrixLaurentPoly> {
        Ok(self.deform(mu)?.product().clone())
    }

    /// The deformed uniton subspaces α_j(μ).
    pub fn deform_unitons(&self, mu: Complex64) -> Result<Vec<Subspace>> {
        Ok(self.deform(mu)?.factors().to_vec())
    }

    /// The transformed full complement K^μ as an orthonormalized space.
    /// For μ ≠ 0 this must agree with the complement of λ ↦ b(μλ)
    /// computed directly from the scaled loop, which ties the transform
    /// construction to an independent oracle.
    pub fn transformed_complement(&self, mu: Complex64) -> Result<ComplementSpace> {
        ComplementSpace::from_spanning(
            self.n(),
            self.graded.max_degree(),
            &transform_basis(&self.graded, mu),
        )
    }

    /// The S^1-invariant limit b^0, computed once and cached.
    pub fn limit_loop(&self) -> Result<&MatrixLaurentPoly> {
        if let Some(l) = self.phi0.get() {
            return Ok(l);
        }
        let l = self.deform_loop(Complex64::new(0.0, 0.0))?;
        let _ = self.phi0.set(l);
        Ok(self.phi0.get().unwrap())
    }

    /// || b^0(λ1 λ2) - b^0(λ2) b^0(λ1) ||_2: zero exactly when the limit
    /// is a circle homomorphism λ ↦ V diag(λ^{k_i}) V^H.
    pub fn cocycle_defect(&self, l1: Complex64, l2: Complex64) -> Result<f64> {
        let phi0 = self.limit_loop()?;
        let lhs = phi0.eval(l1 * l2);
        let rhs = phi0.eval(l2) * phi0.eval(l1);
        Ok(spectral_norm(&(lhs - rhs)))
    }

    /// Max cocycle defect over a samples x samples grid of circle pairs.
    pub fn cocycle_defect_max(&self, samples: usize) -> Result<f64> {
        let pts = unit_circle_points(samples);
        let mut worst = 0.0f64;
        for &l1 in &pts {
            for &l2 in &pts {
                worst = worst.max(self.cocycle_defect(l1, l2)?);
            }
        }
        Ok(worst)
    }

    /// || b^{μ μ1}(λ) - b^μ(μ1 λ) b^μ(μ1)^{-1} ||_sup for |μ1| = 1.
    ///
    /// Both sides generate the shift-invariant subspace of b(μ μ1 λ) H_+
    /// and are I at λ = 1, so they coincide: the deformation is a cocycle
    /// over the circle action on the loop parameter.
    pub fn group_law_defect(&self, mu: Complex64, mu1: Complex64, samples: usize) -> Result<f64> {
        if (mu1.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(
                "group law requires |μ1| = 1 so the rescaled loop stays polynomial".into(),
            ));
        }
        let left = self.deform_loop(mu * mu1)?;
        let bmu = self.deform_loop(mu)?;
        let at_mu1 = bmu.eval(mu1);
        let inv = at_mu1
            .try_inverse()
            .ok_or_else(|| Error::Domain("deformed loop is singular at μ1 on the circle".into()))?;
        let right = bmu
            .substitute_scale(mu1)?
            .multiply(&MatrixLaurentPoly::constant(inv));
        Ok(left.sup_distance(&right, samples))
    }

    /// Splits b(μλ) = b^μ(λ) G^μ(λ) and validates that the factor G^μ is
    /// holomorphic on the disc with constant nonvanishing determinant.
    pub fn outer_part(&self, mu: Complex64) -> Result<(MatrixLaurentPoly, OuterPartReport)> {
        if mu == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("outer part is defined for μ ≠ 0 only".into()));
        }
        let bmu = self.deform_loop(mu)?;
        let scaled = self.base.substitute_scale(mu)?;
        let g = bmu.circle_adjoint().multiply(&scaled);
        let scale = g.max_abs().max(1.0);
        let mut negative_part = 0.0f64;
        for k in g.kmin()..0 {
            negative_part = negative_part.max(crate::linalg::max_abs_entry(&g.coeff(k)));
        }
        let negative_part = negative_part / scale;
        if negative_part > 1e-9 {
            return Err(Error::Inconsistent(format!(
                "b(μλ) b^μ(λ)^{{-1}} has negative Fourier modes of relative size \
                 {negative_part:.3e}; the deformed loop does not divide the scaled one"
            )));
        }
        let coeffs: Vec<CMatrix> = (0..=g.kmax().max(0)).map(|k| g.coeff(k)).collect();
        let analytic = MatrixLaurentPoly::new(g.n(), 0, coeffs);

        let mut min_abs_det = f64::INFINITY;
        for r in 0..=8 {
            let radius = r as f64 / 8.0;
            for l in unit_circle_points(32) {
                let d = analytic.eval(l * radius).determinant().norm();
                min_abs_det = min_abs_det.min(d);
            }
        }
        let boundary = unit_circle_points(256);
        let mut total_arg = 0.0f64;
        let mut prev = analytic.eval(boundary[0]).determinant();
        for j in 1..=boundary.len() {
            let cur = analytic.eval(boundary[j % boundary.len()]).determinant();
            total_arg += (cur / prev).arg();
            prev = cur;
        }
        let winding = (total_arg / (2.0 * std::f64::consts::PI)).round() as i64;
        Ok((
            analytic,
            OuterPartReport {
                negative_part,
                min_abs_det,
                winding,
            },
        ))
    }

    /// Samples the family along μ = t e^{iθ} and fits Gram entries (degree
    /// 2 max d, exact) and loop values at λ0 (bounded degree, smoothness
    /// proxy) by polynomials in t.
    pub fn analyticity_probe(&self, theta: f64, t_samples: usize) -> Result<AnalyticityReport> {
        let maxd = self.graded.max_degree();
        let gram_fit_degree = 2 * maxd;
        if t_samples < gram_fit_degree + 2 {
            return Err(Error::Domain(format!(
                "need at least {} samples to probe a degree-{} fit",
                gram_fit_degree + 2,
                gram_fit_degree
            )));
        }
        let dir = Complex64::new(theta.cos(), theta.sin());
        let ts: Vec<f64> = (0..t_samples)
            .map(|k| -1.0 + 2.0 * k as f64 / (t_samples - 1) as f64)
            .collect();
        let lambda0 = Complex64::from_polar(1.0, 0.3);

        let dim = self.graded.dim();
        let n = self.n();
        let mut gram_samples = vec![Vec::with_capacity(ts.len()); dim * dim];
        let mut loop_samples = vec![Vec::with_capacity(ts.len()); n * n];
        for &t in &ts {
            let mu = dir * t;
            let g = self.gram_matrix(mu);
            for i in 0..dim {
                for j in 0..dim {
                    gram_samples[i * dim + j].push(g[(i, j)]);
                }
            }
            let v = self.deform_loop(mu)?.eval(lambda0);
            for i in 0..n {
                for j in 0..n {
                    loop_samples[i * n + j].push(v[(i, j)]);
                }
            }
        }
        let gram_max_residual = gram_samples
            .iter()
            .map(|ys| crate::linalg::poly_fit_residual(&ts, ys, gram_fit_degree))
            .fold(0.0, f64::max);
        let loop_fit_degree = (t_samples - 2).min(2 * gram_fit_degree + 16);
        let loop_max_residual = loop_samples
            .iter()
            .map(|ys| crate::linalg::poly_fit_residual(&ts, ys, loop_fit_degree))
            .fold(0.0, f64::max);
        Ok(AnalyticityReport {
            theta,
            gram_fit_degree,
            gram_max_residual,
            loop_fit_degree,
            loop_max_residual,
            lambda0,
        })
    }
}

fn graded_prefix(graded: &GradedBasis, count: usize) -> GradedBasis {
    GradedBasis::new(
        graded.n(),
        graded.polys()[..count].to_vec(),
        graded.degrees()[..count].to_vec(),
    )
    .expect("prefix of a graded basis is graded")
}

fn graded_prefix_empty(n: usize) -> GradedBasis {
    GradedBasis::new(n, vec![], vec![]).expect("empty basis is graded")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cplx, CVector};
    use crate::looppoly::product_of_factors;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        cplx(re, 0.0)
    }

    fn e(n: usize, i: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[i] = c(1.0);
        v
    }

    fn span(cols: &[CVector]) -> Subspace {
        Subspace::from_columns(&CMatrix::from_columns(cols)).unwrap()
    }

    fn two_factor_family() -> DeformationFamily {
        let alpha1 = span(&[e(2, 0)]);
        let beta = span(&[CVector::from_vec(vec![c(1.0), c(1.0)])]);
        let b = product_of_factors(2, &[alpha1, beta]);
        DeformationFamily::segal(&b).unwrap()
    }

    fn diag_loop(exponents: &[i64]) -> MatrixLaurentPoly {
        let n = exponents.len();
        let kmax = *exponents.iter().max().unwrap();
        let mut coeffs = vec![CMatrix::zeros(n, n); (kmax + 1) as usize];
        for (i, &k) in exponents.iter().enumerate() {
            coeffs[k as usize][(i, i)] = c(1.0);
        }
        MatrixLaurentPoly::new(n, 0, coeffs)
    }

    #[test]
    fn transform_scales_coefficients_by_degree_gap() {
        // p = (1 + λ) e1, degree 1: q^μ = (μ̄ + λ) e1.
        let p = VectorPoly::new(2, vec![e(2, 0), e(2, 0)]);
        let g = GradedBasis::new(2, vec![p], vec![1]).unwrap();
        let mu = cplx(0.3, -0.4);
        let q = &transform_basis(&g, mu)[0];
        assert!((q.coeff(0)[0] - mu.conj()).norm() < 1e-15);
        assert!((q.coeff(1)[0] - c(1.0)).norm() < 1e-15);

        // At μ = 0 only the leading monomial survives.
        let q0 = &transform_basis(&g, c(0.0))[0];
        assert_eq!(q0.degree(), Some(1));
        assert!(q0.coeff(0).camax() < 1e-15);
    }

    #[test]
    fn gram_of_single_transformed_member() {
        let p = VectorPoly::new(2, vec![e(2, 0), e(2, 0)]);
        let g = GradedBasis::new(2, vec![p], vec![1]).unwrap();
        for mu in [c(0.0), c(0.7), cplx(0.2, 0.5)] {
            let gram = gram_of(&transform_basis(&g, mu));
            assert_abs_diff_eq!(gram[(0, 0)].re, mu.norm_sqr() + 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(gram[(0, 0)].im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gram_at_one_is_identity_for_orthonormal_basis() {
        let fam = two_factor_family();
        let g = fam.gram_matrix(c(1.0));
        assert!(spectral_norm(&(g - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn gram_of_two_factor_family_is_diagonal() {
        // Graded basis {e2, (-e1 + λ e2)/√2}: Gram = diag(1, (1 + |μ|²)/2).
        let fam = two_factor_family();
        for mu in [c(0.0), cplx(0.5, 0.5), c(-0.8)] {
            let g = fam.gram_matrix(mu);
            assert_abs_diff_eq!(g[(0, 0)].re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(g[(1, 1)].re, (1.0 + mu.norm_sqr()) / 2.0, epsilon = 1e-12);
            assert!(g[(0, 1)].norm() < 1e-12);
        }
        assert_abs_diff_eq!(fam.gram_rel_det(c(0.0)), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn deform_at_one_reproduces_base() {
        let fam = two_factor_family();
        let b1 = fam.deform_loop(c(1.0)).unwrap();
        assert!(b1.sup_distance(fam.base(), 32) < 1e-12);
    }

    #[test]
    fn deformed_unitons_of_two_factor_family() {
        let fam = two_factor_family();
        let mu = cplx(0.5, 0.5);
        let factors = fam.deform_unitons(mu).unwrap();
        assert_eq!(factors.len(), 2);
        // α1(μ) = span{e1} for every μ; α2(μ) = span{(1, μ)}, the hand
        // solution of the extraction system against {e2, -μ̄ e1 + λ e2}.
        assert!(factors[0].max_angle_to(&span(&[e(2, 0)])) < 1e-10);
        let expect = span(&[CVector::from_vec(vec![c(1.0), mu])]);
        assert!(factors[1].max_angle_to(&expect) < 1e-10);
    }

    #[test]
    fn limit_of_two_factor_family_is_diagonal() {
        let fam = two_factor_family();
        let phi0 = fam.limit_loop().unwrap();
        assert!(phi0.sup_distance(&diag_loop(&[0, 2]), 32) < 1e-10);
        // Nested at μ = 0: both unitons collapse to span{e1}.
        let factors = fam.deform_unitons(c(0.0)).unwrap();
        assert!(factors[0].max_angle_to(&span(&[e(2, 0)])) < 1e-10);
        assert!(factors[1].max_angle_to(&span(&[e(2, 0)])) < 1e-10);
    }

    #[test]
    fn deformation_is_continuous_near_zero() {
        let fam = two_factor_family();
        let phi0 = fam.limit_loop().unwrap();
        let near = fam.deform_loop(c(1e-5)).unwrap();
        assert!(phi0.sup_distance(&near, 16) < 1e-4);
    }

    #[test]
    fn one_uniton_families_are_fixed_points() {
        // A single factor has an all-constant complement, so every μ
        // reproduces the base loop exactly.
        let alpha = span(&[CVector::from_vec(vec![c(0.6), cplx(0.0, 0.8)])]);
        let b = product_of_factors(2, &[alpha]);
        let fam = DeformationFamily::segal(&b).unwrap();
        for mu in [c(0.0), c(0.25), cplx(0.5, 0.5), c(1.0)] {
            let bm = fam.deform_loop(mu).unwrap();
            assert!(bm.sup_distance(&b, 16) < 1e-12, "μ = {mu}");
        }
    }

    #[test]
    fn cocycle_defect_vanishes_in_the_limit() {
        let fam = two_factor_family();
        assert!(fam.cocycle_defect_max(8).unwrap() < 1e-10);
        // And for homomorphism loops it is identically zero by inspection.
        let l1 = Complex64::from_polar(1.0, 0.7);
        let l2 = Complex64::from_polar(1.0, -1.9);
        assert!(fam.cocycle_defect(l1, l2).unwrap() < 1e-10);
    }

    #[test]
    fn group_law_over_circle_rotations() {
        let fam = two_factor_family();
        let mu1 = Complex64::from_polar(1.0, 1.1);
        for mu in [c(0.0), c(0.4), cplx(0.3, 0.6)] {
            let defect = fam.group_law_defect(mu, mu1, 24).unwrap();
            assert!(defect < 1e-9, "μ = {mu}: defect {defect:.3e}");
        }
        assert!(fam.group_law_defect(c(0.5), c(0.5), 8).is_err());
    }

    #[test]
    fn outer_part_of_two_factor_family() {
        let fam = two_factor_family();
        for mu in [cplx(0.5, 0.0), cplx(0.4, 0.3)] {
            let (g, report) = fam.outer_part(mu).unwrap();
            assert!(g.kmin() >= 0);
            assert!(report.negative_part < 1e-12);
            // det G^μ should be constantly μ^2 in modulus.
            assert_abs_diff_eq!(report.min_abs_det, mu.norm_sqr(), epsilon = 1e-10);
            assert_eq!(report.winding, 0);
            // Check the factorization property on the circle.
            let scaled = fam.base().substitute_scale(mu).unwrap();
            let recomposed = fam.deform_loop(mu).unwrap().multiply(&g);
            assert!(recomposed.sup_distance(&scaled, 24) < 1e-12);
        }
    }

    #[test]
    fn outer_part_rejects_zero() {
        let fam = two_factor_family();
        assert!(fam.outer_part(c(0.0)).is_err());
    }

    #[test]
    fn analyticity_probe_fits_gram_exactly() {
        let fam = two_factor_family();
        for theta in [0.0, std::f64::consts::FRAC_PI_3] {
            let report = fam.analyticity_probe(theta, 24).unwrap();
            assert_eq!(report.gram_fit_degree, 2);
            assert!(report.gram_max_residual < 1e-12);
            assert!(report.loop_max_residual < 1e-8);
        }
        assert!(fam.analyticity_probe(0.0, 2).is_err());
    }

    #[test]
    fn transformed_complement_matches_scaled_loop_complement() {
        let fam = two_factor_family();
        for mu in [
            c(0.3),
            Complex64::from_polar(0.7, std::f64::consts::FRAC_PI_3),
        ] {
            let transformed = fam.transformed_complement(mu).unwrap();
            let scaled = fam.base().substitute_scale(mu).unwrap();
            let direct =
                crate::grassmann::complement_basis_general(&scaled, transformed.dim()).unwrap();
            let angle = transformed.max_angle_to(&direct);
            assert!(angle < 1e-9, "μ = {mu}: angle {angle:.3e}");
        }
    }

    #[test]
    fn from_factors_reproduces_inputs_at_one() {
        let a1 = span(&[CVector::from_vec(vec![c(0.6), cplx(0.3, 0.4), c(-0.2)])]);
        let a2 = span(&[
            CVector::from_vec(vec![c(1.0), c(0.0), cplx(0.1, -0.7)]),
            CVector::from_vec(vec![c(0.0), c(1.0), cplx(0.4, 0.2)]),
        ]);
        let fam = DeformationFamily::from_factors(3, &[a1.clone(), a2.clone()]).unwrap();
        let factors = fam.deform_unitons(c(1.0)).unwrap();
        assert_eq!(factors.len(), 2);
        assert!(factors[0].max_angle_to(&a1) < 1e-9);
        assert!(factors[1].max_angle_to(&a2) < 1e-9);

        // The limit factors are nested: α1(0) ⊂ α2(0).
        let limit = fam.deform_unitons(c(0.0)).unwrap();
        let nesting = spectral_norm(&(limit[1].perp_projector() * limit[0].projector()));
        assert!(nesting < 1e-10);
    }

    #[test]
    fn from_factors_rejects_full_subspace() {
        assert!(DeformationFamily::from_factors(2, &[Subspace::full(2)]).is_err());
    }

    #[test]
    fn identity_family_is_trivial() {
        let fam = DeformationFamily::segal(&MatrixLaurentPoly::identity(2)).unwrap();
        assert_eq!(fam.level_count(), 1);
        let b = fam.deform_loop(cplx(0.3, 0.2)).unwrap();
        assert!(b.sup_distance(&MatrixLaurentPoly::identity(2), 8) < 1e-14);
        assert_abs_diff_eq!(fam.gram_rel_det(c(0.0)), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn homomorphism_loops_are_fixed_by_the_deformation() {
        // diag(1, λ, λ²) is already S^1-invariant; the family must fix it.
        let b = diag_loop(&[0, 1, 2]);
        let fam = DeformationFamily::segal(&b).unwrap();
        for mu in [c(0.0), cplx(0.4, 0.3)] {
            assert!(fam.deform_loop(mu).unwrap().sup_distance(&b, 24) < 1e-10);
        }
    }
}
