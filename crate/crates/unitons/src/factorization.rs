//! Recovery of the Blaschke-Potapov factors of a polynomial unitary loop
//! from a filtration of its complement space.
//!
//! Given the Segal levels K_1 ⊂ ... ⊂ K_m of K = H_+ ⊖ b H_+, the k-th
//! uniton subspace is
//!
//!   α_k = { v ∈ C^n : ⟨ B_{k-1} v, q ⟩ = 0 for all q ∈ K_k },
//!
//! where B_{k-1} is the product of the factors found so far (B_0 = I).
//! Then B_m H_+ = b H_+ and B_m(1) = I force B_m = b: the factorization
//! with nondecreasing images is unique.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grassmann::{
    complement_basis, degree_graded_basis, hplus_inner, loop_column, segal_levels, ComplementSpace,
    VectorPoly,
};
use crate::linalg::{orthonormal_range, CMatrix};
use crate::looppoly::{BPFactor, MatrixLaurentPoly, Subspace};

/// Relative singular value threshold for the uniton extraction system.
pub const EXTRACT_REL_TOL: f64 = 1e-9;

/// Band of relative singular values considered ambiguous: a value inside
/// it neither clearly vanishes nor clearly survives, so the extracted
/// dimension is flagged rather than trusted silently.
pub const AMBIGUITY_BAND: (f64, f64) = (1e-10, 1e-8);

/// A uniton factorization b = Π (π_{α_k} + λ π_{α_k}^⊥).
#[derive(Debug, Clone)]
pub struct Factorization {
    factors: Vec<Subspace>,
    partial_products: Vec<MatrixLaurentPoly>,
    warnings: Vec<String>,
}

impl Factorization {
    pub fn factors(&self) -> &[Subspace] {
        &self.factors
    }

    /// Partial products B_0 = I, B_1, ..., B_m; one more entry than factors.
    pub fn partial_products(&self) -> &[MatrixLaurentPoly] {
        &self.partial_products
    }

    pub fn product(&self) -> &MatrixLaurentPoly {
        self.partial_products.last().unwrap()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n(&self) -> usize {
        self.product().n()
    }

    /// Sum of the codimensions of the factors, which equals deg det of the
    /// product.
    pub fn codim_sum(&self) -> usize {
        self.factors.iter().map(|a| a.ambient() - a.dim()).sum()
    }

    /// Sup-norm distance between the assembled product and a reference
    /// loop over sampled circle points.
    pub fn verify_product(&self, b: &MatrixLaurentPoly, samples: usize) -> f64 {
        self.product().sup_distance(b, samples)
    }
}

/// Solves for α = { v : ⟨ B_prev v, q ⟩ = 0 ∀ q in the level basis }.
///
/// Returns the subspace together with an optional warning when some
/// singular value of the constraint system falls in the ambiguity band.
pub fn extract_uniton_subspace(
    b_prev: &MatrixLaurentPoly,
    level: &[VectorPoly],
) -> Result<(Subspace, Option<String>)> {
    let n = b_prev.n();
    if level.is_empty() {
        return Ok((Subspace::full(n), None));
    }
    let mut sys = CMatrix::zeros(level.len(), n);
    for (r, q) in level.iter().enumerate() {
        assert_eq!(q.n(), n, "dimension mismatch");
        for v in 0..n {
            let col = loop_column(b_prev, v);
            sys[(r, v)] = hplus_inner(&col, q);
        }
    }
    let sv = crate::linalg::singular_values(&sys);
    let smax = sv.first().copied().unwrap_or(0.0);
    // The system is built from unit-normalized loops and polynomials, so
    // unit scale is the reference for both the band and the rank cutoff.
    let scale = smax.max(1.0);
    let in_band = sv
        .iter()
        .any(|&s| s > AMBIGUITY_BAND.0 * scale && s < AMBIGUITY_BAND.1 * scale);
    let warning = in_band.then(|| {
        format!(
            "uniton extraction has a singular value in the ambiguity band \
             ({:.1e}, {:.1e}) of the system scale; the factor dimension \
             may be unreliable",
            AMBIGUITY_BAND.0, AMBIGUITY_BAND.1
        )
    });
    Ok((Subspace::from_null_space(&sys, EXTRACT_REL_TOL), warning))
}

/// Builds the factorization attached to a nested filtration of complement
/// levels. Levels whose factor comes out as the whole space contribute the
/// identity and are dropped with a warning. The result is cross-checked:
/// the complement of the assembled product must coincide with the last
/// level.
pub fn factorize_from_filtration(n: usize, levels: &[ComplementSpace]) -> Result<Factorization> {
    for w in levels.windows(2) {
        if w[0].dim() > w[1].dim() {
            return Err(Error::Domain(format!(
                "filtration dimensions must be nondecreasing, got {} then {}",
                w[0].dim(),
                w[1].dim()
            )));
        }
    }
    let mut factors: Vec<Subspace> = Vec::new();
    let mut partial_products = vec![MatrixLaurentPoly::identity(n)];
    let mut warnings: Vec<String> = Vec::new();
    for (k, level) in levels.iter().enumerate() {
        let b_prev = partial_products.last().unwrap();
        let (alpha, warn) = extract_uniton_subspace(b_prev, level.basis())?;
        if let Some(w) = warn {
            warnings.push(format!("level {}: {}", k + 1, w));
        }
        if alpha.dim() == n {
            warnings.push(format!(
                "level {}: factor is the identity (full uniton subspace), dropped",
                k + 1
            ));
            continue;
        }
        let next = b_prev.multiply(&BPFactor::new(alpha.clone()).to_loop());
        factors.push(alpha);
        partial_products.push(next);
    }
    let fact = Factorization {
        factors,
        partial_products,
        warnings,
    };
    if let Some(last) = levels.last() {
        let recomputed = complement_basis(fact.product())?;
        let angle = recomputed.max_angle_to(last);
        if angle > 1e-8 {
            return Err(Error::Inconsistent(format!(
                "complement of the assembled product deviates from the last \
                 filtration level by principal angle {angle:.3e}"
            )));
        }
    }
    Ok(fact)
}

/// Factorizes a polynomial loop, unitary on the circle with b(1) = I,
/// through its Segal filtration. The first factor always equals the range
/// of b(0); this is cross-checked.
pub fn factorize_segal(b: &MatrixLaurentPoly) -> Result<Factorization> {
    let n = b.n();
    let m = b.degree()?;
    let at_one = b.eval(Complex64::new(1.0, 0.0));
    let defect = crate::linalg::spectral_norm(&(at_one - CMatrix::identity(n, n)));
    if defect > 1e-9 {
        return Err(Error::Domain(format!(
            "loop is not normalized at λ = 1 (defect {defect:.3e}); \
             apply normalize_at_one first"
        )));
    }
    let k = complement_basis(b)?;
    let graded = degree_graded_basis(&k)?;
    let levels = segal_levels(&graded, m.max(1));
    let fact = factorize_from_filtration(n, &levels)?;
    if let Some(first) = fact.factors().first() {
        let range = orthonormal_range(&b.coeff(0), EXTRACT_REL_TOL);
        let angle = crate::linalg::max_principal_angle(first.frame(), &range);
        if angle > 1e-8 {
            return Err(Error::Inconsistent(format!(
                "first Segal factor deviates from range b(0) by angle {angle:.3e}"
            )));
        }
    }
    let residual = fact.verify_product(b, 4 * (m + 2));
    if residual > 1e-8 * (1.0 + b.max_abs()) {
        return Err(Error::Inconsistent(format!(
            "assembled product deviates from the input loop by {residual:.3e}"
        )));
    }
    Ok(fact)
}
