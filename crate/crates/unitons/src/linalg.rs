//! Dense complex linear algebra helpers shared by the loop-group modules.
//!
//! Everything here works on `DMatrix<Complex64>`. Subspaces are always
//! represented by matrices with orthonormal columns; comparisons between
//! subspaces go through principal angles, never through frame entries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const JACOBI_EPS: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 64;
/// Columns whose norm decays below this fraction of the initial column
/// scale are residue of exact cancellations, not data. They are flushed
/// to zero so that no Gram entry ever reaches the denormal range, where
/// rotation phases keep only a few significant bits and would quietly
/// shear the accumulated right factor away from unitarity.
const JACOBI_COLUMN_FLUSH: f64 = 1e-30;

/// Applies the unitary rotation [[c, s], [-s ᾱ, c ᾱ]] to columns i, j.
fn rotate_columns(m: &mut CMatrix, i: usize, j: usize, c: f64, s: f64, alpha: Complex64) {
    let ac = alpha.conj();
    for r in 0..m.nrows() {
        let wi = m[(r, i)];
        let wj = m[(r, j)];
        m[(r, i)] = wi * c - wj * (ac * s);
        m[(r, j)] = wi * s + wj * (ac * c);
    }
}

/// Applies the adjoint rotation [[c, -s α], [s, c α]] to rows i, j.
fn rotate_rows(m: &mut CMatrix, i: usize, j: usize, c: f64, s: f64, alpha: Complex64) {
    for r in 0..m.ncols() {
        let wi = m[(i, r)];
        let wj = m[(j, r)];
        m[(i, r)] = wi * c - wj * (alpha * s);
        m[(j, r)] = wi * s + wj * (alpha * c);
    }
}

/// Rotation angle diagonalizing the Hermitian 2x2 block
/// [[gii, gij], [conj(gij), gjj]]: returns (c, s, α) with α the phase of
/// gij, such that the column rotation above zeroes the off-diagonal.
fn jacobi_rotation(gii: f64, gjj: f64, gij: Complex64) -> (f64, f64, Complex64) {
    let am = gij.norm();
    let alpha = gij / am;
    let tau = (gjj - gii) / (2.0 * am);
    let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
    let t = sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t, alpha)
}

/// One-sided Jacobi SVD of a tall matrix (nrows ≥ ncols): returns
/// (u, σ, v) with m = u diag(σ) v^H, σ descending, v square unitary, and
/// the columns of u orthonormal wherever σ > 0 (zero columns elsewhere).
///
/// The general-purpose SVD of the linear algebra library can hand back
/// complex factors that fail to reconstruct the input once singular
/// vectors are requested (seen on 3x2 inputs with one singular value at
/// machine zero), so every subspace decision in this crate goes through
/// these rotations instead: the factors here are unitary by construction,
/// whatever the spectrum.
fn one_sided_jacobi(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    debug_assert!(m.nrows() >= m.ncols());
    let nc = m.ncols();
    let mut w = m.clone();
    let mut v = CMatrix::identity(nc, nc);
    let scale = (0..nc).map(|j| w.column(j).norm()).fold(0.0f64, f64::max);
    let flush = JACOBI_COLUMN_FLUSH * scale;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for j in 0..nc {
            if w.column(j).norm() <= flush {
                w.column_mut(j).fill(cplx(0.0, 0.0));
            }
        }
        for i in 0..nc.saturating_sub(1) {
            for j in (i + 1)..nc {
                let gii: f64 = w.column(i).norm_squared();
                let gjj: f64 = w.column(j).norm_squared();
                if gii == 0.0 || gjj == 0.0 {
                    continue;
                }
                let gij = w.column(i).dotc(&w.column(j));
                if gij.norm() <= JACOBI_EPS * (gii * gjj).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s, alpha) = jacobi_rotation(gii, gjj, gij);
                rotate_columns(&mut w, i, j, c, s, alpha);
                rotate_columns(&mut v, i, j, c, s, alpha);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..nc).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let mut u = CMatrix::zeros(m.nrows(), nc);
    let mut sigma = Vec::with_capacity(nc);
    let mut vs = CMatrix::zeros(nc, nc);
    for (out, &idx) in order.iter().enumerate() {
        sigma.push(norms[idx]);
        if norms[idx] > 0.0 {
            let col = w.column(idx).into_owned() * cplx(1.0 / norms[idx], 0.0);
            u.set_column(out, &col);
        }
        vs.set_column(out, &v.column(idx).into_owned());
    }
    (u, sigma, vs)
}

/// Jacobi SVD of an arbitrary matrix: (u, σ, v) with m = u diag(σ) v^H and
/// σ descending of length min(nrows, ncols). The factor on the shorter
/// side is square unitary; the longer side carries orthonormal columns for
/// σ > 0 and zero columns for σ = 0.
pub fn jacobi_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    if m.nrows() >= m.ncols() {
        one_sided_jacobi(m)
    } else {
        let (u, sigma, v) = one_sided_jacobi(&m.adjoint());
        (v, sigma, u)
    }
}

/// Singular values of `m`, descending; empty for empty matrices.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    jacobi_svd(m).1
}

/// Largest singular value; 0 for empty matrices.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, c| a.max(c.norm()))
}

/// `count` equispaced points e^{2 pi i k / count} on the unit circle.
pub fn unit_circle_points(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64) / (count as f64);
            Complex64::new(t.cos(), t.sin())
        })
        .collect()
}

/// Pads `m` with zero rows until it has at least as many rows as columns.
/// Singular values and right singular vectors are unchanged, and the tall
/// shape makes the Jacobi SVD carry the full square set of right vectors,
/// null directions included.
fn pad_to_tall(m: &CMatrix) -> CMatrix {
    if m.nrows() >= m.ncols() {
        return m.clone();
    }
    let mut out = CMatrix::zeros(m.ncols(), m.ncols());
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

/// Orthonormal basis of the null space { x : m x = 0 }.
///
/// Singular values below `rel_tol` times the largest are treated as zero.
/// A zero (or empty) matrix yields the identity basis of the full space.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    null_space_floored(m, rel_tol, 0.0)
}

/// Like `null_space`, but the cutoff is `rel_tol * max(s_max, scale_floor)`.
///
/// When the input is assembled from unit-normalized data (orthonormal
/// frames, unit polynomials), an all-crumb matrix of entries ~1e-16 must
/// count as zero; a purely relative cutoff would instead promote the
/// largest crumb to a genuine direction. Pass `scale_floor = 1` there.
pub fn null_space_floored(m: &CMatrix, rel_tol: f64, scale_floor: f64) -> CMatrix {
    let ncols = m.ncols();
    if ncols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMatrix::identity(ncols, ncols);
    }
    let (_, sigma, v) = one_sided_jacobi(&pad_to_tall(m));
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return CMatrix::identity(ncols, ncols);
    }
    let cut = rel_tol * smax.max(scale_floor);
    let kept: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= cut).collect();
    let mut out = CMatrix::zeros(ncols, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        out.set_column(j, &v.column(i).into_owned());
    }
    out
}

/// Orthonormal basis of the column space with an absolute singular value
/// cutoff, for inputs whose genuine directions are known to be near unit.
pub fn orthonormal_range_abs(m: &CMatrix, abs_tol: f64) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let (u, sigma, _) = jacobi_svd(m);
    let kept: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > abs_tol).collect();
    let mut out = CMatrix::zeros(m.nrows(), kept.len());
    for (j, &i) in kept.iter().enumerate() {
        out.set_column(j, &u.column(i).into_owned());
    }
    out
}

/// Rank of `m` with singular values below `rel_tol * s_max` treated as zero.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the column space of `m` (left singular vectors with
/// singular value above `rel_tol * s_max`).
pub fn orthonormal_range(m: &CMatrix, rel_tol: f64) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let (u, sigma, _) = jacobi_svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let cut = rel_tol * smax;
    let kept: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > cut).collect();
    let mut out = CMatrix::zeros(m.nrows(), kept.len());
    for (j, &i) in kept.iter().enumerate() {
        out.set_column(j, &u.column(i).into_owned());
    }
    out
}

/// Modified Gram-Schmidt in the given column order, with one
/// reorthogonalization pass. Fails if a column drops below `rank_tol`
/// of its original norm, naming the offending column.
///
/// No pivoting and no phase adjustment: a frame that depends smoothly on
/// a parameter stays smooth, which matters for finite differences of
/// pointwise frames over a grid.
pub fn orthonormalize_in_order(m: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        let original = q.column(j).norm();
        if original == 0.0 {
            return Err(Error::RankTolerance(format!(
                "column {j} is zero, cannot orthonormalize"
            )));
        }
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i).into_owned();
                let coef = qi.dotc(&q.column(j).into_owned());
                let update = qi * coef;
                let mut col = q.column_mut(j);
                col -= update;
            }
        }
        let norm = q.column(j).norm();
        if norm <= rank_tol * original.max(1.0) {
            return Err(Error::RankTolerance(format!(
                "column {j} is numerically dependent on the preceding columns \
                 (residual norm {norm:.3e})"
            )));
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        let mut col = q.column_mut(j);
        col *= inv;
    }
    Ok(q)
}

/// Rotates each column by a unit scalar so its first entry of modulus
/// above `anchor_tol` becomes real positive. Used to pin the phase
/// ambiguity of SVD-produced frames; not applied to smooth pointwise
/// frames, where the anchor entry may wind.
pub fn phase_fix_columns(m: &mut CMatrix, anchor_tol: f64) {
    for j in 0..m.ncols() {
        let mut anchor = None;
        for i in 0..m.nrows() {
            if m[(i, j)].norm() > anchor_tol {
                anchor = Some(m[(i, j)]);
                break;
            }
        }
        if let Some(a) = anchor {
            let phase = a.conj() / a.norm();
            let mut col = m.column_mut(j);
            col *= phase;
        }
    }
}

/// Principal angles (ascending, in radians) between the column spans of two
/// orthonormal frames in the same ambient space.
pub fn principal_angles(u: &CMatrix, v: &CMatrix) -> Vec<f64> {
    assert_eq!(u.nrows(), v.nrows(), "ambient dimension mismatch");
    if u.ncols() == 0 || v.ncols() == 0 {
        return Vec::new();
    }
    let sv = singular_values(&(u.adjoint() * v));
    sv.iter().map(|s| s.clamp(-1.0, 1.0).acos()).collect()
}

/// Largest principal angle; pi/2 when the dimensions differ, so that a
/// small return value always certifies equality of subspaces.
///
/// Computed from sin θ = ||(I - U U^H) V||_2 rather than acos of singular
/// values of U^H V: the cosine form cannot resolve angles below the square
/// root of machine epsilon, which would put even exactly equal subspaces
/// at ~1.5e-8.
pub fn max_principal_angle(u: &CMatrix, v: &CMatrix) -> f64 {
    if u.ncols() != v.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if u.ncols() == 0 {
        return 0.0;
    }
    let resid = v - u * (u.adjoint() * v);
    let s = spectral_norm(&resid).clamp(0.0, 1.0);
    s.asin()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// The input is symmetrized first; `herm_defect` reports how far it was
/// from Hermitian. Two-sided Jacobi rotations, for the same reason the
/// SVD above avoids the library decomposition.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix, f64) {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let herm_defect = spectral_norm(&(m - &herm));
    let n = herm.nrows();
    let mut a = herm;
    let mut q = CMatrix::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let aii = a[(i, i)].re;
                let ajj = a[(j, j)].re;
                let aij = a[(i, j)];
                if aij.norm() <= JACOBI_EPS * (aii.abs() + ajj.abs()) {
                    continue;
                }
                rotated = true;
                let (c, s, alpha) = jacobi_rotation(aii, ajj, aij);
                rotate_columns(&mut a, i, j, c, s, alpha);
                rotate_rows(&mut a, i, j, c, s, alpha);
                a[(i, j)] = Complex64::new(0.0, 0.0);
                a[(j, i)] = Complex64::new(0.0, 0.0);
                rotate_columns(&mut q, i, j, c, s, alpha);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.partial_cmp(&a[(y, y)].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &q.column(i).into_owned());
    }
    (vals, vecs, herm_defect)
}

/// Least-squares fit of complex samples y(t_k) by a polynomial of the given
/// degree in the real variable t; returns the max-abs fit residual.
pub fn poly_fit_residual(ts: &[f64], ys: &[Complex64], degree: usize) -> f64 {
    assert_eq!(ts.len(), ys.len(), "sample count mismatch");
    assert!(
        ts.len() >= degree + 2,
        "need at least degree + 2 samples for a meaningful residual"
    );
    let rows = ts.len();
    let cols = degree + 1;
    let mut vand = DMatrix::<f64>::zeros(rows, cols);
    for (r, &t) in ts.iter().enumerate() {
        let mut p = 1.0;
        for c in 0..cols {
            vand[(r, c)] = p;
            p *= t;
        }
    }
    let svd = vand.svd(true, true);
    let re = DVector::from_iterator(rows, ys.iter().map(|y| y.re));
    let im = DVector::from_iterator(rows, ys.iter().map(|y| y.im));
    let cre = svd.solve(&re, 1e-14).expect("least squares solve");
    let cim = svd.solve(&im, 1e-14).expect("least squares solve");
    let mut worst = 0.0f64;
    for (r, &t) in ts.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = 1.0;
        for c in 0..cols {
            acc += Complex64::new(cre[c], cim[c]) * p;
            p *= t;
        }
        worst = worst.max((acc - ys[r]).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mat(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMatrix {
        CMatrix::from_iterator(rows, cols, entries.iter().map(|&(re, im)| cplx(re, im)))
    }

    #[test]
    fn spectral_norm_diagonal() {
        let m = mat(2, 2, &[(3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, -4.0)]);
        assert_abs_diff_eq!(spectral_norm(&m), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn jacobi_svd_factors_are_unitary_and_reconstruct() {
        let m = mat(
            4,
            3,
            &[
                (0.3, -1.1),
                (0.7, 0.2),
                (-0.4, 0.9),
                (1.2, 0.0),
                (0.1, 0.5),
                (-0.8, -0.3),
                (0.6, 0.6),
                (-0.2, 1.0),
                (0.9, -0.7),
                (0.0, 0.4),
                (-1.3, 0.1),
                (0.5, -0.5),
            ],
        );
        let (u, s, v) = jacobi_svd(&m);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let mut sig = CMatrix::zeros(3, 3);
        for (i, &x) in s.iter().enumerate() {
            sig[(i, i)] = cplx(x, 0.0);
        }
        let recon = &u * sig * v.adjoint();
        assert!(frobenius_norm(&(recon - &m)) < 1e-13 * s[0]);
        let eye = CMatrix::identity(3, 3);
        assert!(spectral_norm(&(u.adjoint() * &u - &eye)) < 1e-13);
        assert!(spectral_norm(&(v.adjoint() * &v - &eye)) < 1e-13);
    }

    #[test]
    fn jacobi_svd_resolves_machine_zero_singular_values() {
        // A rank-1 matrix plus a perturbation at machine scale: the second
        // singular value must come out tiny and the computed range must
        // still span the dominant column space.
        let a = mat(3, 1, &[(0.6, 0.2), (-0.3, 0.7), (0.1, -0.2)]);
        let b = mat(2, 1, &[(0.8, -0.1), (0.4, 0.3)]);
        let mut m = &a * b.adjoint();
        m[(0, 0)] += cplx(1e-16, -2e-16);
        m[(2, 1)] += cplx(-3e-16, 1e-16);
        let (u, s, v) = jacobi_svd(&m);
        assert!(s[1] <= 1e-14 * s[0], "second singular value {:.3e}", s[1]);
        let mut sig = CMatrix::zeros(2, 2);
        for (i, &x) in s.iter().enumerate() {
            sig[(i, i)] = cplx(x, 0.0);
        }
        let recon = &u * sig * v.adjoint();
        assert!(frobenius_norm(&(recon - &m)) < 1e-14);
        let range = orthonormal_range(&m, 1e-9);
        assert_eq!(range.ncols(), 1);
        let resid = &m - &range * (range.adjoint() * &m);
        assert!(spectral_norm(&resid) < 1e-14);
    }

    #[test]
    fn null_space_of_wide_matrix_is_complete() {
        // 1x3 row [1 1 1]: null space must be 2-dimensional even though the
        // thin SVD of the unpadded matrix would only expose one right vector.
        let m = mat(1, 3, &[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)]);
        let ns = null_space(&m, 1e-9);
        assert_eq!(ns.ncols(), 2);
        assert!(spectral_norm(&(&m * &ns)) < 1e-12);
        let gram = ns.adjoint() * &ns;
        assert!(spectral_norm(&(gram - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let m = CMatrix::zeros(3, 2);
        let ns = null_space(&m, 1e-9);
        assert_eq!(ns.ncols(), 2);
    }

    #[test]
    fn null_space_basis_stays_orthonormal_under_cancellation_churn() {
        // Two orthonormal rows of a unitary: the two padded columns are
        // annihilated by pure cancellation and their norms decay through
        // dozens of orders of magnitude. Without the column flush they
        // linger in the denormal range, where rotation phases carry only
        // a few significant bits and the right factor loses unitarity at
        // the 1e-3 level.
        let m = mat(
            2,
            4,
            &[
                (0.210577, 0.276496),
                (-0.190418, 0.135412),
                (0.183241, -0.483463),
                (-0.537153, 0.050735),
                (-0.497452, 0.051076),
                (-0.526028, -0.546685),
                (0.009224, -0.601449),
                (-0.218159, 0.176448),
            ],
        );
        let ns = null_space_floored(&m, 1e-9, 1.0);
        assert_eq!(ns.ncols(), 2);
        let gram = ns.adjoint() * &ns;
        assert!(spectral_norm(&(gram - CMatrix::identity(2, 2))) < 1e-12);
        assert!(spectral_norm(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn orthonormalize_keeps_order_and_span() {
        let m = mat(2, 2, &[(2.0, 0.0), (0.0, 0.0), (1.0, 0.0), (1.0, 0.0)]);
        let q = orthonormalize_in_order(&m, 1e-9).unwrap();
        // First column direction preserved exactly.
        assert_abs_diff_eq!(q[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q[(1, 0)].norm(), 0.0, epsilon = 1e-14);
        let gram = q.adjoint() * &q;
        assert!(spectral_norm(&(gram - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn orthonormalize_rejects_dependent_columns() {
        let m = mat(2, 2, &[(1.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 0.0)]);
        assert!(orthonormalize_in_order(&m, 1e-9).is_err());
    }

    #[test]
    fn principal_angles_of_rotated_plane() {
        let u = mat(3, 1, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let t: f64 = 0.3;
        let v = mat(3, 1, &[(t.cos(), 0.0), (t.sin(), 0.0), (0.0, 0.0)]);
        let angles = principal_angles(&u, &v);
        assert_eq!(angles.len(), 1);
        assert_abs_diff_eq!(angles[0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(max_principal_angle(&u, &v), 0.3, epsilon = 1e-12);
        // Equal subspaces resolve far below sqrt(machine epsilon).
        assert!(max_principal_angle(&u, &u) < 1e-14);
    }

    #[test]
    fn mismatched_dimensions_are_far_apart() {
        let u = mat(2, 1, &[(1.0, 0.0), (0.0, 0.0)]);
        let v = CMatrix::identity(2, 2);
        assert_abs_diff_eq!(
            max_principal_angle(&u, &v),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn hermitian_eigen_sorts_ascending() {
        let m = mat(2, 2, &[(2.0, 0.0), (0.0, 1.0), (0.0, -1.0), (2.0, 0.0)]);
        let (vals, vecs, defect) = hermitian_eigen(&m);
        assert!(defect < 1e-15);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
        let recon = &vecs
            * CMatrix::from_diagonal(&CVector::from_iterator(
                2,
                vals.iter().map(|&v| cplx(v, 0.0)),
            ))
            * vecs.adjoint();
        assert!(spectral_norm(&(recon - m)) < 1e-12);
    }

    #[test]
    fn polynomial_fit_residual_detects_degree() {
        let ts: Vec<f64> = (0..20).map(|k| -1.0 + 0.1 * k as f64 + 0.05).collect();
        let ys: Vec<Complex64> = ts.iter().map(|&t| cplx(1.0 + t * t, 2.0 * t)).collect();
        assert!(poly_fit_residual(&ts, &ys, 2) < 1e-12);
        assert!(poly_fit_residual(&ts, &ys, 1) > 1e-3);
    }
}
