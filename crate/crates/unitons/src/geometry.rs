//! Grids of loops over a plane domain and the harmonic-map diagnostics.
//!
//! A map Φ: Ω → polynomial unitary loops is an extended solution when
//!
//!   Φ^{-1} ∂_z Φ = (1 - λ^{-1}) A_z,   Φ^{-1} ∂_z̄ Φ = (1 - λ) A_z̄,
//!
//! with A_z̄ = A_z^H; then φ = Φ(-1, ·) is harmonic and the flatness of the
//! family gives (A_z)_z̄ + (A_z̄)_z = 0. Derivatives are replaced by central
//! differences on a uniform grid, so every residual here carries an O(h²)
//! discretization error; orders are checked by refining the grid.
//!
//! The S^1-invariant limits b^0 get their own diagnostics: nested uniton
//! bundles, ∂_z moving sections one step up the filtration, ∂_z̄ preserving
//! them, and an integer rotation spectrum constant across the grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::deformation::DeformationFamily;
use crate::error::{Error, Result};
use crate::grassmann::{complement_basis, loop_column};
use crate::linalg::{cplx, spectral_norm, CMatrix};
use crate::looppoly::{product_of_factors, MatrixLaurentPoly, Subspace};

/// Uniform square-spacing grid { (x0 + ix h) + i (y0 + iy h) }.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDomain {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    h: f64,
}

impl GridDomain {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, h: f64) -> Result<Self> {
        if nx < 5 || ny < 5 {
            return Err(Error::Domain(format!(
                "grid must be at least 5 x 5 for second differences, got {nx} x {ny}"
            )));
        }
        if !(h.is_finite() && h > 0.0) || !x0.is_finite() || !y0.is_finite() {
            return Err(Error::Domain(format!("bad grid geometry: h = {h}")));
        }
        Ok(GridDomain { nx, ny, x0, y0, h })
    }

    /// n x n grid covering the square [-w, w]^2.
    pub fn square(n: usize, half_width: f64) -> Result<Self> {
        if n < 5 {
            return Err(Error::Domain(format!(
                "grid must be at least 5 x 5, got {n}"
            )));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        GridDomain::new(n, n, -half_width, -half_width, h)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn z(&self, ix: usize, iy: usize) -> Complex64 {
        cplx(self.x0 + ix as f64 * self.h, self.y0 + iy as f64 * self.h)
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut pts = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                pts.push((ix, iy));
            }
        }
        pts
    }

    /// Points at least `margin` steps away from every edge.
    pub fn interior(&self, margin: usize) -> Vec<(usize, usize)> {
        let mut pts = Vec::new();
        for iy in margin..self.ny.saturating_sub(margin) {
            for ix in margin..self.nx.saturating_sub(margin) {
                pts.push((ix, iy));
            }
        }
        pts
    }

    /// Halves the spacing while keeping the same physical rectangle; the
    /// old points are a subset of the new ones.
    pub fn refine(&self) -> GridDomain {
        GridDomain {
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            x0: self.x0,
            y0: self.y0,
            h: self.h / 2.0,
        }
    }
}

/// Matrix-valued function sampled on a grid.
#[derive(Debug, Clone)]
pub struct MatrixField {
    grid: GridDomain,
    values: Vec<CMatrix>,
}

impl MatrixField {
    pub fn from_fn<F>(grid: GridDomain, f: F) -> Self
    where
        F: Fn(Complex64) -> CMatrix + Sync,
    {
        let values = grid
            .points()
            .into_par_iter()
            .map(|(ix, iy)| f(grid.z(ix, iy)))
            .collect();
        MatrixField { grid, values }
    }

    pub fn from_values(grid: GridDomain, values: Vec<CMatrix>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} values on a {} point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(MatrixField { grid, values })
    }

    pub fn grid(&self) -> GridDomain {
        self.grid
    }

    pub fn get(&self, ix: usize, iy: usize) -> &CMatrix {
        &self.values[self.grid.idx(ix, iy)]
    }

    /// Central-difference ∂_z = (∂_x - i ∂_y)/2 at an interior point.
    pub fn dz(&self, ix: usize, iy: usize) -> CMatrix {
        let s = 1.0 / (4.0 * self.grid.h);
        (self.get(ix + 1, iy) - self.get(ix - 1, iy)).map(|v| v * cplx(s, 0.0))
            + (self.get(ix, iy + 1) - self.get(ix, iy - 1)).map(|v| v * cplx(0.0, -s))
    }

    /// Central-difference ∂_z̄ = (∂_x + i ∂_y)/2 at an interior point.
    pub fn dzbar(&self, ix: usize, iy: usize) -> CMatrix {
        let s = 1.0 / (4.0 * self.grid.h);
        (self.get(ix + 1, iy) - self.get(ix - 1, iy)).map(|v| v * cplx(s, 0.0))
            + (self.get(ix, iy + 1) - self.get(ix, iy - 1)).map(|v| v * cplx(0.0, s))
    }
}

/// Loop-valued function sampled on a grid.
#[derive(Debug, Clone)]
pub struct LoopField {
    grid: GridDomain,
    values: Vec<MatrixLaurentPoly>,
}

impl LoopField {
    pub fn try_from_fn<F>(grid: GridDomain, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<MatrixLaurentPoly> + Sync,
    {
        let values = grid
            .points()
            .into_par_iter()
            .map(|(ix, iy)| f(grid.z(ix, iy)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LoopField { grid, values })
    }

    pub fn grid(&self) -> GridDomain {
        self.grid
    }

    pub fn get(&self, ix: usize, iy: usize) -> &MatrixLaurentPoly {
        &self.values[self.grid.idx(ix, iy)]
    }

    pub fn n(&self) -> usize {
        self.values[0].n()
    }

    /// λ-slice as a matrix field.
    pub fn eval(&self, lambda: Complex64) -> MatrixField {
        MatrixField {
            grid: self.grid,
            values: self.values.iter().map(|l| l.eval(lambda)).collect(),
        }
    }

    pub fn dz(&self, ix: usize, iy: usize) -> MatrixLaurentPoly {
        let s = 1.0 / (4.0 * self.grid.h);
        MatrixLaurentPoly::linear_combination(&[
            (cplx(s, 0.0), self.get(ix + 1, iy)),
            (cplx(-s, 0.0), self.get(ix - 1, iy)),
            (cplx(0.0, -s), self.get(ix, iy + 1)),
            (cplx(0.0, s), self.get(ix, iy - 1)),
        ])
    }

    pub fn dzbar(&self, ix: usize, iy: usize) -> MatrixLaurentPoly {
        let s = 1.0 / (4.0 * self.grid.h);
        MatrixLaurentPoly::linear_combination(&[
            (cplx(s, 0.0), self.get(ix + 1, iy)),
            (cplx(-s, 0.0), self.get(ix - 1, iy)),
            (cplx(0.0, s), self.get(ix, iy + 1)),
            (cplx(0.0, -s), self.get(ix, iy - 1)),
        ])
    }

    /// Worst unitarity defect over the grid.
    pub fn unitarity_defect(&self, samples: usize) -> f64 {
        self.values
            .par_iter()
            .map(|l| l.unitarity_defect(samples))
            .reduce(|| 0.0, f64::max)
    }

    /// Worst sup distance to another field over the common grid.
    pub fn sup_distance(&self, other: &LoopField, samples: usize) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        Ok(self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(a, b)| a.sup_distance(b, samples))
            .reduce(|| 0.0, f64::max))
    }
}

/// Subspace-valued function (a subbundle of the trivial C^n bundle).
#[derive(Debug, Clone)]
pub struct BundleField {
    grid: GridDomain,
    values: Vec<Subspace>,
}

impl BundleField {
    /// Orthonormalizes the columns of `frame_fn(z)` in order at every grid
    /// point. In-order Gram-Schmidt keeps the frame as smooth as the input
    /// columns, which central differences of the projectors rely on.
    pub fn from_frames<F>(grid: GridDomain, frame_fn: F) -> Result<Self>
    where
        F: Fn(Complex64) -> CMatrix + Sync,
    {
        let values =
            grid.points()
                .into_par_iter()
                .map(|(ix, iy)| {
                    let z = grid.z(ix, iy);
                    let frame = crate::linalg::orthonormalize_in_order(&frame_fn(z), 1e-8)
                        .map_err(|e| Error::RankDrop {
                            ix,
                            iy,
                            z: format!("{z}"),
                            msg: e.to_string(),
                        })?;
                    Subspace::from_orthonormal(frame)
                })
                .collect::<Result<Vec<_>>>()?;
        Ok(BundleField { grid, values })
    }

    pub fn from_values(grid: GridDomain, values: Vec<Subspace>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} subspaces on a {} point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(BundleField { grid, values })
    }

    pub fn grid(&self) -> GridDomain {
        self.grid
    }

    pub fn get(&self, ix: usize, iy: usize) -> &Subspace {
        &self.values[self.grid.idx(ix, iy)]
    }

    pub fn projector_field(&self) -> MatrixField {
        MatrixField {
            grid: self.grid,
            values: self.values.iter().map(|s| s.projector()).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.values.iter().map(|s| s.dim()).collect()
    }
}

/// A pointwise uniton factorization over a grid.
#[derive(Debug, Clone)]
pub struct UnitonField {
    grid: GridDomain,
    n: usize,
    factors: Vec<BundleField>,
}

impl UnitonField {
    pub fn new(grid: GridDomain, n: usize, factors: Vec<BundleField>) -> Result<Self> {
        for f in &factors {
            if f.grid != grid {
                return Err(Error::Domain("factor bundle on a different grid".into()));
            }
        }
        Ok(UnitonField { grid, n, factors })
    }

    /// Builds the bundles by orthonormalizing user frames column by column.
    pub fn from_frames(
        grid: GridDomain,
        n: usize,
        frame_fns: &[&(dyn Fn(Complex64) -> CMatrix + Sync)],
    ) -> Result<Self> {
        let factors = frame_fns
            .iter()
            .map(|f| BundleField::from_frames(grid, f))
            .collect::<Result<Vec<_>>>()?;
        UnitonField::new(grid, n, factors)
    }

    pub fn grid(&self) -> GridDomain {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[BundleField] {
        &self.factors
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    fn factors_at(&self, ix: usize, iy: usize) -> Vec<Subspace> {
        self.factors.iter().map(|f| f.get(ix, iy).clone()).collect()
    }

    /// The loop field Φ(λ, z) = Π_j (π_{α_j(z)} + λ π_{α_j(z)}^⊥).
    pub fn loop_field(&self) -> LoopField {
        let values = self
            .grid
            .points()
            .into_par_iter()
            .map(|(ix, iy)| product_of_factors(self.n, &self.factors_at(ix, iy)))
            .collect();
        LoopField {
            grid: self.grid,
            values,
        }
    }
}

/// Connection coefficients of a loop at one grid point.
#[derive(Debug, Clone)]
pub struct ConnectionPoint {
    pub a_z: CMatrix,
    pub a_zbar: CMatrix,
    /// Distance of Φ^{-1}dΦ from the extended-solution pencil shape
    /// ((1 - λ^{-1}) A_z dz + (1 - λ) A_z̄ dz̄) with A_z̄ = -A_z^H.
    pub residual: f64,
}

/// Expands Φ^{-1}∂Φ in powers of λ and matches it against the pencil.
pub fn connection_at(
    phi: &MatrixLaurentPoly,
    dz_phi: &MatrixLaurentPoly,
    dzbar_phi: &MatrixLaurentPoly,
) -> ConnectionPoint {
    let adj = phi.circle_adjoint();
    let p = adj.multiply(dz_phi);
    let q = adj.multiply(dzbar_phi);
    let a_z = p.coeff(0);
    let a_zbar = q.coeff(0);
    let mut residual =
        spectral_norm(&(p.coeff(-1) + &a_z)).max(spectral_norm(&(q.coeff(1) + &a_zbar)));
    for k in p.kmin()..=p.kmax() {
        if k != 0 && k != -1 {
            residual = residual.max(spectral_norm(&p.coeff(k)));
        }
    }
    for k in q.kmin()..=q.kmax() {
        if k != 0 && k != 1 {
            residual = residual.max(spectral_norm(&q.coeff(k)));
        }
    }
    residual = residual.max(spectral_norm(&(a_zbar.adjoint() + &a_z)));
    ConnectionPoint {
        a_z,
        a_zbar,
        residual,
    }
}

/// Worst extended-solution residual over interior points, together with
/// the A_z and A_z̄ fields (zero on the one-point boundary rim).
pub fn connection_fields(field: &LoopField) -> (MatrixField, MatrixField, f64) {
    let grid = field.grid();
    let n = field.n();
    let interior = grid.interior(1);
    let computed: Vec<((usize, usize), ConnectionPoint)> = interior
        .par_iter()
        .map(|&(ix, iy)| {
            let c = connection_at(field.get(ix, iy), &field.dz(ix, iy), &field.dzbar(ix, iy));
            ((ix, iy), c)
        })
        .collect();
    let mut az = vec![CMatrix::zeros(n, n); grid.len()];
    let mut azbar = vec![CMatrix::zeros(n, n); grid.len()];
    let mut worst = 0.0f64;
    for ((ix, iy), c) in computed {
        let i = grid.idx(ix, iy);
        az[i] = c.a_z;
        azbar[i] = c.a_zbar;
        worst = worst.max(c.residual);
    }
    (
        MatrixField { grid, values: az },
        MatrixField {
            grid,
            values: azbar,
        },
        worst,
    )
}

/// Max over interior points of the extended-solution defect.
pub fn extended_solution_residual(field: &LoopField) -> f64 {
    connection_fields(field).2
}

/// Max over the 2-margin interior of || (A_z)_z̄ + (A_z̄)_z ||.
pub fn harmonicity_residual(field: &LoopField) -> f64 {
    let (az, azbar, _) = connection_fields(field);
    field
        .grid()
        .interior(2)
        .par_iter()
        .map(|&(ix, iy)| spectral_norm(&(az.dzbar(ix, iy) + azbar.dz(ix, iy))))
        .reduce(|| 0.0, f64::max)
}

/// Harmonic-map residual of the map φ = Φ(-1, ·) itself:
/// ∂_z̄(φ^{-1}∂_z φ) + ∂_z(φ^{-1}∂_z̄ φ), maximal spectral norm.
pub fn harmonic_map_residual(field: &LoopField) -> f64 {
    let grid = field.grid();
    let phi = field.eval(cplx(-1.0, 0.0));
    let n = field.n();
    let interior = grid.interior(1);
    let mut az = vec![CMatrix::zeros(n, n); grid.len()];
    let mut azbar = vec![CMatrix::zeros(n, n); grid.len()];
    for &(ix, iy) in &interior {
        let inv = phi.get(ix, iy).adjoint();
        az[grid.idx(ix, iy)] = &inv * phi.dz(ix, iy);
        azbar[grid.idx(ix, iy)] = &inv * phi.dzbar(ix, iy);
    }
    let az = MatrixField { grid, values: az };
    let azbar = MatrixField {
        grid,
        values: azbar,
    };
    grid.interior(2)
        .par_iter()
        .map(|&(ix, iy)| spectral_norm(&(az.dzbar(ix, iy) + azbar.dz(ix, iy))))
        .reduce(|| 0.0, f64::max)
}

/// Tests the Grassmannian-model form of the extended-solution equations:
/// λ ∂_z and ∂_z̄ map sections of W(z) = Φ(·, z) H_+ back into W(z).
/// Sections are probed against the complement of W(z), so the result is a
/// frame-independent O(h²) residual.
pub fn grassmann_residual(field: &LoopField) -> Result<f64> {
    let grid = field.grid();
    grid.interior(1)
        .par_iter()
        .map(|&(ix, iy)| {
            let phi = field.get(ix, iy);
            let k = complement_basis(phi)?;
            let m = phi.degree()?;
            let dz = field.dz(ix, iy);
            let dzbar = field.dzbar(ix, iy);
            let mut worst = 0.0f64;
            for i in 0..field.n() {
                for shift in 0..m.max(1) {
                    let sz = loop_column(&dz, i).shift_by(shift + 1);
                    let szbar = loop_column(&dzbar, i).shift_by(shift);
                    for s in [sz, szbar] {
                        let denom = s.norm().max(1.0);
                        worst = worst.max(k.component_norm(&s) / denom);
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max))
}

/// Residuals of the S^1-invariant structure of a nested uniton field.
#[derive(Debug, Clone)]
pub struct S1Structure {
    /// max_j || π_{j+1}^⊥ π_j ||: how far the bundles are from nested.
    pub nesting: f64,
    /// max_j || π_{j+1}^⊥ (∂_z π_j) π_j ||: ∂_z must move sections of α_j
    /// into α_{j+1} (trivial for the last bundle).
    pub dz_residual: f64,
    /// max_j || π_j^⊥ (∂_z̄ π_j) π_j ||: ∂_z̄ must preserve each bundle.
    pub dzbar_residual: f64,
}

pub fn s1_structure_residuals(factors: &[BundleField]) -> Result<S1Structure> {
    if factors.is_empty() {
        return Ok(S1Structure {
            nesting: 0.0,
            dz_residual: 0.0,
            dzbar_residual: 0.0,
        });
    }
    let grid = factors[0].grid();
    let projectors: Vec<MatrixField> = factors.iter().map(|f| f.projector_field()).collect();

    let mut nesting = 0.0f64;
    for (ix, iy) in grid.points() {
        for w in projectors.windows(2) {
            let p = w[0].get(ix, iy);
            let pnext = w[1].get(ix, iy);
            let id = CMatrix::identity(p.nrows(), p.ncols());
            nesting = nesting.max(spectral_norm(&((id - pnext) * p)));
        }
    }

    let mut dz_residual = 0.0f64;
    let mut dzbar_residual = 0.0f64;
    for &(ix, iy) in &grid.interior(1) {
        for (j, pj) in projectors.iter().enumerate() {
            let p = pj.get(ix, iy);
            let id = CMatrix::identity(p.nrows(), p.ncols());
            if j + 1 < projectors.len() {
                let pnext = projectors[j + 1].get(ix, iy);
                dz_residual = dz_residual.max(spectral_norm(&((&id - pnext) * pj.dz(ix, iy) * p)));
            }
            dzbar_residual = dzbar_residual.max(spectral_norm(&((&id - p) * pj.dzbar(ix, iy) * p)));
        }
    }
    Ok(S1Structure {
        nesting,
        dz_residual,
        dzbar_residual,
    })
}

/// Max over the grid of the homomorphism defect
/// || Φ(λ1 λ2, z) - Φ(λ2, z) Φ(λ1, z) || on a samples x samples circle grid.
pub fn cocycle_defect_field(field: &LoopField, samples: usize) -> f64 {
    let pts = crate::linalg::unit_circle_points(samples);
    field
        .values
        .par_iter()
        .map(|l| {
            let evals: Vec<CMatrix> = pts.iter().map(|&p| l.eval(p)).collect();
            let mut worst = 0.0f64;
            for (i, &l1) in pts.iter().enumerate() {
                for (j, &l2) in pts.iter().enumerate() {
                    let lhs = l.eval(l1 * l2);
                    let rhs = &evals[j] * &evals[i];
                    worst = worst.max(spectral_norm(&(lhs - rhs)));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Rotation spectrum of an S^1-invariant loop field: eigenvalues of
/// H(z) = Σ_k k T_k(z), which must be integers, constant across the grid,
/// and sum to deg det. Returned in descending order.
pub fn spectrum_exponents(field: &LoopField) -> Result<Vec<i64>> {
    let per_point = |l: &MatrixLaurentPoly| -> Result<Vec<i64>> {
        let n = l.n();
        let mut h = CMatrix::zeros(n, n);
        for k in l.kmin()..=l.kmax() {
            h += l.coeff(k).map(|v| v * cplx(k as f64, 0.0));
        }
        let (vals, _, herm_defect) = crate::linalg::hermitian_eigen(&h);
        let mut max_err = herm_defect;
        let mut ints = Vec::with_capacity(n);
        for v in vals {
            let r = v.round();
            max_err = max_err.max((v - r).abs());
            ints.push(r as i64);
        }
        if max_err > 1e-6 {
            return Err(Error::SpectrumFit { max_err });
        }
        ints.sort_unstable_by(|a, b| b.cmp(a));
        Ok(ints)
    };
    let all = field
        .values
        .par_iter()
        .map(per_point)
        .collect::<Result<Vec<_>>>()?;
    let first = all[0].clone();
    if let Some(bad) = all.iter().position(|s| *s != first) {
        return Err(Error::Inconsistent(format!(
            "rotation spectrum changes across the grid: {:?} at point 0 vs {:?} at point {bad}",
            first, all[bad]
        )));
    }
    Ok(first)
}

/// The deformation families of a uniton field, one per grid point. The
/// filtration data is μ-independent, so a μ-sweep builds this once.
#[derive(Debug, Clone)]
pub struct FamilyField {
    grid: GridDomain,
    n: usize,
    families: Vec<DeformationFamily>,
}

/// One deformed slice of a family field.
#[derive(Debug, Clone)]
pub struct DeformedField {
    pub bundles: Vec<BundleField>,
    pub loops: LoopField,
    /// min over the grid of the scale-free Gram determinant at this μ.
    pub gram_rel_det_min: f64,
    /// max over the grid of the factor-product reconstruction error.
    pub factor_error: f64,
}

impl FamilyField {
    pub fn from_unitons(uf: &UnitonField) -> Result<Self> {
        let grid = uf.grid();
        let families = grid
            .points()
            .into_par_iter()
            .map(|(ix, iy)| {
                DeformationFamily::from_factors(uf.n(), &uf.factors_at(ix, iy)).map_err(|e| {
                    Error::Inconsistent(format!(
                        "no deformation family at z = {}: {e}",
                        grid.z(ix, iy)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FamilyField {
            grid,
            n: uf.n(),
            families,
        })
    }

    pub fn grid(&self) -> GridDomain {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, ix: usize, iy: usize) -> &DeformationFamily {
        &self.families[self.grid.idx(ix, iy)]
    }

    pub fn gram_rel_det_min(&self, mu: Complex64) -> f64 {
        self.families
            .par_iter()
            .map(|f| f.gram_rel_det(mu))
            .reduce(|| f64::INFINITY, f64::min)
    }

    /// Deforms every point and reassembles bundle and loop fields.
    pub fn deform(&self, mu: Complex64) -> Result<DeformedField> {
        let results = self
            .families
            .par_iter()
            .enumerate()
            .map(|(i, fam)| {
                let fact = fam.deform(mu).map_err(|e| {
                    let (ix, iy) = (i % self.grid.nx, i / self.grid.nx);
                    Error::Inconsistent(format!(
                        "deformation failed at z = {}: {e}",
                        self.grid.z(ix, iy)
                    ))
                })?;
                let err = fact.verify_product(fact.product(), 16);
                Ok((fact, err))
            })
            .collect::<Result<Vec<_>>>()?;
        let count = results[0].0.factors().len();
        if let Some(bad) = results.iter().position(|(f, _)| f.factors().len() != count) {
            return Err(Error::Inconsistent(format!(
                "deformed factor count changes across the grid: {count} at point 0 vs {} at point {bad}",
                results[bad].0.factors().len()
            )));
        }
        let mut bundles = Vec::with_capacity(count);
        for j in 0..count {
            let values = results
                .iter()
                .map(|(f, _)| f.factors()[j].clone())
                .collect();
            bundles.push(BundleField {
                grid: self.grid,
                values,
            });
        }
        let loops = LoopField {
            grid: self.grid,
            values: results.iter().map(|(f, _)| f.product().clone()).collect(),
        };
        let factor_error = results.iter().map(|&(_, e)| e).fold(0.0, f64::max);
        Ok(DeformedField {
            bundles,
            loops,
            gram_rel_det_min: self.gram_rel_det_min(mu),
            factor_error,
        })
    }
}
