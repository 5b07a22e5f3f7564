#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unitons::linalg::CMatrix;
use unitons::looppoly::{product_of_factors, MatrixLaurentPoly, Subspace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(
        rng.random::<f64>() * 2.0 - 1.0,
        rng.random::<f64>() * 2.0 - 1.0,
    )
}

pub fn unit_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
}

/// A uniformly random `dim`-dimensional subspace of C^n.
pub fn random_subspace(rng: &mut impl Rng, n: usize, dim: usize) -> Subspace {
    loop {
        let m = CMatrix::from_fn(n, dim, |_, _| random_complex(rng));
        if let Ok(s) = Subspace::from_columns(&m) {
            return s;
        }
    }
}

/// Random proper nonzero subspaces of C^n, one per factor.
pub fn random_factors(rng: &mut impl Rng, n: usize, m: usize) -> Vec<Subspace> {
    (0..m)
        .map(|_| {
            let dim = rng.random_range(1..n);
            random_subspace(rng, n, dim)
        })
        .collect()
}

/// A random product of `m` Blaschke-Potapov factors in U(n).
pub fn random_bp_product(rng: &mut impl Rng, n: usize, m: usize) -> MatrixLaurentPoly {
    product_of_factors(n, &random_factors(rng, n, m))
}
