//! Seeded random ensembles.
//!
//! All generation goes through `ChaCha8Rng::seed_from_u64`, so a given
//! [`RandomSpec`] reproduces the same matrix on every run of a build.
//! Parallel callers derive independent streams with [`substream_seed`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spectral::{schatten_norm, SchattenExponent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ensemble {
    /// i.i.d. `(x + iy)/sqrt(2)` with standard normal `x, y`.
    ComplexGaussian,
    RealGaussian,
    /// Complex Gaussian with the diagonal set to exactly zero.
    ZeroDiagonalComplexGaussian,
    /// `G*G` for a square complex Gaussian `G`.
    Psd,
    /// Complex Gaussian rescaled to unit Schatten norm.
    UnitSchatten(SchattenExponent),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    pub ensemble: Ensemble,
}

impl RandomSpec {
    pub fn new(seed: u64, ensemble: Ensemble) -> Self {
        Self { seed, ensemble }
    }

    /// The settings for stream `index` derived from this one.
    pub fn substream(&self, index: u64) -> Self {
        Self {
            seed: substream_seed(self.seed, index),
            ensemble: self.ensemble,
        }
    }
}

/// SplitMix64 finalizer over `(seed, index)`.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Draws a matrix with the given seed and ensemble.
pub fn random_matrix(spec: &RandomSpec, rows: usize, cols: usize) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidShape { rows, cols, len: 0 });
    }
    let needs_square = matches!(
        spec.ensemble,
        Ensemble::Psd | Ensemble::ZeroDiagonalComplexGaussian
    );
    if needs_square && rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let mut rng = rng_from_seed(spec.seed);
    let m = match spec.ensemble {
        Ensemble::ComplexGaussian => gaussian_matrix(&mut rng, rows, cols),
        Ensemble::RealGaussian => Matrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.sample(StandardNormal), 0.0)
        }),
        Ensemble::ZeroDiagonalComplexGaussian => Matrix::from_fn(rows, cols, |k, l| {
            let z = complex_normal(&mut rng);
            if k == l {
                Complex64::new(0.0, 0.0)
            } else {
                z
            }
        }),
        Ensemble::Psd => {
            let g = gaussian_matrix(&mut rng, rows, cols);
            let h = g.adjoint().matmul(&g)?;
            // Exact Hermitian symmetry; matmul rounding can break it.
            Matrix::from_fn(rows, rows, |k, l| {
                if k == l {
                    Complex64::new(h.get(k, k).re, 0.0)
                } else if k < l {
                    h.get(k, l)
                } else {
                    h.get(l, k).conj()
                }
            })
        }
        Ensemble::UnitSchatten(p) => {
            let g = gaussian_matrix(&mut rng, rows, cols);
            let norm = schatten_norm(&g, p)?;
            g.scale(1.0 / norm)
        }
    };
    Ok(m)
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian,
/// with the phases of `R`'s diagonal folded into `Q`.
pub fn random_unitary(seed: u64, n: usize) -> Matrix {
    let mut rng = rng_from_seed(seed);
    let g = gaussian_matrix(&mut rng, n, n).to_faer();
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let mut out = Matrix::from_faer(q.as_ref());
    let phases: Vec<Complex64> = (0..n)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                d / d.norm()
            }
        })
        .collect();
    let data = out.data_mut();
    for k in 0..n {
        for j in 0..n {
            data[k * n + j] *= phases[j];
        }
    }
    out
}
