//! Sign patterns and Rademacher averages of Schatten norms.
//!
//! Sign matrices are enumerated in a fixed order: bit `k * cols + l`
//! (little-endian) of the index selects the sign of entry `(k, l)`, with a
//! clear bit meaning `+1`. Index 0 is the all-ones pattern.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::norms::{
    z_norm_adjoint_power, z_norm_power, z_tilde_lower, z_tilde_upper, SolverOptions,
};
use crate::random::rng_from_seed;
use crate::spectral::{power_sum, singular_values, SchattenExponent};

/// Largest number of sign bits enumerated exhaustively.
pub const EXHAUSTIVE_MAX_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    rows: usize,
    cols: usize,
    negative: Vec<bool>,
}

impl SignPattern {
    /// The `index`-th `rows x cols` sign matrix.
    pub fn by_index(rows: usize, cols: usize, index: u64) -> Result<Self> {
        let bits = rows * cols;
        if bits == 0 {
            return Err(Error::InvalidShape { rows, cols, len: 0 });
        }
        if bits < 64 && index >> bits != 0 {
            return Err(Error::IndexOutOfRange {
                index,
                len: 1u64 << bits,
            });
        }
        let negative = (0..bits).map(|b| b < 64 && (index >> b) & 1 == 1).collect();
        Ok(Self {
            rows,
            cols,
            negative,
        })
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            rows,
            cols,
            negative: (0..rows * cols).map(|_| rng.random::<bool>()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `+1` or `-1` at 0-based `(k, l)`.
    pub fn sign(&self, k: usize, l: usize) -> f64 {
        if self.negative[k * self.cols + l] {
            -1.0
        } else {
            1.0
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |k, l| self.sign(k, l).into())
    }

    /// Schur product `R o A`; sign flips are exact.
    pub fn apply(&self, a: &Matrix) -> Result<Matrix> {
        if a.shape() != (self.rows, self.cols) {
            return Err(Error::DimensionMismatch {
                op: "sign pattern",
                left: (self.rows, self.cols),
                right: a.shape(),
            });
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |k, l| {
            if self.negative[k * self.cols + l] {
                -a.get(k, l)
            } else {
                a.get(k, l)
            }
        }))
    }
}

/// How to average over signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageReport {
    pub p: f64,
    pub mode: SamplingMode,
    pub samples: u64,
    /// `Ave ||sum eps_kl a_kl E_kl||_p^p`.
    pub mean_p_power: f64,
    /// `mean_p_power^{1/p}`.
    pub root: f64,
    /// Standard error of the mean; 0 in exhaustive mode.
    pub std_error: f64,
}

/// Sum of a sample after sorting, so any permutation of the sample gives
/// the same bits.
pub(crate) fn order_free_sum(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    values.iter().sum()
}

fn check_exponents(ps: &[f64]) -> Result<()> {
    for &p in ps {
        if let SchattenExponent::Infinity = SchattenExponent::new(p)? {
            return Err(Error::InvalidExponent {
                p,
                reason: "sign averages need a finite exponent",
            });
        }
    }
    Ok(())
}

/// Per-signing `||R o A||_p^p`, one vector per entry of `ps`.
fn signed_powers(a: &Matrix, ps: &[f64], sampling: Sampling) -> Result<Vec<Vec<f64>>> {
    check_exponents(ps)?;
    let (rows, cols) = a.shape();
    let patterns: Box<dyn Fn(u64) -> Result<SignPattern> + Sync> = match sampling {
        Sampling::Exhaustive => {
            let bits = rows * cols;
            if bits > EXHAUSTIVE_MAX_BITS {
                return Err(Error::TooLarge {
                    what: "sign bits for exhaustive averaging",
                    value: bits as u64,
                    max: EXHAUSTIVE_MAX_BITS as u64,
                });
            }
            Box::new(move |i| SignPattern::by_index(rows, cols, i))
        }
        Sampling::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::Precondition(
                    "Monte-Carlo needs at least one trial".into(),
                ));
            }
            let mut rng = rng_from_seed(seed);
            let drawn: Vec<SignPattern> = (0..trials)
                .map(|_| SignPattern::random(rows, cols, &mut rng))
                .collect();
            Box::new(move |i| Ok(drawn[i as usize].clone()))
        }
    };
    let count = match sampling {
        Sampling::Exhaustive => 1u64 << (rows * cols),
        Sampling::MonteCarlo { trials, .. } => trials as u64,
    };
    let per_signing: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let signed = patterns(i)?.apply(a)?;
            let s = singular_values(&signed)?;
            Ok(ps.iter().map(|&p| power_sum(&s, p)).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..ps.len())
        .map(|j| per_signing.iter().map(|v| v[j]).collect())
        .collect())
}

pub(crate) fn summarize(p: f64, sampling: Sampling, mut values: Vec<f64>) -> AverageReport {
    let n = values.len() as f64;
    let mean = match sampling {
        Sampling::Exhaustive => order_free_sum(&mut values) / n,
        Sampling::MonteCarlo { .. } => values.iter().sum::<f64>() / n,
    };
    let std_error = match sampling {
        Sampling::Exhaustive => 0.0,
        Sampling::MonteCarlo { .. } if values.len() > 1 => {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        }
        Sampling::MonteCarlo { .. } => 0.0,
    };
    AverageReport {
        p,
        mode: match sampling {
            Sampling::Exhaustive => SamplingMode::Exhaustive,
            Sampling::MonteCarlo { .. } => SamplingMode::MonteCarlo,
        },
        samples: values.len() as u64,
        mean_p_power: mean,
        root: mean.powf(1.0 / p),
        std_error,
    }
}

/// Rademacher average of `||A||_p^p` over independent entry signs.
pub fn rademacher_average(a: &Matrix, p: f64, sampling: Sampling) -> Result<AverageReport> {
    Ok(rademacher_averages(a, &[p], sampling)?.remove(0))
}

/// Same as [`rademacher_average`] for several exponents, sharing the
/// singular value computations.
pub fn rademacher_averages(
    a: &Matrix,
    ps: &[f64],
    sampling: Sampling,
) -> Result<Vec<AverageReport>> {
    let powers = signed_powers(a, ps, sampling)?;
    Ok(ps
        .iter()
        .zip(powers)
        .map(|(&p, v)| summarize(p, sampling, v))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fact2Record {
    pub p: f64,
    pub root: f64,
    pub z_tilde: f64,
    pub ratio: f64,
    /// `root - 2^{-1/p} z_tilde` for `p > 2`.
    pub easy_slack: Option<f64>,
    /// For `p < 2`: whether the decomposition solver converged, and its
    /// residual.
    pub solver_converged: Option<bool>,
    pub solver_residual: Option<f64>,
    pub std_error: f64,
}

/// Compares the sign average with the unconditional norm.
///
/// Only the direction `root >= 2^{-1/p} z_tilde` (p > 2) is enforced; a
/// violation is returned as [`Error::InvariantViolated`].
pub fn fact2_ratio(
    a: &Matrix,
    p: f64,
    sampling: Sampling,
    opts: &SolverOptions,
) -> Result<Fact2Record> {
    let report = rademacher_average(a, p, sampling)?;
    fact2_from_report(a, &report, opts)
}

pub(crate) fn fact2_from_report(
    a: &Matrix,
    report: &AverageReport,
    opts: &SolverOptions,
) -> Result<Fact2Record> {
    let p = report.p;
    let (z_tilde, easy_slack, solver_converged, solver_residual) = if p > 2.0 {
        let zt = z_tilde_upper(a, p)?;
        let slack = report.root - 2f64.powf(-1.0 / p) * zt;
        if slack < -1e-9 {
            return Err(Error::InvariantViolated(format!(
                "sign average root {} below 2^(-1/p) * z_tilde = {}",
                report.root,
                2f64.powf(-1.0 / p) * zt
            )));
        }
        (zt, Some(slack), None, None)
    } else if p < 2.0 {
        let d = z_tilde_lower(a, p, opts)?;
        (d.objective, None, Some(d.converged), Some(d.gradient_norm))
    } else {
        return Err(Error::InvalidExponent {
            p,
            reason: "the unconditional norm is not defined at p = 2",
        });
    };
    Ok(Fact2Record {
        p,
        root: report.root,
        z_tilde,
        ratio: if z_tilde > 0.0 {
            report.root / z_tilde
        } else {
            f64::NAN
        },
        easy_slack,
        solver_converged,
        solver_residual,
        std_error: report.std_error,
    })
}

/// `max(||A||_{Z_p}^p, ||A*||_{Z_p}^p)`: every signing dominates this.
pub fn signing_floor(a: &Matrix, p: f64) -> Result<f64> {
    Ok(z_norm_power(a, p)?.max(z_norm_adjoint_power(a, p)?))
}

/// `Ave_eps D_eps A A* D_eps` over all diagonal sign matrices `D_eps`.
///
/// The sign products `eps_k eps_l` are accumulated in integers over every
/// pattern, so the result is exact up to the single rounding of `A A*`.
pub fn diagonal_sign_average(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if n > EXHAUSTIVE_MAX_BITS {
        return Err(Error::TooLarge {
            what: "rows for diagonal sign averaging",
            value: n as u64,
            max: EXHAUSTIVE_MAX_BITS as u64,
        });
    }
    let gram = a.matmul(&a.adjoint())?;
    let total = 1i64 << n;
    let mut coeff = vec![0i64; n * n];
    for index in 0..total {
        let eps = |k: usize| if (index >> k) & 1 == 1 { -1i64 } else { 1 };
        for k in 0..n {
            for l in 0..n {
                coeff[k * n + l] += eps(k) * eps(l);
            }
        }
    }
    Ok(Matrix::from_fn(n, n, |k, l| {
        gram.get(k, l) * (coeff[k * n + l] as f64 / total as f64)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sign_pattern_indexing() {
        assert_eq!(
            SignPattern::by_index(1, 1, 0).unwrap().to_matrix(),
            Matrix::ones(1, 1)
        );
        assert_eq!(
            SignPattern::by_index(1, 1, 1).unwrap().to_matrix(),
            Matrix::ones(1, 1).scale(-1.0)
        );
        assert_eq!(
            SignPattern::by_index(2, 2, 0).unwrap().to_matrix(),
            Matrix::ones(2, 2)
        );
        assert_eq!(
            SignPattern::by_index(2, 2, 15).unwrap().to_matrix(),
            Matrix::ones(2, 2).scale(-1.0)
        );
        // bit 1 is entry (0, 1), bit 2 is entry (1, 0)
        let r = SignPattern::by_index(2, 2, 0b0110).unwrap();
        assert_eq!(
            (r.sign(0, 0), r.sign(0, 1), r.sign(1, 0), r.sign(1, 1)),
            (1.0, -1.0, -1.0, 1.0)
        );
        assert!(matches!(
            SignPattern::by_index(2, 2, 16),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn sign_patterns_are_distinct() {
        let all: std::collections::HashSet<Vec<bool>> = (0..64)
            .map(|i| SignPattern::by_index(2, 3, i).unwrap().negative)
            .collect();
        assert_eq!(all.len(), 64);
    }

    #[test]
    fn average_of_matrix_unit() {
        let r = rademacher_average(&Matrix::unit(2, 2, 0, 0), 4.0, Sampling::Exhaustive).unwrap();
        assert_eq!(r.samples, 16);
        assert_relative_eq!(r.root, 1.0, max_relative = 1e-15);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn average_of_all_ones() {
        let r = rademacher_average(&Matrix::ones(2, 2), 4.0, Sampling::Exhaustive).unwrap();
        assert_relative_eq!(r.mean_p_power, 12.0, max_relative = 1e-13);
        assert_relative_eq!(r.root, 1.861210, epsilon = 1e-6);
    }

    #[test]
    fn average_of_single_row() {
        let a = Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        let r = rademacher_average(&a, 3.0, Sampling::Exhaustive).unwrap();
        assert_relative_eq!(r.root, 2f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn exhaustive_cap() {
        let a = Matrix::ones(3, 7);
        assert!(matches!(
            rademacher_average(&a, 3.0, Sampling::Exhaustive),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = Matrix::from_real_rows(&[&[1.0, -2.0], &[0.5, 3.0]]).unwrap();
        let s = Sampling::MonteCarlo {
            trials: 200,
            seed: 11,
        };
        let r1 = rademacher_average(&a, 3.0, s).unwrap();
        let r2 = rademacher_average(&a, 3.0, s).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.std_error > 0.0);
        assert_eq!(r1.mode, SamplingMode::MonteCarlo);
    }

    #[test]
    fn fact2_examples() {
        let o = SolverOptions::default();
        let r = fact2_ratio(&Matrix::unit(2, 2, 0, 0), 4.0, Sampling::Exhaustive, &o).unwrap();
        assert_relative_eq!(r.ratio, 2f64.powf(-0.25), max_relative = 1e-14);
        assert_relative_eq!(r.ratio, 0.840896, epsilon = 1e-6);

        let r = fact2_ratio(&Matrix::ones(2, 2), 4.0, Sampling::Exhaustive, &o).unwrap();
        assert_relative_eq!(r.z_tilde, 2.0, max_relative = 1e-15);
        assert_relative_eq!(r.ratio, 12f64.powf(0.25) / 2.0, max_relative = 1e-13);
        assert_relative_eq!(r.ratio, 0.930605, epsilon = 1e-6);

        let r = fact2_ratio(&Matrix::identity(2), 4.0, Sampling::Exhaustive, &o).unwrap();
        assert_relative_eq!(r.root, 2f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(r.z_tilde, 4f64.powf(0.25), max_relative = 1e-15);
        assert_relative_eq!(r.ratio, 2f64.powf(-0.25), max_relative = 1e-15);
    }

    #[test]
    fn fact2_below_two_reports_solver() {
        let r = fact2_ratio(
            &Matrix::unit(2, 2, 0, 0),
            1.5,
            Sampling::Exhaustive,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(r.solver_converged, Some(true));
        assert!(r.easy_slack.is_none());
        assert!(fact2_ratio(
            &Matrix::identity(2),
            2.0,
            Sampling::Exhaustive,
            &SolverOptions::default()
        )
        .is_err());
    }

    #[test]
    fn diagonal_average_keeps_only_the_diagonal() {
        let a = Matrix::from_real_rows(&[&[1.0, 2.0, 0.0], &[3.0, -1.0, 4.0], &[0.5, 0.5, 0.5]])
            .unwrap();
        let avg = diagonal_sign_average(&a).unwrap();
        let sq_row: Vec<f64> = (0..3)
            .map(|k| a.row(k).iter().map(|z| z.norm_sqr()).sum())
            .collect();
        assert_eq!(sq_row, vec![5.0, 26.0, 0.75]);
        for (k, &sq) in sq_row.iter().enumerate() {
            for l in 0..3 {
                if k == l {
                    assert_eq!(avg.get(k, k).re, sq);
                } else {
                    assert_eq!(avg.get(k, l).norm(), 0.0);
                }
            }
        }
    }
}
