//! The block-diagonal sign construction and its projection.
//!
//! For an `n x n` matrix `A`, `overline(A)` is the block-diagonal matrix
//! whose `i`-th block is `R_i o A`, `R_i` running over all `2^{n^2}` sign
//! matrices in the canonical order of [`SignPattern::by_index`]. `phi`
//! averages the signed central blocks of a large matrix back to `n x n`, and
//! `q_project = overline o phi` is an idempotent, self-adjoint projection
//! onto the range of `overline`.
//!
//! Schatten norms of block diagonals are computed blockwise; the dense
//! matrix is only assembled on request.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::norms::z_norm;
use crate::random::{gaussian_matrix, rng_from_seed, substream_seed};
use crate::randomized::SignPattern;
use crate::spectral::{schatten_norm, schatten_power, singular_values, SchattenExponent};

/// Largest block size accepted by [`overline`] (`2^16` blocks).
pub const MAX_OVERLINE_N: usize = 4;

/// Largest block size for operations that need dense `n 2^{n^2}` matrices.
pub const MAX_DENSE_N: usize = 3;

/// An ordered list of equally sized square blocks, standing for the
/// block-diagonal matrix with those blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockDiagJson")]
pub struct BlockDiag {
    n: usize,
    blocks: Vec<Matrix>,
}

#[derive(Deserialize)]
struct BlockDiagJson {
    n: usize,
    blocks: Vec<Matrix>,
}

impl TryFrom<BlockDiagJson> for BlockDiag {
    type Error = Error;
    fn try_from(raw: BlockDiagJson) -> Result<Self> {
        BlockDiag::new(raw.n, raw.blocks)
    }
}

impl BlockDiag {
    pub fn new(n: usize, blocks: Vec<Matrix>) -> Result<Self> {
        if n == 0 || blocks.is_empty() {
            return Err(Error::Precondition(
                "a block diagonal needs at least one nonempty block".into(),
            ));
        }
        if let Some(b) = blocks.iter().find(|b| b.shape() != (n, n)) {
            return Err(Error::DimensionMismatch {
                op: "block diagonal",
                left: (n, n),
                right: b.shape(),
            });
        }
        Ok(Self { n, blocks })
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.n * self.blocks.len()
    }

    /// The dense block-diagonal matrix.
    pub fn assemble(&self) -> Matrix {
        let n = self.n;
        Matrix::from_fn(self.dimension(), self.dimension(), |k, l| {
            if k / n == l / n {
                self.blocks[k / n].get(k % n, l % n)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn max_abs_diff(&self, other: &BlockDiag) -> Result<f64> {
        if self.n != other.n || self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                op: "block diagonal difference",
                left: (self.n, self.len()),
                right: (other.n, other.len()),
            });
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .try_fold(0.0f64, |acc, (a, b)| Ok(acc.max(a.max_abs_diff(b)?)))
    }
}

fn sign_block_count(n: usize) -> usize {
    1usize << (n * n)
}

/// The `2^{n^2}` blocks `R_i o A`.
pub fn overline(a: &Matrix) -> Result<BlockDiag> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > MAX_OVERLINE_N {
        return Err(Error::TooLarge {
            what: "block size for the sign construction",
            value: n as u64,
            max: MAX_OVERLINE_N as u64,
        });
    }
    let blocks = (0..sign_block_count(n) as u64)
        .map(|i| SignPattern::by_index(n, n, i)?.apply(a))
        .collect::<Result<Vec<_>>>()?;
    BlockDiag::new(n, blocks)
}

/// `sum_i ||block_i||_p^p` for finite `p`.
pub fn blockdiag_schatten_power(d: &BlockDiag, p: f64) -> Result<f64> {
    let mut parts = d
        .blocks
        .par_iter()
        .map(|b| schatten_power(b, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::randomized::order_free_sum(&mut parts))
}

/// Schatten norm of the block-diagonal matrix, computed blockwise.
pub fn blockdiag_schatten_norm(d: &BlockDiag, p: SchattenExponent) -> Result<f64> {
    match p {
        SchattenExponent::Infinity => d
            .blocks
            .par_iter()
            .map(|b| schatten_norm(b, p))
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max)),
        SchattenExponent::Finite(p) => Ok(blockdiag_schatten_power(d, p)?.powf(1.0 / p)),
    }
}

/// The diagonal `n x n` blocks of a square matrix whose size is a multiple of `n`.
pub fn extract_central_blocks(b: &Matrix, n: usize) -> Result<BlockDiag> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    if n == 0 || !b.rows().is_multiple_of(n) {
        return Err(Error::Precondition(format!(
            "dimension {} is not divisible by block size {n}",
            b.rows()
        )));
    }
    let blocks = (0..b.rows() / n)
        .map(|i| Matrix::from_fn(n, n, |k, l| b.get(k + i * n, l + i * n)))
        .collect();
    BlockDiag::new(n, blocks)
}

fn require_sign_block_count(d: &BlockDiag) -> Result<()> {
    let n = d.n;
    if n > MAX_OVERLINE_N || d.len() != sign_block_count(n) {
        return Err(Error::Precondition(format!(
            "expected 2^(n^2) = 2^{} blocks of size {n}, got {}",
            n * n,
            d.len()
        )));
    }
    Ok(())
}

/// `2^{-n^2} sum_i R_i o block_i`.
///
/// The sum is taken pairwise over a power-of-two count, so identical
/// summands (as in `phi(overline(A))`) are reproduced exactly.
pub fn phi(d: &BlockDiag) -> Result<Matrix> {
    require_sign_block_count(d)?;
    let n = d.n;
    let signed = (0..d.len())
        .map(|i| SignPattern::by_index(n, n, i as u64)?.apply(&d.blocks[i]))
        .collect::<Result<Vec<_>>>()?;
    fn pairwise(parts: &[Matrix]) -> Matrix {
        if parts.len() == 1 {
            return parts[0].clone();
        }
        let (lo, hi) = parts.split_at(parts.len() / 2);
        pairwise(lo)
            .add(&pairwise(hi))
            .expect("blocks share a shape")
    }
    Ok(pairwise(&signed).scale(1.0 / d.len() as f64))
}

/// `overline(phi(D))`.
pub fn q_project(d: &BlockDiag) -> Result<BlockDiag> {
    overline(&phi(d)?)
}

/// `||B||_p - 2^{n^2/p} ||phi(central blocks of B)||_{Z_p}`, nonnegative for `p > 2`.
pub fn verify_eq_zp(b: &Matrix, n: usize, p: f64) -> Result<f64> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::InvalidExponent {
            p,
            reason: "the row-norm projection bound is stated for 2 < p < infinity",
        });
    }
    if n == 0 || n > MAX_DENSE_N {
        return Err(Error::TooLarge {
            what: "block size for a dense projection check",
            value: n as u64,
            max: MAX_DENSE_N as u64,
        });
    }
    let dim = n * sign_block_count(n);
    if b.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            op: "verify_eq_zp",
            left: (dim, dim),
            right: b.shape(),
        });
    }
    let averaged = phi(&extract_central_blocks(b, n)?)?;
    let rhs = 2f64.powf((n * n) as f64 / p) * z_norm(&averaged, p)?;
    let lhs = schatten_power(b, p)?.powf(1.0 / p);
    Ok(lhs - rhs)
}

/// `||Q(B)||_p / ||B||_p` for block-diagonal `B`.
pub fn q_ratio_blockdiag(d: &BlockDiag, p: f64) -> Result<f64> {
    let den = blockdiag_schatten_power(d, p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    let num = blockdiag_schatten_power(&q_project(d)?, p)?;
    Ok((num / den).powf(1.0 / p))
}

/// `||Q(B)||_p / ||B||_p` for a dense `B` of size `n 2^{n^2}`.
pub fn q_ratio_dense(b: &Matrix, n: usize, p: f64) -> Result<f64> {
    let den = schatten_power(b, p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    let num = blockdiag_schatten_power(&q_project(&extract_central_blocks(b, n)?)?, p)?;
    Ok((num / den).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    /// `overline(A)` for Gaussian `A`; a fixed point of `Q`.
    FixedPoint,
    Dense,
    BlockDiagonal,
    /// Sign-structured blocks `R_i o X_i` with a shared row profile.
    SignedRows,
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QNormEstimate {
    pub n: usize,
    pub p: f64,
    /// Largest ratio `||Q(B)||_p / ||B||_p` found; a lower bound on `||Q||`.
    pub lower_bound: f64,
    /// Seed of the candidate (or ascent step) that attained the bound.
    pub argmax_seed: u64,
    pub argmax_kind: CandidateKind,
    pub evaluations: usize,
}

/// Lower bound on the norm of `Q` on `C_p^{n 2^{n^2}}` by sampling.
///
/// Candidates: a fixed point of `Q` (ratio 1), dense Gaussian `B` (only for
/// `n <= 2`), Gaussian block diagonals, sign-structured block diagonals, then
/// `trials` steps of random-perturbation ascent from the best block diagonal.
/// For `n = 3` dense candidates are skipped: pinching a dense `B` to its
/// diagonal blocks leaves `Q(B)` unchanged and does not increase `||B||_p`,
/// so block diagonals dominate.
pub fn estimate_q_norm(n: usize, p: f64, trials: usize, seed: u64) -> Result<QNormEstimate> {
    SchattenExponent::new(p)?;
    if !p.is_finite() {
        return Err(Error::InvalidExponent {
            p,
            reason: "the projection norm sampler needs finite p",
        });
    }
    if n == 0 || n > MAX_DENSE_N {
        return Err(Error::TooLarge {
            what: "block size for the projection norm sampler",
            value: n as u64,
            max: MAX_DENSE_N as u64,
        });
    }
    let count = sign_block_count(n);
    let mut best = (f64::NEG_INFINITY, 0u64, CandidateKind::FixedPoint);
    // Best block-diagonal candidate, the starting point of the ascent.
    let mut start: Option<(f64, BlockDiag)> = None;
    let mut evaluations = 0usize;
    let mut record = |ratio: f64, s: u64, kind: CandidateKind, blocks: Option<BlockDiag>| {
        if ratio > best.0 {
            best = (ratio, s, kind);
        }
        if let Some(d) = blocks {
            if start.as_ref().is_none_or(|(r, _)| ratio > *r) {
                start = Some((ratio, d));
            }
        }
    };

    let s0 = substream_seed(seed, 0);
    let witness = overline(&gaussian_matrix(&mut rng_from_seed(s0), n, n))?;
    evaluations += 1;
    record(
        q_ratio_blockdiag(&witness, p)?,
        s0,
        CandidateKind::FixedPoint,
        Some(witness),
    );

    for t in 0..trials as u64 {
        let s = substream_seed(seed, t + 1);
        let mut rng = rng_from_seed(s);
        let kind = match t % 3 {
            0 if n <= 2 => CandidateKind::Dense,
            0 | 1 => CandidateKind::BlockDiagonal,
            _ => CandidateKind::SignedRows,
        };
        evaluations += 1;
        match kind {
            CandidateKind::Dense => {
                let dim = n * count;
                let b = gaussian_matrix(&mut rng, dim, dim);
                record(q_ratio_dense(&b, n, p)?, s, kind, None);
            }
            CandidateKind::BlockDiagonal => {
                let d = BlockDiag::new(
                    n,
                    (0..count)
                        .map(|_| gaussian_matrix(&mut rng, n, n))
                        .collect(),
                )?;
                record(q_ratio_blockdiag(&d, p)?, s, kind, Some(d));
            }
            _ => {
                // Each block keeps one signed row of X, so the rows of
                // phi(B) add up coherently while B stays thin.
                let x = gaussian_matrix(&mut rng, n, n);
                let blocks = (0..count)
                    .map(|i| {
                        let row = rng.random_range(0..n);
                        let keep = Matrix::from_fn(n, n, |k, l| {
                            if k == row {
                                x.get(k, l)
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        });
                        SignPattern::by_index(n, n, i as u64)?.apply(&keep)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let d = BlockDiag::new(n, blocks)?;
                record(q_ratio_blockdiag(&d, p)?, s, kind, Some(d));
            }
        }
    }

    // Perturbation ascent from the best block-diagonal candidate.
    if let Some((mut current_ratio, mut current)) = start {
        let mut step = 0.5;
        let mut failures = 0;
        for t in 0..trials as u64 {
            let s = substream_seed(seed ^ 0xA5A5_A5A5_A5A5_A5A5, t);
            let mut rng = rng_from_seed(s);
            let blocks = current
                .blocks
                .iter()
                .map(|b| {
                    if rng.random_bool(0.25) {
                        let scale = step * b.frobenius().max(1e-3) / n as f64;
                        b.add(&gaussian_matrix(&mut rng, n, n).scale(scale))
                    } else {
                        Ok(b.clone())
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let cand = BlockDiag::new(n, blocks)?;
            let r = q_ratio_blockdiag(&cand, p)?;
            evaluations += 1;
            if r > current_ratio {
                current = cand;
                current_ratio = r;
                failures = 0;
                if r > best.0 {
                    best = (r, s, CandidateKind::Ascent);
                }
            } else {
                failures += 1;
                if failures >= 10 {
                    step *= 0.5;
                    failures = 0;
                }
            }
        }
    }

    Ok(QNormEstimate {
        n,
        p,
        lower_bound: best.0,
        argmax_seed: best.1,
        argmax_kind: best.2,
        evaluations,
    })
}

/// Singular values of every block, concatenated in block order.
pub fn blockdiag_singular_values(d: &BlockDiag) -> Result<Vec<f64>> {
    let per = d
        .blocks
        .par_iter()
        .map(singular_values)
        .collect::<Result<Vec<_>>>()?;
    Ok(per.into_iter().flatten().collect())
}
