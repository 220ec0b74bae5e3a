//! Singular values, Hermitian spectra and the Schatten norms built on them.
//!
//! Decompositions are delegated to `faer`. Diagonal inputs take an exact
//! shortcut (the singular values are the sorted moduli of the diagonal), so
//! signed identities and matrix units produce exact norms.

use faer::Side;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default relative threshold for [`numeric_rank`].
pub const DEFAULT_RANK_RTOL: f64 = 1e-9;

/// Absolute tolerance on the smallest eigenvalue accepted as "PSD".
pub const PSD_TOL: f64 = 1e-10;

/// The exponent of a Schatten norm: a real `p >= 1` or the operator norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenExponent {
    Finite(f64),
    Infinity,
}

impl SchattenExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::InvalidExponent {
                p,
                reason: "Schatten exponent must satisfy p >= 1",
            })
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Infinity => f64::INFINITY,
        }
    }
}

/// Singular values in nonincreasing order, `min(rows, cols)` of them.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    if a.is_diagonal() {
        let mut s: Vec<f64> = (0..a.rows().min(a.cols()))
            .map(|i| a.get(i, i).norm())
            .collect();
        s.sort_by(|x, y| y.total_cmp(x));
        return Ok(s);
    }
    // Zero rows and columns only contribute zero singular values; dropping
    // them makes zero padding exactly norm-neutral.
    let zero = Complex64::new(0.0, 0.0);
    let rows: Vec<usize> = (0..a.rows())
        .filter(|&k| a.row(k).iter().any(|&z| z != zero))
        .collect();
    let cols: Vec<usize> = (0..a.cols())
        .filter(|&l| (0..a.rows()).any(|k| a.get(k, l) != zero))
        .collect();
    if rows.len() < a.rows() || cols.len() < a.cols() {
        let mut s = singular_values(&a.select(&rows, &cols))?;
        s.resize(a.rows().min(a.cols()), 0.0);
        return Ok(s);
    }
    let mut s = a
        .to_faer()
        .singular_values()
        .map_err(|_| Error::Decomposition("SVD did not converge"))?;
    for x in &mut s {
        *x = x.max(0.0);
    }
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// `sum_i s_i^p` for finite `p > 0` (no range check on `p`).
pub(crate) fn power_sum(s: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        s.iter().map(|x| x * x).sum()
    } else {
        s.iter().map(|x| x.powf(p)).sum()
    }
}

/// `||A||_p^p = Tr((A*A)^{p/2})` for finite `p >= 1`.
pub fn schatten_power(a: &Matrix, p: f64) -> Result<f64> {
    let exp = SchattenExponent::new(p)?;
    if exp == SchattenExponent::Infinity {
        return Err(Error::InvalidExponent {
            p,
            reason: "the p-th power needs a finite exponent",
        });
    }
    if p == 2.0 {
        return Ok(a.entries().iter().map(|z| z.norm_sqr()).sum());
    }
    Ok(power_sum(&singular_values(a)?, p))
}

/// Schatten p-norm; the largest singular value for `p = infinity`.
pub fn schatten_norm(a: &Matrix, p: SchattenExponent) -> Result<f64> {
    match p {
        SchattenExponent::Infinity => Ok(singular_values(a)?.first().copied().unwrap_or(0.0)),
        SchattenExponent::Finite(p) => Ok(schatten_power(a, p)?.powf(1.0 / p)),
    }
}

/// Convenience wrapper taking a raw exponent (`f64::INFINITY` allowed).
pub fn schatten(a: &Matrix, p: f64) -> Result<f64> {
    schatten_norm(a, SchattenExponent::new(p)?)
}

/// Operator norm.
pub fn operator_norm(a: &Matrix) -> Result<f64> {
    schatten_norm(a, SchattenExponent::Infinity)
}

fn require_square(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(())
}

/// Eigenvalues of the Hermitian part of `a`, nondecreasing.
pub fn hermitian_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    require_square(a)?;
    if a.is_diagonal() {
        let mut ev: Vec<f64> = (0..a.rows()).map(|i| a.get(i, i).re).collect();
        ev.sort_by(|x, y| x.total_cmp(y));
        return Ok(ev);
    }
    let n = a.rows();
    let h = faer::Mat::from_fn(n, n, |k, l| (a.get(k, l) + a.get(l, k).conj()) * 0.5);
    let mut ev = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Decomposition("Hermitian eigensolver did not converge"))?;
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// Eigenvalues of a Hermitian PSD matrix, ascending.
///
/// Values in `[-PSD_TOL, 0)` and values below the eigensolver's backward
/// error `n eps lambda_max` are set to 0, so fractional trace powers of
/// rank-deficient inputs do not pick up rounding noise.
pub fn psd_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    require_square(a)?;
    let scale = a.max_abs().max(1.0);
    let n = a.rows();
    let mut asym = 0.0f64;
    for k in 0..n {
        for l in k..n {
            asym = asym.max((a.get(k, l) - a.get(l, k).conj()).norm());
        }
    }
    if asym > PSD_TOL * scale {
        return Err(Error::NotPsd { defect: asym });
    }
    let mut ev = hermitian_eigenvalues(a)?;
    if let Some(&min) = ev.first() {
        if min < -PSD_TOL {
            return Err(Error::NotPsd { defect: -min });
        }
    }
    let top = ev.last().copied().unwrap_or(0.0).max(0.0);
    let floor = n as f64 * f64::EPSILON * top;
    for x in &mut ev {
        if *x <= floor {
            *x = 0.0;
        }
    }
    Ok(ev)
}

/// `Tr(A^s) = sum_i lambda_i^s` for Hermitian PSD `A` and `s > 0`.
pub fn psd_trace_power(a: &Matrix, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidExponent {
            p: s,
            reason: "trace power needs a finite s > 0",
        });
    }
    Ok(power_sum(&psd_eigenvalues(a)?, s))
}

/// Number of singular values exceeding `rtol` times the largest one.
pub fn numeric_rank(a: &Matrix, rtol: f64) -> Result<usize> {
    if !(rtol > 0.0 && rtol < 1.0) {
        return Err(Error::Precondition(format!(
            "rank tolerance must lie in (0, 1), got {rtol}"
        )));
    }
    let s = singular_values(a)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rtol * top).count())
}
