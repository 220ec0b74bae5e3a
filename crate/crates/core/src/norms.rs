//! Row-norm spaces and their unconditional variants.
//!
//! `||A||_{Z_p}` is the `l_p` norm of the vector of row `l_2` norms. For
//! `p > 2` the unconditional norm combines the row and column versions,
//! `(||A||_{Z_p}^p + ||A*||_{Z_p}^p)^{1/p}`; for `1 <= q < 2` it is the
//! infimal convolution `inf { (||B||_{Z_q}^q + ||C*||_{Z_q}^q)^{1/q} : A = B + C }`,
//! computed here by Douglas-Rachford splitting.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::spectral::schatten_power;

fn require_finite_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent {
            p,
            reason: "row-norm exponent must be finite and >= 1",
        });
    }
    Ok(())
}

/// `||A||_{Z_p}^p`, the sum of `p`-th powers of the row norms.
pub fn z_norm_power(a: &Matrix, p: f64) -> Result<f64> {
    require_finite_p(p)?;
    Ok((0..a.rows()).map(|k| a.row_norm(k).powf(p)).sum())
}

/// `||A||_{Z_p}`.
pub fn z_norm(a: &Matrix, p: f64) -> Result<f64> {
    Ok(z_norm_power(a, p)?.powf(1.0 / p))
}

/// `||A*||_{Z_p}^p`, the sum of `p`-th powers of the column norms.
pub fn z_norm_adjoint_power(a: &Matrix, p: f64) -> Result<f64> {
    require_finite_p(p)?;
    Ok((0..a.cols()).map(|l| a.col_norm(l).powf(p)).sum())
}

/// The unconditional norm for `p > 2`.
pub fn z_tilde_upper(a: &Matrix, p: f64) -> Result<f64> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::InvalidExponent {
            p,
            reason: "the row/column form needs 2 < p < infinity",
        });
    }
    Ok((z_norm_power(a, p)? + z_norm_adjoint_power(a, p)?).powf(1.0 / p))
}

/// The two Fact-style slacks `||A||_p - ||A||_{Z_p}` and
/// `2^{1/p} ||A||_p - z_tilde_upper(A, p)`, both nonnegative for `p > 2`.
pub fn fact1_slacks(a: &Matrix, p: f64) -> Result<(f64, f64)> {
    let zt = z_tilde_upper(a, p)?;
    let sp = schatten_power(a, p)?.powf(1.0 / p);
    Ok((sp - z_norm(a, p)?, 2f64.powf(1.0 / p) * sp - zt))
}

/// `RHS - LHS` of the uniform convexity inequality
/// `(1/2 (||x+y||_p^p + ||x-y||_p^p))^{1/p} <= (||x||_p^{p'} + ||y||_p^{p'})^{1/p'}`
/// with `p' = p/(p-1)`, valid for `p >= 2`.
pub fn clarkson_slack(x: &Matrix, y: &Matrix, p: f64) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidExponent {
            p,
            reason: "the uniform convexity inequality needs 2 <= p < infinity",
        });
    }
    let sum = x.add(y)?;
    let diff = x.sub(y)?;
    let lhs = (0.5 * (schatten_power(&sum, p)? + schatten_power(&diff, p)?)).powf(1.0 / p);
    let dual = p / (p - 1.0);
    let nx = schatten_power(x, p)?.powf(1.0 / p);
    let ny = schatten_power(y, p)?.powf(1.0 / p);
    let rhs = (nx.powf(dual) + ny.powf(dual)).powf(1.0 / dual);
    Ok(rhs - lhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance on both the objective decrease and the
    /// fixed-point residual.
    pub tol: f64,
    pub max_iters: usize,
    /// Group norms at or below this value are shrunk straight to zero.
    pub smoothing: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 100_000,
            smoothing: 1e-9,
        }
    }
}

/// A split `A = B + C` attaining `objective` for the `q < 2` norm.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub b: Matrix,
    pub c: Matrix,
    /// `(||B||_{Z_q}^q + ||C*||_{Z_q}^q)^{1/q}`; always an upper bound on the norm.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Splitting residual `||prox_h - prox_g||_F / ||A||_F` at exit; zero
    /// exactly at a minimizer.
    pub gradient_norm: f64,
}

/// `min_t gamma t^q + (t - r)^2 / 2` over `t >= 0`.
fn scalar_prox(r: f64, gamma: f64, q: f64, smoothing: f64) -> f64 {
    if r <= smoothing {
        return 0.0;
    }
    if q == 1.0 {
        return (r - gamma).max(0.0);
    }
    // Root of phi(t) = t + gamma q t^{q-1} - r on (0, r); phi is increasing.
    let phi = |t: f64| t + gamma * q * t.powf(q - 1.0) - r;
    let (mut lo, mut hi) = (0.0f64, r);
    let mut t = r / (1.0 + gamma * q * r.powf(q - 2.0));
    for _ in 0..200 {
        let f = phi(t);
        if f == 0.0 {
            return t;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let df = 1.0 + gamma * q * (q - 1.0) * t.powf(q - 2.0);
        let mut next = t - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * r {
            return next;
        }
        t = next;
    }
    t
}

/// Shrinks each row (or column) group of `z` by the prox of `gamma ||.||^q`.
fn group_prox(
    z: &[Complex64],
    rows: usize,
    cols: usize,
    by_rows: bool,
    gamma: f64,
    q: f64,
    smoothing: f64,
) -> Vec<Complex64> {
    let mut out = z.to_vec();
    let (groups, len) = if by_rows { (rows, cols) } else { (cols, rows) };
    let index = |g: usize, j: usize| if by_rows { g * cols + j } else { j * cols + g };
    for g in 0..groups {
        let r = (0..len)
            .map(|j| z[index(g, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let s = scalar_prox(r, gamma, q, smoothing);
        let factor = if r > 0.0 { s / r } else { 0.0 };
        for j in 0..len {
            out[index(g, j)] *= factor;
        }
    }
    out
}

fn group_power(z: &[Complex64], rows: usize, cols: usize, by_rows: bool, q: f64) -> f64 {
    let (groups, len) = if by_rows { (rows, cols) } else { (cols, rows) };
    let index = |g: usize, j: usize| if by_rows { g * cols + j } else { j * cols + g };
    (0..groups)
        .map(|g| {
            (0..len)
                .map(|j| z[index(g, j)].norm_sqr())
                .sum::<f64>()
                .sqrt()
                .powf(q)
        })
        .sum()
}

/// `||B||_{Z_q}^q + ||(A - B)*||_{Z_q}^q`.
fn split_objective(a: &[Complex64], b: &[Complex64], rows: usize, cols: usize, q: f64) -> f64 {
    let c: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    group_power(b, rows, cols, true, q) + group_power(&c, rows, cols, false, q)
}

/// Evaluates the `q < 2` objective for an explicit split `A = B + C`.
pub fn split_value(b: &Matrix, c: &Matrix, q: f64) -> Result<f64> {
    require_finite_p(q)?;
    Ok((z_norm_power(b, q)? + z_norm_adjoint_power(c, q)?).powf(1.0 / q))
}

/// The unconditional norm for `1 <= q < 2`, with the minimizing split.
///
/// Douglas-Rachford splitting on `g(B) = sum_k ||B_k.||^q` (rows) plus
/// `h(B) = sum_l ||(A - B)_.l||^q` (columns), started from `B = A/2`. Both
/// proxes are groupwise shrinkages. The step is scaled by the typical group
/// norm so that the iteration commutes with rescaling `A`.
pub fn z_tilde_lower(a: &Matrix, q: f64, opts: &SolverOptions) -> Result<Decomposition> {
    if !(1.0..2.0).contains(&q) {
        return Err(Error::InvalidExponent {
            p: q,
            reason: "the decomposition norm needs 1 <= q < 2",
        });
    }
    let (rows, cols) = a.shape();
    let a_norm = a.frobenius();
    if a_norm == 0.0 {
        return Ok(Decomposition {
            b: Matrix::zeros(rows, cols),
            c: Matrix::zeros(rows, cols),
            objective: 0.0,
            iterations: 0,
            converged: true,
            gradient_norm: 0.0,
        });
    }
    let av = a.entries();
    let scale = a_norm / (rows.max(cols) as f64).sqrt();
    let gamma = scale.powf(2.0 - q);
    let smoothing = opts.smoothing * scale;

    let mut z: Vec<Complex64> = av.iter().map(|x| x * 0.5).collect();
    let mut best_b = z.clone();
    let mut best_f = split_objective(av, &best_b, rows, cols, q);
    let mut prev_f = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let b = group_prox(&z, rows, cols, true, gamma, q, smoothing);
        // prox of h at x is A - colprox(A - x).
        let reflected: Vec<Complex64> = av
            .iter()
            .zip(b.iter().zip(&z))
            .map(|(a, (b, z))| a - (2.0 * b - z))
            .collect();
        let shrunk = group_prox(&reflected, rows, cols, false, gamma, q, smoothing);
        let w: Vec<Complex64> = av.iter().zip(&shrunk).map(|(a, s)| a - s).collect();

        let mut diff = 0.0;
        for ((zi, wi), bi) in z.iter_mut().zip(&w).zip(&b) {
            let d = wi - bi;
            diff += d.norm_sqr();
            *zi += d;
        }
        residual = diff.sqrt() / a_norm;

        let f = split_objective(av, &b, rows, cols, q);
        if f < best_f {
            best_f = f;
            best_b = b;
        }
        let decrease = (prev_f - f).abs();
        prev_f = f;
        if residual <= opts.tol && decrease <= opts.tol * f.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let b = Matrix::new(rows, cols, best_b)?;
    let c = a.sub(&b)?;
    Ok(Decomposition {
        objective: best_f.powf(1.0 / q),
        b,
        c,
        iterations,
        converged,
        gradient_norm: residual,
    })
}
