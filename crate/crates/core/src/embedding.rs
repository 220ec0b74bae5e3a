//! Rank lower bounds for matrices spanning a copy of `l_p^k`.
//!
//! For `T_1..T_k` in `C_p^n` with `Ave ||sum eps_i T_i||_p^p` comparable to
//! `k`, the Gram sum `sum T_i* T_i` has rank at least `K^{-2/|p-2|} k`. The
//! functions here evaluate every quantity in that chain: the sign average,
//! the easy direction of the Khintchine inequality, and the trace/rank
//! bound for positive matrices.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::random::{random_matrix, rng_from_seed, Ensemble, RandomSpec};
use crate::randomized::{summarize, AverageReport, Sampling, EXHAUSTIVE_MAX_BITS};
use crate::spectral::{
    power_sum, psd_eigenvalues, psd_trace_power, schatten_power, singular_values, DEFAULT_RANK_RTOL,
};

/// Absolute slack used for every trace and rank comparison.
pub const TRACE_TOL: f64 = 1e-9;

/// A family `T_1..T_k` of `n x n` matrices together with the exponent and,
/// optionally, a fixed constant `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct EmbeddingInstance {
    ts: Vec<Matrix>,
    pub p: f64,
    /// `K` of the theorem. When absent it is computed from the sign average.
    pub constant: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    p: f64,
    #[serde(rename = "Ts")]
    ts: Vec<Matrix>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    constant: Option<f64>,
}

impl TryFrom<InstanceJson> for EmbeddingInstance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        EmbeddingInstance::new(raw.ts, raw.p, raw.constant)
    }
}

impl From<EmbeddingInstance> for InstanceJson {
    fn from(inst: EmbeddingInstance) -> Self {
        InstanceJson {
            p: inst.p,
            ts: inst.ts,
            constant: inst.constant,
        }
    }
}

impl EmbeddingInstance {
    pub fn new(ts: Vec<Matrix>, p: f64, constant: Option<f64>) -> Result<Self> {
        square_family(&ts)?;
        if let Some(k) = constant {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Precondition(format!(
                    "the constant K must be positive and finite, got {k}"
                )));
            }
        }
        Ok(Self { ts, p, constant })
    }

    pub fn ts(&self) -> &[Matrix] {
        &self.ts
    }

    pub fn k(&self) -> usize {
        self.ts.len()
    }

    pub fn n(&self) -> usize {
        self.ts[0].rows()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Outcome of a rank bound. `constant` is `K` for `p > 2` and `c` for `p < 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankBoundReport {
    pub k: usize,
    pub n: usize,
    /// Numeric rank of `sum A_i`.
    pub d: usize,
    pub p: f64,
    pub constant: f64,
    pub bound: f64,
    /// The nonzero eigenvalues of `sum A_i`, largest first.
    pub eigenvalues: Vec<f64>,
    pub holds: bool,
}

/// The full chain for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremAudit {
    /// `Ave ||sum eps_i T_i||_p^p` over all `2^k` signs.
    pub average: f64,
    /// The theorem's `K` (so `c = 1/K` when `p < 2`).
    pub k_constant: f64,
    pub easy_slack: f64,
    /// `n >= bound - TRACE_TOL`.
    pub dimension_holds: bool,
    pub rank: RankBoundReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantMode {
    /// `Tr(sum A_i)^{p/2} / k`.
    FromData,
    Supplied(f64),
}

fn square_family(ms: &[Matrix]) -> Result<usize> {
    let first = ms
        .first()
        .ok_or_else(|| Error::Precondition("need at least one matrix".into()))?;
    if !first.is_square() {
        return Err(Error::NotSquare {
            rows: first.rows(),
            cols: first.cols(),
        });
    }
    for m in ms {
        if m.shape() != first.shape() {
            return Err(Error::DimensionMismatch {
                op: "matrix family",
                left: first.shape(),
                right: m.shape(),
            });
        }
    }
    Ok(first.rows())
}

fn require_bound_exponent(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidExponent {
            p,
            reason: "rank bounds need a finite p > 0",
        });
    }
    if p == 2.0 {
        return Err(Error::InvalidExponent {
            p,
            reason: "rank bounds are undefined at p = 2",
        });
    }
    Ok(())
}

fn require_norm_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent {
            p,
            reason: "sign averages need a finite p >= 1",
        });
    }
    Ok(())
}

fn signed_sum(ts: &[Matrix], negative: impl Fn(usize) -> bool) -> Matrix {
    let n = ts[0].rows();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, t) in ts.iter().enumerate() {
        let s = if negative(i) { -1.0 } else { 1.0 };
        for (d, x) in data.iter_mut().zip(t.entries()) {
            *d += s * x;
        }
    }
    Matrix::new(n, n, data).expect("sum of finite matrices")
}

/// Sum of PSD matrices, with the Hermitian symmetry restored exactly.
fn hermitian_sum(ms: &[Matrix]) -> Matrix {
    let n = ms[0].rows();
    let raw = ms
        .iter()
        .skip(1)
        .fold(ms[0].clone(), |acc, m| acc.add(m).expect("equal shapes"));
    Matrix::from_fn(n, n, |k, l| {
        if k == l {
            Complex64::new(raw.get(k, k).re, 0.0)
        } else if k < l {
            0.5 * (raw.get(k, l) + raw.get(l, k).conj())
        } else {
            0.5 * (raw.get(l, k) + raw.get(k, l).conj()).conj()
        }
    })
}

/// `sum_i T_i* T_i`.
pub fn gram_sum(ts: &[Matrix]) -> Result<Matrix> {
    square_family(ts)?;
    let grams: Vec<Matrix> = ts
        .iter()
        .map(|t| t.adjoint().matmul(t))
        .collect::<Result<_>>()?;
    Ok(hermitian_sum(&grams))
}

/// `Ave_eps ||sum eps_i T_i||_p^p`.
pub fn sign_average_sum(ts: &[Matrix], p: f64, sampling: Sampling) -> Result<AverageReport> {
    square_family(ts)?;
    require_norm_exponent(p)?;
    let k = ts.len();
    let values: Vec<f64> = match sampling {
        Sampling::Exhaustive => {
            if k > EXHAUSTIVE_MAX_BITS {
                return Err(Error::TooLarge {
                    what: "matrices for exhaustive sign averaging",
                    value: k as u64,
                    max: EXHAUSTIVE_MAX_BITS as u64,
                });
            }
            (0..1u64 << k)
                .into_par_iter()
                .map(|bits| {
                    let s = signed_sum(ts, |i| bits >> i & 1 == 1);
                    Ok(power_sum(&singular_values(&s)?, p))
                })
                .collect::<Result<_>>()?
        }
        Sampling::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::Precondition(
                    "Monte-Carlo needs at least one trial".into(),
                ));
            }
            let mut rng = rng_from_seed(seed);
            let draws: Vec<Vec<bool>> = (0..trials)
                .map(|_| (0..k).map(|_| rng.random::<bool>()).collect())
                .collect();
            draws
                .par_iter()
                .map(|neg| {
                    let s = signed_sum(ts, |i| neg[i]);
                    Ok(power_sum(&singular_values(&s)?, p))
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(summarize(p, sampling, values))
}

/// The easy direction of the Khintchine inequality, as a slack that is
/// nonnegative when it holds: `Ave - Tr(sum T_i*T_i)^{p/2}` for `p > 2`
/// and the reverse for `p < 2`.
pub fn easy_khintchine_slack(ts: &[Matrix], p: f64) -> Result<f64> {
    require_norm_exponent(p)?;
    if p == 2.0 {
        return Err(Error::InvalidExponent {
            p,
            reason: "both sides coincide at p = 2",
        });
    }
    let ave = sign_average_sum(ts, p, Sampling::Exhaustive)?.mean_p_power;
    let trace = psd_trace_power(&gram_sum(ts)?, p / 2.0)?;
    Ok(if p > 2.0 { ave - trace } else { trace - ave })
}

/// Nonzero eigenvalues of a PSD matrix above the rank threshold, largest first.
fn nonzero_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    let mut ev = psd_eigenvalues(s)?;
    ev.reverse();
    let top = ev.first().copied().unwrap_or(0.0);
    ev.retain(|&x| top > 0.0 && x > DEFAULT_RANK_RTOL * top);
    Ok(ev)
}

/// Rank bound for positive matrices `A_1..A_k` with `Tr A_i^{p/2} >= 1`
/// (`p > 2`) or `<= 1` (`p < 2`).
pub fn claim_rank_bound(as_: &[Matrix], p: f64, mode: ConstantMode) -> Result<RankBoundReport> {
    require_bound_exponent(p)?;
    let n = square_family(as_)?;
    let k = as_.len();
    for (i, a) in as_.iter().enumerate() {
        let t = psd_trace_power(a, p / 2.0)?;
        if p > 2.0 && t < 1.0 - TRACE_TOL {
            return Err(Error::Precondition(format!(
                "Tr A_{i}^(p/2) = {t} is below 1"
            )));
        }
        if p < 2.0 && t > 1.0 + TRACE_TOL {
            return Err(Error::Precondition(format!(
                "Tr A_{i}^(p/2) = {t} exceeds 1"
            )));
        }
    }
    let s = hermitian_sum(as_);
    let total = psd_trace_power(&s, p / 2.0)?;
    let kf = k as f64;
    let constant = match mode {
        ConstantMode::FromData => total / kf,
        ConstantMode::Supplied(c) => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Precondition(format!(
                    "the constant must be positive and finite, got {c}"
                )));
            }
            if p > 2.0 && total > c * kf * (1.0 + TRACE_TOL) {
                return Err(Error::Precondition(format!(
                    "Tr(sum A_i)^(p/2) = {total} exceeds K k = {}",
                    c * kf
                )));
            }
            if p < 2.0 && total < c * kf * (1.0 - TRACE_TOL) {
                return Err(Error::Precondition(format!(
                    "Tr(sum A_i)^(p/2) = {total} is below c k = {}",
                    c * kf
                )));
            }
            c
        }
    };
    let bound = if p > 2.0 {
        constant.powf(-2.0 / (p - 2.0)) * kf
    } else {
        constant.powf(2.0 / (2.0 - p)) * kf
    };
    let eigenvalues = nonzero_eigenvalues(&s)?;
    let d = eigenvalues.len();
    Ok(RankBoundReport {
        k,
        n,
        d,
        p,
        constant,
        bound,
        eigenvalues,
        holds: d as f64 >= bound - TRACE_TOL,
    })
}

/// Hölder slack `sum l^{p/2} - d^{(2-p)/2} (sum l)^{p/2}` on the nonzero
/// eigenvalues, sign-flipped for `p < 2` so that it is always `>= 0`.
pub fn holder_chain_slack(eigenvalues: &[f64], p: f64) -> Result<f64> {
    require_bound_exponent(p)?;
    if eigenvalues.is_empty() {
        return Ok(0.0);
    }
    let d = eigenvalues.len() as f64;
    let lhs = power_sum(eigenvalues, p / 2.0);
    let rhs = d.powf((2.0 - p) / 2.0) * eigenvalues.iter().sum::<f64>().powf(p / 2.0);
    Ok(if p > 2.0 { lhs - rhs } else { rhs - lhs })
}

/// Checks the hypotheses on `T_1..T_k`, then runs the sign average, the
/// easy Khintchine step and the rank bound on `A_i = T_i* T_i`.
///
/// For `p > 2` the hypotheses are `||T_i||_p >= 1` and `Ave <= K k`; for
/// `p < 2` they are `||T_i||_p <= 1` and `Ave >= k / K`.
pub fn theorem_tight_audit(instance: &EmbeddingInstance) -> Result<TheoremAudit> {
    let p = instance.p;
    require_bound_exponent(p)?;
    require_norm_exponent(p)?;
    let ts = instance.ts();
    let k = ts.len() as f64;
    for (i, t) in ts.iter().enumerate() {
        let norm = schatten_power(t, p)?.powf(1.0 / p);
        if p > 2.0 && norm < 1.0 - TRACE_TOL {
            return Err(Error::Precondition(format!(
                "||T_{i}||_p = {norm} is below 1"
            )));
        }
        if p < 2.0 && norm > 1.0 + TRACE_TOL {
            return Err(Error::Precondition(format!(
                "||T_{i}||_p = {norm} exceeds 1"
            )));
        }
    }
    let average = sign_average_sum(ts, p, Sampling::Exhaustive)?.mean_p_power;
    let k_constant = match instance.constant {
        Some(c) => {
            if p > 2.0 && average > c * k * (1.0 + TRACE_TOL) {
                return Err(Error::Precondition(format!(
                    "sign average {average} exceeds K k = {}",
                    c * k
                )));
            }
            if p < 2.0 && average < k / c * (1.0 - TRACE_TOL) {
                return Err(Error::Precondition(format!(
                    "sign average {average} is below k / K = {}",
                    k / c
                )));
            }
            c
        }
        None if p > 2.0 => average / k,
        None => k / average,
    };
    let easy_slack = easy_khintchine_slack(ts, p)?;
    if easy_slack < -TRACE_TOL {
        return Err(Error::InvariantViolated(format!(
            "easy Khintchine slack {easy_slack} is negative"
        )));
    }
    let grams: Vec<Matrix> = ts
        .iter()
        .map(|t| t.adjoint().matmul(t))
        .collect::<Result<_>>()?;
    let claim_constant = if p > 2.0 {
        k_constant
    } else {
        1.0 / k_constant
    };
    // Loosen by the slack already granted above so that the claim's own
    // precondition sees the same tolerance.
    let claim_constant = if p > 2.0 {
        claim_constant * (1.0 + TRACE_TOL)
    } else {
        claim_constant * (1.0 - TRACE_TOL)
    };
    let mut rank = claim_rank_bound(&grams, p, ConstantMode::Supplied(claim_constant))?;
    rank.constant = if p > 2.0 {
        k_constant
    } else {
        1.0 / k_constant
    };
    rank.bound = if p > 2.0 {
        k_constant.powf(-2.0 / (p - 2.0)) * k
    } else {
        k_constant.powf(-2.0 / (2.0 - p)) * k
    };
    rank.holds = rank.d as f64 >= rank.bound - TRACE_TOL;
    if !rank.holds {
        return Err(Error::InvariantViolated(format!(
            "rank {} is below the bound {}",
            rank.d, rank.bound
        )));
    }
    Ok(TheoremAudit {
        average,
        k_constant,
        easy_slack,
        dimension_holds: instance.n() as f64 >= rank.bound - TRACE_TOL,
        rank,
    })
}

/// `T_i = (E_ii + delta G_i) / ||E_ii + delta G_i||_p` in `C_p^n` for
/// `i < k`, with `G_i` complex Gaussian from substreams of `seed`.
pub fn perturbed_diagonal_instance(
    k: usize,
    n: usize,
    p: f64,
    delta: f64,
    seed: u64,
) -> Result<EmbeddingInstance> {
    require_norm_exponent(p)?;
    if k == 0 || k > n {
        return Err(Error::Precondition(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Precondition(format!(
            "perturbation size must be finite and >= 0, got {delta}"
        )));
    }
    let spec = RandomSpec::new(seed, Ensemble::ComplexGaussian);
    let ts = (0..k)
        .map(|i| {
            let g = random_matrix(&spec.substream(i as u64), n, n)?;
            let t = Matrix::unit(n, n, i, i).add(&g.scale(delta))?;
            let norm = schatten_power(&t, p)?.powf(1.0 / p);
            Ok(t.scale(1.0 / norm))
        })
        .collect::<Result<Vec<_>>>()?;
    EmbeddingInstance::new(ts, p, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units(k: usize, n: usize) -> Vec<Matrix> {
        (0..k).map(|i| Matrix::unit(n, n, i, i)).collect()
    }

    #[test]
    fn sign_average_examples() {
        for p in [1.5, 3.0, 4.0] {
            let r = sign_average_sum(&units(5, 5), p, Sampling::Exhaustive).unwrap();
            assert_eq!(r.mean_p_power, 5.0);
        }
        let twice = vec![Matrix::unit(2, 2, 0, 0), Matrix::unit(2, 2, 0, 0)];
        let r = sign_average_sum(&twice, 4.0, Sampling::Exhaustive).unwrap();
        assert!((r.mean_p_power - 8.0).abs() < 1e-12);
        let t = random_matrix(&RandomSpec::new(4, Ensemble::ComplexGaussian), 3, 3).unwrap();
        let r = sign_average_sum(std::slice::from_ref(&t), 3.0, Sampling::Exhaustive).unwrap();
        assert!((r.mean_p_power - schatten_power(&t, 3.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sign_average_size_cap() {
        let many = units(21, 21);
        assert!(matches!(
            sign_average_sum(&many, 3.0, Sampling::Exhaustive),
            Err(Error::TooLarge { .. })
        ));
        let r = sign_average_sum(
            &many,
            3.0,
            Sampling::MonteCarlo {
                trials: 20,
                seed: 1,
            },
        )
        .unwrap();
        assert!((r.mean_p_power - 21.0).abs() < 1e-12);
    }

    #[test]
    fn easy_slack_examples() {
        for p in [1.5, 3.0, 4.0] {
            assert!(easy_khintchine_slack(&units(4, 4), p).unwrap().abs() < 1e-12);
        }
        let twice = vec![Matrix::unit(2, 2, 0, 0), Matrix::unit(2, 2, 0, 0)];
        assert!((easy_khintchine_slack(&twice, 4.0).unwrap() - 4.0).abs() < 1e-12);
        let ts: Vec<Matrix> = (0..3)
            .map(|i| {
                random_matrix(&RandomSpec::new(10 + i, Ensemble::ComplexGaussian), 4, 4).unwrap()
            })
            .collect();
        assert!(easy_khintchine_slack(&ts, 3.0).unwrap() >= -1e-9);
        assert!(easy_khintchine_slack(&ts, 2.0).is_err());
    }

    #[test]
    fn claim_examples() {
        let r = claim_rank_bound(&units(4, 4), 4.0, ConstantMode::FromData).unwrap();
        assert_eq!((r.constant, r.bound, r.d), (1.0, 4.0, 4));
        assert!(r.holds);

        let copies = vec![Matrix::unit(3, 3, 0, 0); 5];
        let r = claim_rank_bound(&copies, 4.0, ConstantMode::FromData).unwrap();
        assert!((r.constant - 5.0).abs() < 1e-12);
        assert!((r.bound - 1.0).abs() < 1e-12);
        assert_eq!(r.d, 1);
        assert!(r.holds);
    }

    #[test]
    fn claim_preconditions() {
        let small = vec![Matrix::unit(2, 2, 0, 0).scale(0.5)];
        assert!(matches!(
            claim_rank_bound(&small, 3.0, ConstantMode::FromData),
            Err(Error::Precondition(_))
        ));
        let big = vec![Matrix::unit(2, 2, 0, 0).scale(2.0)];
        assert!(claim_rank_bound(&big, 1.5, ConstantMode::FromData).is_err());
        assert!(claim_rank_bound(&units(2, 2), 2.0, ConstantMode::FromData).is_err());
        assert!(matches!(
            claim_rank_bound(&units(2, 2), 4.0, ConstantMode::Supplied(0.5)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn audit_examples() {
        let inst = EmbeddingInstance::new(units(5, 5), 4.0, None).unwrap();
        let a = theorem_tight_audit(&inst).unwrap();
        assert_eq!(a.k_constant, 1.0);
        assert_eq!(a.rank.bound, 5.0);
        assert_eq!(a.rank.d, 5);
        assert!(a.dimension_holds);

        let inst = EmbeddingInstance::new(units(3, 6), 3.0, None).unwrap();
        let a = theorem_tight_audit(&inst).unwrap();
        assert!((a.rank.bound - 3.0).abs() < 1e-12);
        assert!(a.rank.holds && a.dimension_holds);
    }

    #[test]
    fn audit_below_two_uses_schatten_norms() {
        // With only the operator norm bounded, I_2 at p = 1 would give a
        // bound of 4 > n = 2.
        let inst = EmbeddingInstance::new(vec![Matrix::identity(2)], 1.0, None).unwrap();
        assert!(matches!(
            theorem_tight_audit(&inst),
            Err(Error::Precondition(_))
        ));
        let inst = EmbeddingInstance::new(vec![Matrix::identity(2).scale(0.5)], 1.0, None).unwrap();
        let a = theorem_tight_audit(&inst).unwrap();
        assert!(a.rank.bound <= 2.0 + 1e-12);
    }

    #[test]
    fn perturbed_instances_pass_the_audit() {
        for seed in 0..5 {
            let inst = perturbed_diagonal_instance(4, 5, 4.0, 0.05, seed).unwrap();
            for t in inst.ts() {
                assert!((schatten_power(t, 4.0).unwrap() - 1.0).abs() < 1e-12);
            }
            let a = theorem_tight_audit(&inst).unwrap();
            assert!(a.rank.holds && a.dimension_holds);
        }
        assert!(perturbed_diagonal_instance(6, 5, 4.0, 0.1, 0).is_err());
    }

    #[test]
    fn holder_chain_is_nonnegative() {
        let ev = [3.0, 1.0, 0.25];
        assert!(holder_chain_slack(&ev, 3.0).unwrap() >= 0.0);
        assert!(holder_chain_slack(&ev, 1.5).unwrap() >= 0.0);
        assert!(holder_chain_slack(&[1.0, 1.0], 4.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn instance_json() {
        let inst = EmbeddingInstance::new(units(2, 2), 3.0, Some(1.0)).unwrap();
        let s = serde_json::to_string(&inst).unwrap();
        assert!(s.contains("\"Ts\"") && s.contains("\"K\""));
        assert_eq!(EmbeddingInstance::from_json_str(&s).unwrap(), inst);
        assert!(EmbeddingInstance::from_json_str(r#"{"p": 3, "Ts": []}"#).is_err());
    }
}
