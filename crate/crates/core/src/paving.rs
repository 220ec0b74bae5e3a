//! Balanced bipartitions and iterated `C_p` paving.
//!
//! For a zero-diagonal `2m x 2m` matrix `A` and a balanced subset `sigma`,
//! `A_sigma` keeps the entries crossing between `sigma` and its complement
//! and `u = A - A_sigma` keeps the two diagonal blocks. Choosing `sigma` to
//! make `||A_sigma||_p` large forces `||u||_p^p <= (1 - 2^{-p}) ||A||_p^p`,
//! and repeating on the diagonal blocks paves `A` with a certified decay.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::random::{rng_from_seed, substream_seed};
use crate::randomized::order_free_sum;
use crate::spectral::{operator_norm, schatten_power, SchattenExponent};

/// Largest half-size `m` for exhaustive split search.
pub const MAX_EXHAUSTIVE_M: usize = 8;
/// Largest half-size `m` for [`proposition_average`].
pub const MAX_AVERAGE_M: usize = 6;
/// Absolute tolerance on every certified inequality.
pub const CERT_TOL: f64 = 1e-9;

/// A subset of `{0, .., universe - 1}` of cardinality `universe / 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SigmaJson")]
pub struct SubsetSigma {
    universe: usize,
    members: Vec<usize>,
}

#[derive(Deserialize)]
struct SigmaJson {
    universe: usize,
    members: Vec<usize>,
}

impl TryFrom<SigmaJson> for SubsetSigma {
    type Error = Error;

    fn try_from(raw: SigmaJson) -> Result<Self> {
        SubsetSigma::new(raw.universe, raw.members)
    }
}

impl SubsetSigma {
    /// Members are 0-based; they are sorted on construction.
    pub fn new(universe: usize, mut members: Vec<usize>) -> Result<Self> {
        if universe == 0 || universe % 2 == 1 {
            return Err(Error::OddDimension(universe));
        }
        members.sort_unstable();
        members.dedup();
        if members.len() != universe / 2 {
            return Err(Error::Precondition(format!(
                "a balanced subset of {universe} indices needs {} distinct members, got {}",
                universe / 2,
                members.len()
            )));
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= universe) {
            return Err(Error::IndexOutOfRange {
                index: bad as u64,
                len: universe as u64,
            });
        }
        Ok(Self { universe, members })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> Self {
        Self {
            universe: self.universe,
            members: (0..self.universe).filter(|&i| !self.contains(i)).collect(),
        }
    }

    fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe];
        for &i in &self.members {
            mask[i] = true;
        }
        mask
    }
}

fn check_sigma(a: &Matrix, sigma: &SubsetSigma) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() != sigma.universe() {
        return Err(Error::DimensionMismatch {
            op: "balanced subset",
            left: a.shape(),
            right: (sigma.universe(), sigma.universe()),
        });
    }
    Ok(())
}

fn require_zero_diagonal(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    match a.first_nonzero_diagonal() {
        Some(index) => Err(Error::NonZeroDiagonal { index }),
        None => Ok(()),
    }
}

fn require_paving_exponent(p: f64) -> Result<()> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidExponent {
            p,
            reason: "paving needs 2 <= p < infinity",
        });
    }
    Ok(())
}

/// The entries of `A` crossing between `sigma` and its complement.
pub fn a_sigma(a: &Matrix, sigma: &SubsetSigma) -> Result<Matrix> {
    check_sigma(a, sigma)?;
    let mask = sigma.mask();
    Ok(Matrix::from_fn(a.rows(), a.cols(), |k, l| {
        if mask[k] != mask[l] {
            a.get(k, l)
        } else {
            Default::default()
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PavingSplit {
    /// `PAP + QAQ`.
    pub u: Matrix,
    /// `A_sigma`.
    pub v: Matrix,
}

/// `A = u + v` with `u` the two diagonal blocks and `v = A_sigma`.
pub fn paving_split(a: &Matrix, sigma: &SubsetSigma) -> Result<PavingSplit> {
    check_sigma(a, sigma)?;
    let mask = sigma.mask();
    let pick = |same: bool| {
        Matrix::from_fn(a.rows(), a.cols(), |k, l| {
            if (mask[k] == mask[l]) == same {
                a.get(k, l)
            } else {
                Default::default()
            }
        })
    };
    Ok(PavingSplit {
        u: pick(true),
        v: pick(false),
    })
}

/// `||A_sigma||_p^p` from the two off-diagonal blocks.
fn cross_power(a: &Matrix, members: &[usize], rest: &[usize], p: f64) -> Result<f64> {
    Ok(schatten_power(&a.select(members, rest), p)? + schatten_power(&a.select(rest, members), p)?)
}

fn complement_of(members: &[usize], universe: usize) -> Vec<usize> {
    let mut mask = vec![false; universe];
    for &i in members {
        mask[i] = true;
    }
    (0..universe).filter(|&i| !mask[i]).collect()
}

/// All `m`-subsets of `{0, .., 2m-1}` containing 0, in lexicographic order.
/// Together with their complements these are all balanced subsets.
fn half_combinations(m: usize) -> Vec<Vec<usize>> {
    let n = 2 * m;
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..m).collect();
    loop {
        out.push(c.clone());
        // Advance the tail c[1..] to the next combination of {1..n-1}.
        let mut i = m;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            if c[i] < n - m + i {
                break;
            }
        }
        c[i] += 1;
        for j in i + 1..m {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionAverage {
    pub m: usize,
    pub p: f64,
    /// Number of balanced subsets averaged over, `C(2m, m)`.
    pub subsets: u64,
    /// `Ave_sigma ||A_sigma||_p^p`.
    pub average: f64,
    /// `||A||_p^p = Tr(A*A)^{p/2}`.
    pub trace_power: f64,
    /// `2^{-p} ||A||_p^p`.
    pub lower_bound_2p: f64,
    /// `(m / (4m - 2))^{p/2} ||A||_p^p`.
    pub lower_bound_sharp: f64,
}

/// Exhaustive average of `||A_sigma||_p^p` over balanced subsets.
///
/// Fails with [`Error::InvariantViolated`] if either lower bound is missed.
pub fn proposition_average(a: &Matrix, p: f64) -> Result<PropositionAverage> {
    require_paving_exponent(p)?;
    require_zero_diagonal(a)?;
    let n = a.rows();
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let m = n / 2;
    if m > MAX_AVERAGE_M {
        return Err(Error::TooLarge {
            what: "half-size m for the exhaustive average",
            value: m as u64,
            max: MAX_AVERAGE_M as u64,
        });
    }
    let mut values: Vec<f64> = half_combinations(m)
        .par_iter()
        .map(|s| cross_power(a, s, &complement_of(s, n), p))
        .collect::<Result<_>>()?;
    // sigma and its complement give the same A_sigma, so the half average
    // is the full one.
    let count = values.len() as f64;
    let average = order_free_sum(&mut values) / count;
    let trace_power = schatten_power(a, p)?;
    let lower_bound_2p = 2f64.powf(-p) * trace_power;
    let ratio = m as f64 / (4.0 * m as f64 - 2.0);
    let lower_bound_sharp = ratio.powf(p / 2.0) * trace_power;
    for (name, bound) in [("2^-p", lower_bound_2p), ("sharp", lower_bound_sharp)] {
        if average < bound - CERT_TOL {
            return Err(Error::InvariantViolated(format!(
                "balanced average {average} is below the {name} bound {bound}"
            )));
        }
    }
    Ok(PropositionAverage {
        m,
        p,
        subsets: binomial(n as u64, m as u64),
        average,
        trace_power,
        lower_bound_2p,
        lower_bound_sharp,
    })
}

/// The two binomial ratios behind the sharp average bound, in exact
/// arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialCheck {
    pub m: u64,
    /// `C(2m-2, m-1) / C(2m, m)` and its closed form `m / (4m - 2)`.
    pub pair_ratio: (Ratio<u64>, Ratio<u64>),
    /// `C(2m-3, m-2) / C(2m, m)` and its closed form `m / (8m - 4)`.
    pub triple_ratio: (Ratio<u64>, Ratio<u64>),
}

impl BinomialCheck {
    pub fn holds(&self) -> bool {
        self.pair_ratio.0 == self.pair_ratio.1 && self.triple_ratio.0 == self.triple_ratio.1
    }
}

/// Evaluates both identities for `2 <= m <= 30`.
pub fn binomial_identities(m: u64) -> Result<BinomialCheck> {
    if !(2..=30).contains(&m) {
        return Err(Error::Precondition(format!(
            "binomial identities are checked for 2 <= m <= 30, got {m}"
        )));
    }
    let total = binomial(2 * m, m);
    Ok(BinomialCheck {
        m,
        pair_ratio: (
            Ratio::new(binomial(2 * m - 2, m - 1), total),
            Ratio::new(m, 4 * m - 2),
        ),
        triple_ratio: (
            Ratio::new(binomial(2 * m - 3, m - 2), total),
            Ratio::new(m, 8 * m - 4),
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Maximizer over all balanced subsets; first in lexicographic order on ties.
    Exhaustive,
    /// First of up to `64 m` uniform balanced subsets meeting the bar.
    Random,
    /// Best-improvement swap ascent from a random balanced start.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedSplit {
    pub sigma: SubsetSigma,
    /// `||A_sigma||_p^p`.
    pub v_power: f64,
    /// `2^{-p} ||A||_p^p`.
    pub target: f64,
    pub strategy: Strategy,
    /// The requested strategy missed the bar and exhaustive search was used.
    pub fallback_used: bool,
    /// Number of subsets evaluated.
    pub evaluations: u64,
}

fn exhaustive_best(a: &Matrix, p: f64) -> Result<(Vec<usize>, f64, u64)> {
    let n = a.rows();
    let m = n / 2;
    if m > MAX_EXHAUSTIVE_M {
        return Err(Error::TooLarge {
            what: "half-size m for exhaustive split search",
            value: m as u64,
            max: MAX_EXHAUSTIVE_M as u64,
        });
    }
    let combos = half_combinations(m);
    let values: Vec<f64> = combos
        .par_iter()
        .map(|s| cross_power(a, s, &complement_of(s, n), p))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    Ok((combos[best].clone(), values[best], combos.len() as u64))
}

fn random_balanced<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut s = idx[..n / 2].to_vec();
    s.sort_unstable();
    s
}

fn greedy_ascent(a: &Matrix, p: f64, seed: u64) -> Result<(Vec<usize>, f64, u64)> {
    let n = a.rows();
    let mut rng = rng_from_seed(seed);
    let mut current = random_balanced(n, &mut rng);
    let mut value = cross_power(a, &current, &complement_of(&current, n), p)?;
    let mut evaluations = 1u64;
    loop {
        let rest = complement_of(&current, n);
        let swaps: Vec<(usize, usize)> = (0..current.len())
            .flat_map(|i| (0..rest.len()).map(move |j| (i, j)))
            .collect();
        let values: Vec<f64> = swaps
            .par_iter()
            .map(|&(i, j)| {
                let mut s = current.clone();
                s[i] = rest[j];
                s.sort_unstable();
                cross_power(a, &s, &complement_of(&s, n), p)
            })
            .collect::<Result<_>>()?;
        evaluations += values.len() as u64;
        let mut best: Option<usize> = None;
        for (t, &v) in values.iter().enumerate() {
            if v > value * (1.0 + 1e-12) && best.is_none_or(|b| v > values[b]) {
                best = Some(t);
            }
        }
        match best {
            Some(t) => {
                let (i, j) = swaps[t];
                current[i] = rest[j];
                current.sort_unstable();
                value = values[t];
            }
            None => return Ok((current, value, evaluations)),
        }
    }
}

/// A balanced `sigma` with `||A_sigma||_p^p >= 2^{-p} ||A||_p^p`.
///
/// Random and greedy search fall back to exhaustive search when they miss
/// the bar and `m <= 8`; otherwise [`Error::SplitNotFound`] is returned.
pub fn find_balanced_split(
    a: &Matrix,
    p: f64,
    strategy: Strategy,
    seed: u64,
) -> Result<BalancedSplit> {
    require_paving_exponent(p)?;
    require_zero_diagonal(a)?;
    let n = a.rows();
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let m = n / 2;
    let target = 2f64.powf(-p) * schatten_power(a, p)?;
    let meets = |v: f64| v >= target - CERT_TOL;
    let attempt = match strategy {
        Strategy::Exhaustive => Some(exhaustive_best(a, p)?),
        Strategy::Random => {
            let mut rng = rng_from_seed(seed);
            let mut found = None;
            for t in 0..64 * m as u64 {
                let s = random_balanced(n, &mut rng);
                let v = cross_power(a, &s, &complement_of(&s, n), p)?;
                if meets(v) {
                    found = Some((s, v, t + 1));
                    break;
                }
            }
            found
        }
        Strategy::Greedy => Some(greedy_ascent(a, p, seed)?).filter(|r| meets(r.1)),
    };
    let (members, v_power, evaluations, fallback_used) = match attempt {
        Some((s, v, e)) => (s, v, e, false),
        None if m <= MAX_EXHAUSTIVE_M => {
            let (s, v, e) = exhaustive_best(a, p)?;
            (s, v, e, true)
        }
        None => {
            return Err(Error::SplitNotFound(format!(
                "{strategy:?} search missed 2^-p ||A||_p^p = {target} and m = {m} is too large for exhaustive fallback"
            )))
        }
    };
    if !meets(v_power) {
        return Err(Error::InvariantViolated(format!(
            "best balanced split gives {v_power} below the bar {target}"
        )));
    }
    Ok(BalancedSplit {
        sigma: SubsetSigma::new(n, members)?,
        v_power,
        target,
        strategy,
        fallback_used,
        evaluations,
    })
}

/// Disjoint index sets covering `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PavingPartition {
    pub parts: Vec<Vec<usize>>,
    /// Number of halving rounds that produced the partition.
    #[serde(default)]
    pub depth: usize,
}

impl PavingPartition {
    /// Checks that the parts are nonempty, disjoint and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for part in &self.parts {
            if part.is_empty() {
                return Err(Error::InvalidPartition("empty part".into()));
            }
            for &i in part {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {i} outside 0..{n}")));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("index {i} repeated")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("index {i} not covered")));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `sum_i P_i A P_i` over the parts.
pub fn paved_matrix(a: &Matrix, partition: &PavingPartition) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    partition.validate(a.rows())?;
    let mut label = vec![0usize; a.rows()];
    for (j, part) in partition.parts.iter().enumerate() {
        for &i in part {
            label[i] = j;
        }
    }
    Ok(Matrix::from_fn(a.rows(), a.cols(), |k, l| {
        if label[k] == label[l] {
            a.get(k, l)
        } else {
            Default::default()
        }
    }))
}

/// `||sum_i P_i A P_i||_p`, computed blockwise.
pub fn paving_norm(a: &Matrix, partition: &PavingPartition, p: f64) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    partition.validate(a.rows())?;
    let blocks = partition.parts.iter().map(|part| a.select(part, part));
    match SchattenExponent::new(p)? {
        SchattenExponent::Infinity => blocks
            .map(|b| operator_norm(&b))
            .try_fold(0.0f64, |acc, x| Ok(acc.max(x?))),
        SchattenExponent::Finite(p) => {
            let mut powers: Vec<f64> = blocks
                .map(|b| schatten_power(&b, p))
                .collect::<Result<_>>()?;
            Ok(order_free_sum(&mut powers).powf(1.0 / p))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PavingTarget {
    Depth(usize),
    /// Halve until the certified factor drops to `epsilon`.
    Epsilon(f64),
}

/// One block split performed during [`pave`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSplit {
    /// Round, starting at 1.
    pub level: usize,
    /// Global indices of the block that was split.
    pub block: Vec<usize>,
    /// The split in local coordinates; a trailing index equal to
    /// `block.len()` is the zero padding of an odd block.
    pub sigma: SubsetSigma,
    pub v_power: f64,
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PavingCertificate {
    pub p: f64,
    pub original_norm: f64,
    pub paved_norm: f64,
    /// `(1 - 2^{-p})^{depth/p} ||A||_p`.
    pub guaranteed_bound: f64,
    pub depth: usize,
    /// Paved norm after rounds `1..=depth`.
    pub level_norms: Vec<f64>,
    /// Certified bound after rounds `1..=depth`.
    pub level_bounds: Vec<f64>,
    pub per_level_splits: Vec<LevelSplit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PavingResult {
    pub partition: PavingPartition,
    pub paved: Matrix,
    pub certificate: PavingCertificate,
    /// Depth given by the epsilon formula before capping, if a target
    /// epsilon was supplied.
    pub formula_depth: Option<u64>,
}

/// `ceil(ln eps / ln (1 - 2^{-p})^{1/p})`, the rounds needed to certify a
/// factor `eps`; 0 when `eps >= 1`.
pub fn depth_for_epsilon(p: f64, epsilon: f64) -> Result<u64> {
    require_paving_exponent(p)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Precondition(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if epsilon >= 1.0 {
        return Ok(0);
    }
    let rate = (1.0 - 2f64.powf(-p)).ln() / p;
    Ok((epsilon.ln() / rate).ceil() as u64)
}

/// Rounds of halving after which every part of `0..n` is a singleton.
pub fn singleton_depth(n: usize) -> usize {
    let mut depth = 0;
    let mut size = n;
    while size > 1 {
        size = size.div_ceil(2);
        depth += 1;
    }
    depth
}

/// Splits one block; returns the two new parts and the record.
fn split_block(
    a: &Matrix,
    block: &[usize],
    p: f64,
    strategy: Strategy,
    seed: u64,
    level: usize,
) -> Result<(Vec<usize>, Vec<usize>, LevelSplit)> {
    let s = block.len();
    let even = s + s % 2;
    let sub = a.select(block, block).pad_to(even, even);
    let split = find_balanced_split(&sub, p, strategy, seed)?;
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (local, &global) in block.iter().enumerate() {
        if split.sigma.contains(local) {
            left.push(global);
        } else {
            right.push(global);
        }
    }
    Ok((
        left,
        right,
        LevelSplit {
            level,
            block: block.to_vec(),
            sigma: split.sigma,
            v_power: split.v_power,
            fallback_used: split.fallback_used,
        },
    ))
}

/// The two halves of a split block and the split that produced them.
type BlockHalves = (Vec<usize>, Vec<usize>, LevelSplit);

/// Iterated halving of a zero-diagonal matrix with a contraction certificate.
///
/// Each round splits every part of size at least 2 with
/// [`find_balanced_split`] (odd parts are padded with a zero index that is
/// dropped afterwards). The depth is capped at [`singleton_depth`], where
/// the paved matrix is exactly zero.
pub fn pave(
    a: &Matrix,
    p: f64,
    target: PavingTarget,
    strategy: Strategy,
    seed: u64,
) -> Result<PavingResult> {
    require_paving_exponent(p)?;
    require_zero_diagonal(a)?;
    let n = a.rows();
    let cap = singleton_depth(n);
    let (requested, formula_depth) = match target {
        PavingTarget::Depth(t) => (t, None),
        PavingTarget::Epsilon(eps) => {
            let t = depth_for_epsilon(p, eps)?;
            (usize::try_from(t).unwrap_or(usize::MAX), Some(t))
        }
    };
    let depth = requested.min(cap);
    let original_norm = schatten_power(a, p)?.powf(1.0 / p);
    let factor = (1.0 - 2f64.powf(-p)).powf(1.0 / p);
    let mut parts: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut splits = Vec::new();
    let mut level_norms = Vec::with_capacity(depth);
    let mut level_bounds = Vec::with_capacity(depth);
    for level in 1..=depth {
        let level_seed = substream_seed(seed, level as u64);
        let results: Vec<Result<Option<BlockHalves>>> = parts
            .par_iter()
            .enumerate()
            .map(|(b, block)| {
                if block.len() < 2 {
                    return Ok(None);
                }
                let seed = substream_seed(level_seed, b as u64);
                split_block(a, block, p, strategy, seed, level).map(Some)
            })
            .collect();
        let mut next = Vec::with_capacity(2 * parts.len());
        for (block, r) in parts.iter().zip(results) {
            match r? {
                Some((left, right, record)) => {
                    next.push(left);
                    next.push(right);
                    splits.push(record);
                }
                None => next.push(block.clone()),
            }
        }
        parts = next;
        let partition = PavingPartition {
            parts: parts.clone(),
            depth: level,
        };
        let norm = paving_norm(a, &partition, p)?;
        let bound = factor.powi(level as i32) * original_norm;
        if norm > bound + CERT_TOL {
            return Err(Error::InvariantViolated(format!(
                "paved norm {norm} exceeds the certified bound {bound} at depth {level}"
            )));
        }
        level_norms.push(norm);
        level_bounds.push(bound);
    }
    let partition = PavingPartition { parts, depth };
    let paved = paved_matrix(a, &partition)?;
    let paved_norm = level_norms.last().copied().unwrap_or(original_norm);
    let guaranteed_bound = level_bounds.last().copied().unwrap_or(original_norm);
    Ok(PavingResult {
        partition,
        paved,
        certificate: PavingCertificate {
            p,
            original_norm,
            paved_norm,
            guaranteed_bound,
            depth,
            level_norms,
            level_bounds,
            per_level_splits: splits,
        },
        formula_depth,
    })
}
