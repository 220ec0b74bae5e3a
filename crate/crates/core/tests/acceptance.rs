//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schatten::complemented::{estimate_q_norm, overline, phi, q_project, verify_eq_zp, BlockDiag};
use schatten::embedding::{
    claim_rank_bound, easy_khintchine_slack, perturbed_diagonal_instance, sign_average_sum,
    theorem_tight_audit, ConstantMode, EmbeddingInstance,
};
use schatten::norms::{fact1_slacks, split_value, z_tilde_lower, z_tilde_upper, SolverOptions};
use schatten::paving::{
    binomial_identities, find_balanced_split, pave, paving_split, proposition_average,
    PavingTarget, Strategy,
};
use schatten::randomized::{rademacher_averages, Sampling};
use schatten::{
    psd_trace_power, random_matrix, schatten_power, substream_seed, trace_pairing, Ensemble,
    Matrix, RandomSpec,
};

type Outcome = Result<String, String>;

fn gaussian(seed: u64, rows: usize, cols: usize) -> Matrix {
    random_matrix(
        &RandomSpec::new(seed, Ensemble::ComplexGaussian),
        rows,
        cols,
    )
    .unwrap()
}

fn zero_diagonal(seed: u64, n: usize) -> Matrix {
    random_matrix(
        &RandomSpec::new(seed, Ensemble::ZeroDiagonalComplexGaussian),
        n,
        n,
    )
    .unwrap()
}

fn norm(a: &Matrix, p: f64) -> f64 {
    schatten_power(a, p).unwrap().powf(1.0 / p)
}

/// Collects failures; the first few are reported.
#[derive(Default)]
struct Failures(Vec<String>);

impl Failures {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.0.push(what());
        }
    }

    fn finish(self, summary: String) -> Outcome {
        if self.0.is_empty() {
            Ok(summary)
        } else {
            let shown: Vec<_> = self.0.iter().take(3).cloned().collect();
            Err(format!(
                "{} failures, e.g. {}",
                self.0.len(),
                shown.join("; ")
            ))
        }
    }
}

fn contraction() -> Outcome {
    let start = Instant::now();
    let mut f = Failures::default();
    let sizes = [2usize, 4, 6, 8, 10, 12];
    let ps = [2.0, 3.0, 4.0, 6.0, 10.0];
    let mut worst = f64::NEG_INFINITY;
    for i in 0..200u64 {
        let n = sizes[i as usize % sizes.len()];
        let a = zero_diagonal(substream_seed(1, i), n);
        for p in ps {
            let split = find_balanced_split(&a, p, Strategy::Exhaustive, 0).unwrap();
            let u = paving_split(&a, &split.sigma).unwrap().u;
            let bound = (1.0 - 2f64.powf(-p)).powf(1.0 / p) * norm(&a, p);
            let gap = norm(&u, p) - bound;
            worst = worst.max(gap);
            f.check(gap <= 1e-9, || {
                format!("instance {i}, n {n}, p {p}: excess {gap:e}")
            });
        }
    }
    let elapsed = start.elapsed();
    f.check(elapsed < Duration::from_secs(60), || {
        format!("runtime {elapsed:?}")
    });
    f.finish(format!("1000 splits, max ||u||_p - bound = {worst:.3e}"))
}

fn balanced_average() -> Outcome {
    let mut f = Failures::default();
    let mut min_slack = f64::INFINITY;
    let mut count = 0;
    for m in 1..=5usize {
        for s in 0..10u64 {
            let a = zero_diagonal(substream_seed(2, 100 * m as u64 + s), 2 * m);
            for p in [2.0, 3.0, 4.0, 6.0, 10.0] {
                match proposition_average(&a, p) {
                    Ok(r) => {
                        let s2p = r.average - r.lower_bound_2p;
                        let sharp = r.average - r.lower_bound_sharp;
                        min_slack = min_slack.min(s2p).min(sharp);
                        f.check(s2p >= -1e-9 && sharp >= -1e-9, || {
                            format!("m {m}, p {p}: slacks {s2p:e}, {sharp:e}")
                        });
                        count += 1;
                    }
                    Err(e) => f.check(false, || format!("m {m}, p {p}: {e}")),
                }
            }
        }
    }
    for m in 2..=12 {
        let c = binomial_identities(m).unwrap();
        f.check(c.holds(), || {
            format!("binomial identities fail at m = {m}: {c:?}")
        });
    }
    f.finish(format!(
        "{count} exhaustive averages, min slack {min_slack:.3e}; binomial identities exact for m = 2..12"
    ))
}

fn fact1() -> Outcome {
    let mut f = Failures::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for i in 0..1000u64 {
        let rows = rng.random_range(1..=12);
        let cols = rng.random_range(1..=12);
        let a = gaussian(substream_seed(3, i), rows, cols);
        for p in [2.5, 3.0, 4.0, 6.0] {
            let (row, tilde) = fact1_slacks(&a, p).unwrap();
            worst = worst.min(row).min(tilde);
            f.check(row >= -1e-10 && tilde >= -1e-10, || {
                format!("instance {i} ({rows}x{cols}), p {p}: {row:e}, {tilde:e}")
            });
        }
    }
    f.finish(format!("4000 slack pairs, min {worst:.3e}"))
}

fn fact2() -> Outcome {
    let mut f = Failures::default();
    let mut min_slack = f64::INFINITY;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for rows in 1..=4usize {
        for cols in 1..=4usize {
            for s in 0..50u64 {
                let a = gaussian(
                    substream_seed(4, 1000 * (4 * rows + cols) as u64 + s),
                    rows,
                    cols,
                );
                let reports = rademacher_averages(&a, &[3.0, 4.0], Sampling::Exhaustive).unwrap();
                for r in reports {
                    let zt = z_tilde_upper(&a, r.p).unwrap();
                    let slack = r.root - 2f64.powf(-1.0 / r.p) * zt;
                    min_slack = min_slack.min(slack);
                    lo = lo.min(r.root / zt);
                    hi = hi.max(r.root / zt);
                    f.check(slack >= -1e-9, || {
                        format!("{rows}x{cols} seed {s}, p {}: {slack:e}", r.p)
                    });
                }
            }
        }
    }
    let mut max_z = 0.0f64;
    for s in 0..5u64 {
        let a = gaussian(substream_seed(4, 99_000 + s), 3, 3);
        let exact = rademacher_averages(&a, &[3.0, 4.0], Sampling::Exhaustive).unwrap();
        let mc = rademacher_averages(
            &a,
            &[3.0, 4.0],
            Sampling::MonteCarlo {
                trials: 10_000,
                seed: s,
            },
        )
        .unwrap();
        for (e, m) in exact.iter().zip(&mc) {
            let z = (m.mean_p_power - e.mean_p_power).abs() / m.std_error;
            max_z = max_z.max(z);
            f.check(z <= 3.0, || {
                format!("3x3 seed {s}, p {}: {z:.2} standard errors", e.p)
            });
        }
    }
    f.finish(format!(
        "800 matrices, min easy slack {min_slack:.3e}; Monte-Carlo within {max_z:.2} SE; ratio root/z_tilde in [{lo:.4}, {hi:.4}]"
    ))
}

fn random_blockdiag(n: usize, seed: u64) -> BlockDiag {
    let blocks = (0..1u64 << (n * n))
        .map(|i| gaussian(substream_seed(seed, i), n, n))
        .collect();
    BlockDiag::new(n, blocks).unwrap()
}

fn blockdiag_pairing(x: &BlockDiag, y: &BlockDiag) -> Complex64 {
    x.blocks()
        .iter()
        .zip(y.blocks())
        .map(|(a, b)| trace_pairing(a, b).unwrap())
        .sum()
}

fn projection() -> Outcome {
    let mut f = Failures::default();
    let mut roundtrip = 0.0f64;
    for n in 1..=3usize {
        for s in 0..50u64 {
            let a = gaussian(substream_seed(5, 100 * n as u64 + s), n, n);
            let e = phi(&overline(&a).unwrap())
                .unwrap()
                .max_abs_diff(&a)
                .unwrap();
            roundtrip = roundtrip.max(e);
            f.check(e <= 1e-14, || format!("round trip n {n} seed {s}: {e:e}"));
        }
    }
    let mut algebra = 0.0f64;
    for n in 1..=3usize {
        for s in 0..5u64 {
            let x = random_blockdiag(n, substream_seed(50, 10 * n as u64 + s));
            let y = random_blockdiag(n, substream_seed(51, 10 * n as u64 + s));
            let qx = q_project(&x).unwrap();
            let idem = q_project(&qx).unwrap().max_abs_diff(&qx).unwrap();
            let lhs = blockdiag_pairing(&qx, &y);
            let rhs = blockdiag_pairing(&x, &q_project(&y).unwrap());
            let adj = (lhs - rhs).norm() / lhs.norm().max(1.0);
            algebra = algebra.max(idem).max(adj);
            f.check(idem <= 1e-10 && adj <= 1e-10, || {
                format!("n {n} seed {s}: idempotence {idem:e}, self-adjointness {adj:e}")
            });
        }
    }
    let mut min_slack = f64::INFINITY;
    for s in 0..100u64 {
        let b = gaussian(substream_seed(52, s), 32, 32);
        for p in [3.0, 4.0] {
            let slack = verify_eq_zp(&b, 2, p).unwrap();
            min_slack = min_slack.min(slack);
            f.check(slack >= -1e-9, || format!("n 2 seed {s} p {p}: {slack:e}"));
        }
    }
    let start = Instant::now();
    for s in 0..10u64 {
        let b = gaussian(substream_seed(53, s), 1536, 1536);
        let slack = verify_eq_zp(&b, 3, 4.0).unwrap();
        min_slack = min_slack.min(slack);
        f.check(slack >= -1e-9, || format!("n 3 seed {s}: {slack:e}"));
    }
    let big = start.elapsed();
    f.check(big < Duration::from_secs(300), || {
        format!("n = 3 runtime {big:?}")
    });
    let mut q_err = 0.0f64;
    for n in 1..=3usize {
        let q = estimate_q_norm(n, 2.0, 50, 5).unwrap();
        let e = (q.lower_bound - 1.0).abs();
        q_err = q_err.max(e);
        f.check(e <= 1e-8, || {
            format!("Q-norm at p = 2, n {n}: {}", q.lower_bound)
        });
    }
    f.finish(format!(
        "round trip {roundtrip:.1e}, idempotence/adjointness {algebra:.1e}, min slack {min_slack:.3e} (n = 3 took {:.1}s), |Q-norm(p=2) - 1| = {q_err:.1e}",
        big.as_secs_f64()
    ))
}

fn lower_solver() -> Outcome {
    let mut f = Failures::default();
    let opts = SolverOptions::default();
    let e11 = Matrix::unit(2, 2, 0, 0);
    let mut e11_err = 0.0f64;
    for q in [1.0, 1.2, 1.5, 1.8] {
        let d = z_tilde_lower(&e11, q, &opts).unwrap();
        let err = (d.objective - 2f64.powf(1.0 / q - 1.0)).abs();
        e11_err = e11_err.max(err);
        f.check(err <= 1e-6, || {
            format!("E11, q {q}: {} (error {err:e})", d.objective)
        });
    }
    let mut margin = f64::INFINITY;
    for s in 0..20u64 {
        let a = gaussian(substream_seed(6, s), 3, 3);
        let q = [1.2, 1.5][s as usize % 2];
        let solved = z_tilde_lower(&a, q, &opts).unwrap().objective;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let scale = a.frobenius() / 3.0;
        let mut best = split_value(&a.scale(0.5), &a.scale(0.5), q).unwrap();
        for t in 0..10_000u64 {
            let step = scale * 10f64.powf(rng.random_range(-2.0..0.5));
            let g = gaussian(substream_seed(600 + s, t), 3, 3);
            let b = a
                .scale(rng.random_range(0.0..1.0))
                .add(&g.scale(step))
                .unwrap();
            let c = a.sub(&b).unwrap();
            best = best.min(split_value(&b, &c, q).unwrap());
        }
        margin = margin.min(best - solved);
        f.check(solved <= best + 1e-6, || {
            format!("instance {s}, q {q}: solver {solved} vs oracle {best}")
        });
    }
    let mut worst = f64::NEG_INFINITY;
    for s in 0..100u64 {
        let a = gaussian(substream_seed(7, s), 3, 3);
        let b = gaussian(substream_seed(8, s), 3, 3);
        let lhs = trace_pairing(&a, &b).unwrap().norm();
        let rhs = z_tilde_upper(&a, 4.0).unwrap()
            * z_tilde_lower(&b, 4.0 / 3.0, &opts).unwrap().objective;
        worst = worst.max(lhs / rhs);
        f.check(lhs <= rhs * (1.0 + 1e-6), || {
            format!("pair {s}: {lhs} > {rhs}")
        });
    }
    f.finish(format!(
        "E11 error {e11_err:.1e}; oracle minus solver >= {margin:.3e}; max pairing ratio {worst:.4}"
    ))
}

/// `k` PSD matrices of rank at most `n`, normalized to `Tr A^{p/2} = 1`.
fn psd_family(seed: u64, k: usize, n: usize, p: f64) -> Vec<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|i| {
            let r = rng.random_range(1..=n);
            let g = gaussian(substream_seed(seed, i as u64), n, r);
            let a = g.matmul(&g.adjoint()).unwrap();
            let a = Matrix::from_fn(n, n, |x, y| {
                if x == y {
                    Complex64::new(a.get(x, x).re, 0.0)
                } else if x < y {
                    a.get(x, y)
                } else {
                    a.get(y, x).conj()
                }
            });
            let t = psd_trace_power(&a, p / 2.0).unwrap();
            a.scale(t.powf(-2.0 / p))
        })
        .collect()
}

fn rank_bounds() -> Outcome {
    let mut f = Failures::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tightest = f64::INFINITY;
    for (claim, ps) in [(1, [3.0, 4.0]), (2, [1.0, 1.5])] {
        for i in 0..500u64 {
            let k = rng.random_range(1..=12);
            let n = rng.random_range(1..=8);
            let p = ps[i as usize % 2];
            let family = psd_family(substream_seed(70 + claim, i), k, n, p);
            match claim_rank_bound(&family, p, ConstantMode::FromData) {
                Ok(r) => {
                    tightest = tightest.min(r.d as f64 - r.bound);
                    f.check(r.holds, || {
                        format!("claim {claim} instance {i}: d {} < {}", r.d, r.bound)
                    });
                }
                Err(e) => f.check(false, || format!("claim {claim} instance {i}: {e}")),
            }
        }
    }
    for k in 1..=12usize {
        let ts: Vec<Matrix> = (0..k).map(|i| Matrix::unit(k, k, i, i)).collect();
        for p in [1.5, 3.0, 4.0] {
            let inst = EmbeddingInstance::new(ts.clone(), p, None).unwrap();
            let a = theorem_tight_audit(&inst).unwrap();
            f.check(a.rank.bound == k as f64 && a.rank.d == k, || {
                format!(
                    "diagonal k {k} p {p}: bound {} d {}",
                    a.rank.bound, a.rank.d
                )
            });
        }
    }
    for s in 0..100u64 {
        let k = 1 + (s as usize % 10);
        let inst =
            perturbed_diagonal_instance(k, k + (s as usize % 3), 4.0, 0.1, substream_seed(71, s))
                .unwrap();
        match theorem_tight_audit(&inst) {
            Ok(a) => f.check(a.rank.holds && a.dimension_holds, || {
                format!("audit seed {s}")
            }),
            Err(e) => f.check(false, || format!("audit seed {s}: {e}")),
        }
    }
    let mut min_easy = f64::INFINITY;
    for s in 0..30u64 {
        let k = 1 + s as usize % 6;
        let n = 2 + s as usize % 3;
        let ts: Vec<Matrix> = (0..k)
            .map(|i| gaussian(substream_seed(72, 10 * s + i as u64), n, n))
            .collect();
        for p in [1.5, 3.0, 4.0] {
            let slack = easy_khintchine_slack(&ts, p).unwrap();
            min_easy = min_easy.min(slack);
            f.check(slack >= -1e-9, || {
                format!("easy slack seed {s} p {p}: {slack:e}")
            });
        }
        let ave = sign_average_sum(&ts, 2.0, Sampling::Exhaustive)
            .unwrap()
            .mean_p_power;
        let direct: f64 = ts.iter().map(|t| t.frobenius().powi(2)).sum();
        let err = (ave - direct).abs() / direct.max(1.0);
        f.check(err <= 1e-10, || {
            format!("p = 2 orthogonality seed {s}: {err:e}")
        });
    }
    f.finish(format!(
        "1000 claim instances, min d - bound {tightest:.3}; diagonal bound = k = n; 100 audits; min easy slack {min_easy:.3e}"
    ))
}

fn iterated_paving() -> Outcome {
    let mut f = Failures::default();
    let mut final_ratio = 0.0f64;
    for s in 0..10u64 {
        let a = zero_diagonal(substream_seed(8, s), 16);
        let r = pave(&a, 4.0, PavingTarget::Depth(4), Strategy::Exhaustive, s).unwrap();
        let c = &r.certificate;
        f.check(c.level_norms.len() == 4, || {
            format!("seed {s}: {} levels", c.level_norms.len())
        });
        let mut prev = c.original_norm;
        for (d, (&x, &b)) in c.level_norms.iter().zip(&c.level_bounds).enumerate() {
            f.check(x <= prev && x <= b + 1e-9, || {
                format!(
                    "seed {s} depth {}: norm {x}, previous {prev}, bound {b}",
                    d + 1
                )
            });
            prev = x;
        }
        f.check(r.paved.is_zero() && c.paved_norm == 0.0, || {
            format!("seed {s}: singleton paving not zero")
        });
        let r3 = pave(&a, 4.0, PavingTarget::Depth(3), Strategy::Exhaustive, s).unwrap();
        final_ratio = final_ratio.max(r3.certificate.paved_norm / r3.certificate.guaranteed_bound);
    }
    f.finish(format!(
        "10 matrices, depths 1..4 monotone and certified, depth-3 norm/bound <= {final_ratio:.3}, depth 4 exactly 0"
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("contraction of the best balanced split", contraction),
        (
            "balanced-subset averages and binomial identities",
            balanced_average,
        ),
        ("row-norm slacks", fact1),
        ("sign averages against the unconditional norm", fact2),
        ("sign-block projection", projection),
        ("decomposition norm solver", lower_solver),
        ("rank bounds", rank_bounds),
        ("iterated paving", iterated_paving),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS [{name}] {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL [{name}] {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
