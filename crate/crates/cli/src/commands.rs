use std::path::Path;

use schatten::complemented::{estimate_q_norm, overline, phi, q_project, verify_eq_zp, BlockDiag};
use schatten::embedding::{perturbed_diagonal_instance, theorem_tight_audit, EmbeddingInstance};
use schatten::norms::{
    fact1_slacks, z_norm, z_norm_adjoint_power, z_tilde_lower, z_tilde_upper, SolverOptions,
};
use schatten::paving::{
    binomial_identities, pave, proposition_average, singleton_depth, PavingTarget, Strategy,
};
use schatten::randomized::{fact2_ratio, Sampling};
use schatten::{
    operator_norm, random_matrix, schatten, substream_seed, Ensemble, Matrix, RandomSpec,
};

use crate::table::{Cell, RowKey, Table};
use crate::{CliError, CliResult, Command, Config};

/// Perturbation size of the random embedding families.
const EMBEDDING_DELTA: f64 = 0.1;

pub(crate) fn dispatch(config: &Config) -> CliResult<Table> {
    match config.command {
        Command::Norms => norms(config),
        Command::Fact1 => fact1(config),
        Command::Fact2 => fact2(config),
        Command::Projection => projection(config),
        Command::Embedding => embedding(config),
        Command::PavingFind => paving_find(config),
        Command::PavingDecay => paving_decay(config),
        Command::PropAverage => prop_average(config),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_matrix(path: &Path) -> CliResult<Matrix> {
    Ok(Matrix::from_json_str(&read_text(path)?)?)
}

fn exponents(config: &Config, default: &[f64]) -> Vec<f64> {
    if config.p.is_empty() {
        default.to_vec()
    } else {
        config.p.clone()
    }
}

fn sizes(config: &Config, default: &[usize]) -> CliResult<Vec<usize>> {
    let s = if config.size.is_empty() {
        default.to_vec()
    } else {
        config.size.clone()
    };
    if s.contains(&0) {
        return Err(CliError::Usage("--size must be positive".into()));
    }
    Ok(s)
}

fn trials(config: &Config, default: usize) -> CliResult<usize> {
    match config.trials.unwrap_or(default) {
        0 => Err(CliError::Usage("--trials must be positive".into())),
        t => Ok(t),
    }
}

/// Dimension for the paving commands: `--size`, else `2 * --m`, else `default`.
fn paving_size(config: &Config, default: usize) -> CliResult<usize> {
    match (config.size.as_slice(), config.m) {
        ([], None) => Ok(default),
        ([], Some(m)) if m > 0 => Ok(2 * m),
        ([n], None) if *n > 0 => Ok(*n),
        ([n], Some(m)) if *n == 2 * m && m > 0 => Ok(*n),
        _ => Err(CliError::Usage(
            "give one positive --size, or --m, or matching values of both".into(),
        )),
    }
}

/// The instances of a paving command: the input matrix, or `trials` seeded
/// zero-diagonal Gaussians. Each comes with the seed reported in its rows.
fn paving_instances(config: &Config, default_size: usize) -> CliResult<Vec<(u64, Matrix)>> {
    match &config.input {
        Some(path) => {
            let a = read_matrix(path)?;
            if !config.size.is_empty() || config.m.is_some() {
                let n = paving_size(config, a.rows())?;
                if n != a.rows() {
                    return Err(CliError::Usage(format!(
                        "--size {n} does not match the {}x{} input",
                        a.rows(),
                        a.cols()
                    )));
                }
            }
            Ok(vec![(config.seed, a)])
        }
        None => {
            let n = paving_size(config, default_size)?;
            (0..trials(config, 1)? as u64)
                .map(|i| {
                    let seed = substream_seed(config.seed, i);
                    let a = random_matrix(
                        &RandomSpec::new(seed, Ensemble::ZeroDiagonalComplexGaussian),
                        n,
                        n,
                    )?;
                    Ok((seed, a))
                })
                .collect()
        }
    }
}

fn norms(config: &Config) -> CliResult<Table> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("norms needs --input".into()))?;
    let a = read_matrix(path)?;
    let mut t = Table::new(&[
        "instance",
        "seed",
        "p",
        "schatten",
        "z_norm",
        "z_norm_adjoint",
        "z_tilde",
        "solver_converged",
    ]);
    for p in exponents(config, &[1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY]) {
        let mut cells: Vec<Cell> = vec![0u64.into(), Cell::Empty, p.into()];
        if p.is_infinite() {
            cells.push(operator_norm(&a)?.into());
            cells.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
        } else {
            cells.push(schatten(&a, p)?.into());
            cells.push(z_norm(&a, p)?.into());
            cells.push(z_norm_adjoint_power(&a, p)?.powf(1.0 / p).into());
            if p > 2.0 {
                cells.push(z_tilde_upper(&a, p)?.into());
                cells.push(Cell::Empty);
            } else if p < 2.0 {
                let d = z_tilde_lower(&a, p, &SolverOptions::default())?;
                cells.push(d.objective.into());
                cells.push(d.converged.into());
            } else {
                cells.extend([Cell::Empty, Cell::Empty]);
            }
        }
        t.push(RowKey::new(0, p), cells);
    }
    Ok(t)
}

fn fact1(config: &Config) -> CliResult<Table> {
    let ps = exponents(config, &[2.5, 3.0, 4.0, 6.0]);
    let count = trials(config, 100)?;
    let mut t = Table::new(&[
        "instance",
        "seed",
        "size",
        "p",
        "schatten",
        "z_norm",
        "row_slack",
        "tilde_slack",
    ]);
    let mut instance = 0u64;
    for n in sizes(config, &[6])? {
        for _ in 0..count {
            let seed = substream_seed(config.seed, instance);
            let a = random_matrix(&RandomSpec::new(seed, Ensemble::ComplexGaussian), n, n)?;
            for &p in &ps {
                let (row, tilde) = fact1_slacks(&a, p)?;
                t.push(
                    RowKey::new(instance, p),
                    vec![
                        instance.into(),
                        seed.into(),
                        n.into(),
                        p.into(),
                        schatten(&a, p)?.into(),
                        z_norm(&a, p)?.into(),
                        row.into(),
                        tilde.into(),
                    ],
                );
            }
            instance += 1;
        }
    }
    Ok(t)
}

fn fact2(config: &Config) -> CliResult<Table> {
    let ps = exponents(config, &[3.0, 4.0]);
    let count = trials(config, 10)?;
    let ns = sizes(config, &[2, 3])?;
    if let Some(n) = ns.iter().find(|&&n| n > 4) {
        return Err(CliError::Usage(format!(
            "fact2 averages exhaustively and accepts sizes up to 4, got {n}"
        )));
    }
    let mut t = Table::new(&[
        "instance",
        "seed",
        "size",
        "p",
        "root",
        "z_tilde",
        "ratio",
        "easy_slack",
        "solver_converged",
        "solver_residual",
    ]);
    let opts = SolverOptions::default();
    let mut instance = 0u64;
    for n in ns {
        for _ in 0..count {
            let seed = substream_seed(config.seed, instance);
            let a = random_matrix(&RandomSpec::new(seed, Ensemble::ComplexGaussian), n, n)?;
            for &p in &ps {
                let r = fact2_ratio(&a, p, Sampling::Exhaustive, &opts)?;
                t.push(
                    RowKey::new(instance, p),
                    vec![
                        instance.into(),
                        seed.into(),
                        n.into(),
                        p.into(),
                        r.root.into(),
                        r.z_tilde.into(),
                        r.ratio.into(),
                        r.easy_slack.into(),
                        r.solver_converged.into(),
                        r.solver_residual.into(),
                    ],
                );
            }
            instance += 1;
        }
    }
    Ok(t)
}

fn projection(config: &Config) -> CliResult<Table> {
    let ps = exponents(config, &[2.0, 3.0, 4.0, 6.0]);
    let steps = trials(config, 200)?;
    let mut t = Table::new(&[
        "instance",
        "seed",
        "n",
        "p",
        "roundtrip_error",
        "idempotence_error",
        "eq_zp_slack",
        "q_norm_lower_bound",
        "q_norm_argmax",
        "sqrt_p",
    ]);
    for (instance, n) in sizes(config, &[1, 2])?.into_iter().enumerate() {
        let instance = instance as u64;
        let seed = substream_seed(config.seed, instance);
        let spec = RandomSpec::new(seed, Ensemble::ComplexGaussian);
        let a = random_matrix(&spec, n, n)?;
        let roundtrip = phi(&overline(&a)?)?.max_abs_diff(&a)?;
        let blocks = (0..1u64 << (n * n))
            .map(|i| random_matrix(&spec.substream(i + 1), n, n))
            .collect::<schatten::Result<Vec<_>>>()?;
        let d = BlockDiag::new(n, blocks)?;
        let once = q_project(&d)?;
        let idempotence = q_project(&once)?.max_abs_diff(&once)?;
        let dim = n << (n * n);
        let dense = random_matrix(&spec.substream(0), dim, dim)?;
        for &p in &ps {
            let slack = if p > 2.0 && p.is_finite() {
                Some(verify_eq_zp(&dense, n, p)?)
            } else {
                None
            };
            let q = estimate_q_norm(n, p, steps, seed)?;
            t.push(
                RowKey::new(instance, p),
                vec![
                    instance.into(),
                    seed.into(),
                    n.into(),
                    p.into(),
                    roundtrip.into(),
                    idempotence.into(),
                    slack.into(),
                    q.lower_bound.into(),
                    format!("{:?}", q.argmax_kind).into(),
                    p.sqrt().into(),
                ],
            );
        }
    }
    Ok(t)
}

fn embedding(config: &Config) -> CliResult<Table> {
    let mut t = Table::new(&[
        "instance",
        "seed",
        "p",
        "k",
        "n",
        "average",
        "k_constant",
        "easy_slack",
        "d",
        "bound",
        "holds",
        "dimension_holds",
    ]);
    let mut jobs: Vec<(u64, u64, EmbeddingInstance)> = Vec::new();
    match &config.input {
        Some(path) => {
            let inst = EmbeddingInstance::from_json_str(&read_text(path)?)?;
            if config.p.is_empty() {
                jobs.push((0, config.seed, inst));
            } else {
                for &p in &config.p {
                    let retyped = EmbeddingInstance::new(inst.ts().to_vec(), p, inst.constant)?;
                    jobs.push((0, config.seed, retyped));
                }
            }
        }
        None => {
            let k = config.k.unwrap_or(4);
            let ns = sizes(config, &[k])?;
            let ps = exponents(config, &[1.5, 3.0, 4.0]);
            let count = trials(config, 5)?;
            let mut instance = 0u64;
            for n in ns {
                for _ in 0..count {
                    let seed = substream_seed(config.seed, instance);
                    for &p in &ps {
                        let inst = perturbed_diagonal_instance(k, n, p, EMBEDDING_DELTA, seed)?;
                        jobs.push((instance, seed, inst));
                    }
                    instance += 1;
                }
            }
        }
    }
    for (instance, seed, inst) in jobs {
        let a = theorem_tight_audit(&inst)?;
        t.push(
            RowKey::new(instance, inst.p),
            vec![
                instance.into(),
                seed.into(),
                inst.p.into(),
                inst.k().into(),
                inst.n().into(),
                a.average.into(),
                a.k_constant.into(),
                a.easy_slack.into(),
                a.rank.d.into(),
                a.rank.bound.into(),
                a.rank.holds.into(),
                a.dimension_holds.into(),
            ],
        );
    }
    Ok(t)
}

fn paving_find(config: &Config) -> CliResult<Table> {
    let ps = exponents(config, &[4.0]);
    let strategy: Strategy = config.strategy.into();
    let mut t = Table::new(&[
        "instance",
        "seed",
        "size",
        "p",
        "strategy",
        "sigma",
        "v_power",
        "target",
        "fallback_used",
        "original_norm",
        "paved_norm",
        "guaranteed_bound",
    ]);
    for (instance, (seed, a)) in paving_instances(config, 8)?.into_iter().enumerate() {
        let instance = instance as u64;
        for &p in &ps {
            let r = pave(&a, p, PavingTarget::Depth(1), strategy, seed)?;
            let c = &r.certificate;
            let split = c.per_level_splits.first();
            let sigma = split.map(|s| {
                s.sigma
                    .members()
                    .iter()
                    .filter(|&&i| i < a.rows())
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            });
            t.push(
                RowKey::new(instance, p),
                vec![
                    instance.into(),
                    seed.into(),
                    a.rows().into(),
                    p.into(),
                    format!("{strategy:?}").to_lowercase().into(),
                    sigma.into(),
                    split.map(|s| s.v_power).into(),
                    (2f64.powf(-p) * c.original_norm.powf(p)).into(),
                    split.map(|s| s.fallback_used).into(),
                    c.original_norm.into(),
                    c.paved_norm.into(),
                    c.guaranteed_bound.into(),
                ],
            );
        }
    }
    Ok(t)
}

fn paving_decay(config: &Config) -> CliResult<Table> {
    let ps = exponents(config, &[4.0]);
    let strategy: Strategy = config.strategy.into();
    let mut t = Table::new(&[
        "instance",
        "seed",
        "size",
        "p",
        "depth",
        "parts_bound",
        "paved_norm",
        "guaranteed_bound",
        "formula_depth",
    ]);
    for (instance, (seed, a)) in paving_instances(config, 16)?.into_iter().enumerate() {
        let instance = instance as u64;
        for &p in &ps {
            let target = match (config.depth, config.epsilon) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage(
                        "give --depth or --epsilon, not both".into(),
                    ))
                }
                (Some(d), None) => PavingTarget::Depth(d),
                (None, Some(e)) => PavingTarget::Epsilon(e),
                (None, None) => PavingTarget::Depth(singleton_depth(a.rows())),
            };
            let r = pave(&a, p, target, strategy, seed)?;
            let c = &r.certificate;
            let norms = std::iter::once(c.original_norm).chain(c.level_norms.iter().copied());
            let bounds = std::iter::once(c.original_norm).chain(c.level_bounds.iter().copied());
            for (level, (norm, bound)) in norms.zip(bounds).enumerate() {
                let mut key = RowKey::new(instance, p);
                key.extra = level as u64;
                t.push(
                    key,
                    vec![
                        instance.into(),
                        seed.into(),
                        a.rows().into(),
                        p.into(),
                        level.into(),
                        (1u64 << level.min(63)).into(),
                        norm.into(),
                        bound.into(),
                        r.formula_depth.into(),
                    ],
                );
            }
        }
    }
    Ok(t)
}

fn prop_average(config: &Config) -> CliResult<Table> {
    let ps = exponents(config, &[4.0]);
    let identities_hold = (2..=12).try_fold(true, |acc, m| {
        Ok::<_, schatten::Error>(acc && binomial_identities(m)?.holds())
    })?;
    let mut t = Table::new(&[
        "instance",
        "seed",
        "m",
        "p",
        "subsets",
        "average",
        "trace_power",
        "lower_bound_2p",
        "lower_bound_sharp",
        "pair_ratio",
        "binomial_identities",
    ]);
    for (instance, (seed, a)) in paving_instances(config, 4)?.into_iter().enumerate() {
        let instance = instance as u64;
        for &p in &ps {
            let r = proposition_average(&a, p)?;
            let pair = if r.m >= 2 {
                Some(binomial_identities(r.m as u64)?.pair_ratio.0.to_string())
            } else {
                None
            };
            t.push(
                RowKey::new(instance, p),
                vec![
                    instance.into(),
                    seed.into(),
                    r.m.into(),
                    p.into(),
                    r.subsets.into(),
                    r.average.into(),
                    r.trace_power.into(),
                    r.lower_bound_2p.into(),
                    r.lower_bound_sharp.into(),
                    pair.into(),
                    identities_hold.into(),
                ],
            );
        }
    }
    Ok(t)
}
