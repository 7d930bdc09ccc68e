//! The `run`, `bench` and `export` subcommands.

use std::path::Path;

use csdr_core::analysis::{bench_csv, normalized_objective, BenchRow};
use csdr_core::chordal::CliqueTree;
use csdr_core::solver::{export_conelp, Status};
use serde::Serialize;

use crate::config::{Method, RunConfig};
use crate::error::{CliError, CliResult, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_OPTIMAL};
use crate::pipeline::{load_network, prepare, Outcome, Prepared, Problem};

fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))?;
    write(path, &(text + "\n"))
}

#[derive(Serialize)]
struct TreeDump<'a> {
    /// External bus id of every internal index.
    bus_ids: Vec<usize>,
    cliques: &'a [Vec<usize>],
    parent: &'a [Option<usize>],
    separators: Vec<Vec<usize>>,
}

fn dump_tree(path: &Path, prepared: &Prepared, tree: &CliqueTree) -> CliResult<()> {
    let dump = TreeDump {
        bus_ids: prepared.network.buses.iter().map(|b| b.id).collect(),
        cliques: &tree.cliques,
        parent: &tree.parent,
        separators: tree.separators(),
    };
    write_json(path, &dump)
}

fn export(cfg: &RunConfig, method: Method, problem: &Problem) -> CliResult<()> {
    if let Some((format, path)) = &cfg.export {
        let header = vec![format!("case {}", cfg.case_name()), format!("relaxation {method}")];
        write(path, &export_conelp(problem.lp(), *format, &header)?)?;
    }
    Ok(())
}

/// Build the configured problem, then write the tree dump and export files
/// that were asked for.
fn setup(cfg: &RunConfig) -> CliResult<(Prepared, Method, Problem)> {
    let prepared = prepare(load_network(cfg)?)?;
    let method = cfg.methods[0];
    let problem = prepared.build(method, cfg.t_fill, cfg.t_size)?;
    if let Some(path) = &cfg.dump_tree {
        dump_tree(path, &prepared, prepared.tree_of(&problem))?;
    }
    export(cfg, method, &problem)?;
    Ok((prepared, method, problem))
}

/// Solve one relaxation and write `solution.json`, `rank.json`,
/// `feasibility.json` and `counts.json` into the report directory.
pub fn run(cfg: &RunConfig) -> CliResult<i32> {
    let (prepared, method, problem) = setup(cfg)?;
    let outcome = prepared.solve(method, &problem, &cfg.solver)?;
    let case = cfg.case_name();
    if let Some(dir) = &cfg.report {
        write_json(&dir.join("solution.json"), &outcome.report(&case))?;
        write_json(&dir.join("counts.json"), &outcome.counts)?;
        if let Some(rank) = &outcome.rank {
            write_json(&dir.join("rank.json"), rank)?;
        }
        if let Some(feas) = &outcome.feasibility {
            write_json(&dir.join("feasibility.json"), feas)?;
        }
    }
    let real = &outcome.solution.real;
    println!("case {case}, relaxation {method}");
    println!("constraints r = {}, s = {}, ratio {:.3}", outcome.counts.r, outcome.counts.s, outcome.counts.ratio);
    println!("status {} after {} iterations, objective {:.6}", real.status, real.iterations, real.objective);
    if let Some(rank) = &outcome.rank {
        println!("min eigenvalue ratio {:.3e} (rank one: {})", rank.min_ratio, rank.rank_one);
    }
    match (&outcome.recovered, &outcome.feasibility) {
        (Ok(rec), Some(feas)) => println!(
            "recovered cost {:.6}, max constraint violation {:.3e}",
            rec.objective,
            feas.max_violation()
        ),
        (Err(e), _) if real.status == Status::Optimal => eprintln!("csdr: no voltage recovery: {e}"),
        _ => {}
    }
    Ok(outcome.exit_code())
}

/// Write the configured problem in an interchange format without solving.
pub fn export_only(cfg: &RunConfig) -> CliResult<i32> {
    if cfg.export.is_none() {
        return Err(CliError::Usage("export needs --export=FMT:PATH".into()));
    }
    setup(cfg)?;
    Ok(EXIT_OPTIMAL)
}

fn bench_row(case: &str, outcome: &Outcome, base: Option<f64>) -> BenchRow {
    let real = &outcome.solution.real;
    let objective = (real.status == Status::Optimal).then_some(real.objective);
    BenchRow {
        case: case.to_string(),
        strategy: outcome.method.to_string(),
        constraints: outcome.counts.r,
        consistency: outcome.counts.s,
        constraint_ratio: outcome.counts.ratio,
        blocks: outcome.counts.block_orders.len(),
        max_block_order: outcome.counts.block_orders.iter().copied().max().unwrap_or(0),
        status: real.status.to_string(),
        iterations: real.iterations,
        objective,
        normalized_objective: objective.zip(base).and_then(|(o, b)| normalized_objective(o, b).ok()),
        min_eigenvalue_ratio: outcome.rank.as_ref().map(|r| r.min_ratio),
        solve_seconds: real.wall_time,
    }
}

/// Solve every listed relaxation, plus the unconverted one as the
/// normalization base, concurrently. Writes `bench.csv` to the report
/// directory and to standard output.
pub fn bench(cfg: &RunConfig) -> CliResult<i32> {
    let prepared = prepare(load_network(cfg)?)?;
    let mut methods = cfg.methods.clone();
    let base_index = match methods.iter().position(|m| *m == Method::Unconverted) {
        Some(k) => k,
        None => {
            methods.push(Method::Unconverted);
            methods.len() - 1
        }
    };
    let outcomes: Vec<CliResult<Outcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = methods
            .iter()
            .map(|&m| {
                let prepared = &prepared;
                scope.spawn(move || {
                    let problem = prepared.build(m, cfg.t_fill, cfg.t_size)?;
                    prepared.solve(m, &problem, &cfg.solver)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    let outcomes = outcomes.into_iter().collect::<CliResult<Vec<_>>>()?;
    let base = &outcomes[base_index];
    let base_obj = (base.status() == Status::Optimal).then_some(base.solution.objective());
    let case = cfg.case_name();
    let rows: Vec<BenchRow> = outcomes[..cfg.methods.len()].iter().map(|o| bench_row(&case, o, base_obj)).collect();
    let csv = bench_csv(&rows)?;
    if let Some(dir) = &cfg.report {
        write(&dir.join("bench.csv"), &csv)?;
    }
    print!("{csv}");
    let statuses: Vec<Status> = outcomes.iter().map(Outcome::status).collect();
    Ok(if statuses.iter().any(|s| matches!(s, Status::PrimalInfeasible | Status::DualInfeasible)) {
        EXIT_INFEASIBLE
    } else if statuses.iter().any(|&s| s != Status::Optimal) {
        EXIT_NUMERICAL
    } else {
        EXIT_OPTIMAL
    })
}
