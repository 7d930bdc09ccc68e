//! The parse → preprocess → formulate → convert → solve → analyze chain.

use csdr_core::analysis::{
    check_feasibility, rank_report, recover_unconverted, recover_voltage, FeasibilityReport, RankReport,
    RecoveredSolution, RecoveryOptions,
};
use csdr_core::chordal::{amalgamate, clique_tree_of, CliqueTree, Ordering};
use csdr_core::conversion::{aggregate_pattern, convert, count_report, ConvertedProblem, CountReport};
use csdr_core::formulation::{build_sdr, soc_minor_relaxation, ConeLp, VariableMap};
use csdr_core::netmodel::{
    apply_min_resistance, fix_tight_generators, parse_flow_list, parse_matpower_case, parse_network_json,
    FlowSelection, Network,
};
use csdr_core::solver::{solve_hermitian, Certificate, HermitianSolution, Residuals, SolverOptions, Status};
use serde::Serialize;

use crate::config::{read, FlowSource, InputFormat, Method, RunConfig};
use crate::error::{CliResult, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_OPTIMAL};

/// Parse the input, select the flow-limited set and apply the generator
/// fixing and minimum resistance rules.
pub fn load_network(cfg: &RunConfig) -> CliResult<Network> {
    let text = read(&cfg.input)?;
    let mut net = match cfg.format {
        InputFormat::Matpower => parse_matpower_case(&text)?,
        InputFormat::Json => parse_network_json(&text)?,
    };
    let selection = match &cfg.flows {
        FlowSource::All => FlowSelection::All,
        FlowSource::None => FlowSelection::None,
        FlowSource::File(path) => FlowSelection::Ids(parse_flow_list(&read(path)?)?),
    };
    net.select_flow_limits(&selection)?;
    let net = fix_tight_generators(&net, cfg.fixing_tolerance);
    let net = apply_min_resistance(&net, cfg.min_resistance);
    net.validate()?;
    Ok(net)
}

/// The relaxation and the clique tree of its aggregate sparsity pattern.
pub struct Prepared {
    pub network: Network,
    pub lp: ConeLp,
    pub vm: VariableMap,
    pub tree: CliqueTree,
}

pub fn prepare(network: Network) -> CliResult<Prepared> {
    let (lp, vm) = build_sdr(&network)?;
    let (_, tree) = clique_tree_of(&aggregate_pattern(&lp, &vm), &Ordering::Amd)?;
    Ok(Prepared { network, lp, vm, tree })
}

pub enum Problem {
    Plain(ConeLp),
    Minors(ConeLp),
    Converted(Box<ConvertedProblem>),
}

impl Problem {
    pub fn lp(&self) -> &ConeLp {
        match self {
            Problem::Plain(lp) | Problem::Minors(lp) => lp,
            Problem::Converted(c) => &c.lp,
        }
    }
}

impl Prepared {
    pub fn build(&self, method: Method, t_fill: usize, t_size: usize) -> CliResult<Problem> {
        Ok(match method {
            Method::Unconverted => Problem::Plain(self.lp.clone()),
            Method::SocMinors => Problem::Minors(soc_minor_relaxation(&self.lp, &self.vm, &self.network.edges())?),
            Method::Converted { strategy, amalgamated } => {
                let tree = if amalgamated { amalgamate(&self.tree, t_fill, t_size) } else { self.tree.clone() };
                let edges = self.network.edges();
                Problem::Converted(Box::new(convert(&self.lp, &self.vm, &tree, strategy, Some(&edges))?))
            }
        })
    }

    /// Clique tree the problem is built on; the unconverted tree otherwise.
    pub fn tree_of<'a>(&'a self, problem: &'a Problem) -> &'a CliqueTree {
        match problem {
            Problem::Converted(c) => &c.tree,
            _ => &self.tree,
        }
    }

    /// Constraint counts; unconverted problems report one block of order `n`
    /// and the minor relaxation counts its linking rows as `s`.
    pub fn counts(&self, problem: &Problem) -> CountReport {
        let r = self.lp.num_rows();
        match problem {
            Problem::Converted(c) => count_report(c),
            Problem::Plain(_) => CountReport {
                r,
                s: 0,
                ratio: 1.0,
                block_orders: vec![self.vm.order],
                sum_squared_orders: self.vm.order * self.vm.order,
                naive_real_s: 0,
            },
            Problem::Minors(lp) => CountReport {
                r,
                s: lp.num_rows() - r,
                ratio: lp.num_rows() as f64 / r as f64,
                block_orders: Vec::new(),
                sum_squared_orders: 0,
                naive_real_s: 0,
            },
        }
    }

    pub fn solve(&self, method: Method, problem: &Problem, options: &SolverOptions) -> CliResult<Outcome> {
        let solution = solve_hermitian(problem.lp(), options)?;
        let counts = self.counts(problem);
        let opts = RecoveryOptions::default();
        let (rank, recovered) = if solution.status() != Status::Optimal {
            (None, Err(format!("solver status {}", solution.status())))
        } else {
            match problem {
                Problem::Plain(lp) => (
                    Some(rank_report(&[self.vm.x_matrix(&solution.z)], opts.rank_threshold)?),
                    recover_unconverted(lp, &solution.z, &self.network, &self.vm, &opts).map_err(|e| e.to_string()),
                ),
                Problem::Converted(c) => (
                    Some(rank_report(&c.blocks(&solution.z), opts.rank_threshold)?),
                    recover_voltage(c, &solution.z, &self.network, &self.vm, &opts).map_err(|e| e.to_string()),
                ),
                Problem::Minors(_) => (None, Err("the 2x2 minor relaxation has no matrix blocks".to_string())),
            }
        };
        let feasibility = match &recovered {
            Ok(rec) => Some(check_feasibility(&self.network, rec)?),
            Err(_) => None,
        };
        Ok(Outcome {
            method,
            counts,
            solution,
            rank,
            recovered,
            feasibility,
        })
    }
}

pub struct Outcome {
    pub method: Method,
    pub counts: CountReport,
    pub solution: HermitianSolution,
    pub rank: Option<RankReport>,
    pub recovered: Result<RecoveredSolution, String>,
    pub feasibility: Option<FeasibilityReport>,
}

/// Contents of `solution.json`.
#[derive(Debug, Serialize)]
pub struct SolutionReport<'a> {
    pub case: &'a str,
    pub method: String,
    pub status: Status,
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub certificate: Option<&'a Certificate>,
    pub recovered: Option<&'a RecoveredSolution>,
    pub recovery_error: Option<&'a str>,
    pub wall_time: f64,
}

impl Outcome {
    pub fn status(&self) -> Status {
        self.solution.status()
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.status())
    }

    pub fn report<'a>(&'a self, case: &'a str) -> SolutionReport<'a> {
        let real = &self.solution.real;
        SolutionReport {
            case,
            method: self.method.to_string(),
            status: real.status,
            objective: real.objective,
            dual_objective: real.dual_objective,
            iterations: real.iterations,
            residuals: real.residuals,
            certificate: real.certificate.as_ref(),
            recovered: self.recovered.as_ref().ok(),
            recovery_error: self.recovered.as_ref().err().map(String::as_str),
            wall_time: real.wall_time,
        }
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal => EXIT_OPTIMAL,
        Status::PrimalInfeasible | Status::DualInfeasible => EXIT_INFEASIBLE,
        Status::IterationLimit | Status::NumericalFailure => EXIT_NUMERICAL,
    }
}
