//! The `ltlfmt` command line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use crate::fragments::{check_k_bl, classify};
use crate::parser::{parse_problem_as, Problem};
use crate::semantics::{bounded_sat, parse_trace, print_trace, Bounded, Run, TraceChecker};
use crate::smt::{SolverConfig, DEFAULT_TIMEOUT_MS};
use crate::syntax::Theory;
use crate::tableau::{solve, to_dot, SolveOutcome, Stats, TableauConfig};

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_UNKNOWN: i32 = 30;
pub const EXIT_ERROR: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "ltlfmt", version, about = "Satisfiability of LTL modulo theories over finite traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Override the theory declared in the problem file (LRA, LIA or EUF).
    #[arg(long)]
    theory: Option<Theory>,
    /// Solver command line; defaults to $LTLFMT_SOLVER, then `z3 -in`.
    #[arg(long)]
    solver_cmd: Option<String>,
    /// Per-query solver timeout in milliseconds.
    #[arg(long)]
    timeout_ms: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide satisfiability with the tableau.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Print the witness trace of a SAT verdict.
        #[arg(long)]
        witness: bool,
        /// Print the verdict, witness and statistics as one JSON object.
        #[arg(long)]
        json: bool,
        /// Disable the PRUNE rule.
        #[arg(long)]
        no_prune: bool,
        /// Reject branches after this many STEP applications.
        #[arg(long)]
        max_steps: Option<usize>,
        /// Give up with UNKNOWN after creating this many nodes.
        #[arg(long)]
        node_budget: Option<usize>,
        /// Threads exploring branches; the verdict and witness do not depend on it.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the tableau as a Graphviz file.
        #[arg(long, value_name = "PATH")]
        dump_tableau: Option<PathBuf>,
    },
    /// Report the decidable fragments a formula belongs to.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also check k-bounded lookback.
        #[arg(long, value_name = "K")]
        check_bl: Option<usize>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Search for models of length 1 to N by unrolling.
    Bmc {
        file: PathBuf,
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the formula on a trace file.
    CheckTrace {
        file: PathBuf,
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}:{1}")]
    Parse(PathBuf, crate::parser::ParseError),
    #[error("{0}:{1}")]
    Trace(PathBuf, crate::semantics::TraceError),
    #[error(transparent)]
    Solve(#[from] crate::tableau::SolveError),
    #[error(transparent)]
    Smt(#[from] crate::smt::SmtError),
    #[error(transparent)]
    Semantics(#[from] crate::semantics::SemanticsError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))
}

fn load(path: &Path, common: &Common) -> Result<Problem, CliError> {
    parse_problem_as(&read(path)?, common.theory).map_err(|e| CliError::Parse(path.to_owned(), e))
}

fn solver_config(common: &Common, problem: &Problem) -> SolverConfig {
    let timeout = common.timeout_ms.or(problem.options.timeout_ms).unwrap_or(DEFAULT_TIMEOUT_MS);
    SolverConfig::resolve(common.solver_cmd.as_deref(), timeout)
}

fn witness_json(run: &Run) -> Json {
    run.states
        .iter()
        .map(|st| {
            Json::Object(st.iter().map(|(k, v)| (k.to_string(), Json::String(v.to_string()))).collect())
        })
        .collect()
}

fn stats_json(s: &Stats) -> Json {
    json!({
        "nodes": s.nodes,
        "poised": s.poised,
        "max_steps_reached": s.max_steps_reached,
        "rejected_contradiction": s.rejected_contradiction,
        "rejected_prune": s.rejected_prune,
        "cut_step_bound": s.cut_step_bound,
        "solver_queries": s.solver_queries,
        "solver_unknowns": s.solver_unknowns,
    })
}

/// Parses `args` (including the program name) and runs the command,
/// returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Solve { file, common, witness, json, no_prune, max_steps, node_budget, workers, dump_tableau } => {
            let problem = load(&file, &common)?;
            let defaults = TableauConfig::default();
            let o = &problem.options;
            let cfg = TableauConfig {
                prune: !no_prune && o.prune.unwrap_or(defaults.prune),
                max_steps: max_steps.or(o.max_steps).unwrap_or(defaults.max_steps),
                node_budget: node_budget.or(o.node_budget).unwrap_or(defaults.node_budget),
                workers: workers.max(1),
                solver: solver_config(&common, &problem),
                record_tree: dump_tableau.is_some(),
            };
            let sig = Arc::new(problem.signature);
            let sol = solve(&sig, &problem.formula, &cfg)?;
            let (verdict, code, run) = match &sol.outcome {
                SolveOutcome::Sat { witness, .. } => ("SAT".to_string(), EXIT_SAT, Some(witness)),
                SolveOutcome::Unsat => ("UNSAT".to_string(), EXIT_UNSAT, None),
                SolveOutcome::Unknown(r) => (format!("UNKNOWN ({r})"), EXIT_UNKNOWN, None),
            };
            if let (Some(path), Some(tree)) = (&dump_tableau, &sol.tree) {
                std::fs::write(path, to_dot(tree, run)).map_err(|e| CliError::Io(path.clone(), e))?;
            }
            if json {
                let (v, reason) = match &sol.outcome {
                    SolveOutcome::Sat { .. } => ("SAT", None),
                    SolveOutcome::Unsat => ("UNSAT", None),
                    SolveOutcome::Unknown(r) => ("UNKNOWN", Some(r.to_string())),
                };
                let mut j = json!({
                    "verdict": v,
                    "witness": run.map(witness_json),
                    "stats": stats_json(&sol.stats),
                });
                if let Some(r) = reason {
                    j["reason"] = Json::String(r);
                }
                writeln!(out, "{j}")?;
            } else {
                writeln!(out, "{verdict}")?;
                if let (true, Some(r)) = (witness, run) {
                    write!(out, "{}", print_trace(r))?;
                }
            }
            Ok(code)
        }
        Command::Classify { file, common, check_bl, json } => {
            let problem = load(&file, &common)?;
            let mut report = classify(&problem.signature, &problem.formula);
            if let Some(k) = check_bl {
                let cfg = solver_config(&common, &problem);
                let sig = Arc::new(problem.signature.clone());
                report.bl = Some(check_k_bl(&sig, &problem.formula, k, &cfg)?);
            }
            if json {
                writeln!(out, "{}", report.to_json())?;
            } else {
                write!(out, "{report}")?;
            }
            Ok(0)
        }
        Command::Bmc { file, n, common } => {
            let problem = load(&file, &common)?;
            let cfg = solver_config(&common, &problem);
            let sig = Arc::new(problem.signature.clone());
            let mut inconclusive = false;
            for len in 1..=n {
                match bounded_sat(&sig, &problem.formula, len, &cfg)? {
                    Bounded::Sat(run) => {
                        writeln!(out, "SAT (length {len})")?;
                        write!(out, "{}", print_trace(&run))?;
                        return Ok(EXIT_SAT);
                    }
                    Bounded::UnsatAtLength => {}
                    Bounded::Inconclusive(why) => {
                        writeln!(out, "length {len}: inconclusive ({why})")?;
                        inconclusive = true;
                    }
                }
            }
            let how = if inconclusive { "no model found" } else { "no model" };
            writeln!(out, "UNKNOWN ({how} up to length {n})")?;
            Ok(EXIT_UNKNOWN)
        }
        Command::CheckTrace { file, trace, common } => {
            let problem = load(&file, &common)?;
            let run = parse_trace(&problem.signature, &read(&trace)?).map_err(|e| CliError::Trace(trace.clone(), e))?;
            let cfg = solver_config(&common, &problem);
            let mut checker = TraceChecker::new(Arc::new(problem.signature), cfg);
            let holds = checker.holds(&run, 0, &problem.formula)?;
            writeln!(out, "{holds}")?;
            Ok(0)
        }
    }
}
