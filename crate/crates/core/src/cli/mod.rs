//! The `warpspec` command line: `predict`, `compute` and `verify`.

pub mod compute;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::Error;
use crate::predictor::predict;
use crate::verifier::{run_suite, Mutation};
pub use config::{Overrides, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "warpspec", version, about = "Spectra of Hodge Laplacians on warped products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MutateArg {
    SwapCoupling,
    WrongCross,
}

impl From<MutateArg> for Mutation {
    fn from(m: MutateArg) -> Self {
        match m {
            MutateArg::SwapCoupling => Mutation::SwapCoupling,
            MutateArg::WrongCross => Mutation::WrongTypeIICross,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the predicted spectrum for every form degree.
    Predict {
        #[arg(long = "n", short = 'n')]
        dim: usize,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
    },
    /// Solve the type I mode operators and compare with the prediction.
    Compute {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
        /// Comma separated truncation lengths.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "n")]
        dim: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        min_nodes: Option<usize>,
    },
    /// Run the reduction checks and print one JSON line per refinement.
    Verify {
        /// Inject a defect; the run is then expected to fail.
        #[arg(long, num_args = 0..=1, default_missing_value = "swap-coupling")]
        mutate: Option<MutateArg>,
    },
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Empty(_) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

fn predict_table(dim: usize, a: f64, b: f64, out: &mut (dyn Write + Send)) -> Result<(), Error> {
    let mut rows = Vec::with_capacity(dim + 1);
    for p in 0..=dim {
        let pr = predict(dim, p, a, b)?;
        let sc = serde_json::to_value(pr.sc).expect("enum serializes");
        rows.push([p.to_string(), pr.ess.to_string(), pr.ac.to_string(), sc.as_str().unwrap_or("").to_string(), pr.case.to_string()]);
    }
    let head = ["p", "ess", "ac", "sc", "case"];
    let mut width = head.map(str::len);
    for r in &rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(&head.map(String::from)));
    for r in &rows {
        let _ = writeln!(out, "{}", line(r));
    }
    Ok(())
}

fn compute(config: RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32 {
    let sweep = match compute::sweep(&config) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let map = match compute::shared_map(&config) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_for(&e);
        }
    };
    let reports: Vec<_> = sweep.par_iter().map(|(p, modes)| compute::run_degree(&config, &map, *p, modes)).collect();
    let (mut failed, mut solver) = (false, false);
    for ((p, _), report) in sweep.iter().zip(reports) {
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(err, "error: p = {p}: {e}");
                solver = true;
                continue;
            }
        };
        for m in report.modes.iter().filter(|m| m.error.is_some()) {
            let _ = writeln!(err, "solver error: p = {p}, k = {}: {}", m.mode_k, m.error.as_deref().unwrap_or(""));
        }
        solver |= report.verdict.solver_errors > 0;
        failed |= !report.verdict.pass;
        if let Err(e) = compute::write_outputs(&config, &report) {
            let _ = writeln!(err, "error: cannot write outputs to {}: {e}", config.out.display());
            return EXIT_USAGE;
        }
        let _ = writeln!(out, "{}", report.summary());
    }
    if solver {
        EXIT_SOLVER
    } else if failed {
        EXIT_FAIL
    } else {
        EXIT_OK
    }
}

fn verify(mutation: Mutation, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32 {
    match run_suite(mutation) {
        Ok(report) => {
            let _ = write!(out, "{}", report.json_lines());
            for c in &report.checks {
                let verdict = if c.passed() { "pass" } else { "fail" };
                let _ = writeln!(err, "{}: min order {:.3} {verdict}", c.check, c.min_order());
            }
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_SOLVER
        }
    }
}

/// Executes a parsed command.
pub fn execute(cli: Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32 {
    match cli.command {
        Command::Predict { dim, a, b } => match predict_table(dim, a, b, out) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                exit_for(&e)
            }
        },
        Command::Compute { config, p, kmax, ladder, out: dir, dim, a, b, epsilon, c, cutoff, tolerance, min_nodes } => {
            let ov = Overrides { p, kmax, ladder, out: dir, dim, a, b, epsilon, c, cutoff, tolerance, min_nodes };
            match RunConfig::load(&config, &ov) {
                Ok(cfg) => compute(cfg, out, err),
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Command::Verify { mutate } => verify(mutate.map_or(Mutation::None, Mutation::from), out, err),
    }
}

fn thread_count() -> Result<Option<usize>, String> {
    match std::env::var("WARP_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("WARP_THREADS = {v:?} is not a positive integer")),
        },
    }
}

/// Parses `args` and runs the command, returning the process exit code.
/// `WARP_THREADS` caps the worker pool.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    match threads {
        None => execute(cli, out, err),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli, out, err)),
            Err(e) => {
                let _ = writeln!(err, "error: cannot start {n} worker threads: {e}");
                EXIT_SOLVER
            }
        },
    }
}
