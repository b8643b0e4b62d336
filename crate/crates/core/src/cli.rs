//! The `qminimax` command line.
//!
//! Exit codes: 0 when the requested certificate holds, 1 for unreadable or
//! invalid input, 2 when the solver stopped at `max_iters` without reaching
//! `gap_tol` (the report is still written).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::classical::solve_classical;
use crate::solver::solve;
use crate::specfile::{
    parse_state, read_document, OracleReport, SaddleReport, SpecDocument, SpecError,
};
use crate::verify::run_all;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qminimax", version, about = "Certified minimax values for energy-capped quantum games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Blue,
    Red,
}

#[derive(Debug, Default, Clone, clap::Args)]
pub struct SolverOverrides {
    /// Certified gap at which the solver stops.
    #[arg(long)]
    pub gap_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a game and write the saddle report.
    Solve {
        spec: PathBuf,
        /// Report path; CSV sidecars are written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        solver: SolverOverrides,
    },
    /// Run the randomized bound suites against a game.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        solver: SolverOverrides,
    },
    /// Best response of one side to a given opponent state.
    BestResponse {
        spec: PathBuf,
        #[arg(long, value_enum)]
        side: Side,
        /// JSON file holding the opponent's density matrix.
        opponent_state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a classical matrix game and its quantum lift.
    Classical {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverOverrides,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match cli.command {
        Command::Solve { spec, out, seed, solver } => {
            cmd_solve(&spec, out.as_deref(), seed, &solver, stdout, stderr)
        }
        Command::Verify { spec, samples, seed, solver } => {
            cmd_verify(&spec, samples, seed, &solver, stdout, stderr)
        }
        Command::BestResponse { spec, side, opponent_state, out } => {
            cmd_best_response(&spec, side, &opponent_state, out.as_deref(), stdout, stderr)
        }
        Command::Classical { spec, out, solver } => {
            cmd_classical(&spec, out.as_deref(), &solver, stdout, stderr)
        }
    }
}

fn load(path: &Path, seed: Option<u64>, o: &SolverOverrides) -> Result<SpecDocument, SpecError> {
    let mut doc = read_document(path)?;
    let s = doc.solver_mut();
    if o.gap_tol.is_some() {
        s.gap_tol = o.gap_tol;
    }
    if o.max_iters.is_some() {
        s.max_iters = o.max_iters;
    }
    if seed.is_some() {
        s.seed = seed;
    }
    Ok(doc)
}

fn fail(stderr: &mut dyn Write, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(stderr, "error: {msg}");
    EXIT_INVALID
}

fn emit(out: Option<&Path>, body: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, body),
        None => writeln!(stdout, "{body}"),
    }
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn cmd_solve(
    spec: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    overrides: &SolverOverrides,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let game = match load(spec, seed, overrides).and_then(|d| d.build()) {
        Ok(g) => g,
        Err(e) => return fail(stderr, e),
    };
    let result = match solve(&game) {
        Ok(r) => r,
        Err(e) => return fail(stderr, e),
    };
    let report = match SaddleReport::new(&game, &result, now()) {
        Ok(r) => r,
        Err(e) => return fail(stderr, e),
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    let written = emit(out, &body, stdout).and_then(|()| match out {
        Some(p) => {
            std::fs::write(sidecar(p, "gap_history"), result.gap_history_csv())?;
            std::fs::write(sidecar(p, "marginals_blue"), game.blue_marginal(&result.rho_star).map(|m| m.to_csv()).unwrap_or_default())?;
            std::fs::write(sidecar(p, "marginals_red"), game.red_marginal(&result.phi_star).map(|m| m.to_csv()).unwrap_or_default())?;
            writeln!(
                stdout,
                "value {:?} in [{:?}, {:?}], gap {:e}, {} iterations",
                result.value, result.value_lower, result.value_upper, result.gap, result.iterations
            )
        }
        None => Ok(()),
    });
    if let Err(e) = written {
        return fail(stderr, format!("cannot write report: {e}"));
    }
    if result.converged {
        EXIT_OK
    } else {
        let _ = writeln!(
            stderr,
            "warning: gap {:e} above tolerance {:e} after {} iterations",
            result.gap, game.params.gap_tol, result.iterations
        );
        EXIT_NOT_CONVERGED
    }
}

pub fn cmd_verify(
    spec: &Path,
    samples: usize,
    seed: Option<u64>,
    overrides: &SolverOverrides,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    if samples == 0 {
        return fail(stderr, "--samples must be at least 1");
    }
    let game = match load(spec, seed, overrides).and_then(|d| d.build()) {
        Ok(g) => g,
        Err(e) => return fail(stderr, e),
    };
    let (reports, result) = match run_all(&game, samples, game.params.seed) {
        Ok(r) => r,
        Err(e) => return fail(stderr, e),
    };
    let _ = writeln!(
        stdout,
        "solve: value {:?}, gap {:e}, converged {}",
        result.value, result.gap, result.converged
    );
    let mut ok = true;
    for r in &reports {
        ok &= r.passed();
        let _ = writeln!(
            stdout,
            "{:<22} trials {:>6}  max violation {:>12.3e}  slack {:.1e}  {}",
            r.name,
            r.trials,
            r.max_violation,
            r.slack,
            if r.passed() { "PASS" } else { "FAIL" }
        );
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

pub fn cmd_best_response(
    spec: &Path,
    side: Side,
    opponent_state: &Path,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let game = match read_document(spec).and_then(|d| d.build()) {
        Ok(g) => g,
        Err(e) => return fail(stderr, e),
    };
    let state = match std::fs::read_to_string(opponent_state)
        .map_err(SpecError::from)
        .and_then(|t| parse_state(&t))
    {
        Ok(s) => s,
        Err(e) => return fail(stderr, e),
    };
    let outcome = match side {
        Side::Blue => game.blue_response(&state).and_then(|r| {
            let m = game.blue_marginal(&r.state)?;
            Ok(OracleReport::new("blue", &r, game.constraint_blue().energy_of(&r.state), &m))
        }),
        Side::Red => game.red_response(&state).and_then(|r| {
            let m = game.red_marginal(&r.state)?;
            Ok(OracleReport::new("red", &r, game.constraint_red().energy_of(&r.state), &m))
        }),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => return fail(stderr, format!("opponent state: {e}")),
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    match emit(out, &body, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(stderr, format!("cannot write report: {e}")),
    }
}

pub fn cmd_classical(
    spec: &Path,
    out: Option<&Path>,
    overrides: &SolverOverrides,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let doc = match load(spec, None, overrides) {
        Ok(d) => d,
        Err(e) => return fail(stderr, e),
    };
    let SpecDocument::Classical(c) = &doc else {
        return fail(stderr, "`classical` needs a document with \"type\": \"classical\"");
    };
    let (game, lifted) = match c.game().and_then(|g| Ok((g, c.lift()?))) {
        Ok(x) => x,
        Err(e) => return fail(stderr, e),
    };
    let params = &lifted.params;
    let classical = solve_classical(&game, params.gap_tol, params.max_iters);
    let quantum = match solve(&lifted) {
        Ok(r) => r,
        Err(e) => return fail(stderr, e),
    };
    let body = json!({
        "classical": {
            "value": classical.value,
            "p": classical.p,
            "q": classical.q,
            "gap": classical.gap,
            "converged": classical.converged,
            "iterations": classical.iterations,
        },
        "quantum": {
            "value": quantum.value,
            "value_lower": quantum.value_lower,
            "value_upper": quantum.value_upper,
            "gap": quantum.gap,
            "converged": quantum.converged,
            "iterations": quantum.iterations,
        },
        "difference": (classical.value - quantum.value).abs(),
    });
    let body = serde_json::to_string_pretty(&body).expect("report serializes");
    if let Err(e) = emit(out, &body, stdout) {
        return fail(stderr, format!("cannot write report: {e}"));
    }
    if classical.converged && quantum.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}
