use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hcrep_cli::{parse_state_file, run, CliError, ExperimentSpec, Mode};

/// Hidden-correlation cascades, Born-rule comparisons and hidden-measurement
/// sampling for compound quantum states.
#[derive(Parser)]
#[command(name = "hcrep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schmidt coefficients and vectors for each focus entity.
    Decompose(Common),
    /// Initial proper state of every entity.
    ProperStates(Common),
    /// Joint outcome distribution of the measurement cascade.
    Distribution(Common),
    /// Hidden-measurement Monte Carlo frequencies compared with the Born rule.
    Sample(Common),
    /// Cascade distribution compared with the Born rule; fails above --tol.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// State document (JSON).
    #[arg(long)]
    state: PathBuf,
    /// Measurement order, comma separated. Defaults to the state's label order.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    /// Basis for one entity: <entity>=<computational|hadamard|path>.
    #[arg(long = "basis")]
    bases: Vec<String>,
    /// Number of Monte Carlo samples.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance on the largest pointwise probability error.
    #[arg(long)]
    tol: Option<f64>,
    /// Restrict `decompose` to one entity.
    #[arg(long)]
    focus: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build(mode: Mode, args: &Common) -> Result<ExperimentSpec, CliError> {
    let state = parse_state_file(&args.state)?;
    let mut spec = ExperimentSpec::new(state, mode);
    if let Some(order) = &args.order {
        spec.order = order.iter().map(|s| s.trim().to_string()).collect();
    }
    for arg in &args.bases {
        let (entity, basis) = arg
            .split_once('=')
            .ok_or_else(|| CliError::BasisArgument(arg.clone()))?;
        spec.set_basis(entity.trim(), basis.trim())?;
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    spec.seed = args.seed;
    if let Some(tol) = args.tol {
        spec.tol = tol;
        spec.enforce_sample_tol = true;
    }
    spec.focus = args.focus.clone();
    Ok(spec)
}

fn execute(mode: Mode, args: &Common) -> Result<bool, CliError> {
    let spec = build(mode, args)?;
    let output = run(&spec)?;
    match &args.out {
        Some(path) => std::fs::write(path, format!("{}\n", output.report))
            .map_err(|e| CliError::io(path, e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", output.report) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(CliError::io(Path::new("<stdout>"), e));
                }
                _ => {}
            }
        }
    }
    Ok(output.violation)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Decompose(a) => (Mode::Decompose, a),
        Command::ProperStates(a) => (Mode::ProperStates, a),
        Command::Distribution(a) => (Mode::Distribution, a),
        Command::Sample(a) => (Mode::Sample, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    match execute(mode, args) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": {"code": "ToleranceViolation", "mode": mode.name()}})
            );
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({"error": {"code": e.code(), "message": e.to_string()}})
            );
            ExitCode::from(2)
        }
    }
}
