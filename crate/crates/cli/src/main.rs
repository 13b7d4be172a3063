use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hdtlab_cli::compare::Verdict;
use hdtlab_cli::config::Kind;
use hdtlab_cli::{compare_files, load_config, run_experiment, CliError, EXIT_COMPARISON, EXIT_OK};

#[derive(Parser)]
#[command(
    name = "hdtlab",
    version,
    about = "Deep and holographic deep thermalization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads; falls back to HDTLAB_THREADS, then all cores.
    #[arg(long, env = "HDTLAB_THREADS")]
    threads: Option<usize>,
    /// Largest dense step size in qubits.
    #[arg(long)]
    cap_qubits: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-round deep thermalization.
    Dt(RunArgs),
    /// Multi-step holographic deep thermalization.
    Hdt(RunArgs),
    /// Overlap distribution against a reference state.
    Pop(RunArgs),
    /// Reference mutual information.
    Mi(RunArgs),
    /// Ancilla-versus-time sweep with rescaled frame potentials.
    Tradeoff(RunArgs),
    /// Circuit-size resource scan.
    Qsize(RunArgs),
    /// Closed-form predictions only.
    Oracle(RunArgs),
    /// Variational training of the step circuits.
    Train(RunArgs),
    /// Permutation-chain statistical model sums.
    Statmodel(RunArgs),
    /// Any experiment, taking its kind from the configuration.
    Run(RunArgs),
    /// Compare a simulation CSV with a theory CSV.
    Compare {
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        theory: PathBuf,
    },
}

fn run(args: &RunArgs, expected: Option<Kind>) -> Result<i32, CliError> {
    let cfg = load_config(&args.config, args.seed, args.cap_qubits)?;
    if let Some(kind) = expected {
        if cfg.kind != kind {
            return Err(CliError::Invalid(format!(
                "configuration describes a {} experiment, not {kind}",
                cfg.kind
            )));
        }
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Invalid(e.to_string()))?;
    let summary = pool.install(|| run_experiment(&cfg, &args.out))?;
    for note in &summary.notes {
        println!("{note}");
    }
    if let Some(r) = &summary.comparison {
        println!("{r}");
    }
    for f in &summary.files {
        log::info!("wrote {}", f.display());
    }
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Dt(a) => run(a, Some(Kind::Dt)),
        Command::Hdt(a) => run(a, Some(Kind::Hdt)),
        Command::Pop(a) => run(a, Some(Kind::Pop)),
        Command::Mi(a) => run(a, Some(Kind::Mi)),
        Command::Tradeoff(a) => run(a, Some(Kind::Tradeoff)),
        Command::Qsize(a) => run(a, Some(Kind::Qsize)),
        Command::Oracle(a) => run(a, Some(Kind::Oracle)),
        Command::Train(a) => run(a, Some(Kind::Train)),
        Command::Statmodel(a) => run(a, Some(Kind::Statmodel)),
        Command::Run(a) => run(a, None),
        Command::Compare { sim, theory } => compare_files(sim, theory).map(|r| {
            println!("{r}");
            if r.verdict == Verdict::Fail {
                EXIT_COMPARISON
            } else {
                EXIT_OK
            }
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
