use clap::Parser;
use eklab::experiments::{export_results, run_experiment, ExperimentConfig, ExperimentKind, Format, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Erdős–Kac experiments on Beatty sequences.
#[derive(Parser, Debug)]
#[command(name = "eklab", version)]
struct Cli {
    /// ek_single, ek_joint, moments, quantitative, kubilius, adversary,
    /// relations or coprimality.
    experiment: ExperimentKind,
    #[arg(long = "n")]
    n: u64,
    /// Slope α; repeat for several sequences.
    #[arg(long = "alpha")]
    alphas: Vec<String>,
    /// Offset β, matched to --alpha by position; defaults to 0.
    #[arg(long = "beta")]
    betas: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    j: Option<u64>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t: Option<u64>,
    /// Directory for sieve tables.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Moment order cap (moments).
    #[arg(long)]
    cap: Option<u32>,
    /// Model draws (kubilius).
    #[arg(long)]
    draws: Option<usize>,
    /// Polynomial degree (adversary).
    #[arg(long)]
    degree: Option<u32>,
}

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("EKLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("EKLAB_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let config = ExperimentConfig {
        experiment: cli.experiment,
        n: cli.n,
        alphas: cli.alphas,
        betas: cli.betas,
        overrides: Overrides {
            r: cli.r,
            j: cli.j,
            l: cli.l,
            eps: cli.eps,
            t: cli.t,
        },
        seed: cli.seed,
        out: Some(cli.out.clone()),
        format: cli.format,
        cache: cli.cache,
        cap: cli.cap,
        draws: cli.draws,
        degree: cli.degree,
    };
    let result = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {} failed: {e}", config.experiment);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match export_results(&result, &cli.out, cli.format) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            eprintln!("{} finished in {:.3} s", config.experiment, result.wall_time.as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
