use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use digp::experiment::{
    emit_csv, emit_plotdata, emit_timing, preset, presets, run_experiment, ExperimentConfig, ResultRow, Trials,
};
use digp::signal::{SignalKind, Smnr};

#[derive(Parser)]
#[command(name = "digp", version, about = "Distributed greedy pursuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write results.csv, timing.csv and plotdata/ under the output directory.
    Run(RunArgs),
    /// Print the built-in experiment presets.
    ListExperiments {
        /// Also print each preset as TOML.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Start from a built-in preset instead of a file.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// ring:d, rand:d, watts:q,p or sweep; repeat for several.
    #[arg(long, num_args = 1..)]
    topology: Option<Vec<String>>,
    #[arg(long)]
    signal: Option<SignalKind>,
    /// dB value or `clean`.
    #[arg(long)]
    smnr: Option<Smnr>,
    /// Matrix and signal trials as Q,P.
    #[arg(long)]
    trials: Option<Trials>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    k_common: Option<usize>,
    #[arg(long)]
    k_private: Option<usize>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    timing_baseline: Option<String>,
}

impl RunArgs {
    fn resolve(self) -> digp::Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => preset(name).ok_or_else(|| {
                let known: Vec<_> = presets().into_iter().map(|(n, _, _)| n).collect();
                digp::Error::Config(format!("unknown preset '{name}' (known: {})", known.join(", ")))
            })?,
            (None, None) => ExperimentConfig::default(),
        };
        macro_rules! overlay {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { cfg.$field = v; } )* };
        }
        overlay!(
            alpha, algorithms, topology, signal, smnr, trials, seed, out, n, nodes, k_common, k_private,
            max_rounds, timing_baseline
        );
        Ok(cfg)
    }
}

fn print_rows(rows: &[ResultRow]) {
    println!(
        "{:>6} {:>8} {:>8} {:>9} {:>7} {:>7} {:>7} {:>9}",
        "alpha", "algo", "topology", "srer_db", "asce", "outer", "inner", "seconds"
    );
    for r in rows {
        println!(
            "{:>6.3} {:>8} {:>8} {:>9.2} {:>7.4} {:>7.2} {:>7.2} {:>9.3}",
            r.alpha, r.algorithm, r.topology, r.srer_db, r.asce, r.outer_mean, r.inner_mean, r.wall_seconds
        );
    }
}

fn run(args: RunArgs) -> digp::Result<()> {
    let cfg = args.resolve()?;
    let rows = run_experiment(&cfg)?;
    print_rows(&rows);
    for r in rows.iter().filter(|r| r.capped_runs > 0) {
        eprintln!(
            "warning: {} {} at alpha {}: {} runs hit the {}-round cap",
            r.algorithm, r.topology, r.alpha, r.capped_runs, cfg.max_rounds
        );
    }

    let out = &cfg.out;
    std::fs::create_dir_all(out).map_err(|e| digp::Error::io(out, e))?;
    let config_path = out.join("config.toml");
    std::fs::write(&config_path, cfg.to_toml_string()).map_err(|e| digp::Error::io(&config_path, e))?;
    emit_csv(&rows, &out.join("results.csv"))?;
    let curves = emit_plotdata(&rows, &out.join("plotdata"))?;
    match emit_timing(&rows, &cfg.timing_baseline, &out.join("timing.csv")) {
        Ok(table) => {
            println!("\nrun time relative to {}:", cfg.timing_baseline);
            for t in table {
                println!("{:>8} {:>8} {:>7.2}", t.algorithm, t.topology, t.time_ratio);
            }
        }
        Err(e) => eprintln!("note: timing table skipped: {e}"),
    }
    println!("\nwrote {} and {} curve files", out.join("results.csv").display(), curves.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::ListExperiments { verbose } => {
            for (name, description, cfg) in presets() {
                println!("{name:<8} {description}");
                if verbose {
                    println!("{}", cfg.to_toml_string());
                }
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
