//! `pwrw`: run PW-RW experiments, sweeps, cost reports and model comparisons.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pwrw_core::harness::{self, ExperimentConfig, SweepParam};
use pwrw_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "pwrw", version, about = "Partial random walk resource location experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write searches, summary, model and histogram CSVs.
    Run(Common),
    /// Evaluate the model (optionally the simulation) across a parameter range.
    Sweep {
        /// Parameter to sweep: s, w, d, l or c.
        #[arg(long)]
        param: String,
        /// `a:b`, `a:b:step` or a comma-separated list.
        #[arg(long)]
        range: String,
        /// Also simulate each walk length (only for `--param s`).
        #[arg(long)]
        simulate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Write the recomputation cost curve and its optimal interval.
    Cost(Common),
    /// Compare model and simulation over the configured walk length range.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of searches.
    #[arg(long)]
    searches: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Average over this many independently generated networks.
    #[arg(long)]
    replicate_networks: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::load(&self.config).map_err(|e| match e {
            Error::Io(io) => Error::Config {
                line: 0,
                message: format!("cannot read {}: {io}", self.config.display()),
            },
            other => other,
        })?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(n) = self.searches {
            cfg.searches = n;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        if let Some(k) = self.replicate_networks {
            cfg.network_replicates = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("PWRW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("PWRW_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Degenerate(format!("cannot build thread pool: {e}")))
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(common) => {
            let cfg = common.load()?;
            let report = harness::run_experiment(&cfg)?;
            let pw = report.pwrw();
            println!("s = {}", report.s);
            println!(
                "pwrw: {} searches, {} failures, mean {:.3}, std {:.3}",
                pw.searches,
                pw.failures,
                pw.mean(),
                pw.std_dev()
            );
            if let Some(rw) = report.rw() {
                println!("rw:   mean {:.3}, std {:.3}", rw.mean(), rw.std_dev());
            }
            if let Some(r) = report.reduction_percent() {
                println!("reduction: {r:.2}%");
            }
            if let Some(m) = report.model_length {
                println!("model length: {m:.3}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep { param, range, simulate, common } => {
            let cfg = common.load()?;
            let param: SweepParam = param.parse()?;
            if simulate && param != SweepParam::WalkLength {
                return Err(Error::InvalidParameter("--simulate applies only to --param s".into()));
            }
            let report = harness::sweep(&cfg, param, &range, simulate)?;
            if let Some((x, l)) = report.argmin {
                println!("argmin: {x} (model length {l:.4})");
            }
            if let Some(slope) = report.slope {
                println!("fitted slope: {slope:.4}");
            }
            println!("wrote {}", report.file.display());
        }
        Command::Cost(common) => {
            let cfg = common.load()?;
            let report = harness::emit_cost_report(&cfg)?;
            match report.t_opt {
                Some(t) => println!("T_opt = {t:.3} (grid argmin {:.3})", report.grid_argmin),
                None => println!("{}", report.note.as_deref().unwrap_or("no optimal interval")),
            }
            println!("wrote {}", report.file.display());
        }
        Command::Compare(common) => {
            let cfg = common.load()?;
            let report = harness::compare_model_vs_sim(&cfg)?;
            for row in &report.rows {
                println!(
                    "s = {:>4}: model {:.3}, sim {:.3} ± {:.3}, deviation {:.2}%",
                    row.s,
                    row.model,
                    row.simulated,
                    row.std_error,
                    100.0 * row.relative
                );
            }
            println!("deviation grows with s: {}", report.grows_with_s);
            println!("wrote {}", report.file.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| execute(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
