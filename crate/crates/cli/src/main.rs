use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use disp::harness::{
    metrics, read_config, read_observations, read_report, read_truth, run, simulate, track,
    write_observations, write_run, write_truth, HarnessError, RunReport, ScenarioConfig,
    TRUTH_FILE,
};

#[derive(Parser)]
#[command(
    name = "disp",
    version,
    about = "Simulate scenarios and run the multi-target filter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a scenario and write its ground truth and observations.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed of the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the filter over recorded observations.
    Track {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding observations.jsonl, and optionally truth.json.
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate, then track.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a summary of a report directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = read_config(path).map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    if let Some(s) = seed {
        cfg.sim.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let (truth, scans) = simulate(&cfg).map_err(HarnessError::from)?;
            write_truth(&out, &truth)?;
            write_observations(&out, &scans)?;
            let n: usize = scans.iter().map(Vec::len).sum();
            println!(
                "{} scans, {} targets, {n} observations -> {}",
                scans.len(),
                truth.targets.len(),
                out.display()
            );
        }
        Command::Track { config, obs, out } => {
            let cfg = load_config(&config, None)?;
            let scans = read_observations(&obs)?;
            let mut report = track(&cfg, &scans).map_err(HarnessError::from)?;
            if obs.join(TRUTH_FILE).exists() {
                let truth = read_truth(&obs)?;
                let h = cfg.models().map_err(HarnessError::from)?.sensor.observation;
                report.summary = Some(metrics(&truth, &report, &h, cfg.sim.match_radius));
            }
            write_run(&out, &report)?;
            print_summary(&report);
        }
        Command::Run { config, seed, out } => {
            let cfg = load_config(&config, seed)?;
            let (truth, scans, report) = run(&cfg).map_err(HarnessError::from)?;
            write_truth(&out, &truth)?;
            write_observations(&out, &scans)?;
            write_run(&out, &report)?;
            print_summary(&report);
        }
        Command::Report { input } => {
            let report = read_report(&input)?;
            println!("scan  obs  hyps  tracks  map  map_weight  extracted");
            for r in &report.scans {
                println!(
                    "{:>4} {:>4} {:>5} {:>7} {:>4}  {:>10.6}  {}",
                    r.scan,
                    r.observations.len(),
                    r.hypothesis_count,
                    r.track_count,
                    r.map_hypothesis.len(),
                    r.map_weight,
                    r.estimates.len()
                );
            }
            print_summary(&report);
        }
    }
    Ok(())
}

fn print_summary(report: &RunReport) {
    let extracted: usize = report.scans.iter().map(|r| r.estimates.len()).sum();
    let peak = report
        .scans
        .iter()
        .map(|r| r.hypothesis_count)
        .max()
        .unwrap_or(0);
    println!(
        "{} scans, peak {peak} hypotheses, {extracted} extracted estimates",
        report.scans.len()
    );
    if let Some(s) = &report.summary {
        let rmse = s.mean_rmse.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "mean cardinality error {:.3}, mean |cardinality error| {:.3}, mean RMSE {rmse}",
            s.mean_cardinality_error, s.mean_abs_cardinality_error
        );
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
