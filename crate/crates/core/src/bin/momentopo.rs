use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use momentopo::campaign::{self, CampaignConfig, EstimateOptions, OUTPUT_DIR_ENV};
use momentopo::Error;

/// Joint topology estimation campaigns for serial-chain articulated objects.
#[derive(Parser)]
#[command(name = "momentopo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a campaign of exploration trials.
    Simulate(CampaignArgs),
    /// Estimate the topology of every trial in a directory.
    Estimate(CampaignArgs),
    /// Summarize an estimated campaign.
    Report(CampaignArgs),
}

#[derive(Args)]
struct CampaignArgs {
    /// TOML file with campaign settings; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in fixture name or path to a fixture TOML file.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trial length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    smoothing_window: Option<usize>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Campaign directory.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Positional alternative to --output-dir.
    dir: Option<PathBuf>,
}

impl CampaignArgs {
    fn resolve(&self) -> Result<CampaignConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => CampaignConfig::from_file(path)?,
            None => CampaignConfig::default(),
        };
        if let Some(v) = &self.fixture {
            cfg.fixture = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.duration {
            cfg.duration = v;
        }
        if let Some(v) = self.smoothing_window {
            cfg.smoothing_window = v;
        }
        if let Some(v) = self.parallelism {
            cfg.parallelism = v;
        }
        if let Some(v) = self.dir.as_ref().or(self.output_dir.as_ref()) {
            cfg.output_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::OutOfRange(_) => 1,
        _ => 2,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn simulate(cfg: &CampaignConfig) -> ExitCode {
    let manifest = match campaign::simulate(cfg) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let written = manifest.trials.iter().filter(|t| t.file.is_some()).count();
    println!(
        "{}: wrote {written} trial(s) to {}",
        manifest.fixture,
        cfg.output_dir.display()
    );
    for t in &manifest.trials {
        if let Some(msg) = &t.message {
            eprintln!("trial {} failed: {msg}", t.index);
        }
    }
    if manifest.failed() > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn estimate(cfg: &CampaignConfig) -> ExitCode {
    let options = EstimateOptions {
        smoothing_window: cfg.smoothing_window,
        parallelism: cfg.parallelism,
    };
    let report = match campaign::estimate(&cfg.output_dir, &options) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!(
        "estimated {} trial(s), skipped {}; wrote {} and {}",
        report.trials.len(),
        report.skipped.len(),
        campaign::REPORT_FILE,
        campaign::ERRORS_FILE
    );
    for s in &report.skipped {
        eprintln!("skipped {}: {}", s.file, s.reason);
    }
    ExitCode::SUCCESS
}

fn report(cfg: &CampaignConfig) -> ExitCode {
    match campaign::load_report(&cfg.output_dir) {
        Ok(r) => {
            print!("{}", campaign::render_summary(&r));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let args = match &cli.command {
        Command::Simulate(a) | Command::Estimate(a) | Command::Report(a) => a,
    };
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match cli.command {
        Command::Simulate(_) => simulate(&cfg),
        Command::Estimate(_) => estimate(&cfg),
        Command::Report(_) => report(&cfg),
    }
}
