//! Batch campaigns: simulate a set of trials, estimate every trial, summarize.
//!
//! Layout of a campaign directory:
//!
//! * `trial_0001.trial`, ... in the `trial/v1` format,
//! * `manifest.json` with the fixture hash and per-trial seeds,
//! * `report.json` and `errors.csv` once estimated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{candidate_topologies, select_topology, EstimatorConfig};
use crate::excitation::sample_sinusoid;
use crate::fixtures::{self, Fixture};
use crate::model::Topology;
use crate::sim::{run_trial, SimConfig, TrialSetup};
use crate::trial::{object_hash, read_trial, write_trial, TrialRecord};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";
pub const ERRORS_FILE: &str = "errors.csv";
pub const ERRORS_HEADER: &str = "# errors.csv v1";
pub const TRIAL_EXTENSION: &str = "trial";
pub const OUTPUT_DIR_ENV: &str = "MOMENTOPO_OUTPUT_DIR";

/// Everything a campaign run needs. The same fields appear as CLI flags and
/// as keys of the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    /// Built-in fixture name or path to a fixture TOML file.
    pub fixture: String,
    pub trials: usize,
    pub seed: u64,
    /// Trial length in seconds.
    pub duration: f64,
    pub smoothing_window: usize,
    /// Worker threads; 0 uses one per core.
    pub parallelism: usize,
    pub output_dir: PathBuf,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            fixture: "revolute-demo".into(),
            trials: 10,
            seed: 0,
            duration: 5.0,
            smoothing_window: 5,
            parallelism: 0,
            output_dir: PathBuf::from("campaign"),
        }
    }
}

impl CampaignConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!("duration must be positive, got {}", self.duration)));
        }
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "smoothing window must be odd and positive, got {}",
                self.smoothing_window
            )));
        }
        Ok(())
    }

    /// Loads the fixture: a built-in name first, otherwise a file path.
    pub fn resolve_fixture(&self) -> Result<Fixture> {
        if let Some(fx) = fixtures::builtin(&self.fixture) {
            return Ok(fx);
        }
        let path = Path::new(&self.fixture);
        if !path.exists() {
            return Err(Error::Config(format!(
                "unknown fixture {:?} (built-ins: {})",
                self.fixture,
                fixtures::BUILTIN_NAMES.join(", ")
            )));
        }
        Fixture::from_file(path).map_err(|e| match e {
            Error::Io { .. } | Error::Config(_) => e,
            other => Error::Config(format!("fixture {}: {other}", path.display())),
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Ok,
    /// Every allowed signal draw left the object at rest; the last draw is kept.
    NoMotion,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub file: Option<String>,
    pub seed: u64,
    /// Exploration signals drawn before one moved the object.
    pub attempts: u32,
    pub status: TrialStatus,
    pub motion_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub fixture: String,
    pub fixture_hash: String,
    pub true_topology: Topology,
    pub seed: u64,
    pub duration: f64,
    pub dt: f64,
    pub trials: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn failed(&self) -> usize {
        self.trials.iter().filter(|t| t.status == TrialStatus::Failed).count()
    }
}

pub fn trial_file_name(index: usize) -> String {
    format!("trial_{index:04}.{TRIAL_EXTENSION}")
}

/// Per-trial seeds, drawn in order from a generator keyed by the campaign seed.
pub fn trial_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}

/// One trial of `fixture`, redrawing the signal while the object stays at
/// rest if the fixture asks for motion. Returns the record and the number
/// of draws.
pub fn simulate_trial(fixture: &Fixture, seed: u64, duration: f64) -> Result<(TrialRecord, u32)> {
    let cfg = SimConfig {
        duration,
        seed,
        ..SimConfig::default()
    };
    let setup = TrialSetup {
        fixture: fixture.name.clone(),
        initial_positions: fixture.initial_positions(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_motion = EstimatorConfig::default().min_motion_fraction;
    let max_attempts = if fixture.excitation.require_motion {
        fixture.excitation.max_attempts.max(1)
    } else {
        1
    };
    let mut attempt = 0;
    loop {
        attempt += 1;
        let signal = sample_sinusoid(
            &mut rng,
            fixture.excitation.active,
            fixture.excitation.frequency_floor,
        )?;
        let record = run_trial(&fixture.object, &fixture.topology, &signal, &setup, &cfg)?;
        if attempt >= max_attempts || record.motion_fraction() >= min_motion {
            return Ok((record, attempt));
        }
    }
}

/// Runs the campaign and writes trials plus manifest. Divergent trials are
/// recorded as failed in the manifest; the rest of the campaign still runs.
pub fn simulate(config: &CampaignConfig) -> Result<Manifest> {
    config.validate()?;
    let fixture = config.resolve_fixture()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let seeds = trial_seeds(config.seed, config.trials);
    let results: Vec<Result<(TrialRecord, u32)>> = config.pool()?.install(|| {
        seeds
            .par_iter()
            .map(|&s| simulate_trial(&fixture, s, config.duration))
            .collect()
    });

    let min_motion = EstimatorConfig::default().min_motion_fraction;
    let mut entries = Vec::with_capacity(results.len());
    for (i, (result, &seed)) in results.into_iter().zip(&seeds).enumerate() {
        let index = i + 1;
        let entry = match result {
            Ok((record, attempts)) => {
                let name = trial_file_name(index);
                write_trial(&record, &dir.join(&name))?;
                let mf = record.motion_fraction();
                ManifestEntry {
                    index,
                    file: Some(name),
                    seed,
                    attempts,
                    status: if fixture.excitation.require_motion && mf < min_motion {
                        TrialStatus::NoMotion
                    } else {
                        TrialStatus::Ok
                    },
                    motion_fraction: Some(mf),
                    message: None,
                }
            }
            Err(e @ Error::NumericalDivergence { .. }) => ManifestEntry {
                index,
                file: None,
                seed,
                attempts: 0,
                status: TrialStatus::Failed,
                motion_fraction: None,
                message: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        entries.push(entry);
    }

    let manifest = Manifest {
        fixture: fixture.name.clone(),
        fixture_hash: object_hash(&fixture.object),
        true_topology: fixture.topology.clone(),
        seed: config.seed,
        duration: config.duration,
        dt: SimConfig::default().dt,
        trials: entries,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateError {
    pub topology: Topology,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEstimate {
    pub trial: String,
    pub fixture: String,
    pub true_topology: Option<Topology>,
    pub selected: Topology,
    pub inconclusive: bool,
    pub moving: bool,
    pub motion_fraction: f64,
    /// Runner-up error over best error; `null` when the best error is zero.
    pub separation_ratio: Option<f64>,
    pub errors: Vec<CandidateError>,
}

impl TrialEstimate {
    pub fn outcome(&self) -> Outcome {
        match &self.true_topology {
            _ if self.inconclusive => Outcome::Inconclusive,
            Some(t) if *t == self.selected => Outcome::Correct,
            Some(_) => Outcome::Wrong,
            None => Outcome::Unlabeled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Correct,
    Inconclusive,
    Wrong,
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTrial {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub smoothing_window: usize,
    pub trials: Vec<TrialEstimate>,
    pub skipped: Vec<SkippedTrial>,
}

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub smoothing_window: usize,
    pub parallelism: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            smoothing_window: 5,
            parallelism: 0,
        }
    }
}

/// Trial files of a directory in name order.
pub fn list_trials(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == TRIAL_EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn estimate_record(name: &str, record: &TrialRecord, cfg: &EstimatorConfig) -> Result<TrialEstimate> {
    let spec = &record.metadata.object;
    let candidates = candidate_topologies(spec)?;
    let report = select_topology(record, spec, &candidates, cfg)?;
    let ratio = report.separation_ratio();
    Ok(TrialEstimate {
        trial: name.to_string(),
        fixture: record.metadata.fixture.clone(),
        true_topology: record.metadata.true_topology.clone(),
        selected: report.selected.clone(),
        inconclusive: report.inconclusive,
        moving: report.motion_fraction >= cfg.min_motion_fraction,
        motion_fraction: report.motion_fraction,
        separation_ratio: ratio.is_finite().then_some(ratio),
        errors: report
            .errors
            .iter()
            .map(|e| CandidateError {
                topology: e.topology.clone(),
                error: e.error,
            })
            .collect(),
    })
}

/// Estimates every trial in `dir` and writes `report.json` and `errors.csv`
/// there. Unreadable or invalid trials are listed as skipped.
pub fn estimate(dir: &Path, options: &EstimateOptions) -> Result<CampaignReport> {
    let cfg = EstimatorConfig {
        smoothing_window: options.smoothing_window,
        ..EstimatorConfig::default()
    };
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    let files = list_trials(dir)?;
    if files.is_empty() {
        return Err(Error::invalid(format!("no trials found in {}", dir.display())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<(String, Result<TrialEstimate>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let file = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
                let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                let result = read_trial(path).and_then(|r| estimate_record(&stem, &r, &cfg));
                (file, result)
            })
            .collect()
    });

    let mut report = CampaignReport {
        smoothing_window: cfg.smoothing_window,
        trials: Vec::new(),
        skipped: Vec::new(),
    };
    for (file, result) in results {
        match result {
            Ok(t) => report.trials.push(t),
            Err(e) => report.skipped.push(SkippedTrial {
                file,
                reason: e.to_string(),
            }),
        }
    }
    write_json(&dir.join(REPORT_FILE), &report)?;
    let csv = errors_csv(&report);
    fs::write(dir.join(ERRORS_FILE), csv).map_err(|e| Error::io(dir.join(ERRORS_FILE), e))?;
    Ok(report)
}

/// One row per trial and candidate. Errors use Rust's shortest round-trip
/// scientific formatting.
pub fn errors_csv(report: &CampaignReport) -> String {
    let mut out = format!("{ERRORS_HEADER}\ntrial,candidate,error,selected,inconclusive\n");
    for t in &report.trials {
        for c in &t.errors {
            let _ = writeln!(
                out,
                "{},{},{:e},{},{}",
                t.trial,
                c.topology,
                c.error,
                c.topology == t.selected,
                t.inconclusive
            );
        }
    }
    out
}

pub fn load_report(dir: &Path) -> Result<CampaignReport> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureSummary {
    pub fixture: String,
    pub trials: usize,
    pub moving: usize,
    pub correct: usize,
    pub inconclusive: usize,
    pub wrong: usize,
    pub unlabeled: usize,
    /// Mean over trials with a finite separation ratio.
    pub mean_separation: Option<f64>,
}

/// Confusion counts per fixture, in fixture name order.
pub fn summarize(report: &CampaignReport) -> Vec<FixtureSummary> {
    let mut groups: BTreeMap<&str, (FixtureSummary, f64, usize)> = BTreeMap::new();
    for t in &report.trials {
        let (s, sum, n) = groups.entry(&t.fixture).or_insert_with(|| {
            (
                FixtureSummary {
                    fixture: t.fixture.clone(),
                    ..Default::default()
                },
                0.0,
                0,
            )
        });
        s.trials += 1;
        s.moving += t.moving as usize;
        match t.outcome() {
            Outcome::Correct => s.correct += 1,
            Outcome::Inconclusive => s.inconclusive += 1,
            Outcome::Wrong => s.wrong += 1,
            Outcome::Unlabeled => s.unlabeled += 1,
        }
        if let Some(r) = t.separation_ratio {
            *sum += r;
            *n += 1;
        }
    }
    groups
        .into_values()
        .map(|(mut s, sum, n)| {
            s.mean_separation = (n > 0).then(|| sum / n as f64);
            s
        })
        .collect()
}

/// Human-readable summary of an estimated campaign.
pub fn render_summary(report: &CampaignReport) -> String {
    let mut out = String::new();
    for s in summarize(report) {
        let _ = write!(
            out,
            "{}: {}/{} correct, {} inconclusive, {} wrong",
            s.fixture, s.correct, s.trials, s.inconclusive, s.wrong
        );
        if s.unlabeled > 0 {
            let _ = write!(out, ", {} unlabeled", s.unlabeled);
        }
        let _ = write!(out, " ({} moving)", s.moving);
        match s.mean_separation {
            Some(r) => {
                let _ = writeln!(out, "; mean separation ratio {r:.2}");
            }
            None => {
                let _ = writeln!(out, "; mean separation ratio n/a");
            }
        }
    }
    if !report.skipped.is_empty() {
        let _ = writeln!(out, "skipped {} trial file(s):", report.skipped.len());
        for s in &report.skipped {
            let _ = writeln!(out, "  {}: {}", s.file, s.reason);
        }
    }
    out
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::validation(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
