//! The `run` and `sweep` commands.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{CodecConfig, RunConfig};
use crate::error::CliError;
use crate::experiment::{execute, RunFailure, RunOutcome};
use crate::report::{
    write_iterations, write_json, write_sweep, write_text, Aggregates, RunRecord, RunSummary, SweepRow,
};

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub repeat: Option<u32>,
}

impl Overrides {
    pub fn apply(&self, mut config: RunConfig) -> Result<RunConfig, CliError> {
        if let Some(seed) = self.seed {
            config.epidemic.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        if let Some(repeat) = self.repeat {
            config.repeat = repeat;
        }
        config.validate()
    }
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Seeds of the repeated runs: `seed, seed + 1, …`. Multi-strain runs derive
/// their strain seeds from these the same way.
pub fn run_seeds(config: &RunConfig) -> Vec<u64> {
    (0..u64::from(config.repeat)).map(|r| config.epidemic.seed.wrapping_add(r)).collect()
}

/// Directory holding the artifacts of the run with `seed`.
pub fn run_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("run-{seed}"))
}

fn write_traces(dir: &Path, history: &[cvoa::IterationRecord], strains: &[Vec<cvoa::IterationRecord>]) -> Result<(), CliError> {
    create_dir(dir)?;
    write_iterations(&dir.join("iterations.csv"), history)?;
    if strains.len() > 1 {
        for (i, trace) in strains.iter().enumerate() {
            write_iterations(&dir.join(format!("strain-{i}.csv")), trace)?;
        }
    }
    Ok(())
}

fn write_outcome(out: &Path, outcome: &RunOutcome) -> Result<(), CliError> {
    let dir = run_dir(out, outcome.record.seed);
    write_traces(&dir, &outcome.history, &outcome.strain_histories)?;
    write_text(&dir.join("best.txt"), &outcome.record.best_genotype)
}

fn write_failure(out: &Path, failure: &RunFailure) -> Result<(), CliError> {
    write_traces(&run_dir(out, failure.seed), &failure.history, &failure.strain_histories)
}

/// Runs every seed, in parallel, and returns the outcomes in seed order. Any
/// evaluation failure is returned after all runs finished.
fn run_all(config: &RunConfig) -> Result<Vec<Result<RunOutcome, RunFailure>>, CliError> {
    run_seeds(config).into_par_iter().map(|seed| execute(config, seed)).collect()
}

fn overall_best<'a>(config: &RunConfig, runs: &'a [RunRecord]) -> &'a RunRecord {
    let objective = config.epidemic.objective;
    runs.iter()
        .reduce(|best, r| if objective.improves(r.best_fitness, best.best_fitness) { r } else { best })
        .expect("repeat is at least 1")
}

/// Runs `config` `repeat` times and writes, under the output directory:
///
/// - `run-<seed>/iterations.csv`, `run-<seed>/best.txt` per run, plus
///   `run-<seed>/strain-<i>.csv` per strain for multi-strain runs,
/// - `summary.json` and `best.txt` (best over all runs).
///
/// On an evaluation error, traces up to the failure are still written.
pub fn run_command(config: RunConfig, overrides: &Overrides) -> Result<RunSummary, CliError> {
    let config = overrides.apply(config)?;
    let out = config.output.clone();
    create_dir(&out)?;
    let results = run_all(&config)?;
    for result in &results {
        match result {
            Ok(outcome) => write_outcome(&out, outcome)?,
            Err(failure) => write_failure(&out, failure)?,
        }
    }
    let mut outcomes = Vec::with_capacity(results.len());
    for result in results {
        outcomes.push(result?);
    }
    let runs: Vec<RunRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    let summary = RunSummary {
        codec: config.codec.clone(),
        search_space_size: outcomes[0].search_space_size,
        strains: config.epidemic.strains,
        aggregates: Aggregates::from_runs(&runs),
        runs,
    };
    write_json(&out.join("summary.json"), &summary)?;
    write_text(&out.join("best.txt"), &overall_best(&config, &summary.runs).best_genotype)?;
    Ok(summary)
}

/// Repeats the binary configuration at each bit length and writes
/// `sweep.csv` plus `bits-<n>/summary.json` under the output directory.
pub fn sweep_command(config: RunConfig, lengths: &[u32], overrides: &Overrides) -> Result<Vec<SweepRow>, CliError> {
    let config = overrides.apply(config)?;
    let target = match config.codec {
        CodecConfig::Binary { target, .. } => target,
        CodecConfig::Nn { .. } => return Err(CliError::Config(vec!["sweep needs a binary codec".into()])),
    };
    if lengths.is_empty() {
        return Err(CliError::Config(vec!["no lengths to sweep".into()]));
    }
    let out = config.output.clone();
    create_dir(&out)?;
    let mut rows = Vec::with_capacity(lengths.len());
    for &bits in lengths {
        let mut at_length = config.clone();
        at_length.codec = CodecConfig::Binary { bits, target };
        let at_length = at_length.validate()?;
        let mut runs = Vec::with_capacity(config.repeat as usize);
        for result in run_all(&at_length)? {
            runs.push(result?.record);
        }
        let summary = RunSummary {
            codec: at_length.codec.clone(),
            search_space_size: Some(1u128 << bits),
            strains: config.epidemic.strains,
            aggregates: Aggregates::from_runs(&runs),
            runs,
        };
        let dir = out.join(format!("bits-{bits}"));
        create_dir(&dir)?;
        write_json(&dir.join("summary.json"), &summary)?;
        rows.push(SweepRow { bits, aggregates: summary.aggregates });
    }
    let path = out.join("sweep.csv");
    let file = fs::File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    write_sweep(file, &rows).map_err(|e| CliError::Io { path, source: e.into() })?;
    Ok(rows)
}
