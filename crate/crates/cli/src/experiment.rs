//! Seeded runs of a configuration.

use cvoa::engine::{IterationRecord, StrainResult};
use cvoa::multi::PandemicError;
use cvoa::{run_pandemic, run_strain, Codec, EvalError, MultiStrainConfig, RandomSource};

use crate::config::{ConfiguredCodec, RunConfig};
use crate::error::CliError;
use crate::report::{combine_histories, RunRecord};

/// Everything produced by one seeded run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    /// Per-iteration trace; strains are combined for multi-strain runs.
    pub history: Vec<IterationRecord>,
    /// Per-strain traces (a single entry for single-strain runs).
    pub strain_histories: Vec<Vec<IterationRecord>>,
    pub search_space_size: Option<u128>,
}

/// A run stopped by an evaluation error, with the traces recorded until then.
#[derive(Debug)]
pub struct RunFailure {
    pub seed: u64,
    pub source: EvalError,
    pub history: Vec<IterationRecord>,
    pub strain_histories: Vec<Vec<IterationRecord>>,
}

impl From<RunFailure> for CliError {
    fn from(failure: RunFailure) -> Self {
        CliError::Evaluation { seed: failure.seed, source: failure.source }
    }
}

/// Runs `config` once with base seed `seed`.
pub fn execute(config: &RunConfig, seed: u64) -> Result<Result<RunOutcome, RunFailure>, CliError> {
    let strains = config.strains(seed);
    match config.codec(seed)? {
        ConfiguredCodec::Binary(codec) => execute_with(&codec, &strains, seed),
        ConfiguredCodec::Net(codec) => execute_with(&codec, &strains, seed),
    }
}

/// Runs one seeded experiment over any codec. A single strain runs on its own
/// ledger; several strains share one, and their evaluation counts are summed.
pub fn execute_with<C: Codec>(
    codec: &C,
    strains: &MultiStrainConfig,
    seed: u64,
) -> Result<Result<RunOutcome, RunFailure>, CliError> {
    let objective = strains.strains[0].objective;
    let results: Vec<StrainResult<C::Genotype>> = if strains.strains.len() == 1 {
        let params = &strains.strains[0];
        match run_strain(params, codec, RandomSource::seed_from_u64(params.seed), None) {
            Ok(result) => vec![result],
            Err(e) => {
                return Ok(Err(RunFailure {
                    seed,
                    source: e.source,
                    history: e.history.clone(),
                    strain_histories: vec![e.history],
                }))
            }
        }
    } else {
        match run_pandemic(strains, codec) {
            Ok(pandemic) => pandemic.strains,
            Err(PandemicError::Seeding(e)) => return Err(CliError::Config(vec![e.to_string()])),
            Err(PandemicError::Strain { source, partial, .. }) => {
                let strain_histories: Vec<_> = partial
                    .into_iter()
                    .map(|p| match p {
                        Ok(result) => result.history,
                        Err(e) => e.history,
                    })
                    .collect();
                return Ok(Err(RunFailure {
                    seed,
                    source,
                    history: combine_histories(&strain_histories, objective),
                    strain_histories,
                }));
            }
        }
    };

    let best = cvoa::engine::select_best(results.iter().map(|r| &r.best), objective)
        .expect("at least one strain")
        .clone();
    let strain_histories: Vec<Vec<IterationRecord>> = results.iter().map(|r| r.history.clone()).collect();
    let history = if results.len() == 1 {
        strain_histories[0].clone()
    } else {
        combine_histories(&strain_histories, objective)
    };
    let iterations_to_optimum = codec
        .optimum()
        .and_then(|optimum| results.iter().filter_map(|r| r.iterations_to_optimum(optimum)).min());
    let evaluations_total: u64 = results.iter().map(|r| r.evaluations_total()).sum();
    let search_space_size = codec.search_space_size();
    let dead_fraction = history.last().and_then(|last| {
        let total = last.deaths_total + last.recovered_total;
        (total > 0).then(|| last.deaths_total as f64 / total as f64)
    });
    let record = RunRecord {
        seed,
        iterations_to_optimum,
        best_fitness: best.fitness,
        best_genotype: codec.format_genotype(&best.genotype),
        evaluations_total,
        evaluated_fraction: search_space_size.map(|size| (evaluations_total as f64 / size as f64).min(1.0)),
        iterations: history.len() as u32,
        termination: results.iter().map(|r| r.termination).max_by_key(|t| *t as u8).expect("at least one strain"),
        dead_fraction,
    };
    Ok(Ok(RunOutcome { record, history, strain_histories, search_space_size }))
}
