//! Several strains running concurrently over one shared ledger.
//!
//! Each strain keeps its own infected sets, parameters, random stream and
//! patient zero. Recovered and dead are global: a genotype killed by one
//! strain is dead for all of them, and a recovered genotype can be reinfected
//! by whichever strain wins the atomic transition first.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Codec, EvaluatedIndividual};
use crate::engine::{select_best, Strain, StrainObserver, StrainResult};
use crate::error::{CodecError, EvalError, ParameterError, RunError};
use crate::ledger::{Ledger, SharedLedger};
use crate::params::EpidemicParameters;
use crate::rng::RandomSource;

/// Candidate pool size per patient zero for [`PzStrategy::MaxHammingSpread`].
pub const PZ_POOL_FACTOR: usize = 50;

/// Redraws allowed per strain when its patient zero is already taken.
const MAX_PZ_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PzStrategy {
    /// Every strain draws its own patient zero.
    #[default]
    Random,
    /// Greedy farthest-point selection from a random pool.
    MaxHammingSpread,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStrainConfig {
    pub strains: Vec<EpidemicParameters>,
    pub pz_strategy: PzStrategy,
}

impl MultiStrainConfig {
    /// `params.strains` copies of `params`, strain `i` seeded with `params.seed + i`.
    pub fn uniform(params: &EpidemicParameters, pz_strategy: PzStrategy) -> Self {
        let strains = (0..u64::from(params.strains.max(1)))
            .map(|i| params.clone().with_seed(params.seed.wrapping_add(i)))
            .collect();
        MultiStrainConfig { strains, pz_strategy }
    }

    pub fn validate(self) -> Result<Self, ParameterError> {
        let mut violations = Vec::new();
        if self.strains.is_empty() {
            violations.push("at least one strain is required".to_string());
        }
        for (i, params) in self.strains.iter().enumerate() {
            if let Err(e) = params.clone().validate() {
                violations.extend(e.violations.into_iter().map(|v| format!("strain {i}: {v}")));
            }
        }
        for (i, a) in self.strains.iter().enumerate() {
            if let Some(j) = self.strains[..i].iter().position(|b| b.seed == a.seed) {
                violations.push(format!("strains {j} and {i} share seed {}", a.seed));
            }
            if a.objective != self.strains[0].objective {
                violations.push(format!("strain {i} optimizes in a different direction"));
            }
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ParameterError { violations })
        }
    }
}

/// Draws `n` patient zeros.
///
/// `MaxHammingSpread` draws `50·n` random candidates, starts from the first
/// and repeatedly adds the candidate whose minimum distance to the chosen ones
/// is largest.
pub fn seed_patient_zeros<C: Codec>(
    n: usize,
    codec: &C,
    strategy: PzStrategy,
    rng: &mut RandomSource,
) -> Result<Vec<C::Genotype>, CodecError> {
    if let Some(size) = codec.search_space_size() {
        if n as u128 > size {
            return Err(CodecError::SpaceTooSmall { requested: n, available: size });
        }
    }
    match strategy {
        PzStrategy::Random => Ok((0..n).map(|_| codec.generate_patient_zero(rng)).collect()),
        PzStrategy::MaxHammingSpread => {
            let pool: Vec<C::Genotype> =
                (0..PZ_POOL_FACTOR * n).map(|_| codec.generate_patient_zero(rng)).collect();
            Ok(farthest_points(&pool, n, |a, b| codec.distance(a, b)))
        }
    }
}

fn farthest_points<G: Clone>(pool: &[G], n: usize, distance: impl Fn(&G, &G) -> usize) -> Vec<G> {
    let mut chosen = Vec::with_capacity(n);
    if pool.is_empty() || n == 0 {
        return chosen;
    }
    chosen.push(pool[0].clone());
    let mut nearest: Vec<usize> = pool.iter().map(|g| distance(g, &pool[0])).collect();
    while chosen.len() < n {
        let (next, _) = nearest
            .iter()
            .enumerate()
            .fold((0, 0), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        chosen.push(pool[next].clone());
        for (slot, g) in nearest.iter_mut().zip(pool) {
            *slot = (*slot).min(distance(g, &pool[next]));
        }
    }
    chosen
}

#[derive(Debug, Clone)]
pub struct PandemicResult<G> {
    /// Best over all strains.
    pub best: EvaluatedIndividual<G>,
    /// Indexed by strain id.
    pub strains: Vec<StrainResult<G>>,
}

#[derive(Debug, Error)]
pub enum PandemicError<G: std::fmt::Debug> {
    #[error("cannot seed patient zeros: {0}")]
    Seeding(#[from] CodecError),
    /// A strain failed; the others were cancelled.
    #[error("strain {strain} failed: {source}")]
    Strain {
        strain: usize,
        #[source]
        source: EvalError,
        /// Per strain: the completed or cancelled result, or the failure with its partial history.
        partial: Vec<Result<StrainResult<G>, RunError>>,
    },
}

pub fn run_pandemic<C: Codec>(
    config: &MultiStrainConfig,
    codec: &C,
) -> Result<PandemicResult<C::Genotype>, PandemicError<C::Genotype>> {
    let observers = (0..config.strains.len()).map(|_| ()).collect();
    run_pandemic_observed(config, codec, &SharedLedger::new(), observers)
}

/// Like [`run_pandemic`], over a caller-provided ledger and with one observer
/// per strain (moved into its thread).
pub fn run_pandemic_observed<C: Codec, O: StrainObserver<C::Genotype> + Send>(
    config: &MultiStrainConfig,
    codec: &C,
    ledger: &SharedLedger<C::Genotype>,
    observers: Vec<O>,
) -> Result<PandemicResult<C::Genotype>, PandemicError<C::Genotype>> {
    assert_eq!(observers.len(), config.strains.len(), "one observer per strain");
    let cancel = AtomicBool::new(false);
    let n = config.strains.len();
    if let Some(size) = codec.search_space_size() {
        if n as u128 > size {
            return Err(CodecError::SpaceTooSmall { requested: n, available: size }.into());
        }
    }
    let spread = match config.pz_strategy {
        PzStrategy::MaxHammingSpread if n > 1 => {
            let mut rng = RandomSource::seed_from_u64(config.strains[0].seed ^ 0x9e37_79b9_7f4a_7c15);
            Some(seed_patient_zeros(n, codec, PzStrategy::MaxHammingSpread, &mut rng)?)
        }
        _ => None,
    };
    // Patient zeros are claimed before any strain starts, so no two strains
    // share one and none can be killed by another strain before its first step.
    let mut starts = Vec::with_capacity(n);
    let mut handle = ledger;
    for (i, params) in config.strains.iter().enumerate() {
        let mut rng = RandomSource::seed_from_u64(params.seed);
        let mut pz = match &spread {
            Some(pzs) => pzs[i].clone(),
            None => codec.generate_patient_zero(&mut rng),
        };
        let mut attempts = 0;
        while !handle.try_infect(pz.clone()) {
            attempts += 1;
            if attempts > MAX_PZ_REDRAWS {
                let available = codec.search_space_size().unwrap_or(0);
                return Err(CodecError::SpaceTooSmall { requested: n, available }.into());
            }
            pz = codec.generate_patient_zero(&mut rng);
        }
        starts.push((rng, pz));
    }

    let outcomes: Vec<Result<StrainResult<C::Genotype>, RunError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .strains
            .iter()
            .zip(observers)
            .zip(starts)
            .map(|((params, mut observer), (rng, pz))| {
                let cancel = &cancel;
                scope.spawn(move || {
                    let strain = Strain::with_patient_zero(params.clone(), codec, rng, ledger, pz);
                    let outcome = strain.and_then(|s| s.run_observed(&mut observer, Some(cancel)));
                    if outcome.is_err() {
                        cancel.store(true, Ordering::Relaxed);
                    }
                    outcome
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("strain thread panicked")).collect()
    });

    if let Some(strain) = outcomes.iter().position(|o| o.is_err()) {
        let source = outcomes[strain].as_ref().unwrap_err().source.clone();
        return Err(PandemicError::Strain { strain, source, partial: outcomes });
    }
    let strains: Vec<StrainResult<C::Genotype>> = outcomes.into_iter().map(|o| o.unwrap()).collect();
    let objective = config.strains[0].objective;
    let best = select_best(strains.iter().map(|s| &s.best), objective)
        .expect("at least one strain")
        .clone();
    Ok(PandemicResult { best, strains })
}
