//! The single-strain loop.
//!
//! One iteration is:
//!
//! 1. every infected individual dies with probability `p_die`; the dying leave
//!    the infected set for good before anyone spreads,
//! 2. each survivor spreads: it draws whether it travels and whether it is a
//!    super-spreader, then replicates once per drawn infection and routes every
//!    candidate through [`new_infection`],
//! 3. the new infected set is evaluated and the best-so-far updated from it,
//! 4. the spreaders recover and the new infected set becomes the infected set.
//!
//! The loop stops when nobody is left infected or the pandemic duration is
//! reached.

use std::hash::Hash;
use std::sync::atomic::{AtomicBool, Ordering};

use indexmap::IndexSet;
use rayon::prelude::*;
use rustc_hash::{FxBuildHasher, FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::codec::{evaluate, stable_hash, Codec, DistanceMode, EvaluatedIndividual, Genotype};
use crate::error::{CodecError, EvalError, RunError};
use crate::ledger::{Compartment, Ledger, LocalLedger, SharedLedger};
use crate::params::{EpidemicParameters, Objective};
use crate::rng::RandomSource;

pub type GenotypeSet<G> = IndexSet<G, FxBuildHasher>;

/// Per-iteration statistics. Counters are cumulative for the strain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    /// Individuals that died so far.
    pub deaths_total: u64,
    /// Spreaders that recovered so far.
    pub recovered_total: u64,
    /// Size of the infected set at the end of the iteration.
    pub infected_count: u64,
    /// Best fitness found so far.
    pub best_fitness: f64,
    /// Distinct genotypes evaluated so far.
    pub evaluations_total: u64,
    /// Fresh candidates sent straight to recovered so far.
    pub isolated_total: u64,
    /// Recovered genotypes infected again so far.
    pub reinfected_total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Nobody left infected.
    Extinction,
    DurationReached,
    /// Stopped because another strain failed.
    Cancelled,
}

#[derive(Debug, Clone)]
pub struct StrainResult<G> {
    pub patient_zero: EvaluatedIndividual<G>,
    pub best: EvaluatedIndividual<G>,
    pub history: Vec<IterationRecord>,
    pub termination: Termination,
}

impl<G> StrainResult<G> {
    /// First iteration whose best-so-far reaches `optimum` (0 when patient zero already does).
    pub fn iterations_to_optimum(&self, optimum: f64) -> Option<u32> {
        if self.patient_zero.fitness == optimum {
            return Some(0);
        }
        self.history.iter().find(|r| r.best_fitness == optimum).map(|r| r.iteration)
    }

    pub fn evaluations_total(&self) -> u64 {
        self.history.last().map_or(1, |r| r.evaluations_total)
    }
}

/// What happened to one replicated candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Disposition {
    AddedToNewInfected,
    Isolated,
    Ignored,
    Reinfected,
}

/// The infected and new infected sets of one strain plus its compartment ledger.
#[derive(Debug)]
pub struct PopulationLedger<G, L> {
    pub infected: GenotypeSet<G>,
    pub new_infected: GenotypeSet<G>,
    pub compartments: L,
}

impl<G: Genotype, L: Ledger<G>> PopulationLedger<G, L> {
    pub fn new(compartments: L) -> Self {
        PopulationLedger {
            infected: GenotypeSet::default(),
            new_infected: GenotypeSet::default(),
            compartments,
        }
    }
}

/// Outcome of one spreader's turn.
#[derive(Debug, Clone, PartialEq)]
pub struct Spread<G> {
    pub mode: DistanceMode,
    pub superspreader: bool,
    /// Number of replicate calls made.
    pub replications: u32,
    /// Candidates that joined the new infected set.
    pub infected: Vec<G>,
}

/// Selects each member independently with probability `p_die`.
pub fn die<G: Genotype>(
    infected: &GenotypeSet<G>,
    params: &EpidemicParameters,
    rng: &mut RandomSource,
) -> Vec<G> {
    infected.iter().filter(|_| rng.uniform() < params.p_die).cloned().collect()
}

/// Routes one replicated candidate into the ledger.
///
/// Dead and already infected candidates are ignored without consuming any
/// random draw. A fresh candidate is isolated (sent to recovered) unless a
/// fresh draw exceeds `p_isolation`; a recovered candidate is reinfected when a
/// fresh draw falls below `p_reinfection`.
pub fn new_infection<G: Genotype, L: Ledger<G>>(
    candidate: G,
    population: &mut PopulationLedger<G, L>,
    params: &EpidemicParameters,
    rng: &mut RandomSource,
) -> Disposition {
    match population.compartments.compartment(&candidate) {
        Some(Compartment::Dead) | Some(Compartment::Infected) => Disposition::Ignored,
        Some(Compartment::Recovered) => {
            if rng.uniform() < params.p_reinfection
                && population.compartments.try_reinfect(&candidate)
            {
                population.new_infected.insert(candidate);
                Disposition::Reinfected
            } else {
                Disposition::Ignored
            }
        }
        None => {
            if rng.uniform() > params.p_isolation {
                if population.compartments.try_infect(candidate.clone()) {
                    population.new_infected.insert(candidate);
                    Disposition::AddedToNewInfected
                } else {
                    Disposition::Ignored
                }
            } else if population.compartments.try_isolate(candidate) {
                Disposition::Isolated
            } else {
                Disposition::Ignored
            }
        }
    }
}

/// One spreader's turn: draws travel and super-spreading once, then
/// replicates once per drawn infection.
pub fn infect<C: Codec, L: Ledger<C::Genotype>>(
    individual: &C::Genotype,
    population: &mut PopulationLedger<C::Genotype, L>,
    params: &EpidemicParameters,
    codec: &C,
    rng: &mut RandomSource,
) -> Spread<C::Genotype> {
    infect_observed(individual, population, params, codec, rng, &mut ())
}

fn infect_observed<C: Codec, L: Ledger<C::Genotype>, O: StrainObserver<C::Genotype>>(
    individual: &C::Genotype,
    population: &mut PopulationLedger<C::Genotype, L>,
    params: &EpidemicParameters,
    codec: &C,
    rng: &mut RandomSource,
    observer: &mut O,
) -> Spread<C::Genotype> {
    let travels = rng.uniform() < params.p_travel;
    let superspreader = rng.uniform() < params.p_superspreader;
    let mode = if travels { DistanceMode::Traveler } else { DistanceMode::Ordinary };
    let range = if superspreader {
        params.superspreader_spread_range
    } else {
        params.ordinary_spread_range
    };
    let replications = rng.int_inclusive(range.low.into(), range.high.into()) as u32;
    let mut infected = Vec::new();
    for _ in 0..replications {
        let candidate = codec.replicate(individual, mode, params.traveler_rate, rng);
        let disposition = new_infection(candidate.clone(), population, params, rng);
        observer.on_disposition(&candidate, disposition);
        if matches!(disposition, Disposition::AddedToNewInfected | Disposition::Reinfected) {
            infected.push(candidate);
        }
    }
    Spread { mode, superspreader, replications, infected }
}

/// Picks the optimum under `objective`. Ties go to the smaller
/// [`stable_hash`], then to the first encountered, so the winner does not
/// depend on iteration order.
pub fn select_best<'a, G: Genotype + 'a>(
    population: impl IntoIterator<Item = &'a EvaluatedIndividual<G>>,
    objective: Objective,
) -> Result<&'a EvaluatedIndividual<G>, CodecError> {
    best_by(population.into_iter().map(|i| (i, &i.genotype, i.fitness)), objective)
        .ok_or(CodecError::EmptyPopulation)
}

fn best_by<'a, T, G: Hash + 'a>(
    items: impl Iterator<Item = (T, &'a G, f64)>,
    objective: Objective,
) -> Option<T> {
    let mut best: Option<(T, u64, f64)> = None;
    for (item, genotype, fitness) in items {
        let replace = match &best {
            None => true,
            Some((_, hash, incumbent)) => {
                objective.improves(fitness, *incumbent)
                    || (fitness == *incumbent && stable_hash(genotype) < *hash)
            }
        };
        if replace {
            best = Some((item, stable_hash(genotype), fitness));
        }
    }
    best.map(|(item, _, _)| item)
}

/// Hooks for instrumenting a run. All methods default to no-ops.
pub trait StrainObserver<G> {
    /// Called after the death phase, right before the survivors spread.
    fn before_spread<L: Ledger<G>>(&mut self, _population: &PopulationLedger<G, L>) {}

    /// Called once the new infected set is complete, before recovery.
    fn after_spread<L: Ledger<G>>(&mut self, _population: &PopulationLedger<G, L>) {}

    fn on_disposition(&mut self, _candidate: &G, _disposition: Disposition) {}

    fn on_evaluation(&mut self, _genotype: &G) {}

    fn after_iteration<L: Ledger<G>>(
        &mut self,
        _population: &PopulationLedger<G, L>,
        _record: &IterationRecord,
    ) {
    }
}

impl<G> StrainObserver<G> for () {}

/// A single strain that can be driven one iteration at a time.
pub struct Strain<'c, C: Codec, L> {
    params: EpidemicParameters,
    codec: &'c C,
    rng: RandomSource,
    population: PopulationLedger<C::Genotype, L>,
    fitness_cache: FxHashMap<C::Genotype, f64>,
    patient_zero: EvaluatedIndividual<C::Genotype>,
    best: EvaluatedIndividual<C::Genotype>,
    history: Vec<IterationRecord>,
    deaths: u64,
    recoveries: u64,
    isolations: u64,
    reinfections: u64,
    parallel_evaluation: bool,
}

impl<'c, C: Codec, L: Ledger<C::Genotype>> Strain<'c, C, L> {
    /// Creates the strain with a random patient zero drawn from `rng`.
    pub fn new(
        params: EpidemicParameters,
        codec: &'c C,
        mut rng: RandomSource,
        compartments: L,
    ) -> Result<Self, RunError> {
        let patient_zero = codec.generate_patient_zero(&mut rng);
        Self::with_patient_zero(params, codec, rng, compartments, patient_zero)
    }

    pub fn with_patient_zero(
        params: EpidemicParameters,
        codec: &'c C,
        rng: RandomSource,
        compartments: L,
        patient_zero: C::Genotype,
    ) -> Result<Self, RunError> {
        let evaluated = evaluate(codec, &patient_zero)
            .map_err(|source| RunError { source, history: Vec::new() })?;
        let mut population = PopulationLedger::new(compartments);
        // A caller may have claimed the patient zero already.
        population.compartments.try_infect(patient_zero.clone());
        population.infected.insert(patient_zero.clone());
        let mut fitness_cache = FxHashMap::default();
        fitness_cache.insert(patient_zero, evaluated.fitness);
        Ok(Strain {
            params,
            codec,
            rng,
            population,
            fitness_cache,
            patient_zero: evaluated.clone(),
            best: evaluated,
            history: Vec::new(),
            deaths: 0,
            recoveries: 0,
            isolations: 0,
            reinfections: 0,
            parallel_evaluation: false,
        })
    }

    /// Evaluate each iteration's new genotypes on the rayon pool.
    pub fn parallel_evaluation(mut self, enabled: bool) -> Self {
        self.parallel_evaluation = enabled;
        self
    }

    pub fn population(&self) -> &PopulationLedger<C::Genotype, L> {
        &self.population
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn best(&self) -> &EvaluatedIndividual<C::Genotype> {
        &self.best
    }

    pub fn is_finished(&self) -> bool {
        self.population.infected.is_empty()
            || self.history.len() >= self.params.pandemic_duration as usize
    }

    /// Runs one iteration. Returns `None` once the strain has finished.
    pub fn step(&mut self) -> Result<Option<&IterationRecord>, RunError> {
        self.step_observed(&mut ())
    }

    pub fn step_observed<O: StrainObserver<C::Genotype>>(
        &mut self,
        observer: &mut O,
    ) -> Result<Option<&IterationRecord>, RunError> {
        if self.is_finished() {
            return Ok(None);
        }
        let params = self.params.clone();
        let params = &params;

        let dying = die(&self.population.infected, params, &mut self.rng);
        if !dying.is_empty() {
            let dying_set: FxHashSet<&C::Genotype> = dying.iter().collect();
            self.population.infected.retain(|g| !dying_set.contains(g));
        }
        self.deaths += dying.len() as u64;
        for genotype in dying {
            self.population.compartments.kill(genotype);
        }

        observer.before_spread(&self.population);
        for index in 0..self.population.infected.len() {
            let spreader = self.population.infected[index].clone();
            infect_observed(
                &spreader,
                &mut self.population,
                params,
                self.codec,
                &mut self.rng,
                &mut DispositionCounter {
                    isolations: &mut self.isolations,
                    reinfections: &mut self.reinfections,
                    inner: &mut *observer,
                },
            );
        }
        observer.after_spread(&self.population);

        if let Err(source) = self.evaluate_new_infected(observer) {
            return Err(RunError { source, history: self.history.clone() });
        }
        let cache = &self.fitness_cache;
        let iteration_best = best_by(
            self.population.new_infected.iter().map(|g| (g, g, cache[g])),
            params.objective,
        );
        if let Some(genotype) = iteration_best {
            let fitness = cache[genotype];
            if params.objective.improves(fitness, self.best.fitness) {
                self.best = EvaluatedIndividual { genotype: genotype.clone(), fitness };
            }
        }

        let spreaders = std::mem::take(&mut self.population.infected);
        self.recoveries += spreaders.len() as u64;
        for genotype in spreaders {
            self.population.compartments.recover(genotype);
        }
        self.population.infected = std::mem::take(&mut self.population.new_infected);

        let record = IterationRecord {
            iteration: self.history.len() as u32 + 1,
            deaths_total: self.deaths,
            recovered_total: self.recoveries,
            infected_count: self.population.infected.len() as u64,
            best_fitness: self.best.fitness,
            evaluations_total: self.fitness_cache.len() as u64,
            isolated_total: self.isolations,
            reinfected_total: self.reinfections,
        };
        observer.after_iteration(&self.population, &record);
        self.history.push(record);
        Ok(self.history.last())
    }

    fn evaluate_new_infected<O: StrainObserver<C::Genotype>>(
        &mut self,
        observer: &mut O,
    ) -> Result<(), EvalError> {
        let pending: Vec<&C::Genotype> = self
            .population
            .new_infected
            .iter()
            .filter(|g| !self.fitness_cache.contains_key(*g))
            .collect();
        let codec = self.codec;
        let results: Vec<Result<f64, EvalError>> = if self.parallel_evaluation {
            pending.par_iter().map(|g| evaluate(codec, g).map(|e| e.fitness)).collect()
        } else {
            pending.iter().map(|g| evaluate(codec, g).map(|e| e.fitness)).collect()
        };
        let mut evaluated = Vec::with_capacity(pending.len());
        for (genotype, result) in pending.into_iter().zip(results) {
            observer.on_evaluation(genotype);
            evaluated.push((genotype.clone(), result?));
        }
        self.fitness_cache.extend(evaluated);
        Ok(())
    }

    /// Runs to completion.
    pub fn run(self) -> Result<StrainResult<C::Genotype>, RunError> {
        self.run_observed(&mut (), None)
    }

    /// Runs to completion, stopping early when `cancel` is raised.
    pub fn run_observed<O: StrainObserver<C::Genotype>>(
        mut self,
        observer: &mut O,
        cancel: Option<&AtomicBool>,
    ) -> Result<StrainResult<C::Genotype>, RunError> {
        loop {
            if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                return Ok(self.finish(Termination::Cancelled));
            }
            if self.step_observed(observer)?.is_none() {
                break;
            }
        }
        let termination = if self.population.infected.is_empty() {
            Termination::Extinction
        } else {
            Termination::DurationReached
        };
        Ok(self.finish(termination))
    }

    fn finish(self, termination: Termination) -> StrainResult<C::Genotype> {
        StrainResult {
            patient_zero: self.patient_zero,
            best: self.best,
            history: self.history,
            termination,
        }
    }
}

struct DispositionCounter<'a, O> {
    isolations: &'a mut u64,
    reinfections: &'a mut u64,
    inner: &'a mut O,
}

impl<G, O: StrainObserver<G>> StrainObserver<G> for DispositionCounter<'_, O> {
    fn on_disposition(&mut self, candidate: &G, disposition: Disposition) {
        match disposition {
            Disposition::Isolated => *self.isolations += 1,
            Disposition::Reinfected => *self.reinfections += 1,
            _ => {}
        }
        self.inner.on_disposition(candidate, disposition);
    }
}

/// Runs one strain from a random patient zero drawn from `rng`.
///
/// With `shared` set, recovered and dead are read from and written to the
/// shared ledger instead of a private one.
pub fn run_strain<C: Codec>(
    params: &EpidemicParameters,
    codec: &C,
    rng: RandomSource,
    shared: Option<&SharedLedger<C::Genotype>>,
) -> Result<StrainResult<C::Genotype>, RunError> {
    match shared {
        Some(ledger) => Strain::new(params.clone(), codec, rng, ledger)?.run(),
        None => Strain::new(params.clone(), codec, rng, LocalLedger::new())?.run(),
    }
}
