//! An observer that checks the ledger invariants on every iteration.
//!
//! Checked:
//!
//! - dead and recovered are disjoint, and dead only grows,
//! - no infected individual is dead when spreading starts,
//! - the new infected set holds no dead or recovered genotype, and exactly one
//!   entry per accepted infection (no duplicates were inserted),
//! - every genotype is evaluated at most once and never after death,
//! - the best-so-far fitness is monotone.

use std::hash::Hash;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::codec::Genotype;
use crate::engine::{Disposition, IterationRecord, PopulationLedger, StrainObserver};
use crate::ledger::{Compartment, Ledger};
use crate::params::Objective;

#[derive(Debug)]
pub struct LedgerAudit<G: Eq + Hash> {
    objective: Objective,
    dead: FxHashSet<G>,
    accepted: usize,
    evaluations: FxHashMap<G, u32>,
    last_best: Option<f64>,
    pub iterations_checked: u32,
    pub violations: Vec<String>,
}

impl<G: Genotype> LedgerAudit<G> {
    pub fn new(objective: Objective) -> Self {
        LedgerAudit {
            objective,
            dead: FxHashSet::default(),
            accepted: 0,
            evaluations: FxHashMap::default(),
            last_best: None,
            iterations_checked: 0,
            violations: Vec::new(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, message: String) {
        // Cap the log; one failing invariant tends to repeat every iteration.
        if self.violations.len() < 100 {
            self.violations.push(message);
        }
    }
}

impl<G: Genotype> StrainObserver<G> for LedgerAudit<G> {
    fn before_spread<L: Ledger<G>>(&mut self, population: &PopulationLedger<G, L>) {
        self.accepted = 0;
        for g in &population.infected {
            if population.compartments.is_dead(g) {
                self.flag(format!("infected {g:?} is dead at spread time"));
            }
        }
    }

    fn on_disposition(&mut self, _candidate: &G, disposition: Disposition) {
        if matches!(disposition, Disposition::AddedToNewInfected | Disposition::Reinfected) {
            self.accepted += 1;
        }
    }

    fn after_spread<L: Ledger<G>>(&mut self, population: &PopulationLedger<G, L>) {
        if population.new_infected.len() != self.accepted {
            self.flag(format!(
                "{} accepted infections but {} new infected",
                self.accepted,
                population.new_infected.len()
            ));
        }
        for g in &population.new_infected {
            match population.compartments.compartment(g) {
                Some(Compartment::Infected) => {}
                other => self.flag(format!("new infected {g:?} is in {other:?}")),
            }
        }
    }

    fn on_evaluation(&mut self, genotype: &G) {
        if self.dead.contains(genotype) {
            self.flag(format!("dead {genotype:?} evaluated"));
        }
        let count = {
            let slot = self.evaluations.entry(genotype.clone()).or_default();
            *slot += 1;
            *slot
        };
        if count > 1 {
            self.flag(format!("{genotype:?} evaluated {count} times"));
        }
    }

    fn after_iteration<L: Ledger<G>>(
        &mut self,
        population: &PopulationLedger<G, L>,
        record: &IterationRecord,
    ) {
        self.iterations_checked += 1;
        let dead: FxHashSet<G> = population.compartments.snapshot(Compartment::Dead).into_iter().collect();
        let recovered = population.compartments.snapshot(Compartment::Recovered);
        if let Some(g) = recovered.iter().find(|g| dead.contains(*g)) {
            self.flag(format!("{g:?} both dead and recovered"));
        }
        if let Some(g) = self.dead.iter().find(|g| !dead.contains(*g)) {
            self.flag(format!("{g:?} left dead"));
        }
        for g in &population.infected {
            if dead.contains(g) {
                self.flag(format!("infected {g:?} is dead"));
            }
        }
        self.dead = dead;
        if let Some(previous) = self.last_best {
            if self.objective.improves(previous, record.best_fitness) {
                self.flag(format!(
                    "best fitness regressed from {previous} to {} at iteration {}",
                    record.best_fitness, record.iteration
                ));
            }
        }
        self.last_best = Some(record.best_fitness);
    }
}
