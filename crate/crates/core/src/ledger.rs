//! Compartment bookkeeping: which genotypes are infected, recovered or dead.
//!
//! A genotype is in at most one compartment, so all three are stored in a
//! single map from genotype to [`Compartment`]. Every transition is one map
//! operation, which makes the shared variant linearizable per genotype
//! without extra locking. Genotypes absent from the map are susceptible.

use std::collections::hash_map::Entry as StdEntry;
use std::hash::Hash;
use std::sync::atomic::{AtomicUsize, Ordering};

use dashmap::mapref::entry::Entry;
use dashmap::DashMap;
use rustc_hash::{FxBuildHasher, FxHashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compartment {
    /// Infected, or newly infected during the current iteration.
    Infected,
    Recovered,
    Dead,
}

/// Compartment transitions used by the strain engine.
///
/// Only the listed transitions exist; in particular nothing ever leaves
/// `Dead`.
pub trait Ledger<G> {
    fn compartment(&self, genotype: &G) -> Option<Compartment>;

    /// Susceptible → Infected.
    fn try_infect(&mut self, genotype: G) -> bool;

    /// Recovered → Infected. Only the caller whose transition succeeded may
    /// add the genotype to its new infected set.
    fn try_reinfect(&mut self, genotype: &G) -> bool;

    /// Susceptible → Recovered.
    fn try_isolate(&mut self, genotype: G) -> bool;

    /// Infected → Recovered.
    fn recover(&mut self, genotype: G);

    /// Anything → Dead.
    fn kill(&mut self, genotype: G);

    fn recovered_len(&self) -> usize;

    fn dead_len(&self) -> usize;

    /// Current members of `compartment`, in no particular order.
    fn snapshot(&self, compartment: Compartment) -> Vec<G>;

    fn is_dead(&self, genotype: &G) -> bool {
        self.compartment(genotype) == Some(Compartment::Dead)
    }

    fn is_recovered(&self, genotype: &G) -> bool {
        self.compartment(genotype) == Some(Compartment::Recovered)
    }
}

#[derive(Debug, Default)]
struct Counts {
    recovered: AtomicUsize,
    dead: AtomicUsize,
}

impl Counts {
    fn leave(&self, from: Option<Compartment>) {
        match from {
            Some(Compartment::Recovered) => self.recovered.fetch_sub(1, Ordering::Relaxed),
            Some(Compartment::Dead) => self.dead.fetch_sub(1, Ordering::Relaxed),
            _ => 0,
        };
    }

    fn enter(&self, to: Compartment) {
        match to {
            Compartment::Recovered => self.recovered.fetch_add(1, Ordering::Relaxed),
            Compartment::Dead => self.dead.fetch_add(1, Ordering::Relaxed),
            Compartment::Infected => 0,
        };
    }
}

/// Ledger owned by a single strain.
#[derive(Debug)]
pub struct LocalLedger<G> {
    members: FxHashMap<G, Compartment>,
    counts: Counts,
}

impl<G> Default for LocalLedger<G> {
    fn default() -> Self {
        LocalLedger { members: FxHashMap::default(), counts: Counts::default() }
    }
}

impl<G: Eq + Hash> LocalLedger<G> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members_of(&self, compartment: Compartment) -> impl Iterator<Item = &G> {
        self.members.iter().filter(move |(_, c)| **c == compartment).map(|(g, _)| g)
    }

    fn set(&mut self, genotype: G, to: Compartment) {
        let from = self.members.insert(genotype, to);
        self.counts.leave(from);
        self.counts.enter(to);
    }
}

impl<G: Eq + Hash + Clone> Ledger<G> for LocalLedger<G> {
    fn compartment(&self, genotype: &G) -> Option<Compartment> {
        self.members.get(genotype).copied()
    }

    fn try_infect(&mut self, genotype: G) -> bool {
        match self.members.entry(genotype) {
            StdEntry::Occupied(_) => false,
            StdEntry::Vacant(slot) => {
                slot.insert(Compartment::Infected);
                true
            }
        }
    }

    fn try_reinfect(&mut self, genotype: &G) -> bool {
        match self.members.get_mut(genotype) {
            Some(c) if *c == Compartment::Recovered => {
                *c = Compartment::Infected;
                self.counts.leave(Some(Compartment::Recovered));
                true
            }
            _ => false,
        }
    }

    fn try_isolate(&mut self, genotype: G) -> bool {
        match self.members.entry(genotype) {
            StdEntry::Occupied(_) => false,
            StdEntry::Vacant(slot) => {
                slot.insert(Compartment::Recovered);
                self.counts.enter(Compartment::Recovered);
                true
            }
        }
    }

    fn recover(&mut self, genotype: G) {
        if self.members.get(&genotype) == Some(&Compartment::Infected) {
            self.set(genotype, Compartment::Recovered);
        }
    }

    fn kill(&mut self, genotype: G) {
        self.set(genotype, Compartment::Dead);
    }

    fn recovered_len(&self) -> usize {
        self.counts.recovered.load(Ordering::Relaxed)
    }

    fn dead_len(&self) -> usize {
        self.counts.dead.load(Ordering::Relaxed)
    }

    fn snapshot(&self, compartment: Compartment) -> Vec<G> {
        self.members_of(compartment).cloned().collect()
    }
}

/// Ledger shared by concurrently running strains; use it through `&SharedLedger`.
#[derive(Debug)]
pub struct SharedLedger<G: Eq + Hash> {
    members: DashMap<G, Compartment, FxBuildHasher>,
    counts: Counts,
}

impl<G: Eq + Hash + Clone> Default for SharedLedger<G> {
    fn default() -> Self {
        SharedLedger { members: DashMap::with_hasher(FxBuildHasher), counts: Counts::default() }
    }
}

impl<G: Eq + Hash + Clone> SharedLedger<G> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members_of(&self, compartment: Compartment) -> Vec<G> {
        self.members
            .iter()
            .filter(|e| *e.value() == compartment)
            .map(|e| e.key().clone())
            .collect()
    }

    fn claim_vacant(&self, genotype: G, to: Compartment) -> bool {
        match self.members.entry(genotype) {
            Entry::Occupied(_) => false,
            Entry::Vacant(slot) => {
                slot.insert(to);
                self.counts.enter(to);
                true
            }
        }
    }

    fn transition(&self, genotype: &G, from: Compartment, to: Compartment) -> bool {
        match self.members.get_mut(genotype) {
            Some(mut c) if *c == from => {
                *c = to;
                self.counts.leave(Some(from));
                self.counts.enter(to);
                true
            }
            _ => false,
        }
    }
}

impl<G: Eq + Hash + Clone> Ledger<G> for &SharedLedger<G> {
    fn compartment(&self, genotype: &G) -> Option<Compartment> {
        self.members.get(genotype).map(|c| *c)
    }

    fn try_infect(&mut self, genotype: G) -> bool {
        self.claim_vacant(genotype, Compartment::Infected)
    }

    fn try_reinfect(&mut self, genotype: &G) -> bool {
        self.transition(genotype, Compartment::Recovered, Compartment::Infected)
    }

    fn try_isolate(&mut self, genotype: G) -> bool {
        self.claim_vacant(genotype, Compartment::Recovered)
    }

    fn recover(&mut self, genotype: G) {
        self.transition(&genotype, Compartment::Infected, Compartment::Recovered);
    }

    fn kill(&mut self, genotype: G) {
        let from = self.members.insert(genotype, Compartment::Dead);
        self.counts.leave(from);
        self.counts.enter(Compartment::Dead);
    }

    fn recovered_len(&self) -> usize {
        self.counts.recovered.load(Ordering::Relaxed)
    }

    fn dead_len(&self) -> usize {
        self.counts.dead.load(Ordering::Relaxed)
    }

    fn snapshot(&self, compartment: Compartment) -> Vec<G> {
        self.members_of(compartment)
    }
}
