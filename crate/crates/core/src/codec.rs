//! The contract every solution codification implements.

use std::fmt::Debug;
use std::hash::{BuildHasher, Hash};

use rustc_hash::FxBuildHasher;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::rng::RandomSource;

/// How far a replicated child may land from its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceMode {
    /// Local move (intensification).
    Ordinary,
    /// Long-range move made by a traveling spreader (diversification).
    Traveler,
}

/// Marker bound for genotypes: immutable values with structural equality and hashing.
pub trait Genotype: Clone + Eq + Hash + Debug + Send + Sync {}

impl<T: Clone + Eq + Hash + Debug + Send + Sync> Genotype for T {}

/// A solution representation with its mutation operator and objective.
///
/// `replicate` produces exactly one child per call; how many children a
/// spreader produces is decided by the engine.
pub trait Codec: Sync {
    type Genotype: Genotype;

    fn generate_patient_zero(&self, rng: &mut RandomSource) -> Self::Genotype;

    fn replicate(
        &self,
        parent: &Self::Genotype,
        mode: DistanceMode,
        traveler_rate: i64,
        rng: &mut RandomSource,
    ) -> Self::Genotype;

    /// Deterministic in the genotype. Must be safe to call concurrently.
    fn fitness(&self, genotype: &Self::Genotype) -> Result<f64, EvalError>;

    /// Number of distinct genotypes, when it fits in a `u128`.
    fn search_space_size(&self) -> Option<u128>;

    /// Hamming-style distance used to spread patient zeros apart.
    fn distance(&self, a: &Self::Genotype, b: &Self::Genotype) -> usize;

    /// Text form used in logs and `best.txt`.
    fn format_genotype(&self, genotype: &Self::Genotype) -> String;

    /// Known optimal fitness, if any. Used for iterations-to-optimum.
    fn optimum(&self) -> Option<f64> {
        None
    }
}

/// A genotype together with its (finite) fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedIndividual<G> {
    pub genotype: G,
    pub fitness: f64,
}

impl<G: Genotype> EvaluatedIndividual<G> {
    /// Fails with [`EvalError::NonFinite`] for NaN or infinite fitness.
    pub fn new(genotype: G, fitness: f64) -> Result<Self, EvalError> {
        if fitness.is_finite() {
            Ok(EvaluatedIndividual { genotype, fitness })
        } else {
            Err(EvalError::NonFinite { genotype: format!("{genotype:?}"), value: fitness })
        }
    }
}

/// Evaluates `genotype` and rejects non-finite values.
pub fn evaluate<C: Codec + ?Sized>(
    codec: &C,
    genotype: &C::Genotype,
) -> Result<EvaluatedIndividual<C::Genotype>, EvalError> {
    let fitness = codec.fitness(genotype)?;
    if fitness.is_finite() {
        Ok(EvaluatedIndividual { genotype: genotype.clone(), fitness })
    } else {
        Err(EvalError::NonFinite { genotype: codec.format_genotype(genotype), value: fitness })
    }
}

/// Process-independent hash used to order genotypes deterministically.
pub fn stable_hash<G: Hash>(genotype: &G) -> u64 {
    FxBuildHasher.hash_one(genotype)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_fitness_is_rejected() {
        assert!(EvaluatedIndividual::new(1u8, f64::NAN).is_err());
        assert!(EvaluatedIndividual::new(1u8, f64::INFINITY).is_err());
        assert_eq!(EvaluatedIndividual::new(1u8, 2.0).unwrap().fitness, 2.0);
    }

    #[test]
    fn stable_hash_is_structural() {
        assert_eq!(stable_hash(&vec![1u8, 2, 3]), stable_hash(&vec![1u8, 2, 3]));
        assert_ne!(stable_hash(&vec![1u8, 2, 3]), stable_hash(&vec![3u8, 2, 1]));
    }
}
