//! The Coronavirus Optimization Algorithm (CVOA).
//!
//! CVOA searches a discrete space by simulating an epidemic. A single patient
//! zero infects new candidate solutions (replicas with small or large
//! mutations), some individuals die and are never visited again, spreaders
//! recover after one iteration and may be reinfected later, and isolation
//! throttles the growth of the infected population. The best individual ever
//! infected is the result. The search stops by itself once the infected
//! population dies out, or after a fixed number of iterations.
//!
//! ```
//! use cvoa::binary::BinaryCodec;
//! use cvoa::engine::run_strain;
//! use cvoa::params::EpidemicParameters;
//! use cvoa::rng::RandomSource;
//!
//! let codec = BinaryCodec::new(10, 15)?;
//! let params = EpidemicParameters::default().validate()?;
//! let result = run_strain(&params, &codec, RandomSource::seed_from_u64(5), None)?;
//! assert!(result.history.len() <= 30);
//! assert!(result.best.fitness <= result.patient_zero.fitness);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The modules:
//!
//! - [`params`]: rates and probabilities with their suggested defaults,
//! - [`codec`]: the contract a solution representation implements,
//! - [`engine`]: the single-strain loop and its building blocks,
//! - [`ledger`]: infected/recovered/dead bookkeeping, private or shared,
//! - [`multi`]: concurrent strains over a shared ledger,
//! - [`binary`]: bit strings with a quadratic benchmark,
//! - [`nn`]: variable-length neural architecture individuals.

pub mod audit;
pub mod binary;
pub mod codec;
pub mod engine;
pub mod error;
pub mod ledger;
pub mod multi;
pub mod nn;
pub mod params;
pub mod rng;

pub use codec::{Codec, DistanceMode, EvaluatedIndividual};
pub use engine::{run_strain, IterationRecord, StrainResult, Termination};
pub use error::{CodecError, EvalError, ParameterError, RunError};
pub use multi::{run_pandemic, MultiStrainConfig, PzStrategy};
pub use params::{EpidemicParameters, Objective, SpreadRange};
pub use rng::RandomSource;
