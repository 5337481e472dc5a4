//! Epidemic parameters and their validation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParameterError;

/// Direction of optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Minimize,
    Maximize,
}

impl Objective {
    /// `true` when `candidate` is strictly better than `incumbent`.
    pub fn improves(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Objective::Minimize => candidate < incumbent,
            Objective::Maximize => candidate > incumbent,
        }
    }

    /// `true` when `candidate` is at least as good as `incumbent`.
    pub fn at_least_as_good(self, candidate: f64, incumbent: f64) -> bool {
        candidate == incumbent || self.improves(candidate, incumbent)
    }
}

/// Inclusive integer interval from which spread counts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadRange {
    pub low: u32,
    pub high: u32,
}

impl SpreadRange {
    pub const fn new(low: u32, high: u32) -> Self {
        SpreadRange { low, high }
    }

    pub fn contains(&self, value: u32) -> bool {
        (self.low..=self.high).contains(&value)
    }
}

impl fmt::Display for SpreadRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.low, self.high)
    }
}

/// All rates and probabilities that drive one strain.
///
/// The defaults are the suggested values for the coronavirus: 5% mortality,
/// 10% super-spreaders, ordinary spreaders infecting 0 to 5 individuals
/// (mean 2.5, the basic reproductive number), super-spreaders infecting 6 to
/// 15, 14% reinfection, 50% isolation, 10% travelers and a 30-week pandemic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpidemicParameters {
    pub p_die: f64,
    pub p_superspreader: f64,
    pub ordinary_spread_range: SpreadRange,
    pub superspreader_spread_range: SpreadRange,
    pub p_reinfection: f64,
    pub p_isolation: f64,
    pub p_travel: f64,
    pub pandemic_duration: u32,
    pub strains: u32,
    /// Travel distance handed to the codec. Negative means "random distance".
    pub traveler_rate: i64,
    pub objective: Objective,
    pub seed: u64,
}

impl Default for EpidemicParameters {
    fn default() -> Self {
        EpidemicParameters {
            p_die: 0.05,
            p_superspreader: 0.1,
            ordinary_spread_range: SpreadRange::new(0, 5),
            superspreader_spread_range: SpreadRange::new(6, 15),
            p_reinfection: 0.14,
            p_isolation: 0.5,
            p_travel: 0.1,
            pandemic_duration: 30,
            strains: 1,
            traveler_rate: 3,
            objective: Objective::Minimize,
            seed: 0,
        }
    }
}

impl EpidemicParameters {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks every invariant and returns the parameters unchanged when they hold.
    ///
    /// All violations are collected, not just the first one.
    pub fn validate(self) -> Result<Self, ParameterError> {
        let mut violations = Vec::new();
        let probabilities = [
            ("p_die", self.p_die),
            ("p_superspreader", self.p_superspreader),
            ("p_reinfection", self.p_reinfection),
            ("p_isolation", self.p_isolation),
            ("p_travel", self.p_travel),
        ];
        for (name, value) in probabilities {
            // NaN fails the range check as well.
            if !(0.0..=1.0).contains(&value) {
                violations.push(format!("{name} out of [0,1] (got {value})"));
            }
        }
        let ordinary = self.ordinary_spread_range;
        let superspreader = self.superspreader_spread_range;
        if ordinary.low > ordinary.high {
            violations.push(format!("ordinary_spread_range {ordinary} is empty"));
        }
        if superspreader.low > superspreader.high {
            violations.push(format!("superspreader_spread_range {superspreader} is empty"));
        }
        if superspreader.low < ordinary.high {
            violations.push(format!(
                "superspreader_spread_range {superspreader} starts below ordinary_spread_range {ordinary}"
            ));
        }
        if self.pandemic_duration < 1 {
            violations.push("pandemic_duration must be at least 1".to_string());
        }
        if self.strains < 1 {
            violations.push("strains must be at least 1".to_string());
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ParameterError { violations })
        }
    }
}

/// Free-function form of [`EpidemicParameters::validate`].
pub fn validate_parameters(params: EpidemicParameters) -> Result<EpidemicParameters, ParameterError> {
    params.validate()
}
