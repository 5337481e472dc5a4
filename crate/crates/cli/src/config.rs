//! Run configuration files.
//!
//! A configuration is a TOML document:
//!
//! ```toml
//! repeat = 50
//! output = "out/ten-bits"
//! pz_strategy = "random"          # or "max_hamming_spread"
//!
//! [codec]
//! kind = "binary"
//! bits = 10
//! target = 15
//!
//! [epidemic]
//! p_die = 0.05
//! seed = 0
//! strains = 1
//! ```
//!
//! The neural-architecture codec is selected with `kind = "nn"` and exactly
//! one of `surrogate` (a target genotype such as `"{4,0,8}{9,7,2,7,2,7,10,7}"`,
//! or `"random"` for a hidden target drawn per run) and `command` (an external
//! evaluator, program followed by its arguments).

use std::fs;
use std::path::{Path, PathBuf};

use cvoa::binary::BinaryCodec;
use cvoa::nn::{generate_net_patient_zero, ExternalEvaluator, NetCodec, NetGenotype};
use cvoa::{EpidemicParameters, MultiStrainConfig, PzStrategy, RandomSource};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Mixed into a run seed to draw a hidden surrogate target.
const HIDDEN_TARGET_SALT: u64 = 0x5eed_7a59_e7c0_de00;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodecConfig {
    Binary {
        bits: u32,
        #[serde(default = "default_target")]
        target: u64,
    },
    Nn {
        #[serde(default)]
        surrogate: Option<String>,
        #[serde(default)]
        command: Option<Vec<String>>,
    },
}

fn default_target() -> u64 {
    15
}

fn default_repeat() -> u32 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("cvoa-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub codec: CodecConfig,
    #[serde(default)]
    pub epidemic: EpidemicParameters,
    #[serde(default)]
    pub pz_strategy: PzStrategy,
    #[serde(default = "default_repeat")]
    pub repeat: u32,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

/// A codec ready to run.
#[derive(Debug)]
pub enum ConfiguredCodec {
    Binary(BinaryCodec),
    Net(NetCodec),
}

impl RunConfig {
    pub fn binary(bits: u32, target: u64) -> Self {
        RunConfig {
            codec: CodecConfig::Binary { bits, target },
            epidemic: EpidemicParameters::default(),
            pz_strategy: PzStrategy::default(),
            repeat: 1,
            output: default_output(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))?;
        config.validate()
    }

    /// Checks everything that can be checked before running, reporting all
    /// problems at once.
    pub fn validate(self) -> Result<Self, CliError> {
        let mut problems = Vec::new();
        if self.repeat < 1 {
            problems.push("repeat must be at least 1".to_string());
        }
        if let Err(e) = self.epidemic.clone().validate() {
            problems.extend(e.violations);
        }
        match &self.codec {
            CodecConfig::Binary { bits, target } => {
                if let Err(e) = BinaryCodec::new(*bits, *target) {
                    problems.push(e.to_string());
                }
            }
            CodecConfig::Nn { surrogate, command } => match (surrogate, command) {
                (Some(_), Some(_)) | (None, None) => {
                    problems.push("nn codec needs exactly one of `surrogate` and `command`".to_string())
                }
                (Some(target), None) if target != "random" => {
                    if let Err(e) = target.parse::<NetGenotype>() {
                        problems.push(format!("surrogate target: {e}"));
                    }
                }
                (None, Some(command)) if command.is_empty() => {
                    problems.push("`command` must name a program".to_string())
                }
                _ => {}
            },
        }
        if problems.is_empty() {
            Ok(self)
        } else {
            Err(CliError::Config(problems))
        }
    }

    /// Strain parameters for the run with base seed `seed`.
    pub fn strains(&self, seed: u64) -> MultiStrainConfig {
        MultiStrainConfig::uniform(&self.epidemic.clone().with_seed(seed), self.pz_strategy)
    }

    /// Builds the codec for the run with base seed `seed`.
    pub fn codec(&self, seed: u64) -> Result<ConfiguredCodec, CliError> {
        Ok(match &self.codec {
            CodecConfig::Binary { bits, target } => {
                ConfiguredCodec::Binary(BinaryCodec::new(*bits, *target).map_err(|e| CliError::Config(vec![e.to_string()]))?)
            }
            CodecConfig::Nn { surrogate: Some(target), .. } if target == "random" => {
                let mut rng = RandomSource::seed_from_u64(seed ^ HIDDEN_TARGET_SALT);
                ConfiguredCodec::Net(NetCodec::surrogate(generate_net_patient_zero(&mut rng)))
            }
            CodecConfig::Nn { surrogate: Some(target), .. } => {
                let target = target.parse().map_err(|e: cvoa::CodecError| CliError::Config(vec![e.to_string()]))?;
                ConfiguredCodec::Net(NetCodec::surrogate(target))
            }
            CodecConfig::Nn { command: Some(command), .. } => {
                let (program, args) = command.split_first().ok_or_else(|| CliError::Config(vec!["empty command".into()]))?;
                ConfiguredCodec::Net(NetCodec::external(ExternalEvaluator::new(program.clone(), args.to_vec())))
            }
            CodecConfig::Nn { .. } => return Err(CliError::Config(vec!["nn codec has no objective".into()])),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_binary_config() {
        let config = RunConfig::parse("[codec]\nkind = \"binary\"\nbits = 10\n").unwrap();
        assert_eq!(config.codec, CodecConfig::Binary { bits: 10, target: 15 });
        assert_eq!(config.repeat, 1);
        assert_eq!(config.epidemic, EpidemicParameters::default());
    }

    #[test]
    fn full_config() {
        let text = r#"
            repeat = 3
            output = "x"
            pz_strategy = "max_hamming_spread"
            [codec]
            kind = "nn"
            surrogate = "{4,0,8}{9,7,2,7,2,7,10,7}"
            [epidemic]
            p_die = 0.1
            strains = 4
            seed = 9
            objective = "maximize"
            ordinary_spread_range = { low = 1, high = 4 }
        "#;
        let config = RunConfig::parse(text).unwrap();
        assert_eq!(config.pz_strategy, PzStrategy::MaxHammingSpread);
        assert_eq!(config.epidemic.strains, 4);
        assert_eq!(config.epidemic.ordinary_spread_range.low, 1);
        assert_eq!(config.strains(9).strains.len(), 4);
    }

    #[test]
    fn all_problems_are_reported() {
        let text = "repeat = 0\n[codec]\nkind = \"binary\"\nbits = 4\n[epidemic]\np_die = 2.0\n";
        let CliError::Config(problems) = RunConfig::parse(text).unwrap_err() else { panic!() };
        assert_eq!(problems.len(), 3, "{problems:?}");
    }

    #[test]
    fn nn_needs_exactly_one_objective() {
        assert!(RunConfig::parse("[codec]\nkind = \"nn\"\n").is_err());
        let both = "[codec]\nkind = \"nn\"\nsurrogate = \"random\"\ncommand = [\"sh\"]\n";
        assert!(RunConfig::parse(both).is_err());
        assert!(RunConfig::parse("[codec]\nkind = \"nn\"\nsurrogate = \"{1,2}\"\n").is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::parse("[codec]\nkind = \"binary\"\nbits = 10\nbitz = 3\n").is_err());
        assert!(RunConfig::parse("[codec]\nkind = \"ternary\"\n").is_err());
    }

    #[test]
    fn hidden_targets_depend_on_the_seed() {
        let config = RunConfig::parse("[codec]\nkind = \"nn\"\nsurrogate = \"random\"\n").unwrap();
        let target = |seed| match config.codec(seed).unwrap() {
            ConfiguredCodec::Net(codec) => match codec.objective() {
                cvoa::nn::NetObjective::Surrogate(t) => t.clone(),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        };
        assert_eq!(target(1), target(1));
        assert_ne!(target(1), target(2));
    }
}
