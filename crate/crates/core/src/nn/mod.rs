//! Variable-length codification of a neural network architecture.
//!
//! An individual is `{LR, DROP, L}{LAYER 1, ..., LAYER L}`:
//!
//! | element | codes    | decoded                                            |
//! |---------|----------|----------------------------------------------------|
//! | LR      | 0..=5    | 0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5                    |
//! | DROP    | 0..=8    | 0, 0.10, 0.15, ..., 0.45                           |
//! | L       | 2..=11   | number of layers (input layer plus hidden layers)  |
//! | LAYER i | 0..=11   | units, `25 * (code + 1)`, i.e. 25..=300            |

mod external;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use external::ExternalEvaluator;

use crate::codec::{Codec, DistanceMode};
use crate::error::{CodecError, EvalError};
use crate::rng::RandomSource;

pub const LR_MAX: u8 = 5;
pub const DROP_MAX: u8 = 8;
pub const LAYERS_MIN: usize = 2;
pub const LAYERS_MAX: usize = 11;
pub const UNITS_MAX: u8 = 11;

/// Penalty for a layer position present in only one of two genotypes.
pub const MISSING_LAYER_PENALTY: u32 = 12;

const LEARNING_RATES: [f64; 6] = [0.0, 0.1, 0.01, 0.001, 0.0001, 0.00001];
const DROPOUTS: [f64; 9] = [0.0, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45];

/// `{lr, drop, L}{u1, ..., uL}`; the layer count is the length of `layer_codes`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetGenotype {
    lr_code: u8,
    drop_code: u8,
    layer_codes: Vec<u8>,
}

impl NetGenotype {
    pub fn new(lr_code: u8, drop_code: u8, layer_codes: Vec<u8>) -> Result<Self, CodecError> {
        if !(LAYERS_MIN..=LAYERS_MAX).contains(&layer_codes.len()) {
            return Err(CodecError::LayerCountOutOfRange(layer_codes.len()));
        }
        if lr_code > LR_MAX || drop_code > DROP_MAX || layer_codes.iter().any(|&c| c > UNITS_MAX) {
            return Err(CodecError::Parse(format!(
                "code out of range in {{{lr_code},{drop_code},{}}}{layer_codes:?}",
                layer_codes.len()
            )));
        }
        Ok(NetGenotype { lr_code, drop_code, layer_codes })
    }

    pub fn lr_code(&self) -> u8 {
        self.lr_code
    }

    pub fn drop_code(&self) -> u8 {
        self.drop_code
    }

    pub fn layer_count(&self) -> usize {
        self.layer_codes.len()
    }

    pub fn layer_codes(&self) -> &[u8] {
        &self.layer_codes
    }

    /// Number of elements that replication may pick: LR, DROP and every layer.
    pub fn mutable_len(&self) -> usize {
        2 + self.layer_codes.len()
    }

    pub fn decode(&self) -> ArchitectureSpec {
        ArchitectureSpec {
            learning_rate: LEARNING_RATES[self.lr_code as usize],
            dropout: DROPOUTS[self.drop_code as usize],
            units: self.layer_codes.iter().map(|&c| 25 * (u32::from(c) + 1)).collect(),
        }
    }

    fn get(&self, position: Position) -> u8 {
        match position {
            Position::LearningRate => self.lr_code,
            Position::Dropout => self.drop_code,
            Position::Layer(i) => self.layer_codes[i],
        }
    }

    fn set(&mut self, position: Position, value: u8) {
        match position {
            Position::LearningRate => self.lr_code = value,
            Position::Dropout => self.drop_code = value,
            Position::Layer(i) => self.layer_codes[i] = value,
        }
    }
}

impl fmt::Display for NetGenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}{{", self.lr_code, self.drop_code, self.layer_codes.len())?;
        for (i, code) in self.layer_codes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{code}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for NetGenotype {
    type Err = CodecError;

    /// Parses the `{4,0,8}{9,7,2,7,2,7,10,7}` text form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CodecError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let rest = compact.strip_prefix('{').ok_or_else(err)?;
        let (head, rest) = rest.split_once("}{").ok_or_else(err)?;
        let body = rest.strip_suffix('}').ok_or_else(err)?;
        let numbers = |text: &str| -> Result<Vec<u8>, CodecError> {
            if text.is_empty() {
                return Ok(Vec::new());
            }
            text.split(',').map(|n| n.parse::<u8>().map_err(|_| err())).collect()
        };
        let head = numbers(head)?;
        let [lr, drop, count] = head[..] else { return Err(err()) };
        let layers = numbers(body)?;
        if layers.len() != count as usize {
            return Err(err());
        }
        NetGenotype::new(lr, drop, layers)
    }
}

impl Serialize for NetGenotype {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NetGenotype {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Decoded hyperparameters, also the request body sent to external evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub learning_rate: f64,
    pub dropout: f64,
    pub units: Vec<u32>,
}

/// An element of the individual other than `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    LearningRate,
    Dropout,
    Layer(usize),
}

impl Position {
    fn range(self) -> (i64, i64) {
        match self {
            Position::LearningRate => (0, LR_MAX.into()),
            Position::Dropout => (0, DROP_MAX.into()),
            Position::Layer(_) => (0, UNITS_MAX.into()),
        }
    }

    fn from_index(index: usize) -> Self {
        match index {
            0 => Position::LearningRate,
            1 => Position::Dropout,
            i => Position::Layer(i - 2),
        }
    }
}

/// Uniform random individual.
pub fn generate_net_patient_zero(rng: &mut RandomSource) -> NetGenotype {
    let lr_code = rng.int_inclusive(0, LR_MAX.into()) as u8;
    let drop_code = rng.int_inclusive(0, DROP_MAX.into()) as u8;
    let layers = rng.int_inclusive(LAYERS_MIN as i64, LAYERS_MAX as i64) as usize;
    let layer_codes = (0..layers).map(|_| rng.int_inclusive(0, UNITS_MAX.into()) as u8).collect();
    NetGenotype { lr_code, drop_code, layer_codes }
}

/// Signed change for a uniform draw `p` in `[0, 1)`: −2, −1, +1 or +2 by quartile.
pub fn change_amount(p: f64) -> i64 {
    if p < 0.25 {
        -2
    } else if p < 0.5 {
        -1
    } else if p < 0.75 {
        1
    } else {
        2
    }
}

/// Applies the change selected by `p` and clamps to `[low, high]`.
pub fn mutate_position_with(value: i64, low: i64, high: i64, p: f64) -> i64 {
    (value + change_amount(p)).clamp(low, high)
}

/// Single position mutation: shifts `value` by −2, −1, +1 or +2 with equal
/// probability, clamped to `[low, high]`.
pub fn mutate_position(value: i64, low: i64, high: i64, rng: &mut RandomSource) -> i64 {
    debug_assert!(low <= value && value <= high);
    mutate_position_with(value, low, high, rng.uniform())
}

/// Truncates to the first `new_len` layers, or appends fresh uniform codes.
pub fn resize_layers(
    genotype: &NetGenotype,
    new_len: usize,
    rng: &mut RandomSource,
) -> Result<NetGenotype, CodecError> {
    resize_layers_with(genotype, new_len, || rng.int_inclusive(0, UNITS_MAX.into()) as u8)
}

/// [`resize_layers`] with the appended codes supplied by `fresh_code`.
pub fn resize_layers_with(
    genotype: &NetGenotype,
    new_len: usize,
    mut fresh_code: impl FnMut() -> u8,
) -> Result<NetGenotype, CodecError> {
    if !(LAYERS_MIN..=LAYERS_MAX).contains(&new_len) {
        return Err(CodecError::LayerCountOutOfRange(new_len));
    }
    let mut resized = genotype.clone();
    resized.layer_codes.truncate(new_len);
    while resized.layer_codes.len() < new_len {
        resized.layer_codes.push(fresh_code().min(UNITS_MAX));
    }
    Ok(resized)
}

/// What [`replicate_net_logged`] changed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MutationLog {
    /// Old and new layer count when the `L` step fired.
    pub layer_count: Option<(usize, usize)>,
    /// Distinct positions picked for single position mutation.
    pub positions: Vec<Position>,
}

/// Number of non-`L` elements to infect.
///
/// Ordinary moves infect one; travelers infect `traveler_rate` elements, or a
/// uniform count in `[0, mutable_len]` when the rate is negative.
pub fn infected_element_count(
    mutable_len: usize,
    mode: DistanceMode,
    traveler_rate: i64,
    rng: &mut RandomSource,
) -> usize {
    match mode {
        DistanceMode::Ordinary => 1,
        DistanceMode::Traveler if traveler_rate >= 0 => (traveler_rate as usize).min(mutable_len),
        DistanceMode::Traveler => rng.int_inclusive(0, mutable_len as i64) as usize,
    }
}

pub fn replicate_net(
    parent: &NetGenotype,
    mode: DistanceMode,
    traveler_rate: i64,
    rng: &mut RandomSource,
) -> NetGenotype {
    replicate_net_logged(parent, mode, traveler_rate, rng).0
}

/// Infection procedure for one child:
///
/// 1. with probability 1/3 mutate `L` over `[2, 11]` and resize the layers,
/// 2. pick how many other elements to infect ([`infected_element_count`]),
/// 3. pick that many distinct positions among LR, DROP and the layers,
/// 4. apply [`mutate_position`] to each.
pub fn replicate_net_logged(
    parent: &NetGenotype,
    mode: DistanceMode,
    traveler_rate: i64,
    rng: &mut RandomSource,
) -> (NetGenotype, MutationLog) {
    let mut log = MutationLog::default();
    let mut child = parent.clone();
    if rng.uniform() < 1.0 / 3.0 {
        let old = child.layer_count();
        let new = mutate_position(old as i64, LAYERS_MIN as i64, LAYERS_MAX as i64, rng) as usize;
        child = resize_layers(&child, new, rng).expect("mutated count stays in range");
        log.layer_count = Some((old, new));
    }
    let count = infected_element_count(child.mutable_len(), mode, traveler_rate, rng);
    for index in rng.distinct_indices(child.mutable_len(), count) {
        let position = Position::from_index(index);
        let (low, high) = position.range();
        let value = mutate_position(child.get(position).into(), low, high, rng);
        child.set(position, value as u8);
        log.positions.push(position);
    }
    (child, log)
}

/// Weighted mismatch distance to `target`; 0 iff the genotypes are equal.
///
/// `|Δlr| + |Δdrop| + 2·|ΔL| + Σ |Δlayer|` over positions aligned from the
/// front, where a position present in only one genotype costs
/// [`MISSING_LAYER_PENALTY`].
pub fn surrogate_fitness(genotype: &NetGenotype, target: &NetGenotype) -> f64 {
    let diff = |a: u8, b: u8| u32::from(a.abs_diff(b));
    let longest = genotype.layer_count().max(target.layer_count());
    let layers: u32 = (0..longest)
        .map(|i| match (genotype.layer_codes.get(i), target.layer_codes.get(i)) {
            (Some(&a), Some(&b)) => diff(a, b),
            _ => MISSING_LAYER_PENALTY,
        })
        .sum();
    let count = genotype.layer_count().abs_diff(target.layer_count()) as u32;
    f64::from(diff(genotype.lr_code, target.lr_code) + diff(genotype.drop_code, target.drop_code) + 2 * count + layers)
}

/// Element-wise mismatch count after aligning layers from the front.
pub fn mismatch_distance(a: &NetGenotype, b: &NetGenotype) -> usize {
    let longest = a.layer_count().max(b.layer_count());
    let layers = (0..longest).filter(|&i| a.layer_codes.get(i) != b.layer_codes.get(i)).count();
    usize::from(a.lr_code != b.lr_code)
        + usize::from(a.drop_code != b.drop_code)
        + usize::from(a.layer_count() != b.layer_count())
        + layers
}

/// Number of distinct genotypes: `6 · 9 · Σ_{L=2}^{11} 12^L`.
pub fn net_search_space_size() -> u128 {
    let per_head = u128::from(LR_MAX + 1) * u128::from(DROP_MAX + 1);
    let layers: u128 = (LAYERS_MIN..=LAYERS_MAX).map(|l| 12u128.pow(l as u32)).sum();
    per_head * layers
}

/// How a [`NetCodec`] scores genotypes.
#[derive(Debug)]
pub enum NetObjective {
    /// Distance to a known target architecture; optimum 0.
    Surrogate(NetGenotype),
    /// Fitness reported by an external process.
    External(ExternalEvaluator),
}

#[derive(Debug)]
pub struct NetCodec {
    objective: NetObjective,
}

impl NetCodec {
    pub fn surrogate(target: NetGenotype) -> Self {
        NetCodec { objective: NetObjective::Surrogate(target) }
    }

    pub fn external(evaluator: ExternalEvaluator) -> Self {
        NetCodec { objective: NetObjective::External(evaluator) }
    }

    pub fn objective(&self) -> &NetObjective {
        &self.objective
    }
}

impl Codec for NetCodec {
    type Genotype = NetGenotype;

    fn generate_patient_zero(&self, rng: &mut RandomSource) -> NetGenotype {
        generate_net_patient_zero(rng)
    }

    fn replicate(
        &self,
        parent: &NetGenotype,
        mode: DistanceMode,
        traveler_rate: i64,
        rng: &mut RandomSource,
    ) -> NetGenotype {
        replicate_net(parent, mode, traveler_rate, rng)
    }

    fn fitness(&self, genotype: &NetGenotype) -> Result<f64, EvalError> {
        match &self.objective {
            NetObjective::Surrogate(target) => Ok(surrogate_fitness(genotype, target)),
            NetObjective::External(evaluator) => evaluator.fitness(genotype),
        }
    }

    fn search_space_size(&self) -> Option<u128> {
        Some(net_search_space_size())
    }

    fn distance(&self, a: &NetGenotype, b: &NetGenotype) -> usize {
        mismatch_distance(a, b)
    }

    fn format_genotype(&self, genotype: &NetGenotype) -> String {
        genotype.to_string()
    }

    fn optimum(&self) -> Option<f64> {
        match self.objective {
            NetObjective::Surrogate(_) => Some(0.0),
            NetObjective::External(_) => None,
        }
    }
}
