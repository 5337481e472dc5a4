//! Fixed-length bit strings with the quadratic benchmark `f(x) = (x - target)^2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codec::{Codec, DistanceMode};
use crate::error::{CodecError, EvalError};
use crate::rng::RandomSource;

pub const MIN_BITS: u32 = 8;
pub const MAX_BITS: u32 = 64;

/// A bit string of 8 to 64 bits, read most-significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitGenotype {
    bits: u64,
    len: u8,
}

fn check_len(len: u32) -> Result<(), CodecError> {
    if (MIN_BITS..=MAX_BITS).contains(&len) {
        Ok(())
    } else {
        Err(CodecError::UnsupportedLength(len))
    }
}

fn mask(len: u32) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl BitGenotype {
    pub fn from_value(value: u64, len: u32) -> Result<Self, CodecError> {
        check_len(len)?;
        if value & !mask(len) != 0 {
            return Err(CodecError::Parse(format!("{value} does not fit in {len} bits")));
        }
        Ok(BitGenotype { bits: value, len: len as u8 })
    }

    pub fn len(&self) -> u32 {
        self.len.into()
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Big-endian positional value.
    pub fn decode(&self) -> u64 {
        self.bits
    }

    /// Bit at `index`, where index 0 is the most significant (leftmost) bit.
    pub fn bit(&self, index: u32) -> bool {
        assert!(index < self.len());
        self.bits >> (self.len() - 1 - index) & 1 == 1
    }

    pub fn flip(&self, index: u32) -> Self {
        assert!(index < self.len());
        BitGenotype { bits: self.bits ^ (1 << (self.len() - 1 - index)), len: self.len }
    }

    pub fn hamming(&self, other: &Self) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }
}

impl fmt::Display for BitGenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.len as usize)
    }
}

impl FromStr for BitGenotype {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(CodecError::Parse(s.to_string()));
        }
        let len = u32::try_from(s.len()).map_err(|_| CodecError::Parse(s.to_string()))?;
        check_len(len)?;
        let bits = u64::from_str_radix(s, 2).map_err(|_| CodecError::Parse(s.to_string()))?;
        Ok(BitGenotype { bits, len: len as u8 })
    }
}

impl Serialize for BitGenotype {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitGenotype {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(decode(g) - target)^2`.
///
/// The square is exact in integer arithmetic when it fits in a `u128` and is
/// rounded to the nearest `f64` at the end.
pub fn quadratic_fitness(genotype: &BitGenotype, target: u64) -> f64 {
    let diff = u128::from(genotype.decode().abs_diff(target));
    match diff.checked_mul(diff) {
        Some(square) => square as f64,
        None => (diff as f64) * (diff as f64),
    }
}

/// Uniform random bit string of `len` bits.
pub fn random_patient_zero(len: u32, rng: &mut RandomSource) -> Result<BitGenotype, CodecError> {
    check_len(len)?;
    let bits = rng.next_u64_masked(mask(len));
    Ok(BitGenotype { bits, len: len as u8 })
}

/// Number of bits a traveler flips: `max(2, ceil(n / 10))`.
pub fn traveler_flips(len: u32) -> u32 {
    len.div_ceil(10).max(2)
}

/// One child: a single flipped bit for ordinary moves, [`traveler_flips`]
/// distinct flipped bits for travelers.
pub fn replicate_bits(parent: &BitGenotype, mode: DistanceMode, rng: &mut RandomSource) -> BitGenotype {
    let len = parent.len();
    let flips = match mode {
        DistanceMode::Ordinary => 1,
        DistanceMode::Traveler => traveler_flips(len),
    };
    rng.distinct_indices(len as usize, flips as usize)
        .into_iter()
        .fold(*parent, |child, index| child.flip(index as u32))
}

/// The binary codification of the preliminary experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCodec {
    bits: u32,
    target: u64,
}

impl BinaryCodec {
    pub fn new(bits: u32, target: u64) -> Result<Self, CodecError> {
        check_len(bits)?;
        if target & !mask(bits) != 0 {
            return Err(CodecError::Parse(format!("target {target} does not fit in {bits} bits")));
        }
        Ok(BinaryCodec { bits, target })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn target(&self) -> u64 {
        self.target
    }
}

impl Codec for BinaryCodec {
    type Genotype = BitGenotype;

    fn generate_patient_zero(&self, rng: &mut RandomSource) -> BitGenotype {
        random_patient_zero(self.bits, rng).expect("length checked at construction")
    }

    /// `traveler_rate` is not used: the flip count depends on the length only.
    fn replicate(
        &self,
        parent: &BitGenotype,
        mode: DistanceMode,
        _traveler_rate: i64,
        rng: &mut RandomSource,
    ) -> BitGenotype {
        replicate_bits(parent, mode, rng)
    }

    fn fitness(&self, genotype: &BitGenotype) -> Result<f64, EvalError> {
        Ok(quadratic_fitness(genotype, self.target))
    }

    fn search_space_size(&self) -> Option<u128> {
        Some(1u128 << self.bits)
    }

    fn distance(&self, a: &BitGenotype, b: &BitGenotype) -> usize {
        a.hamming(b) as usize
    }

    fn format_genotype(&self, genotype: &BitGenotype) -> String {
        genotype.to_string()
    }

    fn optimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitGenotype {
        s.parse().unwrap()
    }

    #[test]
    fn decode_is_big_endian() {
        assert_eq!(bits("0000001111").decode(), 15);
        assert_eq!(bits("0000000000").decode(), 0);
        assert_eq!(bits("1000000000").decode(), 512);
        let twenty = bits("00000000000000001111");
        assert_eq!(twenty.decode(), 15);
        assert_eq!(quadratic_fitness(&twenty, 15), 0.0);
    }

    #[test]
    fn text_form_round_trips() {
        let g = bits("0100110001");
        assert_eq!(g.to_string(), "0100110001");
        assert_eq!(serde_json::to_string(&g).unwrap(), "\"0100110001\"");
        assert!("0101".parse::<BitGenotype>().is_err());
        assert!("01012abc".parse::<BitGenotype>().is_err());
    }

    #[test]
    fn quadratic_values() {
        let at = |x| BitGenotype::from_value(x, 10).unwrap();
        assert_eq!(quadratic_fitness(&at(15), 15), 0.0);
        assert_eq!(quadratic_fitness(&at(16), 15), 1.0);
        assert_eq!(quadratic_fitness(&at(0), 15), 225.0);
    }

    #[test]
    fn quadratic_is_zero_only_at_target_exhaustively() {
        for x in 0..1024u64 {
            let g = BitGenotype::from_value(x, 10).unwrap();
            let f = quadratic_fitness(&g, 15);
            let expected = (x as i64 - 15).pow(2) as f64;
            assert_eq!(f, expected);
            assert_eq!(f == 0.0, x == 15);
        }
    }

    #[test]
    fn quadratic_does_not_overflow_at_64_bits() {
        let g = BitGenotype::from_value(u64::MAX, 64).unwrap();
        let f = quadratic_fitness(&g, 15);
        assert!(f.is_finite() && f > 3.0e38);
        let g = BitGenotype::from_value(1 << 49, 50).unwrap();
        assert_eq!(quadratic_fitness(&g, 15), (((1u128 << 49) - 15).pow(2)) as f64);
    }

    #[test]
    fn traveler_flip_counts() {
        assert_eq!(traveler_flips(10), 2);
        assert_eq!(traveler_flips(20), 2);
        assert_eq!(traveler_flips(21), 3);
        assert_eq!(traveler_flips(50), 5);
    }

    #[test]
    fn replicate_flips_the_contracted_number_of_bits() {
        let mut rng = RandomSource::seed_from_u64(1);
        for (len, mode, expected) in [
            (10, DistanceMode::Ordinary, 1),
            (10, DistanceMode::Traveler, 2),
            (20, DistanceMode::Traveler, 2),
            (50, DistanceMode::Traveler, 5),
            (50, DistanceMode::Ordinary, 1),
        ] {
            for _ in 0..200 {
                let parent = random_patient_zero(len, &mut rng).unwrap();
                let child = replicate_bits(&parent, mode, &mut rng);
                assert_eq!(child.len(), len);
                assert_eq!(parent.hamming(&child), expected);
            }
        }
    }

    #[test]
    fn patient_zero_lengths() {
        let mut rng = RandomSource::seed_from_u64(2);
        assert_eq!(random_patient_zero(10, &mut rng).unwrap().len(), 10);
        assert_eq!(random_patient_zero(1, &mut rng), Err(CodecError::UnsupportedLength(1)));
        assert_eq!(random_patient_zero(65, &mut rng), Err(CodecError::UnsupportedLength(65)));
        let a = random_patient_zero(20, &mut rng).unwrap();
        let b = random_patient_zero(20, &mut rng).unwrap();
        assert_ne!(a, b);
        let full = random_patient_zero(64, &mut rng).unwrap();
        assert_eq!(full.len(), 64);
    }

    #[test]
    fn patient_zero_bits_are_fair() {
        let mut rng = RandomSource::seed_from_u64(3);
        let ones: u32 = (0..2000).map(|_| random_patient_zero(50, &mut rng).unwrap().decode().count_ones()).sum();
        // 1e5 fair coins: mean 5e4, sd ≈ 158.
        assert!((ones as f64 - 50_000.0).abs() < 800.0, "{ones}");
    }
}
