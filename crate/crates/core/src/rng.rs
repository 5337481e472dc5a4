use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded, portable pseudo-random source owned by a single strain.
///
/// ChaCha8 output is specified independently of platform and word size, so a
/// seed reproduces the same draws everywhere.
#[derive(Debug, Clone)]
pub struct RandomSource {
    inner: ChaCha8Rng,
}

impl RandomSource {
    pub fn seed_from_u64(seed: u64) -> Self {
        RandomSource { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform real in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform integer in the inclusive range `[low, high]`.
    pub fn int_inclusive(&mut self, low: i64, high: i64) -> i64 {
        assert!(low <= high, "empty range [{low}, {high}]");
        self.inner.gen_range(low..=high)
    }

    /// Uniform index in `[0, len)`.
    pub fn index(&mut self, len: usize) -> usize {
        assert!(len > 0, "index into empty range");
        self.inner.gen_range(0..len)
    }

    /// Uniform `u64` with only the bits of `mask` kept; each kept bit is a fair coin.
    pub fn next_u64_masked(&mut self, mask: u64) -> u64 {
        self.inner.next_u64() & mask
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.inner.gen::<bool>()
    }

    /// `amount` distinct indices from `[0, len)`, in draw order.
    pub fn distinct_indices(&mut self, len: usize, amount: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.inner, len, amount).into_vec()
    }

    /// Derives an independent child stream, e.g. one per strain or per repetition.
    pub fn fork(&mut self) -> RandomSource {
        RandomSource::seed_from_u64(self.inner.next_u64())
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_draws() {
        let mut a = RandomSource::seed_from_u64(7);
        let mut b = RandomSource::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.int_inclusive(-3, 9), b.int_inclusive(-3, 9));
        }
    }

    #[test]
    fn draws_stay_in_range() {
        let mut rng = RandomSource::seed_from_u64(1);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
            let k = rng.int_inclusive(6, 15);
            assert!((6..=15).contains(&k));
        }
        assert_eq!(rng.int_inclusive(4, 4), 4);
    }

    #[test]
    fn distinct_indices_are_distinct() {
        let mut rng = RandomSource::seed_from_u64(3);
        for amount in 0..=10 {
            let mut picks = rng.distinct_indices(10, amount);
            picks.sort_unstable();
            picks.dedup();
            assert_eq!(picks.len(), amount);
            assert!(picks.iter().all(|&i| i < 10));
        }
    }
}
