//! Seeded, splittable random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Identifies one reproducible sequence of draws.
///
/// Backed by ChaCha8 keyed on `root_seed` with `stream_id` selecting the
/// ChaCha stream, so stream `r` never depends on how many draws any other
/// stream consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub root_seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(root_seed: u64, stream_id: u64) -> Self {
        Self { root_seed, stream_id }
    }

    /// A generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives an independent stream for a nested consumer (e.g. the Monte
    /// Carlo loop inside one replication).
    pub fn child(&self, tag: u64) -> RandomStream {
        let key = splitmix64(splitmix64(self.root_seed ^ 0x5851_f42d_4c95_7f2d) ^ self.stream_id);
        RandomStream { root_seed: splitmix64(key ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)), stream_id: tag }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `count` i.i.d. N(0, 1) draws from the start of `stream`.
pub fn gaussian_draws(stream: RandomStream, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::domain("gaussian_draws needs count >= 1"));
    }
    let mut rng = stream.rng();
    Ok(fill_gaussian(&mut rng, count))
}

pub(crate) fn fill_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    StandardNormal.sample_iter(rng).take(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::ks::{ks_pvalue, ks_statistic};
    use crate::numkit::normal::std_normal_cdf;

    #[test]
    fn reproducible() {
        let s = RandomStream::new(42, 7);
        assert_eq!(gaussian_draws(s, 100).unwrap(), gaussian_draws(s, 100).unwrap());
        assert_ne!(gaussian_draws(s, 100).unwrap(), gaussian_draws(RandomStream::new(42, 8), 100).unwrap());
        assert_ne!(s.child(1), s.child(2));
    }

    #[test]
    fn zero_count_is_rejected() {
        assert!(matches!(gaussian_draws(RandomStream::new(1, 0), 0), Err(Error::Domain(_))));
    }

    #[test]
    fn moments_within_clt_bounds() {
        let n = 1_000_000;
        let d = gaussian_draws(RandomStream::new(2024, 0), n).unwrap();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn ks_against_normal() {
        for seed in [1u64, 2, 3] {
            let d = gaussian_draws(RandomStream::new(seed, 0), 100_000).unwrap();
            let stat = ks_statistic(&d, std_normal_cdf);
            assert!(ks_pvalue(stat, d.len()) > 0.001, "seed {seed} D={stat}");
        }
    }
}
