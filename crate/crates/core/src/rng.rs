//! Counter-based random streams and deterministic Monte Carlo reduction.
//!
//! Every Monte Carlo integral is cut into fixed-size chunks. Chunk `c` draws
//! from ChaCha8 stream `c` of a key derived from the run seed, so the samples
//! a chunk sees never depend on which worker evaluates it. Chunk statistics are
//! merged in chunk order, which makes estimates bit-identical at any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per Monte Carlo chunk.
pub const CHUNK_SIZE: usize = 1024;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a sequence of words into a single stream key.
pub fn derive_key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908, |acc, &p| mix(acc ^ mix(p)))
}

/// Generator for stream `stream` of `key`.
pub fn stream_rng(key: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, std_error: 0.0 };

    /// `|value| / std_error`, with `0/0 = 0`.
    pub fn significance(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            self.value.abs() / self.std_error
        }
    }

    pub fn within_sigmas(&self, k: f64) -> bool {
        self.value.abs() <= k * self.std_error
    }

    pub fn scaled(&self, c: f64) -> Estimate {
        Estimate {
            value: self.value * c,
            std_error: self.std_error * c.abs(),
        }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, total as f64);
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn estimate(&self) -> Estimate {
        if self.count < 2 {
            return Estimate {
                value: self.mean,
                std_error: 0.0,
            };
        }
        let n = self.count as f64;
        let variance = (self.m2 / (n - 1.0)).max(0.0);
        Estimate {
            value: self.mean,
            std_error: (variance / n).sqrt(),
        }
    }
}

/// Monte Carlo mean of a `K`-component integrand over `samples` draws.
///
/// `integrand` receives the chunk generator and returns one sample of all `K`
/// components. Results are independent of the rayon pool size.
pub fn monte_carlo<const K: usize, F>(samples: usize, key: u64, integrand: F) -> [Estimate; K]
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let partials: Vec<[Welford; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(key, c as u64);
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            let mut acc = [Welford::default(); K];
            for _ in 0..len {
                let sample = integrand(&mut rng);
                for (a, x) in acc.iter_mut().zip(sample) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = [Welford::default(); K];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total.map(|w| w.estimate())
}

/// Build a rayon pool capped at `threads` workers (0 = rayon default).
pub fn thread_pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build thread pool")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1 - 3.0).collect();
        let mut w = Welford::default();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let e = w.estimate();
        assert!((e.value - mean).abs() < 1e-12);
        assert!((e.std_error - (var / xs.len() as f64).sqrt()).abs() < 1e-12);

        let (a, b) = xs.split_at(313);
        let mut wa = Welford::default();
        let mut wb = Welford::default();
        a.iter().for_each(|&x| wa.push(x));
        b.iter().for_each(|&x| wb.push(x));
        wa.merge(&wb);
        assert!((wa.estimate().value - mean).abs() < 1e-12);
        assert!((wa.estimate().std_error - e.std_error).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_pool_independent() {
        let run = |threads| {
            thread_pool(threads).install(|| {
                monte_carlo::<2, _>(10_000, 42, |rng| {
                    let x: f64 = rng.random();
                    [x, x * x]
                })
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert!((a[0].value - 0.5).abs() < 4.0 * a[0].std_error);
        assert!((a[1].value - 1.0 / 3.0).abs() < 4.0 * a[1].std_error);
    }

    #[test]
    fn keys_differ() {
        assert_ne!(derive_key(&[1, 2]), derive_key(&[2, 1]));
        assert_eq!(derive_key(&[7, 9]), derive_key(&[7, 9]));
    }

    #[test]
    fn significance_edge_cases() {
        assert_eq!(Estimate::ZERO.significance(), 0.0);
        assert!(Estimate::ZERO.within_sigmas(3.0));
        assert_eq!(Estimate { value: 1.0, std_error: 0.0 }.significance(), f64::INFINITY);
    }
}
