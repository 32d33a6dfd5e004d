//! Deterministic random number generation for the simulation harness.
//!
//! Every stream is derived from a `(seed, stream_id)` pair: splitmix64
//! expands the pair into the 256-bit state of a xoshiro256++ generator,
//! and Box–Muller turns uniform pairs into standard normals. The same
//! pair always produces the same stream, independent of platform and of
//! how many other streams exist, so per-sensor simulation stays
//! reproducible even when sensors run on different threads.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256++ pseudo-random generator.
#[derive(Debug, Clone)]
pub struct Xoshiro256PlusPlus {
    s: [u64; 4],
}

impl Xoshiro256PlusPlus {
    /// Seeds the generator from a `(seed, stream_id)` pair via splitmix64.
    ///
    /// Distinct stream ids give statistically independent streams for the
    /// same seed; one stream per sensor keeps multi-sensor runs decoupled.
    pub fn from_seed_stream(seed: u64, stream_id: u64) -> Self {
        let mut sm = seed.wrapping_add(stream_id.wrapping_mul(GOLDEN_GAMMA));
        let mut s = [0u64; 4];
        for slot in &mut s {
            *slot = splitmix64(&mut sm);
        }
        // the all-zero state is a fixed point of xoshiro
        if s == [0, 0, 0, 0] {
            s = [GOLDEN_GAMMA, 1, 2, 3];
        }
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Stream of standard-normal draws (Box–Muller over xoshiro256++).
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::from_seed_stream(seed, stream_id),
            spare: None,
        }
    }

    /// Next standard-normal draw.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite
        let u1 = 1.0 - self.rng.next_f64();
        let u2 = self.rng.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

impl Iterator for GaussianStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_pairs_give_identical_streams() {
        let a: Vec<f64> = GaussianStream::new(7, 3).take(64).collect();
        let b: Vec<f64> = GaussianStream::new(7, 3).take(64).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_stream_ids_differ() {
        let a: Vec<f64> = GaussianStream::new(7, 0).take(16).collect();
        let b: Vec<f64> = GaussianStream::new(7, 1).take(16).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn sample_mean_is_near_zero() {
        // 3-sigma bound on the mean of 100_000 standard normals
        let n = 100_000;
        let mean: f64 = GaussianStream::new(1, 0).take(n).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn sample_variance_is_near_one() {
        let n = 100_000;
        let draws: Vec<f64> = GaussianStream::new(2, 0).take(n).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn lag_one_autocorrelation_is_near_zero() {
        let n = 100_000;
        let draws: Vec<f64> = GaussianStream::new(3, 0).take(n).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        let cov = draws
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        let rho = cov / var;
        assert!(rho.abs() < 0.02, "lag-1 autocorrelation {rho}");
    }

    #[test]
    fn cross_stream_correlation_is_near_zero() {
        let n = 100_000;
        let a: Vec<f64> = GaussianStream::new(11, 1).take(n).collect();
        let b: Vec<f64> = GaussianStream::new(11, 2).take(n).collect();
        let cross = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / n as f64;
        assert!(cross.abs() < 0.02, "cross-correlation {cross}");
    }

    #[test]
    fn uniform_draws_are_in_unit_interval() {
        let mut rng = Xoshiro256PlusPlus::from_seed_stream(0, 0);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
