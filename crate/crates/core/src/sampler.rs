//! Randomness: seeded generators, uniform field sampling and the discrete
//! Gaussian error distribution.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};

/// Default standard deviation of the error distribution.
pub const DEFAULT_SIGMA: f64 = 3.2;
/// Default tail cut, in multiples of sigma.
pub const DEFAULT_TAIL_CUT: u32 = 6;

/// The generator used everywhere in the crate.
pub type Generator = ChaCha20Rng;

/// 32-byte seed for [`Generator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(pub [u8; 32]);

impl Seed {
    /// Fresh seed from OS entropy.
    pub fn from_entropy() -> Self {
        let mut bytes = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut bytes);
        Seed(bytes)
    }

    /// Expands a small integer into a seed; convenient for tests.
    pub fn from_u64(v: u64) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&v.to_le_bytes());
        Seed(bytes)
    }

    /// Parses 64 hex digits.
    pub fn from_hex(s: &str) -> Result<Self> {
        let raw = hex::decode(s.trim()).map_err(|e| Error::InvalidSeed(e.to_string()))?;
        let bytes: [u8; 32] = raw
            .try_into()
            .map_err(|v: Vec<u8>| Error::InvalidSeed(format!("expected 32 bytes, got {}", v.len())))?;
        Ok(Seed(bytes))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// The primary generator for this seed (stream 0).
    pub fn generator(&self) -> Generator {
        ChaCha20Rng::from_seed(self.0)
    }

    /// Independent generator for worker `index`. Distinct indices select
    /// distinct ChaCha streams, none of which is the primary stream.
    pub fn worker_generator(&self, index: u64) -> Generator {
        let mut rng = ChaCha20Rng::from_seed(self.0);
        rng.set_stream(index.wrapping_add(1));
        rng
    }
}

/// Uniform element of F_q by masked rejection sampling; unbiased.
#[inline]
pub fn sample_uniform_element<R: RngCore + ?Sized>(field: &FieldParams, rng: &mut R) -> FieldElement {
    let q = field.modulus();
    let mask = q.next_power_of_two() - 1;
    loop {
        let x = rng.next_u64() & mask;
        if x < q {
            return field.reduce(x);
        }
    }
}

pub fn sample_uniform_vector<R: RngCore + ?Sized>(field: &FieldParams, m: usize, rng: &mut R) -> Vec<FieldElement> {
    (0..m).map(|_| sample_uniform_element(field, rng)).collect()
}

/// Discrete Gaussian over the integers, truncated to `[-B, B]` with
/// `B = ceil(tail_cut * sigma)` and weights `exp(-x^2 / (2 sigma^2))`.
///
/// Sampling inverts a 64-bit fixed-point cumulative table, so the emitted
/// distribution matches [`GaussianSpec::probability`] up to 2^-64 per entry.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    sigma: f64,
    tail_cut: u32,
    bound: i64,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    // cumulative thresholds scaled to 2^64; last entry is exactly 2^64
    thresholds: Vec<u128>,
}

impl GaussianSpec {
    /// Builds the table for `(sigma, tail_cut)` and checks `B < q/4`.
    pub fn new(sigma: f64, tail_cut: u32, field: &FieldParams) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidGaussian(format!("sigma must be positive, got {sigma}")));
        }
        if tail_cut < 4 {
            return Err(Error::InvalidGaussian(format!(
                "tail cut must be at least 4, got {tail_cut}"
            )));
        }
        let bound = (tail_cut as f64 * sigma).ceil() as i64;
        let limit = field.modulus() / 4;
        if bound as u64 >= limit {
            return Err(Error::NoiseBudget { bound, limit });
        }
        let weights: Vec<f64> = (-bound..=bound).map(|x| gaussian_weight(x, sigma)).collect();
        Ok(Self::from_weights(sigma, tail_cut, bound, weights))
    }

    /// The default error distribution (sigma 3.2, tail cut 6).
    pub fn default_for(field: &FieldParams) -> Result<Self> {
        Self::new(DEFAULT_SIGMA, DEFAULT_TAIL_CUT, field)
    }

    /// Point mass at zero. Every draw still consumes one generator word so
    /// randomness consumption does not depend on the noise level.
    pub fn degenerate() -> Self {
        Self::from_weights(0.0, 0, 0, vec![1.0])
    }

    fn from_weights(sigma: f64, tail_cut: u32, bound: i64, weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let scale = 2f64.powi(64);
        let mut thresholds: Vec<u128> = cdf
            .iter()
            .map(|c| ((c * scale).round() as u128).min(1u128 << 64))
            .collect();
        if let Some(last) = thresholds.last_mut() {
            *last = 1u128 << 64;
        }
        GaussianSpec {
            sigma,
            tail_cut,
            bound,
            probs,
            cdf,
            thresholds,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tail_cut(&self) -> u32 {
        self.tail_cut
    }

    /// Support bound `B`: every draw lies in `[-B, B]`.
    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn is_degenerate(&self) -> bool {
        self.bound == 0
    }

    /// Support values in table order, `-B..=B`.
    pub fn support(&self) -> impl Iterator<Item = i64> {
        -self.bound..=self.bound
    }

    /// Normalized probability of `x` (zero outside the support).
    pub fn probability(&self, x: i64) -> f64 {
        if x.abs() > self.bound {
            0.0
        } else {
            self.probs[(x + self.bound) as usize]
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Exact variance of the tabulated distribution.
    pub fn variance(&self) -> f64 {
        self.support().zip(&self.probs).map(|(x, p)| (x * x) as f64 * p).sum()
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        let u = rng.next_u64() as u128;
        let idx = self.thresholds.partition_point(|&t| t <= u);
        idx as i64 - self.bound
    }

    /// Draws `n` values into `out`, in order.
    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [i64]) {
        for e in out.iter_mut() {
            *e = self.sample(rng);
        }
    }
}

/// Unnormalized weight `exp(-x^2 / (2 sigma^2))`.
pub fn gaussian_weight(x: i64, sigma: f64) -> f64 {
    let x = x as f64;
    (-(x * x) / (2.0 * sigma * sigma)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn f31() -> FieldParams {
        FieldParams::mersenne31()
    }

    #[test]
    fn default_table_shape() {
        let g = GaussianSpec::default_for(&f31()).unwrap();
        assert_eq!(g.bound(), 20);
        assert_eq!(g.probabilities().len(), 41);
        let p0 = g.probability(0);
        assert!(g.support().all(|x| g.probability(x) <= p0));
        for x in 0..=20 {
            assert_eq!(g.probability(x), g.probability(-x));
        }
        let ratio = g.probability(20) / g.probability(0);
        let expected = (-400.0f64 / (2.0 * 3.2 * 3.2)).exp();
        assert!((ratio / expected - 1.0).abs() < 1e-9);
        assert!((expected - 3.3e-9).abs() < 0.1e-9);
        let total: f64 = g.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(g.cdf().windows(2).all(|w| w[0] <= w[1]));
        assert!((g.cdf().last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = f31();
        assert!(GaussianSpec::new(0.0, 6, &f).is_err());
        assert!(GaussianSpec::new(-1.0, 6, &f).is_err());
        assert!(GaussianSpec::new(3.2, 3, &f).is_err());
        let small = FieldParams::with_any_prime(101).unwrap();
        assert!(GaussianSpec::new(3.2, 6, &small).is_ok());
        assert_eq!(
            GaussianSpec::new(5.0, 6, &small),
            Err(Error::NoiseBudget { bound: 30, limit: 25 })
        );
    }

    #[test]
    fn degenerate_is_point_mass() {
        let g = GaussianSpec::degenerate();
        let mut rng = Seed::from_u64(0).generator();
        assert!((0..1000).all(|_| g.sample(&mut rng) == 0));
    }

    #[test]
    fn gaussian_moments_and_histogram() {
        let g = GaussianSpec::default_for(&f31()).unwrap();
        let mut rng = Seed::from_u64(11).generator();
        let n = 1_000_000usize;
        let mut hist = vec![0u64; 41];
        let (mut sum, mut sq) = (0f64, 0f64);
        for _ in 0..n {
            let e = g.sample(&mut rng);
            assert!(e.abs() <= 20);
            hist[(e + 20) as usize] += 1;
            sum += e as f64;
            sq += (e * e) as f64;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        let s2 = 3.2f64 * 3.2;
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!(var >= s2 * 0.95 && var <= s2 * 1.05, "var {var}");
        assert!((g.variance() / s2 - 1.0).abs() < 1e-6);

        // Pool the far tails so every cell expects at least 5 hits.
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
        for (i, &h) in hist.iter().enumerate() {
            obs_acc += h as f64;
            exp_acc += g.probabilities()[i] * n as f64;
            if exp_acc >= 5.0 {
                cells.push((obs_acc, exp_acc));
                obs_acc = 0.0;
                exp_acc = 0.0;
            }
        }
        if let Some(last) = cells.last_mut() {
            last.0 += obs_acc;
            last.1 += exp_acc;
        }
        let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
        let crit = ChiSquared::new((cells.len() - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(stat < crit, "chi-square {stat} >= {crit}");
    }

    #[test]
    fn uniform_vector_is_deterministic_and_canonical() {
        let f = f31();
        let a = sample_uniform_vector(&f, 64, &mut Seed::from_u64(5).generator());
        let b = sample_uniform_vector(&f, 64, &mut Seed::from_u64(5).generator());
        let c = sample_uniform_vector(&f, 64, &mut Seed::from_u64(6).generator());
        assert_eq!(a.len(), 64);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|x| x.value() < f.modulus()));
    }

    #[test]
    fn uniform_bucket_chi_square() {
        let f = f31();
        let mut rng = Seed::from_u64(9).generator();
        let n = 1_000_000;
        let width = f.modulus() / 256;
        let mut hist = [0u64; 256];
        for _ in 0..n {
            let v = sample_uniform_element(&f, &mut rng).value();
            hist[((v / width) as usize).min(255)] += 1;
        }
        // Last bucket is one residue wider.
        let q = f.modulus() as f64;
        let stat: f64 = hist
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let w = if i == 255 { f.modulus() - 255 * width } else { width };
                let e = n as f64 * w as f64 / q;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        let crit = ChiSquared::new(255.0).unwrap().inverse_cdf(0.99);
        assert!(stat < crit);
    }

    #[test]
    fn worker_streams_are_distinct() {
        let s = Seed::from_u64(1);
        let mut main = s.generator();
        let firsts: Vec<u64> = (0..8).map(|i| s.worker_generator(i).next_u64()).collect();
        let m0 = main.next_u64();
        assert!(!firsts.contains(&m0));
        let mut sorted = firsts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 8);
        assert_eq!(s.worker_generator(3).next_u64(), firsts[3]);
    }

    #[test]
    fn seed_hex_roundtrip() {
        let s = Seed::from_u64(0xdead_beef);
        assert_eq!(Seed::from_hex(&s.to_hex()).unwrap(), s);
        assert!(Seed::from_hex("abcd").is_err());
        assert!(Seed::from_hex("zz").is_err());
    }
}
