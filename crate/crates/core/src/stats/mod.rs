//! Statistical harness for the scheme's observable security properties.
//!
//! Nothing here proves security. Each experiment reports whether a simple
//! distinguisher (a bucketed chi-square test, or a concrete IND-CPA
//! adversary) fails to tell scheme output from uniform randomness.

mod collusion;
mod ind_cpa;
mod lwe;
pub mod suite;

pub use collusion::{collusion_residuals, LeakedKnowledge};
pub use ind_cpa::{
    ind_cpa_game, Adversary, FirstColumnComparator, GameConfig, IndCpaOutcome, KeyHoldingCheater, OracleLog,
    RandomGuesser,
};
pub use lwe::{gen_lwe_samples, gen_uniform_decoys, solve_noiseless, LweSampleSet};

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};

/// Significance level used by every gate in the harness.
pub const DEFAULT_ALPHA: f64 = 0.01;
/// Default number of equal-width buckets over `[0, q)`.
pub const DEFAULT_BUCKETS: usize = 256;
/// Minimum expected count per bucket.
pub const MIN_EXPECTED_PER_BUCKET: usize = 5;

/// Result of a Pearson chi-square test against the uniform distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformityReport {
    pub n_samples: usize,
    pub n_buckets: usize,
    pub statistic: f64,
    pub dof: usize,
    pub alpha: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Chi-square critical value for `dof` degrees of freedom at level `alpha`.
pub fn chi_square_critical(dof: usize, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("dof is positive")
        .inverse_cdf(1.0 - alpha)
}

/// Buckets `samples` into `n_buckets` equal-width ranges of `[0, q)` (the
/// last bucket absorbs the remainder) and compares the counts with their
/// exact uniform expectations.
pub fn chi_square_uniform(
    samples: &[FieldElement],
    field: &FieldParams,
    n_buckets: usize,
    alpha: f64,
) -> Result<UniformityReport> {
    if n_buckets < 2 || n_buckets as u64 > field.modulus() {
        return Err(Error::InvalidParams(format!("bucket count {n_buckets}")));
    }
    let needed = MIN_EXPECTED_PER_BUCKET * n_buckets;
    if samples.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: samples.len(),
        });
    }
    let q = field.modulus();
    let width = q / n_buckets as u64;
    let mut counts = vec![0u64; n_buckets];
    for s in samples {
        let b = ((s.value() / width) as usize).min(n_buckets - 1);
        counts[b] += 1;
    }
    let n = samples.len() as f64;
    let statistic: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let w = if i + 1 == n_buckets {
                q - width * (n_buckets as u64 - 1)
            } else {
                width
            };
            let e = n * w as f64 / q as f64;
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = n_buckets - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof is positive");
    let critical_value = dist.inverse_cdf(1.0 - alpha);
    Ok(UniformityReport {
        n_samples: samples.len(),
        n_buckets,
        statistic,
        dof,
        alpha,
        critical_value,
        p_value: 1.0 - dist.cdf(statistic),
        pass: statistic < critical_value,
    })
}

/// One line of a harness report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestRecord {
    pub name: String,
    pub n: usize,
    pub statistic: f64,
    pub dof: Option<usize>,
    pub alpha: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

impl TestRecord {
    pub fn from_uniformity(name: impl Into<String>, r: &UniformityReport, expect_uniform: bool) -> Self {
        TestRecord {
            name: name.into(),
            n: r.n_samples,
            statistic: r.statistic,
            dof: Some(r.dof),
            alpha: Some(r.alpha),
            pass: r.pass == expect_uniform,
            detail: format!(
                "critical={:.2} p={:.4} {}",
                r.critical_value,
                r.p_value,
                if expect_uniform {
                    "expect uniform"
                } else {
                    "expect non-uniform"
                }
            ),
        }
    }

    /// Line-oriented text form.
    pub fn to_line(&self) -> String {
        format!(
            "{} {:<40} n={:<9} stat={:<12.4} dof={:<5} alpha={:<6} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.n,
            self.statistic,
            self.dof.map_or("-".to_string(), |d| d.to_string()),
            self.alpha.map_or("-".to_string(), |a| a.to_string()),
            self.detail
        )
    }
}
