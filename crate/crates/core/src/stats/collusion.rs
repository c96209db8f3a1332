//! Residual streams available to a coalition of recipients.
//!
//! The coalition holds the last `k` rows of `S` in full and the last `k`
//! coordinates of every other row. For an unleaked row `j` it can evaluate
//! `v_ji - <suffix(s_j), suffix(v_{i-1})>`; the unknown prefix of `s_j`
//! should leave that residual uniform.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::mkmr::Ciphertext;
use crate::prm::SecretKeyMatrix;

use super::{chi_square_uniform, UniformityReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeakedKnowledge {
    m: usize,
    k: usize,
    /// Known trailing coordinates per one-based row.
    suffixes: BTreeMap<usize, Vec<FieldElement>>,
}

impl LeakedKnowledge {
    /// What a coalition of the last `k` recipients learns from `S`.
    pub fn from_keys(keys: &SecretKeyMatrix, k: usize) -> Result<Self> {
        let m = keys.dim();
        if k >= m {
            return Err(Error::LeakOutOfRange { k, m });
        }
        let suffixes = (1..=m)
            .map(|j| {
                let row = keys.row(j - 1);
                let known = if j > m - k { row.to_vec() } else { row[m - k..].to_vec() };
                (j, known)
            })
            .collect();
        Ok(LeakedKnowledge { m, k, suffixes })
    }

    pub fn leaked_count(&self) -> usize {
        self.k
    }

    /// Rows the coalition does not hold in full.
    pub fn unleaked_rows(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.m - self.k
    }

    /// Hands the coalition a complete row as well (harness sanity check).
    pub fn reveal_row(&mut self, keys: &SecretKeyMatrix, j: usize) -> Result<()> {
        if j == 0 || j > self.m {
            return Err(Error::RecipientOutOfRange { index: j, m: self.m });
        }
        self.suffixes.insert(j, keys.row(j - 1).to_vec());
        Ok(())
    }

    pub fn known_suffix(&self, j: usize) -> &[FieldElement] {
        self.suffixes.get(&j).map_or(&[], Vec::as_slice)
    }

    /// Residual stream for one-based row `j`.
    pub fn residuals(&self, c: &Ciphertext, j: usize) -> Result<Vec<FieldElement>> {
        if c.rows() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: c.rows(),
            });
        }
        if j == 0 || j > self.m {
            return Err(Error::RecipientOutOfRange { index: j, m: self.m });
        }
        let f = *c.field();
        let suffix = self.known_suffix(j);
        let start = self.m - suffix.len();
        Ok((1..=c.message_len())
            .map(|i| f.sub(c.get(j - 1, i), f.dot(suffix, &c.column(i - 1)[start..])))
            .collect())
    }
}

/// Pools the residual streams of `targets` (one-based, each in the
/// unleaked range) and tests them for uniformity.
pub fn collusion_residuals(
    c: &Ciphertext,
    knowledge: &LeakedKnowledge,
    targets: &[usize],
    n_buckets: usize,
    alpha: f64,
) -> Result<UniformityReport> {
    let mut pooled = Vec::with_capacity(targets.len() * c.message_len());
    for &j in targets {
        if !knowledge.unleaked_rows().contains(&j) {
            return Err(Error::InvalidParams(format!(
                "row {j} is held by the coalition; targets must lie in 1..={}",
                knowledge.m - knowledge.k
            )));
        }
        pooled.extend(knowledge.residuals(c, j)?);
    }
    chi_square_uniform(&pooled, c.field(), n_buckets, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mkmr::{decrypt_recipient, encrypt, keygen, setup_with, MessageMatrix, Overrides};
    use crate::sampler::Seed;

    fn setup(m: usize, l: usize) -> (SecretKeyMatrix, MessageMatrix, Ciphertext) {
        let p = setup_with(
            0,
            &Overrides {
                m: Some(m),
                q: Some((1 << 31) - 1),
                ..Default::default()
            },
        )
        .unwrap();
        let mut rng = Seed::from_u64(77).generator();
        let s = keygen(&p, &mut rng);
        // low-entropy plaintext: small values only
        let rows: Vec<Vec<FieldElement>> = (0..m)
            .map(|j| (0..l).map(|i| p.field.reduce(((i * 7 + j) % 200) as u64)).collect())
            .collect();
        let msg = MessageMatrix::from_rows(p.field, &rows).unwrap();
        let c = encrypt(&s, &msg, &p.noise, &mut rng).unwrap();
        (s, msg, c)
    }

    #[test]
    fn range_checks() {
        let (s, _, c) = setup(8, 64);
        assert!(matches!(
            LeakedKnowledge::from_keys(&s, 8),
            Err(Error::LeakOutOfRange { k: 8, m: 8 })
        ));
        let kn = LeakedKnowledge::from_keys(&s, 3).unwrap();
        assert_eq!(kn.unleaked_rows(), 1..=5);
        assert_eq!(kn.known_suffix(2).len(), 3);
        assert_eq!(kn.known_suffix(7).len(), 8);
        assert!(collusion_residuals(&c, &kn, &[6], 4, 0.01).is_err());
    }

    #[test]
    fn full_row_residual_is_decryption() {
        let (s, _, c) = setup(8, 64);
        let mut kn = LeakedKnowledge::from_keys(&s, 2).unwrap();
        kn.reveal_row(&s, 3).unwrap();
        let r = kn.residuals(&c, 3).unwrap();
        assert_eq!(r, decrypt_recipient(&s.recipient_key(3).unwrap(), &c).unwrap());
    }

    #[test]
    fn zero_leak_residuals_are_raw_ciphertext() {
        let (s, _, c) = setup(8, 64);
        let kn = LeakedKnowledge::from_keys(&s, 0).unwrap();
        let r = kn.residuals(&c, 1).unwrap();
        let raw: Vec<_> = (1..=64).map(|i| c.get(0, i)).collect();
        assert_eq!(r, raw);
    }

    #[test]
    fn unleaked_residuals_look_uniform() {
        let (s, _, c) = setup(32, 2048);
        for k in [0, 16, 31] {
            let kn = LeakedKnowledge::from_keys(&s, k).unwrap();
            let targets: Vec<usize> = kn.unleaked_rows().collect();
            let rep = collusion_residuals(&c, &kn, &targets, 256, 0.01).unwrap();
            assert!(rep.pass, "k={k}: {rep:?}");
        }
        let mut kn = LeakedKnowledge::from_keys(&s, 16).unwrap();
        kn.reveal_row(&s, 1).unwrap();
        let rep = collusion_residuals(&c, &kn, &[1], 256, 0.01).unwrap();
        assert!(!rep.pass);
    }
}
