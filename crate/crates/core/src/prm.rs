//! The LWE pseudorandom map `f(S, v) = S v + E mod q` and the recursion
//! `g_i = f(S, g_{i-1}) + m_i` that absorbs one message column per step.

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::mkmr::MessageMatrix;
use crate::sampler::GaussianSpec;

/// Below this dimension the row loop runs on the calling thread.
const PARALLEL_ROWS_THRESHOLD: usize = 256;

/// Square matrix whose row `k` is recipient `k + 1`'s secret vector.
/// Stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKeyMatrix {
    field: FieldParams,
    m: usize,
    entries: Vec<FieldElement>,
}

impl SecretKeyMatrix {
    /// Takes `m * m` row-major entries; each must be canonical.
    pub fn from_entries(field: FieldParams, m: usize, entries: Vec<FieldElement>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                actual: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().find(|e| e.value() >= field.modulus()) {
            return Err(Error::NonCanonical {
                value: bad.value(),
                modulus: field.modulus(),
            });
        }
        Ok(SecretKeyMatrix { field, m, entries })
    }

    pub fn from_rows(field: FieldParams, rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let m = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: r.len(),
            });
        }
        Self::from_entries(field, m, rows.into_iter().flatten().collect())
    }

    pub fn zero(field: FieldParams, m: usize) -> Self {
        SecretKeyMatrix {
            field,
            m,
            entries: vec![FieldElement::ZERO; m * m],
        }
    }

    pub fn identity(field: FieldParams, m: usize) -> Self {
        let mut s = Self::zero(field, m);
        for k in 0..m {
            s.entries[k * m + k] = field.reduce(1);
        }
        s
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Zero-based row access.
    pub fn row(&self, k: usize) -> &[FieldElement] {
        &self.entries[k * self.m..(k + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[FieldElement]> {
        self.entries.chunks_exact(self.m.max(1))
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    /// `out = S v mod q`, one 128-bit accumulation and one reduction per row.
    pub fn mul_vec_into(&self, v: &[FieldElement], out: &mut [FieldElement]) {
        debug_assert_eq!(v.len(), self.m);
        debug_assert_eq!(out.len(), self.m);
        let field = self.field;
        let m = self.m;
        if m >= PARALLEL_ROWS_THRESHOLD {
            out.par_iter_mut()
                .zip(self.entries.par_chunks_exact(m))
                .for_each(|(o, row)| *o = field.dot(row, v));
        } else {
            for (o, row) in out.iter_mut().zip(self.entries.chunks_exact(m)) {
                *o = field.dot(row, v);
            }
        }
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        let mut out = vec![FieldElement::ZERO; self.m];
        self.mul_vec_into(v, &mut out);
        out
    }
}

/// A vector in F_q^m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateVector(pub Vec<FieldElement>);

impl StateVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[FieldElement] {
        &self.0
    }
}

impl From<Vec<FieldElement>> for StateVector {
    fn from(v: Vec<FieldElement>) -> Self {
        StateVector(v)
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Writes `S v + E` into `out`, drawing the `m` error terms in row order
/// before the product so the draw order never depends on scheduling.
fn step_into<R: RngCore + ?Sized>(
    s: &SecretKeyMatrix,
    v: &[FieldElement],
    noise: &GaussianSpec,
    rng: &mut R,
    errors: &mut [i64],
    out: &mut [FieldElement],
) {
    noise.sample_into(rng, errors);
    s.mul_vec_into(v, out);
    let field = s.field;
    for (o, &e) in out.iter_mut().zip(errors.iter()) {
        *o = field.add(*o, field.lift_small(e));
    }
}

/// One evaluation of the LWE map. Consumes exactly `m` Gaussian draws.
pub fn lwe_prm_step<R: RngCore + ?Sized>(
    s: &SecretKeyMatrix,
    v: &StateVector,
    noise: &GaussianSpec,
    rng: &mut R,
) -> Result<StateVector> {
    check_dim(s.dim(), v.len())?;
    let mut errors = vec![0i64; s.dim()];
    let mut out = vec![FieldElement::ZERO; s.dim()];
    step_into(s, v.as_slice(), noise, rng, &mut errors, &mut out);
    Ok(StateVector(out))
}

/// Runs `g_i = f(S, g_{i-1}) + m_i` for every message column and returns
/// `g_1 .. g_l`.
pub fn recursive_prm<R: RngCore + ?Sized>(
    s: &SecretKeyMatrix,
    msg: &MessageMatrix,
    v0: &StateVector,
    noise: &GaussianSpec,
    rng: &mut R,
) -> Result<Vec<StateVector>> {
    let m = s.dim();
    check_dim(m, msg.rows())?;
    check_dim(m, v0.len())?;
    if msg.field() != s.field() {
        return Err(Error::ModulusMismatch {
            left: s.field().modulus(),
            right: msg.field().modulus(),
        });
    }
    if msg.cols() == 0 {
        return Err(Error::EmptyMessage);
    }
    let field = *s.field();
    let mut errors = vec![0i64; m];
    let mut out: Vec<StateVector> = Vec::with_capacity(msg.cols());
    let mut prev = v0.0.clone();
    for i in 0..msg.cols() {
        let mut next = vec![FieldElement::ZERO; m];
        step_into(s, &prev, noise, rng, &mut errors, &mut next);
        for (g, &mi) in next.iter_mut().zip(msg.column(i)) {
            *g = field.add(*g, mi);
        }
        out.push(StateVector(next));
        prev = out[i].0.clone();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_uniform_vector, Seed};

    fn f31() -> FieldParams {
        FieldParams::mersenne31()
    }

    fn random_key(m: usize, seed: u64) -> SecretKeyMatrix {
        let f = f31();
        let mut rng = Seed::from_u64(seed).generator();
        SecretKeyMatrix::from_entries(f, m, sample_uniform_vector(&f, m * m, &mut rng)).unwrap()
    }

    /// Schoolbook `S v + e`, with plain `%` on u128 after every term.
    fn schoolbook(s: &SecretKeyMatrix, v: &[FieldElement], e: &[i64]) -> Vec<u64> {
        let q = s.field().modulus() as u128;
        (0..s.dim())
            .map(|k| {
                let mut acc: u128 = 0;
                for (a, b) in s.row(k).iter().zip(v) {
                    acc = (acc + a.value() as u128 * b.value() as u128) % q;
                }
                let e = (e[k].rem_euclid(q as i64)) as u128;
                ((acc + e) % q) as u64
            })
            .collect()
    }

    #[test]
    fn zero_key_degenerate_noise() {
        let f = f31();
        let s = SecretKeyMatrix::zero(f, 4);
        let v = StateVector(sample_uniform_vector(&f, 4, &mut Seed::from_u64(1).generator()));
        let out = lwe_prm_step(&s, &v, &GaussianSpec::degenerate(), &mut Seed::from_u64(2).generator()).unwrap();
        assert!(out.0.iter().all(|x| *x == FieldElement::ZERO));
    }

    #[test]
    fn identity_key_degenerate_noise() {
        let f = f31();
        let s = SecretKeyMatrix::identity(f, 5);
        let v = StateVector(sample_uniform_vector(&f, 5, &mut Seed::from_u64(1).generator()));
        let out = lwe_prm_step(&s, &v, &GaussianSpec::degenerate(), &mut Seed::from_u64(2).generator()).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn step_matches_schoolbook_with_replayed_noise() {
        let f = f31();
        let noise = GaussianSpec::default_for(&f).unwrap();
        for m in [4, 300] {
            let s = random_key(m, 7);
            let v = StateVector(sample_uniform_vector(&f, m, &mut Seed::from_u64(8).generator()));
            let out = lwe_prm_step(&s, &v, &noise, &mut Seed::from_u64(9).generator()).unwrap();
            let mut replay = Seed::from_u64(9).generator();
            let e: Vec<i64> = (0..m).map(|_| noise.sample(&mut replay)).collect();
            let expected = schoolbook(&s, v.as_slice(), &e);
            assert_eq!(out.0.iter().map(|x| x.value()).collect::<Vec<_>>(), expected);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let s = random_key(4, 1);
        let v = StateVector(vec![FieldElement::ZERO; 3]);
        let r = lwe_prm_step(&s, &v, &GaussianSpec::degenerate(), &mut Seed::from_u64(0).generator());
        assert_eq!(r, Err(Error::DimensionMismatch { expected: 4, actual: 3 }));
    }

    #[test]
    fn recursion_single_column_zero() {
        let f = f31();
        let s = SecretKeyMatrix::zero(f, 4);
        let msg = MessageMatrix::zeros(f, 4, 1);
        let v0 = StateVector(sample_uniform_vector(&f, 4, &mut Seed::from_u64(1).generator()));
        let g = recursive_prm(
            &s,
            &msg,
            &v0,
            &GaussianSpec::degenerate(),
            &mut Seed::from_u64(2).generator(),
        )
        .unwrap();
        assert_eq!(g.len(), 1);
        assert!(g[0].0.iter().all(|x| *x == FieldElement::ZERO));
    }

    #[test]
    fn recursion_matches_unrolled_oracle() {
        let f = f31();
        let noise = GaussianSpec::default_for(&f).unwrap();
        let (m, l) = (4, 3);
        let s = random_key(m, 21);
        let mut mrng = Seed::from_u64(22).generator();
        let msg =
            MessageMatrix::from_columns(f, (0..l).map(|_| sample_uniform_vector(&f, m, &mut mrng)).collect()).unwrap();
        let v0 = StateVector(sample_uniform_vector(&f, m, &mut mrng));
        let got = recursive_prm(&s, &msg, &v0, &noise, &mut Seed::from_u64(23).generator()).unwrap();

        let q = f.modulus();
        let mut replay = Seed::from_u64(23).generator();
        let mut prev: Vec<FieldElement> = v0.0.clone();
        for (i, gi) in got.iter().enumerate() {
            let e: Vec<i64> = (0..m).map(|_| noise.sample(&mut replay)).collect();
            let fv = schoolbook(&s, &prev, &e);
            let expected: Vec<u64> = fv.iter().zip(msg.column(i)).map(|(a, b)| (a + b.value()) % q).collect();
            assert_eq!(
                gi.0.iter().map(|x| x.value()).collect::<Vec<_>>(),
                expected,
                "column {i}"
            );
            prev = gi.0.clone();
        }
    }

    #[test]
    fn zero_message_is_iterated_step() {
        let f = f31();
        let noise = GaussianSpec::default_for(&f).unwrap();
        let s = random_key(6, 3);
        let v0 = StateVector(sample_uniform_vector(&f, 6, &mut Seed::from_u64(4).generator()));
        let msg = MessageMatrix::zeros(f, 6, 5);
        let got = recursive_prm(&s, &msg, &v0, &noise, &mut Seed::from_u64(5).generator()).unwrap();
        let mut rng = Seed::from_u64(5).generator();
        let mut g = v0;
        for col in got {
            g = lwe_prm_step(&s, &g, &noise, &mut rng).unwrap();
            assert_eq!(g, col);
        }
    }

    #[test]
    fn prefix_property() {
        let f = f31();
        let noise = GaussianSpec::default_for(&f).unwrap();
        let s = random_key(8, 30);
        let mut mrng = Seed::from_u64(31).generator();
        let cols: Vec<_> = (0..10).map(|_| sample_uniform_vector(&f, 8, &mut mrng)).collect();
        let v0 = StateVector(sample_uniform_vector(&f, 8, &mut mrng));
        let full = MessageMatrix::from_columns(f, cols.clone()).unwrap();
        let prefix = MessageMatrix::from_columns(f, cols[..4].to_vec()).unwrap();
        let a = recursive_prm(&s, &full, &v0, &noise, &mut Seed::from_u64(32).generator()).unwrap();
        let b = recursive_prm(&s, &prefix, &v0, &noise, &mut Seed::from_u64(32).generator()).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(&a[..4], &b[..]);
    }

    #[test]
    fn parallel_kernel_matches_serial() {
        let f = f31();
        let m = 512;
        let s = random_key(m, 40);
        let v = sample_uniform_vector(&f, m, &mut Seed::from_u64(41).generator());
        let par = s.mul_vec(&v);
        let serial: Vec<FieldElement> = s.rows().map(|r| f.dot(r, &v)).collect();
        assert_eq!(par, serial);
    }
}
