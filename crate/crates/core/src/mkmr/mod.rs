//! The multi-key multi-recipient scheme: setup, key generation, encryption
//! and per-recipient decryption.
//!
//! A ciphertext is the `m x (l + 1)` matrix `[v_0 v_1 ... v_l]` where `v_0`
//! is a uniform IV and `v_i = m_i + S v_{i-1} + E_i`. Recipient `j` recovers
//! `m_ji + e` as `v_ji - <s_j, v_{i-1}>`.

mod wire;

pub use wire::{
    deserialize_ciphertext, deserialize_key_matrix, deserialize_recipient_key, deserialize_stream,
    serialize_ciphertext, serialize_key_matrix, serialize_recipient_key, serialize_stream, CIPHERTEXT_MAGIC,
    FORMAT_VERSION, KEY_MATRIX_MAGIC, RECIPIENT_KEY_MAGIC, STREAM_MAGIC,
};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams, MERSENNE_31};
use crate::prm::{recursive_prm, SecretKeyMatrix, StateVector};
use crate::sampler::{sample_uniform_element, sample_uniform_vector, GaussianSpec, DEFAULT_SIGMA, DEFAULT_TAIL_CUT};

/// Security level with built-in defaults.
pub const DEFAULT_LAMBDA: u32 = 128;
/// Dimension (and number of recipients) for the default security level.
pub const DEFAULT_DIMENSION: usize = 1024;

/// Output of [`setup`].
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeParams {
    pub lambda: u32,
    pub m: usize,
    pub field: FieldParams,
    pub noise: GaussianSpec,
}

/// Optional overrides accepted by [`setup_with`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub m: Option<usize>,
    pub q: Option<u64>,
    pub sigma: Option<f64>,
    pub tail_cut: Option<u32>,
}

impl Overrides {
    fn dimensions_given(&self) -> bool {
        self.m.is_some() && self.q.is_some()
    }
}

/// On-disk form of [`SchemeParams`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub lambda: u32,
    pub m: usize,
    pub q: u64,
    pub sigma: f64,
    pub tail_cut: u32,
}

impl SchemeParams {
    /// Same dimensions with a different error distribution.
    pub fn with_noise(mut self, noise: GaussianSpec) -> Self {
        self.noise = noise;
        self
    }

    pub fn to_file(&self) -> ParamsFile {
        ParamsFile {
            lambda: self.lambda,
            m: self.m,
            q: self.field.modulus(),
            sigma: self.noise.sigma(),
            tail_cut: self.noise.tail_cut(),
        }
    }

    pub fn from_file(p: &ParamsFile) -> Result<Self> {
        setup_with(
            p.lambda,
            &Overrides {
                m: Some(p.m),
                q: Some(p.q),
                sigma: Some(p.sigma),
                tail_cut: Some(p.tail_cut),
            },
        )
    }
}

/// Default parameters for `lambda`. Only 128 is built in.
pub fn setup(lambda: u32) -> Result<SchemeParams> {
    setup_with(lambda, &Overrides::default())
}

/// Parameters for `lambda` with any overrides applied and validated. An
/// unsupported `lambda` is accepted only when both `m` and `q` are given.
pub fn setup_with(lambda: u32, overrides: &Overrides) -> Result<SchemeParams> {
    if lambda != DEFAULT_LAMBDA && !overrides.dimensions_given() {
        return Err(Error::UnsupportedLambda(lambda));
    }
    let m = overrides.m.unwrap_or(DEFAULT_DIMENSION);
    if m < 2 {
        return Err(Error::InvalidParams(format!("dimension must be at least 2, got {m}")));
    }
    if u32::try_from(m).is_err() {
        return Err(Error::InvalidParams(format!("dimension {m} too large")));
    }
    let field = FieldParams::new(overrides.q.unwrap_or(MERSENNE_31))?;
    let noise = GaussianSpec::new(
        overrides.sigma.unwrap_or(DEFAULT_SIGMA),
        overrides.tail_cut.unwrap_or(DEFAULT_TAIL_CUT),
        &field,
    )?;
    Ok(SchemeParams {
        lambda,
        m,
        field,
        noise,
    })
}

/// Samples the `m x m` key matrix; row `j` is recipient `j + 1`'s key.
pub fn keygen<R: RngCore + ?Sized>(params: &SchemeParams, rng: &mut R) -> SecretKeyMatrix {
    let entries = sample_uniform_vector(&params.field, params.m * params.m, rng);
    SecretKeyMatrix::from_entries(params.field, params.m, entries).expect("sampled entries are canonical")
}

/// A single recipient's secret vector. `index` is one-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecipientKey {
    field: FieldParams,
    index: usize,
    key: Vec<FieldElement>,
}

impl RecipientKey {
    pub fn new(field: FieldParams, index: usize, key: Vec<FieldElement>) -> Result<Self> {
        let m = key.len();
        if index == 0 || index > m {
            return Err(Error::RecipientOutOfRange { index, m });
        }
        if let Some(bad) = key.iter().find(|e| e.value() >= field.modulus()) {
            return Err(Error::NonCanonical {
                value: bad.value(),
                modulus: field.modulus(),
            });
        }
        Ok(RecipientKey { field, index, key })
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.key.len()
    }

    pub fn vector(&self) -> &[FieldElement] {
        &self.key
    }
}

impl SecretKeyMatrix {
    /// Extracts recipient `index` (one-based).
    pub fn recipient_key(&self, index: usize) -> Result<RecipientKey> {
        if index == 0 || index > self.dim() {
            return Err(Error::RecipientOutOfRange { index, m: self.dim() });
        }
        Ok(RecipientKey {
            field: *self.field(),
            index,
            key: self.row(index - 1).to_vec(),
        })
    }
}

/// `m` message streams of length `l`, stored column-major, together with
/// the true length of every stream. Entries past a stream's length are
/// padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageMatrix {
    field: FieldParams,
    m: usize,
    l: usize,
    entries: Vec<FieldElement>,
    lengths: Vec<usize>,
}

impl MessageMatrix {
    pub fn zeros(field: FieldParams, m: usize, l: usize) -> Self {
        MessageMatrix {
            field,
            m,
            l,
            entries: vec![FieldElement::ZERO; m * l],
            lengths: vec![l; m],
        }
    }

    /// Builds from columns `m_1 .. m_l`, each of length `m`.
    pub fn from_columns(field: FieldParams, columns: Vec<Vec<FieldElement>>) -> Result<Self> {
        let l = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().find(|c| c.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: c.len(),
            });
        }
        let entries: Vec<FieldElement> = columns.into_iter().flatten().collect();
        Self::check_canonical(&field, &entries)?;
        Ok(MessageMatrix {
            field,
            m,
            l,
            entries,
            lengths: vec![l; m],
        })
    }

    /// Builds from `m` equal-length rows (one stream per recipient).
    pub fn from_rows(field: FieldParams, rows: &[Vec<FieldElement>]) -> Result<Self> {
        let m = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != l) {
            return Err(Error::DimensionMismatch {
                expected: l,
                actual: r.len(),
            });
        }
        let mut entries = vec![FieldElement::ZERO; m * l];
        for (j, row) in rows.iter().enumerate() {
            Self::check_canonical(&field, row)?;
            for (i, &x) in row.iter().enumerate() {
                entries[i * m + j] = x;
            }
        }
        Ok(MessageMatrix {
            field,
            m,
            l,
            entries,
            lengths: vec![l; m],
        })
    }

    /// Uniformly random `m x l` matrix.
    pub fn random<R: RngCore + ?Sized>(field: FieldParams, m: usize, l: usize, rng: &mut R) -> Self {
        let entries = sample_uniform_vector(&field, m * l, rng);
        MessageMatrix {
            field,
            m,
            l,
            entries,
            lengths: vec![l; m],
        }
    }

    /// Places each stream in its own row, padding short streams (and any
    /// rows without a stream) with uniform elements. `l` defaults to the
    /// longest stream and must not be shorter than it.
    pub fn from_streams<R: RngCore + ?Sized>(
        field: FieldParams,
        m: usize,
        streams: &[Vec<FieldElement>],
        l: Option<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        if streams.len() > m {
            return Err(Error::TooManyStreams {
                given: streams.len(),
                m,
            });
        }
        let longest = streams.iter().map(Vec::len).max().unwrap_or(0);
        let l = l.unwrap_or(longest);
        if l < longest {
            return Err(Error::DimensionMismatch {
                expected: l,
                actual: longest,
            });
        }
        let mut rows = Vec::with_capacity(m);
        let mut lengths = Vec::with_capacity(m);
        for j in 0..m {
            let mut row = match streams.get(j) {
                Some(s) => {
                    Self::check_canonical(&field, s)?;
                    lengths.push(s.len());
                    s.clone()
                }
                None => {
                    lengths.push(l);
                    Vec::with_capacity(l)
                }
            };
            while row.len() < l {
                row.push(sample_uniform_element(&field, rng));
            }
            rows.push(row);
        }
        let mut msg = Self::from_rows(field, &rows)?;
        msg.lengths = lengths;
        Ok(msg)
    }

    fn check_canonical(field: &FieldParams, xs: &[FieldElement]) -> Result<()> {
        match xs.iter().find(|e| e.value() >= field.modulus()) {
            Some(bad) => Err(Error::NonCanonical {
                value: bad.value(),
                modulus: field.modulus(),
            }),
            None => Ok(()),
        }
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.l
    }

    /// Zero-based column `i`, i.e. the message block `m_{i+1}`.
    pub fn column(&self, i: usize) -> &[FieldElement] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        self.entries[col * self.m + row]
    }

    /// Zero-based row `j`, full length `l` including padding.
    pub fn row(&self, j: usize) -> Vec<FieldElement> {
        (0..self.l).map(|i| self.get(j, i)).collect()
    }

    /// Row `j` truncated to its recorded length.
    pub fn payload(&self, j: usize) -> Vec<FieldElement> {
        let mut r = self.row(j);
        r.truncate(self.lengths[j]);
        r
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Replaces the lengths ledger; every length must be at most `l`.
    pub fn set_lengths(&mut self, lengths: Vec<usize>) -> Result<()> {
        if lengths.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: lengths.len(),
            });
        }
        if let Some(&bad) = lengths.iter().find(|&&n| n > self.l) {
            return Err(Error::DimensionMismatch {
                expected: self.l,
                actual: bad,
            });
        }
        self.lengths = lengths;
        Ok(())
    }
}

/// `[v_0 v_1 ... v_l]`, stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    field: FieldParams,
    m: usize,
    l: usize,
    entries: Vec<FieldElement>,
}

impl Ciphertext {
    /// Takes `(l + 1) * m` column-major entries.
    pub fn from_entries(field: FieldParams, m: usize, l: usize, entries: Vec<FieldElement>) -> Result<Self> {
        let expected = (l + 1) * m;
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: entries.len(),
            });
        }
        MessageMatrix::check_canonical(&field, &entries)?;
        Ok(Ciphertext { field, m, l, entries })
    }

    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    /// Number of message columns `l`; the ciphertext has `l + 1` columns.
    pub fn message_len(&self) -> usize {
        self.l
    }

    pub fn num_columns(&self) -> usize {
        self.l + 1
    }

    /// Column `i` for `i` in `0..=l`; column 0 is the IV.
    pub fn column(&self, i: usize) -> &[FieldElement] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    pub fn iv(&self) -> &[FieldElement] {
        self.column(0)
    }

    pub fn get(&self, row: usize, col: usize) -> FieldElement {
        self.entries[col * self.m + row]
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }
}

/// Encrypts every column of `msg` under `S`. Draws the IV first, then `m`
/// Gaussian samples per column.
pub fn encrypt<R: RngCore + ?Sized>(
    s: &SecretKeyMatrix,
    msg: &MessageMatrix,
    noise: &GaussianSpec,
    rng: &mut R,
) -> Result<Ciphertext> {
    if msg.rows() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            actual: msg.rows(),
        });
    }
    if msg.cols() == 0 {
        return Err(Error::EmptyMessage);
    }
    let v0 = StateVector(sample_uniform_vector(s.field(), s.dim(), rng));
    let cols = recursive_prm(s, msg, &v0, noise, rng)?;
    let mut entries = Vec::with_capacity((msg.cols() + 1) * s.dim());
    entries.extend_from_slice(v0.as_slice());
    for c in &cols {
        entries.extend_from_slice(c.as_slice());
    }
    Ok(Ciphertext {
        field: *s.field(),
        m: s.dim(),
        l: msg.cols(),
        entries,
    })
}

const PARALLEL_COLUMNS_THRESHOLD: usize = 1024;

/// Recovers recipient `key.index()`'s stream, `m_ji + e_ji` for `i = 1..=l`.
pub fn decrypt_recipient(key: &RecipientKey, c: &Ciphertext) -> Result<Vec<FieldElement>> {
    if key.dim() != c.rows() {
        return Err(Error::DimensionMismatch {
            expected: c.rows(),
            actual: key.dim(),
        });
    }
    if key.field() != c.field() {
        return Err(Error::ModulusMismatch {
            left: key.field().modulus(),
            right: c.field().modulus(),
        });
    }
    let field = *c.field();
    let j = key.index() - 1;
    let s = key.vector();
    let one = |i: usize| field.sub(c.get(j, i), field.dot(s, c.column(i - 1)));
    Ok(if c.message_len() >= PARALLEL_COLUMNS_THRESHOLD {
        (1..=c.message_len()).into_par_iter().map(one).collect()
    } else {
        (1..=c.message_len()).map(one).collect()
    })
}

/// Decrypts every row. The lengths ledger is not part of the ciphertext,
/// so every row comes back with length `l`.
pub fn decrypt_all(s: &SecretKeyMatrix, c: &Ciphertext) -> Result<MessageMatrix> {
    if s.dim() != c.rows() {
        return Err(Error::DimensionMismatch {
            expected: c.rows(),
            actual: s.dim(),
        });
    }
    if s.field() != c.field() {
        return Err(Error::ModulusMismatch {
            left: s.field().modulus(),
            right: c.field().modulus(),
        });
    }
    let field = *c.field();
    let m = c.rows();
    let columns: Vec<Vec<FieldElement>> = (1..=c.message_len())
        .into_par_iter()
        .map(|i| {
            let sv = s.mul_vec(c.column(i - 1));
            c.column(i).iter().zip(sv).map(|(&v, p)| field.sub(v, p)).collect()
        })
        .collect();
    let l = columns.len();
    Ok(MessageMatrix {
        field,
        m,
        l,
        entries: columns.into_iter().flatten().collect(),
        lengths: vec![l; m],
    })
}
