//! Little-endian binary formats for keys, ciphertexts and decrypted
//! streams. Every file ends with a CRC32 of all preceding bytes. The CRC
//! catches transport errors only; it is not a MAC.
//!
//! Entries are written as `u32` when `q < 2^32` and as `u64` otherwise.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::prm::SecretKeyMatrix;

use super::{Ciphertext, RecipientKey};

pub const FORMAT_VERSION: u16 = 1;
pub const CIPHERTEXT_MAGIC: &[u8; 4] = b"MKMR";
pub const KEY_MATRIX_MAGIC: &[u8; 4] = b"MKSK";
pub const RECIPIENT_KEY_MAGIC: &[u8; 4] = b"MKRK";
pub const STREAM_MAGIC: &[u8; 4] = b"MKPT";

/// Ciphertext flag: entries are 64-bit.
const FLAG_WIDE: u16 = 1;

fn entry_width(q: u64) -> usize {
    if q < (1 << 32) {
        4
    } else {
        8
    }
}

pub(crate) struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub(crate) fn new(magic: &[u8; 4]) -> Self {
        let mut buf = Vec::new();
        buf.extend_from_slice(magic);
        ByteWriter { buf }
    }

    pub(crate) fn u16(&mut self, v: u16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub(crate) fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub(crate) fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub(crate) fn entries(&mut self, q: u64, xs: &[FieldElement]) -> &mut Self {
        let w = entry_width(q);
        self.buf.reserve(xs.len() * w);
        for x in xs {
            if w == 4 {
                self.buf.extend_from_slice(&(x.value() as u32).to_le_bytes());
            } else {
                self.buf.extend_from_slice(&x.value().to_le_bytes());
            }
        }
        self
    }

    pub(crate) fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        self.buf
    }
}

pub(crate) struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    /// Checks the magic and version and positions the reader after them.
    pub(crate) fn open(data: &'a [u8], magic: &'static [u8; 4]) -> Result<Self> {
        let mut r = ByteReader { data, pos: 0 };
        let got = r.take(4)?;
        if got != magic {
            return Err(Error::BadMagic {
                expected: std::str::from_utf8(magic).unwrap_or("?"),
            });
        }
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        Ok(r)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(Error::Truncated {
                needed: end,
                available: self.data.len(),
            });
        }
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Checks that exactly `payload` bytes plus the CRC remain and that the
    /// CRC matches.
    pub(crate) fn expect_payload(&self, payload: usize) -> Result<()> {
        let needed = self.pos + payload + 4;
        if self.data.len() < needed {
            return Err(Error::Truncated {
                needed,
                available: self.data.len(),
            });
        }
        if self.data.len() > needed {
            return Err(Error::TrailingData(self.data.len() - needed));
        }
        let body = &self.data[..needed - 4];
        let stored = u32::from_le_bytes(self.data[needed - 4..].try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(Error::ChecksumMismatch { stored, computed });
        }
        Ok(())
    }

    pub(crate) fn entries(&mut self, field: &FieldParams, n: usize) -> Result<Vec<FieldElement>> {
        let w = entry_width(field.modulus());
        let raw = self.take(n * w)?;
        raw.chunks_exact(w)
            .map(|c| {
                let v = if w == 4 {
                    u32::from_le_bytes(c.try_into().unwrap()) as u64
                } else {
                    u64::from_le_bytes(c.try_into().unwrap())
                };
                field.element(v)
            })
            .collect()
    }
}

fn read_field(q: u64) -> Result<FieldParams> {
    FieldParams::new(q).map_err(|e| Error::MalformedHeader(e.to_string()))
}

fn checked_len(parts: &[usize]) -> Result<usize> {
    parts
        .iter()
        .try_fold(1usize, |acc, &p| acc.checked_mul(p))
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))
}

pub fn serialize_ciphertext(c: &Ciphertext) -> Vec<u8> {
    let q = c.field().modulus();
    let flags = if entry_width(q) == 8 { FLAG_WIDE } else { 0 };
    let mut w = ByteWriter::new(CIPHERTEXT_MAGIC);
    w.u16(FORMAT_VERSION)
        .u16(flags)
        .u64(q)
        .u32(c.rows() as u32)
        .u32(c.message_len() as u32)
        .entries(q, c.entries());
    w.finish()
}

pub fn deserialize_ciphertext(data: &[u8]) -> Result<Ciphertext> {
    let mut r = ByteReader::open(data, CIPHERTEXT_MAGIC)?;
    let flags = r.u16()?;
    let q = r.u64()?;
    let m = r.u32()? as usize;
    let l = r.u32()? as usize;
    let count = checked_len(&[l + 1, m])?;
    r.expect_payload(checked_len(&[count, entry_width(q)])?)?;
    let field = read_field(q)?;
    let wide = entry_width(q) == 8;
    if flags & !FLAG_WIDE != 0 || (flags & FLAG_WIDE != 0) != wide {
        return Err(Error::MalformedHeader(format!("unexpected flags {flags:#06x}")));
    }
    if m == 0 {
        return Err(Error::MalformedHeader("zero rows".into()));
    }
    let entries = r.entries(&field, count)?;
    Ciphertext::from_entries(field, m, l, entries)
}

pub fn serialize_key_matrix(s: &SecretKeyMatrix) -> Vec<u8> {
    let q = s.field().modulus();
    let mut w = ByteWriter::new(KEY_MATRIX_MAGIC);
    w.u16(FORMAT_VERSION).u64(q).u32(s.dim() as u32).entries(q, s.entries());
    w.finish()
}

pub fn deserialize_key_matrix(data: &[u8]) -> Result<SecretKeyMatrix> {
    let mut r = ByteReader::open(data, KEY_MATRIX_MAGIC)?;
    let q = r.u64()?;
    let m = r.u32()? as usize;
    let count = checked_len(&[m, m])?;
    r.expect_payload(checked_len(&[count, entry_width(q)])?)?;
    let field = read_field(q)?;
    if m == 0 {
        return Err(Error::MalformedHeader("zero dimension".into()));
    }
    let entries = r.entries(&field, count)?;
    SecretKeyMatrix::from_entries(field, m, entries)
}

pub fn serialize_recipient_key(k: &RecipientKey) -> Vec<u8> {
    let q = k.field().modulus();
    let mut w = ByteWriter::new(RECIPIENT_KEY_MAGIC);
    w.u16(FORMAT_VERSION)
        .u64(q)
        .u32(k.dim() as u32)
        .u32(k.index() as u32)
        .entries(q, k.vector());
    w.finish()
}

pub fn deserialize_recipient_key(data: &[u8]) -> Result<RecipientKey> {
    let mut r = ByteReader::open(data, RECIPIENT_KEY_MAGIC)?;
    let q = r.u64()?;
    let m = r.u32()? as usize;
    let j = r.u32()? as usize;
    r.expect_payload(checked_len(&[m, entry_width(q)])?)?;
    let field = read_field(q)?;
    if j == 0 || j > m {
        return Err(Error::MalformedHeader(format!(
            "recipient index {j} out of range 1..={m}"
        )));
    }
    let key = r.entries(&field, m)?;
    RecipientKey::new(field, j, key)
}

/// A bare stream of field elements, as produced by decryption.
pub fn serialize_stream(field: &FieldParams, xs: &[FieldElement]) -> Vec<u8> {
    let q = field.modulus();
    let mut w = ByteWriter::new(STREAM_MAGIC);
    w.u16(FORMAT_VERSION).u64(q).u64(xs.len() as u64).entries(q, xs);
    w.finish()
}

pub fn deserialize_stream(data: &[u8]) -> Result<(FieldParams, Vec<FieldElement>)> {
    let mut r = ByteReader::open(data, STREAM_MAGIC)?;
    let q = r.u64()?;
    let n = usize::try_from(r.u64()?).map_err(|_| Error::MalformedHeader("length overflow".into()))?;
    r.expect_payload(checked_len(&[n, entry_width(q)])?)?;
    let field = read_field(q)?;
    let xs = r.entries(&field, n)?;
    Ok((field, xs))
}
