//! Arithmetic in the prime field F_q.
//!
//! Elements are stored as canonical residues in `[0, q)`. The centered
//! representative in `(-q/2, q/2]` is only a view, used when reasoning
//! about noise magnitude and when decoding payloads.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest modulus accepted by [`FieldParams::new`].
pub const MIN_MODULUS: u64 = 1 << 20;
/// Exclusive upper bound on the modulus; keeps products below 2^82.
pub const MAX_MODULUS: u64 = 1 << 41;
/// The Mersenne prime 2^31 - 1.
pub const MERSENNE_31: u64 = (1 << 31) - 1;

/// An element of F_q, always reduced into `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);

    #[inline(always)]
    pub const fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Modulus description. Construction verifies primality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldParams {
    q: u64,
    /// `Some(e)` when `q = 2^e - 1`.
    mersenne_exp: Option<u32>,
}

impl TryFrom<u64> for FieldParams {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        FieldParams::new(q)
    }
}

impl From<FieldParams> for u64 {
    fn from(p: FieldParams) -> u64 {
        p.q
    }
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams::mersenne31()
    }
}

impl FieldParams {
    /// Validates `q` as a prime with `2^20 <= q < 2^41`.
    pub fn new(q: u64) -> Result<Self> {
        if !(MIN_MODULUS..MAX_MODULUS).contains(&q) {
            return Err(Error::ModulusOutOfRange(q));
        }
        Self::with_any_prime(q)
    }

    /// Like [`FieldParams::new`] but without the lower size bound. Small
    /// moduli are useful in tests; the `2^41` ceiling still applies because
    /// the arithmetic relies on it.
    pub fn with_any_prime(q: u64) -> Result<Self> {
        if q >= MAX_MODULUS {
            return Err(Error::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let mersenne_exp = (q + 1).is_power_of_two().then(|| (q + 1).trailing_zeros());
        Ok(FieldParams { q, mersenne_exp })
    }

    pub fn mersenne31() -> Self {
        FieldParams {
            q: MERSENNE_31,
            mersenne_exp: Some(31),
        }
    }

    #[inline(always)]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn is_mersenne(&self) -> bool {
        self.mersenne_exp.is_some()
    }

    pub fn mersenne_exponent(&self) -> Option<u32> {
        self.mersenne_exp
    }

    /// `floor(log2 q)`.
    pub fn floor_log2(&self) -> u32 {
        63 - self.q.leading_zeros()
    }

    /// `floor(q / 2)`, the largest centered value.
    pub fn half(&self) -> u64 {
        self.q / 2
    }

    /// Wraps an already canonical value.
    pub fn element(&self, value: u64) -> Result<FieldElement> {
        if value < self.q {
            Ok(FieldElement(value))
        } else {
            Err(Error::NonCanonical { value, modulus: self.q })
        }
    }

    /// Reduces an arbitrary 64-bit integer. Mersenne moduli use shift-add
    /// folding, anything else a plain remainder.
    #[inline(always)]
    pub fn reduce(&self, x: u64) -> FieldElement {
        FieldElement(match self.mersenne_exp {
            Some(e) => mersenne_fold(x, e, self.q),
            None => x % self.q,
        })
    }

    /// Reduces a 128-bit accumulator.
    #[inline(always)]
    pub fn reduce_wide(&self, x: u128) -> FieldElement {
        match self.mersenne_exp {
            Some(e) => {
                let mask = self.q as u128;
                let mut x = x;
                while x >> 64 != 0 {
                    x = (x & mask) + (x >> e);
                }
                FieldElement(mersenne_fold(x as u64, e, self.q))
            }
            None => FieldElement((x % self.q as u128) as u64),
        }
    }

    #[inline(always)]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        let s = a.0 + b.0;
        FieldElement(if s >= self.q { s - self.q } else { s })
    }

    #[inline(always)]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.q - b.0 })
    }

    #[inline(always)]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.sub(FieldElement::ZERO, a)
    }

    #[inline(always)]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        self.reduce_wide(a.0 as u128 * b.0 as u128)
    }

    pub fn pow(&self, base: FieldElement, mut exp: u64) -> FieldElement {
        let mut acc = FieldElement(1 % self.q);
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat; `None` for zero.
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        (a.0 != 0).then(|| self.pow(a, self.q - 2))
    }

    /// Inner product with a single reduction at the end.
    #[inline]
    pub fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(a.len(), b.len());
        let acc = a
            .iter()
            .zip(b)
            .fold(0u128, |acc, (x, y)| acc + (x.0 as u128 * y.0 as u128));
        self.reduce_wide(acc)
    }

    /// The representative in `(-q/2, q/2]`, i.e. `value` when
    /// `value <= floor(q/2)` and `value - q` otherwise.
    #[inline]
    pub fn centered(&self, a: FieldElement) -> i64 {
        if a.0 <= self.half() {
            a.0 as i64
        } else {
            a.0 as i64 - self.q as i64
        }
    }

    /// Inverse of [`FieldParams::centered`]; requires `|x| < q`.
    #[inline]
    pub fn from_centered(&self, x: i64) -> Result<FieldElement> {
        if x.unsigned_abs() >= self.q {
            return Err(Error::CenteredOutOfRange {
                value: x,
                modulus: self.q,
            });
        }
        Ok(self.lift_small(x))
    }

    /// Unchecked variant for callers that already bound `|x| < q`.
    #[inline(always)]
    pub(crate) fn lift_small(&self, x: i64) -> FieldElement {
        debug_assert!(x.unsigned_abs() < self.q);
        if x >= 0 {
            FieldElement(x as u64)
        } else {
            FieldElement((self.q as i64 + x) as u64)
        }
    }
}

#[inline(always)]
fn mersenne_fold(mut x: u64, e: u32, q: u64) -> u64 {
    while x >> e != 0 {
        x = (x & q) + (x >> e);
    }
    if x == q {
        0
    } else {
        x
    }
}

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    b %= n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, n);
        }
        b = mul_mod(b, b, n);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
