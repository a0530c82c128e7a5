//! Scalar fields used by the generic dense elimination kernels.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::FieldSpec;

/// A field with exact arithmetic on owned elements.
pub trait Field: Clone + Debug + PartialEq + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn spec(&self) -> FieldSpec;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Image of a rational number, if its denominator is invertible.
    fn embed(&self, q: &BigRational) -> Result<Self::Elem>;
    fn to_rational(&self, a: &Self::Elem) -> BigRational;

    fn embed_i64(&self, v: i64) -> Self::Elem {
        self.embed(&BigRational::from_integer(BigInt::from(v)))
            .expect("integers are representable in every field")
    }
}

/// The prime field GF(p), p < 2^31, elements stored as canonical residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    fn reduce_big(&self, v: &BigInt) -> u32 {
        let p = BigInt::from(self.p);
        let r = ((v % &p) + &p) % &p;
        r.to_u32().expect("residue fits")
    }
}

/// Deterministic trial division; moduli are below 2^31.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field for PrimeField {
    type Elem = u32;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Prime(self.p)
    }
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1 % self.p
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + *b as u64) % self.p as u64) as u32
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 + self.p as u64 - *b as u64) % self.p as u64) as u32
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.p as u64) as u32
    }
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.p - *a
        }
    }
    fn inv(&self, a: &u32) -> Option<u32> {
        if *a == 0 {
            return None;
        }
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (self.p as i64, *a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(t0.rem_euclid(self.p as i64) as u32)
    }
    fn embed(&self, q: &BigRational) -> Result<u32> {
        let num = self.reduce_big(q.numer());
        let den = self.reduce_big(q.denom());
        let inv = self
            .inv(&den)
            .ok_or_else(|| Error::NotRepresentable(q.to_string()))?;
        Ok(self.mul(&num, &inv))
    }
    fn to_rational(&self, a: &u32) -> BigRational {
        BigRational::from_integer(BigInt::from(*a))
    }
}

/// The rational numbers with arbitrary-precision numerators and denominators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Rational
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn embed(&self, q: &BigRational) -> Result<BigRational> {
        Ok(q.clone())
    }
    fn to_rational(&self, a: &BigRational) -> BigRational {
        a.clone()
    }
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.4` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((a, b)) = t.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    let a: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(a))
}

/// Formats as `a/b`, or as a plain integer when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Checks `0 <= q <= 1`.
pub fn check_unit(q: &BigRational) -> Result<()> {
    if q.is_negative() || q > &BigRational::one() {
        Err(Error::OutOfUnitInterval(format_rational(q)))
    } else {
        Ok(())
    }
}

/// Nearest `f64` to an exact rational, including numbers whose parts overflow `f64`.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // scale down both parts to 64 significant bits
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 64).max(0) as usize;
    let shift_d = (db - 64).max(0) as usize;
    let n = (q.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}
