//! Memoryless erasure and binary symmetric channels.
//!
//! Both samplers draw exactly one 64-bit uniform per position, in position
//! order, and compare it against a fixed-point threshold. Runs that share a
//! generator state therefore see the same uniforms, and the erased (or
//! flipped) set at `p` is contained in the one at any `p' >= p`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{check_unit, ColumnSet, FieldSpec, Vector};
use crate::sim::{sample_subset, Bernoulli};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Mec,
    Bsc,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Mec => "mec",
            ChannelKind::Bsc => "bsc",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mec" => Ok(ChannelKind::Mec),
            "bsc" => Ok(ChannelKind::Bsc),
            _ => Err(Error::Parse(format!("unknown channel {s:?}"))),
        }
    }
}

/// A channel with an exact crossover or erasure probability.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    kind: ChannelKind,
    p: BigRational,
    sampler: Bernoulli,
}

impl ChannelParams {
    pub fn new(kind: ChannelKind, p: BigRational) -> Result<Self> {
        let sampler = Bernoulli::new(&p)?;
        Ok(ChannelParams { kind, p, sampler })
    }

    pub fn mec(p: BigRational) -> Result<Self> {
        Self::new(ChannelKind::Mec, p)
    }

    pub fn bsc(p: BigRational) -> Result<Self> {
        Self::new(ChannelKind::Bsc, p)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    /// Sends `x` through the channel.
    pub fn transmit(&self, x: &Vector, rng: &mut impl RngCore) -> Result<ChannelOutput> {
        match self.kind {
            ChannelKind::Mec => Ok(mec_transmit(x, &self.sampler, rng)),
            ChannelKind::Bsc => bsc_transmit(x, &self.sampler, rng),
        }
    }
}

/// Channel output: surviving symbols plus the erased positions.
///
/// Erased positions hold zero in `symbols`; the erasure itself lives only in
/// `erased`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelOutput {
    pub symbols: Vector,
    pub erased: ColumnSet,
}

/// Erases each position independently.
pub fn mec_transmit(x: &Vector, p: &Bernoulli, rng: &mut impl RngCore) -> ChannelOutput {
    let erased = sample_subset(x.len(), p, rng);
    let zeros = Vector::zeros(x.field(), erased.len());
    let symbols = x.scatter(&erased, &zeros).expect("same field and length");
    ChannelOutput {
        symbols,
        erased: ColumnSet::new(erased, x.len()).expect("sorted, in range"),
    }
}

/// Flips each bit independently. Only defined for GF(2) input.
pub fn bsc_transmit(x: &Vector, p: &Bernoulli, rng: &mut impl RngCore) -> Result<ChannelOutput> {
    let Vector::Gf2(bits) = x else {
        return Err(Error::FieldMismatch(format!(
            "the BSC carries gf2 symbols, got {}",
            x.field()
        )));
    };
    let mut out = bits.clone();
    for i in 0..bits.len() {
        if p.sample(rng) {
            out.flip(i);
        }
    }
    Ok(ChannelOutput {
        symbols: Vector::Gf2(out),
        erased: ColumnSet::empty(),
    })
}

/// `z(p) = 2 sqrt(p (1 - p))`.
pub fn bhattacharyya_bsc(p: f64) -> f64 {
    2.0 * (p * (1.0 - p)).max(0.0).sqrt()
}

/// A rational upper bound on `z(p)` within `2^-bits` of the true value.
///
/// With `p = a/b`, `z(p) = 2 sqrt(a (b - a)) / b`; the square root is rounded
/// up on the integer `a (b - a) 4^bits`.
pub fn bhattacharyya_upper(p: &BigRational, bits: u32) -> Result<BigRational> {
    check_unit(p)?;
    let a = p.numer();
    let b = p.denom();
    let radicand = (a * (b - a)) << (2 * bits as usize);
    let mut root = radicand.sqrt();
    if &root * &root < radicand {
        root += 1;
    }
    let bound = BigRational::new(root << 1, b << bits as usize);
    Ok(bound.min(BigRational::one()))
}

/// Bhattacharyya parameter as a float from an exact `p`.
pub fn bhattacharyya_of(p: &BigRational) -> f64 {
    let pf = p.to_f64().unwrap_or(f64::NAN);
    bhattacharyya_bsc(pf)
}

/// Exact check `lhs <= z(p)^w`, comparing squares so no root is taken.
pub fn le_bhattacharyya_power(lhs: &BigRational, p: &BigRational, w: u32) -> bool {
    let four = BigRational::from_integer(BigInt::from(4));
    let rhs_sq = num_traits::pow(four * p * (BigRational::one() - p), w as usize);
    lhs * lhs <= rhs_sq
}

pub(crate) fn require_gf2(field: FieldSpec) -> Result<()> {
    if field == FieldSpec::Gf2 {
        Ok(())
    } else {
        Err(Error::FieldMismatch(format!("expected gf2, got {field}")))
    }
}
