//! The conditional-rank branching process and row selection.
//!
//! Starting from `s`, every node with value `x` has a left child `2x - x^2`
//! and a right child `x^2`; the `n = 2^L` leaves, read left to right, are the
//! conditional ranks of the rows of the Sierpinski matrix. Both maps fix 0 and
//! 1 and average to `x`, so the leaves sum to `n * s` exactly.
//!
//! Exact profiles keep every leaf over the common denominator `d^(2^L)`
//! (`s = a/d`), which turns each level into plain integer arithmetic. For large
//! `n` a float profile tracks both `x` and `1 - x` so values near 0 and near 1
//! keep full relative precision; selection from it recomputes any leaf close to
//! the decision boundary exactly along its root-to-leaf path.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fields::{check_unit, format_rational, parse_rational, rational_to_f64, ColumnSet};

/// Largest `n` for which selection goes through the exact profile.
pub const EXACT_PROFILE_LIMIT: usize = 1 << 8;

/// Relative half-width of the band around a float decision boundary inside
/// which leaves are recomputed exactly.
pub const GUARD_BAND: f64 = 1.0 / (1u64 << 40) as f64;

/// Left map `2x - x^2`.
pub fn ell(x: &BigRational) -> Result<BigRational> {
    check_unit(x)?;
    Ok(x * BigRational::from_integer(2.into()) - x * x)
}

/// Right map `x^2`.
pub fn rr(x: &BigRational) -> Result<BigRational> {
    check_unit(x)?;
    Ok(x * x)
}

/// `log2(n)` for a power of two.
pub fn log2_exact(n: usize) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

/// Leaves of the branching process in exact arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct CorProfile {
    n: usize,
    s: BigRational,
    /// Common, unreduced denominator of every leaf.
    denom: BigInt,
    numers: Vec<BigInt>,
}

impl CorProfile {
    /// Computes all `n` leaves level by level.
    pub fn exact(n: usize, s: &BigRational) -> Result<Self> {
        let levels = log2_exact(n)?;
        check_unit(s)?;
        let mut denom = s.denom().clone();
        let mut numers = vec![s.numer().clone()];
        for _ in 0..levels {
            let two_den = &denom << 1;
            numers = numers
                .par_iter()
                .flat_map_iter(|a| {
                    let sq = a * a;
                    [a * &two_den - &sq, sq]
                })
                .collect();
            denom = &denom * &denom;
        }
        Ok(CorProfile {
            n,
            s: s.clone(),
            denom,
            numers,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }

    /// Leaf `i` (0-based), reduced.
    pub fn value(&self, i: usize) -> BigRational {
        BigRational::new(self.numers[i].clone(), self.denom.clone())
    }

    pub fn values(&self) -> Vec<BigRational> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    /// Exact sum of all leaves.
    pub fn total(&self) -> BigRational {
        let sum: BigInt = self.numers.iter().sum();
        BigRational::new(sum, self.denom.clone())
    }

    /// `sign(leaf_i - t)` without reducing the leaf.
    fn cmp_leaf(&self, i: usize, t: &BigRational) -> std::cmp::Ordering {
        (&self.numers[i] * t.denom()).cmp(&(t.numer() * &self.denom))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.n).map(|i| rational_to_f64(&self.value(i))).collect()
    }
}

/// Exact value of leaf `i` (0-based) of the depth-`log2 n` process from `s`.
///
/// Walks the root-to-leaf path: bit `L-1-k` of `i` picks the map at depth `k`
/// (0 = left, 1 = right). Returns an unreduced numerator/denominator pair.
pub fn exact_leaf(n: usize, s: &BigRational, i: usize) -> Result<(BigInt, BigInt)> {
    let levels = log2_exact(n)?;
    check_unit(s)?;
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, bound: n });
    }
    let mut a = s.numer().clone();
    let mut d = s.denom().clone();
    for k in (0..levels).rev() {
        let sq = &a * &a;
        a = if (i >> k) & 1 == 0 {
            &a * (&d << 1) - &sq
        } else {
            sq
        };
        d = &d * &d;
    }
    Ok((a, d))
}

/// Leaves in double precision, storing both `x` and `1 - x`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatProfile {
    n: usize,
    s: BigRational,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FloatProfile {
    pub fn compute(n: usize, s: &BigRational) -> Result<Self> {
        let levels = log2_exact(n)?;
        check_unit(s)?;
        let mut lo = vec![rational_to_f64(s)];
        let mut hi = vec![rational_to_f64(&(BigRational::one() - s))];
        for _ in 0..levels {
            let mut nlo = Vec::with_capacity(lo.len() * 2);
            let mut nhi = Vec::with_capacity(lo.len() * 2);
            for (&x, &y) in lo.iter().zip(&hi) {
                // left: x(2 - x) = x(1 + y), complement y^2
                nlo.push(x * (1.0 + y));
                nhi.push(y * y);
                // right: x^2, complement y(1 + x)
                nlo.push(x * x);
                nhi.push(y * (1.0 + x));
            }
            lo = nlo;
            hi = nhi;
        }
        Ok(FloatProfile {
            n,
            s: s.clone(),
            lo,
            hi,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo[i]
    }

    /// `1 - value(i)`, accurate also when the value is close to 1.
    pub fn complement(&self, i: usize) -> f64 {
        self.hi[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.lo
    }
}

/// How rows are picked from a profile.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SelectionSpec {
    /// Rows with value above `1 - 2^-ceil(n^0.49)`.
    PaperThreshold,
    /// Rows with value strictly above the threshold.
    Threshold(BigRational),
    /// The `m` largest values, ties going to the smaller index.
    TopM(usize),
}

impl fmt::Display for SelectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionSpec::PaperThreshold => write!(f, "paper"),
            SelectionSpec::Threshold(t) => write!(f, "thr:{}", format_rational(t)),
            SelectionSpec::TopM(m) => write!(f, "top:{m}"),
        }
    }
}

impl FromStr for SelectionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "paper" {
            return Ok(SelectionSpec::PaperThreshold);
        }
        if let Some(m) = s.strip_prefix("top:") {
            return m
                .parse()
                .map(SelectionSpec::TopM)
                .map_err(|_| Error::InvalidSelection(s.into()));
        }
        if let Some(t) = s.strip_prefix("thr:") {
            let t = parse_rational(t)?;
            check_unit(&t)?;
            return Ok(SelectionSpec::Threshold(t));
        }
        Err(Error::InvalidSelection(s.into()))
    }
}

impl Serialize for SelectionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SelectionSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Smallest integer `e >= n^0.49`, decided exactly as `e^100 >= n^49`.
pub fn paper_exponent(n: usize) -> u64 {
    let target = num_traits::pow(BigInt::from(n), 49);
    let ok = |e: u64| num_traits::pow(BigInt::from(e), 100) >= target;
    let mut e = (n as f64).powf(0.49).ceil().max(1.0) as u64;
    while e > 1 && ok(e - 1) {
        e -= 1;
    }
    while !ok(e) {
        e += 1;
    }
    e
}

/// The selection threshold `1 - 2^-ceil(n^0.49)`.
pub fn paper_threshold(n: usize) -> BigRational {
    let e = paper_exponent(n);
    let pow = BigInt::one() << e as usize;
    BigRational::new(&pow - 1, pow)
}

/// A sorted set of selected row indices of an `n`-row matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RowSet {
    n: usize,
    indices: ColumnSet,
}

impl RowSet {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        Ok(RowSet {
            n,
            indices: ColumnSet::new(indices, n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `m = |H|`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &ColumnSet {
        &self.indices
    }

    pub fn complement(&self) -> RowSet {
        RowSet {
            n: self.n,
            indices: self.indices.complement(self.n),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(i)
    }
}

fn check_top_m(m: usize, n: usize) -> Result<()> {
    if m > n {
        Err(Error::TooLarge {
            what: "m",
            value: m,
            limit: n,
        })
    } else {
        Ok(())
    }
}

fn threshold_for(spec: &SelectionSpec, n: usize) -> Option<BigRational> {
    match spec {
        SelectionSpec::PaperThreshold => Some(paper_threshold(n)),
        SelectionSpec::Threshold(t) => Some(t.clone()),
        SelectionSpec::TopM(_) => None,
    }
}

/// Selects rows from an exact profile.
pub fn select_rows(profile: &CorProfile, spec: &SelectionSpec) -> Result<RowSet> {
    let n = profile.n;
    if let Some(t) = threshold_for(spec, n) {
        check_unit(&t)?;
        let idx = (0..n)
            .filter(|&i| profile.cmp_leaf(i, &t).is_gt())
            .collect();
        return RowSet::new(n, idx);
    }
    let SelectionSpec::TopM(m) = *spec else {
        unreachable!()
    };
    check_top_m(m, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    // a/d > b/d iff a > b: the shared denominator makes this a numerator sort
    order.sort_by(|&i, &j| profile.numers[j].cmp(&profile.numers[i]).then(i.cmp(&j)));
    order.truncate(m);
    RowSet::new(n, order)
}

/// Comparison track for a float boundary: values at most 1/2 are compared
/// directly, larger ones through their complement.
#[derive(Clone, Copy)]
enum Track {
    Value(f64),
    Complement(f64),
}

impl Track {
    fn of(value: f64, complement: f64) -> Self {
        if value <= 0.5 {
            Track::Value(value)
        } else {
            Track::Complement(complement)
        }
    }

    /// Signed offset of leaf `i` above the boundary, in the boundary's
    /// track, with the band half-width; both exact-zero boundaries give a
    /// zero-width band.
    fn offset(&self, p: &FloatProfile, i: usize) -> (f64, f64) {
        match *self {
            Track::Value(b) => (p.lo[i] - b, GUARD_BAND * b),
            Track::Complement(b) => (b - p.hi[i], GUARD_BAND * b),
        }
    }
}

fn exact_cmp(p: &FloatProfile, i: usize, t: &BigRational) -> std::cmp::Ordering {
    let (a, d) = exact_leaf(p.n, &p.s, i).expect("validated profile");
    (a * t.denom()).cmp(&(t.numer() * d))
}

/// Selects rows from a float profile, recomputing exactly every leaf whose
/// float value falls inside the guard band around the decision boundary.
pub fn select_rows_float(profile: &FloatProfile, spec: &SelectionSpec) -> Result<RowSet> {
    let n = profile.n;
    if let Some(t) = threshold_for(spec, n) {
        check_unit(&t)?;
        let tf = rational_to_f64(&t);
        let track = Track::of(tf, rational_to_f64(&(BigRational::one() - &t)));
        let idx: Vec<usize> = (0..n)
            .into_par_iter()
            .filter(|&i| {
                let (off, band) = track.offset(profile, i);
                if off.abs() <= band {
                    exact_cmp(profile, i, &t).is_gt()
                } else {
                    off > 0.0
                }
            })
            .collect();
        return RowSet::new(n, idx);
    }
    let SelectionSpec::TopM(m) = *spec else {
        unreachable!()
    };
    check_top_m(m, n)?;
    if m == 0 || m == n {
        return RowSet::new(n, (0..m).collect());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| float_desc(profile, i, j).then(i.cmp(&j)));
    let b = order[m - 1];
    let track = Track::of(profile.lo[b], profile.hi[b]);
    let mut chosen = Vec::with_capacity(m);
    let mut band = Vec::new();
    for i in 0..n {
        let (off, width) = track.offset(profile, i);
        if off > width {
            chosen.push(i);
        } else if off.abs() <= width {
            band.push(i);
        }
    }
    // resolve the band exactly
    let need = m - chosen.len();
    let mut exact: Vec<(usize, BigRational)> = band
        .into_par_iter()
        .map(|i| {
            let (a, d) = exact_leaf(n, &profile.s, i).expect("validated profile");
            (i, BigRational::new(a, d))
        })
        .collect();
    exact.sort_by(|(i, x), (j, y)| y.cmp(x).then(i.cmp(j)));
    chosen.extend(exact.into_iter().take(need).map(|(i, _)| i));
    RowSet::new(n, chosen)
}

fn float_desc(p: &FloatProfile, i: usize, j: usize) -> std::cmp::Ordering {
    if p.lo[i] <= 0.5 || p.lo[j] <= 0.5 {
        p.lo[j].total_cmp(&p.lo[i])
    } else {
        p.hi[i].total_cmp(&p.hi[j])
    }
}

/// Selects rows for size `n` and parameter `s`, exactly up to
/// [`EXACT_PROFILE_LIMIT`] and through the guarded float profile above it.
pub fn select_rows_auto(n: usize, s: &BigRational, spec: &SelectionSpec) -> Result<RowSet> {
    if n <= EXACT_PROFILE_LIMIT {
        select_rows(&CorProfile::exact(n, s)?, spec)
    } else {
        select_rows_float(&FloatProfile::compute(n, s)?, spec)
    }
}

/// Counts of leaves below `delta`, between, and above `1 - delta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolarizationFractions {
    pub n: usize,
    pub low: usize,
    pub mid: usize,
    pub high: usize,
}

impl PolarizationFractions {
    pub fn low_fraction(&self) -> f64 {
        self.low as f64 / self.n as f64
    }
    pub fn mid_fraction(&self) -> f64 {
        self.mid as f64 / self.n as f64
    }
    pub fn high_fraction(&self) -> f64 {
        self.high as f64 / self.n as f64
    }
}

fn check_delta(delta: &BigRational) -> Result<()> {
    if !delta.is_positive() || delta >= &BigRational::new(1.into(), 2.into()) {
        Err(Error::OutOfUnitInterval(format!(
            "delta = {} (must lie in (0, 1/2))",
            format_rational(delta)
        )))
    } else {
        Ok(())
    }
}

/// Exact classification of the leaves against `delta` and `1 - delta`.
pub fn polarization_fractions(
    profile: &CorProfile,
    delta: &BigRational,
) -> Result<PolarizationFractions> {
    check_delta(delta)?;
    let upper = BigRational::one() - delta;
    let mut out = PolarizationFractions {
        n: profile.n,
        low: 0,
        mid: 0,
        high: 0,
    };
    for i in 0..profile.n {
        if profile.cmp_leaf(i, delta).is_lt() {
            out.low += 1;
        } else if profile.cmp_leaf(i, &upper).is_gt() {
            out.high += 1;
        } else {
            out.mid += 1;
        }
    }
    Ok(out)
}

/// Float classification; a diagnostic, never used for selection.
pub fn polarization_fractions_float(
    profile: &FloatProfile,
    delta: &BigRational,
) -> Result<PolarizationFractions> {
    check_delta(delta)?;
    let d = rational_to_f64(delta);
    let mut out = PolarizationFractions {
        n: profile.n,
        low: 0,
        mid: 0,
        high: 0,
    };
    for i in 0..profile.n {
        if profile.lo[i] < d {
            out.low += 1;
        } else if profile.hi[i] < d {
            out.high += 1;
        } else {
            out.mid += 1;
        }
    }
    Ok(out)
}

/// Upper bounds on the Bhattacharyya parameters of the synthesized channels,
/// produced by the same recursion started at the channel parameter `z0`.
///
/// The right (squaring) step is exact; the left step is an upper bound, which
/// is tight only for erasure channels.
#[derive(Clone, Debug, PartialEq)]
pub struct BhattProfile {
    inner: CorProfile,
}

pub fn bhatt_profile(n: usize, z0: &BigRational) -> Result<BhattProfile> {
    Ok(BhattProfile {
        inner: CorProfile::exact(n, z0)?,
    })
}

impl BhattProfile {
    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn z0(&self) -> &BigRational {
        &self.inner.s
    }

    pub fn upper_value(&self, i: usize) -> BigRational {
        self.inner.value(i)
    }

    pub fn upper_values(&self) -> Vec<BigRational> {
        self.inner.values()
    }

    pub fn as_cor_profile(&self) -> &CorProfile {
        &self.inner
    }
}

/// `sum_{i not in H} Z_i`: the block-error bound for the code whose
/// parity-check rows are `kept`.
pub fn bhatt_union_bound(profile: &BhattProfile, kept: &RowSet) -> Result<BigRational> {
    if kept.n() != profile.n() {
        return Err(Error::DimensionMismatch {
            expected: profile.n(),
            found: kept.n(),
        });
    }
    let p = &profile.inner;
    let sum: BigInt = kept.complement().indices().iter().map(|i| &p.numers[i]).sum();
    Ok(BigRational::new(sum, p.denom.clone()))
}

/// CSV with columns `index,rho` (1-based index), exact leaves as `a/b`.
pub fn profile_csv_exact(profile: &CorProfile) -> String {
    let mut out = String::from("# mode: exact\nindex,rho\n");
    for i in 0..profile.n {
        let _ = writeln!(out, "{},{}", i + 1, format_rational(&profile.value(i)));
    }
    out
}

/// CSV with columns `index,rho`, leaves with 17 significant digits.
pub fn profile_csv_float(profile: &FloatProfile) -> String {
    let mut out = String::from("# mode: float\nindex,rho\n");
    for i in 0..profile.n {
        let _ = writeln!(out, "{},{:.16e}", i + 1, profile.lo[i]);
    }
    out
}

/// Reduces `a/d` to lowest terms; kept separate so callers of
/// [`exact_leaf`] can defer the gcd.
pub fn reduce(a: BigInt, d: BigInt) -> BigRational {
    let g = a.gcd(&d);
    if g.is_zero() {
        return BigRational::zero();
    }
    BigRational::new_raw(a / &g, d / &g)
}

/// Nearest float to an exact leaf, for reporting.
pub fn leaf_to_f64(a: &BigInt, d: &BigInt) -> f64 {
    match (a.to_f64(), d.to_f64()) {
        (Some(x), Some(y)) if x.is_finite() && y.is_finite() => x / y,
        _ => rational_to_f64(&BigRational::new_raw(a.clone(), d.clone())),
    }
}
