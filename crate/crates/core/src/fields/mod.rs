//! Exact linear algebra over GF(2), prime fields and the rationals.
//!
//! [`Matrix`] and [`Vector`] are tagged with their field. GF(2) data is bit
//! packed ([`BitMatrix`]); GF(p) and rational data use the generic
//! [`DenseMatrix`] kernels. No routine here touches floating point.

pub mod bits;
pub mod dense;
pub mod scalar;
pub mod text;

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use bits::{BitMatrix, BitVec};
pub use dense::DenseMatrix;
pub use scalar::{
    check_unit, format_rational, parse_rational, rational_to_f64, Field, PrimeField, Rationals,
};

/// Default number of subset tests allowed in [`Matrix::exact_girth`].
pub const DEFAULT_GIRTH_BUDGET: u64 = 1 << 22;

/// The field a matrix lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Gf2,
    /// GF(p) for a prime p < 2^31.
    Prime(u32),
    Rational,
}

impl FieldSpec {
    /// Validated GF(p).
    pub fn prime(p: u64) -> Result<Self> {
        PrimeField::new(p).map(|f| FieldSpec::Prime(f.modulus()))
    }

    /// Field size, `None` for the rationals.
    pub fn order(&self) -> Option<u64> {
        match self {
            FieldSpec::Gf2 => Some(2),
            FieldSpec::Prime(p) => Some(*p as u64),
            FieldSpec::Rational => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Gf2 => write!(f, "gf2"),
            FieldSpec::Prime(p) => write!(f, "gfp:{p}"),
            FieldSpec::Rational => write!(f, "rational"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gf2" => Ok(FieldSpec::Gf2),
            "rational" => Ok(FieldSpec::Rational),
            other => {
                let p = other
                    .strip_prefix("gfp:")
                    .and_then(|p| p.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown field {other:?}")))?;
                FieldSpec::prime(p)
            }
        }
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A sorted, duplicate-free set of 0-based column (or row) indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ColumnSet {
    indices: Vec<usize>,
}

impl ColumnSet {
    /// Sorts the indices; rejects duplicates and anything `>= bound`.
    pub fn new(mut indices: Vec<usize>, bound: usize) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateIndex(w[0]));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= bound {
                return Err(Error::IndexOutOfRange { index: last, bound });
            }
        }
        Ok(ColumnSet { indices })
    }

    pub fn empty() -> Self {
        ColumnSet::default()
    }

    pub fn all(n: usize) -> Self {
        ColumnSet {
            indices: (0..n).collect(),
        }
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        ColumnSet { indices }
    }

    pub fn complement(&self, n: usize) -> Self {
        let mut out = Vec::with_capacity(n.saturating_sub(self.len()));
        let mut it = self.indices.iter().peekable();
        for i in 0..n {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        ColumnSet { indices: out }
    }

    pub fn union(&self, other: &ColumnSet) -> Self {
        let mut v: Vec<usize> = self
            .indices
            .iter()
            .merge(other.indices.iter())
            .copied()
            .collect();
        v.dedup();
        ColumnSet { indices: v }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// 1-based indices, as used in every text output.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }
}

/// A vector tagged with its field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Vector {
    Gf2(BitVec),
    Prime(PrimeField, Vec<u32>),
    Rational(Vec<BigRational>),
}

impl Vector {
    pub fn zeros(field: FieldSpec, len: usize) -> Self {
        match field {
            FieldSpec::Gf2 => Vector::Gf2(BitVec::zeros(len)),
            FieldSpec::Prime(p) => Vector::Prime(prime(p), vec![0; len]),
            FieldSpec::Rational => Vector::Rational(vec![BigRational::zero(); len]),
        }
    }

    pub fn from_rationals(field: FieldSpec, values: &[BigRational]) -> Result<Self> {
        Ok(match field {
            FieldSpec::Gf2 => {
                let f = prime(2);
                let mut v = BitVec::zeros(values.len());
                for (i, q) in values.iter().enumerate() {
                    v.set(i, f.embed(q)? == 1);
                }
                Vector::Gf2(v)
            }
            FieldSpec::Prime(p) => {
                let f = prime(p);
                let v = values
                    .iter()
                    .map(|q| f.embed(q))
                    .collect::<Result<_>>()?;
                Vector::Prime(f, v)
            }
            FieldSpec::Rational => Vector::Rational(values.to_vec()),
        })
    }

    pub fn from_i64(field: FieldSpec, values: &[i64]) -> Self {
        let q: Vec<BigRational> = values
            .iter()
            .map(|&v| BigRational::from_integer(v.into()))
            .collect();
        Vector::from_rationals(field, &q).expect("integers are representable")
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            Vector::Gf2(_) => FieldSpec::Gf2,
            Vector::Prime(f, _) => f.spec(),
            Vector::Rational(_) => FieldSpec::Rational,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Vector::Gf2(v) => v.len(),
            Vector::Prime(_, v) => v.len(),
            Vector::Rational(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Vector::Gf2(v) => v.is_zero(),
            Vector::Prime(_, v) => v.iter().all(|&x| x == 0),
            Vector::Rational(v) => v.iter().all(Zero::is_zero),
        }
    }

    /// Number of nonzero entries.
    pub fn weight(&self) -> usize {
        match self {
            Vector::Gf2(v) => v.weight(),
            Vector::Prime(_, v) => v.iter().filter(|&&x| x != 0).count(),
            Vector::Rational(v) => v.iter().filter(|x| !x.is_zero()).count(),
        }
    }

    pub fn get(&self, i: usize) -> BigRational {
        match self {
            Vector::Gf2(v) => BigRational::from_integer(BigInt::from(v.get(i) as u8)),
            Vector::Prime(_, v) => BigRational::from_integer(BigInt::from(v[i])),
            Vector::Rational(v) => v[i].clone(),
        }
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// Entries at `idx`, in order.
    pub fn select(&self, idx: &[usize]) -> Vector {
        match self {
            Vector::Gf2(v) => {
                let mut out = BitVec::zeros(idx.len());
                for (k, &i) in idx.iter().enumerate() {
                    if v.get(i) {
                        out.set(k, true);
                    }
                }
                Vector::Gf2(out)
            }
            Vector::Prime(f, v) => Vector::Prime(*f, idx.iter().map(|&i| v[i]).collect()),
            Vector::Rational(v) => Vector::Rational(idx.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    /// Copy of `self` with the entries at `idx` replaced by `values`.
    pub fn scatter(&self, idx: &[usize], values: &Vector) -> Result<Vector> {
        if idx.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: idx.len(),
                found: values.len(),
            });
        }
        let mut out = self.clone();
        match (&mut out, values) {
            (Vector::Gf2(o), Vector::Gf2(v)) => {
                for (k, &i) in idx.iter().enumerate() {
                    o.set(i, v.get(k));
                }
            }
            (Vector::Prime(_, o), Vector::Prime(_, v)) => {
                for (k, &i) in idx.iter().enumerate() {
                    o[i] = v[k];
                }
            }
            (Vector::Rational(o), Vector::Rational(v)) => {
                for (k, &i) in idx.iter().enumerate() {
                    o[i] = v[k].clone();
                }
            }
            _ => return Err(field_mismatch(self.field(), values.field())),
        }
        Ok(out)
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |f, a, b| f.add(a, b), |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |f, a, b| f.sub(a, b), |a, b| a - b)
    }

    pub fn neg(&self) -> Vector {
        match self {
            Vector::Gf2(v) => Vector::Gf2(v.clone()),
            Vector::Prime(f, v) => Vector::Prime(*f, v.iter().map(|x| f.neg(x)).collect()),
            Vector::Rational(v) => Vector::Rational(v.iter().map(|x| -x).collect()),
        }
    }

    fn zip_with(
        &self,
        other: &Vector,
        fp: impl Fn(&PrimeField, &u32, &u32) -> u32,
        fq: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Result<Vector> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        match (self, other) {
            (Vector::Gf2(a), Vector::Gf2(b)) => {
                let mut out = a.clone();
                out.xor_assign(b);
                Ok(Vector::Gf2(out))
            }
            (Vector::Prime(f, a), Vector::Prime(g, b)) if f == g => Ok(Vector::Prime(
                *f,
                a.iter().zip(b).map(|(x, y)| fp(f, x, y)).collect(),
            )),
            (Vector::Rational(a), Vector::Rational(b)) => Ok(Vector::Rational(
                a.iter().zip(b).map(|(x, y)| fq(x, y)).collect(),
            )),
            _ => Err(field_mismatch(self.field(), other.field())),
        }
    }
}

/// A matrix tagged with its field.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Gf2(BitMatrix),
    Prime(DenseMatrix<PrimeField>),
    Rational(DenseMatrix<Rationals>),
}

/// A basis of the right null space of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBasis {
    pub vectors: Vec<Vector>,
}

impl KernelBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn prime(p: u32) -> PrimeField {
    PrimeField::new(p as u64).expect("FieldSpec::Prime holds a validated prime")
}

fn field_mismatch(a: FieldSpec, b: FieldSpec) -> Error {
    Error::FieldMismatch(format!("{a} vs {b}"))
}

impl Matrix {
    pub fn zeros(field: FieldSpec, nrows: usize, ncols: usize) -> Self {
        match field {
            FieldSpec::Gf2 => Matrix::Gf2(BitMatrix::zeros(nrows, ncols)),
            FieldSpec::Prime(p) => Matrix::Prime(DenseMatrix::zeros(prime(p), nrows, ncols)),
            FieldSpec::Rational => Matrix::Rational(DenseMatrix::zeros(Rationals, nrows, ncols)),
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        Matrix::from_bool_fn(field, n, n, |i, j| i == j)
    }

    /// A 0/1 matrix, valid over every field.
    pub fn from_bool_fn(
        field: FieldSpec,
        nrows: usize,
        ncols: usize,
        f: impl Fn(usize, usize) -> bool,
    ) -> Self {
        match field {
            FieldSpec::Gf2 => Matrix::Gf2(BitMatrix::from_fn(nrows, ncols, f)),
            FieldSpec::Prime(p) => Matrix::Prime(DenseMatrix::from_fn(
                prime(p),
                nrows,
                ncols,
                |i, j| f(i, j) as u32,
            )),
            FieldSpec::Rational => {
                Matrix::Rational(DenseMatrix::from_fn(Rationals, nrows, ncols, |i, j| {
                    BigRational::from_integer(BigInt::from(f(i, j) as u8))
                }))
            }
        }
    }

    /// Builds a matrix from rational entries, reducing them into `field`.
    pub fn from_rationals(field: FieldSpec, ncols: usize, rows: &[Vec<BigRational>]) -> Result<Self> {
        for r in rows {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: r.len(),
                });
            }
        }
        let nrows = rows.len();
        Ok(match field {
            FieldSpec::Gf2 => {
                let f = prime(2);
                let mut m = BitMatrix::zeros(nrows, ncols);
                for (i, r) in rows.iter().enumerate() {
                    for (j, q) in r.iter().enumerate() {
                        if f.embed(q)? == 1 {
                            m.set(i, j, true);
                        }
                    }
                }
                Matrix::Gf2(m)
            }
            FieldSpec::Prime(p) => {
                let f = prime(p);
                let mut m = DenseMatrix::zeros(f, nrows, ncols);
                for (i, r) in rows.iter().enumerate() {
                    for (j, q) in r.iter().enumerate() {
                        m.set(i, j, f.embed(q)?);
                    }
                }
                Matrix::Prime(m)
            }
            FieldSpec::Rational => {
                let mut m = DenseMatrix::zeros(Rationals, nrows, ncols);
                for (i, r) in rows.iter().enumerate() {
                    for (j, q) in r.iter().enumerate() {
                        m.set(i, j, q.clone());
                    }
                }
                Matrix::Rational(m)
            }
        })
    }

    pub fn from_i64_rows(field: FieldSpec, rows: &[Vec<i64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let q: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
            .collect();
        Matrix::from_rationals(field, ncols, &q)
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            Matrix::Gf2(_) => FieldSpec::Gf2,
            Matrix::Prime(m) => m.field().spec(),
            Matrix::Rational(_) => FieldSpec::Rational,
        }
    }

    pub fn nrows(&self) -> usize {
        match self {
            Matrix::Gf2(m) => m.nrows(),
            Matrix::Prime(m) => m.nrows(),
            Matrix::Rational(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Matrix::Gf2(m) => m.ncols(),
            Matrix::Prime(m) => m.ncols(),
            Matrix::Rational(m) => m.ncols(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        match self {
            Matrix::Gf2(m) => BigRational::from_integer(BigInt::from(m.get(i, j) as u8)),
            Matrix::Prime(m) => BigRational::from_integer(BigInt::from(*m.get(i, j))),
            Matrix::Rational(m) => m.get(i, j).clone(),
        }
    }

    pub fn is_zero_one(&self) -> bool {
        (0..self.nrows()).all(|i| {
            (0..self.ncols()).all(|j| {
                let e = self.entry(i, j);
                e.is_zero() || e.is_one()
            })
        })
    }

    pub fn rank(&self) -> usize {
        match self {
            Matrix::Gf2(m) => m.rank(),
            Matrix::Prime(m) => m.rank(),
            Matrix::Rational(m) => m.rank(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        match self {
            Matrix::Gf2(m) => Matrix::Gf2(m.transpose()),
            Matrix::Prime(m) => Matrix::Prime(m.transpose()),
            Matrix::Rational(m) => Matrix::Rational(m.transpose()),
        }
    }

    fn check_columns(&self, s: &ColumnSet) -> Result<()> {
        match s.as_slice().last() {
            Some(&c) if c >= self.ncols() => Err(Error::IndexOutOfRange {
                index: c,
                bound: self.ncols(),
            }),
            _ => Ok(()),
        }
    }

    /// `M[S]`: the columns in `s`, in ascending order.
    pub fn select_columns(&self, s: &ColumnSet) -> Result<Matrix> {
        self.check_columns(s)?;
        let c = s.as_slice();
        Ok(match self {
            Matrix::Gf2(m) => Matrix::Gf2(m.select_columns(c)),
            Matrix::Prime(m) => Matrix::Prime(m.select_columns(c)),
            Matrix::Rational(m) => Matrix::Rational(m.select_columns(c)),
        })
    }

    pub fn select_rows(&self, rows: &ColumnSet) -> Result<Matrix> {
        if let Some(&r) = rows.as_slice().last() {
            if r >= self.nrows() {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    bound: self.nrows(),
                });
            }
        }
        let r = rows.as_slice();
        Ok(match self {
            Matrix::Gf2(m) => Matrix::Gf2(m.select_rows(r)),
            Matrix::Prime(m) => Matrix::Prime(m.select_rows(r)),
            Matrix::Rational(m) => Matrix::Rational(m.select_rows(r)),
        })
    }

    /// True iff `rank(M[S]) = |S|`.
    pub fn columns_independent(&self, s: &ColumnSet) -> Result<bool> {
        self.check_columns(s)?;
        if s.len() > self.nrows() {
            return Ok(false);
        }
        let c = s.as_slice();
        Ok(match self {
            // columns become rows; eliminating |S| short rows is the cheap side
            Matrix::Gf2(m) => m.columns_as_rows(c).rank() == c.len(),
            Matrix::Prime(m) => m.select_columns(c).rank() == c.len(),
            Matrix::Rational(m) => m.select_columns(c).rank() == c.len(),
        })
    }

    pub fn kernel(&self) -> KernelBasis {
        let vectors = match self {
            Matrix::Gf2(m) => m.kernel().into_iter().map(Vector::Gf2).collect(),
            Matrix::Prime(m) => {
                let f = *m.field();
                m.kernel().into_iter().map(|v| Vector::Prime(f, v)).collect()
            }
            Matrix::Rational(m) => m.kernel().into_iter().map(Vector::Rational).collect(),
        };
        KernelBasis { vectors }
    }

    pub fn mul_vec(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                found: x.len(),
            });
        }
        match (self, x) {
            (Matrix::Gf2(m), Vector::Gf2(v)) => Ok(Vector::Gf2(m.mul_vec(v))),
            (Matrix::Prime(m), Vector::Prime(f, v)) if m.field() == f => {
                Ok(Vector::Prime(*f, m.mul_vec(v)))
            }
            (Matrix::Rational(m), Vector::Rational(v)) => Ok(Vector::Rational(m.mul_vec(v))),
            _ => Err(field_mismatch(self.field(), x.field())),
        }
    }

    /// Some `x` with `Mx = y`, or `None` if the system is inconsistent.
    ///
    /// Free variables are set to zero; when the columns of `M` are independent
    /// the solution is unique.
    pub fn solve(&self, y: &Vector) -> Result<Option<Vector>> {
        Ok(self.solve_with_rank(y)?.map(|(x, _)| x))
    }

    /// Like [`Matrix::solve`], also returning `rank(M)` from the same elimination.
    pub fn solve_with_rank(&self, y: &Vector) -> Result<Option<(Vector, usize)>> {
        if y.len() != self.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.nrows(),
                found: y.len(),
            });
        }
        match (self, y) {
            (Matrix::Gf2(m), Vector::Gf2(v)) => Ok(m
                .solve_detailed(v)
                .map(|s| (Vector::Gf2(s.solution), s.rank))),
            (Matrix::Prime(m), Vector::Prime(f, v)) if m.field() == f => {
                Ok(m.solve(v).map(|(x, r)| (Vector::Prime(*f, x), r)))
            }
            (Matrix::Rational(m), Vector::Rational(v)) => {
                Ok(m.solve(v).map(|(x, r)| (Vector::Rational(x), r)))
            }
            _ => Err(field_mismatch(self.field(), y.field())),
        }
    }

    /// Least number of linearly dependent columns, by increasing-size subset
    /// enumeration.
    ///
    /// Returns `None` once more than `budget` subsets have been tested. If every
    /// subset is independent (only possible when `ncols <= rank`) the answer is
    /// `ncols + 1`.
    pub fn exact_girth(&self, budget: u64) -> Option<usize> {
        let n = self.ncols();
        let rank = self.rank();
        let mut spent = 0u64;
        for k in 1..=n {
            if k > rank {
                // any rank+1 columns are dependent
                return Some(k);
            }
            for subset in (0..n).combinations(k) {
                spent += 1;
                if spent > budget {
                    return None;
                }
                let s = ColumnSet::from_sorted(subset);
                if !self.columns_independent(&s).expect("indices in range") {
                    return Some(k);
                }
            }
        }
        Some(n + 1)
    }
}

/// `m x n` Vandermonde matrix whose row `i` holds the nodes raised to the power `i`.
pub fn vandermonde(field: FieldSpec, m: usize, nodes: &[BigRational]) -> Result<Matrix> {
    let reduced = Vector::from_rationals(field, nodes)?;
    let reduced_nodes = reduced.to_rationals();
    for (i, a) in reduced_nodes.iter().enumerate() {
        if reduced_nodes[..i].contains(a) {
            return Err(Error::DuplicateNode(format_rational(&nodes[i])));
        }
    }
    let rows: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            reduced_nodes
                .iter()
                .map(|x| num_traits::pow(x.clone(), i))
                .collect()
        })
        .collect();
    Matrix::from_rationals(field, nodes.len(), &rows)
}
