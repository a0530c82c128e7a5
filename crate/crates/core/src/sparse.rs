//! Exact sparse recovery: spark certificates, support-failure estimates and
//! exhaustive l0 decoding.
//!
//! Linear dependence over the reals is decided over the rationals, which is
//! equivalent for rational matrices.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fields::{check_unit, format_rational, parse_rational, ColumnSet, Matrix, Vector};
use crate::sim::{run_trials, sample_subset, trial_rng, Bernoulli, TrialReport};

/// Default number of column subsets an exhaustive search may test.
pub const DEFAULT_SPARSE_BUDGET: u128 = 1 << 22;

/// A signal given by its support and the nonzero values on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSignal {
    n: usize,
    support: ColumnSet,
    values: Vec<BigRational>,
}

impl SparseSignal {
    pub fn new(n: usize, support: ColumnSet, values: Vec<BigRational>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: values.len(),
            });
        }
        if let Some(&bad) = support.as_slice().iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, bound: n });
        }
        if values.iter().any(Zero::is_zero) {
            return Err(Error::Parse("sparse signal values must be nonzero".into()));
        }
        Ok(SparseSignal { n, support, values })
    }

    /// The nonzero entries of a dense vector.
    pub fn from_dense(x: &Vector) -> Self {
        let q = x.to_rationals();
        let support: Vec<usize> = (0..q.len()).filter(|&i| !q[i].is_zero()).collect();
        let values = support.iter().map(|&i| q[i].clone()).collect();
        SparseSignal {
            n: q.len(),
            support: ColumnSet::new(support, q.len()).expect("in range"),
            values,
        }
    }

    /// The signal with value `+1` or `-1` on each support position, the sign
    /// of position `j` taken from bit `j` of `signs` (set means negative).
    pub fn signed_ones(n: usize, support: ColumnSet, signs: u64) -> Result<Self> {
        let values = (0..support.len())
            .map(|j| {
                let v = if signs >> j & 1 == 1 { -1 } else { 1 };
                BigRational::from_integer(BigInt::from(v))
            })
            .collect();
        SparseSignal::new(n, support, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &ColumnSet {
        &self.support
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Number of nonzero entries.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); self.n];
        for (i, v) in self.support.iter().zip(&self.values) {
            x[i] = v.clone();
        }
        x
    }
}

/// How random supports are drawn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SupportModel {
    /// A uniformly random `k`-subset.
    UniformK(usize),
    /// Each position independently with probability `p`.
    IidBer(BigRational),
}

impl SupportModel {
    pub fn sample(&self, n: usize, rng: &mut impl RngCore) -> Result<ColumnSet> {
        let idx = match self {
            SupportModel::UniformK(k) => {
                if *k > n {
                    return Err(Error::TooLarge {
                        what: "support size",
                        value: *k,
                        limit: n,
                    });
                }
                rand::seq::index::sample(rng, n, *k).into_vec()
            }
            SupportModel::IidBer(p) => sample_subset(n, &Bernoulli::new(p)?, rng),
        };
        ColumnSet::new(idx, n)
    }
}

impl fmt::Display for SupportModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportModel::UniformK(k) => write!(f, "uniform:{k}"),
            SupportModel::IidBer(p) => write!(f, "ber:{}", format_rational(p)),
        }
    }
}

impl FromStr for SupportModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(k) = s.strip_prefix("uniform:") {
            return k
                .parse()
                .map(SupportModel::UniformK)
                .map_err(|_| Error::Parse(format!("bad support model {s:?}")));
        }
        if let Some(p) = s.strip_prefix("ber:") {
            let p = parse_rational(p)?;
            check_unit(&p)?;
            return Ok(SupportModel::IidBer(p));
        }
        Err(Error::Parse(format!("bad support model {s:?}")))
    }
}

impl Serialize for SupportModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `y = A x`, exactly.
pub fn measure(a: &Matrix, x: &SparseSignal) -> Result<Vector> {
    if x.n() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: x.n(),
        });
    }
    a.mul_vec(&Vector::from_rationals(a.field(), &x.to_dense())?)
}

/// Result of an exhaustive check that every `2k` columns are independent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SparkOutcome {
    /// Every set of at most `2k` columns is independent (girth > 2k).
    Certified,
    /// A smallest dependent column set.
    Refuted(ColumnSet),
    BudgetExceeded,
}

impl SparkOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            SparkOutcome::Certified => "certified",
            SparkOutcome::Refuted(_) => "refuted",
            SparkOutcome::BudgetExceeded => "budget_exceeded",
        }
    }
}

/// Tests column subsets of size `1..=2k` in increasing size, stopping at the
/// first dependent one.
pub fn spark_certificate(a: &Matrix, k: usize, budget: u128) -> SparkOutcome {
    let n = a.ncols();
    let rank = a.rank();
    let mut spent = 0u128;
    for size in 1..=(2 * k).min(n) {
        if size > rank {
            return SparkOutcome::Refuted(ColumnSet::all(size));
        }
        for subset in (0..n).combinations(size) {
            spent += 1;
            if spent > budget {
                return SparkOutcome::BudgetExceeded;
            }
            let s = ColumnSet::new(subset, n).expect("in range");
            if !a.columns_independent(&s).expect("in range") {
                return SparkOutcome::Refuted(s);
            }
        }
    }
    SparkOutcome::Certified
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

/// Whether some `S'` with `|S'| = |S|` makes `A[S u S']` dependent.
pub fn support_fails(a: &Matrix, s: &ColumnSet) -> Result<bool> {
    let n = a.ncols();
    for other in (0..n).combinations(s.len()) {
        let u = s.union(&ColumnSet::new(other, n)?);
        if !a.columns_independent(&u)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Monte Carlo frequency of supports that [`support_fails`].
pub fn support_failure_rate(
    a: &Matrix,
    model: &SupportModel,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
    budget: u128,
) -> Result<TrialReport> {
    let n = a.ncols();
    if let SupportModel::UniformK(k) = model {
        check_budget(binomial(n, *k), budget)?;
    }
    let fails = run_trials(trials, threads, |t| -> Result<bool> {
        let s = model.sample(n, &mut trial_rng(seed, t))?;
        check_budget(binomial(n, s.len()), budget)?;
        support_fails(a, &s)
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    Ok(TrialReport::new(
        fails.iter().filter(|&&f| f).count() as u64,
        trials,
        seed,
    ))
}

/// Exact failure probability under a uniformly random `k`-support, as
/// `(failing supports, all supports)`.
pub fn support_failure_exact(a: &Matrix, k: usize, budget: u128) -> Result<(u64, u64)> {
    let n = a.ncols();
    let total = binomial(n, k);
    check_budget(total.saturating_mul(total), budget)?;
    let mut failing = 0u64;
    for s in (0..n).combinations(k) {
        if support_fails(a, &ColumnSet::new(s, n)?)? {
            failing += 1;
        }
    }
    Ok((failing, total as u64))
}

/// Result of exhaustive l0 decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum L0Outcome {
    /// Exactly one solution of minimal sparsity.
    Unique(SparseSignal),
    /// Several solutions share the minimal sparsity.
    NotUnique,
    /// No solution with at most `kmax` nonzeros.
    NoneFound,
    BudgetExceeded,
}

/// Sparsest `x` with `A x = y`, searching supports of size `0..=kmax` in
/// increasing order.
pub fn l0_recover(a: &Matrix, y: &Vector, kmax: usize, budget: u128) -> Result<L0Outcome> {
    let n = a.ncols();
    if kmax > n {
        return Err(Error::TooLarge {
            what: "kmax",
            value: kmax,
            limit: n,
        });
    }
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: y.len(),
        });
    }
    let mut spent = 0u128;
    for t in 0..=kmax {
        let mut found: Option<SparseSignal> = None;
        for support in (0..n).combinations(t) {
            spent += 1;
            if spent > budget {
                return Ok(L0Outcome::BudgetExceeded);
            }
            let s = ColumnSet::new(support, n)?;
            let Some((z, rank)) = a.select_columns(&s)?.solve_with_rank(y)? else {
                continue;
            };
            let values = z.to_rationals();
            // a zero entry means a sparser solution, already counted
            if values.iter().any(Zero::is_zero) {
                continue;
            }
            if rank < t || found.is_some() {
                return Ok(L0Outcome::NotUnique);
            }
            found = Some(SparseSignal::new(n, s, values)?);
        }
        if let Some(x) = found {
            return Ok(L0Outcome::Unique(x));
        }
    }
    Ok(L0Outcome::NoneFound)
}

/// Two distinct signals with the same measurement, built from a dependent
/// column set.
///
/// With a kernel vector `v` supported on the witness `W` (`|W| = w`), the
/// first signal is `v` on the first `ceil(w/2)` positions of `W` and the
/// second is `-v` on the rest, so `A x = A x'`. When `W` is a smallest
/// dependent set and `w` is even, both halves are minimal solutions and l0
/// decoding of `A x` is not unique; when `w` is odd the shorter half is the
/// unique sparsest preimage, so `x` is still not recovered.
pub fn ambiguity_from_witness(a: &Matrix, witness: &ColumnSet) -> Result<(SparseSignal, SparseSignal)> {
    let n = a.ncols();
    let sub = a.select_columns(witness)?;
    let Some(v) = sub.kernel().vectors.into_iter().next() else {
        return Err(Error::Parse("witness columns are independent".into()));
    };
    let v = v.to_rationals();
    let w = witness.as_slice();
    let cut = w.len().div_ceil(2);
    let half = |range: std::ops::Range<usize>, sign: &BigRational| -> Result<SparseSignal> {
        let (idx, vals): (Vec<usize>, Vec<BigRational>) = range
            .filter(|&j| !v[j].is_zero())
            .map(|j| (w[j], &v[j] * sign))
            .unzip();
        SparseSignal::new(n, ColumnSet::new(idx, n)?, vals)
    };
    let one = BigRational::one();
    Ok((half(0..cut, &one)?, half(cut..w.len(), &-one.clone())?))
}

/// Sparse-recovery experiment summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseReport {
    pub n: usize,
    pub k: usize,
    pub field: crate::fields::FieldSpec,
    pub model: SupportModel,
    pub trials: u64,
    pub seed: u64,
    pub rng_id: &'static str,
    pub failures: u64,
    pub failure_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub certificate: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
}

impl SparseReport {
    pub fn new(a: &Matrix, k: usize, model: SupportModel, report: &TrialReport, spark: &SparkOutcome) -> Self {
        SparseReport {
            n: a.ncols(),
            k,
            field: a.field(),
            model,
            trials: report.trials,
            seed: report.seed,
            rng_id: report.rng_id,
            failures: report.events,
            failure_rate: report.p_hat,
            ci_lo: report.ci_lo,
            ci_hi: report.ci_hi,
            certificate: spark.label(),
            witness: match spark {
                SparkOutcome::Refuted(w) => Some(w.one_based()),
                _ => None,
            },
        }
    }
}
