//! The Sierpinski matrix `G_n`, its fast transform, COR matrices and their
//! Monte Carlo checks.
//!
//! Entry `(i, j)` of `G_n` (0-based) is 1 exactly when the bits of `i` are a
//! subset of the bits of `j`, so `G_n` is never stored for the transform and
//! COR rows are generated directly from their indices.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    check_unit, format_rational, rational_to_f64, ColumnSet, Field, FieldSpec, Matrix, Vector,
};
use crate::polarize::{log2_exact, select_rows_auto, RowSet, SelectionSpec};
use crate::sim::{run_trials, sample_subset, trial_rng, Bernoulli, TrialReport};

/// Largest `n` for which `G_n` is materialized densely.
pub const DENSE_LIMIT: usize = 1 << 12;

/// Largest `n` accepted by the expected-rank oracle (`2^n` subsets).
pub const ORACLE_LIMIT: usize = 12;

#[inline]
fn sierpinski_entry(i: usize, j: usize) -> bool {
    i & !j == 0
}

/// `G_n = [[1,1],[0,1]]^{(x) log n}` as a dense matrix over `field`.
pub fn sierpinski(n: usize, field: FieldSpec) -> Result<Matrix> {
    log2_exact(n)?;
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            what: "dense Sierpinski size",
            value: n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(Matrix::from_bool_fn(field, n, n, sierpinski_entry))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `x -> G_n x`.
    Forward,
    /// `x -> G_n^{-1} x`.
    Inverse,
}

/// `G_n x` (or `G_n^{-1} x`) by `log n` butterfly passes.
pub fn sierpinski_transform(x: &Vector, direction: Direction) -> Result<Vector> {
    let n = x.len();
    log2_exact(n)?;
    let mut out = x.clone();
    match &mut out {
        // over GF(2) addition and subtraction coincide
        Vector::Gf2(bits) => gf2_butterflies(bits.words_mut(), n),
        Vector::Prime(f, v) => {
            let f = *f;
            butterflies(v, |a, b| match direction {
                Direction::Forward => f.add(a, b),
                Direction::Inverse => f.sub(a, b),
            })
        }
        Vector::Rational(v) => butterflies(v, |a, b| match direction {
            Direction::Forward => a + b,
            Direction::Inverse => a - b,
        }),
    }
    Ok(out)
}

/// For every level `h`, `x[i] <- op(x[i], x[i + h])` when bit `h` of `i` is clear.
fn butterflies<T>(x: &mut [T], op: impl Fn(&T, &T) -> T) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                x[i] = op(&x[i], &x[i + h]);
            }
        }
        h *= 2;
    }
}

const LEVEL_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

fn gf2_butterflies(words: &mut [u64], n: usize) {
    let mut h = 1;
    let mut level = 0;
    while h < n && h < 64 {
        let mask = LEVEL_MASKS[level];
        for w in words.iter_mut() {
            *w ^= (*w >> h) & mask;
        }
        h *= 2;
        level += 1;
    }
    while h < n {
        let stride = h / 64;
        for block in (0..words.len()).step_by(2 * stride) {
            for k in block..block + stride {
                words[k] ^= words[k + stride];
            }
        }
        h *= 2;
    }
}

/// A COR matrix: the rows of `G_n` indexed by `H`, in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct CorMatrix {
    pub field: FieldSpec,
    pub n: usize,
    pub s: BigRational,
    pub selection: SelectionSpec,
    pub rows: RowSet,
    pub matrix: Matrix,
}

/// Selects `H` from the profile at `s` and assembles `R = G_n[H, :]`.
pub fn cor_matrix(
    n: usize,
    s: &BigRational,
    selection: &SelectionSpec,
    field: FieldSpec,
) -> Result<CorMatrix> {
    check_unit(s)?;
    let rows = select_rows_auto(n, s, selection)?;
    let matrix = rows_of_sierpinski(&rows, field);
    Ok(CorMatrix {
        field,
        n,
        s: s.clone(),
        selection: selection.clone(),
        rows,
        matrix,
    })
}

/// `G_n[H, :]` without materializing `G_n`.
pub fn rows_of_sierpinski(rows: &RowSet, field: FieldSpec) -> Matrix {
    let h = rows.indices().as_slice();
    Matrix::from_bool_fn(field, h.len(), rows.n(), |r, j| sierpinski_entry(h[r], j))
}

/// Metadata written next to a COR matrix file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorSidecar {
    pub n: usize,
    pub s: String,
    pub selection: SelectionSpec,
    pub field: FieldSpec,
    /// Selected rows, 1-based.
    #[serde(rename = "H")]
    pub h: Vec<usize>,
}

impl CorMatrix {
    /// `m = |H|`.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn sidecar(&self) -> CorSidecar {
        CorSidecar {
            n: self.n,
            s: format_rational(&self.s),
            selection: self.selection.clone(),
            field: self.field,
            h: self.rows.indices().one_based(),
        }
    }
}

/// `E[rank G_n^{(i)}[S]]` for `i = 0..=n`, where `G_n^{(i)}` holds the first
/// `i` rows and `S` keeps each column independently with probability `s`.
///
/// Computed by enumerating all `2^n` column subsets.
pub fn expected_rank_curve(n: usize, s: &BigRational, field: FieldSpec) -> Result<Vec<BigRational>> {
    check_unit(s)?;
    log2_exact(n)?;
    if n > ORACLE_LIMIT {
        return Err(Error::TooLarge {
            what: "oracle size",
            value: n,
            limit: ORACLE_LIMIT,
        });
    }
    let g = sierpinski(n, field)?;
    let t = BigRational::one() - s;
    let weight: Vec<BigRational> = (0..=n)
        .map(|k| num_traits::pow(s.clone(), k) * num_traits::pow(t.clone(), n - k))
        .collect();
    let mut curve = vec![BigRational::zero(); n + 1];
    for mask in 0u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        let w = &weight[cols.len()];
        if w.is_zero() {
            continue;
        }
        let sub = g.select_columns(&ColumnSet::new(cols, n)?)?;
        for (i, acc) in curve.iter_mut().enumerate().skip(1) {
            let rank = sub.select_rows(&ColumnSet::all(i))?.rank();
            *acc += w * BigRational::from_integer(BigInt::from(rank));
        }
    }
    Ok(curve)
}

/// `E[rank G_n^{(i)}[S]]` for a single row count `i`.
pub fn expected_rank_oracle(
    n: usize,
    i: usize,
    s: &BigRational,
    field: FieldSpec,
) -> Result<BigRational> {
    if i > n {
        return Err(Error::IndexOutOfRange { index: i, bound: n });
    }
    Ok(expected_rank_curve(n, s, field)?.swap_remove(i))
}

/// Consecutive differences of the expected-rank curve: the conditional rank
/// of each row.
pub fn oracle_differences(n: usize, s: &BigRational, field: FieldSpec) -> Result<Vec<BigRational>> {
    let curve = expected_rank_curve(n, s, field)?;
    Ok(curve.windows(2).map(|w| &w[1] - &w[0]).collect())
}

/// Estimates `P{rank R[S] = m}` for columns kept independently with
/// probability `s`.
pub fn full_rank_probability(
    cor: &CorMatrix,
    s: &BigRational,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<TrialReport> {
    let keep = Bernoulli::new(s)?;
    let a = &cor.matrix;
    let n = a.ncols();
    let m = cor.m();
    let hits = run_trials(trials, threads, |t| {
        let cols = sample_subset(n, &keep, &mut trial_rng(seed, t));
        let sub = a
            .select_columns(&ColumnSet::new(cols, n).expect("sampled in range"))
            .expect("sampled in range");
        sub.rank() == m
    });
    Ok(TrialReport::new(
        hits.iter().filter(|&&h| h).count() as u64,
        trials,
        seed,
    ))
}

/// Per-grid-point estimates of `P{A[S] has independent columns}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GirthEstimate {
    pub s_grid: Vec<BigRational>,
    pub estimates: Vec<TrialReport>,
}

impl GirthEstimate {
    /// CSV with columns `s,p_hat,ci_lo,ci_hi,trials`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,p_hat,ci_lo,ci_hi,trials\n");
        for (s, r) in self.s_grid.iter().zip(&self.estimates) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                rational_to_f64(s),
                r.p_hat,
                r.ci_lo,
                r.ci_hi,
                r.trials
            );
        }
        out
    }
}

/// Monte Carlo scan of column independence over a grid of sampling rates.
///
/// Every trial draws one uniform per column and reuses it at each grid point,
/// so the sampled sets are nested along the grid.
pub fn girth_scan(
    a: &Matrix,
    grid: &[BigRational],
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<GirthEstimate> {
    let samplers = grid.iter().map(Bernoulli::new).collect::<Result<Vec<_>>>()?;
    let n = a.ncols();
    let outcomes = run_trials(trials, threads, |t| {
        let mut rng = trial_rng(seed, t);
        let uniforms: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
        samplers
            .iter()
            .map(|b| {
                let cols = (0..n).filter(|&j| b.fires(uniforms[j])).collect();
                let s = ColumnSet::new(cols, n).expect("in range");
                a.columns_independent(&s).expect("in range")
            })
            .collect::<Vec<bool>>()
    });
    let estimates = (0..grid.len())
        .map(|g| {
            let hits = outcomes.iter().filter(|o| o[g]).count() as u64;
            TrialReport::new(hits, trials, seed)
        })
        .collect();
    Ok(GirthEstimate {
        s_grid: grid.to_vec(),
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::BitVec;
    use crate::polarize::CorProfile;
    use proptest::prelude::*;
    use rand::RngCore;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    const FIELDS: [FieldSpec; 4] = [
        FieldSpec::Gf2,
        FieldSpec::Prime(3),
        FieldSpec::Prime(5),
        FieldSpec::Rational,
    ];

    #[test]
    fn small_sierpinski_matrices() {
        let g2 = sierpinski(2, FieldSpec::Gf2).unwrap();
        assert_eq!(g2, Matrix::from_i64_rows(FieldSpec::Gf2, &[vec![1, 1], vec![0, 1]]).unwrap());
        let rows = vec![
            vec![1, 1, 1, 1],
            vec![0, 1, 0, 1],
            vec![0, 0, 1, 1],
            vec![0, 0, 0, 1],
        ];
        for f in FIELDS {
            let g4 = sierpinski(4, f).unwrap();
            assert_eq!(g4, Matrix::from_i64_rows(f, &rows).unwrap());
            assert_eq!(g4.rank(), 4);
            assert_eq!(sierpinski(16, f).unwrap().rank(), 16);
        }
        assert!(sierpinski(6, FieldSpec::Gf2).is_err());
        assert!(sierpinski(1 << 13, FieldSpec::Gf2).is_err());
    }

    #[test]
    fn transform_small_cases() {
        let x = Vector::from_i64(FieldSpec::Rational, &[3, 5]);
        let y = sierpinski_transform(&x, Direction::Forward).unwrap();
        assert_eq!(y, Vector::from_i64(FieldSpec::Rational, &[8, 5]));
        assert_eq!(sierpinski_transform(&y, Direction::Inverse).unwrap(), x);
        let z = Vector::zeros(FieldSpec::Prime(7), 8);
        assert_eq!(sierpinski_transform(&z, Direction::Forward).unwrap(), z);
        assert!(sierpinski_transform(&Vector::zeros(FieldSpec::Gf2, 3), Direction::Forward).is_err());
    }

    fn random_vector(field: FieldSpec, n: usize, seed: u64) -> Vector {
        let mut rng = trial_rng(seed, 0);
        let vals: Vec<i64> = (0..n).map(|_| (rng.next_u64() % 19) as i64 - 9).collect();
        Vector::from_i64(field, &vals)
    }

    #[test]
    fn transform_matches_dense_product() {
        for f in FIELDS {
            for l in 0..=10 {
                if f == FieldSpec::Rational && l > 8 {
                    continue;
                }
                let n = 1 << l;
                let g = sierpinski(n, f).unwrap();
                let x = random_vector(f, n, l as u64);
                let fast = sierpinski_transform(&x, Direction::Forward).unwrap();
                assert_eq!(fast, g.mul_vec(&x).unwrap(), "{f} n={n}");
                let back = sierpinski_transform(&fast, Direction::Inverse).unwrap();
                assert_eq!(back, x);
            }
        }
    }

    #[test]
    fn gf2_transform_is_an_involution() {
        for l in [0, 1, 5, 6, 7, 12, 16] {
            let n = 1usize << l;
            let x = random_vector(FieldSpec::Gf2, n, 100 + l as u64);
            let y = sierpinski_transform(&x, Direction::Forward).unwrap();
            assert_eq!(sierpinski_transform(&y, Direction::Forward).unwrap(), x);
        }
    }

    #[test]
    fn cor_matrix_examples() {
        let c = cor_matrix(4, &q(1, 2), &SelectionSpec::TopM(2), FieldSpec::Gf2).unwrap();
        let want = Matrix::from_i64_rows(FieldSpec::Gf2, &[vec![1, 1, 1, 1], vec![0, 1, 0, 1]]).unwrap();
        assert_eq!(c.matrix, want);
        assert_eq!(c.sidecar().h, vec![1, 2]);
        let all = cor_matrix(8, &q(1, 3), &SelectionSpec::TopM(8), FieldSpec::Prime(5)).unwrap();
        assert_eq!(all.matrix, sierpinski(8, FieldSpec::Prime(5)).unwrap());
        let none = cor_matrix(4, &q(1, 2), &SelectionSpec::TopM(0), FieldSpec::Gf2).unwrap();
        assert_eq!((none.matrix.nrows(), none.matrix.ncols()), (0, 4));
    }

    #[test]
    fn cor_matrix_has_full_row_rank() {
        for f in FIELDS {
            let c = cor_matrix(64, &q(1, 2), &SelectionSpec::TopM(20), f).unwrap();
            assert!(c.matrix.is_zero_one());
            assert_eq!(c.matrix.rank(), 20);
        }
    }

    #[test]
    fn sidecar_round_trips() {
        let c = cor_matrix(8, &q(1, 2), &SelectionSpec::PaperThreshold, FieldSpec::Prime(3)).unwrap();
        let json = serde_json::to_string(&c.sidecar()).unwrap();
        assert!(json.contains("\"H\":"));
        let back: CorSidecar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c.sidecar());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(expected_rank_oracle(2, 0, &q(1, 2), FieldSpec::Gf2).unwrap(), q(0, 1));
        assert_eq!(expected_rank_oracle(2, 1, &q(1, 2), FieldSpec::Gf2).unwrap(), q(3, 4));
        let want = vec![q(15, 16), q(9, 16), q(7, 16), q(1, 16)];
        for f in FIELDS {
            assert_eq!(oracle_differences(4, &q(1, 2), f).unwrap(), want);
        }
        assert!(expected_rank_curve(16, &q(1, 2), FieldSpec::Gf2).is_err());
    }

    #[test]
    fn oracle_matches_profile() {
        for n in [1, 2, 4, 8] {
            for s in [q(1, 2), q(1, 3), q(3, 4), q(0, 1), q(1, 1)] {
                let prof = CorProfile::exact(n, &s).unwrap().values();
                for f in FIELDS {
                    assert_eq!(oracle_differences(n, &s, f).unwrap(), prof, "n={n} {f}");
                }
            }
        }
    }

    #[test]
    fn full_rank_probability_extremes() {
        let c = cor_matrix(64, &q(1, 2), &SelectionSpec::TopM(16), FieldSpec::Gf2).unwrap();
        let one = full_rank_probability(&c, &q(1, 1), 50, 1, None).unwrap();
        assert_eq!(one.events, 50);
        let zero = full_rank_probability(&c, &q(0, 1), 50, 1, None).unwrap();
        assert_eq!(zero.events, 0);
        let a = full_rank_probability(&c, &q(1, 2), 200, 7, Some(1)).unwrap();
        let b = full_rank_probability(&c, &q(1, 2), 200, 7, Some(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn girth_scan_identity_and_zero_column() {
        let grid = [q(1, 10), q(1, 2), q(9, 10)];
        let id = Matrix::identity(FieldSpec::Gf2, 16);
        let est = girth_scan(&id, &grid, 100, 3, None).unwrap();
        assert!(est.estimates.iter().all(|r| r.events == 100));

        // zero column 0: fails exactly when column 0 is sampled
        let a = Matrix::from_bool_fn(FieldSpec::Gf2, 8, 8, |i, j| j > 0 && i == j);
        let trials = 4000;
        let est = girth_scan(&a, &grid, trials, 4, None).unwrap();
        for (s, r) in grid.iter().zip(&est.estimates) {
            let want = 1.0 - rational_to_f64(s);
            assert!(r.ci_lo - 0.01 <= want && want <= r.ci_hi + 0.01, "{r:?}");
        }
        let csv = est.to_csv();
        assert!(csv.starts_with("s,p_hat,ci_lo,ci_hi,trials\n0.1,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn coupled_scan_is_monotone() {
        let c = cor_matrix(64, &q(1, 2), &SelectionSpec::TopM(26), FieldSpec::Gf2).unwrap();
        let grid: Vec<BigRational> = (1..10).map(|k| q(k, 10)).collect();
        let samplers: Vec<Bernoulli> = grid.iter().map(|s| Bernoulli::new(s).unwrap()).collect();
        for t in 0..100 {
            let mut rng = trial_rng(5, t);
            let u: Vec<u64> = (0..64).map(|_| rng.next_u64()).collect();
            let indep: Vec<bool> = samplers
                .iter()
                .map(|b| {
                    let cols = (0..64).filter(|&j| b.fires(u[j])).collect();
                    c.matrix.columns_independent(&ColumnSet::new(cols, 64).unwrap()).unwrap()
                })
                .collect();
            // once dependent, every larger coupled sample stays dependent
            assert!(indep.windows(2).all(|w| w[0] || !w[1]), "trial {t}");
        }
        let est = girth_scan(&c.matrix, &grid, 200, 5, None).unwrap();
        assert!(est.estimates.windows(2).all(|w| w[0].events >= w[1].events));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gf2_fast_transform_matches_dense(l in 0u32..9, bits in proptest::collection::vec(any::<bool>(), 256)) {
            let n = 1usize << l;
            let x = Vector::Gf2(BitVec::from_bools(&bits[..n]));
            let fast = sierpinski_transform(&x, Direction::Forward).unwrap();
            prop_assert_eq!(&fast, &sierpinski(n, FieldSpec::Gf2).unwrap().mul_vec(&x).unwrap());
            prop_assert_eq!(sierpinski_transform(&fast, Direction::Inverse).unwrap(), x);
        }

        #[test]
        fn prime_transform_round_trips(l in 0u32..8, vals in proptest::collection::vec(-50i64..50, 128)) {
            let n = 1usize << l;
            let x = Vector::from_i64(FieldSpec::Prime(7), &vals[..n]);
            let y = sierpinski_transform(&x, Direction::Forward).unwrap();
            prop_assert_eq!(sierpinski_transform(&y, Direction::Inverse).unwrap(), x);
        }
    }
}
