//! Linear codes defined by parity-check matrices: encoding, erasure decoding
//! by linear solving, exhaustive ML decoding on the BSC, weight enumerators
//! and union bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use crate::channels::{bhattacharyya_bsc, le_bhattacharyya_power, require_gf2, ChannelOutput, ChannelParams};
use crate::error::{Error, Result};
use crate::fields::{BitMatrix, BitVec, ColumnSet, DenseMatrix, FieldSpec, Matrix, Rationals, Vector};
use crate::sim::{run_trials, trial_rng, TrialReport};

/// Default cap on the number of codewords any enumeration may visit.
pub const DEFAULT_CODEWORD_BUDGET: u128 = 1 << 20;

/// Random rational messages draw each coordinate uniformly from
/// `-RATIONAL_MESSAGE_RANGE..=RATIONAL_MESSAGE_RANGE`.
pub const RATIONAL_MESSAGE_RANGE: i64 = 8;

/// The null space of a parity-check matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCode {
    pub field: FieldSpec,
    pub pcm: Matrix,
    /// `n x k`; its columns are a basis of the code.
    pub gen: Matrix,
    pub n: usize,
    pub k: usize,
}

/// Builds a matrix whose rows are `vectors` (all of length `ncols`).
fn matrix_from_rows(field: FieldSpec, ncols: usize, vectors: &[Vector]) -> Matrix {
    match field {
        FieldSpec::Gf2 => {
            let rows: Vec<BitVec> = vectors
                .iter()
                .map(|v| match v {
                    Vector::Gf2(b) => b.clone(),
                    _ => unreachable!("kernel vectors share the matrix field"),
                })
                .collect();
            Matrix::Gf2(BitMatrix::from_rows(ncols, &rows))
        }
        FieldSpec::Prime(_) => {
            let (f, rows): (Vec<_>, Vec<&Vec<u32>>) = vectors
                .iter()
                .map(|v| match v {
                    Vector::Prime(f, x) => (*f, x),
                    _ => unreachable!("kernel vectors share the matrix field"),
                })
                .unzip();
            match f.first() {
                Some(&f) => Matrix::Prime(DenseMatrix::from_fn(f, rows.len(), ncols, |i, j| {
                    rows[i][j]
                })),
                None => Matrix::zeros(field, 0, ncols),
            }
        }
        FieldSpec::Rational => {
            let rows: Vec<&Vec<BigRational>> = vectors
                .iter()
                .map(|v| match v {
                    Vector::Rational(x) => x,
                    _ => unreachable!("kernel vectors share the matrix field"),
                })
                .collect();
            Matrix::Rational(DenseMatrix::from_fn(Rationals, rows.len(), ncols, |i, j| {
                rows[i][j].clone()
            }))
        }
    }
}

/// The code `{x : pcm x = 0}` with a generator assembled from a kernel basis.
pub fn code_from_pcm(pcm: Matrix) -> LinearCode {
    let n = pcm.ncols();
    let basis = pcm.kernel().vectors;
    let k = basis.len();
    let gen = matrix_from_rows(pcm.field(), n, &basis).transpose();
    LinearCode {
        field: pcm.field(),
        pcm,
        gen,
        n,
        k,
    }
}

impl LinearCode {
    /// `k / n`.
    pub fn rate(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.k as f64 / self.n as f64
        }
    }

    /// `gen * message`.
    pub fn encode(&self, message: &Vector) -> Result<Vector> {
        self.gen.mul_vec(message)
    }

    pub fn syndrome(&self, word: &Vector) -> Result<Vector> {
        self.pcm.mul_vec(word)
    }

    pub fn is_codeword(&self, word: &Vector) -> Result<bool> {
        Ok(self.syndrome(word)?.is_zero())
    }

    /// A uniformly random message (bounded integers for the rationals).
    pub fn random_message(&self, rng: &mut impl RngCore) -> Vector {
        match self.field {
            FieldSpec::Gf2 => {
                let mut v = BitVec::zeros(self.k);
                let mut word = 0u64;
                for i in 0..self.k {
                    if i % 64 == 0 {
                        word = rng.next_u64();
                    }
                    v.set(i, word >> (i % 64) & 1 == 1);
                }
                Vector::Gf2(v)
            }
            FieldSpec::Prime(p) => {
                let vals: Vec<i64> = (0..self.k).map(|_| rng.random_range(0..p as i64)).collect();
                Vector::from_i64(self.field, &vals)
            }
            FieldSpec::Rational => {
                let r = RATIONAL_MESSAGE_RANGE;
                let vals: Vec<i64> = (0..self.k).map(|_| rng.random_range(-r..=r)).collect();
                Vector::from_i64(self.field, &vals)
            }
        }
    }

    /// A uniformly random codeword.
    pub fn random_codeword(&self, rng: &mut impl RngCore) -> Vector {
        self.encode(&self.random_message(rng))
            .expect("message length is k")
    }

    /// `|F|^k`, or `None` over the rationals.
    pub fn size(&self) -> Option<u128> {
        let q = self.field.order()? as u128;
        let mut size = 1u128;
        for _ in 0..self.k {
            size = size.checked_mul(q)?;
        }
        Some(size)
    }

    fn check_enumerable(&self, budget: u128) -> Result<u128> {
        let Some(size) = self.size() else {
            return Err(Error::FieldMismatch(
                "codeword enumeration needs a finite field".into(),
            ));
        };
        if size > budget {
            return Err(Error::BudgetExceeded {
                needed: size,
                budget,
            });
        }
        Ok(size)
    }

    /// Visits every codeword once, each derived from the previous one by
    /// basis-vector additions (exactly one per step over GF(2)).
    fn for_each_codeword(&self, budget: u128, mut visit: impl FnMut(&Vector)) -> Result<()> {
        self.check_enumerable(budget)?;
        let basis: Vec<Vector> = (0..self.k)
            .map(|j| {
                let mut e = vec![0i64; self.k];
                e[j] = 1;
                self.encode(&Vector::from_i64(self.field, &e)).expect("length k")
            })
            .collect();
        let q = self.field.order().expect("finite field") as usize;
        let mut word = Vector::zeros(self.field, self.n);
        visit(&word);
        if q == 2 {
            // binary reflected Gray code: step i flips basis vector tz(i)
            for i in 1u128..1 << self.k {
                word = word.add(&basis[i.trailing_zeros() as usize]).expect("same field");
                visit(&word);
            }
            return Ok(());
        }
        let mut digits = vec![0usize; self.k];
        'outer: loop {
            // mixed-radix increment; a digit wrapping to zero has added its
            // basis vector q times, which is zero
            for j in 0..self.k {
                word = word.add(&basis[j]).expect("same field");
                digits[j] += 1;
                if digits[j] < q {
                    visit(&word);
                    continue 'outer;
                }
                digits[j] = 0;
            }
            return Ok(());
        }
    }

    /// All codewords of a binary code, in Gray-code order.
    pub fn codebook(&self, budget: u128) -> Result<Codebook> {
        require_gf2(self.field)?;
        let mut words = Vec::new();
        self.for_each_codeword(budget, |w| {
            let Vector::Gf2(b) = w else { unreachable!() };
            words.push(b.clone());
        })?;
        Ok(Codebook { n: self.n, words })
    }
}

/// Outcome of a decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeResult {
    Decoded(Vector),
    /// Several codewords match the received word equally well.
    Ambiguous,
    /// No codeword matches the unerased symbols.
    Inconsistent,
}

impl DecodeResult {
    pub fn is_decoded(&self) -> bool {
        matches!(self, DecodeResult::Decoded(_))
    }
}

/// Erasure decoding by solving `pcm[E] x_E = -pcm[E^c] y_{E^c}`.
pub fn mec_decode(code: &LinearCode, y: &ChannelOutput) -> Result<DecodeResult> {
    if y.symbols.len() != code.n {
        return Err(Error::DimensionMismatch {
            expected: code.n,
            found: y.symbols.len(),
        });
    }
    let erased = y.erased.as_slice();
    // erased positions are zero, so this is the syndrome of the known part
    let known = y
        .symbols
        .scatter(erased, &Vector::zeros(code.field, erased.len()))?;
    let rhs = code.pcm.mul_vec(&known)?.neg();
    let sub = code.pcm.select_columns(&y.erased)?;
    Ok(match sub.solve_with_rank(&rhs)? {
        None => DecodeResult::Inconsistent,
        Some((_, rank)) if rank < erased.len() => DecodeResult::Ambiguous,
        Some((x, _)) => DecodeResult::Decoded(known.scatter(erased, &x)?),
    })
}

/// One erasure-channel trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MecTrial {
    /// The decoder did not return the transmitted codeword.
    pub failure: bool,
    /// The erased columns of the parity-check matrix are dependent.
    pub dependent: bool,
}

/// Aggregate of an erasure-channel simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct MecReport {
    pub report: TrialReport,
    pub dependence_events: u64,
    /// Trials where the two indicators disagree.
    pub mismatches: u64,
}

impl MecReport {
    pub fn dependence_rate(&self) -> f64 {
        if self.report.trials == 0 {
            0.0
        } else {
            self.dependence_events as f64 / self.report.trials as f64
        }
    }
}

/// Runs trial `trial`: random codeword, erasure channel, decoder, and an
/// independent rank test on the erased columns.
pub fn mec_trial(code: &LinearCode, channel: &ChannelParams, seed: u64, trial: u64) -> Result<MecTrial> {
    let mut rng = trial_rng(seed, trial);
    let x = code.random_codeword(&mut rng);
    let y = channel.transmit(&x, &mut rng)?;
    let decoded = mec_decode(code, &y)?;
    let failure = decoded != DecodeResult::Decoded(x);
    let dependent = !code.pcm.columns_independent(&y.erased)?;
    Ok(MecTrial { failure, dependent })
}

/// Per-trial outcomes of an erasure-channel simulation, in trial order.
pub fn mec_trials(
    code: &LinearCode,
    p: &BigRational,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<MecTrial>> {
    let channel = ChannelParams::mec(p.clone())?;
    run_trials(trials, threads, |t| mec_trial(code, &channel, seed, t))
        .into_iter()
        .collect()
}

/// Block-error rate over `MEC(p)` with both indicators counted.
pub fn mec_error_rate(
    code: &LinearCode,
    p: &BigRational,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<MecReport> {
    let outcomes = mec_trials(code, p, trials, seed, threads)?;
    let failures = outcomes.iter().filter(|o| o.failure).count() as u64;
    Ok(MecReport {
        report: TrialReport::new(failures, trials, seed),
        dependence_events: outcomes.iter().filter(|o| o.dependent).count() as u64,
        mismatches: outcomes.iter().filter(|o| o.failure != o.dependent).count() as u64,
    })
}

/// `N(w)`: the number of codewords of each Hamming weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightEnumerator {
    pub n: usize,
    pub counts: Vec<u128>,
}

impl WeightEnumerator {
    /// Least positive weight with a codeword, if any.
    pub fn min_distance(&self) -> Option<usize> {
        (1..=self.n).find(|&w| self.counts[w] > 0)
    }

    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }
}

/// Exact weight distribution by enumerating every codeword.
pub fn weight_enumerator(code: &LinearCode, budget: u128) -> Result<WeightEnumerator> {
    let mut counts = vec![0u128; code.n + 1];
    code.for_each_codeword(budget, |w| counts[w.weight()] += 1)?;
    Ok(WeightEnumerator { n: code.n, counts })
}

/// `sum_{w >= 1} N(w) z(p)^w`.
pub fn union_bound_bsc(enumerator: &WeightEnumerator, p: f64) -> f64 {
    let z = bhattacharyya_bsc(p);
    enumerator
        .counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(w, &c)| c as f64 * z.powi(w as i32))
        .sum()
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// `P{Bin(w, p) >= ceil(w/2)}`, exactly.
pub fn binomial_tail(w: u32, p: &BigRational) -> BigRational {
    let q = BigRational::one() - p;
    (w.div_ceil(2)..=w)
        .map(|k| {
            BigRational::from_integer(binomial(w, k))
                * num_traits::pow(p.clone(), k as usize)
                * num_traits::pow(q.clone(), (w - k) as usize)
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `P{Bin(w, p) >= ceil(w/2)}` in double precision.
pub fn binomial_tail_f64(w: u32, p: f64) -> f64 {
    (w.div_ceil(2)..=w)
        .map(|k| {
            let c = (0..k).fold(1.0, |acc, i| acc * (w - i) as f64 / (i + 1) as f64);
            c * p.powi(k as i32) * (1.0 - p).powi((w - k) as i32)
        })
        .sum()
}

/// Exact check of `P{Bin(w, p) >= ceil(w/2)} <= z(p)^w`.
pub fn binomial_tail_within_bhattacharyya(w: u32, p: &BigRational) -> bool {
    le_bhattacharyya_power(&binomial_tail(w, p), p, w)
}

/// Every codeword of a binary code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    pub n: usize,
    pub words: Vec<BitVec>,
}

/// Minimum-distance decoding; a tie for the minimum is [`DecodeResult::Ambiguous`].
pub fn ml_decode_bsc(codebook: &Codebook, y: &Vector) -> Result<DecodeResult> {
    let Vector::Gf2(y) = y else {
        return Err(Error::FieldMismatch(format!("expected gf2, got {}", y.field())));
    };
    if y.len() != codebook.n {
        return Err(Error::DimensionMismatch {
            expected: codebook.n,
            found: y.len(),
        });
    }
    let mut best = usize::MAX;
    let mut winner = None;
    let mut tied = false;
    for (i, c) in codebook.words.iter().enumerate() {
        let d = c.distance(y);
        if d < best {
            best = d;
            winner = Some(i);
            tied = false;
        } else if d == best {
            tied = true;
        }
    }
    Ok(match winner {
        Some(i) if !tied => DecodeResult::Decoded(Vector::Gf2(codebook.words[i].clone())),
        _ => DecodeResult::Ambiguous,
    })
}

/// Block-error rate of ML decoding over `BSC(p)`; ties count as errors.
pub fn bsc_error_rate(
    code: &LinearCode,
    codebook: &Codebook,
    p: &BigRational,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<TrialReport> {
    require_gf2(code.field)?;
    let channel = ChannelParams::bsc(p.clone())?;
    let errors = run_trials(trials, threads, |t| -> Result<bool> {
        let mut rng = trial_rng(seed, t);
        let x = code.random_codeword(&mut rng);
        let y = channel.transmit(&x, &mut rng)?;
        Ok(ml_decode_bsc(codebook, &y.symbols)? != DecodeResult::Decoded(x))
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    Ok(TrialReport::new(
        errors.iter().filter(|&&e| e).count() as u64,
        trials,
        seed,
    ))
}

/// Positions of `word` that differ from zero, as a column set.
pub fn support(word: &Vector) -> ColumnSet {
    let idx = (0..word.len()).filter(|&i| !word.get(i).is_zero()).collect();
    ColumnSet::new(idx, word.len()).expect("in range")
}
