//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::BigRational;
use rand::{Rng, RngCore};

use polargirth::channels::bhattacharyya_upper;
use polargirth::codec::{
    binomial_tail, binomial_tail_within_bhattacharyya, code_from_pcm, mec_error_rate,
    weight_enumerator, DEFAULT_CODEWORD_BUDGET,
};
use polargirth::cor::{
    cor_matrix, expected_rank_oracle, full_rank_probability, girth_scan, sierpinski,
    sierpinski_transform, Direction,
};
use polargirth::fields::{
    format_rational, parse_rational, vandermonde, BitVec, ColumnSet, FieldSpec, Matrix, Vector,
    DEFAULT_GIRTH_BUDGET,
};
use polargirth::polarize::{
    polarization_fractions_float, CorProfile, FloatProfile, SelectionSpec,
};
use polargirth::report::{simulate_bsc, simulate_mec, BHATT_SEED_BITS};
use polargirth::sim::trial_rng;
use polargirth::sparse::{
    ambiguity_from_witness, l0_recover, measure, spark_certificate, L0Outcome, SparkOutcome,
    SparseSignal, DEFAULT_SPARSE_BUDGET,
};

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn q(text: &str) -> BigRational {
    parse_rational(text).expect("valid rational literal")
}

const FIELDS: [FieldSpec; 4] = [
    FieldSpec::Gf2,
    FieldSpec::Prime(3),
    FieldSpec::Prime(5),
    FieldSpec::Rational,
];

fn oracle_equality() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in [2usize, 4, 8] {
        for s in ["1/2", "1/3", "3/4"] {
            let s = q(s);
            let profile = CorProfile::exact(n, &s).expect("power of two");
            for field in FIELDS {
                let curve: Vec<BigRational> = (0..=n)
                    .map(|i| expected_rank_oracle(n, i, &s, field).expect("small n"))
                    .collect();
                for i in 0..n {
                    checked += 1;
                    if &curve[i + 1] - &curve[i] != profile.value(i) {
                        bad.push(format!("n={n} s={} {field} i={}", format_rational(&s), i + 1));
                    }
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} leaves compared, {} differ {:?}", bad.len(), bad))
}

fn martingale_conservation() -> Outcome {
    let mut rng = trial_rng(SEED, 2);
    let mut bad = Vec::new();
    let mut sizes = 0;
    let mut grid = Vec::new();
    for _ in 0..5 {
        let d: i64 = rng.random_range(2..=97);
        let a: i64 = rng.random_range(1..d);
        let s = BigRational::new(a.into(), d.into());
        grid.push(format_rational(&s));
        for e in 0..=12 {
            let n = 1usize << e;
            sizes += 1;
            let total = CorProfile::exact(n, &s).expect("power of two").total();
            if total != &s * BigRational::from_integer(n.into()) {
                bad.push(format!("n={n} s={}", format_rational(&s)));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("s in {{{}}}, {sizes} profiles up to n=4096, violations {:?}", grid.join(", "), bad),
    )
}

fn small_profile() -> Outcome {
    let got = CorProfile::exact(4, &q("1/2")).expect("n=4").values();
    let want: Vec<BigRational> = ["15/16", "9/16", "7/16", "1/16"].iter().map(|t| q(t)).collect();
    let shown: Vec<String> = got.iter().map(format_rational).collect();
    outcome(got == want, format!("({})", shown.join(", ")))
}

fn polarization_trend() -> Outcome {
    let delta = q("1/100");
    let mut mids = Vec::new();
    for e in [4u32, 6, 8, 10, 12, 14] {
        let profile = FloatProfile::compute(1 << e, &q("1/2")).expect("power of two");
        mids.push(
            polarization_fractions_float(&profile, &delta)
                .expect("valid delta")
                .mid_fraction(),
        );
    }
    let monotone = mids.windows(2).all(|w| w[1] <= w[0]);
    let last = *mids.last().expect("non-empty");
    outcome(
        monotone && last <= 0.35,
        format!("mid fractions at n=2^4..2^14: {mids:.4?}"),
    )
}

fn full_rank() -> Outcome {
    let half = q("1/2");
    let cor = cor_matrix(1024, &half, &SelectionSpec::PaperThreshold, FieldSpec::Gf2)
        .expect("n=1024");
    let r = full_rank_probability(&cor, &half, 1000, SEED, None).expect("valid s");
    outcome(
        r.p_hat >= 0.99,
        format!(
            "m={} full-rank estimate {:.4} (95% CI [{:.4}, {:.4}], {} trials)",
            cor.m(),
            r.p_hat,
            r.ci_lo,
            r.ci_hi,
            r.trials
        ),
    )
}

fn girth_transition() -> Outcome {
    let cor = cor_matrix(256, &q("1/2"), &SelectionSpec::TopM(256 * 2 / 5), FieldSpec::Gf2)
        .expect("n=256");
    let grid: Vec<BigRational> = ["0.30", "0.35", "0.40", "0.60", "0.65"].iter().map(|t| q(t)).collect();
    let scan = girth_scan(&cor.matrix, &grid, 500, SEED, None).expect("valid grid");
    let p: Vec<f64> = scan.estimates.iter().map(|r| r.p_hat).collect();
    let pass = p[..3].iter().all(|&x| x >= 0.95) && p[3..].iter().all(|&x| x <= 0.05);
    outcome(
        pass,
        format!(
            "m={} independence estimates at s=0.30,0.35,0.40,0.60,0.65: {p:.3?}",
            cor.m()
        ),
    )
}

fn erasure_identity() -> Outcome {
    let cor = cor_matrix(1024, &q("3/5"), &SelectionSpec::TopM(614), FieldSpec::Gf2)
        .expect("n=1024");
    let code = code_from_pcm(cor.matrix);
    let r = mec_error_rate(&code, &q("0.4"), 10_000, SEED, None).expect("valid p");
    outcome(
        r.mismatches == 0 && r.report.trials >= 10_000,
        format!(
            "k={} trials={} failures={} dependent={} mismatches={}",
            code.k, r.report.trials, r.report.events, r.dependence_events, r.mismatches
        ),
    )
}

fn random_01(field: FieldSpec, m: usize, n: usize, rng: &mut impl RngCore) -> Matrix {
    let bits: Vec<bool> = (0..m * n).map(|_| rng.next_u64() & 1 == 1).collect();
    Matrix::from_bool_fn(field, m, n, |i, j| bits[i * n + j])
}

fn distance_equals_girth() -> Outcome {
    let mut rng = trial_rng(SEED, 8);
    let mut codes: Vec<(String, Matrix)> = Vec::new();
    while codes.len() < 24 {
        let n = rng.random_range(4..=16usize);
        let m = rng.random_range(1..=n);
        let pcm = random_01(FieldSpec::Gf2, m, n, &mut rng);
        let k = n - pcm.rank();
        if k <= 10 {
            codes.push((format!("random {m}x{n}"), pcm));
        }
    }
    for (n, m) in [(8, 3), (8, 4), (16, 6), (16, 8), (16, 10)] {
        let cor = cor_matrix(n, &q("1/2"), &SelectionSpec::TopM(m), FieldSpec::Gf2).expect("small");
        codes.push((format!("COR n={n} m={m}"), cor.matrix));
    }
    let total = codes.len();
    let mut bad = Vec::new();
    for (name, pcm) in codes {
        let n = pcm.ncols();
        let girth = pcm.exact_girth(DEFAULT_GIRTH_BUDGET).expect("small matrix");
        let code = code_from_pcm(pcm);
        let we = weight_enumerator(&code, DEFAULT_CODEWORD_BUDGET).expect("k <= 10");
        let d = we.min_distance().unwrap_or(n + 1);
        if d != girth {
            bad.push(format!("{name}: distance {d}, girth {girth}"));
        }
    }
    outcome(bad.is_empty(), format!("{total} codes, mismatches {bad:?}"))
}

fn vandermonde_girth() -> Outcome {
    let nodes: Vec<BigRational> = (1..=8).map(|i| BigRational::from_integer(i.into())).collect();
    let gf11 = vandermonde(FieldSpec::Prime(11), 4, &nodes).expect("distinct nodes");
    let rat = vandermonde(FieldSpec::Rational, 4, &nodes).expect("distinct nodes");
    let g1 = gf11.exact_girth(DEFAULT_GIRTH_BUDGET);
    let g2 = rat.exact_girth(DEFAULT_GIRTH_BUDGET);
    outcome(
        g1 == Some(5) && g2 == Some(5),
        format!("GF(11): {g1:?}, rational: {g2:?}"),
    )
}

fn bsc_bounds() -> Outcome {
    let p = q("0.05");
    let s = bhattacharyya_upper(&p, BHATT_SEED_BITS).expect("p in (0, 1/2)");
    let cor = cor_matrix(16, &s, &SelectionSpec::TopM(7), FieldSpec::Gf2).expect("n=16");
    let side = cor.sidecar();
    let code = code_from_pcm(cor.matrix);
    let r = simulate_bsc(&code, Some(&side), "0.05", &p, 100_000, SEED, None, DEFAULT_CODEWORD_BUDGET)
        .expect("small code");
    let half = (r.ci_hi - r.ci_lo) / 2.0;
    let b = r.bounds.clone().expect("bsc reports carry bounds");
    let (union, bhatt) = (b.union.expect("enumerated"), b.bhatt.expect("COR sidecar"));
    outcome(
        code.k >= 4 && r.p_hat <= union + 3.0 * half && r.p_hat <= bhatt + 3.0 * half,
        format!(
            "k={} p_hat={:.5} half-width={:.5} union={union:.5} bhatt={bhatt:.5}",
            code.k, r.p_hat, half
        ),
    )
}

fn binomial_tails() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for p in ["0.05", "0.1", "0.25"] {
        let pr = q(p);
        for w in 0..=20u32 {
            checked += 1;
            if !binomial_tail_within_bhattacharyya(w, &pr) {
                bad.push(format!("p={p} w={w} tail={}", format_rational(&binomial_tail(w, &pr))));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} (w, p) pairs, violations {bad:?}"))
}

fn sparse_matrices() -> Vec<(String, Matrix)> {
    let ints = |range: std::ops::RangeInclusive<i64>| -> Vec<BigRational> {
        range.map(|i| BigRational::from_integer(i.into())).collect()
    };
    let mut out = vec![
        ("Vandermonde 4x12 rational".to_string(), vandermonde(FieldSpec::Rational, 4, &ints(1..=12)).expect("ok")),
        ("Vandermonde 4x10 GF(11)".to_string(), vandermonde(FieldSpec::Prime(11), 4, &ints(0..=9)).expect("ok")),
        ("Vandermonde 5x12 GF(13)".to_string(), vandermonde(FieldSpec::Prime(13), 5, &ints(1..=12)).expect("ok")),
        ("Vandermonde 3x8 rational".to_string(), vandermonde(FieldSpec::Rational, 3, &ints(1..=8)).expect("ok")),
    ];
    let cor = cor_matrix(16, &q("1/2"), &SelectionSpec::TopM(8), FieldSpec::Rational).expect("n=16");
    let first12 = ColumnSet::new((0..12).collect(), 16).expect("in range");
    out.push(("COR n=16 m=8 rational, 12 columns".to_string(), cor.matrix.select_columns(&first12).expect("ok")));
    let mut rng = trial_rng(SEED, 12);
    for (field, m, n) in [(FieldSpec::Rational, 5, 10), (FieldSpec::Prime(3), 6, 12), (FieldSpec::Gf2, 6, 12)] {
        let a = random_01(field, m, n, &mut rng);
        out.push((format!("random 0/1 {m}x{n} {field}"), a));
    }
    out
}

fn sparse_recovery() -> Outcome {
    let k = 2;
    let mut certified = 0;
    let mut refuted = 0;
    let mut instances = 0u64;
    let mut strict = 0;
    let mut bad = Vec::new();
    for (name, a) in sparse_matrices() {
        let n = a.ncols();
        match spark_certificate(&a, k, DEFAULT_SPARSE_BUDGET) {
            SparkOutcome::Certified => {
                certified += 1;
                for size in 0..=k {
                    for support in (0..n).combinations(size) {
                        for signs in 0..(1u64 << size) {
                            instances += 1;
                            let set = ColumnSet::new(support.clone(), n).expect("in range");
                            let x = SparseSignal::signed_ones(n, set, signs).expect("in range");
                            let y = measure(&a, &x).expect("sizes match");
                            let got = l0_recover(&a, &y, k, DEFAULT_SPARSE_BUDGET).expect("sizes match");
                            let want = SparseSignal::from_dense(
                                &Vector::from_rationals(a.field(), &x.to_dense()).expect("in field"),
                            );
                            if got != L0Outcome::Unique(want) {
                                bad.push(format!("{name}: support {support:?} signs {signs:b} -> {got:?}"));
                            }
                        }
                    }
                }
            }
            SparkOutcome::Refuted(witness) => {
                refuted += 1;
                let (x, x2) = ambiguity_from_witness(&a, &witness).expect("dependent witness");
                let y = measure(&a, &x).expect("sizes match");
                let y2 = measure(&a, &x2).expect("sizes match");
                let got = l0_recover(&a, &y, k, DEFAULT_SPARSE_BUDGET).expect("sizes match");
                if got == L0Outcome::NotUnique {
                    strict += 1;
                }
                let ok = y == y2
                    && x != x2
                    && x.sparsity() <= k
                    && x2.sparsity() <= k
                    && got != L0Outcome::Unique(x.clone());
                if !ok {
                    bad.push(format!("{name}: witness {:?} -> {got:?}", witness.as_slice()));
                }
            }
            SparkOutcome::BudgetExceeded => bad.push(format!("{name}: budget exceeded")),
        }
    }
    outcome(
        bad.is_empty() && certified > 0 && refuted > 0,
        format!(
            "{certified} certified ({instances} planted signals), {refuted} refuted ({strict} with l0 not_unique), failures {bad:?}"
        ),
    )
}

fn random_vector(field: FieldSpec, n: usize, rng: &mut impl RngCore) -> Vector {
    let values: Vec<i64> = (0..n).map(|_| (rng.next_u64() % 7) as i64 - 3).collect();
    Vector::from_i64(field, &values)
}

fn involution_and_transform() -> Outcome {
    let mut rng = trial_rng(SEED, 13);
    let mut bad = Vec::new();
    for e in 0..=16 {
        let n = 1usize << e;
        let bits: Vec<bool> = (0..n).map(|_| rng.next_u64() & 1 == 1).collect();
        let x = Vector::Gf2(BitVec::from_bools(&bits));
        let once = sierpinski_transform(&x, Direction::Forward).expect("power of two");
        let twice = sierpinski_transform(&once, Direction::Forward).expect("power of two");
        if twice != x {
            bad.push(format!("involution n={n}"));
        }
    }
    let mut dense_checks = 0;
    for field in FIELDS {
        for e in 0..=10 {
            let n = 1usize << e;
            let g = sierpinski(n, field).expect("power of two");
            let x = random_vector(field, n, &mut rng);
            dense_checks += 1;
            let fast = sierpinski_transform(&x, Direction::Forward).expect("power of two");
            if fast != g.mul_vec(&x).expect("sizes match") {
                bad.push(format!("dense {field} n={n}"));
            }
            let back = sierpinski_transform(&fast, Direction::Inverse).expect("power of two");
            if back != x {
                bad.push(format!("inverse {field} n={n}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("involution n=2^0..2^16, {dense_checks} dense comparisons up to n=2^10, failures {bad:?}"),
    )
}

fn determinism() -> Outcome {
    let half = q("1/2");
    let mec = cor_matrix(256, &half, &SelectionSpec::TopM(128), FieldSpec::Gf2).expect("n=256");
    let mec_side = mec.sidecar();
    let mec_code = code_from_pcm(mec.matrix);
    let bsc = cor_matrix(16, &half, &SelectionSpec::TopM(8), FieldSpec::Gf2).expect("n=16");
    let bsc_side = bsc.sidecar();
    let bsc_code = code_from_pcm(bsc.matrix);
    let p_mec = q("0.45");
    let p_bsc = q("0.05");
    let run = |threads: Option<usize>| -> (String, String) {
        let a = simulate_mec(&mec_code, Some(&mec_side), "0.45", &p_mec, 2000, SEED, threads)
            .expect("valid")
            .to_json();
        let b = simulate_bsc(&bsc_code, Some(&bsc_side), "0.05", &p_bsc, 5000, SEED, threads, DEFAULT_CODEWORD_BUDGET)
            .expect("valid")
            .to_json();
        (a, b)
    };
    let reference = run(Some(1));
    let mut bad = Vec::new();
    for threads in [Some(2), Some(4), Some(7), None] {
        if run(threads) != reference {
            bad.push(format!("{threads:?}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("mec and bsc reports at 1, 2, 4, 7 and default threads; differing {bad:?}"),
    )
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

const CRITERIA: [Criterion; 14] = [
    (1, "oracle equality", 10, oracle_equality),
    (2, "martingale conservation", 30, martingale_conservation),
    (3, "n=4 profile", 1, small_profile),
    (4, "polarization trend", 60, polarization_trend),
    (5, "full rank of the COR matrix", 60, full_rank),
    (6, "girth transition", 120, girth_transition),
    (7, "erasure failure iff dependent columns", 600, erasure_identity),
    (8, "minimum distance equals girth", 600, distance_equals_girth),
    (9, "Vandermonde girth", 1, vandermonde_girth),
    (10, "BSC block-error bounds", 120, bsc_bounds),
    (11, "binomial tail within z(p)^w", 600, binomial_tails),
    (12, "sparse recovery", 60, sparse_recovery),
    (13, "involution and fast transform", 600, involution_and_transform),
    (14, "determinism across thread counts", 600, determinism),
];

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (id, name, limit, check) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(limit) {
            result.pass = false;
            result.detail.push_str(&format!("; exceeded the {limit} s limit"));
        }
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:2} {verdict} {name} [{:.2} s]: {}",
            elapsed.as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
