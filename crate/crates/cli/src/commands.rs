//! Command implementations.

use std::fmt::Write as _;
use std::path::Path;

use num_rational::BigRational;
use polargirth::codec::code_from_pcm;
use polargirth::cor::{cor_matrix, girth_scan, oracle_differences, CorSidecar, ORACLE_LIMIT};
use polargirth::fields::text::{parse_matrix, write_matrix};
use polargirth::fields::{check_unit, format_rational, parse_rational, FieldSpec, Matrix, Vector};
use polargirth::polarize::{
    log2_exact, profile_csv_exact, profile_csv_float, CorProfile, FloatProfile, SelectionSpec,
    EXACT_PROFILE_LIMIT,
};
use polargirth::report::{bsc_bounds, simulate_bsc, simulate_mec};
use polargirth::sparse::{
    l0_recover, measure, spark_certificate, support_failure_rate, L0Outcome, SparkOutcome,
    SparseReport, SparseSignal, SupportModel,
};
use serde::Serialize;

use crate::output::{emit, read_text, sidecar_path, write_atomic, CliError, CliResult};
use crate::{AnalyzeCommand, Cli, Command, ConstructArgs, ProfileArgs, SimArgs, SimulateCommand};

pub fn run(cli: Cli) -> CliResult<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(CliError::usage("--threads must be at least 1"));
    }
    match cli.command {
        Command::Profile(a) => profile(a),
        Command::Construct(a) => construct(a),
        Command::Simulate(SimulateCommand::Mec(a)) => simulate_mec_cmd(a, threads),
        Command::Simulate(SimulateCommand::Bsc { sim, max_k }) => {
            simulate_bsc_cmd(sim, max_k, threads)
        }
        Command::Analyze(a) => analyze(a, threads),
    }
}

fn probability(text: &str) -> CliResult<BigRational> {
    let p = parse_rational(text)?;
    check_unit(&p)?;
    Ok(p)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn load_matrix(path: &Path) -> CliResult<Matrix> {
    parse_matrix(&read_text(path)?)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_sidecar(pcm: &Path) -> CliResult<Option<CorSidecar>> {
    let path = sidecar_path(pcm);
    if !path.exists() {
        return Ok(None);
    }
    serde_json::from_str(&read_text(&path)?)
        .map(Some)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn profile(a: ProfileArgs) -> CliResult<()> {
    log2_exact(a.n)?;
    let s = probability(&a.s)?;
    let csv = if a.float {
        if a.n <= EXACT_PROFILE_LIMIT {
            return Err(CliError::usage(format!(
                "exact mode is required for n <= {EXACT_PROFILE_LIMIT}"
            )));
        }
        profile_csv_float(&FloatProfile::compute(a.n, &s)?)
    } else if a.exact || a.n <= EXACT_PROFILE_LIMIT {
        profile_csv_exact(&CorProfile::exact(a.n, &s)?)
    } else {
        profile_csv_float(&FloatProfile::compute(a.n, &s)?)
    };
    emit(a.out.as_deref(), &csv)
}

fn construct(a: ConstructArgs) -> CliResult<()> {
    let s = probability(&a.s)?;
    let selection: SelectionSpec = a.select.parse()?;
    let field: FieldSpec = a.field.parse()?;
    let cor = cor_matrix(a.n, &s, &selection, field)?;
    write_atomic(&sidecar_path(&a.out), &to_json(&cor.sidecar()))?;
    write_atomic(&a.out, &write_matrix(&cor.matrix))?;
    emit(
        None,
        &format!(
            "m={} n={} m/n={:.6} rank={}\n",
            cor.m(),
            cor.n,
            cor.m() as f64 / cor.n as f64,
            cor.matrix.rank()
        ),
    )
}

fn simulate_mec_cmd(a: SimArgs, threads: Option<usize>) -> CliResult<()> {
    let pcm = load_matrix(&a.pcm)?;
    let sidecar = load_sidecar(&a.pcm)?;
    let p = probability(&a.p)?;
    let code = code_from_pcm(pcm);
    let report = simulate_mec(&code, sidecar.as_ref(), &a.p, &p, a.trials, a.seed, threads)?;
    emit(a.out.as_deref(), &report.to_json())
}

fn check_max_k(k: usize, max_k: u32) -> CliResult<u128> {
    if max_k > 40 {
        return Err(CliError::usage("--max-k is capped at 40"));
    }
    if k > max_k as usize {
        return Err(CliError::budget(format!(
            "ML decoding enumerates 2^k codewords; the code has k = {k}, above the limit k <= {max_k} (see --max-k)"
        )));
    }
    Ok(1u128 << max_k)
}

fn simulate_bsc_cmd(a: SimArgs, max_k: u32, threads: Option<usize>) -> CliResult<()> {
    let pcm = load_matrix(&a.pcm)?;
    let sidecar = load_sidecar(&a.pcm)?;
    let p = probability(&a.p)?;
    let code = code_from_pcm(pcm);
    let budget = check_max_k(code.k, max_k)?;
    let report = simulate_bsc(
        &code,
        sidecar.as_ref(),
        &a.p,
        &p,
        a.trials,
        a.seed,
        threads,
        budget,
    )?;
    emit(a.out.as_deref(), &report.to_json())
}

fn analyze(cmd: AnalyzeCommand, threads: Option<usize>) -> CliResult<()> {
    match cmd {
        AnalyzeCommand::GirthScan {
            matrix,
            grid,
            trials,
            seed,
            out,
        } => {
            let a = load_matrix(&matrix)?;
            let grid = grid
                .iter()
                .map(|g| probability(g))
                .collect::<CliResult<Vec<_>>>()?;
            let est = girth_scan(&a, &grid, trials, seed, threads)?;
            emit(out.as_deref(), &est.to_csv())
        }
        AnalyzeCommand::OracleCheck { nmax, s, fields } => oracle_check(nmax, &s, &fields),
        AnalyzeCommand::Spark {
            matrix,
            k,
            budget,
            model,
            trials,
            seed,
            out,
        } => spark(&matrix, k, budget, model, trials, seed, out.as_deref(), threads),
        AnalyzeCommand::Bound {
            pcm,
            p,
            max_k,
            out,
        } => bound(&pcm, &p, max_k, out.as_deref()),
        AnalyzeCommand::L0 {
            matrix,
            y,
            signal,
            kmax,
            budget,
            out,
        } => l0(&matrix, &y, &signal, kmax, budget, out.as_deref()),
    }
}

fn oracle_check(nmax: usize, s_list: &[String], field_list: &[String]) -> CliResult<()> {
    if nmax > ORACLE_LIMIT {
        return Err(CliError::usage(format!(
            "--nmax {nmax} exceeds the oracle limit {ORACLE_LIMIT}"
        )));
    }
    let svals = s_list
        .iter()
        .map(|s| probability(s))
        .collect::<CliResult<Vec<_>>>()?;
    let fields = field_list
        .iter()
        .map(|f| f.parse::<FieldSpec>().map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = String::from("n\ts\tfield\tresult\n");
    let mut first_mismatch = None;
    let mut n = 2;
    while n <= nmax {
        for s in &svals {
            let profile = CorProfile::exact(n, s)?.values();
            for &field in &fields {
                let oracle = oracle_differences(n, s, field)?;
                let diff = (0..n).find(|&i| oracle[i] != profile[i]);
                let status = if diff.is_none() { "ok" } else { "MISMATCH" };
                let _ = writeln!(table, "{n}\t{}\t{field}\t{status}", format_rational(s));
                if let (Some(i), None) = (diff, &first_mismatch) {
                    first_mismatch = Some(format!(
                        "n={n} s={} field={field}: leaf {} profile {} vs oracle {}",
                        format_rational(s),
                        i + 1,
                        format_rational(&profile[i]),
                        format_rational(&oracle[i])
                    ));
                }
            }
        }
        n *= 2;
    }
    print!("{table}");
    match first_mismatch {
        None => Ok(()),
        Some(m) => Err(CliError::analysis(format!("first differing leaf: {m}"))),
    }
}

#[derive(Serialize)]
struct SparkJson {
    n: usize,
    k: usize,
    field: FieldSpec,
    certificate: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<usize>>,
}

#[allow(clippy::too_many_arguments)]
fn spark(
    matrix: &Path,
    k: usize,
    budget: u128,
    model: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<&Path>,
    threads: Option<usize>,
) -> CliResult<()> {
    let a = load_matrix(matrix)?;
    let outcome = spark_certificate(&a, k, budget);
    if outcome == SparkOutcome::BudgetExceeded {
        return Err(CliError::budget(format!(
            "more than {budget} column subsets needed to certify k = {k} (see --budget)"
        )));
    }
    let json = match (model, trials, seed) {
        (Some(model), Some(trials), Some(seed)) => {
            let model: SupportModel = model.parse()?;
            let r = support_failure_rate(&a, &model, trials, seed, threads, budget)?;
            to_json(&SparseReport::new(&a, k, model, &r, &outcome))
        }
        _ => to_json(&SparkJson {
            n: a.ncols(),
            k,
            field: a.field(),
            certificate: outcome.label(),
            witness: match &outcome {
                SparkOutcome::Refuted(w) => Some(w.one_based()),
                _ => None,
            },
        }),
    };
    emit(out, &json)?;
    match outcome {
        SparkOutcome::Refuted(w) => Err(CliError::analysis(format!(
            "columns {:?} are dependent: girth <= {} <= 2k",
            w.one_based(),
            w.len()
        ))),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct BoundJson {
    n: usize,
    k: usize,
    p: String,
    p_exact: String,
    z: f64,
    union: Option<f64>,
    bhatt: Option<f64>,
}

fn bound(pcm: &Path, p_text: &str, max_k: u32, out: Option<&Path>) -> CliResult<()> {
    let m = load_matrix(pcm)?;
    let sidecar = load_sidecar(pcm)?;
    let p = probability(p_text)?;
    let code = code_from_pcm(m);
    let budget = check_max_k(code.k, max_k)?;
    let b = bsc_bounds(&code, sidecar.as_ref(), &p, budget)?;
    let json = BoundJson {
        n: code.n,
        k: code.k,
        p: p_text.to_string(),
        p_exact: format_rational(&p),
        z: polargirth::channels::bhattacharyya_of(&p),
        union: b.union,
        bhatt: b.bhatt,
    };
    emit(out, &to_json(&json))
}

#[derive(Serialize)]
struct L0Json {
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    support: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<Vec<String>>,
}

fn parse_vector(field: FieldSpec, items: &[String]) -> CliResult<Vector> {
    let q = items
        .iter()
        .map(|t| parse_rational(t.trim()))
        .collect::<polargirth::Result<Vec<_>>>()?;
    Ok(Vector::from_rationals(field, &q)?)
}

fn l0(
    matrix: &Path,
    y: &[String],
    signal: &[String],
    kmax: usize,
    budget: u128,
    out: Option<&Path>,
) -> CliResult<()> {
    let a = load_matrix(matrix)?;
    let y = if signal.is_empty() {
        parse_vector(a.field(), y)?
    } else {
        let x = SparseSignal::from_dense(&parse_vector(FieldSpec::Rational, signal)?);
        measure(&a, &x)?
    };
    let json = match l0_recover(&a, &y, kmax, budget)? {
        L0Outcome::Unique(x) => L0Json {
            outcome: "unique",
            support: Some(x.support().one_based()),
            x: Some(x.to_dense().iter().map(format_rational).collect()),
        },
        L0Outcome::NotUnique => L0Json {
            outcome: "not_unique",
            support: None,
            x: None,
        },
        L0Outcome::NoneFound => L0Json {
            outcome: "none_found",
            support: None,
            x: None,
        },
        L0Outcome::BudgetExceeded => {
            return Err(CliError::budget(format!(
                "more than {budget} supports needed up to kmax = {kmax} (see --budget)"
            )))
        }
    };
    emit(out, &to_json(&json))
}
