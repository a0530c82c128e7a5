//! Channel simulations packaged as stable-order JSON reports.

use num_rational::BigRational;
use serde::Serialize;

use crate::channels::{bhattacharyya_upper, ChannelKind};
use crate::codec::{bsc_error_rate, mec_error_rate, union_bound_bsc, weight_enumerator, LinearCode};
use crate::cor::CorSidecar;
use crate::error::{Error, Result};
use crate::fields::{format_rational, rational_to_f64, FieldSpec};
use crate::polarize::{bhatt_profile, bhatt_union_bound, RowSet, SelectionSpec};
use crate::sim::TrialReport;

/// Precision, in bits, of the rational upper bound on `z(p)` that seeds the
/// Bhattacharyya profile.
pub const BHATT_SEED_BITS: u32 = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeInfo {
    pub n: usize,
    pub k: usize,
    pub field: FieldSpec,
    pub selection: Option<SelectionSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub union: Option<f64>,
    pub bhatt: Option<f64>,
}

/// One simulation run. Field order is the serialized key order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub code: CodeInfo,
    pub channel: ChannelKind,
    /// `p` as given on input.
    pub p: String,
    /// `p` as a reduced fraction.
    pub p_exact: String,
    pub trials: u64,
    pub seed: u64,
    pub rng_id: &'static str,
    pub failures: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependence_events: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependence_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatches: Option<u64>,
}

impl SimulationReport {
    fn base(
        code: &LinearCode,
        sidecar: Option<&CorSidecar>,
        channel: ChannelKind,
        p_text: &str,
        p: &BigRational,
        report: &TrialReport,
    ) -> Self {
        SimulationReport {
            code: CodeInfo {
                n: code.n,
                k: code.k,
                field: code.field,
                selection: sidecar.map(|s| s.selection.clone()),
            },
            channel,
            p: p_text.to_string(),
            p_exact: format_rational(p),
            trials: report.trials,
            seed: report.seed,
            rng_id: report.rng_id,
            failures: report.events,
            p_hat: report.p_hat,
            ci_lo: report.ci_lo,
            ci_hi: report.ci_hi,
            bounds: None,
            dependence_events: None,
            dependence_rate: None,
            mismatches: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

/// Erasure-channel simulation with the decoder and rank indicators.
pub fn simulate_mec(
    code: &LinearCode,
    sidecar: Option<&CorSidecar>,
    p_text: &str,
    p: &BigRational,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    let r = mec_error_rate(code, p, trials, seed, threads)?;
    let mut out = SimulationReport::base(code, sidecar, ChannelKind::Mec, p_text, p, &r.report);
    out.dependence_events = Some(r.dependence_events);
    out.dependence_rate = Some(r.dependence_rate());
    out.mismatches = Some(r.mismatches);
    Ok(out)
}

/// `sum_{i not in H} Z_i` for the COR row set recorded in `sidecar`, seeded
/// with a rational upper bound on `z(p)`.
pub fn bhatt_bound_for(sidecar: &CorSidecar, p: &BigRational) -> Result<BigRational> {
    let rows = RowSet::new(
        sidecar.n,
        sidecar.h.iter().map(|&i| i.wrapping_sub(1)).collect(),
    )?;
    let z0 = bhattacharyya_upper(p, BHATT_SEED_BITS)?;
    bhatt_union_bound(&bhatt_profile(sidecar.n, &z0)?, &rows)
}

/// Both block-error bounds for ML decoding over `BSC(p)`.
pub fn bsc_bounds(
    code: &LinearCode,
    sidecar: Option<&CorSidecar>,
    p: &BigRational,
    budget: u128,
) -> Result<Bounds> {
    let we = weight_enumerator(code, budget)?;
    let bhatt = match sidecar {
        Some(s) if s.n == code.n => Some(rational_to_f64(&bhatt_bound_for(s, p)?)),
        _ => None,
    };
    Ok(Bounds {
        union: Some(union_bound_bsc(&we, rational_to_f64(p))),
        bhatt,
    })
}

/// ML-decoded BSC simulation with the union and Bhattacharyya bounds attached.
#[allow(clippy::too_many_arguments)]
pub fn simulate_bsc(
    code: &LinearCode,
    sidecar: Option<&CorSidecar>,
    p_text: &str,
    p: &BigRational,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
    budget: u128,
) -> Result<SimulationReport> {
    if code.field != FieldSpec::Gf2 {
        return Err(Error::FieldMismatch(format!(
            "the BSC needs a gf2 code, got {}",
            code.field
        )));
    }
    let book = code.codebook(budget)?;
    let r = bsc_error_rate(code, &book, p, trials, seed, threads)?;
    let mut out = SimulationReport::base(code, sidecar, ChannelKind::Bsc, p_text, p, &r);
    out.bounds = Some(bsc_bounds(code, sidecar, p, budget)?);
    Ok(out)
}
