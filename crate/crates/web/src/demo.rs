//! Target-independent logic behind the wasm exports.

use num_rational::Rational64;
use serde::Serialize;
use tim_core::bounds::{genie_bound_b_spcu, genie_bound_rest_spcu, sum_capacity_spcu, RateReport};
use tim_core::channel::{StateDistribution, StateId, NUM_STATES};
use tim_core::codec::{
    cyclic_jess_run, jess_links, run_end_to_end, CoeffMode, JessReport, Seeds, TraceMode,
};
use tim_core::gf::FieldSpec;
use tim_core::scheduler::lambda_of;

/// Largest run the page will attempt.
pub const MAX_USES: usize = 200_000;
pub const MAX_STEPS: usize = 1001;

fn dist(weights: &[u32]) -> Result<StateDistribution, String> {
    let w: [u32; NUM_STATES] = weights
        .try_into()
        .map_err(|_| format!("need {NUM_STATES} weights, got {}", weights.len()))?;
    StateDistribution::from_weights(w).map_err(|e| e.to_string())
}

fn field(p: u32) -> Result<FieldSpec, String> {
    FieldSpec::new(p).map_err(|e| e.to_string())
}

fn f(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub lambda: f64,
    pub capacity: f64,
    pub genie_b: f64,
    pub genie_rest: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub p: u32,
    pub vary: char,
    /// bits per symbol, to convert the spcu values below
    pub log2_p: f64,
    pub points: Vec<CurvePoint>,
}

pub fn bounds_curve(weights: &[u32], vary: usize, steps: usize, p: u32) -> Result<Curve, String> {
    let base = dist(weights)?;
    let spec = field(p)?;
    let state = *StateId::ALL
        .get(vary)
        .ok_or_else(|| format!("state index {vary} out of range"))?;
    if !(2..=MAX_STEPS).contains(&steps) {
        return Err(format!("steps must be in 2..={MAX_STEPS}"));
    }
    let last = steps as i64 - 1;
    let points = (0..=last)
        .map(|k| {
            let x = Rational64::new(k, last);
            let d = base.reweighted(state, x).map_err(|e| e.to_string())?;
            Ok(CurvePoint {
                x: f(x),
                lambda: f(lambda_of(&d)),
                capacity: f(sum_capacity_spcu(&d)),
                genie_b: f(genie_bound_b_spcu(&d)),
                genie_rest: f(genie_bound_rest_spcu(&d)),
            })
        })
        .collect::<Result<_, String>>()?;
    Ok(Curve {
        p,
        vary: state.tag(),
        log2_p: spec.rate_unit(),
        points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutput {
    pub probs: [f64; NUM_STATES],
    pub seeds: Seeds,
    pub report: RateReport,
    pub violations: Vec<String>,
}

pub fn simulate(
    weights: &[u32],
    n: usize,
    p: u32,
    seed: u32,
    proportional: bool,
) -> Result<SimOutput, String> {
    let d = dist(weights)?;
    let spec = field(p)?;
    if n > MAX_USES {
        return Err(format!("n is capped at {MAX_USES} in the browser"));
    }
    let s = u64::from(seed);
    let seeds = Seeds {
        trace: s,
        channel: s + 1,
        message: s + 2,
    };
    let mode = if proportional {
        TraceMode::Proportional
    } else {
        TraceMode::MonteCarlo
    };
    let report = run_end_to_end(&d, n, &spec, seeds, mode).map_err(|e| e.to_string())?;
    Ok(SimOutput {
        probs: d.probs_f64(),
        seeds,
        violations: report.violations(),
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct JessOutput {
    /// Link set of each use, e.g. `{1→1, 2→1, 2→2, 3→3}`.
    pub links: Vec<String>,
    pub report: JessReport,
}

pub fn jess(p: u32, seed: u32, with_resolving_state: bool) -> Result<JessOutput, String> {
    let spec = field(p)?;
    let report = cyclic_jess_run(
        &spec,
        u64::from(seed),
        CoeffMode::Random,
        with_resolving_state,
    )
    .map_err(|e| e.to_string())?;
    let links = jess_links()
        .iter()
        .take(report.uses)
        .map(|l| l.to_string())
        .collect();
    Ok(JessOutput { links, report })
}
