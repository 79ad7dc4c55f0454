//! Report records written by the CLI, plus the runs that fill them.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use tim_core::bounds::{
    baseline_separate_spcu, combined_bound_spcu, genie_bound_b_spcu, genie_bound_rest_spcu,
    sum_capacity_spcu, Frac, NamedBound, RateReport,
};
use tim_core::channel::StateDistribution;
use tim_core::codec::{cyclic_jess_run, run_with_messages, CodecError, CoeffMode, JessReport};
use tim_core::gf::FieldSpec;
use tim_core::scheduler::lambda_of;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// One simulated link run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    #[serde(flatten)]
    pub report: RateReport,
    /// Failed consistency checks; empty on a healthy run.
    pub violations: Vec<String>,
    pub wall_clock_ms: f64,
}

impl ReportRecord {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs the full pipeline for a monte-carlo or proportional config.
pub fn simulate(cfg: &ExperimentConfig) -> Result<RateReport, CodecError> {
    let mode = cfg
        .mode
        .trace_mode()
        .expect("simulate called with a link-level mode");
    let trace = mode.trace(&cfg.dist, cfg.n, cfg.seeds.trace);
    run_with_messages(&cfg.dist, &trace, &cfg.field(), cfg.seeds, cfg.messages)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JessConfig {
    pub p: u32,
    pub seed: u64,
}

/// The cyclic demo run with and without its resolving use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JessRecord {
    pub schema_version: u32,
    pub config: JessConfig,
    pub with_resolving_state: JessReport,
    pub without_resolving_state: JessReport,
    pub violations: Vec<String>,
    pub wall_clock_ms: f64,
}

pub fn jess_pair(
    spec: &FieldSpec,
    seed: u64,
) -> Result<(JessReport, JessReport, Vec<String>), CodecError> {
    let with = cyclic_jess_run(spec, seed, CoeffMode::Random, true)?;
    let without = cyclic_jess_run(spec, seed, CoeffMode::Random, false)?;
    let mut v = Vec::new();
    if !with.success || with.unresolved != 0 {
        v.push(format!(
            "decoded {} of {} symbols with the resolving use",
            with.decoded, with.fresh_symbols
        ));
    }
    if without.unresolved != 3 {
        v.push(format!(
            "expected 3 unresolved symbols without the resolving use, got {}",
            without.unresolved
        ));
    }
    Ok((with, without, v))
}

/// Capacity and outer bounds for a distribution, without simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRecord {
    pub schema_version: u32,
    pub p: u32,
    pub dist: Vec<String>,
    pub lambda: Frac,
    pub capacity: NamedBound,
    pub bounds: Vec<NamedBound>,
    pub baseline: NamedBound,
}

pub fn bounds_record(dist: &StateDistribution, spec: &FieldSpec) -> BoundsRecord {
    let named = |name: &str, spcu: Rational64| NamedBound {
        name: name.to_string(),
        spcu: spcu.into(),
        bits: spcu.to_f64().unwrap_or(f64::NAN) * spec.rate_unit(),
    };
    BoundsRecord {
        schema_version: SCHEMA_VERSION,
        p: spec.p(),
        dist: dist
            .probs()
            .iter()
            .map(|&p| crate::config::format_ratio(p))
            .collect(),
        lambda: lambda_of(dist).into(),
        capacity: named("capacity", sum_capacity_spcu(dist)),
        bounds: vec![
            named("genie_b", genie_bound_b_spcu(dist)),
            named("genie_rest", genie_bound_rest_spcu(dist)),
            named("combined", combined_bound_spcu(dist)),
        ],
        baseline: named("separate", baseline_separate_spcu()),
    }
}

impl BoundsRecord {
    pub fn to_text(&self) -> String {
        let row = |b: &NamedBound| {
            let r = Rational64::from(b.spcu);
            format!(
                "{:<12}{:>12} spcu  {:>10.6} bits/use\n",
                b.name,
                crate::config::format_ratio(r),
                b.bits
            )
        };
        let mut s = format!(
            "p = {}, dist = {}\nlambda = {}\n",
            self.p,
            self.dist.join(","),
            crate::config::format_ratio(self.lambda.into())
        );
        s += &row(&self.capacity);
        for b in &self.bounds {
            s += &row(b);
        }
        s += &row(&self.baseline);
        s
    }
}
