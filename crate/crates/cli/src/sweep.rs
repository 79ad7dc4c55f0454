//! Grid sweeps over one state probability, run on a bounded thread pool.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tim_core::bounds::RateReport;
use tim_core::channel::StateDistribution;
use tim_core::codec::{CodecError, Seeds};

use crate::config::{format_ratio, renormalize, ConfigError, ExperimentConfig, SweepSpec};
use crate::report::simulate;

/// Env var capping worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "SIM_THREADS";

const SEED_STRIDE: u64 = 0x9e37_79b9_7f4a_7c15;

/// Seeds for grid point `k`; point 0 keeps the configured seeds.
pub fn point_seeds(base: Seeds, k: usize) -> Seeds {
    let off = SEED_STRIDE.wrapping_mul(k as u64);
    Seeds {
        trace: base.trace.wrapping_add(off),
        channel: base.channel.wrapping_add(off.rotate_left(21)),
        message: base.message.wrapping_add(off.rotate_left(42)),
    }
}

pub fn thread_count() -> Result<usize, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            ConfigError::Invalid(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub value: String,
    pub dist: Vec<String>,
    pub seeds: Seeds,
    #[serde(flatten)]
    pub report: RateReport,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
    pub wall_clock_ms: f64,
}

impl SweepRecord {
    pub fn ok(&self) -> bool {
        self.points.iter().all(|p| p.violations.is_empty())
    }
}

/// Extra per-row checks on top of the report's own.
fn row_violations(r: &RateReport) -> Vec<String> {
    let mut v = r.violations();
    let cap = r.capacity_spcu();
    for b in &r.bounds {
        if cap > Rational64::from(b.spcu) {
            v.push(format!("capacity {cap} above {} bound", b.name));
        }
    }
    v
}

/// Runs every grid point; results come back in grid order whatever the
/// thread count.
pub fn run_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<SweepPoint>, SweepError> {
    let spec: &SweepSpec = cfg.sweep.as_ref().expect("sweep config");
    let grid: Vec<(usize, Rational64, StateDistribution)> = spec
        .grid()
        .into_iter()
        .enumerate()
        .map(|(k, x)| Ok((k, x, renormalize(&cfg.dist, spec.vary, x)?)))
        .collect::<Result<_, ConfigError>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?;
    let points = pool.install(|| {
        grid.par_iter()
            .map(|(k, x, dist)| {
                let point_cfg = ExperimentConfig {
                    dist: dist.clone(),
                    seeds: point_seeds(cfg.seeds, *k),
                    sweep: None,
                    ..cfg.clone()
                };
                let report = simulate(&point_cfg)?;
                Ok(SweepPoint {
                    index: *k,
                    value: format_ratio(*x),
                    dist: dist.probs().iter().map(|&p| format_ratio(p)).collect(),
                    seeds: point_cfg.seeds,
                    violations: row_violations(&report),
                    report,
                })
            })
            .collect::<Result<Vec<_>, CodecError>>()
    })?;
    Ok(points)
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// One CSV line per grid point.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub point: usize,
    pub vary: char,
    pub value: String,
    pub value_f: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub p_c: f64,
    pub p_d: f64,
    pub p_e: f64,
    pub p_f: f64,
    pub p_g: f64,
    pub lambda: String,
    pub capacity_spcu: f64,
    pub capacity_bits: f64,
    pub genie_b_spcu: f64,
    pub genie_rest_spcu: f64,
    pub combined_spcu: f64,
    pub empirical_capacity_spcu: f64,
    pub achieved_spcu: f64,
    pub achieved_bits: f64,
    pub success: bool,
}

impl CsvRow {
    pub fn from_point(vary: char, pt: &SweepPoint) -> CsvRow {
        let r = &pt.report;
        let probs: Vec<f64> = pt
            .dist
            .iter()
            .map(|s| {
                crate::config::parse_ratio(s)
                    .ok()
                    .and_then(|q| q.to_f64())
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let bound = |name: &str| {
            r.bounds
                .iter()
                .find(|b| b.name == name)
                .map_or(f64::NAN, |b| b.spcu.to_f64())
        };
        CsvRow {
            point: pt.index,
            vary,
            value: pt.value.clone(),
            value_f: crate::config::parse_ratio(&pt.value)
                .ok()
                .and_then(|q| q.to_f64())
                .unwrap_or(f64::NAN),
            p_a: probs[0],
            p_b: probs[1],
            p_c: probs[2],
            p_d: probs[3],
            p_e: probs[4],
            p_f: probs[5],
            p_g: probs[6],
            lambda: format_ratio(r.capacity.lambda.into()),
            capacity_spcu: r.capacity.spcu.to_f64(),
            capacity_bits: r.capacity.bits,
            genie_b_spcu: bound("genie_b"),
            genie_rest_spcu: bound("genie_rest"),
            combined_spcu: bound("combined"),
            empirical_capacity_spcu: r.capacity.empirical_spcu.to_f64(),
            achieved_spcu: r.rate.spcu,
            achieved_bits: r.rate.bits,
            success: pt.violations.is_empty(),
        }
    }
}

pub fn write_csv<W: std::io::Write>(
    out: W,
    vary: char,
    points: &[SweepPoint],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for pt in points {
        w.serialize(CsvRow::from_point(vary, pt))?;
    }
    w.flush()?;
    Ok(())
}
