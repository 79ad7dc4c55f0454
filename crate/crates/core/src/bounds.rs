//! Sum-capacity `(2 + λ)·log2 p`, the two genie-aided upper bounds, the
//! separate-coding baseline, and the [`RateReport`] that puts an achieved
//! rate next to all of them.
//!
//! Everything is computed exactly in symbols per channel use ("spcu") and
//! converted to bits per use only for display. Comparisons stay in spcu.
//!
//! The second genie bound, `2 + min{λ_A/2, λ_C, …, λ_G}`, is taken as a
//! stated formula; only the first one comes with a derivation.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::{StateDistribution, StateId, NUM_STATES};
use crate::codec::ReceiverVerdict;
use crate::gf::FieldSpec;
use crate::scheduler::{block_count, count_symbols, lambda_of, Schedule};

fn two() -> Rational64 {
    Rational64::from_integer(2)
}

fn bits(spcu: Rational64, spec: &FieldSpec) -> f64 {
    spcu.to_f64().unwrap_or(f64::NAN) * spec.rate_unit()
}

pub fn sum_capacity_spcu(dist: &StateDistribution) -> Rational64 {
    two() + lambda_of(dist)
}

/// `(2 + λ)·log2 p` bits per channel use.
pub fn sum_capacity(dist: &StateDistribution, spec: &FieldSpec) -> f64 {
    bits(sum_capacity_spcu(dist), spec)
}

pub fn genie_bound_b_spcu(dist: &StateDistribution) -> Rational64 {
    two() + dist.prob(StateId::B) / 2
}

/// `(2 + λ_B/2)·log2 p`.
pub fn genie_bound_b(dist: &StateDistribution, spec: &FieldSpec) -> f64 {
    bits(genie_bound_b_spcu(dist), spec)
}

pub fn genie_bound_rest_spcu(dist: &StateDistribution) -> Rational64 {
    let m = StateId::ALL[2..]
        .iter()
        .map(|&s| dist.prob(s))
        .fold(dist.prob(StateId::A) / 2, |m, x| m.min(x));
    two() + m
}

/// `(2 + min{λ_A/2, λ_C, λ_D, λ_E, λ_F, λ_G})·log2 p`.
pub fn genie_bound_rest(dist: &StateDistribution, spec: &FieldSpec) -> f64 {
    bits(genie_bound_rest_spcu(dist), spec)
}

pub fn combined_bound_spcu(dist: &StateDistribution) -> Rational64 {
    genie_bound_b_spcu(dist).min(genie_bound_rest_spcu(dist))
}

/// Minimum of the two genie bounds; equals [`sum_capacity`].
pub fn combined_bound(dist: &StateDistribution, spec: &FieldSpec) -> f64 {
    bits(combined_bound_spcu(dist), spec)
}

pub fn baseline_separate_spcu() -> Rational64 {
    two()
}

/// Coding each state on its own tops out at two symbols per use.
pub fn baseline_separate(spec: &FieldSpec) -> f64 {
    bits(baseline_separate_spcu(), spec)
}

/// λ of the trace's own state frequencies, `B_max / n` without flooring.
pub fn empirical_lambda(counts: &[usize; NUM_STATES]) -> Rational64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Rational64::zero();
    }
    let n = n as i64;
    (0..NUM_STATES)
        .map(|s| {
            let c = counts[s] as i64;
            if s < 2 {
                Rational64::new(c, 2 * n)
            } else {
                Rational64::new(c, n)
            }
        })
        .min()
        .expect("seven states")
}

/// An exact fraction as it appears in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frac {
    pub num: i64,
    pub den: i64,
}

impl From<Rational64> for Frac {
    fn from(r: Rational64) -> Self {
        Frac {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl From<Frac> for Rational64 {
    fn from(f: Frac) -> Self {
        Rational64::new(f.num, f.den)
    }
}

impl Frac {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub num: i64,
    pub den: i64,
    pub spcu: f64,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    pub lambda: Frac,
    pub spcu: Frac,
    pub bits: f64,
    /// Same formula evaluated on the trace's state frequencies.
    pub empirical_lambda: Frac,
    pub empirical_spcu: Frac,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedBound {
    pub name: String,
    pub spcu: Frac,
    pub bits: f64,
}

/// Everything measured and predicted for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub p: u32,
    pub n: usize,
    pub state_counts: [usize; NUM_STATES],
    pub blocks: usize,
    pub fallback_uses: usize,
    /// `19·blocks + 2·fallback_uses`.
    pub symbols: usize,
    pub decoded_symbols: usize,
    pub rate: Rate,
    pub capacity: Capacity,
    pub bounds: Vec<NamedBound>,
    pub baseline: NamedBound,
    pub verdicts: Vec<ReceiverVerdict>,
    pub success: bool,
}

impl RateReport {
    pub fn assemble(
        dist: &StateDistribution,
        spec: &FieldSpec,
        state_counts: [usize; NUM_STATES],
        schedule: &Schedule,
        verdicts: Vec<ReceiverVerdict>,
    ) -> RateReport {
        let n: usize = state_counts.iter().sum();
        let symbols = count_symbols(schedule);
        let decoded_symbols = verdicts.iter().map(|v| v.decoded).sum();
        let achieved = if n == 0 {
            Rational64::zero()
        } else {
            Rational64::new(symbols as i64, n as i64)
        };
        let lambda = lambda_of(dist);
        let emp = empirical_lambda(&state_counts);
        let named = |name: &str, spcu: Rational64| NamedBound {
            name: name.to_string(),
            spcu: spcu.into(),
            bits: bits(spcu, spec),
        };
        let success = verdicts.iter().all(|v| v.success) && decoded_symbols == symbols;
        RateReport {
            p: spec.p(),
            n,
            state_counts,
            blocks: schedule.blocks.len(),
            fallback_uses: schedule.fallback.len(),
            symbols,
            decoded_symbols,
            rate: Rate {
                num: *achieved.numer(),
                den: *achieved.denom(),
                spcu: achieved.to_f64().unwrap_or(0.0),
                bits: bits(achieved, spec),
            },
            capacity: Capacity {
                lambda: lambda.into(),
                spcu: (two() + lambda).into(),
                bits: bits(two() + lambda, spec),
                empirical_lambda: emp.into(),
                empirical_spcu: (two() + emp).into(),
            },
            bounds: vec![
                named("genie_b", genie_bound_b_spcu(dist)),
                named("genie_rest", genie_bound_rest_spcu(dist)),
                named("combined", combined_bound_spcu(dist)),
            ],
            baseline: named("separate", baseline_separate_spcu()),
            verdicts,
            success,
        }
    }

    pub fn achieved_spcu(&self) -> Rational64 {
        Rational64::new(self.rate.num, self.rate.den)
    }

    pub fn capacity_spcu(&self) -> Rational64 {
        self.capacity.spcu.into()
    }

    /// Every consistency check that must hold for a healthy run; empty when
    /// all pass.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.success {
            out.push("decode failure".to_string());
        }
        if self.decoded_symbols != self.symbols {
            out.push(format!(
                "decoded {} of {} symbols",
                self.decoded_symbols, self.symbols
            ));
        }
        if block_count(&self.state_counts) != self.blocks {
            out.push("block count disagrees with state counts".to_string());
        }
        let emp: Rational64 = self.capacity.empirical_spcu.into();
        if self.n > 0 && self.achieved_spcu() > emp {
            out.push(format!(
                "achieved {} exceeds empirical capacity {}",
                self.achieved_spcu(),
                emp
            ));
        }
        let cap = self.capacity_spcu();
        for b in &self.bounds {
            let v: Rational64 = b.spcu.into();
            if cap > v {
                out.push(format!("capacity {cap} exceeds bound {} = {v}", b.name));
            }
            if b.name == "combined" && v != cap {
                out.push(format!("combined bound {v} differs from capacity {cap}"));
            }
        }
        out
    }
}
