//! Trace → schedule → encode → channel → decode → verify.

use serde::{Deserialize, Serialize};

use crate::bounds::RateReport;
use crate::channel::{
    make_proportional_trace, proportional_counts, sample_channel, sample_trace, ChannelRealization,
    StateDistribution, StateTrace, NUM_USERS,
};
use crate::gf::FieldSpec;
use crate::scheduler::{build_schedule, Schedule, USES_PER_BLOCK};

use super::{
    fallback_decode, fallback_encode, s1_decode, s1_encode, transmit, CodecError, DecodeResult,
    MessageMode, MessageSource, UseAssignment,
};

/// Independent seeds for the three random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seeds {
    pub trace: u64,
    pub channel: u64,
    pub message: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            trace: 1,
            channel: 2,
            message: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMode {
    /// i.i.d. draws from the distribution.
    MonteCarlo,
    /// Exact per-state counts `n·λ_s` (largest remainder when fractional).
    Proportional,
}

impl TraceMode {
    pub fn trace(self, dist: &StateDistribution, n: usize, seed: u64) -> StateTrace {
        match self {
            TraceMode::MonteCarlo => sample_trace(dist, n, seed),
            TraceMode::Proportional => make_proportional_trace(&proportional_counts(dist, n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverVerdict {
    /// 1-based receiver number.
    pub receiver: usize,
    /// Fresh symbols its transmitter sent.
    pub expected: usize,
    /// Own symbols recovered with the right value.
    pub decoded: usize,
    /// Interfering symbols resolved, and how many of those were wrong.
    pub foreign_resolved: usize,
    pub foreign_mismatches: usize,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct LinkOutcome {
    pub schedule: Schedule,
    pub results: [DecodeResult; NUM_USERS],
    pub verdicts: [ReceiverVerdict; NUM_USERS],
}

impl LinkOutcome {
    pub fn decoded_symbols(&self) -> usize {
        self.verdicts.iter().map(|v| v.decoded).sum()
    }

    pub fn success(&self) -> bool {
        self.verdicts.iter().all(|v| v.success)
    }
}

/// Schedules, encodes, transmits and decodes one trace. `src` must hold at
/// least [`Schedule::symbols_per_tx`] symbols per transmitter.
pub fn run_trace(
    spec: &FieldSpec,
    trace: &StateTrace,
    channel: &ChannelRealization,
    src: &mut MessageSource,
) -> Result<LinkOutcome, CodecError> {
    let schedule = build_schedule(trace);
    let blocks = schedule
        .blocks
        .iter()
        .map(|b| s1_encode(b, src))
        .collect::<Result<Vec<_>, _>>()?;
    let mut uses: Vec<UseAssignment> = Vec::with_capacity(trace.len());
    for a in &blocks {
        uses.extend(a.uses());
    }
    for f in &schedule.fallback {
        uses.push(fallback_encode(f, src)?);
    }
    let obs = transmit(spec, &uses, &channel.coeffs, src)?;

    let nb = blocks.len() * USES_PER_BLOCK;
    let mut results: [DecodeResult; NUM_USERS] = Default::default();
    for rx in 0..NUM_USERS {
        let res = &mut results[rx];
        for (k, a) in blocks.iter().enumerate() {
            let window = &obs[rx][k * USES_PER_BLOCK..(k + 1) * USES_PER_BLOCK];
            for (id, v) in s1_decode(spec, rx, a, window)? {
                res.record(rx, id, v);
            }
        }
        for (u, o) in uses[nb..].iter().zip(&obs[rx][nb..]) {
            if let Some((id, v)) = fallback_decode(spec, rx, u, o) {
                res.record(rx, id, v);
            }
        }
    }

    let sent = src.consumed();
    let verdicts = std::array::from_fn(|rx| {
        let res = &results[rx];
        let decoded = res
            .own
            .iter()
            .filter(|(id, v)| src.value(**id) == Some(**v))
            .count();
        let foreign_mismatches = res
            .foreign
            .iter()
            .filter(|(id, v)| src.value(**id) != Some(**v))
            .count();
        ReceiverVerdict {
            receiver: rx + 1,
            expected: sent[rx],
            decoded,
            foreign_resolved: res.foreign.len(),
            foreign_mismatches,
            success: decoded == sent[rx] && res.own.len() == sent[rx] && foreign_mismatches == 0,
        }
    });
    Ok(LinkOutcome {
        schedule,
        results,
        verdicts,
    })
}

/// Full pipeline over a sampled or proportional trace of length `n`.
pub fn run_end_to_end(
    dist: &StateDistribution,
    n: usize,
    spec: &FieldSpec,
    seeds: Seeds,
    mode: TraceMode,
) -> Result<RateReport, CodecError> {
    let trace = mode.trace(dist, n, seeds.trace);
    run_end_to_end_on(dist, &trace, spec, seeds)
}

/// Same as [`run_end_to_end`] for a caller-supplied trace.
pub fn run_end_to_end_on(
    dist: &StateDistribution,
    trace: &StateTrace,
    spec: &FieldSpec,
    seeds: Seeds,
) -> Result<RateReport, CodecError> {
    run_with_messages(dist, trace, spec, seeds, MessageMode::Random)
}

/// Same as [`run_end_to_end_on`] with a choice of message generator.
pub fn run_with_messages(
    dist: &StateDistribution,
    trace: &StateTrace,
    spec: &FieldSpec,
    seeds: Seeds,
    messages: MessageMode,
) -> Result<RateReport, CodecError> {
    let channel = sample_channel(trace, spec, seeds.channel);
    let need = build_schedule(trace).symbols_per_tx();
    let mut src = MessageSource::with_mode(spec, need, messages, seeds.message);
    let out = run_trace(spec, trace, &channel, &mut src)?;
    Ok(RateReport::assemble(
        dist,
        spec,
        trace.counts(),
        &out.schedule,
        out.verdicts.to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::StateId;
    use num_rational::Rational64;

    fn f(p: u32) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn fourteen_uses_carry_29_symbols() {
        let trace = make_proportional_trace(&[2; 7]);
        let r = run_end_to_end_on(
            &StateDistribution::uniform(),
            &trace,
            &f(5),
            Seeds::default(),
        )
        .unwrap();
        assert_eq!(r.symbols, 29);
        assert_eq!(r.decoded_symbols, 29);
        assert_eq!((r.rate.num, r.rate.den), (29, 14));
        assert!(r.success);
        assert!(r.violations().is_empty(), "{:?}", r.violations());
    }

    #[test]
    fn balanced_proportional_hits_19_over_9() {
        for k in [1usize, 3, 10] {
            let r = run_end_to_end(
                &StateDistribution::balanced(),
                9 * k,
                &f(5),
                Seeds::default(),
                TraceMode::Proportional,
            )
            .unwrap();
            assert_eq!(r.achieved_spcu(), Rational64::new(19, 9));
            assert_eq!(r.blocks, k);
            assert!(r.success);
        }
    }

    #[test]
    fn missing_state_means_rate_two() {
        let d = StateDistribution::from_weights([2, 2, 1, 1, 1, 1, 0]).unwrap();
        for mode in [TraceMode::MonteCarlo, TraceMode::Proportional] {
            let r = run_end_to_end(&d, 400, &f(7), Seeds::default(), mode).unwrap();
            assert_eq!(r.blocks, 0);
            assert_eq!(r.achieved_spcu(), Rational64::from_integer(2));
            assert!(r.success);
        }
    }

    #[test]
    fn empty_trace() {
        let r = run_end_to_end(
            &StateDistribution::uniform(),
            0,
            &f(3),
            Seeds::default(),
            TraceMode::MonteCarlo,
        )
        .unwrap();
        assert_eq!(r.symbols, 0);
        assert_eq!((r.rate.num, r.rate.den), (0, 1));
        assert!(r.success);
    }

    #[test]
    fn point_mass_on_a() {
        let r = run_end_to_end(
            &StateDistribution::point_mass(StateId::A),
            100,
            &f(5),
            Seeds::default(),
            TraceMode::MonteCarlo,
        )
        .unwrap();
        assert_eq!(r.achieved_spcu(), Rational64::from_integer(2));
        assert_eq!(r.verdicts[0].expected, 0);
        assert_eq!(r.verdicts[1].expected, 100);
    }

    #[test]
    fn foreign_symbols_are_cross_checked() {
        let trace = make_proportional_trace(&[4, 4, 2, 2, 2, 2, 2]);
        let spec = f(7);
        let ch = sample_channel(&trace, &spec, 11);
        let need = build_schedule(&trace).symbols_per_tx();
        let mut src = MessageSource::random(&spec, need, 12);
        let out = run_trace(&spec, &trace, &ch, &mut src).unwrap();
        // two blocks, three foreign symbols per receiver except Rx2 with two
        assert_eq!(
            out.verdicts.each_ref().map(|v| v.foreign_resolved),
            [6, 4, 6]
        );
        for (rx, res) in out.results.iter().enumerate() {
            for (id, v) in &res.foreign {
                assert_ne!(id.tx, rx);
                assert_eq!(src.value(*id), Some(*v));
            }
        }
    }
}
