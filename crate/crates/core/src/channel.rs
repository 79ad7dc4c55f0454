//! Connectivity states, state traces, coefficient sampling and the channel
//! law `Y_j = Σ_i h[j][i] · X_i` over GF(p).
//!
//! State letters A..G are local names. Each one is pinned by its cross-link
//! set; the direct links 1→1, 2→2, 3→3 are always present.
//!
//! | state | cross links       |
//! |-------|-------------------|
//! | A     | 1→3               |
//! | B     | 3→1               |
//! | C     | 2→3               |
//! | D     | 1→3, 2→1, 1→2     |
//! | E     | 2→3, 2→1, 3→2     |
//! | F     | 1→3, 3→1, 3→2     |
//! | G     | 1→3, 3→1, 1→2     |
//!
//! Users are 0-based (`0..3`) in the API and printed 1-based.

use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Fe, FieldSpec};

pub const NUM_USERS: usize = 3;
pub const NUM_STATES: usize = 7;

/// Per-use channel coefficients, indexed `[rx][tx]`.
pub type Coeffs = [[Fe; NUM_USERS]; NUM_USERS];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("invalid state distribution: {0}")]
    InvalidDistribution(String),
    #[error("unknown state tag {0:?}")]
    UnknownState(char),
}

/// A directed link from transmitter `tx` to receiver `rx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub tx: usize,
    pub rx: usize,
}

impl Link {
    pub const fn new(tx: usize, rx: usize) -> Self {
        Link { tx, rx }
    }

    pub fn is_direct(&self) -> bool {
        self.tx == self.rx
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}→{}", self.tx + 1, self.rx + 1)
    }
}

/// Set of present links, stored as a 9-bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LinkSet(u16);

impl LinkSet {
    pub const EMPTY: LinkSet = LinkSet(0);
    /// The three direct links.
    pub const DIRECT: LinkSet = LinkSet((1 << 0) | (1 << 4) | (1 << 8));

    const fn bit(tx: usize, rx: usize) -> u16 {
        1 << (rx * NUM_USERS + tx)
    }

    pub const fn with(self, tx: usize, rx: usize) -> LinkSet {
        LinkSet(self.0 | Self::bit(tx, rx))
    }

    /// Direct links plus the given cross links, written as 1-based `(tx, rx)`.
    pub fn direct_plus(cross: &[(usize, usize)]) -> LinkSet {
        cross
            .iter()
            .fold(LinkSet::DIRECT, |s, &(t, r)| s.with(t - 1, r - 1))
    }

    pub fn contains(&self, tx: usize, rx: usize) -> bool {
        tx < NUM_USERS && rx < NUM_USERS && self.0 & Self::bit(tx, rx) != 0
    }

    pub fn is_superset(&self, other: &LinkSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Link> + '_ {
        (0..NUM_USERS)
            .flat_map(|tx| (0..NUM_USERS).map(move |rx| Link::new(tx, rx)))
            .filter(|l| self.contains(l.tx, l.rx))
    }

    pub fn cross_links(&self) -> impl Iterator<Item = Link> + '_ {
        self.iter().filter(|l| !l.is_direct())
    }

    /// Transmitters other than `rx` heard at receiver `rx`.
    pub fn interferers(&self, rx: usize) -> impl Iterator<Item = usize> + '_ {
        (0..NUM_USERS).filter(move |&tx| tx != rx && self.contains(tx, rx))
    }
}

impl fmt::Display for LinkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// One of the seven connectivity states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl StateId {
    pub const ALL: [StateId; NUM_STATES] = [
        StateId::A,
        StateId::B,
        StateId::C,
        StateId::D,
        StateId::E,
        StateId::F,
        StateId::G,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn from_tag(c: char) -> Result<StateId, ChannelError> {
        let u = c.to_ascii_uppercase();
        StateId::ALL
            .into_iter()
            .find(|s| s.tag() == u)
            .ok_or(ChannelError::UnknownState(c))
    }

    pub fn links(self) -> LinkSet {
        state_links(self)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// Links present in state `s`: the three direct links plus its cross links.
pub fn state_links(s: StateId) -> LinkSet {
    match s {
        StateId::A => LinkSet::direct_plus(&[(1, 3)]),
        StateId::B => LinkSet::direct_plus(&[(3, 1)]),
        StateId::C => LinkSet::direct_plus(&[(2, 3)]),
        StateId::D => LinkSet::direct_plus(&[(1, 3), (2, 1), (1, 2)]),
        StateId::E => LinkSet::direct_plus(&[(2, 3), (2, 1), (3, 2)]),
        StateId::F => LinkSet::direct_plus(&[(1, 3), (3, 1), (3, 2)]),
        StateId::G => LinkSet::direct_plus(&[(1, 3), (3, 1), (1, 2)]),
    }
}

/// Tolerance on the probability sum before renormalization.
pub const DIST_SUM_TOL: f64 = 1e-9;

/// Probability of each state, held as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(
    try_from = "[Rational64; NUM_STATES]",
    into = "[Rational64; NUM_STATES]"
)]
pub struct StateDistribution {
    probs: [Rational64; NUM_STATES],
}

impl TryFrom<[Rational64; NUM_STATES]> for StateDistribution {
    type Error = ChannelError;

    fn try_from(probs: [Rational64; NUM_STATES]) -> Result<Self, Self::Error> {
        StateDistribution::new(probs)
    }
}

impl From<StateDistribution> for [Rational64; NUM_STATES] {
    fn from(d: StateDistribution) -> Self {
        d.probs
    }
}

impl StateDistribution {
    /// Validates and, if the sum is within [`DIST_SUM_TOL`] of one,
    /// renormalizes exactly.
    pub fn new(probs: [Rational64; NUM_STATES]) -> Result<Self, ChannelError> {
        if let Some(s) = probs.iter().position(|p| *p < Rational64::zero()) {
            return Err(ChannelError::InvalidDistribution(format!(
                "negative probability for state {}",
                StateId::ALL[s]
            )));
        }
        let sum: Rational64 = probs.iter().copied().sum();
        let sum_f = sum.to_f64().unwrap_or(f64::NAN);
        if sum_f.is_nan() || (sum_f - 1.0).abs() > DIST_SUM_TOL {
            return Err(ChannelError::InvalidDistribution(format!(
                "probabilities sum to {sum_f}, expected 1"
            )));
        }
        let probs = probs.map(|p| p / sum);
        Ok(StateDistribution { probs })
    }

    /// Nonnegative integer weights, normalized by their total.
    pub fn from_weights(w: [u32; NUM_STATES]) -> Result<Self, ChannelError> {
        let total: i64 = w.iter().map(|&x| i64::from(x)).sum();
        if total == 0 {
            return Err(ChannelError::InvalidDistribution("all weights zero".into()));
        }
        StateDistribution::new(w.map(|x| Rational64::new(i64::from(x), total)))
    }

    /// Float probabilities, each approximated by a nearby rational.
    pub fn from_f64(p: [f64; NUM_STATES]) -> Result<Self, ChannelError> {
        let mut out = [Rational64::zero(); NUM_STATES];
        for (o, &v) in out.iter_mut().zip(&p) {
            if !v.is_finite() || v < 0.0 {
                return Err(ChannelError::InvalidDistribution(format!(
                    "probability {v} is not a finite nonnegative number"
                )));
            }
            *o = Rational64::approximate_float(v).ok_or_else(|| {
                ChannelError::InvalidDistribution(format!("cannot represent {v}"))
            })?;
        }
        StateDistribution::new(out)
    }

    pub fn point_mass(s: StateId) -> Self {
        let mut probs = [Rational64::zero(); NUM_STATES];
        probs[s.index()] = Rational64::from_integer(1);
        StateDistribution { probs }
    }

    pub fn uniform() -> Self {
        StateDistribution {
            probs: [Rational64::new(1, NUM_STATES as i64); NUM_STATES],
        }
    }

    /// `(2/9, 2/9, 1/9, 1/9, 1/9, 1/9, 1/9)`, the distribution that
    /// equalizes all seven terms of the capacity minimum.
    pub fn balanced() -> Self {
        let mut probs = [Rational64::new(1, 9); NUM_STATES];
        probs[0] = Rational64::new(2, 9);
        probs[1] = Rational64::new(2, 9);
        StateDistribution { probs }
    }

    pub fn prob(&self, s: StateId) -> Rational64 {
        self.probs[s.index()]
    }

    pub fn probs(&self) -> &[Rational64; NUM_STATES] {
        &self.probs
    }

    pub fn probs_f64(&self) -> [f64; NUM_STATES] {
        self.probs.map(|p| p.to_f64().unwrap_or(0.0))
    }

    /// Sets the probability of `s` to `x` and rescales the others
    /// proportionally; spreads `1 - x` evenly if they were all zero.
    pub fn reweighted(&self, s: StateId, x: Rational64) -> Result<Self, ChannelError> {
        let one = Rational64::from_integer(1);
        if x < Rational64::zero() || x > one {
            return Err(ChannelError::InvalidDistribution(format!(
                "probability {x} for state {s} is outside [0, 1]"
            )));
        }
        let v = s.index();
        let rest = one - self.probs[v];
        let left = one - x;
        let mut probs = self.probs;
        for (i, p) in probs.iter_mut().enumerate() {
            *p = if i == v {
                x
            } else if rest.is_zero() {
                left / Rational64::from_integer(NUM_STATES as i64 - 1)
            } else {
                *p * left / rest
            };
        }
        StateDistribution::new(probs)
    }
}

/// Per-channel-use connectivity states.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateTrace {
    pub states: Vec<StateId>,
}

impl StateTrace {
    pub fn new(states: Vec<StateId>) -> Self {
        StateTrace { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn counts(&self) -> [usize; NUM_STATES] {
        let mut c = [0; NUM_STATES];
        for s in &self.states {
            c[s.index()] += 1;
        }
        c
    }

    /// Parses a string of state letters such as `"AABBCDEFG"`.
    pub fn parse(s: &str) -> Result<Self, ChannelError> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(StateId::from_tag)
            .collect::<Result<Vec<_>, _>>()
            .map(StateTrace::new)
    }
}

/// Draws `n` i.i.d. states from `dist`.
pub fn sample_trace(dist: &StateDistribution, n: usize, seed: u64) -> StateTrace {
    let weights = dist.probs_f64();
    let wi = WeightedIndex::new(weights).expect("validated distribution has positive mass");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StateTrace::new((0..n).map(|_| StateId::ALL[wi.sample(&mut rng)]).collect())
}

/// Trace with exactly `counts[s]` uses of each state, ordered by state tag.
pub fn make_proportional_trace(counts: &[usize; NUM_STATES]) -> StateTrace {
    StateTrace::new(
        StateId::ALL
            .iter()
            .flat_map(|&s| std::iter::repeat_n(s, counts[s.index()]))
            .collect(),
    )
}

/// Per-state counts summing to `n` that track `n · λ_s`: every state gets
/// `⌊n·λ_s⌋`, and the remaining uses go to the largest fractional parts
/// (ties to the earlier state). Exact whenever every `n·λ_s` is an integer.
pub fn proportional_counts(dist: &StateDistribution, n: usize) -> [usize; NUM_STATES] {
    let n_r = Rational64::from_integer(n as i64);
    let scaled = dist.probs.map(|p| p * n_r);
    let mut counts = scaled.map(|x| x.floor().to_integer() as usize);
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..NUM_STATES).collect();
    order.sort_by(|&a, &b| scaled[b].fract().cmp(&scaled[a].fract()).then(a.cmp(&b)));
    for &s in order.iter().take(n.saturating_sub(assigned)) {
        counts[s] += 1;
    }
    counts
}

/// Coefficients for every use of a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelRealization {
    pub coeffs: Vec<Coeffs>,
}

impl ChannelRealization {
    /// Every present link has coefficient one.
    pub fn unit(trace: &StateTrace) -> Self {
        ChannelRealization {
            coeffs: trace
                .states
                .iter()
                .map(|s| unit_coeffs(s.links()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

pub fn unit_coeffs(links: LinkSet) -> Coeffs {
    let mut h = [[Fe::ZERO; NUM_USERS]; NUM_USERS];
    for l in links.iter() {
        h[l.rx][l.tx] = Fe::ONE;
    }
    h
}

/// Draws one coefficient matrix: each present link independently uniform
/// over the nonzero elements, absent links zero.
pub fn sample_coeffs<R: Rng + ?Sized>(links: LinkSet, spec: &FieldSpec, rng: &mut R) -> Coeffs {
    let mut h = [[Fe::ZERO; NUM_USERS]; NUM_USERS];
    for l in links.iter() {
        h[l.rx][l.tx] = spec.elem(u64::from(rng.random_range(1..spec.p())));
    }
    h
}

pub fn sample_channel(trace: &StateTrace, spec: &FieldSpec, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChannelRealization {
        coeffs: trace
            .states
            .iter()
            .map(|s| sample_coeffs(s.links(), spec, &mut rng))
            .collect(),
    }
}

/// `Y_j = Σ_i h[j][i] · x_i` for each receiver `j`.
pub fn apply_channel(spec: &FieldSpec, h: &Coeffs, x: &[Fe; NUM_USERS]) -> [Fe; NUM_USERS] {
    std::array::from_fn(|j| spec.dot(&h[j], x))
}

/// True when the nonzero pattern of `h` is exactly `links`.
pub fn coeffs_match_links(h: &Coeffs, links: LinkSet) -> bool {
    (0..NUM_USERS).all(|rx| (0..NUM_USERS).all(|tx| h[rx][tx].is_zero() != links.contains(tx, rx)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn reweighted_keeps_ratios() {
        let e = StateDistribution::balanced()
            .reweighted(StateId::B, Rational64::new(2, 5))
            .unwrap();
        assert_eq!(e.prob(StateId::B), Rational64::new(2, 5));
        assert_eq!(e.prob(StateId::A), Rational64::new(6, 35));
        assert_eq!(e.prob(StateId::C), Rational64::new(3, 35));
        let f = StateDistribution::point_mass(StateId::A)
            .reweighted(StateId::A, Rational64::new(2, 5))
            .unwrap();
        assert_eq!(f.prob(StateId::G), Rational64::new(1, 10));
        assert!(StateDistribution::uniform()
            .reweighted(StateId::C, Rational64::new(3, 2))
            .is_err());
    }

    #[test]
    fn state_link_sets() {
        let a = state_links(StateId::A);
        assert_eq!(a, LinkSet::DIRECT.with(0, 2));
        assert_eq!(a.len(), 4);
        let f = state_links(StateId::F);
        let expect: Vec<(usize, usize)> = vec![(1, 1), (2, 2), (3, 3), (1, 3), (3, 1), (3, 2)];
        for (t, rx) in &expect {
            assert!(f.contains(t - 1, rx - 1), "{t}->{rx}");
        }
        assert_eq!(f.len(), expect.len());
        for s in StateId::ALL {
            assert!(s.links().is_superset(&LinkSet::DIRECT), "{s}");
        }
        assert_eq!(a.to_string(), "{1→1, 1→3, 2→2, 3→3}");
    }

    #[test]
    fn states_are_distinct() {
        for (i, a) in StateId::ALL.iter().enumerate() {
            for b in &StateId::ALL[i + 1..] {
                assert_ne!(a.links(), b.links());
            }
        }
    }

    #[test]
    fn tags_round_trip() {
        for s in StateId::ALL {
            assert_eq!(StateId::from_tag(s.tag()), Ok(s));
        }
        assert_eq!(StateId::from_tag('x'), Err(ChannelError::UnknownState('x')));
        assert_eq!(
            StateTrace::parse("AB c").unwrap().states,
            vec![StateId::A, StateId::B, StateId::C]
        );
    }

    #[test]
    fn distribution_validation() {
        assert!(StateDistribution::new([r(1, 7); 7]).is_ok());
        let mut bad = [r(1, 7); 7];
        bad[0] = r(2, 7);
        assert!(matches!(
            StateDistribution::new(bad),
            Err(ChannelError::InvalidDistribution(_))
        ));
        let mut neg = [r(0, 1); 7];
        neg[0] = r(-1, 1);
        neg[1] = r(2, 1);
        assert!(StateDistribution::new(neg).is_err());
        assert!(StateDistribution::from_weights([0; 7]).is_err());
        let d = StateDistribution::from_f64([0.4, 0.2, 0.1, 0.1, 0.1, 0.05, 0.05]).unwrap();
        assert_eq!(d.prob(StateId::F), r(1, 20));
        assert!(StateDistribution::from_f64([f64::NAN, 1.0, 0., 0., 0., 0., 0.]).is_err());
    }

    #[test]
    fn near_one_sum_is_renormalized() {
        let mut p = [r(1, 7); 7];
        p[0] += r(1, 10_000_000_000);
        let d = StateDistribution::new(p).unwrap();
        let s: Rational64 = d.probs().iter().copied().sum();
        assert_eq!(s, r(1, 1));
    }

    #[test]
    fn point_mass_trace() {
        let t = sample_trace(&StateDistribution::point_mass(StateId::A), 5, 42);
        assert_eq!(t.states, vec![StateId::A; 5]);
    }

    #[test]
    fn trace_is_seeded() {
        let d = StateDistribution::uniform();
        assert_eq!(sample_trace(&d, 200, 9), sample_trace(&d, 200, 9));
        assert_ne!(sample_trace(&d, 200, 9), sample_trace(&d, 200, 10));
        assert!(sample_trace(&d, 0, 9).is_empty());
    }

    #[test]
    fn uniform_trace_concentration() {
        let n = 70_000usize;
        let t = sample_trace(&StateDistribution::uniform(), n, 2024);
        let sigma = (n as f64 * (1.0 / 7.0) * (6.0 / 7.0)).sqrt();
        for (s, &c) in t.counts().iter().enumerate() {
            assert!((c as f64 - 10_000.0).abs() <= 5.0 * sigma, "state {s}: {c}");
        }
    }

    #[test]
    fn proportional_traces() {
        let t = make_proportional_trace(&[2, 2, 1, 1, 1, 1, 1]);
        assert_eq!(t.len(), 9);
        assert_eq!(t, StateTrace::parse("AABBCDEFG").unwrap());
        assert!(make_proportional_trace(&[0; 7]).is_empty());
        let t = make_proportional_trace(&[2; 7]);
        assert_eq!(t.len(), 14);
        assert_eq!(t.counts(), [2; 7]);
    }

    #[test]
    fn proportional_counts_exact_and_rounded() {
        assert_eq!(
            proportional_counts(&StateDistribution::balanced(), 9000),
            [2000, 2000, 1000, 1000, 1000, 1000, 1000]
        );
        let c = proportional_counts(&StateDistribution::uniform(), 10);
        assert_eq!(c.iter().sum::<usize>(), 10);
        assert_eq!(c, [2, 2, 2, 1, 1, 1, 1]);
        assert_eq!(
            proportional_counts(&StateDistribution::uniform(), 0),
            [0; 7]
        );
    }

    #[test]
    fn coefficients_follow_links() {
        let spec = FieldSpec::new(3).unwrap();
        let trace = StateTrace::new(StateId::ALL.repeat(20));
        let ch = sample_channel(&trace, &spec, 5);
        for (s, h) in trace.states.iter().zip(&ch.coeffs) {
            assert!(coeffs_match_links(h, s.links()));
            for row in h {
                for v in row {
                    assert!(v.value() < 3);
                }
            }
        }
        assert_eq!(ch, sample_channel(&trace, &spec, 5));
    }

    #[test]
    fn coefficient_uniformity() {
        let spec = FieldSpec::new(5).unwrap();
        let trace = StateTrace::new(vec![StateId::A; 10_000]);
        let ch = sample_channel(&trace, &spec, 77);
        let mut freq = [0usize; 5];
        for h in &ch.coeffs {
            freq[h[2][0].value() as usize] += 1;
        }
        assert_eq!(freq[0], 0);
        for &f in &freq[1..] {
            let rel = f as f64 / 10_000.0;
            assert!((rel - 0.25).abs() <= 0.02, "{freq:?}");
        }
    }

    #[test]
    fn apply_channel_examples() {
        let spec = FieldSpec::new(5).unwrap();
        let zero = [Fe::ZERO; 3];
        for s in StateId::ALL {
            assert_eq!(apply_channel(&spec, &unit_coeffs(s.links()), &zero), zero);
        }
        let ones = [Fe::ONE; 3];
        let y = apply_channel(&spec, &unit_coeffs(StateId::A.links()), &ones);
        assert_eq!(y.map(Fe::value), [1, 1, 2]);
        // F: Y1 = x1 + x3, Y2 = x2 + x3, Y3 = x1 + x3
        let x = [spec.elem(1), spec.elem(2), spec.elem(3)];
        let y = apply_channel(&spec, &unit_coeffs(StateId::F.links()), &x);
        assert_eq!(y.map(Fe::value), [4, 0, 4]);
    }
}
