//! Encoders and decoders for the joint nine-use block, the single-use
//! fallback, and the cyclic single-resolving-state demonstration.
//!
//! Transmitters only see link topology. Every decoder works from raw
//! received values plus the receiver's own coefficient row, and resolves
//! interference by exact linear algebra over GF(p).

mod fallback;
mod jess;
mod pipeline;
mod s1;

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{apply_channel, Coeffs, LinkSet, NUM_USERS};
use crate::gf::{solve_identifiable, solve_linear_system, Fe, FieldSpec, LinalgError, Matrix};

pub use fallback::{fallback_decode, fallback_encode};
pub use jess::{cyclic_jess_demo, cyclic_jess_run, jess_links, CoeffMode, JessReport};
pub use pipeline::{
    run_end_to_end, run_end_to_end_on, run_trace, run_with_messages, LinkOutcome, ReceiverVerdict,
    Seeds, TraceMode,
};
pub use s1::{s1_decode, s1_encode, s1_label, s1_unknown_labels, S1Assignment, S1_SENDS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("message source for Tx{} is exhausted", .tx + 1)]
    SourceExhausted { tx: usize },
    #[error("symbol {0} has no value in the message source")]
    UnknownSymbol(SymbolId),
    #[error("Rx{}: singular system (rank {rank} of {dim})", .rx + 1)]
    SingularSystem { rx: usize, rank: usize, dim: usize },
    #[error("channel use {0} has no coefficients")]
    MissingCoefficients(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Globally unique id of a fresh symbol: transmitter and position in its
/// message stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolId {
    pub tx: usize,
    pub seq: usize,
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tx{}#{}", self.tx + 1, self.seq)
    }
}

/// How message symbols are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageMode {
    /// Uniform over GF(p), seeded.
    Random,
    /// `(seq + tx + 1) mod p`, for golden tests.
    Counter,
}

/// Per-transmitter message streams, consumed in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageSource {
    streams: [Vec<Fe>; NUM_USERS],
    cursor: [usize; NUM_USERS],
}

impl MessageSource {
    pub fn from_streams(streams: [Vec<Fe>; NUM_USERS]) -> Self {
        MessageSource {
            streams,
            cursor: [0; NUM_USERS],
        }
    }

    pub fn random(spec: &FieldSpec, lens: [usize; NUM_USERS], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let streams = lens.map(|n| {
            (0..n)
                .map(|_| spec.elem(u64::from(rng.random_range(0..spec.p()))))
                .collect()
        });
        MessageSource::from_streams(streams)
    }

    pub fn counter(spec: &FieldSpec, lens: [usize; NUM_USERS]) -> Self {
        let mut tx = 0u64;
        let streams = lens.map(|n| {
            let s = (0..n as u64).map(|k| spec.elem(k + tx + 1)).collect();
            tx += 1;
            s
        });
        MessageSource::from_streams(streams)
    }

    pub fn with_mode(
        spec: &FieldSpec,
        lens: [usize; NUM_USERS],
        mode: MessageMode,
        seed: u64,
    ) -> Self {
        match mode {
            MessageMode::Random => MessageSource::random(spec, lens, seed),
            MessageMode::Counter => MessageSource::counter(spec, lens),
        }
    }

    /// Takes the next fresh symbol of `tx`.
    pub fn next(&mut self, tx: usize) -> Result<SymbolId, CodecError> {
        let seq = self.cursor[tx];
        if seq >= self.streams[tx].len() {
            return Err(CodecError::SourceExhausted { tx });
        }
        self.cursor[tx] += 1;
        Ok(SymbolId { tx, seq })
    }

    pub fn value(&self, id: SymbolId) -> Option<Fe> {
        self.streams.get(id.tx)?.get(id.seq).copied()
    }

    /// Number of symbols handed out so far, per transmitter.
    pub fn consumed(&self) -> [usize; NUM_USERS] {
        self.cursor
    }

    pub fn remaining(&self, tx: usize) -> usize {
        self.streams[tx].len() - self.cursor[tx]
    }

    pub fn streams(&self) -> &[Vec<Fe>; NUM_USERS] {
        &self.streams
    }
}

/// What each transmitter sends in one channel use; `None` is silence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UseAssignment {
    pub index: usize,
    pub links: LinkSet,
    pub sends: [Option<SymbolId>; NUM_USERS],
}

impl UseAssignment {
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..NUM_USERS).filter(|&t| self.sends[t].is_some())
    }
}

/// One received value together with the receiver's coefficient row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObsEntry {
    pub index: usize,
    pub y: Fe,
    pub h_row: [Fe; NUM_USERS],
}

/// Per-receiver observations, aligned with the assignments passed to
/// [`transmit`].
pub type Observation = Vec<ObsEntry>;

/// Runs every use through the channel. Silent transmitters contribute zero.
/// `coeffs` is indexed by channel-use index.
pub fn transmit(
    spec: &FieldSpec,
    uses: &[UseAssignment],
    coeffs: &[Coeffs],
    src: &MessageSource,
) -> Result<[Observation; NUM_USERS], CodecError> {
    let mut obs: [Observation; NUM_USERS] = Default::default();
    for u in uses {
        let h = coeffs
            .get(u.index)
            .ok_or(CodecError::MissingCoefficients(u.index))?;
        let mut x = [Fe::ZERO; NUM_USERS];
        for (xi, s) in x.iter_mut().zip(&u.sends) {
            if let Some(id) = s {
                *xi = src.value(*id).ok_or(CodecError::UnknownSymbol(*id))?;
            }
        }
        let y = apply_channel(spec, h, &x);
        for (j, o) in obs.iter_mut().enumerate() {
            o.push(ObsEntry {
                index: u.index,
                y: y[j],
                h_row: h[j],
            });
        }
    }
    Ok(obs)
}

/// The linear system a receiver sees over a group of uses: one equation per
/// use, one unknown per distinct symbol that reaches it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverSystem {
    pub rx: usize,
    pub unknowns: Vec<SymbolId>,
    pub matrix: Matrix,
    pub rhs: Vec<Fe>,
}

impl ReceiverSystem {
    /// Builds the system from assignments and matching observations. A
    /// symbol is an unknown when it is sent over a link present at `rx`.
    pub fn build(
        spec: &FieldSpec,
        rx: usize,
        uses: &[UseAssignment],
        obs: &[ObsEntry],
    ) -> ReceiverSystem {
        assert_eq!(uses.len(), obs.len(), "observation per use");
        let mut unknowns: Vec<SymbolId> = Vec::new();
        let mut col_of: BTreeMap<SymbolId, usize> = BTreeMap::new();
        let mut rows: Vec<Vec<(usize, Fe)>> = Vec::new();
        let mut rhs = Vec::new();
        for (u, o) in uses.iter().zip(obs) {
            debug_assert_eq!(u.index, o.index);
            let mut row = Vec::new();
            for tx in 0..NUM_USERS {
                let Some(id) = u.sends[tx] else { continue };
                if !u.links.contains(tx, rx) {
                    continue;
                }
                let col = *col_of.entry(id).or_insert_with(|| {
                    unknowns.push(id);
                    unknowns.len() - 1
                });
                row.push((col, o.h_row[tx]));
            }
            if !row.is_empty() {
                rows.push(row);
                rhs.push(o.y);
            }
        }
        let mut matrix = Matrix::zeros(rows.len().max(1), unknowns.len().max(1));
        for (i, row) in rows.iter().enumerate() {
            for &(c, h) in row {
                matrix[(i, c)] = spec.add(matrix[(i, c)], h);
            }
        }
        ReceiverSystem {
            rx,
            unknowns,
            matrix,
            rhs,
        }
    }

    pub fn equations(&self) -> usize {
        self.rhs.len()
    }

    /// Solves a square system for every unknown.
    pub fn solve(&self, spec: &FieldSpec) -> Result<Vec<(SymbolId, Fe)>, CodecError> {
        let dim = self.unknowns.len();
        if dim == 0 && self.equations() == 0 {
            return Ok(Vec::new());
        }
        if self.equations() != dim {
            let rank = crate::gf::rank(spec, &self.matrix).min(dim);
            return Err(CodecError::SingularSystem {
                rx: self.rx,
                rank,
                dim,
            });
        }
        match solve_linear_system(spec, &self.matrix, &self.rhs) {
            Ok(x) => Ok(self.unknowns.iter().copied().zip(x).collect()),
            Err(LinalgError::SingularMatrix { rank, dim }) => Err(CodecError::SingularSystem {
                rx: self.rx,
                rank,
                dim,
            }),
            Err(e) => Err(e.into()),
        }
    }

    /// Recovers whichever unknowns the equations pin down.
    pub fn solve_identifiable(
        &self,
        spec: &FieldSpec,
    ) -> Result<Vec<(SymbolId, Option<Fe>)>, CodecError> {
        if self.equations() == 0 {
            return Ok(self.unknowns.iter().map(|&id| (id, None)).collect());
        }
        let vals = solve_identifiable(spec, &self.matrix, &self.rhs)?;
        Ok(self.unknowns.iter().copied().zip(vals).collect())
    }
}

/// Symbols recovered by one receiver.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodeResult {
    /// Symbols of the receiver's own transmitter.
    pub own: BTreeMap<SymbolId, Fe>,
    /// Interfering symbols resolved along the way.
    pub foreign: BTreeMap<SymbolId, Fe>,
}

impl DecodeResult {
    pub fn record(&mut self, rx: usize, id: SymbolId, v: Fe) {
        if id.tx == rx {
            self.own.insert(id, v);
        } else {
            self.foreign.insert(id, v);
        }
    }
}
