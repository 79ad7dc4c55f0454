//! The joint block: 19 fresh symbols over the nine uses
//! `A1 B1 C D E F G A2 B2`.
//!
//! Per-slot transmissions (Tx1, Tx2, Tx3):
//!
//! ```text
//! A1: a1 a2 a3    B1: b1 b2 b3    C: c1 c2 c3
//! D:  a4 c2 d3    E:  e1 c2 b3    F: a1 f2 b3
//! G:  a4 g2 b6    A2: a4 a5 a6    B2: b4 b5 b6
//! ```
//!
//! Repeated names retransmit the same fresh symbol. The retransmissions in
//! D..G line interference up so that each receiver ends with nine
//! independent equations in nine unknowns (its own symbols plus the
//! interference it has to strip).

use crate::channel::NUM_USERS;
use crate::gf::FieldSpec;
use crate::scheduler::{Role, S1Block, USES_PER_BLOCK};

use super::{CodecError, MessageSource, ObsEntry, ReceiverSystem, SymbolId, UseAssignment};

/// Fresh-symbol labels per transmitter, in the order they are drawn.
const FRESH_LABELS: [&[&str]; NUM_USERS] = [
    &["a1", "b1", "c1", "a4", "e1", "b4"],
    &["a2", "b2", "c2", "f2", "g2", "a5", "b5"],
    &["a3", "b3", "c3", "d3", "a6", "b6"],
];

/// `S1_SENDS[role][tx]` indexes into `FRESH_LABELS[tx]`.
pub const S1_SENDS: [[usize; NUM_USERS]; USES_PER_BLOCK] = [
    [0, 0, 0], // A1: a1 a2 a3
    [1, 1, 1], // B1: b1 b2 b3
    [2, 2, 2], // C:  c1 c2 c3
    [3, 2, 3], // D:  a4 c2 d3
    [4, 2, 1], // E:  e1 c2 b3
    [0, 3, 1], // F:  a1 f2 b3
    [3, 4, 5], // G:  a4 g2 b6
    [3, 5, 4], // A2: a4 a5 a6
    [5, 6, 5], // B2: b4 b5 b6
];

/// Label of the symbol `tx` sends in `role`.
pub fn s1_label(role: Role, tx: usize) -> &'static str {
    FRESH_LABELS[tx][S1_SENDS[role.index()][tx]]
}

/// Labels of the nine unknowns receiver `rx` resolves, own symbols first.
pub fn s1_unknown_labels(rx: usize) -> Vec<&'static str> {
    let mut own: Vec<&str> = FRESH_LABELS[rx].to_vec();
    let mut foreign = Vec::new();
    for role in Role::ALL {
        let links = role.state().links();
        for tx in links.interferers(rx) {
            let l = s1_label(role, tx);
            if !foreign.contains(&l) {
                foreign.push(l);
            }
        }
    }
    own.append(&mut foreign);
    own
}

/// Fresh symbols and per-slot transmissions for one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct S1Assignment {
    pub block: S1Block,
    /// Fresh ids per transmitter, in label order.
    pub fresh: [Vec<SymbolId>; NUM_USERS],
    /// `sends[role][tx]`.
    pub sends: [[SymbolId; NUM_USERS]; USES_PER_BLOCK],
}

impl S1Assignment {
    pub fn uses(&self) -> [UseAssignment; USES_PER_BLOCK] {
        std::array::from_fn(|r| UseAssignment {
            index: self.block.slots[r],
            links: Role::ALL[r].state().links(),
            sends: self.sends[r].map(Some),
        })
    }

    /// Label for a fresh id of this block, e.g. `"b3"`.
    pub fn label(&self, id: SymbolId) -> Option<&'static str> {
        let k = self.fresh.get(id.tx)?.iter().position(|&f| f == id)?;
        Some(FRESH_LABELS[id.tx][k])
    }

    pub fn fresh_count(&self) -> usize {
        self.fresh.iter().map(Vec::len).sum()
    }
}

/// Draws 6/7/6 fresh symbols for Tx1/Tx2/Tx3 and lays them out per slot.
pub fn s1_encode(block: &S1Block, src: &mut MessageSource) -> Result<S1Assignment, CodecError> {
    for (tx, labels) in FRESH_LABELS.iter().enumerate() {
        if src.remaining(tx) < labels.len() {
            return Err(CodecError::SourceExhausted { tx });
        }
    }
    let mut fresh: [Vec<SymbolId>; NUM_USERS] = Default::default();
    for (tx, labels) in FRESH_LABELS.iter().enumerate() {
        for _ in 0..labels.len() {
            fresh[tx].push(src.next(tx)?);
        }
    }
    let sends = std::array::from_fn(|r| std::array::from_fn(|tx| fresh[tx][S1_SENDS[r][tx]]));
    Ok(S1Assignment {
        block: *block,
        fresh,
        sends,
    })
}

/// Solves receiver `rx`'s 9×9 system for the block. `obs` holds the
/// observations of the nine slots in [`Role::ALL`] order.
pub fn s1_decode(
    spec: &FieldSpec,
    rx: usize,
    assignment: &S1Assignment,
    obs: &[ObsEntry],
) -> Result<Vec<(SymbolId, crate::gf::Fe)>, CodecError> {
    let sys = ReceiverSystem::build(spec, rx, &assignment.uses(), obs);
    debug_assert_eq!(sys.unknowns.len(), USES_PER_BLOCK);
    sys.solve(spec)
}
