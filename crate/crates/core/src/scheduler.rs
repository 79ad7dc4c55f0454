//! State splitting: carve a trace into nine-use joint-encoding blocks and
//! single-use fallback transmissions.

use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::channel::{StateDistribution, StateId, StateTrace, NUM_STATES};

/// Fresh symbols carried by one joint block.
pub const SYMBOLS_PER_BLOCK: usize = 19;
/// Channel uses consumed by one joint block.
pub const USES_PER_BLOCK: usize = 9;
/// Fresh symbols carried by one fallback use.
pub const SYMBOLS_PER_FALLBACK: usize = 2;

/// Slot of a joint block. Two slots each for A and B, one for C..G.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    A1,
    B1,
    C,
    D,
    E,
    F,
    G,
    A2,
    B2,
}

impl Role {
    pub const ALL: [Role; USES_PER_BLOCK] = [
        Role::A1,
        Role::B1,
        Role::C,
        Role::D,
        Role::E,
        Role::F,
        Role::G,
        Role::A2,
        Role::B2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn state(self) -> StateId {
        match self {
            Role::A1 | Role::A2 => StateId::A,
            Role::B1 | Role::B2 => StateId::B,
            Role::C => StateId::C,
            Role::D => StateId::D,
            Role::E => StateId::E,
            Role::F => StateId::F,
            Role::G => StateId::G,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Channel-use index for each [`Role`], in `Role::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct S1Block {
    pub slots: [usize; USES_PER_BLOCK],
}

impl S1Block {
    pub fn slot(&self, role: Role) -> usize {
        self.slots[role.index()]
    }
}

/// A single use outside any block; one transmitter stays silent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FallbackUse {
    pub index: usize,
    pub state: StateId,
    /// 0-based transmitter.
    pub silenced: usize,
}

/// The transmitter that stays silent in a fallback use of state `s`.
///
/// Silencing this one transmitter leaves two direct links without any
/// interference, so two fresh symbols get through.
pub fn silenced_tx(s: StateId) -> usize {
    match s {
        StateId::A => 0,
        StateId::B => 2,
        StateId::C => 1,
        StateId::D => 0,
        StateId::E => 1,
        StateId::F => 2,
        StateId::G => 0,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub blocks: Vec<S1Block>,
    pub fallback: Vec<FallbackUse>,
}

impl Schedule {
    pub fn num_uses(&self) -> usize {
        self.blocks.len() * USES_PER_BLOCK + self.fallback.len()
    }

    /// Fresh symbols each transmitter needs to fill this schedule.
    pub fn symbols_per_tx(&self) -> [usize; 3] {
        let b = self.blocks.len();
        let mut need = [6 * b, 7 * b, 6 * b];
        for f in &self.fallback {
            for (tx, n) in need.iter_mut().enumerate() {
                if tx != f.silenced {
                    *n += 1;
                }
            }
        }
        need
    }
}

/// `min{λ_A/2, λ_B/2, λ_C, λ_D, λ_E, λ_F, λ_G}`, exactly.
pub fn lambda_of(dist: &StateDistribution) -> Rational64 {
    lambda_terms(dist).into_iter().min().expect("seven terms")
}

/// The seven terms whose minimum is λ, in state order.
pub fn lambda_terms(dist: &StateDistribution) -> [Rational64; NUM_STATES] {
    let half = Rational64::new(1, 2);
    std::array::from_fn(|i| {
        let p = dist.probs()[i];
        if i < 2 {
            p * half
        } else {
            p
        }
    })
}

/// Number of joint blocks a trace with these per-state counts supports.
pub fn block_count(counts: &[usize; NUM_STATES]) -> usize {
    let mut b = (counts[0] / 2).min(counts[1] / 2);
    for &c in &counts[2..] {
        b = b.min(c);
    }
    b
}

/// Greedy first-come packing: the k-th block takes the k-th pair of A uses,
/// the k-th pair of B uses and the k-th use of each of C..G. Every use that
/// is not packed becomes a fallback use, in trace order.
pub fn build_schedule(trace: &StateTrace) -> Schedule {
    let mut by_state: [Vec<usize>; NUM_STATES] = Default::default();
    for (i, s) in trace.states.iter().enumerate() {
        by_state[s.index()].push(i);
    }
    let counts: [usize; NUM_STATES] = std::array::from_fn(|s| by_state[s].len());
    let nb = block_count(&counts);

    let mut used = vec![false; trace.len()];
    let mut blocks = Vec::with_capacity(nb);
    for k in 0..nb {
        let slots = Role::ALL.map(|role| {
            let uses = &by_state[role.state().index()];
            match role {
                Role::A1 | Role::B1 => uses[2 * k],
                Role::A2 | Role::B2 => uses[2 * k + 1],
                _ => uses[k],
            }
        });
        for &i in &slots {
            used[i] = true;
        }
        blocks.push(S1Block { slots });
    }

    let fallback = trace
        .states
        .iter()
        .enumerate()
        .filter(|(i, _)| !used[*i])
        .map(|(index, &state)| FallbackUse {
            index,
            state,
            silenced: silenced_tx(state),
        })
        .collect();
    Schedule { blocks, fallback }
}

/// `19·B + 2·|fallback|`.
pub fn count_symbols(schedule: &Schedule) -> usize {
    SYMBOLS_PER_BLOCK * schedule.blocks.len() + SYMBOLS_PER_FALLBACK * schedule.fallback.len()
}
