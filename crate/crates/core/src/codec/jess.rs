//! Cyclic demo of joint encoding with a single resolving state.
//!
//! Three I-states each carry one cross link (2→1, 3→2, 1→3) and three fresh
//! symbols. In the R-state all three cross links are up and each
//! transmitter resends the symbol that interfered in its I-state. A
//! receiver strips its own transmitter's already-known symbol from the
//! R-state observation, reads the interferer, and cleans up the I-state
//! where it was hit. Nine symbols over four uses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_coeffs, unit_coeffs, Coeffs, LinkSet, NUM_USERS};
use crate::gf::FieldSpec;

use super::{transmit, CodecError, MessageSource, ReceiverSystem, UseAssignment};

/// Coefficient draw for the demo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffMode {
    Unit,
    Random,
}

/// Link sets of the three I-states followed by the R-state.
pub fn jess_links() -> [LinkSet; 4] {
    [
        LinkSet::direct_plus(&[(2, 1)]),
        LinkSet::direct_plus(&[(3, 2)]),
        LinkSet::direct_plus(&[(1, 3)]),
        LinkSet::direct_plus(&[(2, 1), (3, 2), (1, 3)]),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JessReport {
    pub p: u32,
    pub seed: u64,
    pub with_resolving_state: bool,
    pub uses: usize,
    pub fresh_symbols: usize,
    /// Own symbols each receiver recovered correctly.
    pub decoded_per_rx: [usize; NUM_USERS],
    pub decoded: usize,
    pub unresolved: usize,
    /// Decoded symbols per channel use, `(num, den)` in lowest terms.
    pub rate: (u64, u64),
    pub success: bool,
}

/// Four-use run with random coefficients.
pub fn cyclic_jess_demo(spec: &FieldSpec, seed: u64) -> Result<JessReport, CodecError> {
    cyclic_jess_run(spec, seed, CoeffMode::Random, true)
}

/// Runs the demo; with `with_resolving_state = false` only the three
/// I-states are sent and each receiver is left with one unresolved symbol.
pub fn cyclic_jess_run(
    spec: &FieldSpec,
    seed: u64,
    mode: CoeffMode,
    with_resolving_state: bool,
) -> Result<JessReport, CodecError> {
    let links = jess_links();
    let mut src = MessageSource::random(spec, [3; NUM_USERS], seed);
    let mut uses: Vec<UseAssignment> = Vec::with_capacity(4);
    for (k, l) in links[..3].iter().enumerate() {
        let mut sends = [None; NUM_USERS];
        for (tx, s) in sends.iter_mut().enumerate() {
            *s = Some(src.next(tx)?);
        }
        uses.push(UseAssignment {
            index: k,
            links: *l,
            sends,
        });
    }
    if with_resolving_state {
        // resend whatever crossed a link in each I-state
        let mut sends = [None; NUM_USERS];
        for u in &uses {
            for link in u.links.cross_links() {
                sends[link.tx] = u.sends[link.tx];
            }
        }
        uses.push(UseAssignment {
            index: 3,
            links: links[3],
            sends,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let coeffs: Vec<Coeffs> = links
        .iter()
        .take(uses.len())
        .map(|l| match mode {
            CoeffMode::Unit => unit_coeffs(*l),
            CoeffMode::Random => sample_coeffs(*l, spec, &mut rng),
        })
        .collect();
    let obs = transmit(spec, &uses, &coeffs, &src)?;

    let mut decoded_per_rx = [0; NUM_USERS];
    let mut all_correct = true;
    for rx in 0..NUM_USERS {
        let sys = ReceiverSystem::build(spec, rx, &uses, &obs[rx]);
        for (id, v) in sys.solve_identifiable(spec)? {
            let Some(v) = v else { continue };
            if src.value(id) != Some(v) {
                all_correct = false;
                continue;
            }
            if id.tx == rx {
                decoded_per_rx[rx] += 1;
            }
        }
    }
    let fresh_symbols: usize = src.consumed().iter().sum();
    let decoded: usize = decoded_per_rx.iter().sum();
    let g = gcd(decoded as u64, uses.len() as u64).max(1);
    Ok(JessReport {
        p: spec.p(),
        seed,
        with_resolving_state,
        uses: uses.len(),
        fresh_symbols,
        decoded_per_rx,
        decoded,
        unresolved: fresh_symbols - decoded,
        rate: (decoded as u64 / g, uses.len() as u64 / g),
        success: all_correct && decoded == fresh_symbols,
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
