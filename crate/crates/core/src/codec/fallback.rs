//! Single-use transmission with one transmitter silenced: two fresh symbols
//! reach their receivers free of interference.

use crate::channel::NUM_USERS;
use crate::gf::{Fe, FieldSpec};
use crate::scheduler::FallbackUse;

use super::{CodecError, MessageSource, ObsEntry, SymbolId, UseAssignment};

pub fn fallback_encode(
    fb: &FallbackUse,
    src: &mut MessageSource,
) -> Result<UseAssignment, CodecError> {
    let mut sends = [None; NUM_USERS];
    for (tx, s) in sends.iter_mut().enumerate() {
        if tx != fb.silenced {
            *s = Some(src.next(tx)?);
        }
    }
    Ok(UseAssignment {
        index: fb.index,
        links: fb.state.links(),
        sends,
    })
}

/// Recovers `rx`'s symbol as `Y / h_rr` when its transmitter is active and
/// every interferer on a present link is silent; otherwise the receiver
/// idles for this use.
pub fn fallback_decode(
    spec: &FieldSpec,
    rx: usize,
    u: &UseAssignment,
    obs: &ObsEntry,
) -> Option<(SymbolId, Fe)> {
    let id = u.sends[rx]?;
    if u.links.interferers(rx).any(|tx| u.sends[tx].is_some()) {
        return None;
    }
    let v = spec.div(obs.y, obs.h_row[rx]).ok()?;
    Some((id, v))
}
