//! Three-user wired interference channel with alternating connectivity.
//!
//! Transmitters know only which links are up in each channel use. Seven
//! connectivity states (A..G) occur with probabilities `λ_A..λ_G`, and the
//! sum-capacity is `(2 + λ)·log2 p` with
//! `λ = min{λ_A/2, λ_B/2, λ_C, λ_D, λ_E, λ_F, λ_G}`.
//!
//! The crate reaches that rate with state splitting: nine uses
//! (two A, two B, one each of C..G) are grouped into a jointly encoded
//! block carrying 19 symbols, and every remaining use silences one
//! transmitter to pass 2 symbols cleanly.
//!
//! - [`gf`]: GF(p) arithmetic, rank and exact solves.
//! - [`channel`]: states, traces, coefficients, the channel law.
//! - [`scheduler`]: λ, block packing and symbol accounting.
//! - [`codec`]: block and fallback encoders/decoders, the cyclic demo and
//!   the end-to-end pipeline.
//! - [`bounds`]: capacity, genie bounds, baseline, [`RateReport`].

pub mod bounds;
pub mod channel;
pub mod codec;
pub mod gf;
pub mod scheduler;

pub use bounds::{
    baseline_separate, combined_bound, genie_bound_b, genie_bound_rest, sum_capacity, Frac,
    RateReport,
};
pub use channel::{
    apply_channel, make_proportional_trace, proportional_counts, sample_channel, sample_trace,
    state_links, ChannelError, ChannelRealization, Coeffs, Link, LinkSet, StateDistribution,
    StateId, StateTrace,
};
pub use codec::{
    cyclic_jess_demo, run_end_to_end, CodecError, JessReport, MessageSource, Seeds, TraceMode,
};
pub use gf::{
    field_inv, rank, solve_linear_system, Fe, FieldError, FieldSpec, LinalgError, Matrix,
};
pub use scheduler::{build_schedule, count_symbols, lambda_of, Schedule};
