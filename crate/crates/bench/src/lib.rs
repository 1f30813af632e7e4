//! Shared fixtures for the solver benchmarks in `benches/`.

use scsec_core::{sample_states, ChannelConfig, FadingState};

/// Fading states of the reference scenario (30 m links, seed 1).
pub fn reference_states(n: usize) -> Vec<FadingState> {
    sample_states(&ChannelConfig::default(), n).expect("reference channel is valid")
}
