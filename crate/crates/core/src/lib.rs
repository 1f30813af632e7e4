//! Power allocation for semantic-communication-assisted secrecy transmission
//! over fading wiretap channels.
//!
//! A transmitter superimposes a semantic stream and a conventional bit stream.
//! The legitimate receiver decodes both with successive interference
//! cancellation, while an eavesdropper that only understands bits sees the
//! semantic stream as interference. This crate evaluates the resulting secrecy
//! rates and maximizes their ergodic average under peak and average power
//! constraints, either exactly (Lagrangian dual with per-state exhaustive
//! search, see [`optimal`]) or approximately (successive convex approximation,
//! see [`sca`]).
//!
//! Module map:
//!
//! - [`channel`]: path loss, noise, and reproducible Rayleigh fading states.
//! - [`semantic`]: logistic semantic-similarity model and rate mappings.
//! - [`rates`]: SINRs, receiver/eavesdropper/secrecy rates, and baselines.
//! - [`optimal`]: dual-decomposition solver with bisection on the multiplier.
//! - [`sca`]: successive convex approximation with a fixed decoding order.

pub mod channel;
pub mod error;
pub mod optimal;
pub mod rates;
pub mod sca;
mod scalar;
pub mod semantic;

pub use channel::{dbm_to_watt, path_loss_linear, sample_states, ChannelConfig, FadingState};
pub use error::{Error, Result};
pub use optimal::{Budget, DualConfig, DualObjective, DualSolution, DualSolver, TimeShare};
pub use rates::{Allocation, DecodingOrder, SchemeKind};
pub use sca::{ScaConfig, ScaPoint, ScaResult, ScaVars};
pub use semantic::SemanticParams;
