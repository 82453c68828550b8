//! Security analysis toolkit for entanglement-based continuous-variable QKD
//! with multimode Gaussian sources and multimode homodyne detectors.
//!
//! The multimode homodyne detector is modeled as a linear-optical coupling
//! (LOC) network feeding a single-mode homodyne detector. Everything is
//! carried by covariance matrices in shot-noise units; key rates are computed
//! for individual (Shannon) and collective (Holevo) attacks, with the LOC
//! auxiliary outputs treated as either trusted or untrusted.
//!
//! Module map:
//! - [`gaussian`]: covariance matrices, symplectic spectra, entropies,
//!   homodyne conditioning.
//! - [`network`]: beamsplitters, LOC synthesis from detection weights, the
//!   lossy/noisy channel.
//! - [`protocol`]: scenario assembly (source + channel + LOC on both sides).
//! - [`security`]: mutual information, eavesdropper bounds, key rates,
//!   closed forms, parameter scans.
//! - [`calibration`]: effective source/channel parameters under partial
//!   knowledge of the mode structure.
//! - [`montecarlo`]: seeded simulation of runs with fluctuating per-mode
//!   source variances.

pub mod calibration;
pub mod error;
pub mod gaussian;
pub mod montecarlo;
pub mod network;
pub mod protocol;
pub mod security;
pub mod tolerance;

pub use error::{Error, Result};
pub use gaussian::{
    bosonic_entropy, condition_on_homodyne, partial_trace, tensor, tmsv, CovarianceMatrix,
    ModeIndexSet, Quadrature,
};
pub use network::{
    apply_beamsplitter, apply_channel, apply_lossy_channel_with_environment, synthesize_loc,
    transmittance_from_distance_km, ChannelSpec, DetectionWeights,
};
pub use protocol::{
    assemble, ignorant_matrix, AssembledState, Attack, Scenario, SourceSpec, Trust,
};
pub use security::{
    holevo_bound, individual_eve_information, key_rate, mutual_information, EveBoundKind,
    KeyRateReport,
};
