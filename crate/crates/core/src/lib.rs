//! Classical, quantum and entanglement-assisted capacities of a lossy bosonic
//! Gaussian channel whose environment is an `n`-mode squeezed thermal state.
//!
//! Modules, bottom-up:
//!
//! - [`gaussian`]: entropies and symplectic spectra of Gaussian states.
//! - [`channel`]: the memory channel, its environment in the local and global
//!   bases, and passive-diagonalizable environments.
//! - [`analytic`]: closed-form bounds, optimal parameters and asymptotics.
//! - [`entropic`]: per-mode Holevo information, coherent information and
//!   quantum mutual information, with gradients.
//! - [`optimize`], [`allocation`], [`oracle`]: numerical maximization over
//!   Gaussian encodings, photon water-filling and a brute-force grid oracle.
//! - [`entanglement`]: seed-state entanglement and environment separability.
//! - [`scan`]: parameter sweeps and figure data.

pub mod allocation;
pub mod analytic;
pub mod channel;
pub mod entanglement;
pub mod entropic;
pub mod error;
pub mod gaussian;
pub mod optimize;
pub mod oracle;
pub mod scan;
mod solve;

pub use channel::{ChannelConfig, GlobalEnvMode, OmegaSpectrum, PassiveEnvSpec};
pub use error::{Error, Result};
pub use gaussian::{g_entropy, GeneralCov, SingleModeCov, TwoModeCov};
pub use optimize::{maximize_classical, maximize_ent_assisted, maximize_quantum, OptResult};
