//! Entangled coherent state (ECS) probes for phase estimation in lossy
//! two-mode interferometers.
//!
//! The probe is `|α⟩_a|β⟩_b ± |β⟩_a|α⟩_b` with real amplitudes. A phase
//! `exp(iφ n̂_a)` acts on mode `a`, then photon loss with rate `R` acts on
//! both arms or on arm `a` only. The crate provides:
//!
//! - [`states`]: normalization, mean photon number, degree of entanglement
//!   and the beam-splitter preparation recipe.
//! - [`channels`]: the rank-2 spectral description of the lossy output state.
//! - [`qfi`]: closed-form quantum Fisher information, the separable coherent
//!   baseline, energy-matched comparisons and photon-counting Fisher
//!   information.
//! - [`economical`]: the QFI-per-photon ratio and its maximization over `β`.
//! - [`entanglement`]: closed-form negativity of the output state.
//! - [`sld_cfi`]: the symmetric logarithmic derivative, its verification, and
//!   the photon-counting Fisher information it is compared with.
//! - [`fock_oracle`]: an independent brute-force truncated Fock-space backend
//!   that every closed form above is checked against.
//! - [`cli`]: the command-line front end used by the `ecs-metrology` binary.
//!
//! ```
//! use ecs_metrology::{channels::{LossModel, LossScenario}, qfi, states::{ProbeSpec, Sign}};
//!
//! let probe = ProbeSpec::new(1.0, 0.0, Sign::Plus).unwrap();
//! let scenario = LossScenario::new(LossModel::BothArms, 0.2, 0.0).unwrap();
//! let result = qfi::qfi_ecs(&probe, &scenario).unwrap();
//! assert!(result.value > 0.0);
//! ```

pub mod channels;
pub mod cli;
pub mod economical;
pub mod entanglement;
mod error;
pub mod fock_oracle;
pub mod numeric;
pub mod qfi;
pub mod sld_cfi;
pub mod states;

pub use error::{Error, Result};
