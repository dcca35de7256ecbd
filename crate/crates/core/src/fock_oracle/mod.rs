//! Brute-force truncated Fock-space backend.
//!
//! Two modes, each truncated at `cutoff` photons, with dense complex matrices
//! over `|n_a, n_b⟩`. States are assembled from truncated coherent vectors,
//! loss is applied through explicit Kraus sums and every spectral quantity is
//! obtained by numerical diagonalization. Nothing here uses the closed forms
//! of the analytic modules, so it serves as their reference.

pub mod eigen;
pub mod factor;
pub mod measures;
pub mod ops;
pub mod space;

pub use eigen::{dense_eigh, hermitian_eigen, subspace_eigh, EigenPairs, EigenStrategy};
pub use factor::{negativity_on_support, FactorSpectrum, KrausFactor};
pub use measures::{
    check_density, classical_fisher, derivative_mismatch, negativity_from_factor, oracle_entropy_of_reduction,
    oracle_negativity, oracle_negativity_with, oracle_qfi, photon_counting, photon_counting_factor, pure_state_qfi,
    qfi_from_density, qfi_from_factor, CountOutcome, DensityCheck, OracleOptions, OracleQfi, EIGEN_FLOOR,
    PROBABILITY_FLOOR, SPECTRAL_CERTIFICATE,
};
pub use ops::{
    beam_splitter_50_50, loss_channel, loss_kraus, output_density, partial_transpose_a, phase_shift,
    phase_shift_vector, reduced_a, LossModes, MixingUnitary, ModeMixing,
};
pub use space::{
    auto_cutoff, auto_cutoff_for, coherent_fock, coherent_leakage, ecs_fock, even_cat_fock, FockOperator, FockVector,
    AUTO_TAIL_TARGET, LEAKAGE_BUDGET, MAX_AUTO_CUTOFF,
};

use crate::channels::LossScenario;
use crate::states::ProbeSpec;
use crate::Result;

/// Oracle QFI of the lossy output state at the scenario's phase.
///
/// The state is kept as its Kraus images. With `fd_check` set, the dense
/// output is also built at `φ ± h` to validate the derivative, which costs
/// far more than the QFI itself.
pub fn oracle_qfi_for(p: &ProbeSpec, s: &LossScenario, cutoff: usize, opts: &OracleOptions) -> Result<OracleQfi> {
    let mut out = qfi_from_factor(&KrausFactor::output(p, s, cutoff)?, opts)?;
    if opts.fd_check {
        let builder = |phi: f64| output_density(p, &s.with_phase(phi), cutoff);
        out.fd_mismatch = Some(derivative_mismatch(&builder, &builder(s.phase())?, s.phase(), opts)?);
    }
    Ok(out)
}

/// Oracle negativity of the lossy output state.
pub fn oracle_negativity_for(p: &ProbeSpec, s: &LossScenario, cutoff: usize) -> Result<f64> {
    negativity_from_factor(&KrausFactor::output(p, s, cutoff)?, 8)
}
