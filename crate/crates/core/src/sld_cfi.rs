//! Symmetric logarithmic derivative of the plus-sign output state.
//!
//! On the two-dimensional support of the output state the SLD is
//! `L = A(|λ−⟩⟨λ+| − |λ+⟩⟨λ−|)` with a purely imaginary `A`. The eigenvectors
//! `|λ±⟩` are normalized superpositions of two damped product coherent states.
//! [`verify_sld_identities`] rebuilds `L` in the truncated Fock basis and
//! checks it against the defining relation `∂ρ = (ρL + Lρ)/2`.
//!
//! The SLD eigenbasis is not a photon-counting measurement; the Fisher
//! information of counting after recombination is [`cfi_pnrd`].

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{LossModel, LossScenario};
use crate::fock_oracle::{
    coherent_fock, oracle_qfi_for, output_density, phase_shift_vector, FockVector, OracleOptions,
};
use crate::numeric::one_minus_exp_neg;
use crate::qfi::qfi_ecs;
use crate::states::{ProbeSpec, Sign};
use crate::{Error, Result};

pub use crate::qfi::{cfi_pnrd, CfiResult};

/// `|a e^{iφ}⟩_a |b⟩_b` with a real weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentTerm {
    /// Real amplitude in mode `a` before the phase `e^{iφ}`.
    pub mode_a: f64,
    pub mode_b: f64,
    pub weight: f64,
}

/// `(Σ weight·|a e^{iφ}⟩|b⟩) / normalization`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisState {
    pub terms: [CoherentTerm; 2],
    pub normalization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SldDescription {
    /// Imaginary part of `A`; the real part is zero.
    pub coefficient_a: f64,
    pub phase: f64,
    pub lambda_plus: BasisState,
    pub lambda_minus: BasisState,
    /// Overlap of the two coherent terms.
    pub component_overlap: f64,
    pub eigenbasis_note: String,
}

/// Closed-form SLD data for the plus sign.
///
/// Both arms: `|λ±⟩ ∝ |√Tα e^{iφ}⟩|√Tβ⟩ ± |√Tβ e^{iφ}⟩|√Tα⟩` and
/// `A = iT(α²−β²)(y + c) / ((1 + e^{−d2})√(1 − y²))` with `y = e^{−T d2}`,
/// `c = e^{−R d2}`.
///
/// Arm `a` only: `|λ±⟩ ∝ |√Tβ e^{iφ}⟩|α⟩ ± |√Tα e^{iφ}⟩|β⟩` and
/// `A = −iT(α²−β²)(y + c) / ((1 + e^{−d2})√(1 − y²))` with
/// `y = e^{−(1+T)d2/2}`, `c = e^{−R d2/2}`.
///
/// At `R = 1` the support collapses to the vacuum and `A` is reported as 0.
pub fn sld(p: &ProbeSpec, s: &LossScenario) -> Result<SldDescription> {
    if p.sign() != Sign::Plus {
        return Err(Error::Unsupported("the SLD description covers the plus sign only".into()));
    }
    if p.is_separable() {
        return Err(Error::DegenerateSupport);
    }
    let (a, b) = (p.alpha(), p.beta());
    let t = s.transmissivity();
    let st = t.sqrt();
    let d2 = (b - a).powi(2);
    let (ky, kc, orientation, first, second) = match s.model() {
        LossModel::BothArms => (t, s.rate(), 1.0, (st * a, st * b), (st * b, st * a)),
        LossModel::OneArmA => (0.5 * (1.0 + t), 0.5 * s.rate(), -1.0, (st * b, a), (st * a, b)),
    };
    let y = (-ky * d2).exp();
    let c = (-kc * d2).exp();
    let one_minus_y2 = one_minus_exp_neg(2.0 * ky * d2);
    let coefficient_a = if t == 0.0 || one_minus_y2 == 0.0 {
        0.0
    } else {
        orientation * t * (a * a - b * b) * (y + c) / ((1.0 + (-d2).exp()) * one_minus_y2.sqrt())
    };
    let basis = |sign: f64, norm_sq: f64| BasisState {
        terms: [
            CoherentTerm { mode_a: first.0, mode_b: first.1, weight: 1.0 },
            CoherentTerm { mode_a: second.0, mode_b: second.1, weight: sign },
        ],
        normalization: norm_sq.sqrt(),
    };
    Ok(SldDescription {
        coefficient_a,
        phase: s.phase(),
        lambda_plus: basis(1.0, 2.0 * (1.0 + y)),
        lambda_minus: basis(-1.0, 2.0 * one_minus_exp_neg(ky * d2)),
        component_overlap: y,
        eigenbasis_note: "measure in |λ+⟩ ± i|λ−⟩".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SldReport {
    /// `|Tr[ρL]|`
    pub zero_mean_residual: f64,
    /// `‖W†(∂ρ − (ρL + Lρ)/2)W‖_F` with `W = [|λ+⟩, |λ−⟩]`.
    pub lyapunov_residual_projected: f64,
    /// `‖∂ρ − (ρL + Lρ)/2‖_F` on the full truncated space.
    pub lyapunov_residual_full: f64,
    /// `Tr[ρL²]`
    pub tr_rho_l2: f64,
    /// Closed-form QFI.
    pub qfi: f64,
    /// Oracle QFI of the same density matrix.
    pub qfi_oracle: f64,
    /// `|Tr[ρL²] − F_Q|`
    pub qfi_residual: f64,
    /// `F_Q − Tr[ρL²]`: Fisher information carried by the support/null-space block.
    pub support_null_contribution: f64,
    pub coefficient_a: f64,
    /// `A = 0` although `F_Q > 0`.
    pub a_vanishes_with_positive_qfi: bool,
    /// `⟨λ+|λ−⟩` after numerical normalization in the truncated basis.
    pub basis_overlap: f64,
}

fn basis_vector(state: &BasisState, phi: f64, cutoff: usize) -> Result<FockVector> {
    let mut v = FockVector::zeros(cutoff);
    for term in &state.terms {
        let prod = FockVector::product(&coherent_fock(term.mode_a, cutoff)?, &coherent_fock(term.mode_b, cutoff)?);
        v.add_scaled(&phase_shift_vector(&prod, phi), term.weight);
    }
    if v.norm() == 0.0 {
        return Err(Error::DegenerateSupport);
    }
    Ok(v.normalized())
}

/// Rebuild `ρ`, `∂ρ = i[n̂_a, ρ]` and `L` in the truncated Fock basis and
/// measure how well `L` satisfies the SLD relations.
///
/// Everything is done with rank-2 factors `L = W C W†`, so no dense
/// matrix products are formed.
pub fn verify_sld_identities(p: &ProbeSpec, s: &LossScenario, truncation: usize) -> Result<SldReport> {
    let desc = sld(p, s)?;
    let phi = s.phase();
    let rho = output_density(p, s, truncation)?;
    let wp = basis_vector(&desc.lambda_plus, phi, truncation)?;
    let wm = basis_vector(&desc.lambda_minus, phi, truncation)?;
    let basis_overlap = wp.inner(&wm).norm();
    let w = DMatrix::from_columns(&[wp.amplitudes().clone(), wm.amplitudes().clone()]);

    let a = Complex64::new(0.0, desc.coefficient_a);
    let zero = Complex64::new(0.0, 0.0);
    // rows/cols ordered (λ+, λ−): L = A|λ−⟩⟨λ+| − A|λ+⟩⟨λ−|
    let c = Matrix2::new(zero, -a, a, zero);
    let c_dyn = DMatrix::from_fn(2, 2, |r, k| c[(r, k)]);

    let rho_w = rho.matrix() * &w;
    let m = w.adjoint() * &rho_w;
    let zero_mean_residual = (&c_dyn * &m).trace().norm();
    let tr_rho_l2 = (&c_dyn * &c_dyn * &m).trace().re;

    let d = truncation + 1;
    let number_w = DMatrix::from_fn(w.nrows(), 2, |r, k| w[(r, k)] * (r / d) as f64);
    let i = Complex64::new(0.0, 1.0);
    // W†∂ρW = i((n̂W)†ρW − (ρW)†n̂W)
    let dm = (number_w.adjoint() * &rho_w - rho_w.adjoint() * &number_w) * i;
    let sym_small = (&m * &c_dyn + &c_dyn * &m) * Complex64::from(0.5);
    let lyapunov_residual_projected = (dm - sym_small).norm();

    let drho = rho.phase_generator_commutator();
    let rho_l = &rho_w * &c_dyn * w.adjoint();
    let sym = (&rho_l + rho_l.adjoint()) * Complex64::from(0.5);
    let lyapunov_residual_full = (drho.matrix() - sym).norm();

    let qfi = qfi_ecs(p, s)?.value;
    let qfi_oracle = oracle_qfi_for(p, s, truncation, &OracleOptions::default())?.value;
    Ok(SldReport {
        zero_mean_residual,
        lyapunov_residual_projected,
        lyapunov_residual_full,
        tr_rho_l2,
        qfi,
        qfi_oracle,
        qfi_residual: (tr_rho_l2 - qfi).abs(),
        support_null_contribution: qfi - tr_rho_l2,
        coefficient_a: desc.coefficient_a,
        a_vanishes_with_positive_qfi: desc.coefficient_a.abs() < 1e-12 && qfi > 1e-9,
        basis_overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scen(model: LossModel, r: f64) -> LossScenario {
        LossScenario::new(model, r, 0.0).unwrap()
    }

    #[test]
    fn opposite_amplitudes_give_zero_coefficient() {
        for model in [LossModel::BothArms, LossModel::OneArmA] {
            for r in [0.0, 0.3, 0.8] {
                let d = sld(&ProbeSpec::plus(1.0, -1.0).unwrap(), &scen(model, r)).unwrap();
                assert_eq!(d.coefficient_a, 0.0);
            }
        }
    }

    #[test]
    fn rejects_degenerate_and_minus() {
        assert_eq!(
            sld(&ProbeSpec::plus(0.5, 0.5).unwrap(), &scen(LossModel::BothArms, 0.1)),
            Err(Error::DegenerateSupport)
        );
        let m = ProbeSpec::new(1.0, 0.0, Sign::Minus).unwrap();
        assert!(sld(&m, &scen(LossModel::BothArms, 0.1)).is_err());
    }

    #[test]
    fn lossless_pure_state_identities() {
        let r =
            verify_sld_identities(&ProbeSpec::plus(1.0, 0.0).unwrap(), &scen(LossModel::BothArms, 0.0), 20).unwrap();
        assert!(r.zero_mean_residual < 1e-8);
        assert!(r.lyapunov_residual_projected < 1e-8);
        assert!(r.basis_overlap < 1e-12);
    }

    #[test]
    fn support_block_is_exact_under_loss() {
        for model in [LossModel::BothArms, LossModel::OneArmA] {
            let s = LossScenario::new(model, 0.4, 0.6).unwrap();
            let r = verify_sld_identities(&ProbeSpec::plus(1.0, 0.3).unwrap(), &s, 18).unwrap();
            assert!(r.zero_mean_residual < 1e-8, "{model:?}");
            assert!(r.lyapunov_residual_projected < 1e-8, "{model:?}");
            assert_abs_diff_eq!(r.qfi, r.qfi_oracle, epsilon = 1e-7);
        }
    }
}
