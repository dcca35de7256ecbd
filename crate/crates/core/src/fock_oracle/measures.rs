use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{hermitian_eigen, EigenStrategy};
use super::factor::{negativity_on_support, KrausFactor};
use super::ops::{partial_transpose_a, reduced_a, MixingUnitary, ModeMixing};
use super::space::{FockOperator, FockVector};
use crate::numeric::entropy_bits;
use crate::{Error, Result};

/// Eigenvalues at or below this are treated as the null space in the QFI sum.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Outcomes at or below this probability enter the classical Fisher sum
/// through their zero-probability limit instead of `(∂P)²/P`.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

/// Largest unresolved spectral weight tolerated from a truncated eigensolve.
pub const SPECTRAL_CERTIFICATE: f64 = 1e-9;

/// Eigenvalues of `ρ` kept when building the partial transpose on the support.
pub const NEGATIVITY_SUPPORT_FLOOR: f64 = 1e-15;

/// Relative singular-value cut for the local supports.
pub const LOCAL_SUPPORT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub floor: f64,
    /// Compare `i[n̂_a, ρ]` against a central difference of the builder.
    pub fd_check: bool,
    pub fd_step: f64,
    pub fd_tolerance: f64,
    pub strategy: EigenStrategy,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            floor: EIGEN_FLOOR,
            fd_check: false,
            fd_step: 1e-5,
            fd_tolerance: 1e-6,
            strategy: EigenStrategy::Auto { block: 6 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleQfi {
    pub value: f64,
    /// Eigenvalues above the floor.
    pub support: Vec<f64>,
    /// Contribution of the support/null-space cross terms.
    pub null_completion: f64,
    /// Frobenius certificate of the eigensolve.
    pub eigen_residual: f64,
    /// Largest elementwise gap between analytic and finite-difference derivatives.
    pub fd_mismatch: Option<f64>,
}

/// Quantum Fisher information of `ρ(φ)` at `φ0`.
///
/// Uses `∂ρ = i[n̂_a, ρ]` and the spectral formula
/// `Σ 2|⟨m|∂ρ|n⟩|²/(λ_n + λ_m)` over pairs with at least one eigenvalue above
/// the floor. Pairs with one index in the null space are summed in closed
/// form from `‖∂ρ|n⟩‖²`, so only the support has to be resolved.
pub fn oracle_qfi<F>(builder: F, phi0: f64, opts: &OracleOptions) -> Result<OracleQfi>
where
    F: Fn(f64) -> Result<FockOperator>,
{
    let rho = builder(phi0)?;
    let fd_mismatch = if opts.fd_check { Some(derivative_mismatch(&builder, &rho, phi0, opts)?) } else { None };
    let mut out = qfi_from_density(&rho, opts)?;
    out.fd_mismatch = fd_mismatch;
    Ok(out)
}

/// Largest elementwise gap between `i[n̂_a, ρ]` and a central difference of
/// `builder` around `φ0`; errors when it exceeds `opts.fd_tolerance`.
pub fn derivative_mismatch<F>(builder: &F, rho: &FockOperator, phi0: f64, opts: &OracleOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<FockOperator>,
{
    let h = opts.fd_step;
    let up = builder(phi0 + h)?;
    let down = builder(phi0 - h)?;
    let analytic = rho.phase_generator_commutator();
    let fd = (up.matrix() - down.matrix()) / Complex64::from(2.0 * h);
    let gap = (analytic.matrix() - fd).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if gap > opts.fd_tolerance {
        return Err(Error::DerivativeMismatch(gap));
    }
    Ok(gap)
}

/// QFI of a density matrix under the generator `n̂_a`.
pub fn qfi_from_density(rho: &FockOperator, opts: &OracleOptions) -> Result<OracleQfi> {
    let eig = hermitian_eigen(rho.matrix(), opts.strategy)?;
    if eig.residual > SPECTRAL_CERTIFICATE {
        return Err(Error::Eigen(format!("resolved spectrum leaves {:e} unaccounted for", eig.residual)));
    }
    Ok(qfi_from_spectrum(&eig.values, &eig.vectors, eig.residual, |v| rho.apply(v), rho.cutoff(), opts.floor))
}

/// QFI of `ρ = ΦΦ†` given as Kraus images, without forming `ρ`.
pub fn qfi_from_factor(rho: &KrausFactor, opts: &OracleOptions) -> Result<OracleQfi> {
    let block = match opts.strategy {
        EigenStrategy::Dense => rho.rank_bound(),
        EigenStrategy::Subspace { block } | EigenStrategy::Auto { block } => block,
    };
    let sp = rho.spectrum(block)?;
    if sp.residual > SPECTRAL_CERTIFICATE {
        return Err(Error::Eigen(format!("resolved spectrum leaves {:e} unaccounted for", sp.residual)));
    }
    Ok(qfi_from_spectrum(&sp.values, &sp.vectors, sp.residual, |v| rho.apply(v), rho.cutoff(), opts.floor))
}

/// Spectral QFI sum over the resolved eigenpairs, with `apply` computing `ρv`.
fn qfi_from_spectrum<A>(
    values: &[f64],
    vectors: &DMatrix<Complex64>,
    residual: f64,
    apply: A,
    cutoff: usize,
    floor: f64,
) -> OracleQfi
where
    A: Fn(&DVector<Complex64>) -> DVector<Complex64>,
{
    let d = cutoff + 1;
    let number =
        |v: &DVector<Complex64>| -> DVector<Complex64> { DVector::from_fn(v.len(), |i, _| v[i] * (i / d) as f64) };
    let support: Vec<usize> = (0..values.len()).filter(|&i| values[i] > floor).collect();
    let vecs: Vec<DVector<Complex64>> = support.iter().map(|&i| vectors.column(i).into_owned()).collect();
    let lams: Vec<f64> = support.iter().map(|&i| values[i]).collect();

    // ∂ρ|n⟩ = i(λ_n n̂_a|n⟩ − ρ n̂_a|n⟩)
    let i = Complex64::new(0.0, 1.0);
    let dvecs: Vec<DVector<Complex64>> = vecs
        .iter()
        .zip(&lams)
        .map(|(v, &l)| {
            let nv = number(v);
            (nv.clone() * Complex64::from(l) - apply(&nv)) * i
        })
        .collect();

    let mut inner = 0.0;
    let mut completion = 0.0;
    for (n, dv) in dvecs.iter().enumerate() {
        let mut captured = 0.0;
        for (m, v) in vecs.iter().enumerate() {
            let amp = v.dotc(dv).norm_sqr();
            captured += amp;
            inner += 2.0 * amp / (lams[n] + lams[m]);
        }
        completion += 4.0 / lams[n] * (dv.norm_squared() - captured).max(0.0);
    }
    OracleQfi {
        value: inner + completion,
        support: lams,
        null_completion: completion,
        eigen_residual: residual,
        fd_mismatch: None,
    }
}

/// Negativity of `ρ = ΦΦ†` from its support.
///
/// The support is resolved as in [`qfi_from_factor`] and the partial transpose
/// is diagonalized on the local supports. Discarded eigenvalues carry at most
/// `residual` trace weight, which moves the negativity by no more than
/// `residual · (cutoff + 1) / 2`.
pub fn negativity_from_factor(rho: &KrausFactor, block: usize) -> Result<f64> {
    let sp = rho.spectrum(block)?;
    if sp.residual > SPECTRAL_CERTIFICATE {
        return Err(Error::Eigen(format!("resolved spectrum leaves {:e} unaccounted for", sp.residual)));
    }
    let keep: Vec<usize> = (0..sp.values.len()).filter(|&i| sp.values[i] > NEGATIVITY_SUPPORT_FLOOR).collect();
    let values: Vec<f64> = keep.iter().map(|&i| sp.values[i]).collect();
    let vectors = DMatrix::from_columns(&keep.iter().map(|&i| sp.vectors.column(i).into_owned()).collect::<Vec<_>>());
    negativity_on_support(&values, &vectors, rho.cutoff(), LOCAL_SUPPORT_FLOOR)
}

/// Pure-state QFI `4(⟨n̂_a²⟩ − ⟨n̂_a⟩²)`.
pub fn pure_state_qfi(psi: &FockVector) -> f64 {
    let (m1, m2) = psi.number_a_moments();
    4.0 * (m2 - m1 * m1)
}

/// Negativity `Σ |negative eigenvalues of ρ^{T_a}|`.
pub fn oracle_negativity(rho: &FockOperator) -> Result<f64> {
    oracle_negativity_with(rho, EigenStrategy::Auto { block: 8 })
}

pub fn oracle_negativity_with(rho: &FockOperator, strategy: EigenStrategy) -> Result<f64> {
    let pt = partial_transpose_a(rho);
    let eig = hermitian_eigen(pt.matrix(), strategy)?;
    if eig.residual > SPECTRAL_CERTIFICATE {
        return Err(Error::Eigen(format!("partial-transpose spectrum leaves {:e} unaccounted for", eig.residual)));
    }
    Ok(eig.values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// Von Neumann entropy of the mode-`a` reduced state, in bits.
pub fn oracle_entropy_of_reduction(psi: &FockVector) -> Result<f64> {
    let rho_a = reduced_a(psi);
    let eig = SymmetricEigen::try_new(rho_a, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("reduced-state eigensolver did not converge".into()))?;
    Ok(entropy_bits(eig.eigenvalues.iter().copied()))
}

/// One photon-counting outcome after the detection mixing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountOutcome {
    pub n_a: usize,
    pub n_b: usize,
    pub probability: f64,
    pub derivative: f64,
    /// `2∂²P`, the limit of `(∂P)²/P` at a phase where `P` vanishes.
    pub curvature_limit: f64,
}

/// Joint photon-number statistics of `ρ` after the mixing `U`, read off the
/// diagonals of `UρU†`, `U∂ρU†` and `U∂²ρU†`.
pub fn photon_counting(rho: &FockOperator, mixing: ModeMixing) -> Vec<CountOutcome> {
    let u = MixingUnitary::new(mixing, rho.cutoff());
    let drho = rho.phase_generator_commutator();
    let p = u.output_diagonal(rho);
    let dp = u.output_diagonal(&drho);
    let d2p = u.output_diagonal(&drho.phase_generator_commutator());
    p.into_iter()
        .zip(dp)
        .zip(d2p)
        .map(|(((n_a, n_b, probability), (_, _, derivative)), (_, _, second))| CountOutcome {
            n_a,
            n_b,
            probability,
            derivative,
            curvature_limit: 2.0 * second,
        })
        .collect()
}

/// Photon-number statistics of `ρ = ΦΦ†` from the amplitudes `U|φ_j⟩` and
/// `U i n̂_a|φ_j⟩`. Small probabilities keep their relative accuracy, which
/// the diagonal of `UρU†` loses to cancellation near interference zeros.
pub fn photon_counting_factor(f: &KrausFactor, mixing: ModeMixing) -> Vec<CountOutcome> {
    let cutoff = f.cutoff();
    let d = cutoff + 1;
    let u = MixingUnitary::new(mixing, cutoff);
    let n = 2 * cutoff + 1;
    let len = n * (n + 1) / 2;
    let (mut p, mut dp, mut dd) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let i = Complex64::new(0.0, 1.0);
    for col in f.columns() {
        let a = u.output_amplitudes(col);
        let gen = DVector::from_fn(d * d, |r, _| col[r] * i * (r / d) as f64);
        let da = u.output_amplitudes(&gen);
        for k in 0..len {
            p[k] += a[k].norm_sqr();
            dp[k] += 2.0 * (a[k].conj() * da[k]).re;
            dd[k] += da[k].norm_sqr();
        }
    }
    let mut out = Vec::with_capacity(len);
    let mut k = 0;
    for total in 0..n {
        for n_a in 0..=total {
            out.push(CountOutcome {
                n_a,
                n_b: total - n_a,
                probability: p[k],
                derivative: dp[k],
                curvature_limit: 4.0 * dd[k],
            });
            k += 1;
        }
    }
    out
}

/// Classical Fisher information `Σ (∂P)²/P`; outcomes at or below `floor`
/// contribute their curvature limit, which keeps the sum continuous in `φ`
/// across phases where an outcome is forbidden.
pub fn classical_fisher(outcomes: &[CountOutcome], floor: f64) -> f64 {
    outcomes
        .iter()
        .map(|o| if o.probability > floor { o.derivative * o.derivative / o.probability } else { o.curvature_limit })
        .sum()
}

/// Validity of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityCheck {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityCheck {
    pub fn is_valid(&self) -> bool {
        self.hermiticity <= 1e-12 && self.trace_error <= 1e-10 && self.min_eigenvalue >= -1e-10
    }
}

/// Dense check of Hermiticity, unit trace and positivity.
pub fn check_density(rho: &FockOperator) -> Result<DensityCheck> {
    let eig = hermitian_eigen(rho.matrix(), EigenStrategy::Dense)?;
    Ok(DensityCheck {
        hermiticity: rho.hermiticity_defect(),
        trace_error: (rho.trace() - Complex64::from(1.0)).norm(),
        min_eigenvalue: eig.values.last().copied().unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{LossModel, LossScenario};
    use crate::fock_oracle::ops::{loss_channel, output_density, phase_shift, LossModes};
    use crate::fock_oracle::space::{coherent_fock, ecs_fock};
    use crate::states::{ProbeSpec, Sign};
    use approx::assert_abs_diff_eq;

    #[test]
    fn separable_coherent_baseline() {
        let n = 22;
        let c = coherent_fock(1.2, n).unwrap();
        let psi = FockVector::product(&c, &c);
        let r = 0.35;
        let rho = loss_channel(&psi.projector(), r, LossModes::Both);
        let q = qfi_from_density(&rho, &OracleOptions::default()).unwrap();
        assert_abs_diff_eq!(q.value, 4.0 * (1.0 - r) * 1.44, epsilon = 1e-8);
    }

    #[test]
    fn pure_state_matches_variance() {
        let p = ProbeSpec::plus(1.0, -0.4).unwrap();
        let psi = ecs_fock(&p, 20).unwrap();
        let q = qfi_from_density(&psi.projector(), &OracleOptions::default()).unwrap();
        assert_abs_diff_eq!(q.value, pure_state_qfi(&psi), epsilon = 1e-9);
    }

    #[test]
    fn derivative_check_passes_and_qfi_is_phase_independent() {
        let p = ProbeSpec::new(1.0, 0.2, Sign::Minus).unwrap();
        let opts = OracleOptions { fd_check: true, ..OracleOptions::default() };
        let vals: Vec<f64> = [0.0, 0.7, 2.1]
            .iter()
            .map(|&phi| {
                let q =
                    oracle_qfi(|f| output_density(&p, &LossScenario::new(LossModel::OneArmA, 0.3, f)?, 18), phi, &opts)
                        .unwrap();
                assert!(q.fd_mismatch.unwrap() < 1e-6);
                q.value
            })
            .collect();
        assert_abs_diff_eq!(vals[0], vals[1], epsilon = 1e-9);
        assert_abs_diff_eq!(vals[0], vals[2], epsilon = 1e-9);
    }

    #[test]
    fn product_state_has_no_entanglement() {
        let c = coherent_fock(0.8, 16).unwrap();
        let d = coherent_fock(-0.3, 16).unwrap();
        let psi = FockVector::product(&c, &d);
        assert!(oracle_negativity(&psi.projector()).unwrap() < 1e-12);
        assert!(oracle_entropy_of_reduction(&psi).unwrap().abs() < 1e-10);
    }

    #[test]
    fn balanced_ecs_carries_one_bit() {
        let p = ProbeSpec::plus(3.0, -3.0).unwrap();
        let psi = ecs_fock(&p, 40).unwrap();
        assert_abs_diff_eq!(oracle_entropy_of_reduction(&psi).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn counting_statistics_are_normalized() {
        let p = ProbeSpec::plus(1.0, 0.0).unwrap();
        let rho = phase_shift(&ecs_fock(&p, 14).unwrap().projector(), 0.4);
        let out = photon_counting(&rho, ModeMixing::balanced_inverse());
        let total: f64 = out.iter().map(|o| o.probability).sum();
        let dtotal: f64 = out.iter().map(|o| o.derivative).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dtotal, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn factor_counting_matches_density_counting() {
        // β = 0 at φ = π/2 forbids whole families of outcomes
        let p = ProbeSpec::plus(0.9, 0.0).unwrap();
        let s = LossScenario::new(LossModel::BothArms, 0.3, std::f64::consts::FRAC_PI_2).unwrap();
        let dense = photon_counting(&output_density(&p, &s, 12).unwrap(), ModeMixing::balanced_inverse());
        let fact = photon_counting_factor(&KrausFactor::output(&p, &s, 12).unwrap(), ModeMixing::balanced_inverse());
        assert_eq!(dense.len(), fact.len());
        let mut zeros = 0;
        for (a, b) in dense.iter().zip(&fact) {
            assert_eq!((a.n_a, a.n_b), (b.n_a, b.n_b));
            assert_abs_diff_eq!(a.probability, b.probability, epsilon = 1e-13);
            assert_abs_diff_eq!(a.derivative, b.derivative, epsilon = 1e-12);
            if b.probability < 1e-20 {
                zeros += 1;
                assert_abs_diff_eq!(a.curvature_limit, b.curvature_limit, epsilon = 1e-10);
            }
        }
        assert!(zeros > 0);
    }

    #[test]
    fn density_check_flags_valid_state() {
        let p = ProbeSpec::plus(0.7, 0.1).unwrap();
        let s = LossScenario::new(LossModel::BothArms, 0.25, 0.3).unwrap();
        let rho = output_density(&p, &s, 12).unwrap();
        assert!(check_density(&rho).unwrap().is_valid());
    }
}
