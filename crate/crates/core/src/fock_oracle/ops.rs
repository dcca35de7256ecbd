use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::space::{ecs_fock, FockOperator, FockVector};
use crate::channels::{LossModel, LossScenario};
use crate::states::ProbeSpec;
use crate::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which modes a loss channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossModes {
    A,
    B,
    Both,
}

impl From<LossModel> for LossModes {
    fn from(m: LossModel) -> Self {
        match m {
            LossModel::BothArms => LossModes::Both,
            LossModel::OneArmA => LossModes::A,
        }
    }
}

/// `exp(iφn̂_a) ρ exp(−iφn̂_a)`.
pub fn phase_shift(op: &FockOperator, phi: f64) -> FockOperator {
    let d = op.cutoff() + 1;
    let n = op.dim();
    let mut out = op.clone();
    let m = out.matrix_mut();
    let phases: Vec<Complex64> = (0..d).map(|k| Complex64::from_polar(1.0, phi * k as f64)).collect();
    for c in 0..n {
        let pc = phases[c / d].conj();
        for r in 0..n {
            m[(r, c)] *= phases[r / d] * pc;
        }
    }
    out
}

/// `exp(iφn̂_a)|ψ⟩`.
pub fn phase_shift_vector(psi: &FockVector, phi: f64) -> FockVector {
    let d = psi.cutoff() + 1;
    let amps =
        DVector::from_fn(psi.dim(), |i, _| psi.amplitudes()[i] * Complex64::from_polar(1.0, phi * (i / d) as f64));
    FockVector::from_amplitudes(psi.cutoff(), amps)
}

/// Kraus weights `w[n][k] = √C(n+k, k) T^{n/2} R^{k/2}` of the single-mode
/// loss channel, `K_k = Σ_n w[n][k] |n⟩⟨n+k|`.
#[allow(clippy::needless_range_loop)]
pub(crate) fn loss_weights(rate: f64, cutoff: usize) -> Vec<Vec<f64>> {
    let t = 1.0 - rate;
    let d = cutoff + 1;
    let mut w = vec![vec![0.0; d]; d];
    for n in 0..d {
        for k in 0..d - n {
            // ln C(n+k, k)
            let ln_binom: f64 = (1..=k).map(|j| ((n + j) as f64).ln() - (j as f64).ln()).sum();
            w[n][k] = (0.5 * ln_binom).exp() * t.powf(0.5 * n as f64) * rate.powf(0.5 * k as f64);
        }
    }
    w
}

/// Explicit single-mode Kraus operators of the loss channel (for checks and small problems).
pub fn loss_kraus(rate: f64, cutoff: usize) -> Vec<DMatrix<f64>> {
    let w = loss_weights(rate, cutoff);
    let d = cutoff + 1;
    (0..d)
        .map(|k| {
            let mut m = DMatrix::zeros(d, d);
            for n in 0..d - k {
                m[(n, n + k)] = w[n][k];
            }
            m
        })
        .collect()
}

/// Photon loss with rate `R` on the selected modes, `ρ → Σ_k K_k ρ K_k†`.
///
/// The channel is trace preserving on the truncated space: every Kraus
/// operator only lowers photon numbers.
pub fn loss_channel(op: &FockOperator, rate: f64, modes: LossModes) -> FockOperator {
    if rate == 0.0 {
        return op.clone();
    }
    let w = loss_weights(rate, op.cutoff());
    match modes {
        LossModes::A => loss_on_a(op, &w),
        LossModes::B => loss_on_b(op, &w),
        LossModes::Both => loss_on_b(&loss_on_a(op, &w), &w),
    }
}

fn loss_on_a(op: &FockOperator, w: &[Vec<f64>]) -> FockOperator {
    let cutoff = op.cutoff();
    let d = cutoff + 1;
    let n = op.dim();
    let src = op.matrix().as_slice();
    let mut out = FockOperator::zeros(cutoff);
    let dst = out.matrix_mut().as_mut_slice();
    // ρ'[(n,x),(m,y)] = Σ_k w[n][k] w[m][k] ρ[(n+k,x),(m+k,y)]
    for m in 0..d {
        for y in 0..d {
            let col = m * d + y;
            let dst_col = &mut dst[col * n..(col + 1) * n];
            for k in 0..d - m {
                let wm = w[m][k];
                if wm == 0.0 {
                    continue;
                }
                let src_col = &src[((m + k) * d + y) * n..((m + k) * d + y + 1) * n];
                for na in 0..d - k {
                    let weight = w[na][k] * wm;
                    if weight == 0.0 {
                        continue;
                    }
                    let from = &src_col[(na + k) * d..(na + k + 1) * d];
                    let to = &mut dst_col[na * d..(na + 1) * d];
                    for (t, f) in to.iter_mut().zip(from) {
                        *t += f * weight;
                    }
                }
            }
        }
    }
    out
}

fn loss_on_b(op: &FockOperator, w: &[Vec<f64>]) -> FockOperator {
    let cutoff = op.cutoff();
    let d = cutoff + 1;
    let n = op.dim();
    let src = op.matrix().as_slice();
    let mut out = FockOperator::zeros(cutoff);
    let dst = out.matrix_mut().as_mut_slice();
    // ρ'[(n,x),(m,y)] = Σ_k w[x][k] w[y][k] ρ[(n,x+k),(m,y+k)]
    let mut wk = vec![0.0; d];
    for m in 0..d {
        for y in 0..d {
            let col = m * d + y;
            let dst_col = &mut dst[col * n..(col + 1) * n];
            for k in 0..d - y {
                let wy = w[y][k];
                if wy == 0.0 {
                    continue;
                }
                for (x, slot) in wk.iter_mut().enumerate().take(d - k) {
                    *slot = w[x][k] * wy;
                }
                let src_col = &src[(m * d + y + k) * n..(m * d + y + k + 1) * n];
                for na in 0..d {
                    let from = &src_col[na * d + k..(na + 1) * d];
                    let to = &mut dst_col[na * d..na * d + d - k];
                    for ((t, f), &c) in to.iter_mut().zip(from).zip(&wk) {
                        *t += f * c;
                    }
                }
            }
        }
    }
    out
}

/// Output density matrix: prepare the probe, apply the phase, then loss.
pub fn output_density(p: &ProbeSpec, s: &LossScenario, cutoff: usize) -> Result<FockOperator> {
    let psi = ecs_fock(p, cutoff)?;
    let rho = phase_shift(&psi.projector(), s.phase());
    Ok(loss_channel(&rho, s.rate(), s.model().into()))
}

/// Partial transpose on mode `a`: `ρ^{T_a}[(n,x),(m,y)] = ρ[(m,x),(n,y)]`.
pub fn partial_transpose_a(op: &FockOperator) -> FockOperator {
    let d = op.cutoff() + 1;
    let src = op.matrix();
    let mut out = FockOperator::zeros(op.cutoff());
    let dst = out.matrix_mut();
    for m in 0..d {
        for y in 0..d {
            for n in 0..d {
                for x in 0..d {
                    dst[(n * d + x, m * d + y)] = src[(m * d + x, n * d + y)];
                }
            }
        }
    }
    out
}

/// Reduced density matrix of mode `a` for a pure state.
pub fn reduced_a(psi: &FockVector) -> DMatrix<Complex64> {
    let d = psi.cutoff() + 1;
    // M[n_a, n_b] = ψ(n_a, n_b); ρ_a = M M†
    let m = DMatrix::from_fn(d, d, |na, nb| psi.amplitude(na, nb));
    &m * m.adjoint()
}

/// Linear two-mode mixing `a† → c_aa a† + c_ab b†`, `b† → c_ba a† + c_bb b†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMixing {
    pub c_aa: f64,
    pub c_ab: f64,
    pub c_ba: f64,
    pub c_bb: f64,
}

impl ModeMixing {
    /// `a† → (a† + b†)/√2`, `b† → (b† − a†)/√2`.
    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { c_aa: h, c_ab: h, c_ba: -h, c_bb: h }
    }

    /// The inverse of [`ModeMixing::balanced`].
    pub fn balanced_inverse() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { c_aa: h, c_ab: -h, c_ba: h, c_bb: h }
    }
}

/// Block-diagonal unitary of a [`ModeMixing`], one block per total photon number.
///
/// `columns[k][m]` holds the image of `|k, m⟩` as amplitudes over
/// `|p, k+m−p⟩`, `p = 0..=k+m`. Columns are built by applying the mixed
/// creation operators one photon at a time, which avoids the alternating
/// binomial sums of the closed-form matrix elements.
pub struct MixingUnitary {
    cutoff: usize,
    columns: Vec<Vec<Vec<f64>>>,
}

impl MixingUnitary {
    #[allow(clippy::needless_range_loop)]
    pub fn new(mixing: ModeMixing, cutoff: usize) -> Self {
        let d = cutoff + 1;
        let mut columns: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); d]; d];
        columns[0][0] = vec![1.0];
        for m in 1..d {
            let prev = &columns[0][m - 1];
            columns[0][m] = create(prev, mixing.c_ba, mixing.c_bb, 1.0 / (m as f64).sqrt());
        }
        for k in 1..d {
            for m in 0..d {
                let prev = &columns[k - 1][m];
                columns[k][m] = create(prev, mixing.c_aa, mixing.c_ab, 1.0 / (k as f64).sqrt());
            }
        }
        Self { cutoff, columns }
    }

    /// Image of `|k, m⟩` over `|p, k+m−p⟩`.
    pub fn column(&self, k: usize, m: usize) -> &[f64] {
        &self.columns[k][m]
    }

    /// Apply to a state; output components beyond the cutoff are dropped.
    pub fn apply(&self, psi: &FockVector) -> FockVector {
        assert_eq!(psi.cutoff(), self.cutoff);
        let d = self.cutoff + 1;
        let mut out = FockVector::zeros(self.cutoff);
        let mut amps = out.amplitudes().clone();
        for k in 0..d {
            for m in 0..d {
                let a = psi.amplitude(k, m);
                if a == ZERO {
                    continue;
                }
                let total = k + m;
                for (p, &u) in self.columns[k][m].iter().enumerate() {
                    let q = total - p;
                    if p < d && q < d {
                        amps[p * d + q] += a * u;
                    }
                }
            }
        }
        out = FockVector::from_amplitudes(self.cutoff, amps);
        out
    }

    /// Amplitudes of `U|ψ⟩` over every output pair, in the order of
    /// [`Self::output_diagonal`]. `amps` is indexed like [`FockVector`].
    pub fn output_amplitudes(&self, amps: &DVector<Complex64>) -> Vec<Complex64> {
        let d = self.cutoff + 1;
        assert_eq!(amps.len(), d * d);
        let n = 2 * self.cutoff + 1;
        let mut out = vec![ZERO; n * (n + 1) / 2];
        for k in 0..d {
            for m in 0..d {
                let a = amps[k * d + m];
                if a == ZERO {
                    continue;
                }
                let base = (k + m) * (k + m + 1) / 2;
                for (p, &u) in self.columns[k][m].iter().enumerate() {
                    out[base + p] += a * u;
                }
            }
        }
        out
    }

    /// Diagonal of `U ρ U†` over every output pair `(p, q)`, including
    /// outputs beyond the input cutoff. Returned as `(p, q, value)` triples in
    /// order of increasing total photon number, then `p`.
    pub fn output_diagonal(&self, op: &FockOperator) -> Vec<(usize, usize, f64)> {
        assert_eq!(op.cutoff(), self.cutoff);
        let d = self.cutoff + 1;
        let rho = op.matrix();
        let mut out = Vec::new();
        for total in 0..=2 * self.cutoff {
            let inputs: Vec<(usize, usize)> =
                (0..=total).filter(|&k| k < d && total - k < d).map(|k| (k, total - k)).collect();
            for p in 0..=total {
                let q = total - p;
                let mut acc = ZERO;
                for &(k, m) in &inputs {
                    let uk = self.columns[k][m][p];
                    if uk == 0.0 {
                        continue;
                    }
                    let row = k * d + m;
                    for &(k2, m2) in &inputs {
                        let u2 = self.columns[k2][m2][p];
                        if u2 == 0.0 {
                            continue;
                        }
                        acc += rho[(row, k2 * d + m2)] * (uk * u2);
                    }
                }
                out.push((p, q, acc.re));
            }
        }
        out
    }
}

/// Apply `c_a a† + c_b b†` to a block vector over `|p, n−1−p⟩` and scale.
fn create(prev: &[f64], c_a: f64, c_b: f64, scale: f64) -> Vec<f64> {
    let n = prev.len(); // new total photon number
    let mut next = vec![0.0; n + 1];
    for (p, &v) in prev.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let q = n - 1 - p;
        next[p + 1] += c_a * ((p + 1) as f64).sqrt() * v;
        next[p] += c_b * ((q + 1) as f64).sqrt() * v;
    }
    next.iter_mut().for_each(|x| *x *= scale);
    next
}

/// 50:50 beam splitter `a† → (a† + b†)/√2`, `b† → (b† − a†)/√2`.
pub fn beam_splitter_50_50(psi: &FockVector) -> FockVector {
    MixingUnitary::new(ModeMixing::balanced(), psi.cutoff()).apply(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_oracle::space::coherent_fock;
    use approx::assert_abs_diff_eq;

    fn kraus_reference(op: &FockOperator, rate: f64, modes: LossModes) -> FockOperator {
        let d = op.cutoff() + 1;
        let eye = DMatrix::<f64>::identity(d, d);
        let ks = loss_kraus(rate, op.cutoff());
        let lift = |k: &DMatrix<f64>, on_a: bool| -> DMatrix<Complex64> {
            let full = if on_a { k.kronecker(&eye) } else { eye.kronecker(k) };
            full.map(|x| Complex64::new(x, 0.0))
        };
        let mut rho = op.matrix().clone();
        if matches!(modes, LossModes::A | LossModes::Both) {
            rho = ks
                .iter()
                .map(|k| lift(k, true))
                .fold(DMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| acc + &k * &rho * k.adjoint());
        }
        if matches!(modes, LossModes::B | LossModes::Both) {
            rho = ks
                .iter()
                .map(|k| lift(k, false))
                .fold(DMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| acc + &k * &rho * k.adjoint());
        }
        FockOperator::from_matrix(op.cutoff(), rho)
    }

    fn small_state() -> FockOperator {
        let p = ProbeSpec::plus(0.9, -0.4).unwrap();
        let psi = ecs_fock(&p, 11).unwrap();
        phase_shift(&psi.projector(), 0.37)
    }

    #[test]
    fn kraus_completeness() {
        let ks = loss_kraus(0.35, 8);
        let sum = ks.iter().fold(DMatrix::<f64>::zeros(9, 9), |acc, k| acc + k.transpose() * k);
        assert!((sum - DMatrix::<f64>::identity(9, 9)).amax() < 1e-13);
    }

    #[test]
    fn elementwise_channel_matches_explicit_kraus() {
        let rho = small_state();
        for modes in [LossModes::A, LossModes::B, LossModes::Both] {
            let fast = loss_channel(&rho, 0.3, modes);
            let slow = kraus_reference(&rho, 0.3, modes);
            assert!(fast.max_abs_diff(&slow) < 1e-14, "{modes:?}");
        }
    }

    #[test]
    fn zero_loss_is_identity_and_full_loss_is_vacuum() {
        let rho = small_state();
        assert!(loss_channel(&rho, 0.0, LossModes::Both).max_abs_diff(&rho) < 1e-12);
        let vac = loss_channel(&rho, 1.0, LossModes::Both);
        let expect = FockVector::vacuum(rho.cutoff()).projector();
        assert!(vac.max_abs_diff(&expect) < 1e-12);
        // one arm: mode a reduced to vacuum, mode b untouched
        let a_only = loss_channel(&rho, 1.0, LossModes::A);
        let d = rho.cutoff() + 1;
        for r in 0..a_only.dim() {
            for c in 0..a_only.dim() {
                if r / d != 0 || c / d != 0 {
                    assert!(a_only.matrix()[(r, c)].norm() < 1e-15);
                }
            }
        }
        assert_abs_diff_eq!(a_only.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_through_beam_splitter() {
        let vac = FockVector::vacuum(6);
        assert!(beam_splitter_50_50(&vac).fidelity(&vac) > 1.0 - 1e-15);
    }

    #[test]
    fn beam_splitter_preserves_norm() {
        let a = coherent_fock(0.8, 24).unwrap();
        let b = coherent_fock(-0.5, 24).unwrap();
        let psi = FockVector::product(&a, &b);
        assert_abs_diff_eq!(beam_splitter_50_50(&psi).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn beam_splitter_moves_coherent_amplitudes() {
        // |γ⟩|δ⟩ → |(γ−δ)/√2⟩|(γ+δ)/√2⟩
        let n = 30;
        let psi = FockVector::product(&coherent_fock(1.1, n).unwrap(), &coherent_fock(0.3, n).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = FockVector::product(
            &coherent_fock((1.1 - 0.3) * h, n).unwrap(),
            &coherent_fock((1.1 + 0.3) * h, n).unwrap(),
        );
        assert!(beam_splitter_50_50(&psi).fidelity(&expect) > 1.0 - 1e-12);
    }

    #[test]
    fn inverse_mixing_undoes_balanced_mixing() {
        let n = 20;
        let psi = FockVector::product(&coherent_fock(0.7, n).unwrap(), &coherent_fock(-0.2, n).unwrap());
        let fwd = MixingUnitary::new(ModeMixing::balanced(), n).apply(&psi);
        let back = MixingUnitary::new(ModeMixing::balanced_inverse(), n).apply(&fwd);
        assert!(back.fidelity(&psi) > 1.0 - 1e-12);
    }

    #[test]
    fn mixing_columns_are_orthonormal_per_block() {
        let u = MixingUnitary::new(ModeMixing::balanced(), 10);
        for total in 0..=10usize {
            for k1 in 0..=total {
                for k2 in 0..=total {
                    let c1 = u.column(k1, total - k1);
                    let c2 = u.column(k2, total - k2);
                    let dot: f64 = c1.iter().zip(c2).map(|(a, b)| a * b).sum();
                    let expect = if k1 == k2 { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(dot, expect, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn output_diagonal_sums_to_trace() {
        let rho = loss_channel(&small_state(), 0.2, LossModes::Both);
        let u = MixingUnitary::new(ModeMixing::balanced_inverse(), rho.cutoff());
        let total: f64 = u.output_diagonal(&rho).iter().map(|t| t.2).sum();
        assert_abs_diff_eq!(total, rho.trace().re, epsilon = 1e-10);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let rho = small_state();
        let twice = partial_transpose_a(&partial_transpose_a(&rho));
        assert_eq!(twice, rho);
    }
}
