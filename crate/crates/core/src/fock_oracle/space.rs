use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::states::ProbeSpec;
use crate::{Error, Result};

/// Probability a truncated single-mode state may lose before it is rejected.
pub const LEAKAGE_BUDGET: f64 = 1e-10;

/// Tail target for [`auto_cutoff`]: `Σ_{n>N} n² P(n)` of the widest coherent component.
pub const AUTO_TAIL_TARGET: f64 = 1e-14;

/// Upper bound on automatically chosen cutoffs (dense matrices grow as `(N+1)⁴`).
pub const MAX_AUTO_CUTOFF: usize = 96;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two-mode state vector over `|n_a, n_b⟩`, `0 ≤ n_a, n_b ≤ cutoff`.
///
/// Amplitudes are stored with `n_b` fastest: index `n_a·(cutoff+1) + n_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    cutoff: usize,
    amps: DVector<Complex64>,
}

impl FockVector {
    pub fn zeros(cutoff: usize) -> Self {
        let d = cutoff + 1;
        Self { cutoff, amps: DVector::from_element(d * d, ZERO) }
    }

    pub fn from_amplitudes(cutoff: usize, amps: DVector<Complex64>) -> Self {
        assert_eq!(amps.len(), (cutoff + 1) * (cutoff + 1), "amplitude length does not match cutoff");
        Self { cutoff, amps }
    }

    /// `|a⟩ ⊗ |b⟩` from single-mode amplitude sequences of equal length.
    pub fn product(mode_a: &[f64], mode_b: &[f64]) -> Self {
        assert_eq!(mode_a.len(), mode_b.len());
        let d = mode_a.len();
        let amps = DVector::from_fn(d * d, |i, _| Complex64::new(mode_a[i / d] * mode_b[i % d], 0.0));
        Self { cutoff: d - 1, amps }
    }

    pub fn vacuum(cutoff: usize) -> Self {
        let mut v = Self::zeros(cutoff);
        v.amps[0] = Complex64::new(1.0, 0.0);
        v
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    #[inline]
    pub fn amplitude(&self, na: usize, nb: usize) -> Complex64 {
        self.amps[na * (self.cutoff + 1) + nb]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.unscale_mut(n);
        }
        self
    }

    pub fn add_scaled(&mut self, other: &FockVector, scale: f64) {
        assert_eq!(self.cutoff, other.cutoff);
        self.amps.axpy(Complex64::new(scale, 0.0), &other.amps, Complex64::new(1.0, 0.0));
    }

    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²` for normalized vectors.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> FockOperator {
        FockOperator { cutoff: self.cutoff, matrix: &self.amps * self.amps.adjoint() }
    }

    /// `⟨n̂_a^k⟩` for `k = 1, 2`.
    pub fn number_a_moments(&self) -> (f64, f64) {
        let d = self.cutoff + 1;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let n = (i / d) as f64;
            let w = a.norm_sqr();
            m1 += n * w;
            m2 += n * n * w;
        }
        (m1, m2)
    }
}

/// Dense operator on the truncated two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    cutoff: usize,
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn from_matrix(cutoff: usize, matrix: DMatrix<Complex64>) -> Self {
        let d = (cutoff + 1) * (cutoff + 1);
        assert_eq!(matrix.shape(), (d, d), "operator shape does not match cutoff");
        Self { cutoff, matrix }
    }

    pub fn zeros(cutoff: usize) -> Self {
        let d = (cutoff + 1) * (cutoff + 1);
        Self { cutoff, matrix: DMatrix::from_element(d, d, ZERO) }
    }

    /// Diagonal `n̂_a`.
    pub fn number_a(cutoff: usize) -> Self {
        let d = cutoff + 1;
        let diag = DVector::from_fn(d * d, |i, _| Complex64::new((i / d) as f64, 0.0));
        Self { cutoff, matrix: DMatrix::from_diagonal(&diag) }
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    #[inline]
    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..n {
            for r in 0..=c {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        assert_eq!(self.cutoff, other.cutoff);
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }

    /// `⟨u|A|v⟩`.
    pub fn sandwich(&self, u: &DVector<Complex64>, v: &DVector<Complex64>) -> Complex64 {
        u.dotc(&(&self.matrix * v))
    }

    /// `i[n̂_a, ρ]`, the phase derivative of `exp(iφn̂_a) ρ exp(−iφn̂_a)`.
    pub fn phase_generator_commutator(&self) -> FockOperator {
        let d = self.cutoff + 1;
        let n = self.dim();
        let mut out = self.matrix.clone();
        for c in 0..n {
            let nc = (c / d) as f64;
            for r in 0..n {
                let nr = (r / d) as f64;
                out[(r, c)] *= Complex64::new(0.0, nr - nc);
            }
        }
        FockOperator { cutoff: self.cutoff, matrix: out }
    }
}

/// Probability mass of `|α⟩` above `cutoff`, summed directly from the tail.
pub fn coherent_leakage(alpha: f64, cutoff: usize) -> f64 {
    weighted_tail(alpha, cutoff, 0)
}

/// `Σ_{n>cutoff} n^power · e^{−α²} α^{2n}/n!`.
fn weighted_tail(alpha: f64, cutoff: usize, power: i32) -> f64 {
    let mean = alpha * alpha;
    if mean == 0.0 {
        return 0.0;
    }
    // log of the Poisson weight at n = cutoff + 1
    let n0 = cutoff + 1;
    let mut log_w = -mean + n0 as f64 * mean.ln() - ln_factorial(n0);
    let mut sum = 0.0;
    let mut n = n0;
    loop {
        let term = log_w.exp() * (n as f64).powi(power);
        sum += term;
        if (n as f64) > mean && term < 1e-30 * sum.max(1e-300) {
            break;
        }
        if n > n0 + 10_000 {
            break;
        }
        n += 1;
        log_w += mean.ln() - (n as f64).ln();
    }
    sum
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Smallest cutoff whose `n²`-weighted coherent tail is below [`AUTO_TAIL_TARGET`].
pub fn auto_cutoff(max_amplitude: f64) -> usize {
    let a = max_amplitude.abs();
    let start = (a * a).ceil() as usize + 4;
    (start.max(8)..=MAX_AUTO_CUTOFF).find(|&n| weighted_tail(a, n, 2) < AUTO_TAIL_TARGET).unwrap_or(MAX_AUTO_CUTOFF)
}

/// Cutoff for a probe, covering both amplitudes.
pub fn auto_cutoff_for(p: &ProbeSpec) -> usize {
    auto_cutoff(p.alpha().abs().max(p.beta().abs()))
}

/// Normalized truncated coherent state `e^{−α²/2} Σ αⁿ/√n! |n⟩`.
pub fn coherent_fock(alpha: f64, cutoff: usize) -> Result<Vec<f64>> {
    let leakage = coherent_leakage(alpha, cutoff);
    if leakage > LEAKAGE_BUDGET {
        return Err(Error::Truncation { cutoff, leakage, budget: LEAKAGE_BUDGET });
    }
    let mut amps = coherent_fock_raw(alpha, cutoff);
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok(amps)
}

/// Unnormalized truncated coefficients, built by the recurrence `c_n = c_{n−1} α/√n`.
pub fn coherent_fock_raw(alpha: f64, cutoff: usize) -> Vec<f64> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = (-0.5 * alpha * alpha).exp();
    amps.push(c);
    for n in 1..=cutoff {
        c *= alpha / (n as f64).sqrt();
        amps.push(c);
    }
    amps
}

/// Normalized even-cat state `|γ⟩ + |−γ⟩`.
pub fn even_cat_fock(gamma: f64, cutoff: usize) -> Result<Vec<f64>> {
    if gamma == 0.0 {
        return coherent_fock(0.0, cutoff);
    }
    let plus = coherent_fock(gamma, cutoff)?;
    let minus = coherent_fock(-gamma, cutoff)?;
    let mut amps: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| p + m).collect();
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok(amps)
}

/// `(|α⟩|β⟩ ± |β⟩|α⟩)` built from truncated coherent vectors and normalized numerically.
pub fn ecs_fock(p: &ProbeSpec, cutoff: usize) -> Result<FockVector> {
    let ca = coherent_fock(p.alpha(), cutoff)?;
    let cb = coherent_fock(p.beta(), cutoff)?;
    let mut psi = FockVector::product(&ca, &cb);
    psi.add_scaled(&FockVector::product(&cb, &ca), p.sign().factor());
    if psi.norm() == 0.0 {
        return Err(Error::DegenerateMinus);
    }
    Ok(psi.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_coherent_state() {
        let v = coherent_fock(0.0, 10).unwrap();
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn coherent_ground_amplitude() {
        let v = coherent_fock(1.0, 30).unwrap();
        assert_abs_diff_eq!(v[0], (-0.5f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn coherent_mean_photon_number() {
        let v = coherent_fock(3.0, 40).unwrap();
        let mean: f64 = v.iter().enumerate().map(|(n, a)| n as f64 * a * a).sum();
        assert_abs_diff_eq!(mean, 9.0, epsilon = 1e-8);
    }

    #[test]
    fn leakage_budget_enforced() {
        assert!(matches!(coherent_fock(3.0, 10), Err(Error::Truncation { .. })));
        let raw = coherent_fock_raw(2.0, 12);
        let kept: f64 = raw.iter().map(|a| a * a).sum();
        assert_abs_diff_eq!(1.0 - kept, coherent_leakage(2.0, 12), epsilon = 1e-14);
    }

    #[test]
    fn auto_cutoff_grows_with_amplitude() {
        let small = auto_cutoff(0.5);
        let big = auto_cutoff(3.0);
        assert!(small < big);
        assert!(coherent_leakage(3.0, big) < 1e-15);
    }

    #[test]
    fn ecs_vector_is_normalized_and_symmetric() {
        let p = ProbeSpec::plus(1.0, -0.4).unwrap();
        let psi = ecs_fock(&p, 20).unwrap();
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        for na in 0..5 {
            for nb in 0..5 {
                assert_abs_diff_eq!(psi.amplitude(na, nb).re, psi.amplitude(nb, na).re, epsilon = 1e-15);
            }
        }
    }
}
