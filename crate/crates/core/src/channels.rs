//! Rank-2 spectral description of the phase-shifted, lossy output state.
//!
//! After the phase `exp(iφ n̂_a)` and loss, the output is
//! `ρ ∝ |u⟩⟨u| + |v⟩⟨v| ± c(|u⟩⟨v| + |v⟩⟨u|)` where `|u⟩`, `|v⟩` are the two
//! damped product coherent states, `y = ⟨u|v⟩` is their overlap and `c` is the
//! overlap of the corresponding environment states. The eigenvectors are
//! `|λ±⟩ = (|u⟩ ± |v⟩)/√(2(1 ± y))` for both signs; only the eigenvalues
//! depend on the sign. All quantities are independent of `φ`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::numeric::one_minus_exp_neg;
use crate::states::{ProbeSpec, Sign};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossModel {
    /// Equal loss on both arms.
    BothArms,
    /// Loss on arm `a` only (the arm carrying the phase).
    OneArmA,
}

impl fmt::Display for LossModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossModel::BothArms => "both",
            LossModel::OneArmA => "one",
        })
    }
}

impl FromStr for LossModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "both" | "both_arms" | "both-arms" => Ok(LossModel::BothArms),
            "one" | "one_arm" | "one-arm" | "one_arm_a" | "a" => Ok(LossModel::OneArmA),
            other => Err(Error::Config(format!("unknown loss model '{other}' (expected both|one)"))),
        }
    }
}

/// Loss model, photon loss rate `R` and phase `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossScenario {
    model: LossModel,
    rate: f64,
    phase: f64,
}

impl LossScenario {
    pub fn new(model: LossModel, rate: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidScenario(format!("loss rate {rate} outside [0, 1]")));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidScenario(format!("phase {phase} is not finite")));
        }
        Ok(Self { model, rate, phase })
    }

    pub fn lossless(model: LossModel) -> Self {
        Self { model, rate: 0.0, phase: 0.0 }
    }

    #[inline]
    pub fn model(&self) -> LossModel {
        self.model
    }

    #[inline]
    pub fn rate(&self) -> f64 {
        self.rate
    }

    #[inline]
    pub fn transmissivity(&self) -> f64 {
        1.0 - self.rate
    }

    #[inline]
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_rate(self, rate: f64) -> Result<Self> {
        Self::new(self.model, rate, self.phase)
    }

    /// Exponent coefficients `(k_y, k_c)` such that the output overlap is
    /// `y = exp(−k_y d2)` and the environment overlap is `c = exp(−k_c d2)`.
    pub(crate) fn overlap_exponents(&self) -> (f64, f64) {
        let t = self.transmissivity();
        match self.model {
            LossModel::BothArms => (t, self.rate),
            LossModel::OneArmA => (0.5 * (1.0 + t), 0.5 * self.rate),
        }
    }
}

/// Eigenvalues and derivative inner products of the rank-2 output.
///
/// With `|λ'±⟩ = ∂φ|λ±⟩ = i n̂_a|λ±⟩`:
/// - `gpp`, `gmm` are `⟨λ'±|λ'±⟩ = ⟨λ±|n̂_a²|λ±⟩`;
/// - `hpp`, `hmm` are the magnitudes of the purely imaginary
///   `⟨λ'±|λ±⟩ = −i·h±`;
/// - `cross` is the signed real factor in `⟨λ'+|λ−⟩ = ⟨λ'−|λ+⟩ = i·cross_phase·cross`.
///
/// `cross_phase` is `−1` for loss in both arms and `+1` for loss in one arm,
/// matching the orientation of the one-arm eigenvectors `(|v⟩ ± |u⟩)`.
/// Only `|cross|²` enters the QFI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPair {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub gpp: f64,
    pub gmm: f64,
    pub hpp: f64,
    pub hmm: f64,
    pub cross: f64,
    pub cross_phase: f64,
    /// Overlap `⟨u|v⟩` of the two output components.
    pub component_overlap: f64,
    /// Environment overlap multiplying the coherence terms.
    pub coherence_factor: f64,
}

impl SpectralPair {
    pub fn eigenvalue_sum(&self) -> f64 {
        self.lambda_plus + self.lambda_minus
    }
}

/// Loss in both arms, plus sign.
pub fn spectral_both_arms(p: &ProbeSpec, s: &LossScenario) -> Result<SpectralPair> {
    if s.model() != LossModel::BothArms {
        return Err(Error::Unsupported("spectral_both_arms needs the both-arms loss model".into()));
    }
    if p.sign() != Sign::Plus {
        return Err(Error::Unsupported("use spectral_minus for the minus-sign state".into()));
    }
    spectral_pair(p, s)
}

/// Loss in arm `a` only, plus sign.
pub fn spectral_one_arm(p: &ProbeSpec, s: &LossScenario) -> Result<SpectralPair> {
    if s.model() != LossModel::OneArmA {
        return Err(Error::Unsupported("spectral_one_arm needs the one-arm loss model".into()));
    }
    if p.sign() != Sign::Plus {
        return Err(Error::Unsupported("use spectral_minus for the minus-sign state".into()));
    }
    spectral_pair(p, s)
}

/// Minus sign, either loss model.
pub fn spectral_minus(p: &ProbeSpec, s: &LossScenario) -> Result<SpectralPair> {
    if p.sign() != Sign::Minus {
        return Err(Error::Unsupported("spectral_minus needs the minus-sign state".into()));
    }
    spectral_pair(p, s)
}

/// Dispatches on model and sign.
pub fn spectral_pair(p: &ProbeSpec, s: &LossScenario) -> Result<SpectralPair> {
    if p.is_separable() {
        return Err(Error::DegenerateSupport);
    }
    let (a, b) = (p.alpha(), p.beta());
    let t = s.transmissivity();
    let d2 = (b - a).powi(2);
    let (ky, kc) = s.overlap_exponents();

    let y = (-ky * d2).exp();
    let one_minus_y = one_minus_exp_neg(ky * d2);
    let c = (-kc * d2).exp();
    let one_minus_c = one_minus_exp_neg(kc * d2);
    let n_t = p.overlaps().n_t;

    let (lambda_plus, lambda_minus) = match p.sign() {
        Sign::Plus => ((1.0 + y) * (1.0 + c) / n_t, one_minus_y * one_minus_c / n_t),
        Sign::Minus => ((1.0 + y) * one_minus_c / n_t, one_minus_y * (1.0 + c) / n_t),
    };

    let cross_phase = match s.model() {
        LossModel::BothArms => -1.0,
        LossModel::OneArmA => 1.0,
    };

    // Both arms at R = 1: the two components collapse onto the vacuum and
    // every derivative inner product carries a factor T = 0.
    if t == 0.0 || one_minus_y == 0.0 {
        return Ok(SpectralPair {
            lambda_plus,
            lambda_minus,
            gpp: 0.0,
            gmm: 0.0,
            hpp: 0.0,
            hmm: 0.0,
            cross: 0.0,
            cross_phase,
            component_overlap: y,
            coherence_factor: c,
        });
    }

    let ab = a * b;
    let diff_sq = (a * a - b * b).powi(2);
    // ⟨λσ|n̂|λσ⟩ = T[α² + β² + 2σαβy] / (2(1+σy)) = T d2 / (2(1+σy)) + Tαβ
    // ⟨λσ|n̂²|λσ⟩ = T[d2 + T(α²−β²)²] / (2(1+σy)) + Tαβ(1 + Tαβ)
    let h = |den: f64| t * d2 / (2.0 * den) + t * ab;
    let g = |den: f64| t * (d2 + t * diff_sq) / (2.0 * den) + t * ab * (1.0 + t * ab);
    let one_minus_y2 = one_minus_exp_neg(2.0 * ky * d2);

    Ok(SpectralPair {
        lambda_plus,
        lambda_minus,
        gpp: g(1.0 + y),
        gmm: g(one_minus_y),
        hpp: h(1.0 + y),
        hmm: h(one_minus_y),
        cross: t * (a * a - b * b) / (2.0 * one_minus_y2.sqrt()),
        cross_phase,
        component_overlap: y,
        coherence_factor: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn scen(model: LossModel, r: f64) -> LossScenario {
        LossScenario::new(model, r, 0.0).unwrap()
    }

    /// Direct transcription of the textbook ingredients, used as a second route.
    fn textbook(a: f64, b: f64, r: f64, model: LossModel) -> (f64, f64, f64, f64, f64, f64, f64) {
        let t = 1.0 - r;
        let d2 = (b - a).powi(2);
        let (ey, ec) = match model {
            LossModel::BothArms => ((-t * d2).exp(), (-r * d2).exp()),
            LossModel::OneArmA => ((-0.5 * (1.0 + t) * d2).exp(), (-0.5 * r * d2).exp()),
        };
        let lp = (1.0 + ec) * (1.0 + ey) / (2.0 * (1.0 + (-d2).exp()));
        let lm = (1.0 - ec) * (1.0 - ey) / (2.0 * (1.0 + (-d2).exp()));
        let g = |s: f64| {
            t / (2.0 * (1.0 + s * ey))
                * (a * a * (t * a * a + 1.0) + b * b * (t * b * b + 1.0) + s * 2.0 * a * b * (t * a * b + 1.0) * ey)
        };
        let h = |s: f64| t / (2.0 * (1.0 + s * ey)) * (a * a + b * b + s * 2.0 * a * b * ey);
        let cross = t * (a * a - b * b) / (2.0 * (1.0 - ey * ey).sqrt());
        (lp, lm, g(1.0), g(-1.0), h(1.0), h(-1.0), cross)
    }

    #[test]
    fn stable_rewrite_matches_textbook_form() {
        for model in [LossModel::BothArms, LossModel::OneArmA] {
            for &(a, b, r) in &[(1.0, 0.0, 0.2), (1.8, -0.9, 0.5), (0.5, 0.35, 0.9), (3.0, 2.1, 0.1)] {
                let sp = spectral_pair(&ProbeSpec::plus(a, b).unwrap(), &scen(model, r)).unwrap();
                let (lp, lm, gp, gm, hp, hm, cr) = textbook(a, b, r, model);
                assert_abs_diff_eq!(sp.lambda_plus, lp, epsilon = 1e-13);
                assert_abs_diff_eq!(sp.lambda_minus, lm, epsilon = 1e-13);
                assert_abs_diff_eq!(sp.gpp, gp, epsilon = 1e-11);
                assert_abs_diff_eq!(sp.gmm, gm, epsilon = 1e-9);
                assert_abs_diff_eq!(sp.hpp, hp, epsilon = 1e-12);
                assert_abs_diff_eq!(sp.hmm, hm, epsilon = 1e-10);
                assert_abs_diff_eq!(sp.cross, cr, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn full_loss_kills_derivatives() {
        let sp = spectral_both_arms(&ProbeSpec::plus(1.3, -0.2).unwrap(), &scen(LossModel::BothArms, 1.0)).unwrap();
        assert_eq!((sp.gpp, sp.gmm, sp.cross), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(sp.lambda_plus, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cross_vanishes_for_opposite_amplitudes() {
        let sp = spectral_both_arms(&ProbeSpec::plus(1.0, -1.0).unwrap(), &scen(LossModel::BothArms, 0.3)).unwrap();
        assert_eq!(sp.cross, 0.0);
        let sp = spectral_one_arm(&ProbeSpec::plus(2.0, -2.0).unwrap(), &scen(LossModel::OneArmA, 0.2)).unwrap();
        assert_eq!(sp.cross, 0.0);
        let m = ProbeSpec::new(1.0, -1.0, Sign::Minus).unwrap();
        for r in [0.0, 0.4, 0.8] {
            assert_eq!(spectral_minus(&m, &scen(LossModel::OneArmA, r)).unwrap().cross, 0.0);
        }
    }

    #[test]
    fn lossless_limit_is_model_independent() {
        let p = ProbeSpec::plus(1.0, 0.0).unwrap();
        let both = spectral_both_arms(&p, &scen(LossModel::BothArms, 0.0)).unwrap();
        let one = spectral_one_arm(&p, &scen(LossModel::OneArmA, 0.0)).unwrap();
        assert_abs_diff_eq!(both.lambda_plus, one.lambda_plus, epsilon = 1e-12);
        assert_abs_diff_eq!(both.lambda_minus, one.lambda_minus, epsilon = 1e-12);
        assert_abs_diff_eq!(both.gpp, one.gpp, epsilon = 1e-12);
        assert_abs_diff_eq!(both.gmm, one.gmm, epsilon = 1e-12);
        assert_abs_diff_eq!(both.hpp, one.hpp, epsilon = 1e-12);
        assert_abs_diff_eq!(both.hmm, one.hmm, epsilon = 1e-12);
        assert_abs_diff_eq!(both.cross.abs(), one.cross.abs(), epsilon = 1e-12);
    }

    #[test]
    fn precondition_errors() {
        let p = ProbeSpec::plus(0.5, 0.5).unwrap();
        assert_eq!(spectral_pair(&p, &scen(LossModel::BothArms, 0.1)), Err(Error::DegenerateSupport));
        let p = ProbeSpec::plus(0.5, 0.1).unwrap();
        assert!(spectral_one_arm(&p, &scen(LossModel::BothArms, 0.1)).is_err());
        assert!(spectral_minus(&p, &scen(LossModel::BothArms, 0.1)).is_err());
        assert!(LossScenario::new(LossModel::BothArms, 1.2, 0.0).is_err());
        assert!(LossScenario::new(LossModel::BothArms, -0.1, 0.0).is_err());
    }

    #[test]
    fn parse_model_and_sign() {
        assert_eq!("both".parse::<LossModel>().unwrap(), LossModel::BothArms);
        assert_eq!("one".parse::<LossModel>().unwrap(), LossModel::OneArmA);
        assert!("three".parse::<LossModel>().is_err());
    }

    proptest! {
        #[test]
        fn eigenvalues_form_a_distribution(
            a in -3.0f64..3.0, b in -3.0f64..3.0, r in 0.0f64..=1.0,
            both in any::<bool>(), minus in any::<bool>(),
        ) {
            prop_assume!((a - b).abs() > 1e-6);
            let model = if both { LossModel::BothArms } else { LossModel::OneArmA };
            let sign = if minus { Sign::Minus } else { Sign::Plus };
            let sp = spectral_pair(&ProbeSpec::new(a, b, sign).unwrap(), &scen(model, r)).unwrap();
            prop_assert!(sp.lambda_plus >= 0.0 && sp.lambda_minus >= 0.0);
            prop_assert!((sp.eigenvalue_sum() - 1.0).abs() < 1e-12);
            prop_assert!(sp.gpp >= 0.0 && sp.gmm >= 0.0);
        }

        #[test]
        fn phase_does_not_enter(a in -2.0f64..2.0, b in -2.0f64..2.0, r in 0.0f64..1.0, phi in -7.0f64..7.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let p = ProbeSpec::plus(a, b).unwrap();
            let s0 = scen(LossModel::BothArms, r);
            prop_assert_eq!(spectral_pair(&p, &s0).unwrap(), spectral_pair(&p, &s0.with_phase(phi)).unwrap());
        }
    }
}
