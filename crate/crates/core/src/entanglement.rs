//! Negativity of the lossy output state, plus sign only.

use serde::Serialize;

use crate::channels::{LossModel, LossScenario};
use crate::numeric::one_minus_exp_neg;
use crate::states::{ProbeSpec, Sign};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NegativityResult {
    pub value: f64,
    pub model: LossModel,
    pub probe: ProbeSpec,
    pub scenario: LossScenario,
}

fn require_plus(p: &ProbeSpec) -> Result<()> {
    if p.sign() != Sign::Plus {
        return Err(Error::Unsupported("closed-form negativity is only available for the plus sign".into()));
    }
    Ok(())
}

/// `(e^{T d2} − 1) / (2(1 + e^{d2}))`, evaluated as
/// `e^{−R d2}(1 − e^{−T d2}) / (2(1 + e^{−d2}))` to avoid overflow.
pub fn negativity_both_arms(p: &ProbeSpec, s: &LossScenario) -> Result<NegativityResult> {
    require_plus(p)?;
    if s.model() != LossModel::BothArms {
        return Err(Error::Unsupported("negativity_both_arms needs the both-arms loss model".into()));
    }
    let d2 = (p.beta() - p.alpha()).powi(2);
    let value = (-s.rate() * d2).exp() * one_minus_exp_neg(s.transmissivity() * d2) / (2.0 * (1.0 + (-d2).exp()));
    Ok(NegativityResult { value, model: s.model(), probe: *p, scenario: *s })
}

/// The `B` coefficients of the one-arm expression, with `c = e^{−R d2/2}`,
/// `p = e^{−T d2/2}`, `q = e^{−d2/2}`:
/// `B1 = 8(1−c)(1−pq)`, `B2 = 8(1−c)(p−q)`, `B3 = 16(1+c)²(1−p²)(1−q²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneArmCoefficients {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub n_t: f64,
}

pub fn one_arm_coefficients(p: &ProbeSpec, s: &LossScenario) -> OneArmCoefficients {
    let d2 = (p.beta() - p.alpha()).powi(2);
    let (r, t) = (s.rate(), s.transmissivity());
    let one_minus_c = one_minus_exp_neg(0.5 * r * d2);
    let c = (-0.5 * r * d2).exp();
    OneArmCoefficients {
        b1: 8.0 * one_minus_c * one_minus_exp_neg(0.5 * (1.0 + t) * d2),
        b2: 8.0 * one_minus_c * ((-0.5 * t * d2).exp() - (-0.5 * d2).exp()),
        b3: 16.0 * (1.0 + c).powi(2) * one_minus_exp_neg(t * d2) * one_minus_exp_neg(d2),
        n_t: 2.0 * (1.0 + (-d2).exp()),
    }
}

/// `|B1 − √(B2² + 4B3)| / (16 N_T)`.
///
/// The partial transpose has one negative eigenvalue,
/// `[(1−c)(1−pq) − √((1−c)²(1−pq)² + 4c(1−p²)(1−q²))] / (2N_T)`, and the
/// discriminant rewrites as `(B2² + 4B3)/64`. With `−4B3` in place of `+4B3`
/// the discriminant is negative for every `0 < R < 1`; see
/// [`one_arm_alternative_discriminant`].
pub fn negativity_one_arm(p: &ProbeSpec, s: &LossScenario) -> Result<NegativityResult> {
    require_plus(p)?;
    if s.model() != LossModel::OneArmA {
        return Err(Error::Unsupported("negativity_one_arm needs the one-arm loss model".into()));
    }
    let b = one_arm_coefficients(p, s);
    let discriminant = b.b2 * b.b2 + 4.0 * b.b3;
    if discriminant.is_nan() || discriminant < 0.0 {
        return Err(Error::FormulaDomain { discriminant, oracle: None });
    }
    let value = (b.b1 - discriminant.sqrt()).abs() / (16.0 * b.n_t);
    Ok(NegativityResult { value, model: s.model(), probe: *p, scenario: *s })
}

/// `B2² − 4B3`, the discriminant with the opposite sign on `B3`.
pub fn one_arm_alternative_discriminant(p: &ProbeSpec, s: &LossScenario) -> f64 {
    let b = one_arm_coefficients(p, s);
    b.b2 * b.b2 - 4.0 * b.b3
}

/// Dispatches on the loss model.
pub fn negativity(p: &ProbeSpec, s: &LossScenario) -> Result<NegativityResult> {
    match s.model() {
        LossModel::BothArms => negativity_both_arms(p, s),
        LossModel::OneArmA => negativity_one_arm(p, s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn scen(model: LossModel, r: f64) -> LossScenario {
        LossScenario::new(model, r, 0.0).unwrap()
    }

    #[test]
    fn vanishing_cases() {
        let p = ProbeSpec::plus(1.3, -0.4).unwrap();
        assert_eq!(negativity_both_arms(&p, &scen(LossModel::BothArms, 1.0)).unwrap().value, 0.0);
        assert_eq!(negativity_one_arm(&p, &scen(LossModel::OneArmA, 1.0)).unwrap().value, 0.0);
        let sep = ProbeSpec::plus(0.8, 0.8).unwrap();
        assert_eq!(negativity_both_arms(&sep, &scen(LossModel::BothArms, 0.3)).unwrap().value, 0.0);
        assert_eq!(negativity_one_arm(&sep, &scen(LossModel::OneArmA, 0.3)).unwrap().value, 0.0);
    }

    #[test]
    fn lossless_models_agree() {
        let p = ProbeSpec::plus(1.0, 0.0).unwrap();
        let a = negativity_both_arms(&p, &scen(LossModel::BothArms, 0.0)).unwrap().value;
        let b = negativity_one_arm(&p, &scen(LossModel::OneArmA, 0.0)).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn matches_unsimplified_both_arm_expression() {
        let (a, b, r) = (1.0f64, 0.0f64, 0.3f64);
        let d2 = (b - a).powi(2);
        let direct = (((1.0 - r) * d2).exp() - 1.0) / (2.0 * (1.0 + d2.exp()));
        let p = ProbeSpec::plus(a, b).unwrap();
        assert_abs_diff_eq!(
            negativity_both_arms(&p, &scen(LossModel::BothArms, r)).unwrap().value,
            direct,
            epsilon = 1e-15
        );
    }

    #[test]
    fn alternative_discriminant_is_negative_under_partial_loss() {
        let p = ProbeSpec::plus(1.0, 0.0).unwrap();
        assert!(one_arm_alternative_discriminant(&p, &scen(LossModel::OneArmA, 0.4)) < 0.0);
    }

    #[test]
    fn minus_sign_is_unsupported() {
        let m = ProbeSpec::new(1.0, 0.0, Sign::Minus).unwrap();
        assert!(matches!(negativity(&m, &scen(LossModel::BothArms, 0.1)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn large_amplitude_does_not_overflow() {
        let p = ProbeSpec::plus(30.0, -30.0).unwrap();
        let v = negativity_both_arms(&p, &scen(LossModel::BothArms, 0.0)).unwrap().value;
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn both_arm_negativity_decreases_with_loss(a in -3.0f64..3.0, b in -3.0f64..3.0, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
            let p = ProbeSpec::plus(a, b).unwrap();
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let n_lo = negativity_both_arms(&p, &scen(LossModel::BothArms, lo)).unwrap().value;
            let n_hi = negativity_both_arms(&p, &scen(LossModel::BothArms, hi)).unwrap().value;
            prop_assert!(n_hi <= n_lo + 1e-15);
            prop_assert!(n_hi >= 0.0);
        }

        #[test]
        fn one_arm_negativity_is_bounded(a in -3.0f64..3.0, b in -3.0f64..3.0, r in 0.0f64..1.0) {
            let p = ProbeSpec::plus(a, b).unwrap();
            let v = negativity_one_arm(&p, &scen(LossModel::OneArmA, r)).unwrap().value;
            prop_assert!((0.0..=0.5 + 1e-12).contains(&v));
        }
    }
}
