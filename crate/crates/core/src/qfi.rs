//! Quantum Fisher information of the lossy ECS output and comparisons
//! against a separable coherent probe.

use serde::Serialize;

use crate::channels::{spectral_pair, LossScenario};
use crate::fock_oracle::{classical_fisher, photon_counting_factor, KrausFactor, ModeMixing, PROBABILITY_FLOOR};
use crate::numeric::bisect;
use crate::states::{mean_photon_a, ProbeSpec, Sign};
use crate::{Error, Result};

/// Minimum mean photon number per mode of the minus-sign state (reached as `α, β → 0`).
pub const MINUS_MIN_ENERGY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiResult {
    pub value: f64,
    /// `4Σ_k λ_k(⟨λ'_k|λ'_k⟩ − |⟨λ'_k|λ_k⟩|²)`
    pub variance_term: f64,
    /// `(8λ+λ−/(λ++λ−))(|⟨λ'+|λ−⟩|² + |⟨λ'−|λ+⟩|²)`
    pub coherence_penalty: f64,
    pub mean_photon_a: f64,
    /// `value / mean_photon_a`, absent for a zero-energy probe.
    pub eco_ratio: Option<f64>,
    /// Set when `α = β` and the separable expression `4Tα²` was used.
    pub separable_fallback: bool,
    pub probe: ProbeSpec,
    pub scenario: LossScenario,
}

/// Closed-form QFI of the output state.
///
/// At `α = β` the rank-2 description degenerates; the separable value `4Tα²`
/// is returned instead, which is also the continuous limit.
pub fn qfi_ecs(p: &ProbeSpec, s: &LossScenario) -> Result<QfiResult> {
    let n = mean_photon_a(p);
    let eco = |v: f64| if n > 0.0 { Some(v / n) } else { None };
    if p.is_separable() {
        let value = 4.0 * s.transmissivity() * p.alpha() * p.alpha();
        return Ok(QfiResult {
            value,
            variance_term: value,
            coherence_penalty: 0.0,
            mean_photon_a: n,
            eco_ratio: eco(value),
            separable_fallback: true,
            probe: *p,
            scenario: *s,
        });
    }
    let sp = spectral_pair(p, s)?;
    let (lp, lm) = (sp.lambda_plus, sp.lambda_minus);
    let variance_term = 4.0 * (lp * (sp.gpp - sp.hpp * sp.hpp) + lm * (sp.gmm - sp.hmm * sp.hmm));
    let sum = lp + lm;
    let coherence_penalty = if sum > 0.0 { 16.0 * lp * lm / sum * sp.cross * sp.cross } else { 0.0 };
    let value = (variance_term - coherence_penalty).max(0.0);
    Ok(QfiResult {
        value,
        variance_term,
        coherence_penalty,
        mean_photon_a: n,
        eco_ratio: eco(value),
        separable_fallback: false,
        probe: *p,
        scenario: *s,
    })
}

/// `4(1−R)α²` for the product `|α⟩|α⟩`; identical for both loss models.
pub fn qfi_separable_coherent(alpha: f64, s: &LossScenario) -> Result<QfiResult> {
    let p = ProbeSpec::plus(alpha, alpha)?;
    let value = 4.0 * (1.0 - s.rate()) * alpha * alpha;
    let n = alpha * alpha;
    Ok(QfiResult {
        value,
        variance_term: value,
        coherence_penalty: 0.0,
        mean_photon_a: n,
        eco_ratio: if n > 0.0 { Some(value / n) } else { None },
        separable_fallback: true,
        probe: p,
        scenario: *s,
    })
}

/// Energy-matched comparison between an ECS with `β = γα` and a coherent probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyComparison {
    pub n_av: f64,
    pub gamma: f64,
    pub sign: Sign,
    pub alpha: f64,
    pub beta: f64,
    pub qfi_ecs: f64,
    /// QFI of `|√n_av⟩|√n_av⟩`.
    pub qfi_coherent: f64,
}

/// Amplitude `α ≥ 0` with `⟨n̂_a⟩ = n_av` for the probe `(α, γα, sign)`.
pub fn alpha_for_energy(n_av: f64, gamma: f64, sign: Sign) -> Result<f64> {
    if !n_av.is_finite() || n_av < 0.0 {
        return Err(Error::InvalidProbe(format!("mean photon number {n_av} must be finite and nonnegative")));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidProbe(format!("ratio {gamma} is not finite")));
    }
    if sign == Sign::Minus {
        if (gamma - 1.0).abs() < f64::EPSILON {
            return Err(Error::DegenerateMinus);
        }
        if n_av <= MINUS_MIN_ENERGY {
            return Err(Error::UnreachableEnergy { requested: n_av, minimum: MINUS_MIN_ENERGY });
        }
    } else if n_av == 0.0 {
        return Ok(0.0);
    }
    let energy = |a: f64| -> f64 { ProbeSpec::new(a, gamma * a, sign).map(|p| mean_photon_a(&p)).unwrap_or(f64::NAN) };
    let lo = if sign == Sign::Minus { 1e-6 } else { 0.0 };
    let mut hi = 10.0 * n_av.sqrt();
    let mut expansions = 0;
    while energy(hi) < n_av {
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 || !hi.is_finite() {
            return Err(Error::RootFinding(format!("no amplitude reaches mean photon number {n_av} at ratio {gamma}")));
        }
    }
    let f = |a: f64| energy(a) - n_av;
    if f(lo) > 0.0 {
        let minimum = energy(lo);
        return Err(Error::UnreachableEnergy { requested: n_av, minimum });
    }
    bisect(f, lo, hi, 1e-12, 400)
        .ok_or_else(|| Error::RootFinding(format!("bisection lost its bracket for n_av={n_av}, gamma={gamma}")))
}

/// Compare the ECS `(α, γα)` and a coherent probe at the same `⟨n̂_a⟩ = n_av`.
pub fn compare_at_fixed_energy(n_av: f64, gamma: f64, sign: Sign, s: &LossScenario) -> Result<EnergyComparison> {
    let alpha = alpha_for_energy(n_av, gamma, sign)?;
    let beta = gamma * alpha;
    let probe = ProbeSpec::new(alpha, beta, sign)?;
    let qfi_ecs = qfi_ecs(&probe, s)?.value;
    let qfi_coherent = qfi_separable_coherent(n_av.sqrt(), s)?.value;
    Ok(EnergyComparison { n_av, gamma, sign, alpha, beta, qfi_ecs, qfi_coherent })
}

/// Photon-counting Fisher information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfiResult {
    pub value: f64,
    pub phi: f64,
    pub truncation: usize,
    /// Total probability of all recorded outcomes.
    pub captured_probability: f64,
    pub probability_floor: f64,
}

/// Classical Fisher information of photon-number-resolving detection.
///
/// Both output modes are recombined on a 50:50 beam splitter (the inverse of
/// the preparation splitter) and then counted jointly. Counting directly after
/// the phase shift would give a `φ`-independent distribution because
/// `exp(iφn̂_a)` is diagonal in the number basis. Probabilities and their
/// analytic `φ`-derivatives come from the Kraus images of the truncated Fock
/// backend. Outcomes forbidden at this `φ` contribute their limiting value,
/// so the result is continuous in `φ`.
pub fn cfi_pnrd(p: &ProbeSpec, s: &LossScenario, phi: f64, truncation: usize) -> Result<CfiResult> {
    let rho = KrausFactor::output(p, &s.with_phase(phi), truncation)?;
    let outcomes = photon_counting_factor(&rho, ModeMixing::balanced_inverse());
    let captured: f64 = outcomes.iter().map(|o| o.probability).sum();
    let leakage = (1.0 - captured).max(0.0);
    if leakage > 1e-10 {
        return Err(Error::Truncation { cutoff: truncation, leakage, budget: 1e-10 });
    }
    Ok(CfiResult {
        value: classical_fisher(&outcomes, PROBABILITY_FLOOR),
        phi,
        truncation,
        captured_probability: captured,
        probability_floor: PROBABILITY_FLOOR,
    })
}
