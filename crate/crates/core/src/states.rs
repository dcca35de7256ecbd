//! ECS probes `|α⟩|β⟩ ± |β⟩|α⟩` with real amplitudes.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::numeric::{entropy_bits, one_minus_exp_neg};
use crate::{Error, Result};

/// Amplitude gap below which `α` and `β` are treated as equal.
pub const DEGENERATE_GAP: f64 = 1e-9;

/// Relative sign between the two ECS branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::Config(format!("unknown sign '{other}' (expected plus|minus)"))),
        }
    }
}

/// A validated probe. Construction rejects non-finite amplitudes and the
/// vanishing minus-sign state at `α = β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSpec {
    alpha: f64,
    beta: f64,
    sign: Sign,
}

impl ProbeSpec {
    pub fn new(alpha: f64, beta: f64, sign: Sign) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidProbe(format!("amplitudes must be finite (alpha={alpha}, beta={beta})")));
        }
        if sign == Sign::Minus && (alpha - beta).abs() < DEGENERATE_GAP {
            return Err(Error::DegenerateMinus);
        }
        Ok(Self { alpha, beta, sign })
    }

    pub fn plus(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, Sign::Plus)
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// `|α − β|` below [`DEGENERATE_GAP`], i.e. the separable product `|α⟩|α⟩`.
    #[inline]
    pub fn is_separable(&self) -> bool {
        (self.alpha - self.beta).abs() < DEGENERATE_GAP
    }

    pub fn overlaps(&self) -> OverlapBundle {
        let d2 = (self.beta - self.alpha).powi(2);
        let x = (-0.5 * d2).exp();
        let n_t = match self.sign {
            Sign::Plus => 2.0 * (1.0 + (-d2).exp()),
            Sign::Minus => 2.0 * one_minus_exp_neg(d2),
        };
        OverlapBundle { d2, x, n_t }
    }
}

/// Overlap quantities shared by every closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapBundle {
    /// `(β − α)²`
    pub d2: f64,
    /// Single-mode overlap `⟨α|β⟩ = exp(−d2/2)`.
    pub x: f64,
    /// Normalization `N_T` of the unnormalized superposition.
    pub n_t: f64,
}

/// Squared norm `N_T` of `|α⟩|β⟩ ± |β⟩|α⟩`.
pub fn normalization(p: &ProbeSpec) -> f64 {
    p.overlaps().n_t
}

/// Mean photon number in mode `a`, equal to half the total.
///
/// Written as `d2 / (2(1 ± e^{−d2})) + αβ`, which is algebraically the
/// textbook ratio but stays accurate as `α → β` for the minus sign.
pub fn mean_photon_a(p: &ProbeSpec) -> f64 {
    let o = p.overlaps();
    let ab = p.alpha * p.beta;
    if p.is_separable() {
        // plus sign only; minus cannot be constructed here
        return ab;
    }
    o.d2 / o.n_t + ab
}

/// Schmidt weights `p± = (1 ± x)² / (2(1 + x²))` of the plus-sign probe.
///
/// For the minus sign the two Schmidt weights are exactly one half.
pub fn schmidt_spectrum(p: &ProbeSpec) -> (f64, f64) {
    match p.sign {
        Sign::Minus => (0.5, 0.5),
        Sign::Plus => {
            let x = p.overlaps().x;
            let denom = 2.0 * (1.0 + x * x);
            let minus = (1.0 - x).powi(2) / denom;
            (1.0 - minus, minus)
        }
    }
}

/// Entanglement entropy of either reduced state, in bits.
pub fn degree_of_entanglement(p: &ProbeSpec) -> f64 {
    match p.sign {
        Sign::Minus => 1.0,
        Sign::Plus if p.is_separable() => 0.0,
        Sign::Plus => {
            let (hi, lo) = schmidt_spectrum(p);
            entropy_bits([hi, lo])
        }
    }
}

/// Single-mode inputs that a 50:50 beam splitter turns into the plus-sign ECS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationInputs {
    /// Coherent amplitude `(α+β)/√2` injected into port `a`.
    pub coherent: f64,
    /// Even-cat amplitude `(α−β)/√2` injected into port `b` (`|γ⟩ + |−γ⟩`).
    pub cat: f64,
}

pub fn generation_inputs(p: &ProbeSpec) -> Result<GenerationInputs> {
    if p.sign != Sign::Plus {
        return Err(Error::Unsupported("beam-splitter preparation is only defined for the plus-sign state".into()));
    }
    Ok(GenerationInputs {
        coherent: (p.alpha + p.beta) * std::f64::consts::FRAC_1_SQRT_2,
        cat: (p.alpha - p.beta) * std::f64::consts::FRAC_1_SQRT_2,
    })
}
