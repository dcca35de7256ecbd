use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    /// `|α⟩|β⟩ − |β⟩|α⟩` vanishes identically when `α = β`.
    #[error("degenerate minus-sign state: alpha and beta coincide")]
    DegenerateMinus,

    /// The two output components coincide and the rank-2 description breaks down.
    #[error("degenerate output support: alpha and beta coincide")]
    DegenerateSupport,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid loss scenario: {0}")]
    InvalidScenario(String),

    #[error("ratio undefined for a probe with zero mean photon number")]
    ZeroEnergy,

    #[error("mean photon number {requested} is unreachable (attainable range starts at {minimum})")]
    UnreachableEnergy { requested: f64, minimum: f64 },

    #[error("truncation at {cutoff} photons leaks {leakage:e} probability (budget {budget:e})")]
    Truncation { cutoff: usize, leakage: f64, budget: f64 },

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error("analytic and finite-difference phase derivatives differ by {0:e}")]
    DerivativeMismatch(f64),

    #[error("negativity formula outside its domain (discriminant {discriminant:e})")]
    FormulaDomain { discriminant: f64, oracle: Option<f64> },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    /// Failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. }
                | Error::Eigen(_)
                | Error::DerivativeMismatch(_)
                | Error::FormulaDomain { .. }
                | Error::RootFinding(_)
        )
    }

    /// Short stable identifier used in structured error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidProbe(_) => "invalid_probe",
            Error::DegenerateMinus => "degenerate_minus",
            Error::DegenerateSupport => "degenerate_support",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidScenario(_) => "invalid_scenario",
            Error::ZeroEnergy => "zero_energy",
            Error::UnreachableEnergy { .. } => "unreachable_energy",
            Error::Truncation { .. } => "truncation",
            Error::Eigen(_) => "eigensolver",
            Error::DerivativeMismatch(_) => "derivative_mismatch",
            Error::FormulaDomain { .. } => "formula_domain",
            Error::RootFinding(_) => "root_finding",
            Error::Config(_) => "config",
        }
    }
}
