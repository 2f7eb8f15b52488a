use thiserror::Error;

/// Failures reported by the toolkit. Numeric payloads are stored as `f64`
/// regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("depth must be positive and finite, got d = {d}")]
    InvalidDepth { d: f64 },

    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("no stagnation depth for irrotational flow (a = 0)")]
    NoStagnationDepth,

    #[error("(a, d) = ({a}, {d}) is not subcritical: d must exceed the critical depth {critical}")]
    NotSubcritical { a: f64, d: f64, critical: f64 },

    #[error("stagnation at the surface for (a, d) = ({a}, {d}): kappa = 0 and sigma is identically -1")]
    SurfaceStagnation { a: f64, d: f64 },

    #[error("(a, d) = ({a}, {d}) is within {band} of the stagnation depth {stagnation}; roots there are not meaningful")]
    StagnationGuardBand {
        a: f64,
        d: f64,
        stagnation: f64,
        band: f64,
    },

    #[error("tau = {tau} is not a dispersion root (residual {residual})")]
    NotADispersionRoot { tau: f64, residual: f64 },

    #[error("harmonic {harmonic} is resonant: sigma({harmonic} tau*) = 0")]
    Resonance { harmonic: u32 },

    #[error("laminar flow is critical: sigma(0) = 0")]
    Criticality,

    #[error("period correction is undefined: its denominator vanishes")]
    DegenerateBranch,

    #[error("asymptotic regime {regime} does not apply: {reason}")]
    RegimeMismatch {
        regime: &'static str,
        reason: String,
    },

    #[error("amplitude t = {t} is too large: {reason}")]
    AmplitudeTooLarge { t: f64, reason: String },

    #[error("point (x, y) = ({x}, {y}) lies outside the fluid domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("{what}: no sign change on [{lo}, {hi}]")]
    NoSignChange { what: &'static str, lo: f64, hi: f64 },

    #[error("{what}: found {count} sign changes where one was expected, near {locations:?}")]
    MultipleRoots {
        what: &'static str,
        count: usize,
        locations: Vec<f64>,
    },

    #[error("discretization failed: {0}")]
    Resolution(String),

    #[error("invalid request: {0}")]
    Request(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T, E = WaveError> = std::result::Result<T, E>;
