use alloc::string::String;

use crate::domain::Polarization;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("time step {dt} exceeds the stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("energy ledger drift {residual:e} exceeds {tolerance:e} at the finest step {dt}")]
    LedgerDrift { residual: f64, tolerance: f64, dt: f64 },
    #[error("no intracavity trace for {0:?} polarization")]
    MissingMode(Polarization),
    #[error("frequency window too narrow: edge |phi|^2 is {ratio:e} of the peak")]
    WindowTooNarrow { ratio: f64 },
    #[error("parseval residual {residual:e} exceeds {tolerance:e}")]
    Parseval { residual: f64, tolerance: f64 },
    #[error("mode function undefined for zero efficiency")]
    ZeroEfficiency,
    #[error("efficiency {0} outside [0, 1]")]
    EfficiencyOutOfRange(f64),
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("root search did not converge after {iterations} iterations")]
    RootNonConvergence { iterations: usize },
    #[error("root {omega} lies outside the window [{lo}, {hi}]")]
    RootOutsideWindow { omega: f64, lo: f64, hi: f64 },
    #[error("degenerate real-axis pole in layer {layer}")]
    DegeneratePole { layer: usize },
    #[error("z = {0} is outside the admissible region of the stack")]
    PositionOutOfRange(f64),
    #[error("lorentzian fit failed: {0}")]
    Fit(String),
    #[error("stack resonance {found} does not match mode frequency {expected} within {tolerance}")]
    ModeMismatch { expected: f64, found: f64, tolerance: f64 },
}

impl Error {
    /// Errors caused by the inputs rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::UnknownPreset(_)
                | Error::InvalidConfig(_)
                | Error::StepTooLarge { .. }
                | Error::EfficiencyOutOfRange(_)
                | Error::PositionOutOfRange(_)
                | Error::MissingMode(_)
        )
    }
}
