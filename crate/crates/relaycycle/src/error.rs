//! Error types for the relaycycle library.

use thiserror::Error;

/// Errors raised while parsing, validating, or classifying a plant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    /// Denominator is not Hurwitz: needs `a1 > 0` and `a2 > 0`.
    #[error("plant is not Hurwitz stable: requires a1 > 0 and a2 > 0 (got a1 = {a1}, a2 = {a2})")]
    NotHurwitz { a1: f64, a2: f64 },
    /// DC gain is not positive: needs `b0 > 0`.
    #[error("plant has non-positive DC gain: requires b0 > 0 (got b0 = {b0})")]
    NonPositiveGain { b0: f64 },
    /// Plant file does not follow the `{"num": [b1, b0], "den": [1.0, a1, a2]}` layout.
    #[error("bad plant format: {0}")]
    BadFormat(String),
}

/// Errors raised by the closed-form flow module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    /// The requested quantity is only defined for switching-line points to the
    /// right of the switch onset, i.e. `xi > -kappa`.
    #[error("xi = {xi} is at or below the switch onset -kappa = {onset}")]
    BelowSwitchOnset { xi: f64, onset: f64 },
}

/// Errors raised by the switching-map module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwitchError {
    /// Root bracketing for the first exit time failed to converge. The exit
    /// time exists for every validated plant, so this signals a bug rather
    /// than a mathematical obstruction.
    #[error("first exit time search did not converge ({0})")]
    NoConvergence(String),
    /// Derivative formulas require `xi > -kappa`.
    #[error("xi = {xi} is at or below the switch onset -kappa = {onset}")]
    BelowSwitchOnset { xi: f64, onset: f64 },
    /// No closed-form second derivative exists for complex conjugate poles.
    #[error("second derivative of the switching map is unsupported for this pole class")]
    UnsupportedPoleClass,
}

impl From<FlowError> for SwitchError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::BelowSwitchOnset { xi, onset } => SwitchError::BelowSwitchOnset { xi, onset },
        }
    }
}

/// Errors raised by the limit-cycle certification module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    /// The half-map iteration hit its iteration cap. Carries the partial trace.
    #[error("fixed point iteration exceeded {max_iter} iterations (residual {residual})")]
    MaxIterExceeded {
        max_iter: usize,
        residual: f64,
        trace: crate::cycle::IterationTrace,
    },
    /// A sampled contraction estimate came out at or above one. The theory
    /// guarantees a bound below one, so this signals a bug.
    #[error("sampled contraction estimate {estimate} is not below one")]
    NotContractive { estimate: f64 },
    /// The operation only applies to the positive-zero (kappa > 0) branch.
    #[error("operation requires a plant with a positive zero (kappa > 0); got kappa = {kappa}")]
    RequiresPositiveZero { kappa: f64 },
    /// An underlying switching-map evaluation failed.
    #[error(transparent)]
    Switch(#[from] SwitchError),
}

/// Errors raised by the Filippov simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    /// Sliding dynamics were requested outside the segment `|x1| <= |kappa|`.
    #[error("x1 = {x1} lies outside the sliding segment [-{half_width}, {half_width}]")]
    OutsideSlidingSegment { x1: f64, half_width: f64 },
    /// The plant has no finite zero (kappa = 0): the only Filippov-singular
    /// point is the Zeno equilibrium at the origin, not a sliding segment.
    #[error("plant with kappa = 0 has no sliding segment (origin is a Zeno point)")]
    NoSlidingSegment,
    /// A trace operation needed at least one crossing event.
    #[error("trace contains no crossing events")]
    NoCrossings,
}
