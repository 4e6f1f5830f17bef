//! Certification of the asymptotic behaviour of relay feedback systems with
//! second-order plants.
//!
//! A relay feedback system closes an ideal on/off relay around a linear plant:
//! `dx/dt = A x - B sign(C x)`. For a stable second-order plant with positive
//! DC gain this crate computes, in closed form, the transformation taking one
//! switching point to the next, finds the unique symmetric unimodal limit
//! cycle by contraction iteration when the plant zero is positive, classifies
//! the no-zero (origin) and negative-zero (chattering set) cases, and
//! cross-validates everything against an independent event-detecting
//! simulator.
//!
//! Modules:
//! - [`plant`]: parsing, validation, pole/zero classification, realization.
//! - [`flow`]: exact trajectories, auxiliary coefficients, matrix exponential.
//! - [`switching`]: first exit times, the switching-point map, derivatives.
//! - [`cycle`]: fixed-point iteration, contraction estimates, certificates.
//! - [`sim`]: Filippov simulator with event localization and sliding modes.

pub mod cycle;
pub mod error;
pub mod flow;
pub mod plant;
pub mod sim;
pub mod switching;

pub use cycle::{
    certify, certify_with, contraction_bound, iterate_half_map, kappa_shift_check,
    self_mapping_threshold, Classification, IterationTrace, LimitCycleCertificate,
};
pub use error::{CycleError, FlowError, PlantError, SimError, SwitchError};
pub use flow::{
    coefficients, critical_time, flow_from, flow_positive, matrix_exp, FlowCoefficients, FlowState,
};
pub use plant::{
    classify_poles, classify_zero, realize, sink_point, validate_plant, Plant, PlantSpec,
    PoleStructure, Realization, ZeroClass,
};
pub use sim::{
    locate_crossing, simulate, sliding_dynamics, step, switching_sequence, Sample, SimConfig,
    SimEvent, SimTrace,
};
pub use switching::{
    exit_result, f_minus, f_plus, f_plus_prime, f_plus_second, psi_minus, psi_plus, tau_minus,
    tau_plus, tau_plus_prime, ExitPoint, ExitResult, DEFAULT_ROOT_TOL,
};
