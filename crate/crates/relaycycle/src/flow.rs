//! Exact trajectories of the affine field `dx/dt = A x - B` started on the
//! switching line, the per-start auxiliary coefficients, the critical time of
//! the output coordinate, and the closed-form 2x2 matrix exponential.
//!
//! Every formula branches on the pole structure: two distinct real poles
//! diagonalize through a Vandermonde similarity, a repeated pole through a
//! confluent Vandermonde, and a complex pair through a rotation conjugation.
//! The generic Taylor/squaring algorithm is demoted to a test oracle.

use crate::error::FlowError;
use crate::plant::{Plant, PoleStructure};

/// Distinct poles closer than this are evaluated with the repeated-pole
/// formulas after pole averaging; the `1/(alpha - beta)` factors lose
/// precision catastrophically below it.
pub const POLE_MERGE_GAP: f64 = 1e-6;

/// Auxiliary constants of the closed-form trajectory from `(xi, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowCoefficients {
    /// `mu_alpha = xi + kappa + gamma/alpha`, `nu_beta = xi + kappa + gamma/beta`.
    Distinct { mu_alpha: f64, nu_beta: f64 },
    /// `mu_tilde = xi + kappa + gamma/alpha`.
    Repeated { mu_tilde: f64 },
    /// `mu1 = xi + kappa + gamma sigma / (sigma^2 + omega^2)`,
    /// `nu0 = gamma omega / (sigma^2 + omega^2)`,
    /// `chi4 = sqrt((omega mu1 - sigma nu0)^2 + (sigma mu1 + omega nu0)^2)`.
    Complex { mu1: f64, nu0: f64, chi4: f64 },
}

/// Effective pole branch used for formula dispatch: distinct poles with a gap
/// below [`POLE_MERGE_GAP`] collapse to the averaged repeated branch.
pub(crate) fn effective_poles(plant: &Plant) -> PoleStructure {
    match plant.poles() {
        PoleStructure::DistinctReal { alpha, beta } if alpha - beta < POLE_MERGE_GAP => {
            PoleStructure::RepeatedReal {
                alpha: 0.5 * (alpha + beta),
            }
        }
        other => other,
    }
}

/// Evaluate the auxiliary coefficients at `xi`.
pub fn coefficients(plant: &Plant, xi: f64) -> FlowCoefficients {
    let k = plant.kappa();
    let g = plant.gamma();
    match effective_poles(plant) {
        PoleStructure::DistinctReal { alpha, beta } => FlowCoefficients::Distinct {
            mu_alpha: xi + k + g / alpha,
            nu_beta: xi + k + g / beta,
        },
        PoleStructure::RepeatedReal { alpha } => FlowCoefficients::Repeated {
            mu_tilde: xi + k + g / alpha,
        },
        PoleStructure::ComplexConjugate { sigma, omega } => {
            let s2w2 = sigma * sigma + omega * omega;
            let mu1 = xi + k + g * sigma / s2w2;
            let nu0 = g * omega / s2w2;
            let u = omega * mu1 - sigma * nu0;
            let v = sigma * mu1 + omega * nu0;
            FlowCoefficients::Complex {
                mu1,
                nu0,
                chi4: (u * u + v * v).sqrt(),
            }
        }
    }
}

/// State of the positive-sign trajectory from `(xi, 0)` after `t` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    /// `x1` coordinate.
    pub p: f64,
    /// `x2` coordinate (the plant output).
    pub q: f64,
    pub t: f64,
}

/// Exact `(p(t), q(t))` of `dx/dt = A x - B` from `(xi, 0)`.
pub fn flow_positive(plant: &Plant, xi: f64, t: f64) -> FlowState {
    let sink = plant.sink();
    let (p, q) = match (effective_poles(plant), coefficients(plant, xi)) {
        (
            PoleStructure::DistinctReal { alpha, beta },
            FlowCoefficients::Distinct { mu_alpha, nu_beta },
        ) => {
            let ea = (-alpha * t).exp();
            let eb = (-beta * t).exp();
            let gap = alpha - beta;
            (
                sink[0] + (alpha * nu_beta * eb - beta * mu_alpha * ea) / gap,
                sink[1] + (nu_beta * eb - mu_alpha * ea) / gap,
            )
        }
        (PoleStructure::RepeatedReal { alpha }, FlowCoefficients::Repeated { mu_tilde }) => {
            let ea = (-alpha * t).exp();
            let g = plant.gamma();
            (
                sink[0] + (mu_tilde + g / alpha + alpha * mu_tilde * t) * ea,
                sink[1] + (g / (alpha * alpha) + mu_tilde * t) * ea,
            )
        }
        (
            PoleStructure::ComplexConjugate { sigma, omega },
            FlowCoefficients::Complex { mu1, nu0, .. },
        ) => {
            let es = (-sigma * t).exp() / omega;
            let (sn, cs) = (omega * t).sin_cos();
            (
                sink[0] + es * ((omega * mu1 + sigma * nu0) * cs + (sigma * mu1 - omega * nu0) * sn),
                sink[1] + es * (nu0 * cs + mu1 * sn),
            )
        }
        _ => unreachable!("pole branch and coefficient branch always agree"),
    };
    FlowState { p, q, t }
}

/// Time derivative `q'(t)` of the output coordinate along the same trajectory.
pub fn q_prime(plant: &Plant, xi: f64, t: f64) -> f64 {
    match (effective_poles(plant), coefficients(plant, xi)) {
        (
            PoleStructure::DistinctReal { alpha, beta },
            FlowCoefficients::Distinct { mu_alpha, nu_beta },
        ) => {
            let ea = (-alpha * t).exp();
            let eb = (-beta * t).exp();
            (alpha * mu_alpha * ea - beta * nu_beta * eb) / (alpha - beta)
        }
        (PoleStructure::RepeatedReal { alpha }, FlowCoefficients::Repeated { mu_tilde }) => {
            let k = plant.kappa();
            (xi + k - alpha * mu_tilde * t) * (-alpha * t).exp()
        }
        (
            PoleStructure::ComplexConjugate { sigma, omega },
            FlowCoefficients::Complex { mu1, nu0, .. },
        ) => {
            let es = (-sigma * t).exp() / omega;
            let (sn, cs) = (omega * t).sin_cos();
            es * ((omega * mu1 - sigma * nu0) * cs - (sigma * mu1 + omega * nu0) * sn)
        }
        _ => unreachable!(),
    }
}

/// The unique positive critical time of `q` before first exit: the instant
/// where `q'` vanishes and the output peaks. Requires `xi > -kappa`.
pub fn critical_time(plant: &Plant, xi: f64) -> Result<f64, FlowError> {
    if xi <= plant.onset() {
        return Err(FlowError::BelowSwitchOnset {
            xi,
            onset: plant.onset(),
        });
    }
    let tau = match (effective_poles(plant), coefficients(plant, xi)) {
        (
            PoleStructure::DistinctReal { alpha, beta },
            FlowCoefficients::Distinct { mu_alpha, nu_beta },
        ) => ((alpha * mu_alpha) / (beta * nu_beta)).ln() / (alpha - beta),
        (PoleStructure::RepeatedReal { alpha }, FlowCoefficients::Repeated { mu_tilde }) => {
            (xi + plant.kappa()) / (alpha * mu_tilde)
        }
        (
            PoleStructure::ComplexConjugate { sigma, omega },
            FlowCoefficients::Complex { mu1, nu0, .. },
        ) => {
            // Restricted to [0, pi/(2 omega)]: both coefficients of the
            // vanishing condition are positive for xi > -kappa, so the arctan
            // form isolates the unique root there.
            let u = omega * mu1 - sigma * nu0;
            let v = sigma * mu1 + omega * nu0;
            (u / v).atan() / omega
        }
        _ => unreachable!(),
    };
    Ok(tau)
}

/// Closed-form `e^{A t}` assembled from the similarity transforms.
pub fn matrix_exp(plant: &Plant, t: f64) -> [[f64; 2]; 2] {
    match effective_poles(plant) {
        PoleStructure::DistinctReal { alpha, beta } => {
            let d1 = (-alpha * t).exp();
            let d2 = (-beta * t).exp();
            let gap = alpha - beta;
            [
                [(alpha * d2 - beta * d1) / gap, alpha * beta * (d1 - d2) / gap],
                [(d2 - d1) / gap, (alpha * d1 - beta * d2) / gap],
            ]
        }
        PoleStructure::RepeatedReal { alpha } => {
            let ea = (-alpha * t).exp();
            [
                [ea * (1.0 + alpha * t), -alpha * alpha * t * ea],
                [t * ea, ea * (1.0 - alpha * t)],
            ]
        }
        PoleStructure::ComplexConjugate { sigma, omega } => {
            let es = (-sigma * t).exp();
            let (sn, cs) = (omega * t).sin_cos();
            let s2w2 = sigma * sigma + omega * omega;
            [
                [
                    es * (cs + sigma * sn / omega),
                    -es * s2w2 * sn / omega,
                ],
                [es * sn / omega, es * (cs - sigma * sn / omega)],
            ]
        }
    }
}

/// Flow of the affine field `dx/dt = A x - B * relay_sign` from an arbitrary
/// start: `sink * s + e^{A t} (x0 - sink * s)`.
pub fn flow_from(plant: &Plant, x0: [f64; 2], relay_sign: f64, t: f64) -> [f64; 2] {
    debug_assert!(relay_sign == 1.0 || relay_sign == -1.0);
    let sink = plant.sink();
    let e = matrix_exp(plant, t);
    let dx = [x0[0] - sink[0] * relay_sign, x0[1] - sink[1] * relay_sign];
    [
        sink[0] * relay_sign + e[0][0] * dx[0] + e[0][1] * dx[1],
        sink[1] * relay_sign + e[1][0] * dx[0] + e[1][1] * dx[1],
    ]
}
