//! The switching-point transformation: first exit time `tau_plus`, the map
//! `f_plus` it induces on the switching line, closed-form first and second
//! derivatives, the negative-sign counterparts obtained purely by symmetry,
//! and first-exit maps for arbitrary starting states.

use crate::error::SwitchError;
use crate::flow::{self, coefficients, effective_poles, FlowCoefficients};
use crate::plant::{Plant, PoleStructure};

/// Default relative tolerance for the exit-time residual `|q(tau)|`.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Relative distance to the onset below which the exit time switches to its
/// small-time quadratic root: the bracket endpoints lose their sign fidelity
/// to rounding once `q(tau*) ~ eps^2` drops under the evaluation noise floor.
const ONSET_ASYMPTOTIC_BAND: f64 = 1e-7;

const MAX_EXPANSIONS: usize = 200;
const MAX_BISECTIONS: usize = 200;

/// First exit data for a switching-line point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitResult {
    /// First exit time `tau_plus(xi)`; zero at or left of the onset.
    pub tau: f64,
    /// `f_plus(xi)`: the exit abscissa; equals `xi` at or left of the onset.
    pub xi_next: f64,
    /// `f_plus'(xi)`; absent at or left of the onset, where the map is the
    /// identity and the one-sided derivative jumps.
    pub derivative: Option<f64>,
    /// `d tau_plus / d xi`; absent under the same condition.
    pub tau_derivative: Option<f64>,
}

/// Exit point and exit time of a trajectory from an arbitrary state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitPoint {
    pub point: [f64; 2],
    pub tau: f64,
}

fn q_scale(plant: &Plant, xi: f64) -> f64 {
    let g = plant.gamma();
    f64::max(
        1.0,
        xi.abs() + plant.kappa().abs() + g / plant.slowest_mode(),
    )
}

/// Smallest `t > 0` with `q(t) = 0` for the trajectory from `(xi, 0)` under
/// relay output `+1`. Returns `0` when `xi <= -kappa` (the trajectory leaves
/// the closed upper half-plane immediately).
///
/// The root is isolated by starting the bracket at the critical time (where
/// `q > 0`), doubling the right end from `2 tau*` until `q < 0` (capped at
/// `pi/omega` for complex poles), bisecting, and polishing with Newton steps
/// on the closed-form `q'`.
pub fn tau_plus(plant: &Plant, xi: f64, tol: f64) -> Result<f64, SwitchError> {
    let onset = plant.onset();
    if xi <= onset {
        return Ok(0.0);
    }
    let eps = xi - onset;
    let scale = q_scale(plant, xi);
    if eps <= ONSET_ASYMPTOTIC_BAND * scale {
        // q(t) = eps t - (gamma + a1 eps) t^2 / 2 + O(t^3)
        return Ok(2.0 * eps / (plant.gamma() + plant.spec().a1 * eps));
    }

    let q = |t: f64| flow::flow_positive(plant, xi, t).q;
    let tau_star = flow::critical_time(plant, xi).expect("xi > onset");

    let cap = match effective_poles(plant) {
        PoleStructure::ComplexConjugate { omega, .. } => Some(std::f64::consts::PI / omega),
        _ => None,
    };

    let mut t_lo = tau_star;
    let mut t_hi = 2.0 * tau_star;
    if let Some(cap) = cap {
        t_hi = t_hi.min(cap);
    }
    let mut expansions = 0;
    loop {
        let q_hi = q(t_hi);
        if q_hi < 0.0 {
            break;
        }
        if q_hi == 0.0 {
            return Ok(t_hi);
        }
        t_lo = t_hi;
        t_hi *= 2.0;
        if let Some(cap) = cap {
            if t_lo >= cap {
                return Err(SwitchError::NoConvergence(format!(
                    "complex-branch bracket exhausted before pi/omega at xi = {xi}"
                )));
            }
            t_hi = t_hi.min(cap);
        }
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(SwitchError::NoConvergence(format!(
                "bracket expansion exceeded {MAX_EXPANSIONS} doublings at xi = {xi}"
            )));
        }
    }

    let width_target = 1e-13 * f64::max(1.0, t_hi);
    let mut bisections = 0;
    while t_hi - t_lo > width_target {
        let mid = 0.5 * (t_lo + t_hi);
        let q_mid = q(mid);
        if q_mid > 0.0 {
            t_lo = mid;
        } else if q_mid < 0.0 {
            t_hi = mid;
        } else {
            return Ok(mid);
        }
        bisections += 1;
        if bisections > MAX_BISECTIONS {
            return Err(SwitchError::NoConvergence(format!(
                "bisection exceeded {MAX_BISECTIONS} iterations at xi = {xi}"
            )));
        }
    }

    // Newton polish; clamped to the bracket so it cannot escape toward the
    // spurious t = 0 root near the onset.
    let mut t = 0.5 * (t_lo + t_hi);
    for _ in 0..4 {
        let qt = q(t);
        let dq = flow::q_prime(plant, xi, t);
        if dq == 0.0 {
            break;
        }
        let next = (t - qt / dq).clamp(t_lo, t_hi);
        if (next - t).abs() <= 1e-16 * t.max(1.0) {
            t = next;
            break;
        }
        t = next;
    }

    let residual = q(t).abs();
    if residual > f64::max(tol, 1e3 * f64::EPSILON) * scale {
        return Err(SwitchError::NoConvergence(format!(
            "residual |q| = {residual} above tolerance at xi = {xi}"
        )));
    }
    Ok(t)
}

/// The switching-point transformation: `x1` after the first exit from `(xi, 0)`.
/// Identity at or left of the onset, strictly decreasing right of it.
pub fn f_plus(plant: &Plant, xi: f64) -> Result<f64, SwitchError> {
    if xi <= plant.onset() {
        return Ok(xi);
    }
    let tau = tau_plus(plant, xi, DEFAULT_ROOT_TOL)?;
    Ok(flow::flow_positive(plant, xi, tau).p)
}

fn require_above_onset(plant: &Plant, xi: f64) -> Result<(), SwitchError> {
    if xi <= plant.onset() {
        Err(SwitchError::BelowSwitchOnset {
            xi,
            onset: plant.onset(),
        })
    } else {
        Ok(())
    }
}

fn f_plus_prime_at(plant: &Plant, xi: f64, tau: f64) -> f64 {
    match (effective_poles(plant), coefficients(plant, xi)) {
        (
            PoleStructure::DistinctReal { alpha, beta },
            FlowCoefficients::Distinct { mu_alpha, nu_beta },
        ) => {
            // Normalized by e^{-alpha tau} so nothing overflows at large xi.
            let e = (-(alpha - beta) * tau).exp();
            let d2 = beta * nu_beta - alpha * mu_alpha * e;
            -(alpha * mu_alpha - beta * nu_beta) * (-alpha * tau).exp() / d2
        }
        (PoleStructure::RepeatedReal { alpha }, FlowCoefficients::Repeated { mu_tilde }) => {
            let eps = xi + plant.kappa();
            (-alpha * tau).exp() * eps / (eps - alpha * tau * mu_tilde)
        }
        (
            PoleStructure::ComplexConjugate { sigma, omega },
            FlowCoefficients::Complex { mu1, nu0, .. },
        ) => {
            let (sn, cs) = (omega * tau).sin_cos();
            let d = (omega * mu1 - sigma * nu0) * cs - (sigma * mu1 + omega * nu0) * sn;
            (omega * mu1 - sigma * nu0) * (-sigma * tau).exp() / d
        }
        _ => unreachable!(),
    }
}

fn tau_plus_prime_at(plant: &Plant, xi: f64, tau: f64) -> f64 {
    match (effective_poles(plant), coefficients(plant, xi)) {
        (
            PoleStructure::DistinctReal { alpha, beta },
            FlowCoefficients::Distinct { mu_alpha, nu_beta },
        ) => {
            let e = (-(alpha - beta) * tau).exp();
            let d2 = beta * nu_beta - alpha * mu_alpha * e;
            (1.0 - e) / d2
        }
        (PoleStructure::RepeatedReal { alpha }, FlowCoefficients::Repeated { mu_tilde }) => {
            let eps = xi + plant.kappa();
            -tau / (eps - alpha * tau * mu_tilde)
        }
        (
            PoleStructure::ComplexConjugate { sigma, omega },
            FlowCoefficients::Complex { mu1, nu0, .. },
        ) => {
            let (sn, cs) = (omega * tau).sin_cos();
            let d = (omega * mu1 - sigma * nu0) * cs - (sigma * mu1 + omega * nu0) * sn;
            -sn / d
        }
        _ => unreachable!(),
    }
}

/// Closed-form `f_plus'(xi)`: negative with magnitude below one for
/// `xi > -kappa`. Errors at or left of the onset.
pub fn f_plus_prime(plant: &Plant, xi: f64) -> Result<f64, SwitchError> {
    require_above_onset(plant, xi)?;
    let tau = tau_plus(plant, xi, DEFAULT_ROOT_TOL)?;
    Ok(f_plus_prime_at(plant, xi, tau))
}

/// Closed-form `d tau_plus / d xi`. Errors at or left of the onset.
pub fn tau_plus_prime(plant: &Plant, xi: f64) -> Result<f64, SwitchError> {
    require_above_onset(plant, xi)?;
    let tau = tau_plus(plant, xi, DEFAULT_ROOT_TOL)?;
    Ok(tau_plus_prime_at(plant, xi, tau))
}

/// Closed-form `f_plus''(xi)` for the two real-pole classes. Strictly positive
/// for `xi > -kappa + gamma/beta` (distinct) and for `xi + kappa > gamma/alpha`
/// (repeated). Complex poles are refused: no closed form exists there, and
/// callers needing curvature must take finite differences explicitly.
pub fn f_plus_second(plant: &Plant, xi: f64) -> Result<f64, SwitchError> {
    require_above_onset(plant, xi)?;
    let tau = tau_plus(plant, xi, DEFAULT_ROOT_TOL)?;
    let g = plant.gamma();
    let eps = xi + plant.kappa();
    match (effective_poles(plant), coefficients(plant, xi)) {
        (
            PoleStructure::DistinctReal { alpha, beta },
            FlowCoefficients::Distinct { mu_alpha, nu_beta },
        ) => {
            let gap = alpha - beta;
            let ab_eps2 = alpha * beta * eps * eps;
            let g0 = 2.0 * gap * (ab_eps2 - g * g);
            let g_plus = gap * (ab_eps2 + g * gap * eps - g * g);
            let g_minus = gap * (ab_eps2 - g * gap * eps - g * g);
            // Normalized form: multiply numerator and denominator by
            // e^{-(2 alpha - beta) tau} so large exit times stay bounded.
            let e = (-gap * tau).exp();
            let n2 = g_plus - g0 * e + g_minus * e * e;
            let d2 = beta * nu_beta - alpha * mu_alpha * e;
            Ok(n2 * (-alpha * tau).exp() / (d2 * d2 * d2))
        }
        (PoleStructure::RepeatedReal { alpha }, FlowCoefficients::Repeated { mu_tilde }) => {
            let d = eps - alpha * tau * mu_tilde;
            let num = -tau * (alpha * alpha * (eps * eps - (g / alpha) * (g / alpha)) * tau
                + 2.0 * g * eps);
            Ok(num * (-alpha * tau).exp() / (d * d * d))
        }
        (PoleStructure::ComplexConjugate { .. }, _) => Err(SwitchError::UnsupportedPoleClass),
        _ => unreachable!(),
    }
}

/// All first-exit data for a switching-line point in one call. Left of the
/// onset the map is the identity with zero exit time and no derivatives.
pub fn exit_result(plant: &Plant, xi: f64, tol: f64) -> Result<ExitResult, SwitchError> {
    if xi <= plant.onset() {
        return Ok(ExitResult {
            tau: 0.0,
            xi_next: xi,
            derivative: None,
            tau_derivative: None,
        });
    }
    let tau = tau_plus(plant, xi, tol)?;
    Ok(ExitResult {
        tau,
        xi_next: flow::flow_positive(plant, xi, tau).p,
        derivative: Some(f_plus_prime_at(plant, xi, tau)),
        tau_derivative: Some(tau_plus_prime_at(plant, xi, tau)),
    })
}

/// `tau_minus` on the switching line via the symmetry `tau_-(x) = tau_+(-x)`.
pub fn tau_minus(plant: &Plant, xi: f64, tol: f64) -> Result<f64, SwitchError> {
    tau_plus(plant, -xi, tol)
}

/// `f_minus` via `psi_-(x) = -psi_+(-x)` restricted to the line.
pub fn f_minus(plant: &Plant, xi: f64) -> Result<f64, SwitchError> {
    Ok(-f_plus(plant, -xi)?)
}

/// First exit map under relay output `+1` from an arbitrary state.
///
/// Semantics: the first `t >= 0` at which the `x2` coordinate reaches zero
/// going downward. States already in the open lower half-plane exit
/// immediately with `tau = 0`; switching-line states delegate to the
/// line-restricted machinery.
pub fn psi_plus(plant: &Plant, x: [f64; 2]) -> Result<ExitPoint, SwitchError> {
    if x[1] < 0.0 {
        return Ok(ExitPoint { point: x, tau: 0.0 });
    }
    if x[1] == 0.0 {
        let r = exit_result(plant, x[0], DEFAULT_ROOT_TOL)?;
        return Ok(ExitPoint {
            point: [r.xi_next, 0.0],
            tau: r.tau,
        });
    }

    // March on the exact flow until x2 changes sign. Real-pole trajectories
    // from the upper half-plane cross exactly once; complex ones are sampled
    // at an eighth of the rotation quarter-period so no crossing slips past.
    let step = match effective_poles(plant) {
        PoleStructure::ComplexConjugate { omega, .. } => {
            std::f64::consts::PI / (8.0 * omega)
        }
        _ => 0.25 / plant.fastest_mode(),
    };
    let x2_at = |t: f64| flow::flow_from(plant, x, 1.0, t)[1];
    let t_cap = 300.0 / plant.slowest_mode();
    let mut t0 = 0.0;
    let mut v0 = x[1];
    let mut t1;
    loop {
        t1 = t0 + step;
        let v1 = x2_at(t1);
        if v1 < 0.0 || (v1 == 0.0 && v0 > 0.0) {
            break;
        }
        t0 = t1;
        v0 = v1;
        if t0 > t_cap {
            return Err(SwitchError::NoConvergence(format!(
                "no crossing found from ({}, {}) within t = {t_cap}",
                x[0], x[1]
            )));
        }
    }
    let _ = v0;

    let mut lo = t0;
    let mut hi = t1;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if x2_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Newton polish using x2' = (A x - B)_2 at the flowed point.
    let r = plant.realization();
    let mut t = 0.5 * (lo + hi);
    for _ in 0..4 {
        let pt = flow::flow_from(plant, x, 1.0, t);
        let slope = r.a[1][0] * pt[0] + r.a[1][1] * pt[1] - r.b[1];
        if slope == 0.0 {
            break;
        }
        t = (t - pt[1] / slope).clamp(lo, hi);
    }
    Ok(ExitPoint {
        point: flow::flow_from(plant, x, 1.0, t),
        tau: t,
    })
}

/// First exit map under relay output `-1`, implemented purely by negation:
/// `psi_-(x) = -psi_+(-x)`. Never re-derived.
pub fn psi_minus(plant: &Plant, x: [f64; 2]) -> Result<ExitPoint, SwitchError> {
    let e = psi_plus(plant, [-x[0], -x[1]])?;
    Ok(ExitPoint {
        point: [-e.point[0], -e.point[1]],
        tau: e.tau,
    })
}
