//! Fixed-point iteration of the negated switching map, sampled contraction
//! estimates, self-mapping thresholds, and the behaviour certificate that
//! classifies a plant as self-oscillating, origin-convergent, or
//! chattering-set-convergent.

use serde::Serialize;

use crate::error::CycleError;
use crate::flow;
use crate::plant::{Plant, PoleStructure, ZeroClass};
use crate::switching::{self, DEFAULT_ROOT_TOL};

/// Default relative stopping tolerance for the half-map iteration.
pub const DEFAULT_ITER_TOL: f64 = 1e-12;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Record of one run of the iteration `xi <- -f_plus(xi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub xi0: f64,
    /// The sequence starting with the seed: `xi0, -f(xi0), -f(-f(xi0)), ...`
    pub iterates: Vec<f64>,
    pub converged: bool,
    /// `|xi_{k+1} - xi_k|` at the stopping index.
    pub residual: f64,
}

impl IterationTrace {
    pub fn last(&self) -> f64 {
        *self.iterates.last().expect("trace holds at least the seed")
    }
}

/// Iterate `xi <- -f_plus(xi)` from `xi0`, stopping once
/// `|delta| <= tol * max(1, |xi|)` or after `max_iter` applications.
pub fn iterate_half_map(
    plant: &Plant,
    xi0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<IterationTrace, CycleError> {
    let mut iterates = Vec::with_capacity(64.min(max_iter + 1));
    iterates.push(xi0);
    let mut xi = xi0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let next = -switching::f_plus(plant, xi)?;
        iterates.push(next);
        residual = (next - xi).abs();
        xi = next;
        if residual <= tol * xi.abs().max(1.0) {
            return Ok(IterationTrace {
                xi0,
                iterates,
                converged: true,
                residual,
            });
        }
    }
    Err(CycleError::MaxIterExceeded {
        max_iter,
        residual,
        trace: IterationTrace {
            xi0,
            iterates,
            converged: false,
            residual,
        },
    })
}

/// Sampled maximum of `|f_plus'|` over `[0, theta]`: an `n`-point uniform grid
/// followed by two refinement passes around the running arg-max. The estimate
/// approaches the true supremum from below; anything at or above one signals a
/// broken assumption. Requires the positive-zero branch.
pub fn contraction_bound(plant: &Plant, theta: f64, n: usize) -> Result<f64, CycleError> {
    if !matches!(plant.zero(), ZeroClass::PositiveZero { .. }) {
        return Err(CycleError::RequiresPositiveZero {
            kappa: plant.kappa(),
        });
    }
    assert!(theta > 0.0, "theta must be positive");
    let n = n.max(3);

    let grid_max = |lo: f64, hi: f64, n: usize| -> Result<(f64, f64), CycleError> {
        let mut best = (lo, 0.0f64);
        for i in 0..n {
            let xi = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let d = switching::f_plus_prime(plant, xi)?.abs();
            if d > best.1 {
                best = (xi, d);
            }
        }
        Ok(best)
    };

    let (mut arg, mut max) = grid_max(0.0, theta, n)?;
    let mut half_window = theta / (n - 1) as f64;
    for _ in 0..2 {
        let lo = (arg - half_window).max(0.0);
        let hi = (arg + half_window).min(theta);
        let (a, m) = grid_max(lo, hi, n)?;
        if m > max {
            arg = a;
            max = m;
        }
        half_window = (hi - lo) / (n - 1) as f64;
    }

    if max >= 1.0 {
        return Err(CycleError::NotContractive { estimate: max });
    }
    Ok(max)
}

/// Smallest grid-certified `theta` with `-f_plus([0, theta])` inside
/// `[0, theta]`. Because `-f_plus` is increasing and positive at zero on the
/// positive-zero branch, the containment reduces to `-f_plus(theta) <= theta`;
/// the threshold is found by a geometric scan followed by bisection down, and
/// the certified (upper) end of the final bracket is returned.
///
/// For the real-pole classes the phase-portrait bound gives a guaranteed
/// fallback certificate `kappa + gamma/beta` (distinct) or `kappa + gamma/alpha`
/// (repeated); the complex branch has no constructive bound and relies on the
/// scan, whose success is guaranteed by the large-`xi` decay of `|f_plus|`.
pub fn self_mapping_threshold(plant: &Plant) -> Result<f64, CycleError> {
    if !matches!(plant.zero(), ZeroClass::PositiveZero { .. }) {
        return Err(CycleError::RequiresPositiveZero {
            kappa: plant.kappa(),
        });
    }
    let certifies = |theta: f64| -> Result<bool, CycleError> {
        Ok(-switching::f_plus(plant, theta)? <= theta)
    };

    let fallback = match plant.poles() {
        PoleStructure::DistinctReal { beta, .. } => Some(plant.kappa() + plant.gamma() / beta),
        PoleStructure::RepeatedReal { alpha } => Some(plant.kappa() + plant.gamma() / alpha),
        PoleStructure::ComplexConjugate { .. } => None,
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut scans = 0;
    while !certifies(hi)? {
        lo = hi;
        hi *= 2.0;
        scans += 1;
        if scans > 200 {
            // Unreachable for validated plants; the real-pole fallback is a
            // proven certificate either way.
            if let Some(fb) = fallback {
                return Ok(fb);
            }
            return Err(CycleError::Switch(crate::error::SwitchError::NoConvergence(
                "self-mapping scan exhausted".into(),
            )));
        }
    }
    if let Some(fb) = fallback {
        // The fallback always certifies and sits right of any failing point,
        // so it can only tighten the bracket.
        hi = hi.min(fb);
    }
    for _ in 0..80 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if certifies(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Behaviour classes of the relay feedback loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// A symmetric unimodal limit cycle attracts every trajectory.
    SelfOscillation,
    /// All trajectories converge to the origin (no finite zero).
    ConvergesToOrigin,
    /// All trajectories converge to the chattering segment (negative zero).
    ConvergesToChatteringSet,
}

/// Certified asymptotic behaviour of a validated plant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCycleCertificate {
    pub classification: Classification,
    /// Fixed point of `-f_plus`; the right switching abscissa of the cycle.
    pub xi_cycle: Option<f64>,
    /// `tau_plus(xi_cycle)`: half the cycle period.
    pub half_period: Option<f64>,
    /// Peak of the plant output on the cycle: `q(tau*; xi_cycle)`.
    pub output_amplitude: Option<f64>,
    /// `f_plus'(xi_cycle)`.
    pub half_map_multiplier: Option<f64>,
    /// `f_plus'(xi_cycle)^2`: multiplier of the full return map.
    pub full_return_multiplier: Option<f64>,
    /// Sampled Lipschitz estimate of `-f_plus` over `[0, theta]`. A grid
    /// estimate, not a proof.
    pub contraction_bound: Option<f64>,
    /// The interval end `theta` the contraction estimate was sampled on;
    /// bounded below by the self-mapping threshold.
    pub certified_interval_theta: Option<f64>,
    /// `[-|kappa|, |kappa|]` on the switching line, for the negative-zero class.
    pub chattering_set: Option<[f64; 2]>,
    /// The iterates backing the classification.
    pub trace: IterationTrace,
}

/// Build the behaviour certificate, dispatching on the zero class.
///
/// Positive zero: run the half-map iteration from `max(1, eta)`, polish the
/// fixed point with Newton on `f_plus(xi) + xi`, and fill every cycle field.
/// No finite zero: record a monotone-decay trace toward the origin. Negative
/// zero: record the descent into the chattering segment.
pub fn certify(plant: &Plant) -> Result<LimitCycleCertificate, CycleError> {
    certify_with(plant, DEFAULT_ITER_TOL, DEFAULT_MAX_ITER)
}

/// [`certify`] with explicit stopping tolerance and iteration cap.
pub fn certify_with(
    plant: &Plant,
    tol: f64,
    max_iter: usize,
) -> Result<LimitCycleCertificate, CycleError> {
    match plant.zero() {
        ZeroClass::PositiveZero { .. } => {
            let eta = self_mapping_threshold(plant)?;
            let theta = eta.max(1.0);
            let trace = match iterate_half_map(plant, theta, tol, max_iter) {
                Ok(t) => t,
                // Lightly damped complex poles contract slowly; the Newton
                // polish below still finishes from the partial trace.
                Err(CycleError::MaxIterExceeded { trace, .. }) => trace,
                Err(e) => return Err(e),
            };

            // Newton on g(xi) = f_plus(xi) + xi, g' = f_plus' + 1 in (0, 1).
            let mut xi = trace.last();
            for _ in 0..30 {
                let g = switching::f_plus(plant, xi)? + xi;
                let dg = switching::f_plus_prime(plant, xi)? + 1.0;
                let next = xi - g / dg;
                if (next - xi).abs() <= 1e-15 * xi.abs().max(1.0) {
                    xi = next;
                    break;
                }
                xi = next;
            }
            let residual = (switching::f_plus(plant, xi)? + xi).abs();
            if residual > tol * xi.abs().max(1.0) {
                return Err(CycleError::MaxIterExceeded {
                    max_iter,
                    residual,
                    trace,
                });
            }

            let half_period = switching::tau_plus(plant, xi, DEFAULT_ROOT_TOL)?;
            let tau_star = flow::critical_time(plant, xi).expect("xi_cycle > onset");
            let amplitude = flow::flow_positive(plant, xi, tau_star).q;
            let multiplier = switching::f_plus_prime(plant, xi)?;
            let lambda = contraction_bound(plant, theta, 1024)?;

            Ok(LimitCycleCertificate {
                classification: Classification::SelfOscillation,
                xi_cycle: Some(xi),
                half_period: Some(half_period),
                output_amplitude: Some(amplitude),
                half_map_multiplier: Some(multiplier),
                full_return_multiplier: Some(multiplier * multiplier),
                contraction_bound: Some(lambda),
                certified_interval_theta: Some(theta),
                chattering_set: None,
                trace,
            })
        }
        ZeroClass::NoFiniteZero => {
            // The half-map has unit slope at its fixed point zero, so the
            // decay is sub-geometric; a bounded trace documents the monotone
            // approach without demanding a residual-level stop.
            let trace = match iterate_half_map(plant, 1.0, tol, 200.min(max_iter)) {
                Ok(t) => t,
                Err(CycleError::MaxIterExceeded { trace, .. }) => trace,
                Err(e) => return Err(e),
            };
            Ok(LimitCycleCertificate {
                classification: Classification::ConvergesToOrigin,
                xi_cycle: None,
                half_period: None,
                output_amplitude: None,
                half_map_multiplier: None,
                full_return_multiplier: None,
                contraction_bound: None,
                certified_interval_theta: None,
                chattering_set: None,
                trace,
            })
        }
        ZeroClass::NegativeZero { kappa_hat } => {
            // Iterate until the abscissa enters the chattering segment; each
            // step outside it shrinks the abscissa by at least 2 kappa_hat, so
            // the loop is short.
            let mut iterates = vec![];
            let mut xi = (kappa_hat + 1.0).max(3.0 * kappa_hat);
            iterates.push(xi);
            let mut residual = f64::INFINITY;
            while xi.abs() > kappa_hat {
                let next = -switching::f_plus(plant, xi)?;
                residual = (next - xi).abs();
                iterates.push(next);
                xi = next;
                if iterates.len() > max_iter {
                    return Err(CycleError::MaxIterExceeded {
                        max_iter,
                        residual,
                        trace: IterationTrace {
                            xi0: iterates[0],
                            iterates,
                            converged: false,
                            residual,
                        },
                    });
                }
            }
            Ok(LimitCycleCertificate {
                classification: Classification::ConvergesToChatteringSet,
                xi_cycle: None,
                half_period: None,
                output_amplitude: None,
                half_map_multiplier: None,
                full_return_multiplier: None,
                contraction_bound: None,
                certified_interval_theta: None,
                chattering_set: Some([-kappa_hat, kappa_hat]),
                trace: IterationTrace {
                    xi0: iterates[0],
                    iterates,
                    converged: true,
                    residual,
                },
            })
        }
    }
}

/// Residuals of the kappa-shift identities at `xi`, for the pair of plants
/// `(-l s + gamma)/(s^2 + a1 s + a2)` and `(-kappa_hat s + gamma)/(...)`:
///
/// ```text
/// f_{+,l}(xi)  = f_{+,kh}(xi + l - kh) - l + kh
/// f'_{+,l}(xi) = f'_{+,kh}(xi + l - kh)
/// ```
///
/// Varying the numerator slope only translates the vector field along the
/// switching line. Both sides are evaluated with independent exit-time solves.
pub fn kappa_shift_check(
    gamma: f64,
    a1: f64,
    a2: f64,
    l: f64,
    kappa_hat: f64,
    xi: f64,
) -> Result<(f64, f64), CycleError> {
    let plant_l = Plant::from_kappa_gamma(l, gamma, a1, a2).map_err(bad_plant)?;
    let plant_k = Plant::from_kappa_gamma(kappa_hat, gamma, a1, a2).map_err(bad_plant)?;
    let shifted = xi + l - kappa_hat;

    let lhs_f = switching::f_plus(&plant_l, xi)?;
    let rhs_f = switching::f_plus(&plant_k, shifted)? - l + kappa_hat;

    let lhs_d = switching::f_plus_prime(&plant_l, xi)?;
    let rhs_d = switching::f_plus_prime(&plant_k, shifted)?;

    Ok(((lhs_f - rhs_f).abs(), (lhs_d - rhs_d).abs()))
}

fn bad_plant(e: crate::error::PlantError) -> CycleError {
    CycleError::Switch(crate::error::SwitchError::NoConvergence(format!(
        "invalid plant in shift check: {e}"
    )))
}
