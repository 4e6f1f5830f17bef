//! Plant parsing, validation, classification, and state-space realization.
//!
//! The plant is the strictly proper second-order transfer function
//!
//! ```text
//!         b1 s + b0
//!   ----------------------
//!    s^2 + a1 s + a2
//! ```
//!
//! held internally as `(-kappa s + gamma) / (s^2 + a1 s + a2)` with
//! `kappa = -b1` and `gamma = b0`. Validation requires a Hurwitz denominator
//! (`a1, a2 > 0`) and positive DC gain (`b0 > 0`); the sign of `b1` is free
//! and selects the zero class.

use serde::{Deserialize, Serialize};

use crate::error::PlantError;

/// Raw transfer-function coefficients as supplied by the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantSpec {
    /// Numerator coefficient of `s` (internally `kappa = -b1`).
    pub b1: f64,
    /// Numerator constant term (`gamma`).
    pub b0: f64,
    /// Denominator coefficient of `s` (monic denominator).
    pub a1: f64,
    /// Denominator constant term.
    pub a2: f64,
}

/// On-disk plant layout: `{"num": [b1, b0], "den": [1.0, a1, a2]}`.
#[derive(Debug, Deserialize, Serialize)]
struct PlantFile {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl PlantSpec {
    pub fn new(b1: f64, b0: f64, a1: f64, a2: f64) -> Self {
        Self { b1, b0, a1, a2 }
    }

    /// Parse the plant JSON object. The denominator must have exactly three
    /// entries with a leading `1.0`; non-monic input is rejected rather than
    /// normalized.
    pub fn from_json_str(s: &str) -> Result<Self, PlantError> {
        let file: PlantFile =
            serde_json::from_str(s).map_err(|e| PlantError::BadFormat(e.to_string()))?;
        if file.num.len() != 2 {
            return Err(PlantError::BadFormat(format!(
                "numerator must have exactly 2 entries [b1, b0], got {}",
                file.num.len()
            )));
        }
        if file.den.len() != 3 {
            return Err(PlantError::BadFormat(format!(
                "denominator must have exactly 3 entries [1.0, a1, a2], got {}",
                file.den.len()
            )));
        }
        if file.den[0] != 1.0 {
            return Err(PlantError::BadFormat(format!(
                "denominator must be monic with leading coefficient exactly 1.0, got {}",
                file.den[0]
            )));
        }
        let spec = PlantSpec::new(file.num[0], file.num[1], file.den[1], file.den[2]);
        if !spec.b1.is_finite()
            || !spec.b0.is_finite()
            || !spec.a1.is_finite()
            || !spec.a2.is_finite()
        {
            return Err(PlantError::BadFormat("coefficients must be finite".into()));
        }
        Ok(spec)
    }

    /// Serialize back to the plant JSON layout.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({ "num": [self.b1, self.b0], "den": [1.0, self.a1, self.a2] })
    }

    /// Check the standing assumptions and hand the coefficients back unchanged.
    pub fn validate(self) -> Result<Self, PlantError> {
        validate_plant(&self)?;
        Ok(self)
    }

    /// `kappa = -b1`, the negated numerator slope.
    pub fn kappa(&self) -> f64 {
        -self.b1
    }

    /// `gamma = b0`, the numerator constant.
    pub fn gamma(&self) -> f64 {
        self.b0
    }
}

/// Validate stability and DC gain. Nonminimum phase is *not* required here;
/// the zero location is recorded separately by [`classify_zero`].
pub fn validate_plant(spec: &PlantSpec) -> Result<(), PlantError> {
    // NaN coefficients fail both checks.
    let hurwitz = spec.a1 > 0.0 && spec.a2 > 0.0;
    if !hurwitz {
        return Err(PlantError::NotHurwitz {
            a1: spec.a1,
            a2: spec.a2,
        });
    }
    let positive_gain = spec.b0 > 0.0;
    if !positive_gain {
        return Err(PlantError::NonPositiveGain { b0: spec.b0 });
    }
    Ok(())
}

/// The three pole regimes of the monic quadratic `s^2 + a1 s + a2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PoleStructure {
    /// Poles `-alpha`, `-beta` with `alpha > beta > 0`.
    DistinctReal { alpha: f64, beta: f64 },
    /// Double pole at `-alpha`, `alpha > 0`.
    RepeatedReal { alpha: f64 },
    /// Poles `-sigma +/- i omega` with `sigma, omega > 0`.
    ComplexConjugate { sigma: f64, omega: f64 },
}

impl PoleStructure {
    /// Reassemble `(a1, a2)` from the pole data.
    pub fn denominator(&self) -> (f64, f64) {
        match *self {
            PoleStructure::DistinctReal { alpha, beta } => (alpha + beta, alpha * beta),
            PoleStructure::RepeatedReal { alpha } => (2.0 * alpha, alpha * alpha),
            PoleStructure::ComplexConjugate { sigma, omega } => {
                (2.0 * sigma, sigma * sigma + omega * omega)
            }
        }
    }
}

/// Default tolerance band for the repeated-pole snap. Near-repeated poles make
/// the distinct-pole formulas ill-conditioned (they divide by `alpha - beta`),
/// so a thin band around a zero discriminant maps to the repeated branch.
pub fn default_discriminant_tol(spec: &PlantSpec) -> f64 {
    1e-9 * f64::max(1.0, spec.a1 * spec.a1)
}

/// Classify the denominator by the sign of its discriminant `a1^2 - 4 a2`,
/// with a `tol`-wide band snapping to the repeated branch.
pub fn classify_poles(spec: &PlantSpec, tol: f64) -> PoleStructure {
    let disc = spec.a1 * spec.a1 - 4.0 * spec.a2;
    if disc > tol {
        let root = disc.sqrt();
        PoleStructure::DistinctReal {
            alpha: 0.5 * (spec.a1 + root),
            beta: 0.5 * (spec.a1 - root),
        }
    } else if disc < -tol {
        PoleStructure::ComplexConjugate {
            sigma: 0.5 * spec.a1,
            omega: 0.5 * (-disc).sqrt(),
        }
    } else {
        PoleStructure::RepeatedReal {
            alpha: 0.5 * spec.a1,
        }
    }
}

/// The three zero regimes of the numerator `-kappa s + gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ZeroClass {
    /// `kappa > 0`: one zero at `gamma / kappa > 0` (nonminimum phase).
    PositiveZero { kappa: f64 },
    /// `kappa = 0`: constant numerator.
    NoFiniteZero,
    /// `kappa < 0`: one zero at `gamma / kappa < 0`; `kappa_hat = |kappa|`.
    NegativeZero { kappa_hat: f64 },
}

/// Classify the zero by the sign of `b1` (`kappa = -b1`).
pub fn classify_zero(spec: &PlantSpec) -> ZeroClass {
    if spec.b1 < 0.0 {
        ZeroClass::PositiveZero { kappa: -spec.b1 }
    } else if spec.b1 > 0.0 {
        ZeroClass::NegativeZero { kappa_hat: spec.b1 }
    } else {
        ZeroClass::NoFiniteZero
    }
}

/// Observer-canonical state-space matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realization {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
}

/// Build the observer realization: `A = [[0, -a2], [1, -a1]]`,
/// `B = (gamma, -kappa)^T`, `C = (0, 1)`.
pub fn realize(spec: &PlantSpec) -> Realization {
    Realization {
        a: [[0.0, -spec.a2], [1.0, -spec.a1]],
        b: [spec.gamma(), -spec.kappa()],
        c: [0.0, 1.0],
    }
}

/// Solve `A x = B` by elimination; the equilibrium of the affine field active
/// under relay output `+1`. Its second coordinate is `-gamma / a2 < 0`, so the
/// sink always lies below the switching line.
pub fn sink_point(real: &Realization) -> [f64; 2] {
    // Gaussian elimination with the larger pivot of the first column. For the
    // observer form the first column is (0, 1), so row 2 pivots first.
    let a = real.a;
    let b = real.b;
    // Rows: [a00 a01 | b0], [a10 a11 | b1] with a00 = 0, a10 = 1.
    let (p, q) = if a[0][0].abs() >= a[1][0].abs() {
        (0, 1)
    } else {
        (1, 0)
    };
    let factor = a[q][0] / a[p][0];
    let a_q1 = a[q][1] - factor * a[p][1];
    let b_q = b[q] - factor * b[p];
    let x2 = b_q / a_q1;
    let x1 = (b[p] - a[p][1] * x2) / a[p][0];
    [x1, x2]
}

/// A validated plant with its derived classification, realization, and sink.
///
/// This is the handle the flow, switching-map, limit-cycle, and simulator
/// modules take; all fields are immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant {
    spec: PlantSpec,
    kappa: f64,
    gamma: f64,
    poles: PoleStructure,
    zero: ZeroClass,
    realization: Realization,
    sink: [f64; 2],
}

impl Plant {
    /// Validate and classify `spec` using the default discriminant tolerance.
    pub fn new(spec: PlantSpec) -> Result<Self, PlantError> {
        Self::with_pole_tol(spec, default_discriminant_tol(&spec))
    }

    /// Validate and classify `spec` with an explicit discriminant tolerance.
    pub fn with_pole_tol(spec: PlantSpec, tol: f64) -> Result<Self, PlantError> {
        let spec = spec.validate()?;
        let realization = realize(&spec);
        Ok(Self {
            spec,
            kappa: spec.kappa(),
            gamma: spec.gamma(),
            poles: classify_poles(&spec, tol),
            zero: classify_zero(&spec),
            realization,
            sink: sink_point(&realization),
        })
    }

    /// Convenience constructor from `(-kappa s + gamma)/(s^2 + a1 s + a2)`.
    pub fn from_kappa_gamma(kappa: f64, gamma: f64, a1: f64, a2: f64) -> Result<Self, PlantError> {
        Self::new(PlantSpec::new(-kappa, gamma, a1, a2))
    }

    pub fn spec(&self) -> &PlantSpec {
        &self.spec
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn poles(&self) -> PoleStructure {
        self.poles
    }

    pub fn zero(&self) -> ZeroClass {
        self.zero
    }

    pub fn realization(&self) -> &Realization {
        &self.realization
    }

    /// Equilibrium `A^{-1} B` of the relay-output-`+1` field.
    pub fn sink(&self) -> [f64; 2] {
        self.sink
    }

    /// Switch onset abscissa `-kappa`: the switching map is the identity at or
    /// left of it.
    pub fn onset(&self) -> f64 {
        -self.kappa
    }

    /// Magnitude of the fastest pole; sets the simulator's default step.
    pub fn fastest_mode(&self) -> f64 {
        match self.poles {
            PoleStructure::DistinctReal { alpha, .. } => alpha,
            PoleStructure::RepeatedReal { alpha } => alpha,
            PoleStructure::ComplexConjugate { sigma, omega } => {
                (sigma * sigma + omega * omega).sqrt()
            }
        }
    }

    /// Magnitude of the slowest decay rate; sets root-scale heuristics.
    pub fn slowest_mode(&self) -> f64 {
        match self.poles {
            PoleStructure::DistinctReal { beta, .. } => beta,
            PoleStructure::RepeatedReal { alpha } => alpha,
            PoleStructure::ComplexConjugate { sigma, .. } => sigma,
        }
    }
}
