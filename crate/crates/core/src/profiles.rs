//! Radial curvature bounds `kappa(s)` and radial potentials `phi(s)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::MonotoneCubic;

/// Below this radius the hyperbolic-log potential is evaluated from its Taylor series.
const SERIES_CUTOFF: f64 = 1e-6;

/// Named curvature profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinCurvature {
    /// `kappa = 0`, warping `f = s`.
    Euclidean,
    /// `kappa = 1`, warping `f = sin s`.
    Sphere,
    /// `kappa = -1`, warping `f = sinh s`.
    Hyperbolic,
}

impl BuiltinCurvature {
    pub fn value(self) -> f64 {
        match self {
            BuiltinCurvature::Euclidean => 0.0,
            BuiltinCurvature::Sphere => 1.0,
            BuiltinCurvature::Hyperbolic => -1.0,
        }
    }
}

impl FromStr for BuiltinCurvature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "sphere" => Ok(Self::Sphere),
            "hyperbolic" => Ok(Self::Hyperbolic),
            other => Err(Error::Config(format!("unknown builtin curvature profile '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureKind {
    Constant(f64),
    /// `kappa(s) = sum c_i s^i`.
    Polynomial(Vec<f64>),
    Tabulated(MonotoneCubic),
    Named(BuiltinCurvature),
}

/// A continuous radial curvature function on `[0, s_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    kind: CurvatureKind,
    s_max: f64,
}

impl CurvatureProfile {
    pub fn new(kind: CurvatureKind, s_max: f64) -> Result<Self> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::domain(format!("s_max must be positive and finite, got {s_max}")));
        }
        match &kind {
            CurvatureKind::Constant(k) if !k.is_finite() => {
                return Err(Error::domain("constant curvature must be finite"));
            }
            CurvatureKind::Polynomial(c) if c.is_empty() || c.iter().any(|x| !x.is_finite()) => {
                return Err(Error::domain("polynomial curvature needs finite coefficients"));
            }
            CurvatureKind::Tabulated(t) if t.first() > 0.0 || t.last() < s_max => {
                return Err(Error::domain(format!(
                    "tabulated curvature covers [{}, {}] but [0, {s_max}] is required",
                    t.first(),
                    t.last()
                )));
            }
            _ => {}
        }
        Ok(Self { kind, s_max })
    }

    pub fn constant(k: f64, s_max: f64) -> Result<Self> {
        Self::new(CurvatureKind::Constant(k), s_max)
    }

    pub fn polynomial(coeffs: Vec<f64>, s_max: f64) -> Result<Self> {
        Self::new(CurvatureKind::Polynomial(coeffs), s_max)
    }

    pub fn tabulated(s: Vec<f64>, kappa: Vec<f64>, s_max: f64) -> Result<Self> {
        Self::new(CurvatureKind::Tabulated(MonotoneCubic::new(s, kappa)?), s_max)
    }

    pub fn named(id: BuiltinCurvature, s_max: f64) -> Result<Self> {
        Self::new(CurvatureKind::Named(id), s_max)
    }

    pub fn kind(&self) -> &CurvatureKind {
        &self.kind
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// The same profile restricted or extended to a new `s_max`.
    pub fn with_s_max(&self, s_max: f64) -> Result<Self> {
        Self::new(self.kind.clone(), s_max)
    }

    /// The constant value, when the profile does not depend on `s`.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.kind {
            CurvatureKind::Constant(k) => Some(*k),
            CurvatureKind::Named(id) => Some(id.value()),
            CurvatureKind::Polynomial(c) if c.iter().skip(1).all(|&x| x == 0.0) => Some(c[0]),
            _ => None,
        }
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        check_range(s, self.s_max)?;
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        match &self.kind {
            CurvatureKind::Constant(k) => *k,
            CurvatureKind::Named(id) => id.value(),
            CurvatureKind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &x| acc * s + x),
            CurvatureKind::Tabulated(t) => t.eval(s).0,
        }
    }
}

/// `kappa(s)` for `0 <= s <= s_max`.
pub fn eval_curvature(profile: &CurvatureProfile, s: f64) -> Result<f64> {
    profile.eval(s)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Constant(f64),
    /// `phi = k s` with `k = +1` or `-1`.
    Linear(f64),
    /// `phi = k s^2` with `k = +1` or `-1`.
    Quadratic(f64),
    /// `phi = -2 log(s / sinh s)`.
    HyperbolicLog,
    Tabulated(MonotoneCubic),
}

/// A radial weight `phi(s)`; the measure is `exp(-phi) dv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    s_max: f64,
}

impl Potential {
    pub fn new(kind: PotentialKind, s_max: f64) -> Result<Self> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(Error::domain(format!("s_max must be positive and finite, got {s_max}")));
        }
        match &kind {
            PotentialKind::Linear(k) | PotentialKind::Quadratic(k) if k.abs() != 1.0 => {
                return Err(Error::domain(format!("soliton potentials take k = +1 or -1, got {k}")));
            }
            PotentialKind::Constant(c) if !c.is_finite() => {
                return Err(Error::domain("constant potential must be finite"));
            }
            PotentialKind::Tabulated(t) if t.first() > 0.0 || t.last() < s_max => {
                return Err(Error::domain(format!(
                    "tabulated potential covers [{}, {}] but [0, {s_max}] is required",
                    t.first(),
                    t.last()
                )));
            }
            _ => {}
        }
        Ok(Self { kind, s_max })
    }

    pub fn zero(s_max: f64) -> Result<Self> {
        Self::new(PotentialKind::Constant(0.0), s_max)
    }

    pub fn constant(c: f64, s_max: f64) -> Result<Self> {
        Self::new(PotentialKind::Constant(c), s_max)
    }

    pub fn linear(k: f64, s_max: f64) -> Result<Self> {
        Self::new(PotentialKind::Linear(k), s_max)
    }

    pub fn quadratic(k: f64, s_max: f64) -> Result<Self> {
        Self::new(PotentialKind::Quadratic(k), s_max)
    }

    pub fn hyperbolic_log(s_max: f64) -> Result<Self> {
        Self::new(PotentialKind::HyperbolicLog, s_max)
    }

    pub fn tabulated(s: Vec<f64>, phi: Vec<f64>, s_max: f64) -> Result<Self> {
        Self::new(PotentialKind::Tabulated(MonotoneCubic::new(s, phi)?), s_max)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn with_s_max(&self, s_max: f64) -> Result<Self> {
        Self::new(self.kind.clone(), s_max)
    }

    /// False only for the linear potentials `phi = +-s`, whose derivative
    /// does not vanish at the origin.
    pub fn origin_smooth(&self) -> bool {
        !matches!(self.kind, PotentialKind::Linear(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::Constant(_))
    }

    /// `(phi(s), phi'(s))`.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        check_range(s, self.s_max)?;
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> (f64, f64) {
        match &self.kind {
            PotentialKind::Constant(c) => (*c, 0.0),
            PotentialKind::Linear(k) => (k * s, *k),
            PotentialKind::Quadratic(k) => (k * s * s, 2.0 * k * s),
            PotentialKind::HyperbolicLog => hyperbolic_log(s),
            PotentialKind::Tabulated(t) => t.eval(s),
        }
    }
}

/// `(phi(s), phi'(s))` for `0 <= s <= s_max`.
pub fn eval_potential(potential: &Potential, s: f64) -> Result<(f64, f64)> {
    potential.eval(s)
}

fn hyperbolic_log(s: f64) -> (f64, f64) {
    if s < SERIES_CUTOFF {
        let s2 = s * s;
        return (s2 / 3.0 - s2 * s2 / 90.0, 2.0 * s / 3.0 - 2.0 * s2 * s / 45.0);
    }
    // log(sinh s) without overflow for large s
    let log_sinh = if s < 20.0 {
        s.sinh().ln()
    } else {
        s + (-(-2.0 * s).exp()).ln_1p() - std::f64::consts::LN_2
    };
    let coth = 1.0 / s.tanh();
    (2.0 * (log_sinh - s.ln()), 2.0 * (coth - 1.0 / s))
}

fn check_range(s: f64, s_max: f64) -> Result<()> {
    if !(s >= 0.0 && s <= s_max * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::domain(format!("s = {s} outside [0, {s_max}]")));
    }
    Ok(())
}

impl fmt::Display for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CurvatureKind::Constant(k) => write!(f, "constant({k})"),
            CurvatureKind::Polynomial(c) => write!(f, "polynomial({c:?})"),
            CurvatureKind::Tabulated(t) => write!(f, "tabulated({} nodes)", t.xs().len()),
            CurvatureKind::Named(id) => write!(f, "{id:?}"),
        }
    }
}
