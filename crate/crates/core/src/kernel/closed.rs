//! Explicit weighted heat kernels.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernels with a closed form.
///
/// All kinds except the Mehler kernels are radial in the distance `r` from
/// the pole; the Mehler kernels take both spatial arguments on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedFormKernel {
    /// `(4 pi t)^{-n/2} exp(-r^2 / 4t)`.
    Euclidean { n: usize },
    /// Line with `phi(x) = sign * x`, kernel from the origin:
    /// `exp(sign r / 2 - t / 4) (4 pi t)^{-1/2} exp(-r^2 / 4t)`.
    SteadySoliton { sign: f64 },
    /// Line with `phi(x) = x^2`.
    MehlerShrinking,
    /// Line with `phi(x) = -x^2`.
    MehlerExpanding,
    /// Hyperbolic 3-space with `phi(r) = -2 log(r / sinh r)`.
    Hyperbolic3Weighted,
}

/// Argument shape of a closed-form kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelPoint {
    Radial(f64),
    Pair(f64, f64),
}

impl ClosedFormKernel {
    pub fn takes_pair(&self) -> bool {
        matches!(self, Self::MehlerShrinking | Self::MehlerExpanding)
    }

    /// Potential on the line (or in the radial variable) paired with this kernel.
    pub fn potential(&self, x: f64) -> f64 {
        match *self {
            Self::Euclidean { .. } => 0.0,
            Self::SteadySoliton { sign } => sign * x,
            Self::MehlerShrinking => x * x,
            Self::MehlerExpanding => -x * x,
            Self::Hyperbolic3Weighted => {
                if x < 1e-4 {
                    x * x / 3.0 - x.powi(4) / 90.0
                } else {
                    -2.0 * (x / x.sinh()).ln()
                }
            }
        }
    }
}

impl fmt::Display for ClosedFormKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euclidean { n } => write!(f, "euclidean({n})"),
            Self::SteadySoliton { sign } if *sign > 0.0 => write!(f, "steady_soliton(+1)"),
            Self::SteadySoliton { .. } => write!(f, "steady_soliton(-1)"),
            Self::MehlerShrinking => write!(f, "mehler_shrinking"),
            Self::MehlerExpanding => write!(f, "mehler_expanding"),
            Self::Hyperbolic3Weighted => write!(f, "hyperbolic3_weighted"),
        }
    }
}

fn r_over_sinh(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 - r * r / 6.0 + 7.0 * r.powi(4) / 360.0
    } else {
        r / r.sinh()
    }
}

/// Evaluate a closed-form kernel at time `t > 0`.
pub fn closed_form_eval(kind: ClosedFormKernel, point: KernelPoint, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("kernel time must be positive, got {t}")));
    }
    let gauss = |r: f64, dim: f64| (4.0 * PI * t).powf(-0.5 * dim) * (-r * r / (4.0 * t)).exp();
    match (kind, point) {
        (ClosedFormKernel::Euclidean { n }, KernelPoint::Radial(r)) if r >= 0.0 => {
            if n == 0 {
                return Err(Error::domain("Euclidean kernel needs n >= 1"));
            }
            Ok(gauss(r, n as f64))
        }
        (ClosedFormKernel::SteadySoliton { sign }, KernelPoint::Radial(r)) if r >= 0.0 => {
            if sign.abs() != 1.0 {
                return Err(Error::domain(format!("soliton sign must be +1 or -1, got {sign}")));
            }
            Ok((0.5 * sign * r - 0.25 * t).exp() * gauss(r, 1.0))
        }
        (ClosedFormKernel::Hyperbolic3Weighted, KernelPoint::Radial(r)) if r >= 0.0 => {
            Ok((-0.25 * t).exp() * r_over_sinh(r) * gauss(r, 3.0))
        }
        (ClosedFormKernel::MehlerShrinking, KernelPoint::Pair(x, y)) => {
            let (a, b) = ((-2.0 * t).exp(), -(-4.0 * t).exp_m1());
            let exponent = (2.0 * x * y * a - (x * x + y * y) * a * a) / b + t;
            Ok(exponent.exp() / (2.0 * PI * (2.0 * t).sinh()).sqrt())
        }
        (ClosedFormKernel::MehlerExpanding, KernelPoint::Pair(x, y)) => {
            let (a, b) = ((-2.0 * t).exp(), -(-4.0 * t).exp_m1());
            let exponent = (2.0 * x * y * a - (x * x + y * y)) / b - t;
            Ok(exponent.exp() / (2.0 * PI * (2.0 * t).sinh()).sqrt())
        }
        (kind, KernelPoint::Radial(r)) if !kind.takes_pair() => {
            Err(Error::domain(format!("radial argument must be >= 0, got {r}")))
        }
        (kind, _) => Err(Error::domain(format!(
            "{kind} takes {} argument",
            if kind.takes_pair() { "a pair (x, y)" } else { "a radial" }
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(kind: ClosedFormKernel, r: f64, t: f64) -> f64 {
        closed_form_eval(kind, KernelPoint::Radial(r), t).unwrap()
    }

    fn pair(kind: ClosedFormKernel, x: f64, y: f64, t: f64) -> f64 {
        closed_form_eval(kind, KernelPoint::Pair(x, y), t).unwrap()
    }

    #[test]
    fn point_values() {
        let e1 = radial(ClosedFormKernel::Euclidean { n: 1 }, 0.0, 1.0);
        assert!((e1 - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((e1 - 0.2820948).abs() < 1e-7);

        let steady = radial(ClosedFormKernel::SteadySoliton { sign: 1.0 }, 0.0, 1.0);
        assert!((steady - (-0.25f64).exp() / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((steady - 0.2196956).abs() < 1e-7);

        let mehler = pair(ClosedFormKernel::MehlerShrinking, 0.0, 0.0, 1.0);
        assert!((mehler - 1f64.exp() / (2.0 * PI * 2f64.sinh()).sqrt()).abs() < 1e-15);
        assert!((mehler - 0.5694284).abs() < 1e-7);

        let hyp = radial(ClosedFormKernel::Hyperbolic3Weighted, 0.0, 1.0);
        assert!((hyp - (-0.25f64).exp() / (4.0 * PI).powf(1.5)).abs() < 1e-16);
        assert!((hyp - 0.0174828).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_arguments() {
        let k = ClosedFormKernel::Euclidean { n: 2 };
        assert!(closed_form_eval(k, KernelPoint::Radial(0.0), 0.0).unwrap_err().is_input_error());
        assert!(closed_form_eval(k, KernelPoint::Radial(-1.0), 1.0).is_err());
        assert!(closed_form_eval(k, KernelPoint::Pair(0.0, 1.0), 1.0).is_err());
        assert!(closed_form_eval(ClosedFormKernel::MehlerShrinking, KernelPoint::Radial(1.0), 1.0).is_err());
        let bad = ClosedFormKernel::SteadySoliton { sign: 2.0 };
        assert!(closed_form_eval(bad, KernelPoint::Radial(1.0), 1.0).is_err());
    }

    /// `u_t - (u_xx - phi' u_x)` by central differences in `x` (second argument) and `t`.
    fn line_residual(kind: ClosedFormKernel, x: f64, y: f64, t: f64) -> f64 {
        let d = 1e-4;
        let u = |y: f64, t: f64| pair_or_radial(kind, x, y, t);
        let ut = (u(y, t + d) - u(y, t - d)) / (2.0 * d);
        let uy = (u(y + d, t) - u(y - d, t)) / (2.0 * d);
        let uyy = (u(y + d, t) - 2.0 * u(y, t) + u(y - d, t)) / (d * d);
        let dphi = (kind.potential(y + d) - kind.potential(y - d)) / (2.0 * d);
        (ut - (uyy - dphi * uy)) / u(y, t)
    }

    fn pair_or_radial(kind: ClosedFormKernel, x: f64, y: f64, t: f64) -> f64 {
        if kind.takes_pair() {
            pair(kind, x, y, t)
        } else {
            // the soliton kernel from x = 0 extends to y < 0 by the same formula
            let sign = match kind {
                ClosedFormKernel::SteadySoliton { sign } => sign,
                _ => unreachable!(),
            };
            (0.5 * sign * y - 0.25 * t).exp() * (4.0 * PI * t).powf(-0.5) * (-y * y / (4.0 * t)).exp()
        }
    }

    #[test]
    fn line_kernels_solve_their_heat_equations() {
        for kind in [
            ClosedFormKernel::SteadySoliton { sign: 1.0 },
            ClosedFormKernel::SteadySoliton { sign: -1.0 },
            ClosedFormKernel::MehlerShrinking,
            ClosedFormKernel::MehlerExpanding,
        ] {
            for (x, y, t) in [(0.0, 0.3, 0.5), (0.3, -0.4, 0.7), (-1.0, 0.2, 1.3)] {
                let x = if kind.takes_pair() { x } else { 0.0 };
                let res = line_residual(kind, x, y, t);
                assert!(res.abs() < 1e-5, "{kind} at ({x}, {y}, {t}): {res}");
            }
        }
    }

    #[test]
    fn mehler_kernels_are_symmetric() {
        for kind in [ClosedFormKernel::MehlerShrinking, ClosedFormKernel::MehlerExpanding] {
            let a = pair(kind, 0.3, -1.1, 0.4);
            let b = pair(kind, -1.1, 0.3, 0.4);
            assert!((a - b).abs() < 1e-15 * a);
        }
    }

    #[test]
    fn hyperbolic_limit_is_continuous() {
        let k = ClosedFormKernel::Hyperbolic3Weighted;
        let below = radial(k, 0.99e-4, 0.5);
        let above = radial(k, 1.01e-4, 0.5);
        assert!((below - above).abs() < 1e-9 * below);
    }
}
