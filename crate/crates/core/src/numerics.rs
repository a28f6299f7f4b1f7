//! Interpolation and quadrature on uniform and tabulated grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// (n-1)-volume of the unit sphere `S^{n-1}`; `w_1 = 2` counts the two points of `S^0`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

/// Composite Simpson rule for samples on a uniform grid of step `h`.
///
/// An odd number of intervals is handled with the 3/8 rule on the last three.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let intervals = values.len().saturating_sub(1);
    match intervals {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        2 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        3 => 3.0 * h / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3]),
        _ if intervals % 2 == 0 => {
            let mut acc = values[0] + values[intervals];
            for (i, v) in values.iter().enumerate().take(intervals).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            acc * h / 3.0
        }
        _ => {
            let split = intervals - 3;
            simpson(&values[..=split], h) + simpson(&values[split..], h)
        }
    }
}

/// Cubic Hermite interpolation on `[x0, x0 + h]` from values and slopes at the ends.
#[inline]
pub fn hermite(x0: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64, x: f64) -> f64 {
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h * h10 * d0 + h01 * y1 + h * h11 * d1
}

/// Derivative of [`hermite`] with respect to `x`.
#[inline]
pub fn hermite_slope(x0: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64, x: f64) -> f64 {
    let t = (x - x0) / h;
    let t2 = t * t;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -6.0 * t2 + 6.0 * t;
    let dh11 = 3.0 * t2 - 2.0 * t;
    (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant of tabulated data.
///
/// Between nodes the interpolant never leaves the range of the neighbouring
/// node values, so a tabulated bound stays a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::domain(format!(
                "tabulated data has {} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::domain("tabulated data needs at least two nodes"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("tabulated abscissae must be strictly increasing"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::domain("tabulated data must be finite"));
        }
        let slopes = fritsch_carlson_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn first(&self) -> f64 {
        self.xs[0]
    }

    pub fn last(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|probe| probe.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        }
    }

    /// Value and derivative at `x`; `x` must lie in `[first, last]`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let i = self.segment(x);
        if x == self.xs[i] {
            return (self.ys[i], self.slopes[i]);
        }
        if x == self.xs[i + 1] {
            return (self.ys[i + 1], self.slopes[i + 1]);
        }
        let h = self.xs[i + 1] - self.xs[i];
        let args = (self.xs[i], h, self.ys[i], self.slopes[i], self.ys[i + 1], self.slopes[i + 1]);
        (
            hermite(args.0, args.1, args.2, args.3, args.4, args.5, x),
            hermite_slope(args.0, args.1, args.2, args.3, args.4, args.5, x),
        )
    }
}

fn fritsch_carlson_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// shape-preserving three-point end condition
fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn simpson_is_exact_for_cubics_with_odd_and_even_counts() {
        for intervals in [2usize, 3, 4, 5, 9, 10] {
            let h = 1.0 / intervals as f64;
            let vals: Vec<f64> = (0..=intervals)
                .map(|i| {
                    let x = i as f64 * h;
                    x * x * x - 2.0 * x + 1.0
                })
                .collect();
            assert!((simpson(&vals, h) - 0.25).abs() < 1e-14, "{intervals}");
        }
    }

    #[test]
    fn pchip_reproduces_nodes_exactly() {
        let c = MonotoneCubic::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(c.eval(1.0).0, 1.0);
        assert_eq!(c.eval(0.0).0, 0.0);
        assert_eq!(c.eval(2.0).0, 0.0);
    }

    #[test]
    fn pchip_rejects_bad_grids() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(MonotoneCubic::new(vec![1.0, 0.5], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn pchip_does_not_overshoot(ys in proptest::collection::vec(-5.0f64..5.0, 3..12), x in 0.0f64..1.0) {
            let n = ys.len();
            let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let c = MonotoneCubic::new(xs, ys.clone()).unwrap();
            let at = x * (n - 1) as f64;
            let i = (at.floor() as usize).min(n - 2);
            let (lo, hi) = (ys[i].min(ys[i + 1]), ys[i].max(ys[i + 1]));
            let v = c.eval(at).0;
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
