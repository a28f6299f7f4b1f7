//! The warping function of a model space: `f'' + kappa f = 0`, `f(0) = 0`, `f'(0) = 1`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::numerics::{hermite, simpson, sphere_area};
use crate::profiles::{CurvatureProfile, Potential};

/// Relative accuracy of the first-zero location.
const ZERO_RTOL: f64 = 1e-10;
/// Below `SERIES_NODES * h` the log-derivative is blended with its Taylor series.
const SERIES_NODES: f64 = 10.0;

/// `f` and `f'` sampled on `0, h, 2h, ...`, up to `s_max` or the first zero of `f`.
#[derive(Debug, Clone)]
pub struct Warping {
    n: usize,
    h: f64,
    f: Vec<f64>,
    fp: Vec<f64>,
    kappa: Vec<f64>,
    first_zero: Option<f64>,
    s_max: f64,
    profile: CurvatureProfile,
}

/// Integrate the warping ODE with classical fourth-order Runge-Kutta.
///
/// `h` is shrunk, if necessary, to divide `s_max` exactly. When `f` changes
/// sign the zero is located by bisection on the cubic Hermite interpolant of
/// the bracketing step and the grid stops at the first node past it.
pub fn solve_warping(profile: &CurvatureProfile, n: usize, s_max: f64, h: f64) -> Result<Warping> {
    if n < 2 {
        return Err(Error::domain(format!("dimension must be at least 2, got {n}")));
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::domain(format!("s_max must be positive, got {s_max}")));
    }
    if !(h > 0.0 && h <= s_max / 100.0 * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("step h = {h} must lie in (0, s_max/100]")));
    }
    if s_max > profile.s_max() * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::domain(format!(
            "profile is defined up to {} but s_max = {s_max}",
            profile.s_max()
        )));
    }
    let steps = (s_max / h - 1e-9).ceil() as usize;
    let h = s_max / steps as f64;
    let kappa_at = |s: f64| profile.eval_unchecked(s.min(profile.s_max()));

    let mut f = Vec::with_capacity(steps + 1);
    let mut fp = Vec::with_capacity(steps + 1);
    let mut kappa = Vec::with_capacity(steps + 1);
    f.push(0.0);
    fp.push(1.0);
    kappa.push(kappa_at(0.0));
    let (mut y, mut yp) = (0.0f64, 1.0f64);
    let mut scale = 1.0f64;
    let mut first_zero = None;

    for i in 0..steps {
        let s = i as f64 * h;
        let k_mid = kappa_at(s + 0.5 * h);
        let k_end = kappa_at(s + h);
        let k0 = kappa[i];
        let (a1, b1) = (yp, -k0 * y);
        let (a2, b2) = (yp + 0.5 * h * b1, -k_mid * (y + 0.5 * h * a1));
        let (a3, b3) = (yp + 0.5 * h * b2, -k_mid * (y + 0.5 * h * a2));
        let (a4, b4) = (yp + h * b3, -k_end * (y + h * a3));
        let y_next = y + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        let yp_next = yp + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        if !(y_next.is_finite() && yp_next.is_finite()) {
            return Err(Error::Solver(format!("warping overflow at s = {}", s + h)));
        }
        scale = scale.max(y_next.abs()).max(yp_next.abs());
        if y_next.abs() <= 1e-14 * scale && yp_next.abs() <= 1e-14 * scale {
            return Err(Error::Solver(format!(
                "f and f' vanish together at s = {}: degenerate solution",
                s + h
            )));
        }

        f.push(y_next);
        fp.push(yp_next);
        kappa.push(k_end);

        if i >= 1 {
            if y_next <= 0.0 {
                first_zero = Some(locate_zero(s, h, y, yp, y_next, yp_next));
                break;
            }
            if yp < 0.0 && yp_next > 0.0 && dips_below_zero(s, h, y, yp, y_next, yp_next) {
                return Err(Error::Refinement(format!(
                    "f has two zeros inside the step at s = {s}; reduce h"
                )));
            }
        }
        y = y_next;
        yp = yp_next;
    }

    Ok(Warping {
        n,
        h,
        f,
        fp,
        kappa,
        first_zero,
        s_max,
        profile: profile.clone(),
    })
}

fn locate_zero(s: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let (mut lo, mut hi) = (s, s + h);
    if y1 == 0.0 {
        return hi;
    }
    while hi - lo > ZERO_RTOL * 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if hermite(s, h, y0, d0, y1, d1, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn dips_below_zero(s: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> bool {
    (1..16).any(|j| hermite(s, h, y0, d0, y1, d1, s + h * j as f64 / 16.0) <= 0.0)
}

impl Warping {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn fp(&self) -> &[f64] {
        &self.fp
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn s(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// First zero `l` of `f`, or `None` when no zero occurs up to `s_max`.
    pub fn first_zero(&self) -> Option<f64> {
        self.first_zero
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }

    /// End of the interval on which `f > 0`: `min(l, s_max)`.
    pub fn positive_end(&self) -> f64 {
        self.first_zero.unwrap_or(self.s_max)
    }

    /// `kappa(0)`.
    pub fn kappa0(&self) -> f64 {
        self.kappa[0]
    }

    fn covered(&self, s: f64) -> Result<()> {
        let end = self.s((self.len() - 1) as usize);
        if !(s >= 0.0 && s <= end * (1.0 + 1e-14)) {
            return Err(Error::domain(format!("s = {s} outside the warping grid [0, {end}]")));
        }
        Ok(())
    }

    /// `(f(s), f'(s))` from cubic Hermite interpolation of `(f, f')` and
    /// `(f', f'' = -kappa f)`; fourth-order accurate in `h`.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        self.covered(s)?;
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> (f64, f64) {
        let last = self.len() - 1;
        let i = ((s / self.h).floor() as usize).min(last - 1);
        let x0 = self.s(i);
        if s == x0 {
            return (self.f[i], self.fp[i]);
        }
        let fpp0 = -self.kappa[i] * self.f[i];
        let fpp1 = -self.kappa[i + 1] * self.f[i + 1];
        let value = hermite(x0, self.h, self.f[i], self.fp[i], self.f[i + 1], self.fp[i + 1], s);
        let slope = hermite(x0, self.h, self.fp[i], fpp0, self.fp[i + 1], fpp1, s);
        (value, slope)
    }

    /// `f'(s) / f(s)` on `0 < s < min(l, s_max)`.
    ///
    /// Close to the origin the grid value is blended with `1/s - kappa(0) s / 3`.
    pub fn log_derivative(&self, s: f64) -> Result<f64> {
        let end = self.positive_end();
        if !(s > 0.0 && s < end) {
            return Err(Error::domain(format!("log-derivative needs 0 < s < {end}, got {s}")));
        }
        Ok(self.log_derivative_unchecked(s))
    }

    pub(crate) fn log_derivative_unchecked(&self, s: f64) -> f64 {
        let cutoff = SERIES_NODES * self.h;
        let series = || 1.0 / s - self.kappa[0] * s / 3.0;
        if s >= cutoff {
            let (f, fp) = self.eval_unchecked(s);
            return fp / f;
        }
        let w = s / cutoff;
        if w < 1e-3 {
            return series();
        }
        let (f, fp) = self.eval_unchecked(s);
        (1.0 - w) * series() + w * fp / f
    }

    /// `f''` at node `i` from the ODE identity `f'' = -kappa f`.
    pub fn fpp_at_node(&self, i: usize) -> f64 {
        -self.kappa[i] * self.f[i]
    }

    /// CSV with columns `s,f,fp`, preceded by `# warpspec warping n=.. h=.. l=..`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let l = self.first_zero.map_or_else(|| "inf".to_owned(), fmt_float);
        writeln!(out, "# warpspec warping n={} h={} l={}", self.n, fmt_float(self.h), l)?;
        writeln!(out, "s,f,fp")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{},{},{}",
                fmt_float(self.s(i)),
                fmt_float(self.f[i]),
                fmt_float(self.fp[i])
            )?;
        }
        Ok(())
    }
}

/// `w_n int_0^r f^{n-1}(s) exp(-phi(s)) ds`, by composite Simpson on the warping grid.
pub fn weighted_ball_volume(warping: &Warping, potential: &Potential, r: f64) -> Result<f64> {
    let end = warping.positive_end();
    if !(r > 0.0 && r <= end * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("radius {r} outside (0, {end}]")));
    }
    if r > potential.s_max() * (1.0 + 1e-12) {
        return Err(Error::domain(format!("radius {r} beyond the potential's domain")));
    }
    let n = warping.n();
    let h = warping.h();
    let density = |s: f64, f: f64| f.max(0.0).powi(n as i32 - 1) * (-potential.eval_unchecked(s).0).exp();
    let full = ((r / h) * (1.0 + 1e-14)).floor() as usize;
    let full = full.min(warping.len() - 1);
    let samples: Vec<f64> = (0..=full)
        .map(|i| density(warping.s(i), warping.f()[i]))
        .collect();
    let mut integral = simpson(&samples, h);
    let a = warping.s(full);
    if r > a {
        let mid = 0.5 * (a + r);
        let fa = warping.f()[full];
        let fm = warping.eval_unchecked(mid).0;
        let fr = warping.eval_unchecked(r.min(warping.s(warping.len() - 1))).0;
        integral += (r - a) / 6.0 * (density(a, fa) + 4.0 * density(mid, fm) + density(r, fr));
    }
    Ok(sphere_area(n) * integral)
}

/// `(g(s) / f(s))^{n-1}`: the volume-density ratio of a rotationally
/// symmetric manifold with warping `g` against the model with warping `f`.
pub fn bishop_ratio(numerator: &Warping, denominator: &Warping, s: f64) -> Result<f64> {
    if numerator.n() != denominator.n() {
        return Err(Error::Mismatch(format!(
            "dimensions differ: {} vs {}",
            numerator.n(),
            denominator.n()
        )));
    }
    if (numerator.h() - denominator.h()).abs() > 1e-12 * numerator.h() {
        return Err(Error::Mismatch(format!(
            "grid steps differ: {} vs {}",
            numerator.h(),
            denominator.h()
        )));
    }
    let end = numerator.positive_end().min(denominator.positive_end());
    if !(s > 0.0 && s < end) {
        return Err(Error::domain(format!("bishop ratio needs 0 < s < {end}, got {s}")));
    }
    let g = numerator.eval_unchecked(s).0;
    let f = denominator.eval_unchecked(s).0;
    Ok((g / f).powi(numerator.n() as i32 - 1))
}
