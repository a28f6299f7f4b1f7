//! Radial Dirichlet eigenvalue problems on geodesic balls of model spaces.
//!
//! The radial Witten-Laplacian eigenfunction satisfies
//! `psi'' + [(n-1) f'/f - phi'] psi' + lambda psi = 0`, `psi'(0) = 0`,
//! `psi(r0) = 0`; the weighted p-Laplacian version is integrated as the
//! first-order system in `(psi, w)` with `w = |psi'|^{p-2} psi'`. Both are
//! solved by shooting from a small offset `eps` with Frobenius initial data,
//! and eigenvalues are bracketed by counting sign changes of the shot.

mod bounds;

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bounds::{barta_bounds, picone_lower_bound, rayleigh_quotient, rayleigh_quotient_with_slope};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::fmt_float;
use crate::numerics::{simpson, sphere_area};
use crate::profiles::Potential;
use crate::warp::Warping;

/// Default number of radial intervals on `[0, r0]`.
pub const DEFAULT_NODES: usize = 4096;
/// Relative width at which eigenvalue bisection stops.
const BISECTION_RTOL: f64 = 1e-12;
/// Required agreement between an eigenvalue and the Rayleigh quotient of its eigenfunction.
const RAYLEIGH_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemOptions {
    /// Number of radial intervals on `[0, r0]`.
    pub nodes: usize,
    /// Shooting offset as a fraction of `r0`.
    pub offset_fraction: f64,
    /// Overrides the default search cap `(20/r0)^2 max(1, n^2)`.
    pub lambda_cap: Option<f64>,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            offset_fraction: 1e-6,
            lambda_cap: None,
        }
    }
}

/// One radial eigenvalue problem `(n, f, phi, r0, p)` on a geodesic ball.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    n: usize,
    warping: Option<Arc<Warping>>,
    potential: Potential,
    r0: f64,
    p: f64,
    shoot_offset: f64,
    nodes: usize,
    lambda_cap: f64,
    /// Drift `(n-1) f'/f - phi'` at `s = j H / 2`, `j = 0..=2M` (entry 0 unused).
    drift: Vec<f64>,
    drift_at_offset: f64,
    drift_first_mid: f64,
    /// Radial density `f^{n-1} exp(-phi)` at the nodes.
    density: Vec<f64>,
}

impl RadialProblem {
    pub fn new(warping: Arc<Warping>, potential: Potential, r0: f64, p: f64) -> Result<Self> {
        Self::with_options(warping, potential, r0, p, ProblemOptions::default())
    }

    pub fn with_options(
        warping: Arc<Warping>,
        potential: Potential,
        r0: f64,
        p: f64,
        options: ProblemOptions,
    ) -> Result<Self> {
        let end = warping.positive_end();
        if !(r0 > 0.0 && r0 < end) {
            return Err(Error::domain(format!(
                "ball radius r0 = {r0} must lie strictly inside (0, {end})"
            )));
        }
        let n = warping.n();
        Self::build(n, Some(warping), potential, r0, p, options)
    }

    /// The radial problem with the `(n-1) f'/f` term removed: `psi'' - phi' psi' + lambda psi = 0`
    /// on the half-line `[0, r0]` with a reflecting origin and measure `2 exp(-phi) ds`.
    pub fn one_dimensional(potential: Potential, r0: f64, p: f64, options: ProblemOptions) -> Result<Self> {
        Self::build(1, None, potential, r0, p, options)
    }

    fn build(
        n: usize,
        warping: Option<Arc<Warping>>,
        potential: Potential,
        r0: f64,
        p: f64,
        options: ProblemOptions,
    ) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::domain(format!("p must lie in (1, inf), got {p}")));
        }
        if r0 > potential.s_max() * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "potential is defined up to {} but r0 = {r0}",
                potential.s_max()
            )));
        }
        if options.nodes < 16 {
            return Err(Error::domain("radial grid needs at least 16 intervals"));
        }
        if !(options.offset_fraction > 0.0 && options.offset_fraction < 1e-2) {
            return Err(Error::domain("shooting offset fraction must lie in (0, 1e-2)"));
        }
        let nodes = options.nodes;
        let step = r0 / nodes as f64;
        let shoot_offset = options.offset_fraction * r0;
        let lambda_cap = options
            .lambda_cap
            .unwrap_or_else(|| (20.0 / r0).powi(2) * ((n * n) as f64).max(1.0));

        let drift_at = |s: f64| -> f64 {
            let phi_prime = potential.eval_unchecked(s.min(potential.s_max())).1;
            match &warping {
                Some(w) => (n - 1) as f64 * w.log_derivative_unchecked(s) - phi_prime,
                None => -phi_prime,
            }
        };
        let mut drift = vec![f64::NAN; 2 * nodes + 1];
        for (j, d) in drift.iter_mut().enumerate().skip(1) {
            *d = drift_at(j as f64 * 0.5 * step);
        }
        let drift_at_offset = drift_at(shoot_offset);
        let drift_first_mid = drift_at(0.5 * (shoot_offset + step));

        let density = (0..=nodes)
            .map(|i| {
                let s = i as f64 * step;
                let phi = potential.eval_unchecked(s.min(potential.s_max())).0;
                let f_pow = match &warping {
                    Some(w) => w.eval_unchecked(s).0.powi(n as i32 - 1),
                    None => 1.0,
                };
                f_pow * (-phi).exp()
            })
            .collect();

        Ok(Self {
            n,
            warping,
            potential,
            r0,
            p,
            shoot_offset,
            nodes,
            lambda_cap,
            drift,
            drift_at_offset,
            drift_first_mid,
            density,
        })
    }

    /// A copy of this problem on a ball of different radius.
    pub fn with_radius(&self, r0: f64) -> Result<Self> {
        let options = ProblemOptions {
            nodes: self.nodes,
            offset_fraction: self.shoot_offset / self.r0,
            lambda_cap: None,
        };
        match &self.warping {
            Some(w) => Self::with_options(w.clone(), self.potential.clone(), r0, self.p, options),
            None => Self::one_dimensional(self.potential.clone(), r0, self.p, options),
        }
    }

    /// A copy of this problem with a different exponent `p`.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::domain(format!("p must lie in (1, inf), got {p}")));
        }
        Ok(Self { p, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn warping(&self) -> Option<&Arc<Warping>> {
        self.warping.as_ref()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn shoot_offset(&self) -> f64 {
        self.shoot_offset
    }

    pub fn lambda_cap(&self) -> f64 {
        self.lambda_cap
    }

    /// Number of radial intervals `M`.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Radial grid step `r0 / M`.
    pub fn step(&self) -> f64 {
        self.r0 / self.nodes as f64
    }

    pub fn radius_at(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..=self.nodes).map(|i| self.radius_at(i)).collect()
    }

    /// `f^{n-1} exp(-phi)` at the radial nodes.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Radial density `f(s)^{n-1} exp(-phi(s))` at any `s` in `[0, r0]`.
    pub fn alpha(&self, s: f64) -> f64 {
        let phi = self.potential.eval_unchecked(s.min(self.potential.s_max())).0;
        let f_pow = match &self.warping {
            Some(w) => w.eval_unchecked(s).0.powi(self.n as i32 - 1),
            None => 1.0,
        };
        f_pow * (-phi).exp()
    }

    /// `(n-1) f'/f - phi'` at node `i >= 1`.
    pub fn drift_at_node(&self, i: usize) -> f64 {
        self.drift[2 * i]
    }

    /// Area of the unit sphere `S^{n-1}`.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }

    /// `w_n int_0^{r0} g f^{n-1} exp(-phi) ds` for `g` sampled on the radial nodes.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        let weighted: Vec<f64> = g.iter().zip(&self.density).map(|(a, b)| a * b).collect();
        self.sphere_area() * simpson(&weighted, self.step())
    }

    fn check_p(&self, op: &str, linear: bool) -> Result<()> {
        if linear && self.p != 2.0 {
            return Err(Error::domain(format!("{op} needs p = 2, problem has p = {}", self.p)));
        }
        Ok(())
    }

    /// Fourth-order Runge-Kutta over the radial grid for a system in `(y, z)`.
    ///
    /// `rhs(drift, y, z) -> (y', z')`. `visit(i, y, z)` is called at every node
    /// `i >= 1`; returning `false` stops the integration.
    fn march<R, V>(&self, y_start: f64, z_start: f64, rhs: R, mut visit: V) -> Result<()>
    where
        R: Fn(f64, f64, f64) -> (f64, f64),
        V: FnMut(usize, f64, f64) -> bool,
    {
        let step = self.step();
        let (mut y, mut z) = (y_start, z_start);
        for i in 0..self.nodes {
            let (h, c0, c_mid, c1) = if i == 0 {
                (
                    step - self.shoot_offset,
                    self.drift_at_offset,
                    self.drift_first_mid,
                    self.drift[2],
                )
            } else {
                (step, self.drift[2 * i], self.drift[2 * i + 1], self.drift[2 * i + 2])
            };
            let (a1, b1) = rhs(c0, y, z);
            let (a2, b2) = rhs(c_mid, y + 0.5 * h * a1, z + 0.5 * h * b1);
            let (a3, b3) = rhs(c_mid, y + 0.5 * h * a2, z + 0.5 * h * b2);
            let (a4, b4) = rhs(c1, y + h * a3, z + h * b3);
            y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            z += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            if !(y.is_finite() && z.is_finite()) {
                return Err(Error::Numeric {
                    lambda: f64::NAN,
                    reason: format!("shooting blew up at s = {}", (i + 1) as f64 * step),
                });
            }
            if !visit(i + 1, y, z) {
                break;
            }
        }
        Ok(())
    }

    fn linear_shot(&self, lambda: f64, record: bool) -> Result<Shot> {
        let eps = self.shoot_offset;
        let n = self.n as f64;
        let psi0 = 1.0 - lambda * eps * eps / (2.0 * n);
        let dpsi0 = -lambda * eps / n;
        let mut shot = Shot::new(self.nodes, record);
        shot.push(0, 1.0, 0.0);
        self.march(
            psi0,
            dpsi0,
            |c, psi, v| (v, -c * v - lambda * psi),
            |i, psi, v| {
                shot.push(i, psi, v);
                true
            },
        )
        .map_err(|e| with_lambda(e, lambda))?;
        Ok(shot)
    }
}

fn with_lambda(err: Error, lambda: f64) -> Error {
    match err {
        Error::Numeric { reason, .. } => Error::Numeric { lambda, reason },
        other => other,
    }
}

/// Trajectory and sign-change bookkeeping of one shot.
#[derive(Debug, Clone)]
struct Shot {
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    record: bool,
    last: f64,
    previous: f64,
    sign: f64,
    interior_changes: usize,
    nodes: usize,
}

impl Shot {
    fn new(nodes: usize, record: bool) -> Self {
        let capacity = if record { nodes + 1 } else { 0 };
        Self {
            psi: Vec::with_capacity(capacity),
            dpsi: Vec::with_capacity(capacity),
            record,
            last: 1.0,
            previous: 1.0,
            sign: 1.0,
            interior_changes: 0,
            nodes,
        }
    }

    fn push(&mut self, i: usize, psi: f64, dpsi: f64) {
        if self.record {
            self.psi.push(psi);
            self.dpsi.push(dpsi);
        }
        if i > 0 && i < self.nodes && (psi == 0.0 || psi.signum() != self.sign) {
            self.interior_changes += 1;
            self.sign = -self.sign;
        }
        self.previous = self.last;
        self.last = psi;
    }

    fn terminal(&self) -> f64 {
        self.last
    }

    /// Zeros in `(0, r0]`: interior changes plus a change in the last interval.
    fn zeros(&self) -> usize {
        let closing = self.last == 0.0 || self.last.signum() != self.sign;
        self.interior_changes + usize::from(closing)
    }
}

/// Result of [`shoot_linear`].
#[derive(Debug, Clone)]
pub struct ShotResult {
    /// `psi(r0)`.
    pub terminal: f64,
    /// Sign changes of `psi` strictly inside `(0, r0)` on the grid nodes.
    pub node_count: usize,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
}

/// Integrate the radial Witten-Laplacian eigen-ODE for a trial `lambda`.
///
/// Starts at `s = eps` with `psi = 1 - lambda eps^2 / (2n)`, `psi' = -lambda eps / n`;
/// `psi(0) = 1`, `psi'(0) = 0` are reported at the first node.
pub fn shoot_linear(problem: &RadialProblem, lambda: f64) -> Result<ShotResult> {
    problem.check_p("shoot_linear", true)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let shot = problem.linear_shot(lambda, true)?;
    Ok(ShotResult {
        terminal: shot.terminal(),
        node_count: shot.interior_changes,
        psi: shot.psi,
        dpsi: shot.dpsi,
    })
}

/// A radial Dirichlet eigenpair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub node_count: usize,
    /// True when `w_n int psi^2 f^{n-1} exp(-phi) ds = 1`.
    pub normalized: bool,
}

impl EigenPair {
    /// Nodes violating `psi > 0` on `[0, r0)` or `psi' < 0` on `(0, r0]`.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        let last = self.psi.len() - 1;
        (0..=last)
            .filter(|&i| (i < last && self.psi[i] <= 0.0) || (i > 0 && self.dpsi[i] >= 0.0))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, problem: &RadialProblem, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# warpspec eigenpair n={} p={} r0={} lambda={} nodes={}",
            problem.n(),
            fmt_float(problem.p()),
            fmt_float(problem.r0()),
            fmt_float(self.lambda),
            self.node_count
        )?;
        writeln!(out, "s,psi,dpsi")?;
        for (i, (psi, dpsi)) in self.psi.iter().zip(&self.dpsi).enumerate() {
            writeln!(
                out,
                "{},{},{}",
                fmt_float(problem.radius_at(i)),
                fmt_float(*psi),
                fmt_float(*dpsi)
            )?;
        }
        Ok(())
    }
}

/// JSON summary of one solved problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub n: usize,
    pub p: f64,
    pub r0: f64,
    pub k: usize,
    pub lambda: f64,
    pub node_count: usize,
    /// `|R(psi) - lambda| / lambda` for the Rayleigh quotient `R`.
    pub rayleigh_residual: f64,
}

impl EigenSummary {
    pub fn new(problem: &RadialProblem, k: usize, pair: &EigenPair) -> Result<Self> {
        let quotient = rayleigh_quotient_with_slope(&pair.psi, &pair.dpsi, problem)?;
        Ok(Self {
            n: problem.n(),
            p: problem.p(),
            r0: problem.r0(),
            k,
            lambda: pair.lambda,
            node_count: pair.node_count,
            rayleigh_residual: (quotient - pair.lambda).abs() / pair.lambda,
        })
    }
}

/// Bisection on a monotone predicate `above(lambda)` (true at and above the target).
fn bracket_and_bisect<F>(problem: &RadialProblem, cap: f64, mut above: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut lo = 0.0;
    let mut hi = 1.0 / (problem.r0() * problem.r0());
    loop {
        if above(hi)? {
            break;
        }
        lo = hi;
        if hi >= cap {
            return Err(Error::Search(format!(
                "no eigenvalue bracket below lambda cap {cap:.6e} (r0 = {}, n = {})",
                problem.r0(),
                problem.n()
            )));
        }
        hi = (2.0 * hi).min(cap);
    }
    while hi - lo > BISECTION_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The `k`-th radial Dirichlet eigenpair of the Witten-Laplacian (`k >= 1`).
///
/// The eigenvalue is the smallest `lambda` whose shot has `k` zeros in
/// `(0, r0]`; the returned eigenfunction has `k - 1` interior nodes, is
/// positive at the centre and normalised in the weighted measure.
pub fn kth_radial_eigenvalue(problem: &RadialProblem, k: usize) -> Result<EigenPair> {
    problem.check_p("kth_radial_eigenvalue", true)?;
    if k == 0 {
        return Err(Error::domain("mode index k starts at 1"));
    }
    let cap = problem.lambda_cap() * (k * k) as f64;
    let lambda = bracket_and_bisect(problem, cap, |lambda| {
        Ok(problem.linear_shot(lambda, false)?.zeros() >= k)
    })?;
    let shot = problem.linear_shot(lambda, true)?;
    let mut pair = EigenPair {
        lambda,
        node_count: shot.interior_changes,
        psi: shot.psi,
        dpsi: shot.dpsi,
        normalized: false,
    };
    if pair.node_count != k - 1 {
        return Err(Error::Solver(format!(
            "mode {k} converged to a shot with {} interior nodes",
            pair.node_count
        )));
    }
    normalize(problem, &mut pair)?;
    let quotient = rayleigh_quotient_with_slope(&pair.psi, &pair.dpsi, problem)?;
    if ((quotient - lambda) / lambda).abs() > RAYLEIGH_RTOL {
        return Err(Error::Solver(format!(
            "Rayleigh quotient {quotient} of mode {k} disagrees with lambda = {lambda}"
        )));
    }
    Ok(pair)
}

/// First Dirichlet eigenpair of the radial Witten-Laplacian.
pub fn first_eigenvalue(problem: &RadialProblem) -> Result<EigenPair> {
    kth_radial_eigenvalue(problem, 1)
}

/// The first `count` radial eigenpairs, computed independently and returned in order.
pub fn radial_modes(problem: &RadialProblem, count: usize, exec: Execution) -> Result<Vec<EigenPair>> {
    exec.map_range(count, |i| kth_radial_eigenvalue(problem, i + 1))
        .into_iter()
        .collect()
}

fn normalize(problem: &RadialProblem, pair: &mut EigenPair) -> Result<()> {
    let squares: Vec<f64> = pair.psi.iter().map(|x| x * x).collect();
    let norm = problem.integrate(&squares).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Solver("eigenfunction has zero norm".into()));
    }
    let scale = pair.psi[0].signum() / norm;
    pair.psi.iter_mut().for_each(|x| *x *= scale);
    pair.dpsi.iter_mut().for_each(|x| *x *= scale);
    pair.normalized = true;
    Ok(())
}

/// `sign(x) |x|^e`.
#[inline]
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().max(1e-300).powf(e)
    }
}

/// First Dirichlet eigenpair of the weighted p-Laplacian.
///
/// Shoots the system `psi' = |w|^{1/(p-1)} sign(w)`,
/// `w' = -[(n-1) f'/f - phi'] w - lambda |psi|^{p-2} psi` from `s = eps` with
/// `psi = 1 - (p-1)/p (lambda/n)^{1/(p-1)} eps^{p/(p-1)}`, `w = -lambda eps / n`,
/// and bisects on whether `psi` reaches zero inside `[0, r0]`. The returned
/// eigenfunction has `psi(0) = 1`.
pub fn first_eigenvalue_p(problem: &RadialProblem) -> Result<EigenPair> {
    let p = problem.p();
    let eps = problem.shoot_offset();
    let n = problem.n() as f64;
    let q = 1.0 / (p - 1.0);
    let start = |lambda: f64| {
        let psi = 1.0 - (p - 1.0) / p * (lambda / n).powf(q) * eps.powf(p * q);
        (psi, -lambda * eps / n)
    };
    let rhs = |lambda: f64| {
        move |c: f64, psi: f64, w: f64| (signed_pow(w, q), -c * w - lambda * signed_pow(psi, p - 1.0))
    };
    let reaches_zero = |lambda: f64| -> Result<bool> {
        let (psi0, w0) = start(lambda);
        let mut crossed = false;
        problem
            .march(psi0, w0, rhs(lambda), |_, psi, _| {
                crossed = psi <= 0.0;
                !crossed
            })
            .map_err(|e| with_lambda(e, lambda))?;
        Ok(crossed)
    };
    let lambda = bracket_and_bisect(problem, problem.lambda_cap(), reaches_zero)?;

    let (psi0, w0) = start(lambda);
    let mut psi = Vec::with_capacity(problem.nodes() + 1);
    let mut dpsi = Vec::with_capacity(problem.nodes() + 1);
    psi.push(1.0);
    dpsi.push(0.0);
    problem
        .march(psi0, w0, rhs(lambda), |_, y, w| {
            psi.push(y);
            dpsi.push(signed_pow(w, q));
            true
        })
        .map_err(|e| with_lambda(e, lambda))?;
    let last = psi.len() - 1;
    let node_count = psi[..last].windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    Ok(EigenPair {
        lambda,
        psi,
        dpsi,
        node_count,
        normalized: false,
    })
}

/// First eigenvalues of several problems, in input order.
pub fn first_eigenvalues(problems: &[RadialProblem], exec: Execution) -> Result<Vec<f64>> {
    exec.map(problems, |problem| {
        if problem.p() == 2.0 {
            first_eigenvalue(problem).map(|e| e.lambda)
        } else {
            first_eigenvalue_p(problem).map(|e| e.lambda)
        }
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests;
