//! Crank-Nicolson time stepping of the weighted heat equation in one space variable.
//!
//! The equation `alpha u_t = (alpha u_x)_x` is discretised with finite volumes
//! on a uniform grid: node `i` owns the cell `[x_i - h/2, x_i + h/2]` clipped
//! to the domain, with mass `int_cell alpha` and flux weight `alpha(x_{i+1/2})`.
//! A free end is reflecting; a Dirichlet end pins the node to zero.

use super::{Boundary, KernelGrid, Quadrature};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::simpson;
use crate::kernel::expansion::{KernelExpansion, DEFAULT_TAIL_TOL};
use crate::spectrum::{first_eigenvalue, RadialProblem};

/// Largest step, relative to the current time, taken while the solution is young.
const GRADING: f64 = 0.02;
/// Values below this flag an unstable run.
const NEGATIVE_FLOOR: f64 = -1e-10;

/// Finite-volume diffusion operator on nodes `0..=m`.
#[derive(Debug, Clone)]
pub(crate) struct Diffusion {
    h: f64,
    /// `alpha(x_{i+1/2})`, `i = 0..m`.
    flux: Vec<f64>,
    mass: Vec<f64>,
    left_pinned: bool,
    right_pinned: bool,
}

impl Diffusion {
    pub(crate) fn new(
        alpha: impl Fn(f64) -> f64,
        start: f64,
        h: f64,
        m: usize,
        left_pinned: bool,
        right_pinned: bool,
    ) -> Self {
        let x = |i: f64| start + i * h;
        let flux = (0..m).map(|i| alpha(x(i as f64 + 0.5))).collect();
        let mass = (0..=m)
            .map(|i| {
                let c = i as f64;
                let left = if i == 0 {
                    0.0
                } else {
                    h / 12.0 * (alpha(x(c - 0.5)) + 4.0 * alpha(x(c - 0.25)) + alpha(x(c)))
                };
                let right = if i == m {
                    0.0
                } else {
                    h / 12.0 * (alpha(x(c)) + 4.0 * alpha(x(c + 0.25)) + alpha(x(c + 0.5)))
                };
                left + right
            })
            .collect();
        Self {
            h,
            flux,
            mass,
            left_pinned,
            right_pinned,
        }
    }

    pub(crate) fn mass(&self) -> &[f64] {
        &self.mass
    }

    fn active(&self) -> (usize, usize) {
        let m = self.mass.len() - 1;
        (usize::from(self.left_pinned), if self.right_pinned { m - 1 } else { m })
    }

    /// One Crank-Nicolson step of length `dt`, in place.
    fn step(&self, u: &mut [f64], dt: f64, scratch: &mut Scratch) {
        let (lo, hi) = self.active();
        let m = self.mass.len() - 1;
        let k = 0.5 * dt / self.h;
        let Scratch { sub, diag, sup, rhs } = scratch;
        for i in lo..=hi {
            let west = if i > 0 { k * self.flux[i - 1] } else { 0.0 };
            let east = if i < m { k * self.flux[i] } else { 0.0 };
            let u_w = if i > 0 { u[i - 1] } else { 0.0 };
            let u_e = if i < m { u[i + 1] } else { 0.0 };
            let j = i - lo;
            sub[j] = -west;
            sup[j] = -east;
            diag[j] = self.mass[i] + west + east;
            rhs[j] = self.mass[i] * u[i] + west * (u_w - u[i]) + east * (u_e - u[i]);
        }
        let len = hi - lo + 1;
        thomas(&sub[..len], &mut diag[..len], &sup[..len], &mut rhs[..len]);
        u[lo..=hi].copy_from_slice(&rhs[..len]);
        if self.left_pinned {
            u[0] = 0.0;
        }
        if self.right_pinned {
            u[m] = 0.0;
        }
    }

    /// Advance `u` from `t0` through each of `times`, recording a copy at each.
    pub(crate) fn evolve(&self, mut u: Vec<f64>, t0: f64, dt: f64, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut scratch = Scratch::new(self.mass.len());
        let mut t = t0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            while t < target {
                let remaining = target - t;
                let mut step = dt.min(GRADING * t).min(remaining);
                // avoid a sliver step just before an output time
                if remaining - step < 1e-3 * step {
                    step = remaining;
                }
                self.step(&mut u, step, &mut scratch);
                t = if step == remaining { target } else { t + step };
            }
            if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| **v < NEGATIVE_FLOOR) {
                return Err(Error::Solver(format!(
                    "time stepping went negative ({v:e} at node {i}, t = {t}); reduce dt"
                )));
            }
            out.push(u.clone());
        }
        Ok(out)
    }
}

struct Scratch {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
}

impl Scratch {
    fn new(len: usize) -> Self {
        Self {
            sub: vec![0.0; len],
            diag: vec![0.0; len],
            sup: vec![0.0; len],
            rhs: vec![0.0; len],
        }
    }
}

/// Solve a tridiagonal system in place; the solution overwrites `rhs`.
fn thomas(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
}

fn check_times(t0: f64, dt: f64, times: &[f64]) -> Result<()> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::domain(format!("start time t0 must be positive, got {t0}")));
    }
    let Some(&last) = times.last() else {
        return Err(Error::domain("kernel time grid is empty"));
    };
    if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::domain("kernel times must be positive"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("kernel times must be strictly increasing"));
    }
    if times[0] < t0 {
        return Err(Error::domain(format!("kernel times start at {} before t0 = {t0}", times[0])));
    }
    if !(dt > 0.0) || (last > t0 && dt > (last - t0) / 10.0) {
        return Err(Error::domain(format!(
            "time step dt = {dt} must be positive and at most (T - t0)/10"
        )));
    }
    Ok(())
}

/// Options for [`cn_kernel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteppingOptions {
    /// Start time; defaults to `1e-3 r0^2`.
    pub t0: Option<f64>,
    /// Largest time step.
    pub dt: f64,
    pub boundary: Boundary,
}

impl Default for SteppingOptions {
    fn default() -> Self {
        Self {
            t0: None,
            dt: 1e-4,
            boundary: Boundary::Dirichlet,
        }
    }
}

/// Center-based kernel by Crank-Nicolson stepping of `u_t = u'' + [(n-1) f'/f - phi'] u'`.
///
/// The run starts at `t0` from the eigenfunction expansion, with as many
/// modes as its tail bound needs there; the Neumann run starts from the same
/// Dirichlet profile, which differs by terms of order `exp(-r0^2 / 4 t0)`.
pub fn cn_kernel(
    problem: &RadialProblem,
    times: &[f64],
    options: SteppingOptions,
    exec: Execution,
) -> Result<KernelGrid> {
    if problem.p() != 2.0 {
        return Err(Error::domain("heat kernels need p = 2"));
    }
    let t0 = options.t0.unwrap_or(1e-3 * problem.r0() * problem.r0());
    check_times(t0, options.dt, times)?;
    let start = start_expansion(problem, t0, exec)?;
    let mut initial = start.profile(t0);
    // match the scheme's discrete mass to the quadrature mass of the expansion
    let op = Diffusion::new(|s| problem.alpha(s), 0.0, problem.step(), problem.nodes(), false, false);
    let discrete: f64 = initial.iter().zip(op.mass()).map(|(u, m)| u * m).sum();
    let weighted: Vec<f64> = initial.iter().zip(problem.density()).map(|(u, d)| u * d).collect();
    let scale = simpson(&weighted, problem.step()) / discrete;
    initial.iter_mut().for_each(|u| *u *= scale);
    let mut grid = cn_from(problem, initial, t0, times, options)?;
    grid.start_modes = start.mode_count();
    Ok(grid)
}

/// Expansion accurate at `t0`, sized from a probe of the first few modes.
pub(crate) fn start_expansion(problem: &RadialProblem, t0: f64, exec: Execution) -> Result<KernelExpansion> {
    let probe = KernelExpansion::new(problem, 4, exec)?;
    let lambda1 = first_eigenvalue(problem)?.lambda;
    let needed = KernelExpansion::modes_needed(
        lambda1,
        problem.n(),
        2.0 * probe.amplitude(),
        t0,
        DEFAULT_TAIL_TOL,
    );
    if needed > 2000 {
        return Err(Error::domain(format!(
            "start time t0 = {t0} needs {needed} modes; choose a larger t0"
        )));
    }
    KernelExpansion::new(problem, needed.max(4), exec)
}

/// Crank-Nicolson run from a given profile at `t0`.
pub fn cn_from(
    problem: &RadialProblem,
    initial: Vec<f64>,
    t0: f64,
    times: &[f64],
    options: SteppingOptions,
) -> Result<KernelGrid> {
    check_times(t0, options.dt, times)?;
    if initial.len() != problem.nodes() + 1 {
        return Err(Error::domain("initial profile does not match the radial grid"));
    }
    let pinned = options.boundary == Boundary::Dirichlet;
    let op = Diffusion::new(|s| problem.alpha(s), 0.0, problem.step(), problem.nodes(), false, pinned);
    let mut initial = initial;
    if pinned {
        initial[problem.nodes()] = 0.0;
    }
    let values = op.evolve(initial, t0, options.dt, times)?;
    Ok(KernelGrid {
        radii: problem.radii(),
        times: times.to_vec(),
        values,
        boundary: options.boundary,
        modes_used: 0,
        t0: Some(t0),
        dt: Some(options.dt),
        quadrature: Quadrature::FiniteVolume,
        density: problem.density().to_vec(),
        area: problem.sphere_area(),
        step: problem.step(),
        cell_mass: op.mass().to_vec(),
        start_modes: 0,
    })
}

/// Kernel on an interval of the line from a given profile at `t0`, Dirichlet at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct LineKernel {
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl LineKernel {
    /// Value at `x` and stored time index `k`, by cubic interpolation.
    pub fn value_at(&self, x: f64, k: usize) -> f64 {
        let h = self.xs[1] - self.xs[0];
        super::lagrange4(&self.values[k], (x - self.xs[0]) / h)
    }
}

/// Crank-Nicolson on `[-half_width, half_width]` for `u_t = u'' - phi' u'`,
/// started from `initial(x)` at `t0`.
pub fn line_cn_kernel(
    phi: impl Fn(f64) -> f64,
    half_width: f64,
    nodes: usize,
    initial: impl Fn(f64) -> f64,
    t0: f64,
    dt: f64,
    times: &[f64],
) -> Result<LineKernel> {
    check_times(t0, dt, times)?;
    if !(half_width > 0.0) || nodes < 8 {
        return Err(Error::domain("line domain needs a positive width and at least 8 intervals"));
    }
    let h = 2.0 * half_width / nodes as f64;
    let xs: Vec<f64> = (0..=nodes).map(|i| -half_width + i as f64 * h).collect();
    let op = Diffusion::new(|x| (-phi(x)).exp(), -half_width, h, nodes, true, true);
    let mut u: Vec<f64> = xs.iter().map(|&x| initial(x)).collect();
    u[0] = 0.0;
    u[nodes] = 0.0;
    let values = op.evolve(u, t0, dt, times)?;
    Ok(LineKernel {
        xs,
        times: times.to_vec(),
        values,
    })
}

/// Options for the steady-soliton line run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineOptions {
    pub half_width: f64,
    pub nodes: usize,
    pub t0: f64,
    pub dt: f64,
    /// Combine runs at `(nodes, dt)` and `(2 nodes, dt / 2)` to cancel the
    /// second-order error terms.
    pub richardson: bool,
}

impl Default for LineOptions {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            nodes: 20_000,
            t0: 1e-3,
            dt: 2e-5,
            richardson: true,
        }
    }
}

/// Steady-soliton kernel from the origin on `[-L, L]` with `phi(x) = sign x`,
/// started from the closed form at `t0`.
pub fn soliton_line_kernel(sign: f64, times: &[f64], options: LineOptions) -> Result<LineKernel> {
    use super::closed::{closed_form_eval, ClosedFormKernel, KernelPoint};
    let kind = ClosedFormKernel::SteadySoliton { sign };
    closed_form_eval(kind, KernelPoint::Radial(0.0), options.t0)?;
    let t0 = options.t0;
    let initial = move |x: f64| {
        (0.5 * sign * x - 0.25 * t0).exp() * (4.0 * std::f64::consts::PI * t0).powf(-0.5) * (-x * x / (4.0 * t0)).exp()
    };
    let run = |nodes: usize, dt: f64| {
        line_cn_kernel(|x| sign * x, options.half_width, nodes, initial, t0, dt, times)
    };
    let mut coarse = run(options.nodes, options.dt)?;
    if options.richardson {
        let fine = run(2 * options.nodes, 0.5 * options.dt)?;
        for (row, fine_row) in coarse.values.iter_mut().zip(&fine.values) {
            for (i, v) in row.iter_mut().enumerate() {
                *v = (4.0 * fine_row[2 * i] - *v) / 3.0;
            }
        }
    }
    Ok(coarse)
}
