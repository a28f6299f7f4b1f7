//! Center-based heat kernel from radial Dirichlet eigenpairs.

use serde::{Deserialize, Serialize};

use super::{Boundary, KernelGrid, Quadrature};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spectrum::{radial_modes, EigenPair, RadialProblem};

/// Default number of radial modes.
pub const DEFAULT_MODES: usize = 30;
/// Default absolute bound on the truncation tail.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Truncated sum `H(r, t) = sum_k exp(-lambda_k t) psi_k(0) psi_k(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    radii: Vec<f64>,
    modes: Vec<EigenPair>,
    /// Growth constant `C` in the tail model `|psi_k(0) psi_k(r)| <= C k^{n-1}`.
    amplitude: f64,
    dimension: usize,
    density: Vec<f64>,
    area: f64,
    step: f64,
}

impl KernelExpansion {
    pub fn new(problem: &RadialProblem, modes: usize, exec: Execution) -> Result<Self> {
        if problem.p() != 2.0 {
            return Err(Error::domain("heat kernels need p = 2"));
        }
        if modes == 0 {
            return Err(Error::domain("kernel expansion needs at least one mode"));
        }
        let modes = radial_modes(problem, modes, exec)?;
        let dimension = problem.n();
        let amplitude = modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let sup = m.psi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                m.psi[0].abs() * sup / ((i + 1) as f64).powi(dimension as i32 - 1)
            })
            .fold(0.0f64, f64::max);
        Ok(Self {
            radii: problem.radii(),
            modes,
            amplitude,
            dimension,
            density: problem.density().to_vec(),
            area: problem.sphere_area(),
            step: problem.step(),
        })
    }

    /// Smallest number of modes whose tail bound at `t_min` is below `tol`,
    /// given the first eigenvalue and an amplitude estimate.
    pub fn modes_needed(lambda1: f64, dimension: usize, amplitude: f64, t_min: f64, tol: f64) -> usize {
        let mut k = 1;
        while tail_sum(lambda1, dimension, amplitude, k, t_min) > tol {
            k += 1;
        }
        k
    }

    pub fn modes(&self) -> &[EigenPair] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Bound on `|H - H_K|` at time `t`, assuming `lambda_k >= lambda_1 k^2 / 2`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        tail_sum(self.modes[0].lambda, self.dimension, self.amplitude, self.modes.len(), t)
    }

    /// Smallest `t` with `tail_bound(t) <= tol`.
    pub fn min_time(&self, tol: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0 / self.modes[0].lambda);
        while self.tail_bound(hi) > tol {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.tail_bound(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn check_time(&self, t: f64, tol: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("kernel times must be positive, got {t}")));
        }
        let bound = self.tail_bound(t);
        if bound > tol {
            return Err(Error::TailBound {
                t_min: t,
                admissible: self.min_time(tol),
            });
        }
        Ok(())
    }

    /// `H(., t)` on the radial nodes, modes summed in increasing order.
    pub fn profile(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.radii.len()];
        for mode in &self.modes {
            let weight = (-mode.lambda * t).exp() * mode.psi[0];
            for (h, psi) in out.iter_mut().zip(&mode.psi) {
                *h += weight * psi;
            }
        }
        out
    }

    /// `H(r_i, t)` with modes summed in decreasing order.
    pub fn value_reversed(&self, i: usize, t: f64) -> f64 {
        self.modes
            .iter()
            .rev()
            .map(|m| (-m.lambda * t).exp() * m.psi[0] * m.psi[i])
            .sum()
    }

    /// Kernel values on the radial nodes for each time; refuses times below
    /// the admissible minimum for `tol`.
    pub fn grid(&self, times: &[f64], tol: f64) -> Result<KernelGrid> {
        if times.is_empty() {
            return Err(Error::domain("kernel time grid is empty"));
        }
        for &t in times {
            self.check_time(t, tol)?;
        }
        Ok(KernelGrid {
            radii: self.radii.clone(),
            times: times.to_vec(),
            values: times.iter().map(|&t| self.profile(t)).collect(),
            boundary: Boundary::Dirichlet,
            modes_used: self.modes.len(),
            t0: None,
            dt: None,
            quadrature: Quadrature::Simpson,
            density: self.density.clone(),
            area: self.area,
            step: self.step,
            cell_mass: Vec::new(),
            start_modes: 0,
        })
    }
}

fn tail_sum(lambda1: f64, dimension: usize, amplitude: f64, modes: usize, t: f64) -> f64 {
    let mut sum = 0.0;
    let mut k = modes + 1;
    loop {
        let kf = k as f64;
        let term = amplitude * kf.powi(dimension as i32 - 1) * (-0.5 * lambda1 * kf * kf * t).exp();
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 || k > modes + 1_000_000 {
            return sum;
        }
        k += 1;
    }
}

/// Center-based Dirichlet heat kernel from `modes` radial eigenpairs.
pub fn expansion_kernel(
    problem: &RadialProblem,
    modes: usize,
    times: &[f64],
    exec: Execution,
) -> Result<KernelGrid> {
    KernelExpansion::new(problem, modes, exec)?.grid(times, DEFAULT_TAIL_TOL)
}
