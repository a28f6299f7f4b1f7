//! Weighted heat kernels `H^phi(q, r, t)` centred at the pole of a model ball.
//!
//! Three independent routes: closed forms on special spaces, the truncated
//! eigenfunction expansion over radial Dirichlet modes, and Crank-Nicolson
//! stepping of the radial heat equation.

mod closed;
mod expansion;
mod stepping;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use closed::{closed_form_eval, ClosedFormKernel, KernelPoint};
pub use expansion::{expansion_kernel, KernelExpansion, DEFAULT_MODES, DEFAULT_TAIL_TOL};
pub use stepping::{
    cn_from, cn_kernel, line_cn_kernel, soliton_line_kernel, LineKernel, LineOptions, SteppingOptions,
};

use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::numerics::simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Neumann,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(Error::domain(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// Quadrature used by [`kernel_mass`]: the one consistent with how the grid was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Simpson,
    /// Cell masses of the finite-volume scheme, which the stepping conserves exactly.
    FiniteVolume,
}

/// Kernel values `H(r_i, t_k)` on the radial nodes of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[k][i] = H(r_i, t_k)`.
    pub values: Vec<Vec<f64>>,
    pub boundary: Boundary,
    /// Modes in the expansion; 0 for a stepped kernel.
    pub modes_used: usize,
    pub t0: Option<f64>,
    pub dt: Option<f64>,
    pub quadrature: Quadrature,
    density: Vec<f64>,
    area: f64,
    step: f64,
    cell_mass: Vec<f64>,
    /// Modes in the expansion a stepped kernel was started from.
    pub start_modes: usize,
}

/// JSON metadata written next to a kernel CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub boundary: Boundary,
    #[serde(rename = "K")]
    pub modes: usize,
    pub t0: Option<f64>,
    pub dt: Option<f64>,
    pub masses: Vec<f64>,
    pub min_value: f64,
}

/// Cubic Lagrange interpolation of uniformly spaced samples at fractional index `x`.
pub(crate) fn lagrange4(values: &[f64], x: f64) -> f64 {
    let last = values.len() - 1;
    let i = (x.floor().max(0.0) as usize).min(last - 1);
    let j = i.saturating_sub(1).min(last.saturating_sub(3));
    let t = x - j as f64;
    let mut acc = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (t - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += w * values[j + a];
    }
    acc
}

impl KernelGrid {
    /// Index of a stored time, matched to 1e-12 relative.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1e-300))
            .ok_or_else(|| Error::domain(format!("t = {t} is not on the kernel time grid")))
    }

    /// `H(r, t)` for a stored `t`, interpolated in `r`.
    pub fn value_at(&self, r: f64, t: f64) -> Result<f64> {
        let k = self.time_index(t)?;
        let r0 = self.radii[self.radii.len() - 1];
        if !(0.0..=r0).contains(&r) {
            return Err(Error::domain(format!("r = {r} outside [0, {r0}]")));
        }
        Ok(lagrange4(&self.values[k], r / self.step))
    }

    /// Smallest stored value.
    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn meta(&self) -> KernelMeta {
        KernelMeta {
            boundary: self.boundary,
            modes: if self.modes_used > 0 { self.modes_used } else { self.start_modes },
            t0: self.t0,
            dt: self.dt,
            masses: self.times.iter().map(|&t| kernel_mass(self, t).unwrap_or(f64::NAN)).collect(),
            min_value: self.min_value(),
        }
    }

    /// Long-format CSV `r,t,H` ordered by time, then radius.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# warpspec kernel boundary={} K={} t0={} dt={}",
            self.boundary,
            self.meta().modes,
            self.t0.map_or_else(|| "none".into(), fmt_float),
            self.dt.map_or_else(|| "none".into(), fmt_float),
        )?;
        writeln!(out, "r,t,H")?;
        for (t, row) in self.times.iter().zip(&self.values) {
            let t = fmt_float(*t);
            for (r, h) in self.radii.iter().zip(row) {
                writeln!(out, "{},{},{}", fmt_float(*r), t, fmt_float(*h))?;
            }
        }
        Ok(())
    }
}

/// `w_n int_0^{r0} H(r, t) f^{n-1} exp(-phi) dr`.
pub fn kernel_mass(grid: &KernelGrid, t: f64) -> Result<f64> {
    let k = grid.time_index(t)?;
    let row = &grid.values[k];
    Ok(match grid.quadrature {
        Quadrature::Simpson => {
            let weighted: Vec<f64> = row.iter().zip(&grid.density).map(|(h, d)| h * d).collect();
            grid.area * simpson(&weighted, grid.step)
        }
        Quadrature::FiniteVolume => grid.area * row.iter().zip(&grid.cell_mass).map(|(h, m)| h * m).sum::<f64>(),
    })
}

/// Mass inside the ball of radius `delta`, by Simpson on the nodes up to
/// `delta` plus a trapezoid on the partial last interval.
pub fn kernel_mass_within(grid: &KernelGrid, t: f64, delta: f64) -> Result<f64> {
    let k = grid.time_index(t)?;
    let r0 = grid.radii[grid.radii.len() - 1];
    if !(delta > 0.0 && delta <= r0) {
        return Err(Error::domain(format!("delta = {delta} must lie in (0, {r0}]")));
    }
    let weighted: Vec<f64> = grid.values[k].iter().zip(&grid.density).map(|(h, d)| h * d).collect();
    let j = ((delta / grid.step).floor() as usize).min(weighted.len() - 1);
    let mut mass = simpson(&weighted[..=j], grid.step);
    let rest = delta - j as f64 * grid.step;
    if rest > 0.0 && j + 1 < weighted.len() {
        let end = lagrange4(&weighted, delta / grid.step);
        mass += 0.5 * rest * (weighted[j] + end);
    }
    Ok(grid.area * mass)
}

/// Largest `|a - b| / |b|` over shared times and nodes with `r <= r_max`.
pub fn max_relative_discrepancy(a: &KernelGrid, b: &KernelGrid, r_max: f64) -> Result<f64> {
    if a.radii.len() != b.radii.len() || a.times != b.times {
        return Err(Error::Mismatch("kernel grids differ in shape".into()));
    }
    let mut worst = 0.0f64;
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for ((x, y), r) in ra.iter().zip(rb).zip(&a.radii) {
            if *r <= r_max {
                worst = worst.max((x - y).abs() / y.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
