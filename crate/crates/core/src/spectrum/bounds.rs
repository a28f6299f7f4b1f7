//! Variational quotients and pointwise eigenvalue bounds from trial functions.

use super::RadialProblem;
use crate::error::{Error, Result};

/// Nodes excluded at each end of the grid when sampling pointwise quotients.
const COLLAR: usize = 5;

fn check_grid(values: &[f64], problem: &RadialProblem, what: &str) -> Result<()> {
    if values.len() != problem.nodes() + 1 {
        return Err(Error::domain(format!(
            "{what} has {} samples, the radial grid has {}",
            values.len(),
            problem.nodes() + 1
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("{what} contains non-finite samples")));
    }
    Ok(())
}

/// Fourth-order first derivative on a uniform grid, one-sided at the ends.
pub(crate) fn derivative(u: &[f64], h: f64) -> Vec<f64> {
    let m = u.len() - 1;
    let mut d = vec![0.0; m + 1];
    let c = 1.0 / (12.0 * h);
    for i in 2..=m - 2 {
        d[i] = c * (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]);
    }
    d[0] = c * (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]);
    d[1] = c * (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]);
    d[m] = -c * (-25.0 * u[m] + 48.0 * u[m - 1] - 36.0 * u[m - 2] + 16.0 * u[m - 3] - 3.0 * u[m - 4]);
    d[m - 1] = -c * (-3.0 * u[m] - 10.0 * u[m - 1] + 18.0 * u[m - 2] - 6.0 * u[m - 3] + u[m - 4]);
    d
}

/// Fourth-order central first and second derivatives at interior node `i`.
fn central(u: &[f64], i: usize, h: f64) -> (f64, f64) {
    let d1 = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
    let d2 = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * h * h);
    (d1, d2)
}

/// `int |psi'|^p dmu / int |psi|^p dmu` with `dmu = f^{n-1} exp(-phi) ds`, by Simpson.
///
/// `psi'` is taken from fourth-order differences of `psi`.
pub fn rayleigh_quotient(psi: &[f64], problem: &RadialProblem) -> Result<f64> {
    check_grid(psi, problem, "trial function")?;
    let dpsi = derivative(psi, problem.step());
    rayleigh_quotient_with_slope(psi, &dpsi, problem)
}

/// As [`rayleigh_quotient`] with `psi'` supplied on the same grid.
pub fn rayleigh_quotient_with_slope(psi: &[f64], dpsi: &[f64], problem: &RadialProblem) -> Result<f64> {
    check_grid(psi, problem, "trial function")?;
    check_grid(dpsi, problem, "trial derivative")?;
    let scale = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::domain("trial function vanishes identically"));
    }
    if psi[psi.len() - 1].abs() > 1e-6 * scale {
        return Err(Error::domain("trial function must vanish at r0"));
    }
    let p = problem.p();
    let grad: Vec<f64> = dpsi.iter().map(|d| (d / scale).abs().powf(p)).collect();
    let mass: Vec<f64> = psi.iter().map(|v| (v / scale).abs().powf(p)).collect();
    let denominator = problem.integrate(&mass);
    if !(denominator > 0.0) {
        return Err(Error::domain("Rayleigh quotient has a zero denominator"));
    }
    Ok(problem.integrate(&grad) / denominator)
}

/// Pointwise quotient `-L h / h^{p-1}` on the collar-trimmed interior grid.
fn pointwise_quotients(h: &[f64], problem: &RadialProblem, p: f64) -> Result<Vec<f64>> {
    check_grid(h, problem, "trial function")?;
    let m = problem.nodes();
    if let Some(i) = (0..m).find(|&i| !(h[i] > 0.0)) {
        return Err(Error::domain(format!(
            "trial function must be positive on [0, r0); h = {} at s = {}",
            h[i],
            problem.radius_at(i)
        )));
    }
    let step = problem.step();
    Ok((COLLAR..=m - COLLAR)
        .map(|i| {
            let (d1, d2) = central(h, i, step);
            let c = problem.drift_at_node(i);
            let operator = if p == 2.0 {
                d2 + c * d1
            } else {
                d1.abs().powf(p - 2.0) * ((p - 1.0) * d2 + c * d1)
            };
            -operator / h[i].powf(p - 1.0)
        })
        .collect())
}

/// `(inf, sup)` of `-Delta_phi h / h` over the interior grid; brackets the first eigenvalue.
pub fn barta_bounds(h: &[f64], problem: &RadialProblem) -> Result<(f64, f64)> {
    problem.check_p("barta_bounds", true)?;
    let q = pointwise_quotients(h, problem, 2.0)?;
    let low = q.iter().copied().fold(f64::INFINITY, f64::min);
    let high = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((low, high))
}

/// `inf` of `-Delta_{p,phi} h / h^{p-1}` over the interior grid; a lower bound
/// for the first p-Laplacian eigenvalue.
pub fn picone_lower_bound(h: &[f64], problem: &RadialProblem) -> Result<f64> {
    let q = pointwise_quotients(h, problem, problem.p())?;
    Ok(q.into_iter().fold(f64::INFINITY, f64::min))
}
