//! Reference solvers for radial Sturm-Liouville problems.
//!
//! Everything here works from a weight function `alpha(s)` alone (for a
//! model ball this is `f(s)^(n-1) * exp(-phi(s))`) and shares no code with the
//! shooting solvers in `warpspec`. The linear problem
//! `-(alpha u')' = lambda alpha u` on `[0, r0]` with `u'(0) = 0`, `u(r0) = 0`
//! is discretised with a three-point finite-volume scheme; the
//! p-Laplacian fundamental tone is found by minimising the discrete Rayleigh
//! quotient with the inverse power method.

/// Discretised `-(alpha u')' = lambda alpha u` in symmetric tridiagonal form.
///
/// Unknowns are `u_0 .. u_{N-1}` at `s_i = i h`; `u_N = 0` is the Dirichlet
/// condition and the flux through `s = 0` vanishes.
#[derive(Debug, Clone)]
pub struct FdOperator {
    h: f64,
    /// `alpha` at the half nodes `s_{i+1/2}`, `i = 0..N`.
    flux_weight: Vec<f64>,
    /// Cell masses `int alpha` over the control volume of node `i`.
    mass: Vec<f64>,
}

impl FdOperator {
    pub fn new(alpha: impl Fn(f64) -> f64, r0: f64, nodes: usize) -> Self {
        assert!(nodes >= 4, "need at least four intervals");
        assert!(r0 > 0.0);
        let h = r0 / nodes as f64;
        let flux_weight = (0..nodes).map(|i| alpha((i as f64 + 0.5) * h)).collect();
        let mut mass = Vec::with_capacity(nodes);
        // half cell [0, h/2] at the centre, full cells elsewhere; Simpson on each
        mass.push(h / 12.0 * (alpha(0.0) + 4.0 * alpha(0.25 * h) + alpha(0.5 * h)));
        for i in 1..nodes {
            let s = i as f64 * h;
            mass.push(h / 6.0 * (alpha(s - 0.5 * h) + 4.0 * alpha(s) + alpha(s + 0.5 * h)));
        }
        Self {
            h,
            flux_weight,
            mass,
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Stiffness matrix `A` as (diagonal, off-diagonal).
    fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n {
            let right = self.flux_weight[i] / self.h;
            diag[i] += right;
            if i + 1 < n {
                diag[i + 1] += right;
                off[i] = -right;
            }
        }
        (diag, off)
    }

    /// `M^{-1/2} A M^{-1/2}`, same spectrum as the generalized problem.
    fn symmetric_form(&self) -> (Vec<f64>, Vec<f64>) {
        let (diag, off) = self.stiffness();
        let inv_sqrt: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let d = diag
            .iter()
            .zip(&inv_sqrt)
            .map(|(a, w)| a * w * w)
            .collect();
        let e = off
            .iter()
            .enumerate()
            .map(|(i, a)| a * inv_sqrt[i] * inv_sqrt[i + 1])
            .collect();
        (d, e)
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm sequence).
    pub fn count_below(&self, lambda: f64) -> usize {
        let (d, e) = self.symmetric_form();
        sturm_count(&d, &e, lambda)
    }

    /// Sturm-bisection estimate of the `k`-th eigenvalue (1-based).
    ///
    /// Accurate to about `eps * ||A||`, i.e. roughly `1e-7` relative on fine
    /// grids; [`FdOperator::eigenpair`] refines it.
    pub fn eigenvalue_estimate(&self, k: usize) -> f64 {
        assert!(k >= 1);
        let (d, e) = self.symmetric_form();
        let mut hi = 1.0;
        while sturm_count(&d, &e, hi) < k {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(&d, &e, mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k`-th eigenvalue (1-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenpair(k).0
    }

    /// Smallest eigenpair by inverse iteration with zero shift.
    pub fn first_eigenpair(&self) -> (f64, Vec<f64>) {
        self.inverse_iteration(0.0)
    }

    /// The `k`-th eigenpair: Sturm bisection for the shift, then inverse
    /// iteration. The eigenvector is returned on nodes `0..=N` (the last entry
    /// is the Dirichlet zero), normalised so that `sum m_i u_i^2 = 1` and
    /// `u_0 > 0`.
    pub fn eigenpair(&self, k: usize) -> (f64, Vec<f64>) {
        if k == 1 {
            return self.first_eigenpair();
        }
        let shift = self.eigenvalue_estimate(k);
        self.inverse_iteration(shift)
    }

    fn inverse_iteration(&self, shift: f64) -> (f64, Vec<f64>) {
        let (diag, off) = self.stiffness();
        let n = self.len();
        let shifted: Vec<f64> = diag
            .iter()
            .zip(&self.mass)
            .map(|(a, m)| a - shift * m)
            .collect();
        let mut u = vec![1.0; n];
        let mut lambda = f64::INFINITY;
        for _ in 0..500 {
            let rhs: Vec<f64> = u.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
            let next = thomas(&shifted, &off, &rhs);
            let norm = next
                .iter()
                .zip(&self.mass)
                .map(|(x, m)| x * x * m)
                .sum::<f64>()
                .sqrt();
            u = next.into_iter().map(|x| x / norm).collect();
            let estimate = self.energy(&u);
            let converged = (estimate - lambda).abs() <= 1e-15 * estimate;
            lambda = estimate;
            if converged {
                break;
            }
        }
        if u[0] < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        u.push(0.0);
        (lambda, u)
    }

    /// `sum a_{i+1/2} (u_{i+1} - u_i)^2 / h` for an `M`-normalised `u`.
    fn energy(&self, u: &[f64]) -> f64 {
        (0..u.len())
            .map(|i| {
                let next = u.get(i + 1).copied().unwrap_or(0.0);
                self.flux_weight[i] * (next - u[i]).powi(2) / self.h
            })
            .sum()
    }
}

/// Weighted Dirichlet eigenvalue `k` of `-(alpha u')' = lambda alpha u`.
pub fn dirichlet_eigenvalue(alpha: impl Fn(f64) -> f64, r0: f64, nodes: usize, k: usize) -> f64 {
    FdOperator::new(alpha, r0, nodes).eigenvalue(k)
}

/// Richardson-extrapolated eigenvalue from `nodes` and `2 nodes` (second-order scheme).
pub fn dirichlet_eigenvalue_extrapolated(
    alpha: impl Fn(f64) -> f64,
    r0: f64,
    nodes: usize,
    k: usize,
) -> f64 {
    let coarse = FdOperator::new(&alpha, r0, nodes).eigenvalue(k);
    let fine = FdOperator::new(&alpha, r0, 2 * nodes).eigenvalue(k);
    (4.0 * fine - coarse) / 3.0
}

/// First eigenvalue of the weighted radial p-Laplacian, by minimising
/// `sum a |u'|^p h / sum m |u|^p` with the inverse power method.
///
/// Each iteration solves the discrete equation
/// `-(a Phi(u'))' = m Phi(u_prev)`, `Phi(x) = |x|^{p-2} x`, exactly: in one
/// dimension the flux is a cumulative sum. The Rayleigh quotients of the
/// iterates are non-increasing.
pub fn p_laplacian_first_eigenvalue(
    alpha: impl Fn(f64) -> f64,
    r0: f64,
    nodes: usize,
    p: f64,
) -> f64 {
    assert!(p > 1.0);
    let h = r0 / nodes as f64;
    let a: Vec<f64> = (0..nodes).map(|i| alpha((i as f64 + 0.5) * h)).collect();
    // trapezoid weights on nodes 0..N-1 (u_N = 0)
    let m: Vec<f64> = (0..nodes)
        .map(|i| {
            let w = if i == 0 { 0.5 } else { 1.0 };
            w * h * alpha(i as f64 * h)
        })
        .collect();
    let phi = |x: f64| x.signum() * x.abs().powf(p - 1.0);
    let phi_inv = |y: f64| y.signum() * y.abs().powf(1.0 / (p - 1.0));
    let quotient = |u: &[f64]| {
        let mut num = 0.0;
        for i in 0..nodes {
            let next = if i + 1 < nodes { u[i + 1] } else { 0.0 };
            num += a[i] * ((next - u[i]) / h).abs().powf(p) * h;
        }
        let den: f64 = u.iter().zip(&m).map(|(x, w)| w * x.abs().powf(p)).sum();
        num / den
    };

    let mut u: Vec<f64> = (0..nodes)
        .map(|i| 1.0 - (i as f64 * h / r0).powi(2))
        .collect();
    let mut lambda = quotient(&u);
    for _ in 0..20_000 {
        let mut cumulative = 0.0;
        let mut next = vec![0.0; nodes];
        let mut slopes = vec![0.0; nodes];
        for i in 0..nodes {
            cumulative += m[i] * phi(u[i]);
            slopes[i] = phi_inv(-cumulative / a[i]);
        }
        let mut value = 0.0;
        for i in (0..nodes).rev() {
            value -= h * slopes[i];
            next[i] = value;
        }
        let scale = next[0].abs();
        next.iter_mut().for_each(|x| *x /= scale);
        let estimate = quotient(&next);
        u = next;
        let done = (lambda - estimate).abs() <= 1e-14 * estimate;
        lambda = estimate;
        if done {
            break;
        }
    }
    lambda
}

/// Solve a symmetric tridiagonal system.
fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { off[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn sturm_count(d: &[f64], e: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let q_safe = if q.abs() < 1e-300 { 1e-300_f64.copysign(q) } else { q };
        q = (d[i] - lambda) - e[i - 1] * e[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}
