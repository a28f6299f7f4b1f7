//! Numerical checks of eigenvalue and heat-kernel comparison inequalities.
//!
//! A test manifold is itself rotationally symmetric, with warping `g` solving
//! `g'' + kappa_g g = 0`. On such a manifold the radial Ricci curvature (per
//! unit of `n - 1`) and the radial sectional curvature are both `-g''/g =
//! kappa_g`, so a single profile feeds both the lower-bound and the
//! upper-bound comparisons. Nothing here covers general Riemannian manifolds.
//!
//! With `kappa_minus <= kappa_g <= kappa_plus` the checked inequalities are
//!
//! * `lambda(B_g) <= lambda(B_minus)` and `lambda(B_g) >= lambda(B_plus)`, for
//!   the Witten-Laplacian and, when `p != 2`, the weighted p-Laplacian;
//! * `H_g(r, t) >= H_minus(r, t)` and `H_g(r, t) <= H_plus(r, t)` for the
//!   Dirichlet heat kernels centred at the pole.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{default_s_max, CurvatureSpec, PotentialSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernel::{KernelExpansion, DEFAULT_MODES, DEFAULT_TAIL_TOL};
use crate::profiles::{CurvatureProfile, Potential};
use crate::spectrum::{first_eigenvalue, first_eigenvalue_p, ProblemOptions, RadialProblem, DEFAULT_NODES};
use crate::warp::{solve_warping, Warping};

/// Warping steps per unit `s_max` when no step is given.
const DEFAULT_WARP_INTERVALS: f64 = 8192.0;
/// Radial intervals for balls approaching the cut point, where the drift is stiff.
const EXHAUSTION_NODES: usize = 16_384;
/// A margin within this many tolerances of zero is flagged as near-equality.
const NEAR_EQUALITY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance on eigenvalue margins.
    pub eig: f64,
    /// Absolute tolerance on kernel gaps.
    pub kernel: f64,
    /// Absolute tolerance on curvature ordering.
    pub bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig: 1e-6,
            kernel: 1e-4,
            bound: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Warping integration step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Radial intervals on `[0, r0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

fn default_p() -> f64 {
    2.0
}

fn default_t_grid() -> Vec<f64> {
    vec![0.05, 0.1, 0.5, 1.0]
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

/// One comparison scenario: a test manifold, its curvature bounds and a weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonScenario {
    pub name: String,
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    pub r0: f64,
    pub kappa_g: CurvatureSpec,
    /// Lower bound; defaults to `kappa_g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_minus: Option<CurvatureSpec>,
    /// Upper bound; defaults to `kappa_g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_plus: Option<CurvatureSpec>,
    #[serde(default)]
    pub phi: PotentialSpec,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_modes", rename = "K")]
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Which of the three balls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Test,
    Lower,
    Upper,
}

/// Warpings and weight of a scenario, ready for the solvers.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub g: Arc<Warping>,
    pub minus: Arc<Warping>,
    pub plus: Arc<Warping>,
    pub potential: Potential,
    pub nodes: usize,
    pub r0: f64,
    pub p: f64,
}

impl BuiltScenario {
    pub fn warping(&self, role: Role) -> &Arc<Warping> {
        match role {
            Role::Test => &self.g,
            Role::Lower => &self.minus,
            Role::Upper => &self.plus,
        }
    }

    pub fn problem(&self, role: Role) -> Result<RadialProblem> {
        let options = ProblemOptions {
            nodes: self.nodes,
            ..ProblemOptions::default()
        };
        RadialProblem::with_options(self.warping(role).clone(), self.potential.clone(), self.r0, self.p, options)
    }
}

impl ComparisonScenario {
    /// A scenario with every optional field at its default.
    pub fn new(name: &str, n: usize, r0: f64, kappa_g: CurvatureSpec) -> Self {
        Self {
            name: name.to_owned(),
            n,
            p: 2.0,
            r0,
            kappa_g,
            kappa_minus: None,
            kappa_plus: None,
            phi: PotentialSpec::Zero,
            t_grid: default_t_grid(),
            modes: DEFAULT_MODES,
            s_max: None,
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn kappa_minus(&self) -> &CurvatureSpec {
        self.kappa_minus.as_ref().unwrap_or(&self.kappa_g)
    }

    pub fn kappa_plus(&self) -> &CurvatureSpec {
        self.kappa_plus.as_ref().unwrap_or(&self.kappa_g)
    }

    pub fn s_max(&self) -> f64 {
        self.s_max.unwrap_or_else(|| {
            default_s_max(
                self.r0,
                &[&self.kappa_g, self.kappa_minus(), self.kappa_plus()],
                &self.phi,
            )
        })
    }

    pub fn warp_step(&self) -> f64 {
        self.grid.h.unwrap_or(self.s_max() / DEFAULT_WARP_INTERVALS)
    }

    pub fn nodes(&self) -> usize {
        self.grid.nodes.unwrap_or(DEFAULT_NODES)
    }

    /// Structural checks that need no solver.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.name.is_empty() {
            return fail("scenario name must not be empty".into());
        }
        if self.n < 2 {
            return fail(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return fail(format!("p must lie in (1, inf), got {}", self.p));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return fail(format!("r0 must be positive, got {}", self.r0));
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return fail("t_grid must be a non-empty list of positive times".into());
        }
        if self.t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return fail("t_grid must be strictly increasing".into());
        }
        if self.modes == 0 {
            return fail("K must be at least 1".into());
        }
        let tol = self.tolerances;
        if [tol.eig, tol.kernel, tol.bound].iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return fail("tolerances must be finite and non-negative".into());
        }
        if self.grid.h.is_some_and(|h| !(h > 0.0)) {
            return fail("grid.h must be positive".into());
        }
        if self.grid.nodes.is_some_and(|m| m < 16) {
            return fail("grid.nodes must be at least 16".into());
        }
        if !(self.s_max() >= self.r0) {
            return fail(format!("s_max = {} is smaller than r0 = {}", self.s_max(), self.r0));
        }
        Ok(())
    }

    fn profile(&self, role: Role) -> Result<CurvatureProfile> {
        let spec = match role {
            Role::Test => &self.kappa_g,
            Role::Lower => self.kappa_minus(),
            Role::Upper => self.kappa_plus(),
        };
        spec.build(self.s_max())
    }

    pub fn potential(&self) -> Result<Potential> {
        self.phi.build(self.s_max())
    }

    /// Solve the three warping problems.
    pub fn build(&self) -> Result<BuiltScenario> {
        self.check()?;
        let warp = |role| -> Result<Arc<Warping>> {
            let profile = self.profile(role)?;
            Ok(Arc::new(solve_warping(&profile, self.n, self.s_max(), self.warp_step())?))
        };
        Ok(BuiltScenario {
            g: warp(Role::Test)?,
            minus: warp(Role::Lower)?,
            plus: warp(Role::Upper)?,
            potential: self.potential()?,
            nodes: self.nodes(),
            r0: self.r0,
            p: self.p,
        })
    }
}

/// A grid point where `kappa_minus <= kappa_g <= kappa_plus` fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub s: f64,
    pub kappa_minus: f64,
    pub kappa_g: f64,
    pub kappa_plus: f64,
}

/// Check the curvature ordering on the warping grid over `[0, r0]`.
pub fn validate_bounds(scenario: &ComparisonScenario) -> Result<Vec<BoundViolation>> {
    scenario.check()?;
    let (g, lo, hi) = (
        scenario.profile(Role::Test)?,
        scenario.profile(Role::Lower)?,
        scenario.profile(Role::Upper)?,
    );
    let h = scenario.warp_step();
    let tol = scenario.tolerances.bound;
    let steps = (scenario.r0 / h).ceil() as usize;
    let mut out = Vec::new();
    for i in 0..=steps {
        let s = (i as f64 * h).min(scenario.r0);
        let (km, kg, kp) = (lo.eval(s)?, g.eval(s)?, hi.eval(s)?);
        if km > kg + tol || kg > kp + tol {
            out.push(BoundViolation {
                s,
                kappa_minus: km,
                kappa_g: kg,
                kappa_plus: kp,
            });
        }
    }
    Ok(out)
}

/// Outcome of one inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub inequality: String,
    /// Relative for eigenvalues, absolute for kernels; non-negative when the inequality holds.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub near_equality: bool,
}

impl Verdict {
    fn new(inequality: &str, margin: f64, tolerance: f64) -> Self {
        Self::with_spread(inequality, margin, margin.abs(), tolerance)
    }

    /// `spread` measures how far the two sides are apart anywhere; kernels
    /// both vanish on the wall, so their minimum gap alone says nothing
    /// about near-equality.
    fn with_spread(inequality: &str, margin: f64, spread: f64, tolerance: f64) -> Self {
        Self {
            inequality: inequality.to_owned(),
            margin,
            tolerance,
            pass: margin >= -tolerance,
            near_equality: spread < NEAR_EQUALITY_FACTOR * tolerance,
        }
    }
}

/// Inequality names used in reports.
pub mod inequality {
    /// `lambda(B_g) <= lambda(B_minus)`.
    pub const EIGEN_LOWER: &str = "eigenvalue: lambda_g <= lambda_minus";
    /// `lambda(B_g) >= lambda(B_plus)`.
    pub const EIGEN_UPPER: &str = "eigenvalue: lambda_g >= lambda_plus";
    pub const P_EIGEN_LOWER: &str = "p-eigenvalue: lambda_p_g <= lambda_p_minus";
    pub const P_EIGEN_UPPER: &str = "p-eigenvalue: lambda_p_g >= lambda_p_plus";
    pub const KERNEL_LOWER: &str = "heat kernel: H_g >= H_minus";
    pub const KERNEL_UPPER: &str = "heat kernel: H_g <= H_plus";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: ComparisonScenario,
    pub lambda_g: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub lambda_p_g: Option<f64>,
    pub lambda_p_minus: Option<f64>,
    pub lambda_p_plus: Option<f64>,
    /// `min (H_g - H_minus)` over the radial nodes and `t_grid`.
    pub kernel_min_gap_lower: Option<f64>,
    /// `min (H_plus - H_g)` over the radial nodes and `t_grid`.
    pub kernel_min_gap_upper: Option<f64>,
    /// `max |H_g - H_minus|` over the same points.
    pub kernel_max_gap_lower: Option<f64>,
    /// `max |H_plus - H_g|` over the same points.
    pub kernel_max_gap_upper: Option<f64>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, inequality: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.inequality == inequality)
    }
}

fn bounds_gate(scenario: &ComparisonScenario) -> Result<()> {
    let violations = validate_bounds(scenario)?;
    if let Some(first) = violations.first() {
        return Err(Error::Config(format!(
            "curvature bounds violated at {} grid points, first at s = {}: {} <= {} <= {} fails",
            violations.len(),
            first.s,
            first.kappa_minus,
            first.kappa_g,
            first.kappa_plus
        )));
    }
    Ok(())
}

/// Eigenvalues of the three balls, linear and (for `p != 2`) nonlinear.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenComparison {
    pub linear: [f64; 3],
    pub nonlinear: Option<[f64; 3]>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
}

const ROLES: [Role; 3] = [Role::Test, Role::Lower, Role::Upper];

pub fn eigen_comparison(scenario: &ComparisonScenario, exec: Execution) -> Result<EigenComparison> {
    bounds_gate(scenario)?;
    let built = scenario.build()?;
    let tol = scenario.tolerances.eig;
    let solved = exec.map(&ROLES, |&role| -> Result<(f64, Option<f64>, bool)> {
        let problem = built.problem(role)?.with_p(2.0)?;
        let pair = first_eigenvalue(&problem)?;
        let monotone = pair.monotonicity_violations().is_empty();
        let nonlinear = if scenario.p != 2.0 {
            Some(first_eigenvalue_p(&problem.with_p(scenario.p)?)?.lambda)
        } else {
            None
        };
        Ok((pair.lambda, nonlinear, monotone))
    });
    let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let linear = [solved[0].0, solved[1].0, solved[2].0];
    let mut verdicts = vec![
        Verdict::new(inequality::EIGEN_LOWER, (linear[1] - linear[0]) / linear[0], tol),
        Verdict::new(inequality::EIGEN_UPPER, (linear[0] - linear[2]) / linear[0], tol),
    ];
    let nonlinear = match (solved[0].1, solved[1].1, solved[2].1) {
        (Some(g), Some(lo), Some(hi)) => {
            verdicts.push(Verdict::new(inequality::P_EIGEN_LOWER, (lo - g) / g, tol));
            verdicts.push(Verdict::new(inequality::P_EIGEN_UPPER, (g - hi) / g, tol));
            Some([g, lo, hi])
        }
        _ => None,
    };
    let mut warnings = Vec::new();
    if !built.potential.origin_smooth() {
        warnings.push(
            "potential is not smooth at the pole; the comparison theorems assume a smooth radial potential"
                .to_owned(),
        );
    }
    for (role, (_, _, monotone)) in ROLES.iter().zip(&solved) {
        if !monotone {
            warnings.push(format!("first eigenfunction on the {role:?} ball is not positive and decreasing"));
        }
    }
    Ok(EigenComparison {
        linear,
        nonlinear,
        verdicts,
        warnings,
    })
}

/// Minimum kernel gaps over the radial nodes and `t_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelComparison {
    pub min_gap_lower: f64,
    pub min_gap_upper: f64,
    pub max_gap_lower: f64,
    pub max_gap_upper: f64,
    pub verdicts: Vec<Verdict>,
}

pub fn kernel_comparison(scenario: &ComparisonScenario, exec: Execution) -> Result<KernelComparison> {
    bounds_gate(scenario)?;
    if scenario.p != 2.0 {
        return Err(Error::Config("kernel comparison needs p = 2".into()));
    }
    let built = scenario.build()?;
    let grids = exec
        .map(&ROLES, |&role| {
            KernelExpansion::new(&built.problem(role)?, scenario.modes, exec)?.grid(&scenario.t_grid, DEFAULT_TAIL_TOL)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let gaps = |upper: &[Vec<f64>], lower: &[Vec<f64>]| {
        upper
            .iter()
            .flatten()
            .zip(lower.iter().flatten())
            .map(|(a, b)| a - b)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d.abs())))
    };
    let (min_gap_lower, max_gap_lower) = gaps(&grids[0].values, &grids[1].values);
    let (min_gap_upper, max_gap_upper) = gaps(&grids[2].values, &grids[0].values);
    let tol = scenario.tolerances.kernel;
    Ok(KernelComparison {
        min_gap_lower,
        min_gap_upper,
        max_gap_lower,
        max_gap_upper,
        verdicts: vec![
            Verdict::with_spread(inequality::KERNEL_LOWER, min_gap_lower, max_gap_lower, tol),
            Verdict::with_spread(inequality::KERNEL_UPPER, min_gap_upper, max_gap_upper, tol),
        ],
    })
}

/// Every applicable check for one scenario; kernels only when `p = 2`.
pub fn run_comparison(scenario: &ComparisonScenario, exec: Execution) -> Result<ComparisonReport> {
    let run = || -> Result<ComparisonReport> {
        let eigen = eigen_comparison(scenario, exec)?;
        let kernel = if scenario.p == 2.0 {
            Some(kernel_comparison(scenario, exec)?)
        } else {
            None
        };
        let mut verdicts = eigen.verdicts;
        if let Some(k) = &kernel {
            verdicts.extend(k.verdicts.iter().cloned());
        }
        Ok(ComparisonReport {
            scenario: scenario.clone(),
            lambda_g: eigen.linear[0],
            lambda_minus: eigen.linear[1],
            lambda_plus: eigen.linear[2],
            lambda_p_g: eigen.nonlinear.map(|e| e[0]),
            lambda_p_minus: eigen.nonlinear.map(|e| e[1]),
            lambda_p_plus: eigen.nonlinear.map(|e| e[2]),
            kernel_min_gap_lower: kernel.as_ref().map(|k| k.min_gap_lower),
            kernel_min_gap_upper: kernel.as_ref().map(|k| k.min_gap_upper),
            kernel_max_gap_lower: kernel.as_ref().map(|k| k.max_gap_lower),
            kernel_max_gap_upper: kernel.as_ref().map(|k| k.max_gap_upper),
            verdicts,
            warnings: eigen.warnings,
        })
    };
    run().map_err(|e| e.in_scenario(&scenario.name))
}

/// Reports for several scenarios, in input order.
pub fn run_suite(scenarios: &[ComparisonScenario], exec: Execution) -> Vec<Result<ComparisonReport>> {
    exec.map(scenarios, |s| run_comparison(s, exec))
}

/// Pass/fail counts over a suite run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub scenarios: Vec<ScenarioStatus>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioStatus {
    pub name: String,
    /// `pass`, `fail` or `error`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SuiteSummary {
    pub fn new(scenarios: &[ComparisonScenario], results: &[Result<ComparisonReport>]) -> Self {
        let statuses: Vec<ScenarioStatus> = scenarios
            .iter()
            .zip(results)
            .map(|(s, r)| {
                let (status, message) = match r {
                    Ok(report) if report.passed() => ("pass", None),
                    Ok(_) => ("fail", None),
                    Err(e) => ("error", Some(e.to_string())),
                };
                ScenarioStatus {
                    name: s.name.clone(),
                    status: status.to_owned(),
                    message,
                }
            })
            .collect();
        let count = |k: &str| statuses.iter().filter(|s| s.status == k).count();
        Self {
            total: statuses.len(),
            passed: count("pass"),
            failed: count("fail"),
            errors: count("error"),
            scenarios: statuses,
        }
    }
}

/// `lambda(B(q, l - eps))` for each `eps`, ordered by decreasing `eps`, where
/// `l` is the first zero of the warping of `profile`.
pub fn exhaustion_asymptotics(
    profile: &CurvatureProfile,
    potential: &Potential,
    n: usize,
    p: f64,
    eps: &[f64],
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    let h = profile.s_max() / DEFAULT_WARP_INTERVALS;
    let warping = Arc::new(solve_warping(profile, n, profile.s_max(), h)?);
    let l = warping
        .first_zero()
        .ok_or_else(|| Error::domain("warping has no zero below s_max (l = inf)"))?;
    if eps.iter().any(|e| !(*e > 0.0 && *e < 0.5 * l)) {
        return Err(Error::domain(format!("each eps must lie in (0, l/2) = (0, {})", 0.5 * l)));
    }
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let lambdas = exec.map(&eps, |&e| -> Result<f64> {
        let options = ProblemOptions {
            nodes: EXHAUSTION_NODES,
            ..ProblemOptions::default()
        };
        let problem = RadialProblem::with_options(warping.clone(), potential.clone(), l - e, p, options)?;
        if p == 2.0 {
            Ok(first_eigenvalue(&problem)?.lambda)
        } else {
            Ok(first_eigenvalue_p(&problem)?.lambda)
        }
    });
    eps.into_iter()
        .zip(lambdas)
        .map(|(e, l)| l.map(|l| (e, l)))
        .collect()
}
