use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exec::Execution;
use crate::profiles::{CurvatureProfile, Potential};
use crate::spectrum::{first_eigenvalue, kth_radial_eigenvalue, RadialProblem};
use crate::warp::solve_warping;

fn problem(n: usize, kappa: f64, phi: Potential, r0: f64) -> RadialProblem {
    let s_max = 1.25 * r0;
    let profile = CurvatureProfile::constant(kappa, s_max).unwrap();
    let warping = Arc::new(solve_warping(&profile, n, s_max, s_max / 8192.0).unwrap());
    RadialProblem::new(warping, phi, r0, 2.0).unwrap()
}

fn disk() -> RadialProblem {
    problem(2, 0.0, Potential::zero(2.0).unwrap(), 1.0)
}

const EXEC: Execution = Execution::Parallel;

#[test]
fn large_time_is_dominated_by_first_mode() {
    let prob = disk();
    let expansion = KernelExpansion::new(&prob, 6, EXEC).unwrap();
    let first = &expansion.modes()[0];
    let second = &expansion.modes()[1];
    // second-mode weight below 1e-12 relative
    let t = (1e-12f64).ln() / (first.lambda - second.lambda) + 1.0;
    let grid = expansion.grid(&[t], DEFAULT_TAIL_TOL).unwrap();
    for i in (0..prob.nodes()).step_by(256) {
        let scaled = grid.values[0][i] * (first.lambda * t).exp();
        let lead = first.psi[0] * first.psi[i];
        assert!((scaled - lead).abs() < 1e-10 * first.psi[0] * first.psi[0]);
    }
}

#[test]
fn dirichlet_mass_is_nearly_one_at_small_times() {
    let grid = expansion_kernel(&disk(), DEFAULT_MODES, &[0.01], EXEC).unwrap();
    let mass = kernel_mass(&grid, 0.01).unwrap();
    assert!((mass - 1.0).abs() < 2e-3, "{mass}");
}

#[test]
fn reversed_summation_agrees() {
    let expansion = KernelExpansion::new(&disk(), DEFAULT_MODES, EXEC).unwrap();
    let t = 0.05;
    let profile = expansion.profile(t);
    for i in (0..profile.len()).step_by(97) {
        let rev = expansion.value_reversed(i, t);
        assert!((profile[i] - rev).abs() <= 1e-13 * profile[0], "{i}");
    }
}

#[test]
fn tail_bound_refusal_names_admissible_time() {
    let err = expansion_kernel(&disk(), 5, &[1e-3, 0.5], EXEC).unwrap_err();
    match err {
        Error::TailBound { t_min, admissible } => {
            assert_eq!(t_min, 1e-3);
            assert!(admissible > 1e-3 && admissible < 0.5);
            let ok = expansion_kernel(&disk(), 5, &[admissible * 1.01], EXEC);
            assert!(ok.is_ok());
        }
        other => panic!("unexpected {other}"),
    }
    assert!(expansion_kernel(&disk(), 5, &[0.0], EXEC).unwrap_err().is_input_error());
}

#[test]
fn stepping_matches_expansion_on_the_disk() {
    let prob = disk();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut times: Vec<f64> = (0..20).map(|_| rng.random_range(0.02..1.0)).collect();
    times.sort_by(f64::total_cmp);
    let radii: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..0.95)).collect();
    let exp = expansion_kernel(&prob, DEFAULT_MODES, &times, EXEC).unwrap();
    let cn = cn_kernel(&prob, &times, SteppingOptions::default(), EXEC).unwrap();
    for (t, r) in times.iter().zip(&radii) {
        let a = exp.value_at(*r, *t).unwrap();
        let b = cn.value_at(*r, *t).unwrap();
        assert!((a - b).abs() < 1e-3 * a, "r={r} t={t}: {a} vs {b}");
    }
}

#[test]
fn stepping_masses() {
    let prob = problem(3, -1.0, Potential::quadratic(1.0, 2.0).unwrap(), 1.0);
    let times = [0.01, 0.05, 0.1, 0.3, 0.6];
    let neumann = SteppingOptions {
        boundary: Boundary::Neumann,
        ..SteppingOptions::default()
    };
    let grid = cn_kernel(&prob, &times, neumann, EXEC).unwrap();
    for &t in &times {
        let mass = kernel_mass(&grid, t).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "t={t}: {mass}");
    }
    let grid = cn_kernel(&prob, &times, SteppingOptions::default(), EXEC).unwrap();
    let masses: Vec<f64> = times.iter().map(|&t| kernel_mass(&grid, t).unwrap()).collect();
    assert!(masses.windows(2).all(|w| w[1] <= w[0] + 1e-8), "{masses:?}");
    assert!(grid.min_value() >= -1e-10);
    let last = grid.values.last().unwrap();
    assert_eq!(last[prob.nodes()], 0.0);
    assert!(last[..prob.nodes() - 2].iter().all(|&v| v > 0.0));
}

#[test]
fn dirichlet_mass_decays_at_first_eigenvalue_rate() {
    let prob = disk();
    let lambda = first_eigenvalue(&prob).unwrap().lambda;
    let t = 5.0 / lambda;
    let grid = expansion_kernel(&prob, DEFAULT_MODES, &[t], EXEC).unwrap();
    assert!(kernel_mass(&grid, t).unwrap() < 0.05);
}

#[test]
fn semigroup_against_stepping() {
    let prob = problem(2, 1.0, Potential::zero(2.0).unwrap(), 1.0);
    let expansion = KernelExpansion::new(&prob, DEFAULT_MODES, EXEC).unwrap();
    let (t1, t2) = (0.05, 0.2);
    let direct = expansion.grid(&[t1 + t2], DEFAULT_TAIL_TOL).unwrap();
    let options = SteppingOptions {
        dt: 1e-4,
        ..SteppingOptions::default()
    };
    let stepped = cn_from(&prob, expansion.profile(t1), t1, &[t1 + t2], options).unwrap();
    let worst = max_relative_discrepancy(&stepped, &direct, 0.9).unwrap();
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn heat_concentrates_at_the_pole() {
    let prob = disk();
    let start = stepping::start_expansion(&prob, 1e-4, EXEC).unwrap();
    let grid = start.grid(&[1e-4, 1e-3], DEFAULT_TAIL_TOL).unwrap();
    for (delta, t) in [(0.1, 1e-4), (0.5, 1e-4), (0.5, 1e-3)] {
        let mass = kernel_mass_within(&grid, t, delta).unwrap();
        assert!((mass - 1.0).abs() < 5e-3, "delta={delta} t={t}: {mass}");
    }
    // in the plane the mass outside radius delta is exp(-delta^2 / 4t)
    let mass = kernel_mass_within(&grid, 1e-3, 0.1).unwrap();
    assert!((mass - (1.0 - (-2.5f64).exp())).abs() < 1e-4, "{mass}");
    assert!(kernel_mass_within(&grid, 1e-3, 2.0).is_err());
}

#[test]
fn stepping_validates_times() {
    let prob = disk();
    let opts = SteppingOptions::default();
    assert!(cn_kernel(&prob, &[], opts, EXEC).is_err());
    assert!(cn_kernel(&prob, &[0.0, 0.1], opts, EXEC).unwrap_err().is_input_error());
    assert!(cn_kernel(&prob, &[0.2, 0.1], opts, EXEC).is_err());
    let coarse = SteppingOptions { dt: 0.05, ..opts };
    assert!(cn_kernel(&prob, &[0.1], coarse, EXEC).is_err());
}

#[test]
fn line_stepping_reproduces_mehler_kernel() {
    let t0 = 1e-3;
    let kind = ClosedFormKernel::MehlerShrinking;
    let exact = |y: f64, t: f64| closed_form_eval(kind, KernelPoint::Pair(0.0, y), t).unwrap();
    let times = [0.05, 0.2];
    let line = line_cn_kernel(|x| x * x, 6.0, 12_000, |y| exact(y, t0), t0, 1e-4, &times).unwrap();
    for (k, &t) in times.iter().enumerate() {
        for y in [-1.0, 0.0, 0.4, 1.2] {
            let got = line.value_at(y, k);
            let want = exact(y, t);
            assert!((got - want).abs() < 1e-3 * want, "y={y} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn line_stepping_reproduces_steady_soliton() {
    let plain = LineOptions {
        nodes: 16_000,
        richardson: false,
        ..LineOptions::default()
    };
    let kind = ClosedFormKernel::SteadySoliton { sign: 1.0 };
    let times = [0.02, 0.1];
    let line = soliton_line_kernel(1.0, &times, plain).unwrap();
    for (k, &t) in times.iter().enumerate() {
        for r in [0.0, 0.5, 1.0] {
            let got = line.value_at(r, k);
            let want = closed_form_eval(kind, KernelPoint::Radial(r), t).unwrap();
            assert!((got - want).abs() < 1e-3 * want, "r={r} t={t}: {got} vs {want}");
        }
    }
    // the extrapolated run also resolves the far tail at early times
    let times = [0.01];
    let line = soliton_line_kernel(1.0, &times, LineOptions::default()).unwrap();
    for r in [0.0, 0.5, 1.0] {
        let got = line.value_at(r, 0);
        let want = closed_form_eval(kind, KernelPoint::Radial(r), 0.01).unwrap();
        assert!((got - want).abs() < 1e-4 * want, "r={r}: {got} vs {want}");
    }
}

#[test]
fn csv_and_meta() {
    let prob = disk();
    let grid = expansion_kernel(&prob, 10, &[0.1, 0.2], EXEC).unwrap();
    let mut out = Vec::new();
    grid.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# warpspec kernel boundary=dirichlet K=10 t0=none dt=none");
    assert_eq!(lines.next().unwrap(), "r,t,H");
    assert_eq!(lines.count(), 2 * (prob.nodes() + 1));
    let meta = grid.meta();
    let json = serde_json::to_string(&meta).unwrap();
    assert!(json.contains("\"K\":10"));
    assert_eq!(serde_json::from_str::<KernelMeta>(&json).unwrap(), meta);
}

#[test]
fn second_mode_of_kernel_is_consistent_with_spectrum() {
    let prob = disk();
    let expansion = KernelExpansion::new(&prob, 3, EXEC).unwrap();
    let second = kth_radial_eigenvalue(&prob, 2).unwrap();
    assert_eq!(expansion.modes()[1], second);
    assert!((expansion.modes()[0].lambda - 2.404825557695773f64.powi(2)).abs() < 1e-7);
    assert!(PI > 0.0);
}
