use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use warpspec_oracle::{dirichlet_eigenvalue_extrapolated, p_laplacian_first_eigenvalue};

use super::*;
use crate::profiles::CurvatureProfile;
use crate::warp::solve_warping;

const J01: f64 = 2.404_825_557_695_773;
const J02: f64 = 5.520_078_110_286_311;

fn warping(n: usize, kappa: f64, s_max: f64) -> Arc<Warping> {
    let profile = CurvatureProfile::constant(kappa, s_max).unwrap();
    Arc::new(solve_warping(&profile, n, s_max, s_max / 8192.0).unwrap())
}

fn problem(n: usize, kappa: f64, phi: Potential, r0: f64, p: f64) -> RadialProblem {
    let s_max = if kappa > 0.0 { 3.2 } else { 1.25 * r0 };
    RadialProblem::new(warping(n, kappa, s_max), phi, r0, p).unwrap()
}

fn disk(p: f64) -> RadialProblem {
    problem(2, 0.0, Potential::zero(2.0).unwrap(), 1.0, p)
}

fn ball() -> RadialProblem {
    problem(3, 0.0, Potential::zero(2.0).unwrap(), 1.0, 2.0)
}

fn sampled(problem: &RadialProblem, g: impl Fn(f64) -> f64) -> Vec<f64> {
    problem.radii().into_iter().map(g).collect()
}

fn closed_form_alpha(n: usize, kappa: f64, phi: &Potential) -> impl Fn(f64) -> f64 + '_ {
    move |s: f64| {
        let f = if kappa == 0.0 {
            s
        } else if kappa > 0.0 {
            (kappa.sqrt() * s).sin() / kappa.sqrt()
        } else {
            ((-kappa).sqrt() * s).sinh() / (-kappa).sqrt()
        };
        f.powi(n as i32 - 1) * (-phi.eval(s).unwrap().0).exp()
    }
}

#[test]
fn shooting_examples() {
    let shot = shoot_linear(&ball(), PI * PI).unwrap();
    assert!(shot.terminal.abs() < 1e-9, "{}", shot.terminal);
    assert_eq!(shot.node_count, 0);
    // psi = sin(pi s) / (pi s)
    let p = ball();
    for i in (1..p.nodes()).step_by(512) {
        let s = p.radius_at(i);
        assert!((shot.psi[i] - (PI * s).sin() / (PI * s)).abs() < 1e-10);
    }

    let flat = shoot_linear(&disk(2.0), 0.0).unwrap();
    assert!((flat.terminal - 1.0).abs() < 1e-15);
    assert_eq!(flat.node_count, 0);

    let below = shoot_linear(&disk(2.0), 5.0).unwrap();
    assert!(below.terminal > 0.0);
    assert_eq!(below.node_count, 0);
}

#[test]
fn shooting_rejects_bad_input() {
    assert!(shoot_linear(&disk(2.0), -1.0).unwrap_err().is_input_error());
    assert!(shoot_linear(&disk(3.0), 1.0).unwrap_err().is_input_error());
}

#[test]
fn radius_must_lie_inside_positivity_interval() {
    let sphere = warping(2, 1.0, 3.2);
    let zero = Potential::zero(4.0).unwrap();
    assert!(RadialProblem::new(sphere.clone(), zero.clone(), 3.15, 2.0).is_err());
    assert!(RadialProblem::new(sphere.clone(), zero.clone(), 3.0, 2.0).is_ok());
    assert!(RadialProblem::new(sphere, zero, 1.0, 1.0).is_err());
}

#[test]
fn disk_and_ball_first_eigenvalues() {
    let d = first_eigenvalue(&disk(2.0)).unwrap();
    assert!((d.lambda - J01 * J01).abs() < 1e-8 * d.lambda, "{}", d.lambda);
    assert!((d.lambda - 5.783186).abs() < 1e-6);
    let b = first_eigenvalue(&ball()).unwrap();
    assert!((b.lambda - PI * PI).abs() < 1e-8 * b.lambda, "{}", b.lambda);
    assert!(d.normalized && b.normalized);
    assert!(d.psi[0] > 0.0);
}

#[test]
fn constant_potential_does_not_move_the_spectrum() {
    let plain = first_eigenvalue(&disk(2.0)).unwrap().lambda;
    let shifted = problem(2, 0.0, Potential::constant(3.7, 2.0).unwrap(), 1.0, 2.0);
    let moved = first_eigenvalue(&shifted).unwrap().lambda;
    assert!((plain - moved).abs() < 1e-12 * plain);
}

#[test]
fn higher_radial_modes() {
    let b2 = kth_radial_eigenvalue(&ball(), 2).unwrap();
    assert!((b2.lambda - 4.0 * PI * PI).abs() < 1e-8 * b2.lambda);
    assert_eq!(b2.node_count, 1);
    let d2 = kth_radial_eigenvalue(&disk(2.0), 2).unwrap();
    assert!((d2.lambda - J02 * J02).abs() < 1e-8 * d2.lambda);
    assert!((d2.lambda - 30.471262).abs() < 1e-6);
    assert_eq!(kth_radial_eigenvalue(&disk(2.0), 1).unwrap(), first_eigenvalue(&disk(2.0)).unwrap());
    assert!(kth_radial_eigenvalue(&disk(2.0), 0).is_err());
}

#[test]
fn modes_have_k_minus_one_nodes_and_are_orthonormal() {
    for prob in [disk(2.0), problem(3, -1.0, Potential::quadratic(1.0, 2.0).unwrap(), 1.2, 2.0)] {
        let modes = radial_modes(&prob, 6, Execution::default()).unwrap();
        for (i, a) in modes.iter().enumerate() {
            assert_eq!(a.node_count, i);
            for (j, b) in modes.iter().enumerate() {
                let prod: Vec<f64> = a.psi.iter().zip(&b.psi).map(|(x, y)| x * y).collect();
                let inner = prob.integrate(&prod);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner - expected).abs() < 1e-6, "({i},{j}) {inner}");
            }
        }
        assert!(modes.windows(2).all(|w| w[0].lambda < w[1].lambda));
    }
}

#[test]
fn sequential_and_parallel_sweeps_agree() {
    let modes_par = radial_modes(&ball(), 4, Execution::Parallel).unwrap();
    let modes_seq = radial_modes(&ball(), 4, Execution::Sequential).unwrap();
    assert_eq!(modes_par, modes_seq);
}

#[test]
fn first_eigenfunction_is_positive_and_decreasing() {
    let hyp_log = Potential::hyperbolic_log(2.0).unwrap();
    for prob in [
        disk(2.0),
        problem(3, -1.0, hyp_log, 1.5, 2.0),
        problem(4, 1.0, Potential::quadratic(1.0, 4.0).unwrap(), 2.0, 2.0),
    ] {
        let pair = first_eigenvalue(&prob).unwrap();
        assert!(pair.monotonicity_violations().is_empty());
        let p3 = first_eigenvalue_p(&prob.with_p(3.0).unwrap()).unwrap();
        assert!(p3.monotonicity_violations().is_empty());
    }
}

#[test]
fn shooting_matches_finite_difference_oracle() {
    let potentials = |s_max: f64| {
        vec![
            Potential::zero(s_max).unwrap(),
            Potential::quadratic(1.0, s_max).unwrap(),
            Potential::hyperbolic_log(s_max).unwrap(),
        ]
    };
    for (n, kappa, r0) in [(2, 0.0, 1.0), (3, 0.0, 1.0), (3, -1.0, 1.0), (2, 1.0, 1.5)] {
        for phi in potentials(3.5) {
            let prob = problem(n, kappa, phi.clone(), r0, 2.0);
            let got = first_eigenvalue(&prob).unwrap().lambda;
            let alpha = closed_form_alpha(n, kappa, &phi);
            let expected = dirichlet_eigenvalue_extrapolated(alpha, r0, 20_000, 1);
            assert!(
                (got - expected).abs() < 1e-6 * expected,
                "n={n} kappa={kappa} phi={phi:?}: {got} vs {expected}"
            );
        }
    }
}

#[test]
fn p_laplacian_reduces_to_linear_at_two() {
    for prob in [disk(2.0), problem(3, -1.0, Potential::quadratic(1.0, 2.0).unwrap(), 1.0, 2.0)] {
        let linear = first_eigenvalue(&prob).unwrap().lambda;
        let nonlinear = first_eigenvalue_p(&prob).unwrap().lambda;
        assert!((linear - nonlinear).abs() < 1e-8 * linear, "{linear} vs {nonlinear}");
    }
}

#[test]
fn p_laplacian_matches_variational_oracle() {
    let prob = disk(3.0);
    let got = first_eigenvalue_p(&prob).unwrap();
    let expected = p_laplacian_first_eigenvalue(|s| s, 1.0, 2000, 3.0);
    assert!((got.lambda - expected).abs() < 1e-3 * expected, "{} vs {expected}", got.lambda);

    let quotient = rayleigh_quotient_with_slope(&got.psi, &got.dpsi, &prob).unwrap();
    assert!((quotient - got.lambda).abs() < 1e-6 * got.lambda);
    let scaled: Vec<f64> = got.psi.iter().map(|v| 7.0 * v).collect();
    let scaled_d: Vec<f64> = got.dpsi.iter().map(|v| 7.0 * v).collect();
    let again = rayleigh_quotient_with_slope(&scaled, &scaled_d, &prob).unwrap();
    assert!((again - quotient).abs() < 1e-12 * quotient);
}

#[test]
fn p_laplacian_on_small_exponents() {
    let prob = disk(1.5);
    let got = first_eigenvalue_p(&prob).unwrap().lambda;
    let expected = p_laplacian_first_eigenvalue(|s| s, 1.0, 4000, 1.5);
    assert!((got - expected).abs() < 2e-3 * expected, "{got} vs {expected}");
}

#[test]
fn rayleigh_quotient_examples() {
    let prob = disk(2.0);
    let trial = sampled(&prob, |s| 1.0 - s * s);
    assert!((rayleigh_quotient(&trial, &prob).unwrap() - 6.0).abs() < 1e-10);
    let pair = first_eigenvalue(&prob).unwrap();
    assert!((rayleigh_quotient(&pair.psi, &prob).unwrap() - pair.lambda).abs() < 1e-6 * pair.lambda);
    assert!(rayleigh_quotient(&vec![0.0; prob.nodes() + 1], &prob).is_err());
    assert!(rayleigh_quotient(&[1.0, 0.0], &prob).is_err());
}

#[test]
fn barta_examples() {
    let prob = disk(2.0);
    let pair = first_eigenvalue(&prob).unwrap();
    let (low, high) = barta_bounds(&pair.psi, &prob).unwrap();
    assert!((low - pair.lambda).abs() < 1e-4 && (high - pair.lambda).abs() < 1e-4);

    let (low, high) = barta_bounds(&sampled(&prob, |s| 1.0 - s * s), &prob).unwrap();
    assert!(low <= J01 * J01 && J01 * J01 <= high, "[{low}, {high}]");

    let b = ball();
    let (low, high) = barta_bounds(&sampled(&b, |s| (PI * s / 2.0).cos()), &b).unwrap();
    assert!(low <= PI * PI && PI * PI <= high, "[{low}, {high}]");

    let negative = sampled(&prob, |s| 0.5 - s);
    assert!(barta_bounds(&negative, &prob).unwrap_err().is_input_error());
    assert!(barta_bounds(&pair.psi, &disk(3.0)).is_err());
}

#[test]
fn picone_examples() {
    let prob = disk(2.0);
    let pair = first_eigenvalue(&prob).unwrap();
    let bound = picone_lower_bound(&pair.psi, &prob).unwrap();
    assert!((bound - pair.lambda).abs() < 1e-4);

    let cubic = disk(3.0);
    let tone = first_eigenvalue_p(&cubic).unwrap();
    let trial = sampled(&cubic, |s| 1.0 - s * s);
    assert!(picone_lower_bound(&trial, &cubic).unwrap() <= tone.lambda + 1e-6);
    let equality = picone_lower_bound(&tone.psi, &cubic).unwrap();
    assert!((equality - tone.lambda).abs() < 1e-4 * tone.lambda, "{equality} vs {}", tone.lambda);
}

#[test]
fn search_cap_is_reported() {
    let prob = RadialProblem::with_options(
        warping(2, 0.0, 1.25),
        Potential::zero(2.0).unwrap(),
        1.0,
        2.0,
        ProblemOptions {
            lambda_cap: Some(3.0),
            ..ProblemOptions::default()
        },
    )
    .unwrap();
    assert!(matches!(first_eigenvalue(&prob), Err(Error::Search(_))));
}

#[test]
fn csv_and_summary() {
    let prob = disk(2.0);
    let pair = first_eigenvalue(&prob).unwrap();
    let mut out = Vec::new();
    pair.write_csv(&prob, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# warpspec eigenpair n=2 p=2.0 r0=1.0"));
    assert_eq!(lines.next().unwrap(), "s,psi,dpsi");
    assert_eq!(lines.count(), prob.nodes() + 1);

    let summary = EigenSummary::new(&prob, 1, &pair).unwrap();
    assert!(summary.rayleigh_residual < 1e-8);
    let json = serde_json::to_string(&summary).unwrap();
    assert_eq!(serde_json::from_str::<EigenSummary>(&json).unwrap(), summary);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn domain_monotonicity(kappa in -1.0f64..1.0, r0 in 0.4f64..1.2, quad in prop::bool::ANY) {
        let phi = if quad { Potential::quadratic(1.0, 4.0).unwrap() } else { Potential::zero(4.0).unwrap() };
        let base = problem(3, kappa, phi, 1.5, 2.0);
        let radii: Vec<f64> = (0..5).map(|i| r0 * (1.0 + 0.05 * i as f64)).collect();
        let lambdas: Vec<f64> = radii
            .iter()
            .map(|&r| first_eigenvalue(&base.with_radius(r).unwrap()).unwrap().lambda)
            .collect();
        for w in lambdas.windows(2) {
            prop_assert!(w[0] - w[1] > 1e-10, "{:?}", lambdas);
        }
    }

    #[test]
    fn barta_sandwich_for_random_trials(a in 0.0f64..2.0, b in 0.0f64..1.0, kappa in -1.0f64..1.0) {
        // h = (1 - s^2)(1 + a s^2 + b s^4) is positive on [0, 1)
        let prob = problem(2, kappa, Potential::quadratic(1.0, 2.0).unwrap(), 1.0, 2.0);
        let lambda = first_eigenvalue(&prob).unwrap().lambda;
        let trial = sampled(&prob, |s| (1.0 - s * s) * (1.0 + a * s * s + b * s.powi(4)));
        let (low, high) = barta_bounds(&trial, &prob).unwrap();
        prop_assert!(low <= lambda && lambda <= high, "[{low}, {high}] vs {lambda}");
        prop_assert!(rayleigh_quotient(&trial, &prob).unwrap() >= lambda - 1e-6);
    }

    #[test]
    fn picone_bound_for_random_trials(a in 0.0f64..2.0, p in 1.6f64..3.5) {
        let prob = disk(p);
        let tone = first_eigenvalue_p(&prob).unwrap().lambda;
        let trial = sampled(&prob, |s| (1.0 - s * s) * (1.0 + a * s * s));
        prop_assert!(picone_lower_bound(&trial, &prob).unwrap() <= tone + 1e-6);
    }
}
