//! Weighted heat kernels and Dirichlet eigenvalues on spherically symmetric
//! model spaces `[0, l) x_f S^{n-1}` with a radial weight `exp(-phi)`.
//!
//! * [`profiles`]: radial curvature functions `kappa(s)` and potentials `phi(s)`.
//! * [`warp`]: the warping function `f'' + kappa f = 0` and radial geometry.
//! * [`spectrum`]: radial Witten-Laplacian and weighted p-Laplacian eigenvalues.
//! * [`kernel`]: closed-form, eigenfunction-expansion and Crank-Nicolson heat kernels.
//! * [`compare`]: eigenvalue and heat-kernel comparison checks against model spaces.
//! * [`config`]: scenario files driving the `warpspec` command-line tool.

pub mod compare;
pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod kernel;
pub mod numerics;
pub mod profiles;
pub mod spectrum;
pub mod warp;

pub use error::{Error, Result};
pub use exec::Execution;
pub use profiles::{CurvatureProfile, Potential};
pub use warp::{solve_warping, Warping};
