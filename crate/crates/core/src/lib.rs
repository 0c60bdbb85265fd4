//! Numerical logarithmic and Riesz potential theory on curves.
//!
//! The crate discretizes compact curves in ℝ^d, solves the discrete
//! equilibrium problem as a simplex-constrained quadratic program, computes
//! Fekete points, evaluates fractional Laplacians and Riesz potentials in
//! one dimension, and probes the structure of graph kernels
//! −log|Γ(x)−Γ(y)| with Γ(x) = (x, A(x)).
//!
//! ```
//! use logpot::geometry::{sample_curve, CurveSpec};
//! use logpot::kernels::{assemble_kernel_matrix, DiagonalPolicy, KernelKind};
//! use logpot::equilibrium::{solve_equilibrium, SolverOptions};
//!
//! let curve = sample_curve(&CurveSpec::circle([0.0, 0.0], 1.0), 64).unwrap();
//! let k = assemble_kernel_matrix(&curve, &KernelKind::Log, DiagonalPolicy::CellAverage).unwrap();
//! let eq = solve_equilibrium(&k, 1.0, 1e-12, &SolverOptions::default()).unwrap();
//! assert!(eq.converged);
//! assert!(eq.weights.iter().all(|w| (w - 1.0 / 64.0).abs() < 1e-12));
//! ```

pub mod equilibrium;
pub mod error;
pub mod fraclap;
pub mod frostman;
pub mod geometry;
pub mod kernels;
pub mod quad;
pub mod regularity;
pub mod special;
pub mod suite;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/equilibrium.md")]
    mod equilibrium {}
    #[doc = include_str!("../../../book/src/fekete.md")]
    mod fekete {}
    #[doc = include_str!("../../../book/src/fractional.md")]
    mod fractional {}
    #[doc = include_str!("../../../book/src/frostman.md")]
    mod frostman {}
    #[doc = include_str!("../../../book/src/regularity.md")]
    mod regularity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
