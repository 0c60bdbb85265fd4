//! Discrete equilibrium measures, Fekete points and their comparison.
//!
//! The equilibrium problem is the quadratic program
//! min wᵀKw subject to w ≥ 0, Σw = m, whose KKT conditions are the discrete
//! Frostman conditions: (Kw)_i = λ on the support and (Kw)_i ≥ λ off it.

mod fekete;
mod ks;
mod measure;
mod qp;

pub use fekete::{fekete_points, transfinite_diameters, FeketeConfig, FeketeResult, TransfiniteReport};
pub use ks::{compare_to_equilibrium, ks_distance, Cdf};
pub use measure::{DiscreteMeasure, MassModel};
pub use qp::{kkt_residual, project_simplex, solve_equilibrium, EquilibriumResult, SolverOptions};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::SampledCurve;
use crate::kernels::{kernel_value, KernelKind};

/// Σ_j k(x, p_j) w_j, treating the measure as atoms at the nodes.
pub fn potential(curve: &SampledCurve, mu: &DiscreteMeasure, kind: &KernelKind, x: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (j, w) in mu.weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let pj = curve.point(j);
        let arg: &[f64] = match kind {
            KernelKind::GraphLog { .. } => &curve.params[j..=j],
            _ => pj,
        };
        match kernel_value(kind, x, arg) {
            Ok(v) => acc += v * w,
            Err(Error::Singularity(_)) => {
                return Err(Error::Singularity(format!(
                    "probe coincides with node {j}, which carries weight {w:e}"
                )))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

/// Discrete Frostman conditions for a solved equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    /// max |Uμ − λ| over support nodes.
    pub max_support_deviation: f64,
    /// min (Uμ − λ) over the probes; +∞ when there are none.
    pub min_probe_margin: f64,
    pub robin_constant: f64,
    pub passed: bool,
}

/// Check Uμ = λ on the support (using the node potentials of the solve) and
/// Uμ ≥ λ at the probes. A probe that coincides with a node uses that node's
/// potential, diagonal included.
pub fn verify_equilibrium_conditions(
    curve: &SampledCurve,
    result: &EquilibriumResult,
    probes: &[Vec<f64>],
    tol: f64,
) -> Result<ConditionReport> {
    let lambda = result.robin_constant;
    let max_dev = result
        .potentials
        .iter()
        .zip(&result.support_mask)
        .filter(|(_, s)| **s)
        .map(|(u, _)| (u - lambda).abs())
        .fold(0.0, f64::max);
    let mu = DiscreteMeasure {
        curve: std::sync::Arc::new(curve.clone()),
        weights: result.weights.clone(),
        mass: result.mass,
        model: MassModel::Cells,
    };
    let mut min_margin = f64::INFINITY;
    for p in probes {
        let node = (0..curve.len()).find(|&j| match &result.kind {
            KernelKind::GraphLog { .. } => curve.params[j] == p[0],
            _ => curve.point(j) == p.as_slice(),
        });
        let u = match node {
            Some(j) => result.potentials[j],
            None => potential(curve, &mu, &result.kind, p)?,
        };
        min_margin = min_margin.min(u - lambda);
    }
    Ok(ConditionReport {
        max_support_deviation: max_dev,
        min_probe_margin: min_margin,
        robin_constant: lambda,
        passed: max_dev <= tol && min_margin >= -tol,
    })
}

/// Total-variation distance ½Σ|w_i/m − h_i/L| to normalized arc length.
pub fn tv_to_length(mu: &DiscreteMeasure) -> f64 {
    let total: f64 = mu.curve.weights.iter().sum();
    0.5 * mu
        .weights
        .iter()
        .zip(&mu.curve.weights)
        .map(|(w, h)| (w / mu.mass - h / total).abs())
        .sum::<f64>()
}
