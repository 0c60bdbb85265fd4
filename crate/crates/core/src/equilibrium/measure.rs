use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::SampledCurve;

/// How a node weight is spread in space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MassModel {
    /// A Dirac mass at the node.
    Atoms,
    /// Uniform on the node's arc-length cell, taken as a straight segment
    /// along the tangent. This is the model under which the cell-averaged
    /// kernel diagonal is exact.
    #[default]
    Cells,
}

/// Nonnegative weights on the nodes of a sampled curve.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub curve: Arc<SampledCurve>,
    pub weights: Vec<f64>,
    pub mass: f64,
    pub model: MassModel,
}

impl DiscreteMeasure {
    /// Validates nonnegativity and length; the mass is Σ weights.
    pub fn new(curve: Arc<SampledCurve>, weights: Vec<f64>, model: MassModel) -> Result<Self> {
        if weights.len() != curve.len() {
            return Err(invalid(format!(
                "{} weights for {} nodes",
                weights.len(),
                curve.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(invalid(format!("weights must be finite and ≥ 0, found {w}")));
        }
        let mass = weights.iter().sum();
        if !(mass > 0.0) {
            return Err(invalid("measure has zero mass"));
        }
        Ok(Self {
            curve,
            weights,
            mass,
            model,
        })
    }

    /// Normalized arc length scaled to `mass`.
    pub fn uniform_length(curve: Arc<SampledCurve>, mass: f64) -> Result<Self> {
        let total = curve.total_length();
        let w = curve.weights.iter().map(|h| mass * h / total).collect();
        Self::new(curve, w, MassModel::Cells)
    }

    /// A Dirac mass at node `node`.
    pub fn point_mass(curve: Arc<SampledCurve>, node: usize, mass: f64) -> Result<Self> {
        if node >= curve.len() {
            return Err(invalid(format!("node {node} out of range")));
        }
        let mut w = vec![0.0; curve.len()];
        w[node] = mass;
        Self::new(curve, w, MassModel::Atoms)
    }

    pub fn scaled(&self, m: f64) -> Self {
        Self {
            curve: self.curve.clone(),
            weights: self.weights.iter().map(|w| w * m).collect(),
            mass: self.mass * m,
            model: self.model,
        }
    }

    /// Nodes with positive weight.
    pub fn support_len(&self) -> usize {
        self.weights.iter().filter(|w| **w > 0.0).count()
    }

    /// Extent of node j's mass along the first coordinate, (lo, hi).
    /// Atoms give lo = hi.
    pub fn line_cell(&self, j: usize) -> (f64, f64) {
        let x = self.curve.point(j)[0];
        match self.model {
            MassModel::Atoms => (x, x),
            MassModel::Cells => {
                let (a, b) = self.curve.arc_cell(j);
                let t = self.curve.tangent(j)[0];
                let (u, v) = (x + a * t, x + b * t);
                (u.min(v), u.max(v))
            }
        }
    }

    /// μ(B(c, r)) with the closed Euclidean ball.
    pub fn ball_mass(&self, c: &[f64], r: f64) -> f64 {
        let curve = &self.curve;
        let mut acc = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let p = curve.point(j);
            let d2: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            match self.model {
                MassModel::Atoms => {
                    if d2 <= r * r {
                        acc += w;
                    }
                }
                MassModel::Cells => {
                    // |p + sT − c|² ≤ r² is a quadratic in s with unit leading
                    // coefficient; intersect its root interval with the cell.
                    let (lo, hi) = curve.arc_cell(j);
                    let tan = curve.tangent(j);
                    let bq: f64 = tan.iter().zip(p.iter().zip(c)).map(|(t, (a, b))| t * (a - b)).sum();
                    let disc = bq * bq - (d2 - r * r);
                    if disc < 0.0 {
                        continue;
                    }
                    let sq = disc.sqrt();
                    let (s0, s1) = (-bq - sq, -bq + sq);
                    let overlap = (s1.min(hi) - s0.max(lo)).max(0.0);
                    acc += w * overlap / (hi - lo);
                }
            }
        }
        acc
    }
}
