use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::fekete::FeketeResult;
use super::measure::{DiscreteMeasure, MassModel};

/// A normalized CDF on a parameter line made of atoms and uniform pieces.
#[derive(Debug, Clone)]
pub struct Cdf {
    atoms: Vec<(f64, f64)>,
    pieces: Vec<(f64, f64, f64)>,
    total: f64,
}

impl Cdf {
    /// Equal atoms at the given parameters.
    pub fn empirical(params: &[f64]) -> Self {
        let m = 1.0 / params.len() as f64;
        Self {
            atoms: params.iter().map(|t| (*t, m)).collect(),
            pieces: Vec::new(),
            total: 1.0,
        }
    }

    /// The CDF of a measure on a single-component curve, in the curve
    /// parameter. Cells on a closed curve wrap around [0, 2π).
    pub fn of_measure(mu: &DiscreteMeasure) -> Result<Self> {
        let curve = &mu.curve;
        if curve.components.len() != 1 {
            return Err(Error::Unsupported(
                "CDF comparison needs a single-component curve".into(),
            ));
        }
        let closed = curve.components[0].closed;
        let mut atoms = Vec::new();
        let mut pieces = Vec::new();
        for (j, &w) in mu.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            match mu.model {
                MassModel::Atoms => atoms.push((curve.params[j], w)),
                MassModel::Cells => {
                    let (lo, hi) = curve.param_cell(j);
                    let width = hi - lo;
                    let tau = 2.0 * PI;
                    if closed && lo < 0.0 {
                        pieces.push((lo + tau, tau, w * -lo / width));
                        pieces.push((0.0, hi, w * hi / width));
                    } else if closed && hi > tau {
                        pieces.push((lo, tau, w * (tau - lo) / width));
                        pieces.push((0.0, hi - tau, w * (hi - tau) / width));
                    } else {
                        pieces.push((lo, hi, w));
                    }
                }
            }
        }
        Ok(Self {
            atoms,
            pieces,
            total: mu.mass,
        })
    }

    /// F(t) including atoms at t (`left = false`) or excluding them.
    pub fn eval(&self, t: f64, left: bool) -> f64 {
        let mut acc = 0.0;
        for &(a, m) in &self.atoms {
            if a < t || (!left && a == t) {
                acc += m;
            }
        }
        for &(lo, hi, m) in &self.pieces {
            if t >= hi {
                acc += m;
            } else if t > lo {
                acc += m * (t - lo) / (hi - lo);
            }
        }
        acc / self.total
    }

    fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms
            .iter()
            .map(|a| a.0)
            .chain(self.pieces.iter().flat_map(|p| [p.0, p.1]))
    }
}

/// sup_t |F(t) − G(t)|. Both CDFs are piecewise linear between the union of
/// their breakpoints, so the sup is attained at a one-sided limit there.
pub fn ks_distance(f: &Cdf, g: &Cdf) -> f64 {
    let mut pts: Vec<f64> = f.breakpoints().chain(g.breakpoints()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.iter()
        .flat_map(|&t| [true, false].map(|left| (f.eval(t, left) - g.eval(t, left)).abs()))
        .fold(0.0, f64::max)
}

/// KS distance between the empirical measure of Fekete parameters and an
/// equilibrium measure on the same single-component curve.
pub fn compare_to_equilibrium(points: &FeketeResult, eq: &DiscreteMeasure) -> Result<f64> {
    let g = Cdf::of_measure(eq)?;
    let params: Vec<f64> = if eq.curve.components[0].closed {
        points.params.iter().map(|t| t.rem_euclid(2.0 * PI)).collect()
    } else {
        points.params.clone()
    };
    Ok(ks_distance(&Cdf::empirical(&params), &g))
}
