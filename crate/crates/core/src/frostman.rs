//! Ball-growth (Frostman) exponents of discrete measures and the bound
//! μ(B(x, r)) ≲ ‖Δ^{(α−1)/2}μ‖_{L^p} r^{α−1/p}.

use std::fmt::Write as _;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::DiscreteMeasure;
use crate::error::{invalid, Error, Result};
use crate::fraclap::{riesz_constant, riesz_potential};
use crate::geometry::SampledCurve;

/// sup over node centers of μ(B(x, r)), for decreasing r.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallMassProfile {
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
}

impl BallMassProfile {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// CSV with header `r,mass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,mass\n");
        for (r, m) in self.radii.iter().zip(&self.masses) {
            let _ = writeln!(s, "{r:e},{m:e}");
        }
        s
    }
}

/// Which nodes may serve as ball centers.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProfileOptions {
    /// Keep nodes whose position within their component, as a fraction of
    /// the component's node count, lies in [lo, hi]. Endpoint behaviour of
    /// open arcs dominates the sup otherwise.
    pub center_window: Option<(f64, f64)>,
}

/// 12 log-spaced radii from diam/4 down to 4× the median node spacing.
pub fn default_radii(curve: &SampledCurve) -> Result<Vec<f64>> {
    let hi = curve.diameter() / 4.0;
    let lo = 4.0 * curve.median_spacing();
    if !(lo < hi) {
        return Err(invalid(format!(
            "too few nodes for a radius range: 4×spacing {lo} ≥ diam/4 {hi}"
        )));
    }
    let ratio = (lo / hi).ln() / 11.0;
    Ok((0..12).map(|k| hi * (ratio * k as f64).exp()).collect())
}

pub fn ball_mass_profile(mu: &DiscreteMeasure, radii: &[f64]) -> Result<BallMassProfile> {
    ball_mass_profile_with(mu, radii, &ProfileOptions::default())
}

pub fn ball_mass_profile_with(mu: &DiscreteMeasure, radii: &[f64], opts: &ProfileOptions) -> Result<BallMassProfile> {
    let curve = &mu.curve;
    if mu.support_len() == 0 {
        return Err(invalid("empty measure"));
    }
    if radii.is_empty() {
        return Err(invalid("no radii"));
    }
    let diam = curve.diameter();
    if radii.iter().any(|r| !(*r > 0.0 && *r <= diam)) {
        return Err(invalid(format!("radii must lie in (0, {diam}]")));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("radii must be strictly decreasing"));
    }
    let centers: Vec<usize> = match opts.center_window {
        None => (0..curve.len()).collect(),
        Some((lo, hi)) => curve
            .components
            .iter()
            .flat_map(|c| {
                let n = c.nodes.len();
                c.nodes.clone().filter(move |i| {
                    let f = (i - c.nodes.start) as f64 / (n - 1).max(1) as f64;
                    (lo..=hi).contains(&f)
                })
            })
            .collect(),
    };
    if centers.is_empty() {
        return Err(invalid("center window selects no nodes"));
    }
    let masses: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            centers
                .iter()
                .map(|&i| mu.ball_mass(curve.point(i), r))
                .fold(0.0, f64::max)
                .min(mu.mass)
        })
        .collect();
    if masses.iter().any(|m| *m <= 0.0) {
        return Err(invalid("a ball around every admissible center is empty"));
    }
    Ok(BallMassProfile {
        radii: radii.to_vec(),
        masses,
    })
}

/// Least-squares line log mass = exponent·log r + intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    /// RMS deviation of the log masses from the line.
    pub residual: f64,
}

pub fn frostman_exponent(profile: &BallMassProfile, fit_range: Range<usize>) -> Result<ExponentFit> {
    if fit_range.end > profile.len() || fit_range.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need ≥ 4 radii inside the profile, got range {fit_range:?} of {}",
            profile.len()
        )));
    }
    let xs: Vec<f64> = profile.radii[fit_range.clone()].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = profile.masses[fit_range].iter().map(|m| m.ln()).collect();
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < std::f64::consts::LN_10 * (1.0 - 1e-12) {
        return Err(Error::DegenerateFit(format!(
            "radii span {:.3} decades, need ≥ 1",
            span / std::f64::consts::LN_10
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - exponent * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ExponentFit {
        exponent,
        intercept,
        residual,
    })
}

/// Outcome of [`frostman_inequality_check`].
#[derive(Debug, Clone, Serialize)]
pub struct FrostmanReport {
    pub alpha: f64,
    pub p: f64,
    /// ‖Δ^{(α−1)/2}μ‖_{L^p} on the finest evaluation grid.
    pub norm: f64,
    /// The norm at the three grid spacings, coarse to fine.
    pub norms_by_level: Vec<f64>,
    /// The grid norm is not settling under refinement.
    pub divergent: bool,
    /// μ(B(x, r))/(norm·r^{α−1/p}) per radius, finest grid.
    pub ratios: Vec<f64>,
    /// The smallest admissible constant: the max of `ratios`.
    pub constant: f64,
    pub constant_by_level: Vec<f64>,
    /// Relative change of the constant under the last refinement.
    pub refinement_change: f64,
    /// Per-decade maxima of `ratios` do not grow (10% slack) as r decreases.
    pub bounded: bool,
    pub profile: BallMassProfile,
    pub exponent: Option<ExponentFit>,
}

impl FrostmanReport {
    /// CSV with header `alpha,p,C,exponent,residual`.
    pub fn to_csv(&self) -> String {
        let (e, r) = self
            .exponent
            .map(|f| (f.exponent, f.residual))
            .unwrap_or((f64::NAN, f64::NAN));
        format!("alpha,p,C,exponent,residual\n{:e},{:e},{:e},{:e},{:e}\n", self.alpha, self.p, self.constant, e, r)
    }
}

/// Checks μ(B(x, r)) ≤ C·‖Δ^{(α−1)/2}μ‖_{L^p}·r^{α−1/p} and fits C.
///
/// The potential is riesz_potential(μ, 1−α, ·) of μ projected to its first
/// coordinate, evaluated at cell midpoints of [−L, L], L = 2 max|x_j| (at
/// least 1); beyond L it is continued by its far-field form c(1−α)·m·|x|^{−α}.
/// The norm is taken at spacings Δ, Δ/2, Δ/4 with Δ = min(L/128, s/2) and s
/// the median node spacing, so that the finest features of the discrete
/// measure are resolved. It is flagged divergent when it is not finite or
/// when the last increment exceeds both 1e−4 of the norm and 3/4 of the
/// previous increment.
pub fn frostman_inequality_check(mu: &DiscreteMeasure, alpha: f64, p: f64, radii: &[f64]) -> Result<FrostmanReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("α must lie in (0, 1), got {alpha}")));
    }
    if !(p >= 1.0) {
        return Err(invalid(format!("p must lie in [1, ∞], got {p}")));
    }
    let gap = alpha - 1.0 / p;
    if !(gap > 0.0) {
        return Err(invalid(format!("α − 1/p = {gap} must be positive")));
    }
    let profile = ball_mass_profile(mu, radii)?;
    let beta = 1.0 - alpha;
    let reach = (0..mu.curve.len())
        .map(|j| mu.curve.point(j)[0].abs())
        .fold(0.0, f64::max);
    let l = (2.0 * reach).max(1.0);
    let far = riesz_constant(beta) * mu.mass;

    let coarse = (2.0 * l / 128.0).min(0.5 * mu.curve.median_spacing());
    let base = (2.0 * l / coarse).ceil() as usize;
    let norms_by_level: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&refine| {
            let k = base * refine;
            let h = 2.0 * l / k as f64;
            let vals: Vec<f64> = (0..k)
                .into_par_iter()
                .map(|i| riesz_potential(mu, beta, -l + (i as f64 + 0.5) * h).unwrap_or(f64::INFINITY))
                .collect();
            if p.is_infinite() {
                vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
            } else {
                let body: f64 = vals.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h;
                let e = alpha * p - 1.0;
                let tail = 2.0 * far.powf(p) * l.powf(-e) / e;
                (body + tail).powf(1.0 / p)
            }
        })
        .collect();
    let divergent = {
        let [a, b, c] = [norms_by_level[0], norms_by_level[1], norms_by_level[2]];
        let d1 = (b - a).abs();
        let d2 = (c - b).abs();
        !c.is_finite() || (d2 > 1e-4 * c && d2 > 0.75 * d1)
    };
    let ratios_for = |norm: f64| -> Vec<f64> {
        profile
            .radii
            .iter()
            .zip(&profile.masses)
            .map(|(r, m)| m / (norm * r.powf(gap)))
            .collect()
    };
    let constant_by_level: Vec<f64> = norms_by_level
        .iter()
        .map(|&n| ratios_for(n).into_iter().fold(0.0, f64::max))
        .collect();
    let norm = norms_by_level[2];
    let ratios = ratios_for(norm);
    let constant = constant_by_level[2];
    let refinement_change = ((constant_by_level[2] - constant_by_level[1]) / constant_by_level[1]).abs();

    // Radii decrease, so decades are visited from coarse to fine.
    let mut decade_max: Vec<f64> = Vec::new();
    let mut current = None;
    for (r, c) in profile.radii.iter().zip(&ratios) {
        let d = r.log10().floor() as i64;
        if current != Some(d) {
            decade_max.push(*c);
            current = Some(d);
        } else if let Some(last) = decade_max.last_mut() {
            *last = last.max(*c);
        }
    }
    let bounded = !divergent && decade_max.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let exponent = frostman_exponent(&profile, 0..profile.len()).ok();
    Ok(FrostmanReport {
        alpha,
        p,
        norm,
        norms_by_level,
        divergent,
        ratios,
        constant,
        constant_by_level,
        refinement_change,
        bounded,
        profile,
        exponent,
    })
}
