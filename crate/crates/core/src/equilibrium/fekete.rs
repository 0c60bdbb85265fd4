use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{CurveSpec, SampledCurve};
use crate::kernels::{KernelKind, RadialKernel};

/// Restart and iteration budget for [`fekete_points`].
#[derive(Debug, Clone)]
pub struct FeketeConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for FeketeConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            max_iter: 20_000,
        }
    }
}

/// A minimizer of Σ_{i≠j} k(p_i, p_j) over N points on a curve.
#[derive(Debug, Clone, Serialize)]
pub struct FeketeResult {
    /// Curve parameters, ascending.
    pub params: Vec<f64>,
    /// Row-major N × dim coordinates.
    pub points: Vec<f64>,
    pub dim: usize,
    pub discrete_energy: f64,
    /// τ = energy / (N(N−1))
    pub normalized_energy: f64,
    pub restart_energies: Vec<f64>,
    pub best_restart: usize,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub spec: CurveSpec,
}

impl FeketeResult {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

struct Problem {
    spec: CurveSpec,
    kernel: RadialKernel,
    closed: bool,
    lo: f64,
    hi: f64,
    dim: usize,
}

struct Frame {
    p: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Problem {
    fn frame(&self, t: &[f64]) -> Frame {
        let n = t.len();
        let d = self.dim;
        let mut f = Frame {
            p: vec![0.0; n * d],
            d1: vec![0.0; n * d],
            d2: vec![0.0; n * d],
        };
        for (i, &ti) in t.iter().enumerate() {
            self.spec.point_into(ti, &mut f.p[i * d..(i + 1) * d]);
            self.spec.tangent_into(ti, &mut f.d1[i * d..(i + 1) * d]);
            self.spec.curvature_vector_into(ti, &mut f.d2[i * d..(i + 1) * d]);
        }
        f
    }

    fn positions(&self, t: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut p = vec![0.0; t.len() * d];
        for (i, &ti) in t.iter().enumerate() {
            self.spec.point_into(ti, &mut p[i * d..(i + 1) * d]);
        }
        p
    }

    /// Σ_{i≠j} φ(|p_i − p_j|); +∞ on coincidence.
    fn energy_of_points(&self, p: &[f64], n: usize) -> f64 {
        let d = self.dim;
        let mut e = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let r = crate::geometry::dist(&p[i * d..(i + 1) * d], &p[j * d..(j + 1) * d]);
                if r == 0.0 {
                    return f64::INFINITY;
                }
                e += self.kernel.eval(r).0;
            }
        }
        2.0 * e
    }

    fn energy(&self, t: &[f64]) -> f64 {
        self.energy_of_points(&self.positions(t), t.len())
    }

    /// Gradient in the parameters and a positive diagonal curvature scale.
    fn gradient(&self, t: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = t.len();
        let d = self.dim;
        let f = self.frame(t);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        let mut diff = vec![0.0; d];
        for i in 0..n {
            let pi = &f.p[i * d..(i + 1) * d];
            let ti = &f.d1[i * d..(i + 1) * d];
            let ci = &f.d2[i * d..(i + 1) * d];
            let tt: f64 = ti.iter().map(|v| v * v).sum();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let pj = &f.p[j * d..(j + 1) * d];
                for k in 0..d {
                    diff[k] = pi[k] - pj[k];
                }
                let r = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (_, d1, d2) = self.kernel.eval(r);
                let ut: f64 = diff.iter().zip(ti).map(|(a, b)| a * b).sum::<f64>() / r;
                let uc: f64 = diff.iter().zip(ci).map(|(a, b)| a * b).sum::<f64>() / r;
                g[i] += 2.0 * d1 * ut;
                h[i] += 2.0 * (d2 * ut * ut + d1 / r * (tt - ut * ut) + d1 * uc);
            }
        }
        let floor = h.iter().map(|v| v.abs()).fold(0.0, f64::max) * 1e-8 + 1e-300;
        for v in &mut h {
            *v = v.abs().max(floor);
        }
        (g, h)
    }

    fn feasible(&self, t: f64) -> f64 {
        if self.closed {
            t.rem_euclid(2.0 * PI)
        } else {
            t.clamp(self.lo, self.hi)
        }
    }

    /// Jacobi-scaled projected gradient with Armijo backtracking.
    fn descend(&self, mut t: Vec<f64>, max_iter: usize) -> (Vec<f64>, f64, usize, bool) {
        let mut e = self.energy(&t);
        for it in 0..max_iter {
            let (g, h) = self.gradient(&t);
            let dir: Vec<f64> = g.iter().zip(&h).map(|(gi, hi)| -gi / hi).collect();
            let mut s = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = t.iter().zip(&dir).map(|(ti, di)| self.feasible(ti + s * di)).collect();
                // Directional change measured before wrapping.
                let moved: f64 = t
                    .iter()
                    .zip(&dir)
                    .zip(&g)
                    .map(|((ti, di), gi)| {
                        let step = if self.closed {
                            s * di
                        } else {
                            (ti + s * di).clamp(self.lo, self.hi) - ti
                        };
                        gi * step
                    })
                    .sum();
                let et = self.energy(&trial);
                if et <= e + 1e-4 * moved {
                    break Some((trial, et, moved));
                }
                s *= 0.5;
                if s < 1e-20 {
                    break None;
                }
            };
            let Some((trial, et, _)) = accepted else {
                return (t, e, it, true);
            };
            let shift = t
                .iter()
                .zip(&trial)
                .map(|(a, b)| {
                    let d = (a - b).abs();
                    if self.closed {
                        d.min(2.0 * PI - d)
                    } else {
                        d
                    }
                })
                .fold(0.0, f64::max);
            t = trial;
            e = et;
            if shift < 1e-13 {
                return (t, e, it + 1, true);
            }
        }
        (t, e, max_iter, false)
    }
}

/// Best-of-restarts local minimizer of the discrete k-energy over `n`
/// points on a single-component curve. Restart r starts from sorted uniform
/// parameters drawn with seed `seed + r`; restarts run in parallel and the
/// lowest energy wins, ties within 1e−12 going to the lower index.
pub fn fekete_points(
    curve: &SampledCurve,
    n: usize,
    kind: &KernelKind,
    config: &FeketeConfig,
) -> Result<FeketeResult> {
    if n < 2 {
        return Err(invalid(format!("need at least 2 Fekete points, got {n}")));
    }
    if n > curve.len() {
        return Err(invalid(format!(
            "N = {n} exceeds the node budget of {} nodes",
            curve.len()
        )));
    }
    if curve.components.len() != 1 {
        return Err(Error::Unsupported("Fekete points need a single-component curve".into()));
    }
    kind.validate(curve.dim)?;
    let piece = curve.components[0].spec.clone();
    let (spec, kernel) = match kind {
        KernelKind::GraphLog { function } => {
            let (lo, hi) = piece.param_interval();
            (CurveSpec::graph(function.clone(), lo, hi), RadialKernel::Log)
        }
        other => (piece, other.radial().expect("radial kernel")),
    };
    let (lo, hi) = spec.param_interval();
    let problem = Problem {
        closed: spec.is_closed(),
        dim: spec.dim(),
        spec,
        kernel,
        lo,
        hi,
    };
    let restarts = config.restarts.max(1);
    let runs: Vec<(Vec<f64>, f64, usize, bool)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(r as u64));
            let mut t: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
            t.sort_by(f64::total_cmp);
            problem.descend(t, config.max_iter)
        })
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate().skip(1) {
        if run.1 < runs[best].1 - 1e-12 {
            best = r;
        }
    }
    let (mut t, _, iterations, converged) = runs[best].clone();
    t.sort_by(f64::total_cmp);
    let points = problem.positions(&t);
    let energy = problem.energy_of_points(&points, n);
    Ok(FeketeResult {
        dim: problem.dim,
        params: t,
        points,
        discrete_energy: energy,
        normalized_energy: energy / (n * (n - 1)) as f64,
        restart_energies: runs.iter().map(|r| r.1).collect(),
        best_restart: best,
        iterations,
        converged,
        spec: problem.spec,
    })
}

/// τ_k(K, N) over a sequence of N.
#[derive(Debug, Clone, Serialize)]
pub struct TransfiniteReport {
    pub ns: Vec<usize>,
    pub taus: Vec<f64>,
    /// Indices i with τ(N_i) < τ(N_{i−1}); these signal optimizer failure.
    pub violations: Vec<usize>,
}

pub fn transfinite_diameters(
    curve: &SampledCurve,
    kind: &KernelKind,
    ns: &[usize],
    config: &FeketeConfig,
) -> Result<TransfiniteReport> {
    if ns.windows(2).any(|w| w[1] <= w[0]) || ns.iter().any(|&n| n < 2) {
        return Err(invalid("Ns must be strictly increasing and ≥ 2"));
    }
    let taus = ns
        .iter()
        .map(|&n| fekete_points(curve, n, kind, config).map(|f| f.normalized_energy))
        .collect::<Result<Vec<_>>>()?;
    let violations = (1..taus.len()).filter(|&i| taus[i] < taus[i - 1]).collect();
    Ok(TransfiniteReport {
        ns: ns.to_vec(),
        taus,
        violations,
    })
}
