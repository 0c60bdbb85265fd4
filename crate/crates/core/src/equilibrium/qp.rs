use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::kernels::{dot, KernelKind, KernelMatrix};

/// Knobs for [`solve_equilibrium`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Finish with an active-set solve of the KKT system on the support.
    pub polish: bool,
    /// Support mask threshold relative to the largest weight.
    pub support_threshold: f64,
    /// Iterations between residual checks.
    pub check_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            polish: true,
            support_threshold: 1e-10,
            check_every: 10,
        }
    }
}

/// Minimizer of wᵀKw over {w ≥ 0, Σw = mass}.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumResult {
    pub weights: Vec<f64>,
    pub mass: f64,
    /// wᵀKw
    pub energy: f64,
    /// λ: the mean of (Kw)_i over the support.
    pub robin_constant: f64,
    pub kkt_residual: f64,
    pub support_mask: Vec<bool>,
    /// (Kw)_i at every node.
    pub potentials: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Energy after each accelerated iteration; nonincreasing.
    pub energy_trace: Vec<f64>,
    pub polished: bool,
    #[serde(skip)]
    pub kind: KernelKind,
}

/// Euclidean projection onto {w ≥ 0, Σw = mass} by sorting.
pub fn project_simplex(v: &[f64], mass: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - mass) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn support(w: &[f64], rel: f64) -> Vec<bool> {
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    w.iter().map(|x| *x > rel * wmax).collect()
}

/// (λ, residual) for weights `w` with potentials `g = Kw`: λ is the support
/// mean of g, and the residual is the larger of max_S |g_i − λ| and
/// max_{i∉S} (λ − g_i)⁺.
pub fn kkt_residual(g: &[f64], mask: &[bool]) -> (f64, f64) {
    let (sum, count) = g
        .iter()
        .zip(mask)
        .filter(|(_, s)| **s)
        .fold((0.0, 0usize), |(a, c), (x, _)| (a + x, c + 1));
    let lambda = sum / count.max(1) as f64;
    let res = g.iter().zip(mask).fold(0.0f64, |r, (x, s)| {
        if *s {
            r.max((x - lambda).abs())
        } else {
            r.max(lambda - x)
        }
    });
    (lambda, res)
}

fn spectral_norm(k: &KernelMatrix) -> f64 {
    let n = k.n;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let mut kv = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..60 {
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        k.matvec(&v, &mut kv);
        est = dot(&kv, &kv).sqrt();
        if est == 0.0 {
            return 1.0;
        }
        std::mem::swap(&mut v, &mut kv);
    }
    est
}

/// Solve the equilibrium program by accelerated projected gradient with
/// restart, then (optionally) polish by an active-set solve of the KKT
/// system. Non-convergence is reported through `converged`, not an error.
pub fn solve_equilibrium(k: &KernelMatrix, mass: f64, tol: f64, opts: &SolverOptions) -> Result<EquilibriumResult> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(invalid(format!("mass must be positive, got {mass}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let n = k.n;
    if n == 0 {
        return Err(invalid("empty kernel matrix"));
    }
    let mut lip = 1.02 * spectral_norm(k);
    let mut x = vec![mass / n as f64; n];
    let mut kx = vec![0.0; n];
    k.matvec(&x, &mut kx);
    let mut fx = dot(&x, &kx);
    let mut trace = vec![fx];
    let mut y = x.clone();
    let mut ky = kx.clone();
    let mut t = 1.0f64;
    let mut kz = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        // ∇(wᵀKw) = 2Kw and its Lipschitz constant is 2‖K‖.
        let step = 0.5 / lip;
        let grad_step: Vec<f64> = y.iter().zip(&ky).map(|(a, g)| a - step * 2.0 * g).collect();
        let mut z = project_simplex(&grad_step, mass);
        k.matvec(&z, &mut kz);
        let mut fz = dot(&z, &kz);
        if fz > fx {
            // Restart from x with a plain projected-gradient step, which
            // cannot increase the energy when the step is short enough.
            t = 1.0;
            loop {
                let step = 0.5 / lip;
                let gs: Vec<f64> = x.iter().zip(&kx).map(|(a, g)| a - step * 2.0 * g).collect();
                z = project_simplex(&gs, mass);
                k.matvec(&z, &mut kz);
                fz = dot(&z, &kz);
                if fz <= fx {
                    break;
                }
                lip *= 2.0;
                if !lip.is_finite() {
                    z = x.clone();
                    kz = kx.clone();
                    fz = fx;
                    break;
                }
            }
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for i in 0..n {
            y[i] = z[i] + beta * (z[i] - x[i]);
            ky[i] = kz[i] + beta * (kz[i] - kx[i]);
        }
        x = z;
        std::mem::swap(&mut kx, &mut kz);
        debug_assert!(fz <= fx, "energy increased: {fz} > {fx}");
        fx = fz;
        t = t_next;
        trace.push(fx);
        if (it + 1) % opts.check_every == 0 {
            let (_, res) = kkt_residual(&kx, &support(&x, opts.support_threshold));
            if res <= tol {
                converged = true;
                break;
            }
        }
    }

    let mut polished = false;
    if opts.polish {
        if let Some(w) = active_set(k, mass, &support(&x, opts.support_threshold), tol) {
            let mut kw = vec![0.0; n];
            k.matvec(&w, &mut kw);
            let (_, r_new) = kkt_residual(&kw, &support(&w, opts.support_threshold));
            let (_, r_old) = kkt_residual(&kx, &support(&x, opts.support_threshold));
            let fw = dot(&w, &kw);
            if r_new < r_old && fw <= fx + 1e-12 * fx.abs().max(1.0) {
                x = w;
                kx = kw;
                fx = fw;
                polished = true;
            }
        }
    }

    let mask = support(&x, opts.support_threshold);
    let (lambda, res) = kkt_residual(&kx, &mask);
    Ok(EquilibriumResult {
        weights: x,
        mass,
        energy: fx,
        robin_constant: lambda,
        kkt_residual: res,
        support_mask: mask,
        potentials: kx,
        converged: converged || res <= tol,
        iterations,
        energy_trace: trace,
        polished,
        kind: k.kind.clone(),
    })
}

/// Primal active-set iteration on the KKT system
/// [K_SS −𝟙; 𝟙ᵀ 0][w; λ] = [0; m], starting from `start`.
fn active_set(k: &KernelMatrix, mass: f64, start: &[bool], tol: f64) -> Option<Vec<f64>> {
    let n = k.n;
    let mut active: Vec<bool> = start.to_vec();
    if !active.iter().any(|s| *s) {
        active = vec![true; n];
    }
    for _ in 0..60 {
        let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        let m = idx.len();
        let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[(r, c)] = k.get(i, j);
            }
            a[(r, m)] = -1.0;
            a[(m, r)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(m + 1);
        rhs[m] = mass;
        let sol = a.lu().solve(&rhs)?;
        let mut w = vec![0.0; n];
        let mut any_negative = false;
        for (r, &i) in idx.iter().enumerate() {
            w[i] = sol[r];
            if sol[r] < 0.0 {
                any_negative = true;
            }
        }
        if any_negative {
            for &i in &idx {
                if w[i] < 0.0 {
                    active[i] = false;
                }
            }
            if !active.iter().any(|s| *s) {
                return None;
            }
            continue;
        }
        let lambda = sol[m];
        let mut kw = vec![0.0; n];
        k.matvec(&w, &mut kw);
        let mut added = false;
        for i in 0..n {
            if !active[i] && kw[i] < lambda - tol {
                active[i] = true;
                added = true;
            }
        }
        if !added {
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5], 1.0), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0], 1.0), vec![1.0, 0.0]);
        let p = project_simplex(&[0.0, 0.0, 0.0], 3.0);
        assert!(p.iter().all(|x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn residual_definition() {
        let g = [1.0, 1.0, 2.0, 0.5];
        let (l, r) = kkt_residual(&g, &[true, true, false, false]);
        assert_eq!(l, 1.0);
        assert_eq!(r, 0.5);
    }
}
