//! Numerical probes of the structural lemmas behind the regularity argument:
//! convexity of the principal kernel, size and continuity of the remainder,
//! the second-difference inequality, and the convex-plus-Hölder bound.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_equilibrium, SolverOptions};
use crate::error::{invalid, Result};
use crate::geometry::{dist, sample_curve, CurveSpec, GraphFunction};
use crate::kernels::{assemble_kernel_matrix, DiagonalPolicy, KernelKind, PrincipalKernel};

/// A product grid of (x, y) pairs with the near-diagonal removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRegion {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Pairs with |x − y| below this are skipped.
    pub min_separation: f64,
}

impl ProbeRegion {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize, min_separation: f64) -> Result<Self> {
        let r = Self {
            x_range,
            y_range,
            nx,
            ny,
            min_separation,
        };
        r.validate()?;
        Ok(r)
    }

    /// [lo, hi]² with n points per side.
    pub fn square(lo: f64, hi: f64, n: usize, min_separation: f64) -> Result<Self> {
        Self::new((lo, hi), (lo, hi), n, n, min_separation)
    }

    pub fn validate(&self) -> Result<()> {
        for (a, b) in [self.x_range, self.y_range] {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(invalid(format!("empty probe range [{a}, {b}]")));
            }
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(invalid("probe grids need at least 2 points per side"));
        }
        if !(self.min_separation > 0.0) {
            return Err(invalid("min_separation must be positive"));
        }
        Ok(())
    }

    /// The same ranges with grid counts 2n − 1 (every old point is kept).
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            ..*self
        }
    }

    fn xs(&self) -> Vec<f64> {
        linspace(self.x_range, self.nx)
    }

    fn ys(&self) -> Vec<f64> {
        linspace(self.y_range, self.ny)
    }
}

fn linspace((a, b): (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    /// min over the grid of both second differences.
    pub min_second_difference: f64,
    /// min of the second difference in x alone.
    pub min_dxx: f64,
    /// min of the second difference in y alone.
    pub min_dyy: f64,
    pub argmin: (f64, f64),
    pub step: f64,
    pub pairs: usize,
}

/// Centered second differences of x ↦ P(x, y) and y ↦ P(x, y) over the
/// region, at step min(1e−3, min_separation/10).
pub fn convexity_probe(a: &GraphFunction, region: &ProbeRegion) -> Result<ConvexityReport> {
    region.validate()?;
    let h = (1e-3f64).min(region.min_separation / 10.0);
    let pk = PrincipalKernel::new(a.clone());
    let ys = region.ys();
    let rows: Vec<(f64, f64, f64, (f64, f64), usize)> = region
        .xs()
        .par_iter()
        .map(|&x| {
            let mut best = (f64::INFINITY, f64::INFINITY, f64::INFINITY, (x, f64::NAN), 0usize);
            for &y in &ys {
                if (x - y).abs() < region.min_separation {
                    continue;
                }
                let p = |u: f64, v: f64| pk.principal(u, v).expect("separated points");
                let c = p(x, y);
                let dxx = (p(x + h, y) - 2.0 * c + p(x - h, y)) / (h * h);
                let dyy = (p(x, y + h) - 2.0 * c + p(x, y - h)) / (h * h);
                best.4 += 1;
                best.1 = best.1.min(dxx);
                best.2 = best.2.min(dyy);
                if dxx.min(dyy) < best.0 {
                    best.0 = dxx.min(dyy);
                    best.3 = (x, y);
                }
            }
            best
        })
        .collect();
    let mut out = ConvexityReport {
        min_second_difference: f64::INFINITY,
        min_dxx: f64::INFINITY,
        min_dyy: f64::INFINITY,
        argmin: (f64::NAN, f64::NAN),
        step: h,
        pairs: 0,
    };
    for (m, dxx, dyy, arg, n) in rows {
        out.pairs += n;
        out.min_dxx = out.min_dxx.min(dxx);
        out.min_dyy = out.min_dyy.min(dyy);
        if m < out.min_second_difference {
            out.min_second_difference = m;
            out.argmin = arg;
        }
    }
    if out.pairs == 0 {
        return Err(invalid("the region has no pairs beyond min_separation"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainderReport {
    #[serde(rename = "C_size")]
    pub c_size: f64,
    #[serde(rename = "C_cont")]
    pub c_cont: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub alpha: f64,
}

/// Offsets θ with x′ = x + θ|x − y|, all admissible (|θ| ≤ ½).
const CONT_OFFSETS: [f64; 8] = [0.5, -0.5, 0.25, -0.25, 0.1, -0.1, 0.01, -0.01];

/// Remainder values below this are roundoff of an identically zero R.
const REMAINDER_FLOOR: f64 = 1e-14;

/// Fits C_size = max |R|/min{δ₁, δ₂|x−y|^α} and C_cont = max
/// |R(x,y) − R(x′,y)|·|x−y|/(|x−x′|·min{δ₁, δ₂|x−y|^α}) over the grid, with
/// δ₁, δ₂, α taken from `a`.
pub fn remainder_bounds_probe(a: &GraphFunction, region: &ProbeRegion) -> Result<RemainderReport> {
    region.validate()?;
    let (d1, d2, alpha) = (a.lip_const, a.holder_const, a.holder_exponent);
    let pk = PrincipalKernel::new(a.clone());
    let ys = region.ys();
    let ratio = |num: f64, den: f64| {
        let num = num.abs();
        if num <= REMAINDER_FLOOR {
            0.0
        } else if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    };
    let rows: Vec<(f64, f64)> = region
        .xs()
        .par_iter()
        .map(|&x| {
            let mut cs = 0.0f64;
            let mut cc = 0.0f64;
            for &y in &ys {
                let d = (x - y).abs();
                if d < region.min_separation {
                    continue;
                }
                let scale = d1.min(d2 * d.powf(alpha));
                let r = pk.remainder(x, y).expect("separated points");
                cs = cs.max(ratio(r, scale));
                for th in CONT_OFFSETS {
                    let xp = x + th * d;
                    let rp = pk.remainder(xp, y).expect("separated points");
                    cc = cc.max(ratio(r - rp, th.abs() * scale));
                }
            }
            (cs, cc)
        })
        .collect();
    let (c_size, c_cont) = rows.iter().fold((0.0f64, 0.0f64), |(a, b), (c, d)| (a.max(*c), b.max(*d)));
    Ok(RemainderReport {
        c_size,
        c_cont,
        delta1: d1,
        delta2: d2,
        alpha,
    })
}

/// The JSON probe report.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub min_second_difference: f64,
    #[serde(rename = "C_size")]
    pub c_size: f64,
    #[serde(rename = "C_cont")]
    pub c_cont: f64,
    pub violations: Vec<String>,
}

/// Both probes on one region; a negative second difference beyond −1e−8 or
/// a non-finite constant is listed as a violation.
pub fn regularity_report(a: &GraphFunction, region: &ProbeRegion) -> Result<RegularityReport> {
    let conv = convexity_probe(a, region)?;
    let rem = remainder_bounds_probe(a, region)?;
    let mut violations = Vec::new();
    if conv.min_second_difference < -1e-8 {
        violations.push(format!(
            "second difference {:e} at (x, y) = ({}, {})",
            conv.min_second_difference, conv.argmin.0, conv.argmin.1
        ));
    }
    if !rem.c_size.is_finite() {
        violations.push("C_size is not finite".into());
    }
    if !rem.c_cont.is_finite() {
        violations.push("C_cont is not finite".into());
    }
    Ok(RegularityReport {
        min_second_difference: conv.min_second_difference,
        c_size: rem.c_size,
        c_cont: rem.c_cont,
        violations,
    })
}

/// Smooth maps with known derivative bounds for the second-difference check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum SmoothMap {
    /// −log|x|, singular at 0.
    NegLog,
    /// x_coord^exponent.
    Power { coord: usize, exponent: u32 },
    /// ⟨gradient, x⟩ + constant.
    Affine { gradient: Vec<f64>, constant: f64 },
}

impl SmoothMap {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SmoothMap::NegLog => -norm(x).ln(),
            SmoothMap::Power { coord, exponent } => x[*coord].powi(*exponent as i32),
            SmoothMap::Affine { gradient, constant } => gradient.iter().zip(x).map(|(g, v)| g * v).sum::<f64>() + constant,
        }
    }

    /// (|∇f(x)|, ‖∇²f(x)‖ operator norm).
    fn derivative_norms(&self, x: &[f64]) -> (f64, f64) {
        match self {
            SmoothMap::NegLog => {
                let r = norm(x);
                (1.0 / r, 1.0 / (r * r))
            }
            SmoothMap::Power { coord, exponent } => {
                let p = *exponent as i32;
                let t = x[*coord];
                let g = if p >= 1 { (p as f64 * t.powi(p - 1)).abs() } else { 0.0 };
                let h = if p >= 2 { (p as f64 * (p - 1) as f64 * t.powi(p - 2)).abs() } else { 0.0 };
                (g, h)
            }
            SmoothMap::Affine { gradient, .. } => (norm(gradient), 0.0),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondDifference {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs, 0 when both vanish.
    pub ratio: f64,
    pub holds: bool,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub eps: f64,
    pub hessian_sup: f64,
    pub gradient_sup: f64,
}

/// Quasi-random samples of the hull.
const HULL_SAMPLES: usize = 1000;
/// Relative slack on the right-hand side for the sampled sups.
const SUP_SLACK: f64 = 1.05;

/// Distance from the origin to the convex hull of `pts`, by minimizing over
/// every face: the nearest point lies in the relative interior of one.
pub fn hull_distance_to_origin(pts: &[&[f64]]) -> f64 {
    let n = pts.len();
    let d = pts[0].len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let base = pts[idx[0]];
        let k = idx.len() - 1;
        if k == 0 {
            best = best.min(norm(base));
            continue;
        }
        // Minimize |base + Σ t_i (p_i − base)| over the affine hull.
        let dirs: Vec<Vec<f64>> = idx[1..]
            .iter()
            .map(|&i| pts[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let g = DMatrix::from_fn(k, k, |r, c| dirs[r].iter().zip(&dirs[c]).map(|(a, b)| a * b).sum::<f64>());
        let rhs = DVector::from_fn(k, |r, _| -dirs[r].iter().zip(base).map(|(a, b)| a * b).sum::<f64>());
        if g.determinant().abs() < 1e-14 * g.norm().powi(k as i32).max(1e-300) {
            continue;
        }
        let Some(t) = g.lu().solve(&rhs) else { continue };
        let t0 = 1.0 - t.sum();
        if t0 < -1e-12 || t.iter().any(|v| *v < -1e-12) {
            continue;
        }
        let mut p = base.to_vec();
        for (ti, dir) in t.iter().zip(&dirs) {
            for j in 0..d {
                p[j] += ti * dir[j];
            }
        }
        best = best.min(norm(&p));
    }
    best
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// |(f(b) − f(a)) − (f(d) − f(c))| ≤ m·M·sup|∇²f| + ε·sup|∇f| with the sups
/// over the convex hull of {a, b, c, d}.
///
/// For −log|·| the sups are exact (1/dist² and 1/dist, dist the distance from
/// 0 to the hull); otherwise they are the maxima over the corners and 10³
/// Halton points of the hull, inflated by 5%.
pub fn second_difference_check(f: &SmoothMap, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Result<SecondDifference> {
    let dim = a.len();
    if [b, c, d].iter().any(|p| p.len() != dim) || dim == 0 {
        return Err(invalid("points must share a positive dimension"));
    }
    if [a, b, c, d].iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(invalid("points must be finite"));
    }
    if let SmoothMap::Power { coord, .. } = f {
        if *coord >= dim {
            return Err(invalid(format!("coordinate {coord} out of range for dimension {dim}")));
        }
    }
    if let SmoothMap::Affine { gradient, .. } = f {
        if gradient.len() != dim {
            return Err(invalid("affine gradient has the wrong dimension"));
        }
    }
    let pts = [a, b, c, d];
    let (gradient_sup, hessian_sup) = match f {
        SmoothMap::NegLog => {
            let r = hull_distance_to_origin(&pts);
            if r < 1e-12 {
                return Err(invalid("0 lies in the convex hull; −log|·| is singular there"));
            }
            (1.0 / r, 1.0 / (r * r))
        }
        _ => {
            let mut g = 0.0f64;
            let mut h = 0.0f64;
            let mut probe = |x: &[f64]| {
                let (gi, hi) = f.derivative_norms(x);
                g = g.max(gi);
                h = h.max(hi);
            };
            for p in pts {
                probe(p);
            }
            let mut x = vec![0.0; dim];
            for i in 1..=HULL_SAMPLES {
                // Sorted Halton coordinates give uniform barycentric weights.
                let mut u = [radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)];
                u.sort_by(f64::total_cmp);
                let w = [u[0], u[1] - u[0], u[2] - u[1], 1.0 - u[2]];
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = (0..4).map(|k| w[k] * pts[k][j]).sum();
                }
                probe(&x);
            }
            (SUP_SLACK * g, SUP_SLACK * h)
        }
    };
    let diff = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(x, y)| x - y).collect() };
    let lhs = ((f.value(b) - f.value(a)) - (f.value(d) - f.value(c))).abs();
    let m = dist(c, a).max(dist(d, b));
    let big_m = dist(b, a).min(dist(d, c));
    let eps = norm(&diff(&diff(b, a), &diff(d, c)));
    let rhs = m * big_m * hessian_sup + eps * gradient_sup;
    // Roundoff in f(b) − f(a) − f(d) + f(c).
    let noise = 8.0 * f64::EPSILON * pts.iter().map(|p| f.value(p).abs()).sum::<f64>();
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(SecondDifference {
        lhs,
        rhs,
        ratio,
        holds: lhs <= rhs + noise,
        m,
        big_m,
        eps,
        hessian_sup,
        gradient_sup,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub tested: usize,
    /// Quadruples whose hull contained (or nearly contained) 0.
    pub skipped: usize,
    pub violations: usize,
    pub max_ratio: f64,
}

/// `count` admissible random quadruples in [−2, 2]² for −log|·|; hulls within
/// 1e−3 of the origin are redrawn.
pub fn second_difference_sweep(count: usize, seed: u64) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut quads = Vec::with_capacity(count);
    let mut skipped = 0;
    while quads.len() < count {
        let q: [[f64; 2]; 4] = std::array::from_fn(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
        let refs: [&[f64]; 4] = [&q[0], &q[1], &q[2], &q[3]];
        if hull_distance_to_origin(&refs) < 1e-3 {
            skipped += 1;
            continue;
        }
        quads.push(q);
    }
    let results = quads
        .par_iter()
        .map(|q| second_difference_check(&SmoothMap::NegLog, &q[0], &q[1], &q[2], &q[3]))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        tested: count,
        skipped,
        violations: results.iter().filter(|r| !r.holds).count(),
        max_ratio: results.iter().map(|r| r.ratio).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderBoundReport {
    pub holds: bool,
    /// max over samples of (U(x) − U(a)) − bound, left form.
    pub max_excess_left: f64,
    /// The mirrored form at b.
    pub max_excess_right: f64,
    /// Sample indices where either form fails by more than the slack.
    pub violations: Vec<usize>,
    /// Hypotheses that fail on the samples; when nonempty the bound is not
    /// evaluated.
    pub precondition_failures: Vec<String>,
}

/// Checks U(x) − U(a) ≤ (x−a)|U(b)−U(a)|/(b−a) + 2C|x−a|^α and
/// U(x) − U(b) ≤ (b−x)|U(b)−U(a)|/(b−a) + 2C|b−x|^α at every sample, where
/// a and b are the first and last samples.
pub fn convex_holder_bound_check(
    xs: &[f64],
    u: &[f64],
    p: &[f64],
    r: &[f64],
    holder_const: f64,
    alpha: f64,
    slack: f64,
) -> Result<HolderBoundReport> {
    let n = xs.len();
    if n < 3 || u.len() != n || p.len() != n || r.len() != n {
        return Err(invalid("need ≥ 3 samples with matching U, P, R"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("samples must be strictly increasing"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) || !(holder_const >= 0.0) {
        return Err(invalid("need α ∈ (0, 1] and C ≥ 0"));
    }
    let mut pre = Vec::new();
    let scale = u.iter().chain(p).map(|v| v.abs()).fold(1.0, f64::max);
    if let Some(i) = (0..n).find(|&i| (u[i] - p[i] - r[i]).abs() > 1e-12 * scale) {
        pre.push(format!("U ≠ P + R at sample {i}"));
    }
    // Convexity on a nonuniform grid: nondecreasing secant slopes.
    for i in 1..n - 1 {
        let s0 = (p[i] - p[i - 1]) / (xs[i] - xs[i - 1]);
        let s1 = (p[i + 1] - p[i]) / (xs[i + 1] - xs[i]);
        if s1 < s0 - 1e-10 * (s0.abs() + s1.abs()).max(1e-300) - 1e-12 {
            pre.push(format!("P is not convex at sample {i}"));
            break;
        }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((r[j] - r[i]).abs() / (xs[j] - xs[i]).powf(alpha));
        }
    }
    if worst > holder_const * (1.0 + 1e-9) + 1e-15 {
        pre.push(format!("R has Hölder quotient {worst:e} > C = {holder_const:e}"));
    }
    if !pre.is_empty() {
        return Ok(HolderBoundReport {
            holds: false,
            max_excess_left: f64::NAN,
            max_excess_right: f64::NAN,
            violations: Vec::new(),
            precondition_failures: pre,
        });
    }
    let (a, b) = (xs[0], xs[n - 1]);
    let secant = (u[n - 1] - u[0]).abs() / (b - a);
    let mut left = f64::NEG_INFINITY;
    let mut right = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for i in 0..n {
        let x = xs[i];
        let el = (u[i] - u[0]) - ((x - a) * secant + 2.0 * holder_const * (x - a).powf(alpha));
        let er = (u[i] - u[n - 1]) - ((b - x) * secant + 2.0 * holder_const * (b - x).powf(alpha));
        left = left.max(el);
        right = right.max(er);
        if el > slack || er > slack {
            violations.push(i);
        }
    }
    Ok(HolderBoundReport {
        holds: violations.is_empty(),
        max_excess_left: left,
        max_excess_right: right,
        violations,
        precondition_failures: pre,
    })
}

/// Samples of U = Pμ + Rμ across a gap of the support of an equilibrium
/// measure.
#[derive(Debug, Clone, Serialize)]
pub struct GapSamples {
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    /// The empirical Lipschitz constant of R on the samples.
    pub holder_const: f64,
}

/// Solve the graph-log equilibrium on the graph of `a` over
/// [−1, −gap] ∪ [gap, 1] with `n` nodes and sample its principal and
/// remainder potentials at `m` points of [−0.8·gap, 0.8·gap].
pub fn equilibrium_gap_samples(a: &GraphFunction, gap: f64, n: usize, m: usize) -> Result<GapSamples> {
    if !(gap > 0.0 && gap < 1.0) || m < 3 {
        return Err(invalid("need 0 < gap < 1 and at least 3 samples"));
    }
    let spec = CurveSpec::union(vec![
        CurveSpec::graph(a.clone(), -1.0, -gap),
        CurveSpec::graph(a.clone(), gap, 1.0),
    ]);
    let curve = Arc::new(sample_curve(&spec, n)?);
    let kind = KernelKind::GraphLog { function: a.clone() };
    let k = assemble_kernel_matrix(&curve, &kind, DiagonalPolicy::CellAverage)?;
    let eq = solve_equilibrium(&k, 1.0, 1e-10, &SolverOptions::default())?;
    let pk = PrincipalKernel::new(a.clone());
    let half = 0.8 * gap;
    let xs = linspace((-half, half), m);
    let rows: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let mut p = 0.0;
            let mut r = 0.0;
            for (j, &w) in eq.weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let y = curve.point(j)[0];
                p += w * pk.principal(x, y).expect("gap points are off the support");
                r += w * pk.remainder(x, y).expect("gap points are off the support");
            }
            (p, r)
        })
        .collect();
    let p: Vec<f64> = rows.iter().map(|t| t.0).collect();
    let r: Vec<f64> = rows.iter().map(|t| t.1).collect();
    let u: Vec<f64> = p.iter().zip(&r).map(|(a, b)| a + b).collect();
    let mut lip = 0.0f64;
    for i in 0..m {
        for j in i + 1..m {
            lip = lip.max((r[j] - r[i]).abs() / (xs[j] - xs[i]));
        }
    }
    Ok(GapSamples {
        xs,
        u,
        p,
        r,
        holder_const: lip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_distance_cases() {
        let sq: [&[f64]; 4] = [&[1.0, 1.0], &[2.0, 1.0], &[1.0, 2.0], &[2.0, 2.0]];
        assert!((hull_distance_to_origin(&sq) - 2f64.sqrt()).abs() < 1e-14);
        let edge: [&[f64]; 4] = [&[1.0, -1.0], &[1.0, 1.0], &[3.0, 0.0], &[2.0, 0.5]];
        assert!((hull_distance_to_origin(&edge) - 1.0).abs() < 1e-14);
        let around: [&[f64]; 4] = [&[-1.0, -1.0], &[1.0, -1.0], &[0.0, 1.0], &[0.5, 0.5]];
        assert!(hull_distance_to_origin(&around) < 1e-12);
    }

    #[test]
    fn halton_is_in_unit_interval() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }
}
