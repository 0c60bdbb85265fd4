//! Logarithmic, Riesz, graph and truncated kernels, the principal/remainder
//! split of the graph kernel, and dense kernel matrices.

use std::fmt::Write as _;

use dashmap::DashMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, mollified_gradient_unchecked, GraphFunction, SampledCurve};
use crate::quad::{integrate_with_breaks, QuadOptions};

/// Which kernel k(x, y) to use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    /// −log|x−y|
    Log,
    /// |x−y|^{−s}
    Riesz { s: f64 },
    /// −log|Γ(x)−Γ(y)| for scalar parameters x, y (first coordinate).
    GraphLog { function: GraphFunction },
    /// log_{ε,R}(|x−y|)
    #[serde(rename = "trunclog")]
    TruncatedLog { eps: f64, r: f64 },
}

impl KernelKind {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            KernelKind::Riesz { s } if !(*s > 0.0 && *s < dim as f64) => {
                Err(invalid(format!("Riesz exponent must lie in (0, {dim}), got {s}")))
            }
            KernelKind::TruncatedLog { eps, r } => TruncatedLog::new(*eps, *r).map(|_| ()),
            _ => Ok(()),
        }
    }

    fn is_singular(&self) -> bool {
        !matches!(self, KernelKind::TruncatedLog { .. })
    }

    /// The kernel as a function of distance, with its first two derivatives:
    /// (φ(r), φ'(r), φ''(r)). Not defined for `GraphLog`, whose value depends
    /// on the parameters rather than the distance.
    pub fn radial(&self) -> Option<RadialKernel> {
        match self {
            KernelKind::Log => Some(RadialKernel::Log),
            KernelKind::Riesz { s } => Some(RadialKernel::Riesz(*s)),
            KernelKind::TruncatedLog { eps, r } => TruncatedLog::new(*eps, *r).ok().map(RadialKernel::Truncated),
            KernelKind::GraphLog { .. } => None,
        }
    }
}

/// A kernel depending only on distance.
#[derive(Debug, Clone, Copy)]
pub enum RadialKernel {
    Log,
    Riesz(f64),
    Truncated(TruncatedLog),
}

impl RadialKernel {
    /// (φ(r), φ'(r), φ''(r)) for r > 0.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            RadialKernel::Log => (-r.ln(), -1.0 / r, 1.0 / (r * r)),
            RadialKernel::Riesz(s) => {
                let v = r.powf(-s);
                (v, -s * v / r, s * (s + 1.0) * v / (r * r))
            }
            RadialKernel::Truncated(t) => (t.value(r), t.derivative(r), t.derivative2(r)),
        }
    }
}

/// The C⁴ truncation log_{ε,R} of −log|x|: equal to −log|x| + C_R on
/// ε ≤ |x| ≤ R, a quartic polynomial in |x| inside, a degree-7 polynomial in
/// 1/|x| plus a log on [R, 2R], and zero beyond 2R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedLog {
    pub eps: f64,
    pub r: f64,
    a: [f64; 4],
    /// b_i / R^i for i = 1..=7; `h` is evaluated in u = R/|x|.
    c: [f64; 7],
    b0: f64,
    c_r: f64,
    /// 𝔭(ε)
    p_eps: f64,
    /// 𝔥(2R)
    h_2r: f64,
}

impl TruncatedLog {
    pub fn new(eps: f64, r: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0 && r >= 1.0 && r.is_finite()) {
            return Err(invalid(format!(
                "truncation needs 0 < ε ≤ 1 ≤ R, got ε = {eps}, R = {r}"
            )));
        }
        let a = [
            -4.0 / eps,
            3.0 / (eps * eps),
            -4.0 / (3.0 * eps.powi(3)),
            1.0 / (4.0 * eps.powi(4)),
        ];
        // b_i R^{-i}: the powers of R cancel exactly.
        let c = [
            -2240.0,
            5040.0,
            -24640.0 / 3.0,
            8820.0,
            -29568.0 / 5.0,
            2240.0,
            -2560.0 / 7.0,
        ];
        let mut t = TruncatedLog {
            eps,
            r,
            a,
            c,
            b0: -209.0,
            c_r: 0.0,
            p_eps: 0.0,
            h_2r: 0.0,
        };
        t.p_eps = t.p(eps);
        t.h_2r = t.h(2.0 * r);
        t.c_r = r.ln() + t.h(r) - t.h_2r;
        Ok(t)
    }

    /// The normalizing constant C_R.
    pub fn c_r(&self) -> f64 {
        self.c_r
    }

    /// 𝔭(x) = Σ a_i |x|^i.
    fn p(&self, x: f64) -> f64 {
        let ax = x.abs();
        ax * (self.a[0] + ax * (self.a[1] + ax * (self.a[2] + ax * self.a[3])))
    }

    /// 𝔥(x) = b₀ log|x| + Σ b_i |x|^{−i}.
    fn h(&self, x: f64) -> f64 {
        let u = self.r / x.abs();
        let mut poly = 0.0;
        for ci in self.c.iter().rev() {
            poly = (poly + ci) * u;
        }
        self.b0 * x.abs().ln() + poly
    }

    /// log_{ε,R}(x).
    pub fn value(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.eps {
            self.p(x) + (1.0 / self.eps).ln() + self.c_r - self.p_eps
        } else if ax <= self.r {
            -ax.ln() + self.c_r
        } else if ax < 2.0 * self.r {
            self.h(x) - self.h_2r
        } else {
            0.0
        }
    }

    /// k_{ε,R}(x) = ∂_x log_{ε,R}(x), an odd function. At x = 0 the two
    /// one-sided limits differ; 0 (the odd extension) is returned.
    pub fn derivative(&self, x: f64) -> f64 {
        let s = x.signum();
        let ax = x.abs();
        if x == 0.0 {
            0.0
        } else if ax <= self.eps {
            let [a1, a2, a3, a4] = self.a;
            s * (a1 + ax * (2.0 * a2 + ax * (3.0 * a3 + ax * 4.0 * a4)))
        } else if ax <= self.r {
            -1.0 / x
        } else if ax < 2.0 * self.r {
            let u = self.r / ax;
            let mut poly = 0.0;
            for (i, ci) in self.c.iter().enumerate().rev() {
                poly = (poly + (i + 1) as f64 * ci) * u;
            }
            s * (self.b0 - poly) / ax
        } else {
            0.0
        }
    }

    /// ∂_x k_{ε,R}(x), even; defined for x ≠ 0.
    pub fn derivative2(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.eps {
            let [_, a2, a3, a4] = self.a;
            2.0 * a2 + ax * (6.0 * a3 + ax * 12.0 * a4)
        } else if ax <= self.r {
            1.0 / (x * x)
        } else if ax < 2.0 * self.r {
            let u = self.r / ax;
            let mut poly = 0.0;
            for (i, ci) in self.c.iter().enumerate().rev() {
                let k = (i + 1) as f64;
                poly = (poly + k * (k + 1.0) * ci) * u;
            }
            (-self.b0 + poly) / (ax * ax)
        } else {
            0.0
        }
    }

    /// ∂²_x k_{ε,R}(x), odd; defined for x ≠ 0.
    pub fn derivative3(&self, x: f64) -> f64 {
        let s = x.signum();
        let ax = x.abs();
        if x == 0.0 {
            0.0
        } else if ax <= self.eps {
            let [_, _, a3, a4] = self.a;
            s * (6.0 * a3 + 24.0 * a4 * ax)
        } else if ax <= self.r {
            -2.0 / (x * x * x)
        } else if ax < 2.0 * self.r {
            let u = self.r / ax;
            let mut poly = 0.0;
            for (i, ci) in self.c.iter().enumerate().rev() {
                let k = (i + 1) as f64;
                poly = (poly + k * (k + 1.0) * (k + 2.0) * ci) * u;
            }
            s * (2.0 * self.b0 - poly) / (ax * ax * ax)
        } else {
            0.0
        }
    }

    /// Breakpoints of the piecewise definition on [0, ∞).
    pub fn junctions(&self) -> [f64; 3] {
        [self.eps, self.r, 2.0 * self.r]
    }
}

/// log_{ε,R}(x) with parameter validation.
pub fn truncated_log(eps: f64, r: f64, x: f64) -> Result<f64> {
    Ok(TruncatedLog::new(eps, r)?.value(x))
}

/// k_{ε,R}(x) = ∂_x log_{ε,R}(x).
pub fn truncated_log_derivative(eps: f64, r: f64, x: f64) -> Result<f64> {
    let t = TruncatedLog::new(eps, r)?;
    if x == 0.0 {
        return Err(Error::Singularity("k_{ε,R} is undefined at 0".into()));
    }
    Ok(t.derivative(x))
}

/// Evaluate k(x, y). For `GraphLog`, only the first coordinate of each
/// argument is used, as the graph parameter.
pub fn kernel_value(kind: &KernelKind, x: &[f64], y: &[f64]) -> Result<f64> {
    match kind {
        KernelKind::GraphLog { function } => graph_log(function, x[0], y[0]),
        _ => {
            let r = dist(x, y);
            if r == 0.0 && kind.is_singular() {
                return Err(Error::Singularity("coincident points".into()));
            }
            match kind {
                KernelKind::Log => Ok(-r.ln()),
                KernelKind::Riesz { s } => Ok(r.powf(-s)),
                KernelKind::TruncatedLog { eps, r: big_r } => truncated_log(*eps, *big_r, r),
                KernelKind::GraphLog { .. } => unreachable!(),
            }
        }
    }
}

fn graph_log(a: &GraphFunction, x: f64, y: f64) -> Result<f64> {
    let dx = x - y;
    if dx == 0.0 {
        return Err(Error::Singularity("coincident graph parameters".into()));
    }
    let q2: f64 = a
        .components()
        .iter()
        .map(|p| ((p.value(x) - p.value(y)) / dx).powi(2))
        .sum();
    Ok(-dx.abs().ln() - 0.5 * q2.ln_1p())
}

/// Principal kernel P(x, y) = −½ log(1 + |∇A_{|x−y|}(x)|²) − log|x−y|.
pub fn principal_kernel(a: &GraphFunction, x: f64, y: f64) -> Result<f64> {
    PrincipalKernel::new(a.clone()).principal(x, y)
}

/// Remainder R(x, y) = U(x, y) − P(x, y).
pub fn remainder_kernel(a: &GraphFunction, x: f64, y: f64) -> Result<f64> {
    PrincipalKernel::new(a.clone()).remainder(x, y)
}

/// The principal/remainder split with a memo of mollified gradients keyed by
/// the exact (x, r) pair. Safe for concurrent use; writes are idempotent.
#[derive(Debug)]
pub struct PrincipalKernel {
    a: GraphFunction,
    cache: DashMap<(u64, u64), Vec<f64>>,
}

impl PrincipalKernel {
    pub fn new(a: GraphFunction) -> Self {
        Self {
            a,
            cache: DashMap::new(),
        }
    }

    pub fn function(&self) -> &GraphFunction {
        &self.a
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    fn mollified(&self, x: f64, r: f64) -> Vec<f64> {
        let key = (x.to_bits(), r.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let v = mollified_gradient_unchecked(&self.a, x, r);
        self.cache.insert(key, v.clone());
        v
    }

    pub fn principal(&self, x: f64, y: f64) -> Result<f64> {
        let dx = (x - y).abs();
        if dx == 0.0 {
            return Err(Error::Singularity("coincident points in principal kernel".into()));
        }
        let m2: f64 = self.mollified(x, dx).iter().map(|v| v * v).sum();
        Ok(-0.5 * m2.ln_1p() - dx.ln())
    }

    /// The remainder via log1p of (|q|² − |m|²)/(1 + |m|²), q the difference
    /// quotient of A; algebraically U − P without the cancellation.
    pub fn remainder(&self, x: f64, y: f64) -> Result<f64> {
        let dx = x - y;
        if dx == 0.0 {
            return Err(Error::Singularity("coincident points in remainder kernel".into()));
        }
        let m = self.mollified(x, dx.abs());
        let mut num = 0.0;
        let mut m2 = 0.0;
        for (p, mk) in self.a.components().iter().zip(&m) {
            let q = (p.value(x) - p.value(y)) / dx;
            num += (q - mk) * (q + mk);
            m2 += mk * mk;
        }
        Ok(-0.5 * (num / (1.0 + m2)).ln_1p())
    }

    /// U(x, y) for the graph of A.
    pub fn full(&self, x: f64, y: f64) -> Result<f64> {
        graph_log(&self.a, x, y)
    }
}

/// How the singular diagonal of a kernel matrix is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DiagonalPolicy {
    /// The kernel averaged over the node's own cell.
    #[default]
    CellAverage,
    /// Zero diagonal.
    Exclude,
}

/// Dense symmetric kernel matrix on the nodes of a sampled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub n: usize,
    /// Row-major n × n entries.
    pub entries: Vec<f64>,
    pub diagonal_policy: DiagonalPolicy,
    pub kind: KernelKind,
}

impl KernelMatrix {
    /// Build from explicit entries; the caller guarantees symmetry.
    pub fn from_entries(n: usize, entries: Vec<f64>, kind: KernelKind, policy: DiagonalPolicy) -> Result<Self> {
        if entries.len() != n * n {
            return Err(invalid(format!("expected {} entries, got {}", n * n, entries.len())));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            n,
            entries,
            diagonal_policy: policy,
            kind,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// y = K w, parallel over rows with a sequential sum inside each row.
    pub fn matvec(&self, w: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = self.row(i).iter().zip(w).map(|(k, x)| k * x).sum();
        });
    }

    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let mut kw = vec![0.0; self.n];
        self.matvec(w, &mut kw);
        dot(w, &kw)
    }

    /// max |K_ij|
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// K + c·𝟙𝟙ᵀ
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|v| *v += c);
        out
    }

    /// Row-major CSV with header `i,j,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,value\n");
        for i in 0..self.n {
            for j in 0..self.n {
                let _ = writeln!(s, "{i},{j},{:e}", self.get(i, j));
            }
        }
        s
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Self-energy of a straight cell of width `h`: (1/h²)∬_{[0,h]²} k(|s−t|).
pub fn cell_self_energy(kind: &KernelKind, h: f64) -> Result<f64> {
    match kind {
        KernelKind::Log | KernelKind::GraphLog { .. } => Ok(1.5 - h.ln()),
        KernelKind::Riesz { s } => {
            if *s >= 1.0 {
                return Err(invalid(format!(
                    "cell-averaged self-energy diverges for Riesz s = {s} ≥ 1; use the Exclude policy"
                )));
            }
            Ok(2.0 * h.powf(-s) / ((1.0 - s) * (2.0 - s)))
        }
        KernelKind::TruncatedLog { eps, r } => {
            // (2/h²)∫_0^h (h − u) k(u) du
            let t = TruncatedLog::new(*eps, *r)?;
            let mut breaks = vec![0.0];
            breaks.extend(t.junctions().into_iter().filter(|j| *j < h));
            breaks.push(h);
            let v = integrate_with_breaks(|u| (h - u) * t.value(u), &breaks, QuadOptions::abs(1e-13)).value;
            Ok(2.0 * v / (h * h))
        }
    }
}

/// Assemble K_ij = k(p_i, p_j) with the diagonal set by `policy`.
pub fn assemble_kernel_matrix(
    curve: &SampledCurve,
    kind: &KernelKind,
    policy: DiagonalPolicy,
) -> Result<KernelMatrix> {
    let n = curve.len();
    if n < 2 {
        return Err(invalid("kernel matrix needs at least 2 nodes"));
    }
    kind.validate(curve.dim)?;
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pi = curve.point(i);
            (i + 1..n)
                .map(|j| {
                    let pj = curve.point(j);
                    if pi == pj {
                        return Err(Error::DuplicateNodes { i, j });
                    }
                    kernel_value(kind, pi, pj)
                })
                .collect()
        })
        .collect();
    let mut entries = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row?.into_iter().enumerate() {
            let j = i + 1 + off;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    if policy == DiagonalPolicy::CellAverage {
        for i in 0..n {
            entries[i * n + i] = cell_self_energy(kind, curve.weights[i])?;
        }
    }
    Ok(KernelMatrix {
        n,
        entries,
        diagonal_policy: policy,
        kind: kind.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_curve, CurveSpec};

    #[test]
    fn kernel_value_examples() {
        let o = [0.0, 0.0];
        assert_eq!(kernel_value(&KernelKind::Log, &o, &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(kernel_value(&KernelKind::Riesz { s: 0.5 }, &o, &[4.0, 0.0]).unwrap(), 0.5);
        let flat = KernelKind::GraphLog {
            function: GraphFunction::flat(2),
        };
        let e = std::f64::consts::E;
        assert!((kernel_value(&flat, &[0.0], &[e]).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            kernel_value(&KernelKind::Log, &o, &o),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn truncated_log_range_checks() {
        assert!(TruncatedLog::new(0.0, 2.0).is_err());
        assert!(TruncatedLog::new(1.5, 2.0).is_err());
        assert!(TruncatedLog::new(0.5, 0.9).is_err());
        assert!(truncated_log_derivative(0.5, 2.0, 0.0).is_err());
    }

    #[test]
    fn truncated_log_middle_and_support() {
        let t = TruncatedLog::new(0.5, 2.0).unwrap();
        assert_eq!(t.value(1.0), t.c_r());
        assert_eq!(t.derivative(1.0), -1.0);
        for x in [4.0, 4.5, 100.0, -4.0] {
            assert_eq!(t.value(x), 0.0);
        }
        for x in [0.01, 0.3, 0.5, 1.7, 2.5, 3.9, 10.0] {
            assert_eq!(t.derivative(-x), -t.derivative(x));
        }
    }

    #[test]
    fn principal_examples() {
        let flat = GraphFunction::flat(2);
        let pk = PrincipalKernel::new(flat);
        assert!((pk.principal(0.2, 1.7).unwrap() + 1.5f64.ln()).abs() < 1e-15);
        let lin = GraphFunction::linear(0.3);
        let want = -0.5 * (1.0 + 0.09f64).ln() - 0.4f64.ln();
        assert!((principal_kernel(&lin, 0.1, 0.5).unwrap() - want).abs() < 1e-14);
        assert!(remainder_kernel(&lin, 0.1, 0.5).unwrap().abs() < 1e-14);
    }

    #[test]
    fn self_energy_oracle() {
        let k = cell_self_energy(&KernelKind::Log, 0.01).unwrap();
        assert!((k - 6.105_170_185_988_091).abs() < 1e-12);
        let t = cell_self_energy(&KernelKind::TruncatedLog { eps: 1.0, r: 1.0 }, 0.01).unwrap();
        let tl = TruncatedLog::new(1.0, 1.0).unwrap();
        // On [0, h] ⊂ [0, ε] the kernel is smooth; the average lies between
        // its extreme values there.
        assert!(t <= tl.value(0.0) && t >= tl.value(0.01));
    }

    #[test]
    fn assembly_is_symmetric_with_cell_diagonal() {
        let c = sample_curve(&CurveSpec::segment(-1.0, 1.0), 50).unwrap();
        for kind in [
            KernelKind::Log,
            KernelKind::Riesz { s: 0.5 },
            KernelKind::TruncatedLog { eps: 0.1, r: 1.0 },
            KernelKind::GraphLog {
                function: GraphFunction::flat(2),
            },
        ] {
            let k = assemble_kernel_matrix(&c, &kind, DiagonalPolicy::CellAverage).unwrap();
            for i in 0..50 {
                for j in 0..50 {
                    assert_eq!(k.get(i, j), k.get(j, i));
                    if i != j {
                        assert_eq!(k.get(i, j), kernel_value(&kind, c.point(i), c.point(j)).unwrap());
                    }
                }
            }
        }
        let riesz = assemble_kernel_matrix(&c, &KernelKind::Riesz { s: 1.2 }, DiagonalPolicy::CellAverage);
        assert!(riesz.is_err());
        let ex = assemble_kernel_matrix(&c, &KernelKind::Riesz { s: 1.2 }, DiagonalPolicy::Exclude).unwrap();
        assert_eq!(ex.get(3, 3), 0.0);
    }

    #[test]
    fn csv_dump_header() {
        let c = sample_curve(&CurveSpec::segment(-1.0, 1.0), 2).unwrap();
        let k = assemble_kernel_matrix(&c, &KernelKind::Log, DiagonalPolicy::Exclude).unwrap();
        let csv = k.to_csv();
        assert!(csv.starts_with("i,j,value\n0,0,"));
        assert_eq!(csv.lines().count(), 5);
    }
}
