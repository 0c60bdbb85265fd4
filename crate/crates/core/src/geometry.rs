//! Graph functions, curve specifications and their discretization into
//! arc-length quadrature nodes.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{gauss_legendre, gauss_legendre_on, integrate_with_breaks, QuadOptions};

/// One scalar component of a graph function A: ℝ → ℝ^{d−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// slope·x
    Linear { slope: f64 },
    /// amplitude·sin(frequency·x + phase)
    Sine {
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// coef·x²/2
    Quadratic { coef: f64 },
    /// scale·|x|
    Abs {
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Linear { slope } => slope * x,
            Profile::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * x + phase).sin(),
            Profile::Quadratic { coef } => 0.5 * coef * x * x,
            Profile::Abs { scale } => scale * x.abs(),
        }
    }

    /// Derivative; for `Abs` the value at the kink is 0 (the odd extension).
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Linear { slope } => slope,
            Profile::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * frequency * (frequency * x + phase).cos(),
            Profile::Quadratic { coef } => coef * x,
            Profile::Abs { scale } => {
                if x == 0.0 {
                    0.0
                } else {
                    scale * x.signum()
                }
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero | Profile::Linear { .. } | Profile::Abs { .. } => 0.0,
            Profile::Sine {
                amplitude,
                frequency,
                phase,
            } => -amplitude * frequency * frequency * (frequency * x + phase).sin(),
            Profile::Quadratic { coef } => coef,
        }
    }

    /// Points where the derivative is discontinuous.
    pub fn kinks(&self) -> &'static [f64] {
        match self {
            Profile::Abs { .. } => &[0.0],
            _ => &[],
        }
    }

    /// (δ₁, α, δ₂) when known in closed form on all of ℝ.
    fn analytic_constants(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Profile::Zero => Some((0.0, 1.0, 0.0)),
            Profile::Linear { slope } => Some((slope.abs(), 1.0, 0.0)),
            Profile::Sine {
                amplitude,
                frequency,
                ..
            } => {
                let af = (amplitude * frequency).abs();
                Some((af, 1.0, af * frequency.abs()))
            }
            Profile::Quadratic { .. } | Profile::Abs { .. } => None,
        }
    }
}

/// Window on which constants are estimated for profiles without closed-form
/// constants.
pub const ESTIMATION_WINDOW: (f64, f64) = (-4.0, 4.0);
const ESTIMATION_PAIRS: usize = 10_000;

/// A C^{1,α} map A: ℝ → ℝ^{d−1} given componentwise, with its Lipschitz
/// constant δ₁ and the Hölder data (α, δ₂) of its gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFunctionRepr", into = "GraphFunctionRepr")]
pub struct GraphFunction {
    components: Vec<Profile>,
    pub lip_const: f64,
    pub holder_exponent: f64,
    pub holder_const: f64,
    /// True when the constants are sampled lower bounds rather than exact.
    pub constants_estimated: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GraphFunctionRepr {
    One(Profile),
    Many(Vec<Profile>),
}

impl TryFrom<GraphFunctionRepr> for GraphFunction {
    type Error = Error;
    fn try_from(r: GraphFunctionRepr) -> Result<Self> {
        match r {
            GraphFunctionRepr::One(p) => GraphFunction::new(vec![p]),
            GraphFunctionRepr::Many(ps) => GraphFunction::new(ps),
        }
    }
}

impl From<GraphFunction> for GraphFunctionRepr {
    fn from(g: GraphFunction) -> Self {
        if g.components.len() == 1 {
            GraphFunctionRepr::One(g.components[0])
        } else {
            GraphFunctionRepr::Many(g.components)
        }
    }
}

impl GraphFunction {
    pub fn new(components: Vec<Profile>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("graph function needs at least one component"));
        }
        let analytic: Option<Vec<_>> = components.iter().map(|p| p.analytic_constants()).collect();
        let mut g = GraphFunction {
            components,
            lip_const: 0.0,
            holder_exponent: 1.0,
            holder_const: 0.0,
            constants_estimated: false,
        };
        match analytic {
            Some(cs) => {
                g.lip_const = cs.iter().map(|c| c.0 * c.0).sum::<f64>().sqrt();
                g.holder_exponent = cs.iter().map(|c| c.1).fold(1.0, f64::min);
                g.holder_const = cs.iter().map(|c| c.2 * c.2).sum::<f64>().sqrt();
            }
            None => {
                let (d1, d2) = g.estimate_constants(1.0, ESTIMATION_WINDOW, 0);
                g.lip_const = d1;
                g.holder_const = d2;
                g.constants_estimated = true;
            }
        }
        Ok(g)
    }

    pub fn single(p: Profile) -> Self {
        Self::new(vec![p]).expect("one component")
    }

    /// A ≡ 0 in ℝ^d.
    pub fn flat(dim: usize) -> Self {
        Self::new(vec![Profile::Zero; dim.max(2) - 1]).expect("nonempty")
    }

    pub fn linear(slope: f64) -> Self {
        Self::single(Profile::Linear { slope })
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Self::single(Profile::Sine {
            amplitude,
            frequency,
            phase: 0.0,
        })
    }

    pub fn quadratic(coef: f64) -> Self {
        Self::single(Profile::Quadratic { coef })
    }

    pub fn abs(scale: f64) -> Self {
        Self::single(Profile::Abs { scale })
    }

    pub fn components(&self) -> &[Profile] {
        &self.components
    }

    pub fn ambient_dim(&self) -> usize {
        self.components.len() + 1
    }

    pub fn evaluate(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|p| p.value(x)).collect()
    }

    pub fn gradient(&self, x: f64) -> Vec<f64> {
        self.components.iter().map(|p| p.derivative(x)).collect()
    }

    pub fn is_flat(&self) -> bool {
        self.components.iter().all(|p| matches!(p, Profile::Zero))
    }

    /// Sampled lower bounds (δ₁, δ₂) over `pairs` random pairs in `window`.
    pub fn estimate_constants(&self, alpha: f64, window: (f64, f64), seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut d1, mut d2) = (0.0f64, 0.0f64);
        for _ in 0..ESTIMATION_PAIRS {
            let x = rng.gen_range(window.0..window.1);
            let y = rng.gen_range(window.0..window.1);
            let dx = (x - y).abs();
            if dx < 1e-9 {
                continue;
            }
            let (mut dv, mut dg) = (0.0, 0.0);
            for p in &self.components {
                dv += (p.value(x) - p.value(y)).powi(2);
                dg += (p.derivative(x) - p.derivative(y)).powi(2);
            }
            d1 = d1.max(dv.sqrt() / dx);
            d2 = d2.max(dg.sqrt() / dx.powf(alpha));
        }
        (d1, d2)
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.components.iter().flat_map(|p| p.kinks().iter().copied()).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }
}

/// The graph map Γ(x) = (x, A(x)).
pub fn graph_map(a: &GraphFunction, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(a.ambient_dim());
    p.push(x);
    p.extend(a.components.iter().map(|c| c.value(x)));
    p
}

/// The fixed mollifier ψ(x) = (35/32)(1−x²)³ on [−1, 1].
pub fn mollifier(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - x * x;
        35.0 / 32.0 * s * s * s
    }
}

/// (∇A ∗ ψ_r)(x), componentwise, by composite Gauss–Legendre quadrature on
/// [x−r, x+r] split at the kinks of A.
pub fn mollified_gradient(a: &GraphFunction, x: f64, r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("mollification radius must be positive, got {r}")));
    }
    Ok(mollified_gradient_unchecked(a, x, r))
}

pub(crate) fn mollified_gradient_unchecked(a: &GraphFunction, x: f64, r: f64) -> Vec<f64> {
    // Substituting z = x − r·u gives ∫_{−1}^{1} ∇A(x − r·u) ψ(u) du. Between
    // kinks the integrand is smooth, and a fixed composite Gauss rule keeps
    // the result a smooth function of (x, r), which second differences need.
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let rule = RULE.get_or_init(|| gauss_legendre(20));
    let mut breaks = vec![-1.0];
    for k in a.kinks() {
        let u = (x - k) / r;
        if u > -1.0 && u < 1.0 {
            breaks.push(u);
        }
    }
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    a.components
        .iter()
        .map(|p| match p {
            Profile::Zero => 0.0,
            Profile::Linear { slope } => *slope,
            _ => {
                let freq = match p {
                    Profile::Sine { frequency, .. } => frequency.abs(),
                    _ => 0.0,
                };
                let mut total = 0.0;
                for w in breaks.windows(2) {
                    // At most one radian of phase per panel.
                    let panels = 1 + (r * freq * (w[1] - w[0])).ceil() as usize;
                    let step = (w[1] - w[0]) / panels as f64;
                    for k in 0..panels {
                        let lo = w[0] + k as f64 * step;
                        total += gauss_legendre_on(|u| p.derivative(x - r * u) * mollifier(u), lo, lo + step, rule);
                    }
                }
                total
            }
        })
        .collect()
}

/// A compact curve or finite union of curves in ℝ^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    /// The segment [a, b] on the first coordinate axis of ℝ^dim.
    Segment {
        a: f64,
        b: f64,
        #[serde(default = "two")]
        dim: usize,
    },
    /// A circle in the plane of the first two coordinates.
    Circle { center: Vec<f64>, radius: f64 },
    /// The graph {(x, A(x)) : x ∈ interval}.
    Graph {
        function: GraphFunction,
        interval: [f64; 2],
    },
    Union {
        members: Vec<CurveSpec>,
        #[serde(default)]
        clearance: f64,
    },
}

fn two() -> usize {
    2
}

impl CurveSpec {
    pub fn segment(a: f64, b: f64) -> Self {
        CurveSpec::Segment { a, b, dim: 2 }
    }

    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        CurveSpec::Circle {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn graph(function: GraphFunction, lo: f64, hi: f64) -> Self {
        CurveSpec::Graph {
            function,
            interval: [lo, hi],
        }
    }

    pub fn union(members: Vec<CurveSpec>) -> Self {
        CurveSpec::Union {
            members,
            clearance: 0.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CurveSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        match self {
            CurveSpec::Segment { dim, .. } => *dim,
            CurveSpec::Circle { center, .. } => center.len(),
            CurveSpec::Graph { function, .. } => function.ambient_dim(),
            CurveSpec::Union { members, .. } => members.first().map_or(2, |m| m.dim()),
        }
    }

    /// Non-union pieces, with nested unions flattened.
    pub fn pieces(&self) -> Vec<&CurveSpec> {
        match self {
            CurveSpec::Union { members, .. } => members.iter().flat_map(|m| m.pieces()).collect(),
            other => vec![other],
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, CurveSpec::Circle { .. })
    }

    /// Parameter interval of a single piece.
    pub fn param_interval(&self) -> (f64, f64) {
        match self {
            CurveSpec::Segment { a, b, .. } => (*a, *b),
            CurveSpec::Circle { .. } => (0.0, 2.0 * PI),
            CurveSpec::Graph { interval, .. } => (interval[0], interval[1]),
            CurveSpec::Union { .. } => (f64::NAN, f64::NAN),
        }
    }

    /// Arc length; numerical for graphs.
    pub fn length(&self) -> f64 {
        match self {
            CurveSpec::Segment { a, b, .. } => b - a,
            CurveSpec::Circle { radius, .. } => 2.0 * PI * radius,
            CurveSpec::Graph { function, interval } => {
                let mut breaks = vec![interval[0]];
                breaks.extend(function.kinks().into_iter().filter(|k| *k > interval[0] && *k < interval[1]));
                breaks.push(interval[1]);
                integrate_with_breaks(
                    |t| speed_graph(function, t),
                    &breaks,
                    QuadOptions {
                        abs_tol: 1e-13,
                        rel_tol: 1e-14,
                        max_intervals: 4000,
                    },
                )
                .value
            }
            CurveSpec::Union { members, .. } => members.iter().map(|m| m.length()).sum(),
        }
    }

    /// Γ(t) for a single piece.
    pub fn point(&self, t: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.point_into(t, &mut p);
        p
    }

    pub fn point_into(&self, t: f64, out: &mut [f64]) {
        match self {
            CurveSpec::Segment { .. } => {
                out.fill(0.0);
                out[0] = t;
            }
            CurveSpec::Circle { center, radius } => {
                out.copy_from_slice(center);
                out[0] += radius * t.cos();
                out[1] += radius * t.sin();
            }
            CurveSpec::Graph { function, .. } => {
                out[0] = t;
                for (o, p) in out[1..].iter_mut().zip(&function.components) {
                    *o = p.value(t);
                }
            }
            CurveSpec::Union { .. } => panic!("point() on a union; use a piece"),
        }
    }

    /// Γ'(t) for a single piece.
    pub fn tangent_into(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        match self {
            CurveSpec::Segment { .. } => out[0] = 1.0,
            CurveSpec::Circle { radius, .. } => {
                out[0] = -radius * t.sin();
                out[1] = radius * t.cos();
            }
            CurveSpec::Graph { function, .. } => {
                out[0] = 1.0;
                for (o, p) in out[1..].iter_mut().zip(&function.components) {
                    *o = p.derivative(t);
                }
            }
            CurveSpec::Union { .. } => panic!("tangent_into() on a union; use a piece"),
        }
    }

    /// Γ''(t) for a single piece.
    pub fn curvature_vector_into(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        match self {
            CurveSpec::Segment { .. } => {}
            CurveSpec::Circle { radius, .. } => {
                out[0] = -radius * t.cos();
                out[1] = -radius * t.sin();
            }
            CurveSpec::Graph { function, .. } => {
                for (o, p) in out[1..].iter_mut().zip(&function.components) {
                    *o = p.second_derivative(t);
                }
            }
            CurveSpec::Union { .. } => panic!("curvature_vector_into() on a union; use a piece"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CurveSpec::Segment { a, b, dim } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::CurveSpec(format!("segment needs a < b, got a = {a}, b = {b}")));
                }
                if *dim < 2 {
                    return Err(Error::CurveSpec(format!("ambient dimension must be ≥ 2, got {dim}")));
                }
            }
            CurveSpec::Circle { center, radius } => {
                if center.len() < 2 || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::CurveSpec("circle center needs ≥ 2 finite coordinates".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::CurveSpec(format!("circle radius must be positive, got {radius}")));
                }
            }
            CurveSpec::Graph { interval, .. } => {
                if !(interval[0].is_finite() && interval[1].is_finite() && interval[0] < interval[1]) {
                    return Err(Error::CurveSpec(format!(
                        "graph interval must be nonempty, got [{}, {}]",
                        interval[0], interval[1]
                    )));
                }
            }
            CurveSpec::Union { members, clearance } => {
                if members.is_empty() {
                    return Err(Error::CurveSpec("empty union".into()));
                }
                if !(clearance.is_finite() && *clearance >= 0.0) {
                    return Err(Error::CurveSpec(format!("clearance must be ≥ 0, got {clearance}")));
                }
                for m in members {
                    m.validate()?;
                }
                let dim = members[0].dim();
                if members.iter().any(|m| m.dim() != dim) {
                    return Err(Error::CurveSpec("union members live in different dimensions".into()));
                }
                let pieces = self.pieces();
                for i in 0..pieces.len() {
                    for j in i + 1..pieces.len() {
                        let d = coarse_distance(pieces[i], pieces[j]);
                        if d <= *clearance || d == 0.0 {
                            return Err(Error::CurveSpec(format!(
                                "union members {i} and {j} are {d:.3e} apart, clearance is {clearance}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn speed_graph(a: &GraphFunction, t: f64) -> f64 {
    let g2: f64 = a.components.iter().map(|p| p.derivative(t).powi(2)).sum();
    (1.0 + g2).sqrt()
}

/// Minimum distance between 512-point samples of two pieces.
fn coarse_distance(p: &CurveSpec, q: &CurveSpec) -> f64 {
    let sample = |c: &CurveSpec| -> Vec<Vec<f64>> {
        let (lo, hi) = c.param_interval();
        (0..512).map(|i| c.point(lo + (hi - lo) * i as f64 / 511.0)).collect()
    };
    let (sp, sq) = (sample(p), sample(q));
    let mut best = f64::INFINITY;
    for x in &sp {
        for y in &sq {
            best = best.min(dist(x, y));
        }
    }
    best
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// One connected piece of a sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub spec: CurveSpec,
    pub nodes: Range<usize>,
    pub closed: bool,
    pub length: f64,
}

/// Quadrature nodes on a curve with arc-length weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub dim: usize,
    pub params: Vec<f64>,
    /// Row-major `len() × dim` coordinates.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub component_id: Vec<usize>,
    /// Unit tangents, row-major like `points`.
    pub tangents: Vec<f64>,
    pub components: Vec<ComponentInfo>,
    pub spec: CurveSpec,
}

impl SampledCurve {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tangent(&self, i: usize) -> &[f64] {
        &self.tangents[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Arc-length extent of node i's cell relative to the node:
    /// (−w/2, w/2) inside a component, one-sided at open ends.
    pub fn arc_cell(&self, i: usize) -> (f64, f64) {
        let w = self.weights[i];
        let comp = &self.components[self.component_id[i]];
        if !comp.closed {
            if i == comp.nodes.start {
                return (0.0, w);
            }
            if i + 1 == comp.nodes.end {
                return (-w, 0.0);
            }
        }
        (-0.5 * w, 0.5 * w)
    }

    /// Parameter extent of node i's cell, same convention as [`arc_cell`].
    ///
    /// [`arc_cell`]: SampledCurve::arc_cell
    pub fn param_cell(&self, i: usize) -> (f64, f64) {
        let comp = &self.components[self.component_id[i]];
        let r = &comp.nodes;
        let n = r.len();
        let t = self.params[i];
        if comp.closed {
            let h = 2.0 * PI / n as f64;
            return (t - 0.5 * h, t + 0.5 * h);
        }
        let (lo, hi) = comp.spec.param_interval();
        let h = (hi - lo) / (n - 1) as f64;
        if i == r.start {
            (t, t + 0.5 * h)
        } else if i + 1 == r.end {
            (t - 0.5 * h, t)
        } else {
            (t - 0.5 * h, t + 0.5 * h)
        }
    }

    /// Median distance between consecutive nodes of the same component.
    pub fn median_spacing(&self) -> f64 {
        let mut gaps = Vec::new();
        for c in &self.components {
            for i in c.nodes.start + 1..c.nodes.end {
                gaps.push(dist(self.point(i - 1), self.point(i)));
            }
        }
        if gaps.is_empty() {
            return 0.0;
        }
        gaps.sort_by(f64::total_cmp);
        gaps[gaps.len() / 2]
    }

    /// Largest distance between any two nodes.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                d = d.max(dist(self.point(i), self.point(j)));
            }
        }
        d
    }
}

/// Discretize `spec` into `n` nodes, allocated across union pieces in
/// proportion to length with the remainder on the longest piece.
pub fn sample_curve(spec: &CurveSpec, n: usize) -> Result<SampledCurve> {
    spec.validate()?;
    let pieces = spec.pieces();
    let lengths: Vec<f64> = pieces.iter().map(|p| p.length()).collect();
    let total: f64 = lengths.iter().sum();
    let mut counts: Vec<usize> = lengths
        .iter()
        .map(|l| (n as f64 * l / total).floor() as usize)
        .collect();
    let assigned: usize = counts.iter().sum();
    let longest = (0..pieces.len())
        .max_by(|&i, &j| lengths[i].total_cmp(&lengths[j]).then(j.cmp(&i)))
        .unwrap_or(0);
    counts[longest] += n - assigned;
    if let Some(k) = counts.iter().position(|&c| c < 2) {
        return Err(invalid(format!(
            "n = {n} leaves {} node(s) on component {k}; need at least 2 per component",
            counts[k]
        )));
    }

    let dim = spec.dim();
    let mut out = SampledCurve {
        dim,
        params: Vec::with_capacity(n),
        points: Vec::with_capacity(n * dim),
        weights: Vec::with_capacity(n),
        component_id: Vec::with_capacity(n),
        tangents: Vec::with_capacity(n * dim),
        components: Vec::with_capacity(pieces.len()),
        spec: spec.clone(),
    };
    let mut p = vec![0.0; dim];
    let mut tan = vec![0.0; dim];
    for (k, (piece, &m)) in pieces.iter().zip(&counts).enumerate() {
        let start = out.params.len();
        let closed = piece.is_closed();
        let (lo, hi) = piece.param_interval();
        let h = if closed { (hi - lo) / m as f64 } else { (hi - lo) / (m - 1) as f64 };
        for i in 0..m {
            let t = if !closed && i == m - 1 { hi } else { lo + h * i as f64 };
            piece.point_into(t, &mut p);
            piece.tangent_into(t, &mut tan);
            let speed = tan.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cell = if !closed && (i == 0 || i == m - 1) { 0.5 * h } else { h };
            out.params.push(t);
            out.points.extend_from_slice(&p);
            out.weights.push(cell * speed);
            out.tangents.extend(tan.iter().map(|v| v / speed));
            out.component_id.push(k);
        }
        out.components.push(ComponentInfo {
            spec: (*piece).clone(),
            nodes: start..start + m,
            closed,
            length: lengths[k],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_map_examples() {
        assert_eq!(graph_map(&GraphFunction::flat(3), 0.7), vec![0.7, 0.0, 0.0]);
        let p = graph_map(&GraphFunction::linear(0.1), 1.0);
        assert_eq!(p, vec![1.0, 0.1]);
        assert_eq!(graph_map(&GraphFunction::sine(0.05, 1.0), 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn segment_four_nodes() {
        let c = sample_curve(&CurveSpec::segment(-1.0, 1.0), 4).unwrap();
        let want = [-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0];
        for (t, w) in c.params.iter().zip(want) {
            assert!((t - w).abs() < 1e-15);
        }
        assert!((c.total_length() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn circle_circumference() {
        let c = sample_curve(&CurveSpec::circle([0.0, 0.0], 1.0), 8).unwrap();
        assert!((c.total_length() - 2.0 * PI).abs() < 1e-6);
        for i in 0..8 {
            let p = c.point(i);
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn union_allocation_is_proportional() {
        let spec = CurveSpec::union(vec![
            CurveSpec::circle([0.0, 0.0], 1.0),
            CurveSpec::segment(-0.5, 0.5),
        ]);
        let c = sample_curve(&spec, 300).unwrap();
        let on_circle = c.component_id.iter().filter(|&&k| k == 0).count();
        let expected = (300.0 * 2.0 * PI / (2.0 * PI + 1.0)).round() as usize;
        assert_eq!(on_circle, expected);
        assert_eq!(c.len(), 300);
    }

    #[test]
    fn rejections() {
        assert!(sample_curve(&CurveSpec::segment(-1.0, 1.0), 1).is_err());
        assert!(sample_curve(&CurveSpec::segment(1.0, -1.0), 10).is_err());
        assert!(sample_curve(&CurveSpec::union(vec![]), 10).is_err());
        assert!(sample_curve(&CurveSpec::circle([0.0, 0.0], 0.0), 10).is_err());
        let touching = CurveSpec::union(vec![CurveSpec::segment(-1.0, 0.0), CurveSpec::segment(0.0, 1.0)]);
        assert!(sample_curve(&touching, 10).is_err());
    }

    #[test]
    fn mollified_gradient_examples() {
        let lin = GraphFunction::linear(0.3);
        for x in [-2.0, 0.1, 5.0] {
            assert!((mollified_gradient(&lin, x, 0.7).unwrap()[0] - 0.3).abs() < 1e-14);
        }
        let q = GraphFunction::quadratic(1.0);
        for x in [-1.5, 0.0, 0.4] {
            for r in [1e-3, 0.5, 3.0] {
                assert!((mollified_gradient(&q, x, r).unwrap()[0] - x).abs() < 1e-10);
            }
        }
        let abs = GraphFunction::abs(1.0);
        for r in [1e-3, 0.2, 4.0] {
            assert!(mollified_gradient(&abs, 0.0, r).unwrap()[0].abs() < 1e-10);
        }
        assert!(mollified_gradient(&lin, 0.0, 0.0).is_err());
    }

    #[test]
    fn mollified_gradient_converges() {
        let a = GraphFunction::sine(0.7, 2.0);
        let x = 0.3;
        let exact = a.gradient(x)[0];
        let errs: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&r| (mollified_gradient(&a, x, r).unwrap()[0] - exact).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn estimated_constants_are_flagged() {
        let q = GraphFunction::quadratic(2.0);
        assert!(q.constants_estimated);
        assert!(q.lip_const > 7.0 && q.lip_const <= 8.0);
        assert!((q.holder_const - 2.0).abs() < 1e-9);
        assert!(!GraphFunction::sine(0.05, 1.0).constants_estimated);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"variant":"union","members":[
            {"variant":"circle","center":[0,0],"radius":1},
            {"variant":"graph","function":{"id":"sine","amplitude":0.05},"interval":[-0.5,0.5]}]}"#;
        let spec = CurveSpec::from_json(text).unwrap();
        let back: CurveSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
    }
}
