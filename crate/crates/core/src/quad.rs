//! One-dimensional quadrature rules: adaptive Gauss–Kronrod (7/15) for
//! smooth or oscillatory integrands, a nested tanh-sinh rule for integrands
//! with endpoint singularities, and Gauss–Legendre nodes.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::specfun::QuadratureSpec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// 15-point Kronrod estimate with the QUADPACK error rescaling.
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`,
/// bisecting the interval with the largest error estimate until
/// `error <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], spec)
}

/// Like [`integrate`] but starting from the given sorted break points.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::Domain("need at least two break points".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (value, err) = qk15(&f, w[0], w[1]);
        evaluations += 15;
        total += value;
        total_err += err;
        heap.push(Segment { a: w[0], b: w[1], value, err });
    }
    let mut subdivisions = heap.len();
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if !total.is_finite() {
            return Err(Error::Convergence("integrand produced a non-finite value".into()));
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Convergence(format!(
                "adaptive quadrature hit {} subdivisions with error {:.3e} > {:.3e}",
                spec.max_subdivisions, total_err, tol
            )));
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = qk15(&f, worst.a, mid);
        let (v2, e2) = qk15(&f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
        subdivisions += 1;
    }
    // Recompute the sums to drop accumulated cancellation in the running totals.
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err));
    Ok(QuadResult { value, abs_error, evaluations })
}

/// A tanh-sinh node on [-1, 1]: position, distance to the nearer endpoint,
/// and weight. `level_half` marks nodes shared with the half-resolution rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhSinhNode {
    pub x: f64,
    pub complement: f64,
    pub weight: f64,
    pub half_weight: Option<f64>,
}

/// Nested tanh-sinh rule with `2 n + 1` nodes on `[-t_max, t_max]`.
/// Every other node, with doubled weight, forms the `n + 1`-node rule, so
/// both estimates come from one set of integrand evaluations.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    pub nodes: Vec<TanhSinhNode>,
}

/// Default truncation of the tanh-sinh abscissa; the outermost nodes sit
/// about 1e-22 from the endpoints.
pub const TANH_SINH_TMAX: f64 = 3.5;

impl TanhSinh {
    pub fn new(points: usize) -> Self {
        Self::with_tmax(points, TANH_SINH_TMAX)
    }

    /// `points` is rounded up to a multiple of 4 so that the half rule is
    /// itself symmetric.
    pub fn with_tmax(points: usize, t_max: f64) -> Self {
        let n = points.max(4).div_ceil(4) * 2;
        let h = t_max / n as f64;
        let half_pi = std::f64::consts::FRAC_PI_2;
        let nodes = (-(n as i64)..=(n as i64))
            .map(|j| {
                let t = j as f64 * h;
                let s = half_pi * t.sinh();
                let ch = s.cosh();
                let x = s.tanh();
                // 1 - |tanh s| = 2 / (1 + e^{2|s|})
                let complement = 2.0 / (1.0 + (2.0 * s.abs()).exp());
                let weight = h * half_pi * t.cosh() / (ch * ch);
                let half_weight = (j % 2 == 0).then_some(2.0 * weight);
                TanhSinhNode { x, complement, weight, half_weight }
            })
            .collect();
        Self { nodes }
    }

    /// Integrate over `[a, b]`. The closure receives the node position and
    /// its distance from the nearer endpoint (exact even when the position
    /// itself rounds to the endpoint). Returns the full and half-rule sums.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> (f64, f64) {
        let half_len = 0.5 * (b - a);
        let mut full = 0.0;
        let mut half = 0.0;
        for node in &self.nodes {
            let dist = half_len * node.complement;
            let x = if node.x < 0.0 { a + dist } else { b - dist };
            let v = f(x, dist);
            if v == 0.0 {
                continue;
            }
            full += node.weight * v;
            if let Some(hw) = node.half_weight {
                half += hw * v;
            }
        }
        (full * half_len, half * half_len)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}
