//! The lineshape weight
//!
//! |A₋(x + iy)|² = exp(−I),  I = ∫₀^∞ [cosh(2t(1 − y/π)) cos(2tx/π) − 1] eᵗ / (t sinh 2t cosh t) dt.
//!
//! For large t the integrand approaches 2 e^{−2ty/π} cos(2tx/π) / t, which is
//! only conditionally integrable on the real axis. The integral is split at T:
//! [0, T] is integrated adaptively, the asymptote on [T, ∞) in closed form
//! through E₁, and the small remainder numerically.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadResult};
use crate::specfun::{exp_integral_e1, QuadratureSpec};

/// Default split between the adaptive core and the analytic tail.
pub const DEFAULT_SPLIT: f64 = 30.0;

/// Length of the numerically integrated remainder beyond the split.
const REMAINDER_SPAN: f64 = 40.0;

/// Argument x + iy of A₋, with y in [0, π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AminusArg {
    pub x: f64,
    pub y: f64,
}

impl AminusArg {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !(0.0..PI).contains(&y) {
            return Err(Error::Domain(format!("A₋ argument needs finite x and y in [0, π), got ({x}, {y})")));
        }
        Ok(Self { x, y })
    }

    pub fn real(x: f64) -> Self {
        Self { x, y: 0.0 }
    }

    fn rates(&self) -> (f64, f64) {
        (2.0 * self.y / PI, 2.0 * self.x / PI)
    }
}

/// Value and absolute error estimate of |A₋|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AminusValue {
    pub value: f64,
    pub est_error: f64,
}

/// The integrand of I at t > 0. It tends to (1 − y/π)² − (x/π)² as t → 0⁺.
pub fn a_minus_integrand(t: f64, arg: AminusArg) -> f64 {
    let (c, w) = arg.rates();
    let b = w * t;
    if t < 1.0 {
        let half_a = (1.0 - 0.5 * c) * t;
        let half_b = 0.5 * b;
        let num = 2.0 * half_a.sinh().powi(2) * b.cos() - 2.0 * half_b.sin().powi(2);
        num * t.exp() / (t * (2.0 * t).sinh() * t.cosh())
    } else {
        let e2 = (-2.0 * t).exp();
        let d = (1.0 - e2 * e2) * (1.0 + e2);
        let growth = (-c * t).exp() + (-(4.0 - c) * t).exp();
        (2.0 * b.cos() * growth - 4.0 * e2) / (t * d)
    }
}

/// Integrand minus its asymptote 2 e^{−ct} cos(ωt) / t, for t ≥ 1.
fn remainder_integrand(t: f64, arg: AminusArg) -> f64 {
    let (c, w) = arg.rates();
    let e2 = (-2.0 * t).exp();
    let d = (1.0 - e2 * e2) * (1.0 + e2);
    let ect = (-c * t).exp();
    let rest = (-(4.0 - c) * t).exp() + ect * e2 * (e2 + e2 * e2 - 1.0);
    (2.0 * (w * t).cos() * rest - 4.0 * e2) / (t * d)
}

/// The exponent I with its quadrature error, splitting at `split`.
pub fn a_minus_exponent(arg: AminusArg, split: f64, quad: &QuadratureSpec) -> Result<QuadResult> {
    quad.validate()?;
    if !(split >= 1.0 && split.is_finite()) {
        return Err(Error::Domain(format!("tail split must be at least 1, got {split}")));
    }
    let (c, w) = arg.rates();
    if c == 0.0 && w == 0.0 {
        return Ok(QuadResult { value: f64::INFINITY, abs_error: 0.0, evaluations: 0 });
    }
    let spacing = if w > 0.0 { (2.0 * PI / w.abs()).min(1.0) } else { 1.0 };
    let core_breaks = breaks(0.0, split, spacing);
    let core = integrate_with_breaks(|t| a_minus_integrand(t, arg), &core_breaks, quad)?;
    let rem_breaks = breaks(split, split + REMAINDER_SPAN, spacing.max(0.5));
    let rem = integrate_with_breaks(|t| remainder_integrand(t, arg), &rem_breaks, quad)?;
    let tail = 2.0 * exp_integral_e1(Complex64::new(c, -w) * split)?.re;
    let value = core.value + rem.value + tail;
    let abs_error = core.abs_error + rem.abs_error + 4.0 * f64::EPSILON * tail.abs();
    Ok(QuadResult { value, abs_error, evaluations: core.evaluations + rem.evaluations })
}

fn breaks(a: f64, b: f64, spacing: f64) -> Vec<f64> {
    let n = ((b - a) / spacing).ceil().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// |A₋(x + iy)|² with its error estimate. Exactly 0 at the origin.
pub fn a_minus_sq_detailed(arg: AminusArg, quad: &QuadratureSpec) -> Result<AminusValue> {
    let r = a_minus_exponent(arg, DEFAULT_SPLIT, quad)?;
    if r.value == f64::INFINITY {
        return Ok(AminusValue { value: 0.0, est_error: 0.0 });
    }
    let value = (-r.value).exp();
    if !value.is_finite() {
        return Err(Error::Overflow(format!("|A₋|² overflows at x = {}", arg.x)));
    }
    Ok(AminusValue { value, est_error: value * r.abs_error })
}

pub fn a_minus_sq(arg: AminusArg, quad: &QuadratureSpec) -> Result<f64> {
    Ok(a_minus_sq_detailed(arg, quad)?.value)
}

/// |A₋(x)|² on the real axis; x = 0 is rejected (use [`a_minus_sq`]).
pub fn a_minus_sq_real(x: f64, quad: &QuadratureSpec) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Domain("a_minus_sq_real is undefined at x = 0 (A₋(0) = 0)".into()));
    }
    a_minus_sq(AminusArg::real(x), quad)
}

/// |A₋(iπ/2)|², the constant entering the normalisation Cₙ.
pub fn a_minus_half(quad: &QuadratureSpec) -> Result<f64> {
    a_minus_sq(AminusArg { x: 0.0, y: 0.5 * PI }, quad)
}

/// Cubic-spline table of h(x) = ln|A₋(x)|² − 2 ln x on [0, x_max].
///
/// h is even and smooth, so the spline is clamped with h′(0) = 0. Beyond
/// x_max evaluation falls back to direct quadrature.
#[derive(Debug, Clone)]
pub struct AminusTable {
    step: f64,
    h: Vec<f64>,
    m: Vec<f64>,
    node_error: Vec<f64>,
    max_interp_error: f64,
    quad: QuadratureSpec,
}

pub const TABLE_X_MAX: f64 = 120.0;
pub const TABLE_STEP: f64 = 0.025;

impl AminusTable {
    pub fn build(x_max: f64, step: f64, quad: &QuadratureSpec) -> Result<Self> {
        if !(step > 0.0 && x_max >= 8.0 * step) {
            return Err(Error::Domain(format!("bad table layout x_max = {x_max}, step = {step}")));
        }
        let n = (x_max / step).round() as usize;
        let log_h = |x: f64| -> Result<(f64, f64)> {
            let r = a_minus_exponent(AminusArg::real(x), DEFAULT_SPLIT, quad)?;
            Ok((-r.value - 2.0 * x.ln(), r.abs_error))
        };
        let nodes: Vec<(f64, f64)> = (1..=n)
            .into_par_iter()
            .map(|i| log_h(i as f64 * step))
            .collect::<Result<_>>()?;
        // h(0) by Richardson extrapolation in x² from three small arguments.
        let d = 0.0025;
        let (h1, h2, h4) = (log_h(d)?.0, log_h(2.0 * d)?.0, log_h(4.0 * d)?.0);
        let h0 = (16.0 * (4.0 * h1 - h2) / 3.0 - (4.0 * h2 - h4) / 3.0) / 15.0;
        let mut h = Vec::with_capacity(n + 1);
        let mut node_error = Vec::with_capacity(n + 1);
        h.push(h0);
        node_error.push(0.0);
        for (v, e) in nodes {
            h.push(v);
            node_error.push(e);
        }
        let mut table = Self::from_nodes(step, h, node_error, 0.0, *quad);
        let probes: Vec<usize> = (0..n).step_by(2).collect();
        table.max_interp_error = probes
            .into_par_iter()
            .map(|i| {
                let x = (i as f64 + 0.5) * step;
                log_h(x).map(|(exact, _)| (table.eval_h(x) - exact).abs())
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
        Ok(table)
    }

    /// Table with the default layout, built once per process.
    pub fn shared() -> Result<Arc<AminusTable>> {
        static TABLE: OnceLock<std::result::Result<Arc<AminusTable>, Error>> = OnceLock::new();
        TABLE
            .get_or_init(|| Self::build(TABLE_X_MAX, TABLE_STEP, &QuadratureSpec::default()).map(Arc::new))
            .clone()
    }

    fn from_nodes(step: f64, h: Vec<f64>, node_error: Vec<f64>, max_interp_error: f64, quad: QuadratureSpec) -> Self {
        let m = clamped_spline(step, &h);
        Self { step, h, m, node_error, max_interp_error, quad }
    }

    pub fn x_max(&self) -> f64 {
        self.step * (self.h.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Largest |h_spline − h_exact| seen at interval midpoints; this is the
    /// relative interpolation error of |A₋|².
    pub fn max_interp_error(&self) -> f64 {
        self.max_interp_error
    }

    fn eval_h(&self, x: f64) -> f64 {
        let last = self.h.len() - 1;
        let i = ((x / self.step).floor() as usize).min(last - 1);
        let s = self.step;
        let a = (i + 1) as f64 * s - x;
        let b = x - i as f64 * s;
        (self.m[i] * a.powi(3) + self.m[i + 1] * b.powi(3)) / (6.0 * s)
            + (self.h[i] / s - self.m[i] * s / 6.0) * a
            + (self.h[i + 1] / s - self.m[i + 1] * s / 6.0) * b
    }

    /// Interpolated |A₋(x)|²; exact 0 at x = 0.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        if ax == 0.0 {
            return Ok(0.0);
        }
        if ax > self.x_max() {
            return a_minus_sq_real(ax, &self.quad);
        }
        Ok(ax * ax * self.eval_h(ax).exp())
    }

    /// Write `x,value,est_error,h` rows preceded by a comment line with the
    /// table metadata. The h column makes the round trip exact.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# aminus-table step={:.16e} h0={:.16e} max_interp_error={:.16e}",
            self.step, self.h[0], self.max_interp_error
        )?;
        writeln!(out, "x,value,est_error,h")?;
        let mut line = String::new();
        for (i, (&h, &e)) in self.h.iter().zip(&self.node_error).enumerate() {
            let x = i as f64 * self.step;
            let value = if i == 0 { 0.0 } else { x * x * h.exp() };
            line.clear();
            let _ = write!(line, "{:.16e},{:.16e},{:.16e},{:.16e}", x, value, value * e, h);
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let bad = |msg: &str| Error::Domain(format!("malformed |A₋|² table: {msg}"));
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| bad("unexpected end of file"))?
                .map_err(|e| bad(&e.to_string()))
        };
        let meta = next()?;
        let field = |key: &str| -> Result<f64> {
            meta.split_whitespace()
                .find_map(|tok| tok.strip_prefix(key))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(&format!("missing {key}")))
        };
        let (step, h0, max_err) = (field("step=")?, field("h0=")?, field("max_interp_error=")?);
        let columns = match next()?.trim() {
            "x,value,est_error" => 3,
            "x,value,est_error,h" => 4,
            _ => return Err(bad("missing header")),
        };
        let mut h = vec![h0];
        let mut node_error = vec![0.0];
        while let Ok(line) = next() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            if cols.len() != columns {
                return Err(bad(&format!("expected {columns} columns")));
            }
            let (x, value, err) = (cols[0], cols[1], cols[2]);
            if x == 0.0 {
                continue;
            }
            if ((x / step).round() as usize) != h.len() || !(value > 0.0) {
                return Err(bad(&format!("unexpected row at x = {x}")));
            }
            h.push(if columns == 4 { cols[3] } else { value.ln() - 2.0 * x.ln() });
            node_error.push(err / value);
        }
        if h.len() < 9 {
            return Err(bad("too few rows"));
        }
        Ok(Self::from_nodes(step, h, node_error, max_err, QuadratureSpec::default()))
    }
}

/// Second derivatives of the cubic spline through equally spaced `y`, with
/// zero slope at the left end and a fourth-order one-sided slope at the right.
fn clamped_spline(step: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len() - 1;
    let k = n;
    let right_slope =
        (25.0 * y[k] - 48.0 * y[k - 1] + 36.0 * y[k - 2] - 16.0 * y[k - 3] + 3.0 * y[k - 4]) / (12.0 * step);
    // Tridiagonal system: sub = 1, diag = 4 (2 at the ends), sup = 1.
    let mut diag = vec![4.0; n + 1];
    let mut rhs = vec![0.0; n + 1];
    diag[0] = 2.0;
    diag[n] = 2.0;
    let s2 = 6.0 / (step * step);
    rhs[0] = s2 * (y[1] - y[0]);
    for i in 1..n {
        rhs[i] = s2 * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
    }
    rhs[n] = 6.0 / step * (right_slope - (y[n] - y[n - 1]) / step);
    for i in 1..=n {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n + 1];
    m[n] = rhs[n] / diag[n];
    for i in (0..n).rev() {
        m[i] = (rhs[i] - m[i + 1]) / diag[i];
    }
    m
}
