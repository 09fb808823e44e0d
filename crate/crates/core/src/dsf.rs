//! Assembly of the n-spinon structure factor.
//!
//! Public arguments are the physical transfer (w, k) with k in [0, 2π]. The
//! value returned for (w, k) is S^{+−}_n(w, k − π) of the integral
//! representation, i.e. the continuum at k is bounded by w_l = π|sin k| and
//! w_u = 2π sin(k/2).
//!
//! The generic integrand at fixed outer momenta sums over the ordered pairs
//! (p̄₁, p̄₂) returned by [`solve_pairs`] with an orbit weight of 2 for the
//! reflected images (−p̄ − π). At n = 2 this reproduces the closed form with
//! 8 C₂ = 1; the n = 4 path uses the same counting.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::aminus::{a_minus_half, a_minus_sq_real, AminusTable};
use crate::dispersion::{rapidity_of_momentum, Rapidity, SpinonMomentum};
use crate::error::{Error, Result};
use crate::gfunction::{g_sum_sq_detailed, ResidueSpec};
use crate::kinematics::{
    acos_difference, boundaries, rapidity_difference, rapidity_near_endpoint, reduce_momentum, solve_pairs_with_gap,
    PairFrame,
};
use crate::quad::TanhSinh;
use crate::specfun::{ln_gamma_real, QuadratureSpec};

const TWO_PI: f64 = 2.0 * PI;

/// Weight of the reflected images (−p̄₁ − π, −p̄₂ − π) in the pair sum.
pub const ORBIT_WEIGHT: f64 = 2.0;

/// Normalisation
///
/// Cₙ = 2^{(−3n² + 2n + 4)/2} π^{7n(2 − n)/4} / (n! Γ(1/4)^{n(n−2)} |A₋(iπ/2)|^{n(n−2)}),
///
/// with `a_half` = |A₋(iπ/2)|².
pub fn c_n(n: usize, a_half: f64) -> Result<f64> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Domain(format!("C_n needs even n >= 2, got {n}")));
    }
    if !(a_half > 0.0 && a_half.is_finite()) {
        return Err(Error::Domain(format!("|A₋(iπ/2)|² must be positive, got {a_half}")));
    }
    let nf = n as f64;
    let nn2 = nf * (nf - 2.0);
    let ln_c = 0.5 * (-3.0 * nf * nf + 2.0 * nf + 4.0) * std::f64::consts::LN_2
        + 0.25 * 7.0 * nf * (2.0 - nf) * PI.ln()
        - ln_gamma_real(nf + 1.0)?
        - nn2 * ln_gamma_real(0.25)?
        - 0.5 * nn2 * a_half.ln();
    Ok(ln_c.exp())
}

/// Spin component of S^{μμ}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One evaluated structure-factor sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DsfPoint {
    pub w: f64,
    pub k: f64,
    pub n: usize,
    pub value: f64,
    pub est_error: f64,
    /// How the value was obtained.
    pub method: String,
}

/// Rapidities closer than this are moved apart for Σ|g|². It is continuous
/// at coincidence while the residue series needs ever more shells there,
/// and f ∝ (β − β′)² makes the weight negligible in that region anyway.
const G_SPREAD: f64 = 1e-5;

fn spread_close(betas: &[f64]) -> Vec<Rapidity> {
    let mut b = betas.to_vec();
    for j in 0..b.len() {
        for k in j + 1..b.len() {
            let gap = b[k] - b[j];
            if gap.abs() < G_SPREAD {
                let mid = 0.5 * (b[j] + b[k]);
                let half = if gap >= 0.0 { 0.5 * G_SPREAD } else { -0.5 * G_SPREAD };
                (b[j], b[k]) = (mid - half, mid + half);
            }
        }
    }
    b.into_iter().map(Rapidity).collect()
}

/// Tolerances and the |A₋|² source shared by the structure-factor routines.
#[derive(Debug, Clone)]
pub struct DsfContext {
    pub quad: QuadratureSpec,
    pub residue: ResidueSpec,
    pub a_half: f64,
    table: Option<Arc<AminusTable>>,
}

impl DsfContext {
    /// Context using the process-wide interpolation table.
    pub fn new(quad: QuadratureSpec, residue: ResidueSpec) -> Result<Self> {
        Self::with_table(AminusTable::shared()?, quad, residue)
    }

    pub fn with_table(table: Arc<AminusTable>, quad: QuadratureSpec, residue: ResidueSpec) -> Result<Self> {
        quad.validate()?;
        residue.validate()?;
        Ok(Self { quad, residue, a_half: a_minus_half(&quad)?, table: Some(table) })
    }

    /// Context evaluating every |A₋|² by direct quadrature.
    pub fn direct(quad: QuadratureSpec, residue: ResidueSpec) -> Result<Self> {
        quad.validate()?;
        residue.validate()?;
        Ok(Self { quad, residue, a_half: a_minus_half(&quad)?, table: None })
    }

    pub fn table(&self) -> Option<&AminusTable> {
        self.table.as_deref()
    }

    /// |A₋(x)|², 0 at x = 0.
    pub fn aminus_sq(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        match &self.table {
            Some(t) => t.eval(x),
            None => a_minus_sq_real(x, &self.quad),
        }
    }

    /// Relative accuracy of a single |A₋|² value.
    fn aminus_rel_error(&self) -> f64 {
        self.table.as_ref().map_or(0.0, |t| t.max_interp_error()) + self.quad.rel_tol
    }

    /// Closed-form two-spinon lineshape, see [`s2_pm`].
    pub fn s2_pm(&self, w: f64, k: f64) -> Result<f64> {
        s2_closed_form(w, k, |x| self.aminus_sq(x))
    }

    /// f = Π|A₋(β_j' − β_j)|² times Σ|g|², with the relative truncation error
    /// of Σ|g|².
    fn weight(&self, betas: &[f64]) -> Result<(f64, f64)> {
        let mut f = 1.0;
        for j in 0..betas.len() {
            for jp in j + 1..betas.len() {
                f *= self.aminus_sq(betas[jp] - betas[j])?;
            }
        }
        if f == 0.0 {
            return Ok((0.0, 0.0));
        }
        let g = g_sum_sq_detailed(betas.len(), &spread_close(betas), &self.residue)?;
        let g_rel = if g.value > 0.0 { g.est_error / g.value } else { 0.0 };
        Ok((f * g.value, g_rel))
    }

    /// f Σ|g|² / √(W_u² − W²) summed over the pairs at (W, K), including the
    /// orbit weight. The swapped pair gives the same f and Σ|g|², so one
    /// ordered pair is evaluated and counted for both.
    fn pair_term(&self, w: f64, k: f64, gap_sq: f64) -> Result<f64> {
        let sols = solve_pairs_with_gap(w, k, gap_sq);
        let Some(&(p1, p2)) = sols.pairs.first() else { return Ok(0.0) };
        let (Ok(b1), Ok(b2)) = (rapidity_of_momentum(p1), rapidity_of_momentum(p2)) else {
            return Ok(0.0);
        };
        let (fg, _) = self.weight(&[b1.0, b2.0])?;
        Ok(ORBIT_WEIGHT * sols.len() as f64 * fg / gap_sq.sqrt())
    }

    /// The two-spinon value assembled from the general pair-sum machinery
    /// (pair solver, Σ|g|² = 1, C₂, orbit weight and the doubling over the
    /// two ground states) instead of the closed form.
    pub fn s2_pm_generic(&self, w: f64, k: f64) -> Result<f64> {
        check_transfer(w, k)?;
        let k = reduce_momentum(k);
        let b = boundaries(k);
        if !b.contains(w) {
            return Ok(0.0);
        }
        Ok(2.0 * c_n(2, self.a_half)? * self.pair_term(w, k, b.upper_gap_sq(w))?)
    }

    /// S^{+−}_n at (w, k) for n ∈ {2, 4}.
    pub fn s_pm(&self, n: usize, w: f64, k: f64, four: &FourSpinonSpec) -> Result<DsfPoint> {
        match n {
            2 => {
                let value = self.s2_pm(w, k)?;
                Ok(DsfPoint {
                    w,
                    k: reduce_momentum(k),
                    n,
                    value,
                    est_error: value * self.aminus_rel_error(),
                    method: "closed form".into(),
                })
            }
            4 => s4_pm(w, k, four, self),
            _ => Err(Error::Domain(format!("only n = 2 and n = 4 are supported, got {n}"))),
        }
    }
}

fn check_transfer(w: f64, k: f64) -> Result<()> {
    if !(w.is_finite() && k.is_finite()) {
        return Err(Error::Domain(format!("non-finite transfer (w, k) = ({w}, {k})")));
    }
    Ok(())
}

fn s2_closed_form(w: f64, k: f64, amp: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    check_transfer(w, k)?;
    let k = reduce_momentum(k);
    let b = boundaries(k);
    if !b.contains(w) {
        return Ok(0.0);
    }
    let x = rapidity_difference(w, k)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(amp(x)? / b.upper_gap_sq(w).sqrt())
}

/// Two-spinon lineshape
///
/// S^{+−}₂ = Θ(w_u − w) Θ(w − w_l) |A₋(β̄₁ − β̄₂)|² / √(w_u² − w²),
///
/// with the rapidity difference from the transfer alone. |A₋|² is computed
/// by direct quadrature.
pub fn s2_pm(w: f64, k: f64, quad: &QuadratureSpec) -> Result<f64> {
    s2_closed_form(w, k, |x| a_minus_sq_real(x, quad))
}

/// S^{μμ}_n = 2 S^{+−}_n for every axis.
pub fn s_component(axis: Axis, n: usize, w: f64, k: f64, ctx: &DsfContext, four: &FourSpinonSpec) -> Result<f64> {
    let _ = axis;
    Ok(2.0 * ctx.s_pm(n, w, k, four)?.value)
}

/// Resolution of the four-spinon integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourSpinonSpec {
    /// Tanh-sinh nodes of the inner rule (rounded up to a multiple of 4);
    /// each outer half-panel gets half as many.
    pub nodes: usize,
    /// Shift applied once to a node whose rapidities coincide.
    pub jitter: f64,
}

impl Default for FourSpinonSpec {
    fn default() -> Self {
        Self { nodes: 48, jitter: 1e-7 }
    }
}

/// A cut of the outer range u ∈ [−2π, 0].
#[derive(Debug, Clone, Copy)]
struct Cut {
    u: f64,
    /// K = k + u is this multiple of π.
    k_multiple: Option<i64>,
    /// u = 0 or u = −2π, where the (p₃, p₄) domain closes.
    domain_end: bool,
    /// Index into [`Outer::switches`] of the margin that vanishes here.
    switch: Option<usize>,
}

/// Outer node u = p₃ + p₄. The pair frame (K = k + u) and the half-width
/// vmax = min(−u, 2π + u) of the v = p₃ − p₄ range take their digits from the
/// distance to the panel end when that end makes them small.
#[derive(Debug, Clone, Copy)]
struct OuterNode {
    u: f64,
    frame: PairFrame,
    vmax: f64,
    /// A margin taken from its difference to the root it vanishes at.
    exact: Option<(usize, f64)>,
}

/// Support of the inner integral in W = w − A cos(v/2), A = 2π sin(vmax/2):
/// [max(W_l, w − A), min(W_u, w − A cos(vmax/2))]. The offsets are the
/// distances of `lo` from W_l and from v = 0, and of `hi` from W_u and from
/// v = vmax; each is exactly 0 when that bound is the active one.
#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    hi: f64,
    width: f64,
    off_l: f64,
    off_v0: f64,
    off_u: f64,
    off_vmax: f64,
    amp: f64,
    cos_vmax: f64,
    sin_vmax: f64,
}

/// Kinematics of the outer variables at a fixed transfer (w, k).
#[derive(Debug, Clone, Copy)]
struct Outer {
    w: f64,
    k: f64,
}

impl Outer {
    fn node_at(&self, u: f64) -> OuterNode {
        OuterNode { u, frame: PairFrame::from_momentum(self.k + u), vmax: (-u).min(TWO_PI + u), exact: None }
    }

    /// The node at distance `d` above (`upward`) or below a cut.
    fn node_from(&self, cut: Cut, d: f64, upward: bool) -> OuterNode {
        let u = if upward { cut.u + d } else { cut.u - d };
        let frame = match cut.k_multiple {
            Some(m) => PairFrame::new(m, if upward { d } else { -d }),
            None => PairFrame::from_momentum(self.k + u),
        };
        let vmax = if cut.domain_end { d } else { (-u).min(TWO_PI + u) };
        let exact = cut.switch.map(|s| (s, self.switch_shift(s, cut.u, if upward { d } else { -d })));
        OuterNode { u, frame, vmax, exact }
    }

    /// Change of margin `s` from u0 to u0 + du, with each sine difference
    /// written as a product so that it keeps its digits for small du.
    fn switch_shift(&self, s: usize, u0: f64, du: f64) -> f64 {
        let dsin = |x0: f64, dx: f64| 2.0 * (x0 + 0.5 * dx).cos() * (0.5 * dx).sin();
        let k0 = self.k + u0;
        let (v0, dv) = if u0 > -PI { (-u0, -du) } else { (TWO_PI + u0, du) };
        let sk = (k0 + 0.5 * du).sin().signum();
        let sk2 = (0.5 * k0 + 0.25 * du).sin().signum();
        let w_l = PI * sk * dsin(k0, du);
        let w_u = TWO_PI * sk2 * dsin(0.5 * k0, 0.5 * du);
        let alt_lo = -TWO_PI * dsin(0.5 * v0, 0.5 * dv);
        let alt_hi = -PI * dsin(v0, dv);
        match s {
            0 => alt_hi - w_l,
            1 => w_u - alt_lo,
            2 => w_l - alt_lo,
            _ => w_u - alt_hi,
        }
    }

    fn node_switches(&self, node: &OuterNode) -> [f64; 4] {
        let (s, c) = (0.5 * node.vmax).sin_cos();
        let amp = TWO_PI * s;
        let f = &node.frame;
        let (alt_lo, alt_hi) = (self.w - amp, self.w - amp * c);
        let mut out = [alt_hi - f.w_l, f.w_u - alt_lo, f.w_l - alt_lo, f.w_u - alt_hi];
        if let Some((i, v)) = node.exact {
            out[i] = v;
        }
        out
    }

    fn window(&self, node: &OuterNode) -> Option<Window> {
        let (sin_vmax, cos_vmax) = (0.5 * node.vmax).sin_cos();
        let amp = TWO_PI * sin_vmax;
        let f = &node.frame;
        if !(amp > 0.0 && f.width() > 0.0) {
            return None;
        }
        let (alt_lo, alt_hi) = (self.w - amp, self.w - amp * cos_vmax);
        let sw = self.node_switches(node);
        let lo_edge = sw[2] >= 0.0;
        let hi_edge = sw[3] <= 0.0;
        let lo = if lo_edge { f.w_l } else { alt_lo };
        let hi = if hi_edge { f.w_u } else { alt_hi };
        let width = match (lo_edge, hi_edge) {
            (true, true) => f.width(),
            (true, false) => sw[0],
            (false, true) => sw[1],
            (false, false) => 2.0 * amp * (0.25 * node.vmax).sin().powi(2),
        };
        (width > 0.0).then(|| Window {
            lo,
            hi,
            width,
            off_l: if lo_edge { 0.0 } else { -sw[2] },
            off_v0: if lo_edge { sw[2] } else { 0.0 },
            off_u: if hi_edge { 0.0 } else { sw[3] },
            off_vmax: if hi_edge { -sw[3] } else { 0.0 },
            amp,
            cos_vmax,
            sin_vmax,
        })
    }

    /// Signed margins whose roots bound the panels: the support opens or
    /// closes where w − A cos(vmax/2) = W_l or w − A = W_u, and an end of the
    /// window changes bound where W_l = w − A or W_u = w − A cos(vmax/2).
    fn switches(&self, u: f64) -> [f64; 4] {
        self.node_switches(&self.node_at(u))
    }

    fn cuts(&self) -> Vec<Cut> {
        let tag = |u: f64, domain_end: bool| {
            let m = ((self.k + u) / PI).round();
            let k_multiple = ((self.k + u - m * PI).abs() < 1e-12).then_some(m as i64);
            Cut { u, k_multiple, domain_end, switch: None }
        };
        let mut cuts = vec![tag(-TWO_PI, true), tag(-PI, false), tag(0.0, true)];
        for m in -1..=4 {
            let u = f64::from(m) * PI - self.k;
            if u > -TWO_PI && u < 0.0 {
                cuts.push(Cut { u, k_multiple: Some(i64::from(m)), domain_end: false, switch: None });
            }
        }
        let fixed = merge_cuts(cuts);
        let mut all = fixed.clone();
        const SAMPLES: usize = 512;
        for win in fixed.windows(2) {
            let (a, b) = (win[0].u, win[1].u);
            let at = |i: usize| a + (b - a) * (i as f64 + 0.5) / SAMPLES as f64;
            let mut prev_u = at(0);
            let mut prev = self.switches(prev_u);
            for i in 1..SAMPLES {
                let u = at(i);
                let cur = self.switches(u);
                for s in 0..4 {
                    if (prev[s] > 0.0) != (cur[s] > 0.0) {
                        let root = self.bisect(s, prev_u, u);
                        all.push(Cut { u: root, k_multiple: None, domain_end: false, switch: Some(s) });
                    }
                }
                prev = cur;
                prev_u = u;
            }
        }
        merge_cuts(all)
    }

    fn panels(&self) -> Vec<(Cut, Cut)> {
        self.cuts()
            .windows(2)
            .map(|p| (p[0], p[1]))
            .filter(|(a, b)| b.u - a.u > 1e-13 && self.window(&self.node_at(0.5 * (a.u + b.u))).is_some())
            .collect()
    }

    fn bisect(&self, s: usize, mut a: f64, mut b: f64) -> f64 {
        let sa = self.switches(a)[s] > 0.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (self.switches(m)[s] > 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// Sort and merge cuts closer than 1e-13, keeping the tags of either.
fn merge_cuts(mut cuts: Vec<Cut>) -> Vec<Cut> {
    cuts.sort_by(|a, b| a.u.total_cmp(&b.u));
    let mut out: Vec<Cut> = Vec::with_capacity(cuts.len());
    for c in cuts {
        match out.last_mut() {
            Some(last) if (c.u - last.u).abs() < 1e-13 => {
                last.k_multiple = last.k_multiple.or(c.k_multiple);
                last.domain_end |= c.domain_end;
                last.switch = last.switch.or(c.switch);
                if c.domain_end || c.k_multiple.is_some() {
                    last.u = c.u;
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Outcome of one inner integral.
#[derive(Default, Clone, Copy)]
struct InnerSum {
    full: f64,
    half: f64,
    g_rel: f64,
    evaluations: usize,
}

/// The integrand in W at distances `dl` above the window's lower end and
/// `dh` below its upper end, including dv/dW = 2/(A sin(v/2)).
fn four_spinon_integrand(ctx: &DsfContext, outer: &Outer, node: &OuterNode, win: &Window, dl: f64, dh: f64) -> Result<(f64, f64)> {
    let frame = &node.frame;
    let w_eff = if dl <= dh { win.lo + dl } else { win.hi - dh };
    let gap_u = win.off_u + dh;
    let Some((b1, b2)) = frame.rapidities(w_eff, win.off_l + dl, gap_u) else { return Ok((0.0, 0.0)) };
    let one_minus = (win.off_v0 + dl) / win.amp;
    let above = (win.off_vmax + dh) / win.amp;
    let cv = if one_minus < 0.5 { 1.0 - one_minus } else { (outer.w - w_eff) / win.amp };
    let sin_v = (one_minus * (1.0 + cv)).sqrt();
    if !(sin_v > 0.0) {
        return Ok((0.0, 0.0));
    }
    // (vmax − v)/2 and its complement vmax − (vmax − v)/2 are the distances of
    // p₃ and p₄ from the endpoint of [−π, 0] they approach
    let t = acos_difference(cv, win.cos_vmax, above, sin_v, win.sin_vmax);
    let (ea, eb) = (t, node.vmax - t);
    if !(ea > 0.0 && eb > 0.0) {
        return Ok((0.0, 0.0));
    }
    let (b3, b4) = if node.u >= -PI {
        (rapidity_near_endpoint(ea, false), rapidity_near_endpoint(eb, false))
    } else {
        (rapidity_near_endpoint(eb, true), rapidity_near_endpoint(ea, true))
    };
    let (fg, g_rel) = ctx.weight(&[b1, b2, b3, b4])?;
    let root = (gap_u * (frame.w_u + w_eff)).sqrt();
    let dv_dw = 2.0 / (win.amp * sin_v);
    Ok((ORBIT_WEIGHT * 2.0 * fg / root * dv_dw, g_rel))
}

fn inner_integral(ctx: &DsfContext, outer: &Outer, rule: &TanhSinh, node: &OuterNode, jitter: f64) -> Result<InnerSum> {
    let Some(win) = outer.window(node) else { return Ok(InnerSum::default()) };
    let width = win.width;
    let half_len = 0.5 * width;
    let mut acc = InnerSum::default();
    for n in &rule.nodes {
        let d = half_len * n.complement;
        let (dl, dh) = if n.x < 0.0 { (d, width - d) } else { (width - d, d) };
        let value = match four_spinon_integrand(ctx, outer, node, &win, dl, dh) {
            Err(Error::Degeneracy(_)) => {
                let s = jitter * width;
                let (dl, dh) = if dh > s { (dl + s, dh - s) } else { (dl - s, dh + s) };
                four_spinon_integrand(ctx, outer, node, &win, dl, dh)?
            }
            other => other?,
        };
        acc.evaluations += 1;
        if value.0 == 0.0 {
            continue;
        }
        acc.full += n.weight * value.0;
        if let Some(hw) = n.half_weight {
            acc.half += hw * value.0;
        }
        acc.g_rel = acc.g_rel.max(value.1);
    }
    acc.full *= half_len;
    acc.half *= half_len;
    Ok(acc)
}

/// Where the outer log map stops: s₁ = 1/ln(D/d₁), so d₁ = D e⁻⁶⁰.
const OUTER_LOG_CUTOFF: f64 = 60.0;

#[derive(Clone, Copy)]
enum Role {
    Body,
    /// Midpoint of [0, s₁] for the half-panel with this index.
    TailMid(usize),
    /// The node at s₁ itself, used only for the tail error.
    TailEdge(usize),
}

struct OuterTask {
    node: OuterNode,
    w_full: f64,
    w_half: f64,
    role: Role,
}

/// Outer nodes for the half-panel of length `len` next to `cut`. With
/// s = 1/ln(D/d), D = e·len, a panel end where two spinons soften together
/// (I(u) ~ 1/(d ln² d)) has a finite integrand in s.
fn outer_tasks(outer: &Outer, rule: &TanhSinh, cut: Cut, upward: bool, len: f64, id: usize, out: &mut Vec<OuterTask>) {
    let big_d = len * std::f64::consts::E;
    let s1 = 1.0 / OUTER_LOG_CUTOFF;
    let hl = 0.5 * (1.0 - s1);
    let at = |s: f64| big_d * (-1.0 / s).exp();
    for n in &rule.nodes {
        let s = if n.x < 0.0 { s1 + hl * n.complement } else { 1.0 - hl * n.complement };
        let d = at(s);
        let jac = hl * d / (s * s);
        out.push(OuterTask {
            node: outer.node_from(cut, d, upward),
            w_full: n.weight * jac,
            w_half: n.half_weight.unwrap_or(0.0) * jac,
            role: Role::Body,
        });
    }
    let (mid, edge) = (0.5 * s1, s1);
    let d_mid = at(mid);
    let jac = s1 * d_mid / (mid * mid);
    out.push(OuterTask { node: outer.node_from(cut, d_mid, upward), w_full: jac, w_half: jac, role: Role::TailMid(id) });
    let d_edge = at(edge);
    let jac = s1 * d_edge / (edge * edge);
    out.push(OuterTask { node: outer.node_from(cut, d_edge, upward), w_full: jac, w_half: 0.0, role: Role::TailEdge(id) });
}

/// Four-spinon S^{+−}₄(w, k), a two-dimensional integral over the momenta of
/// spinons 3 and 4.
///
/// The outer variable u = p₃ + p₄ is split into panels on which the
/// support varies smoothly; the inner variable is the energy W left to the
/// pair (p̄₁, p̄₂). The inner direction uses a tanh-sinh rule, which absorbs
/// the inverse square roots at W = W_u and W = W_l and at v = 0, vmax. Each
/// outer half-panel is integrated in s = 1/ln(D/d), d the distance to its
/// end, and the sliver below s₁ = 1/60 is added from its midpoint.
/// The error estimate is the difference to the rules with every other node,
/// the tail uncertainty, and the truncation errors of Σ|g|² and |A₋|².
pub fn s4_pm(w: f64, k: f64, spec: &FourSpinonSpec, ctx: &DsfContext) -> Result<DsfPoint> {
    check_transfer(w, k)?;
    if spec.nodes < 4 {
        return Err(Error::Domain(format!("need at least 4 nodes per axis, got {}", spec.nodes)));
    }
    let k = reduce_momentum(k);
    let outer = Outer { w, k };
    let inner_rule = TanhSinh::new(spec.nodes);
    let outer_rule = TanhSinh::new(spec.nodes / 2);
    let panels = outer.panels();
    let mut tasks = Vec::new();
    for (i, &(a, b)) in panels.iter().enumerate() {
        let len = 0.5 * (b.u - a.u);
        outer_tasks(&outer, &outer_rule, a, true, len, 2 * i, &mut tasks);
        outer_tasks(&outer, &outer_rule, b, false, len, 2 * i + 1, &mut tasks);
    }
    let inner: Vec<InnerSum> = tasks
        .par_iter()
        .map(|t| inner_integral(ctx, &outer, &inner_rule, &t.node, spec.jitter))
        .collect::<Result<_>>()
        .map_err(|e| annotate(e, w, k))?;
    let (mut full, mut half, mut g_rel, mut evaluations) = (0.0, 0.0, 0.0f64, 0);
    let mut tail = vec![(0.0, 0.0); 2 * panels.len()];
    for (t, s) in tasks.iter().zip(&inner) {
        match t.role {
            Role::Body => {
                full += t.w_full * s.full;
                half += t.w_half * s.half;
            }
            Role::TailMid(id) => {
                full += t.w_full * s.full;
                half += t.w_half * s.half;
                tail[id].0 = t.w_full * s.full;
            }
            Role::TailEdge(id) => tail[id].1 = t.w_full * s.full,
        }
        g_rel = g_rel.max(s.g_rel);
        evaluations += s.evaluations;
    }
    let tail_error: f64 = tail.iter().map(|(m, e)| (m - e).abs()).sum();
    let scale = 2.0 * c_n(4, ctx.a_half)?;
    let value = scale * full;
    let noise = value.abs() * (6.0 * ctx.aminus_rel_error() + g_rel + 1e-12);
    Ok(DsfPoint {
        w,
        k,
        n: 4,
        value,
        est_error: scale * ((full - half).abs() + tail_error) + noise,
        method: format!("tanh-sinh nodes={} panels={} evaluations={evaluations}", spec.nodes, panels.len()),
    })
}

/// Seeded Monte Carlo estimate of [`s4_pm`] for smoke tests and
/// cross-checks. A sample picks a panel in proportion to its length and one
/// of its halves, then a uniform s ∈ (0, 1) in the same log map as the
/// deterministic rule (clamped at s₁/2), and a point of the inner window through
/// x = tanh(π/2 sinh t) with t uniform in [−3.5, 3.5]. `est_error` is the
/// standard error of the mean.
pub fn s4_pm_monte_carlo(w: f64, k: f64, samples: usize, seed: u64, ctx: &DsfContext) -> Result<DsfPoint> {
    const SPAN: f64 = 3.5;
    check_transfer(w, k)?;
    if samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
    }
    let k = reduce_momentum(k);
    let outer = Outer { w, k };
    let panels = outer.panels();
    let mut ends = Vec::with_capacity(panels.len() + 1);
    ends.push(0.0);
    for (a, b) in &panels {
        ends.push(ends.last().unwrap() + (b.u - a.u));
    }
    let total = *ends.last().unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let draws: Vec<[f64; 3]> = (0..samples).map(|_| [rng.random(), rng.random(), rng.random_range(-SPAN..SPAN)]).collect();
    let values: Vec<f64> = draws
        .par_iter()
        .map(|&[pick, so, t]| {
            if panels.is_empty() {
                return Ok(0.0);
            }
            // the panel and its half from one uniform number
            let x = pick * total;
            let i = ends.partition_point(|&e| e <= x).clamp(1, panels.len()) - 1;
            let (a, b) = panels[i];
            let len = 0.5 * (b.u - a.u);
            let upper = x - ends[i] >= len;
            // the integrand in s levels off as s → 0; below the floor it is
            // taken at the floor, where the rapidities are still ~100
            let s = so.max(0.5 / OUTER_LOG_CUTOFF);
            let d = len * std::f64::consts::E * (-1.0 / s).exp();
            if d == 0.0 {
                return Ok(0.0);
            }
            let node = if upper { outer.node_from(b, d, false) } else { outer.node_from(a, d, true) };
            let Some(win) = outer.window(&node) else { return Ok(0.0) };
            let y = 0.5 * PI * t.abs().sinh();
            let di = 0.5 * win.width * 2.0 / ((2.0 * y).exp() + 1.0);
            let wi = 0.5 * win.width * 0.5 * PI * t.cosh() / y.cosh().powi(2) * 2.0 * SPAN;
            let (dl, dh) = if t > 0.0 { (win.width - di, di) } else { (di, win.width - di) };
            let f = match four_spinon_integrand(ctx, &outer, &node, &win, dl, dh) {
                Err(Error::Degeneracy(_)) => 0.0,
                other => other?.0,
            };
            // (panel, half, s) has density len/total; dd/ds = d/s²
            Ok(f * wi * d / (s * s) * total / len)
        })
        .collect::<Result<_>>()
        .map_err(|e| annotate(e, w, k))?;
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = 2.0 * c_n(4, ctx.a_half)?;
    Ok(DsfPoint {
        w,
        k,
        n: 4,
        value: scale * mean,
        est_error: scale * (var / n).sqrt(),
        method: format!("monte carlo samples={samples} seed={seed}"),
    })
}

fn annotate(e: Error, w: f64, k: f64) -> Error {
    let at = |m: String| format!("{m} at (w, k) = ({w}, {k})");
    match e {
        Error::Convergence(m) => Error::Convergence(at(m)),
        Error::Degeneracy(m) => Error::Degeneracy(at(m)),
        Error::Domain(m) => Error::Domain(at(m)),
        Error::Pole(m) => Error::Pole(at(m)),
        Error::Overflow(m) => Error::Overflow(at(m)),
    }
}

/// Resolution of zone-wide scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub k_points: usize,
    pub w_points: usize,
    pub w_max: f64,
    pub quad: QuadratureSpec,
    pub residue: ResidueSpec,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            k_points: 64,
            w_points: 64,
            w_max: TWO_PI,
            quad: QuadratureSpec::default(),
            residue: ResidueSpec::default(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_points < 2 || self.w_points < 2 || !(self.w_max > 0.0) {
            return Err(Error::Domain(format!("invalid grid {self:?}")));
        }
        self.quad.validate()?;
        self.residue.validate()
    }
}

/// Quadrature scheme of the sum-rule integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumRuleScheme {
    /// Over (k, θ) with w = w_u sin θ, which cancels the edge root.
    EdgeAngle,
    /// Over the spinon momenta (p₁, p₂) ∈ [−π, 0]², where the Jacobian of
    /// (p₁, p₂) → (w, k) cancels the same root.
    Momentum,
}

/// Integrated two-spinon intensity ∫₀^{2π} dk ∫ dw S^{zz}₂(w, k).
#[derive(Debug, Clone, PartialEq)]
pub struct SumRuleReport {
    pub integrated_intensity: f64,
    pub grid_resolution: (usize, usize),
    /// Change against the rule with half the nodes on each axis.
    pub refinement_delta: f64,
    pub scheme: SumRuleScheme,
}

impl SumRuleReport {
    /// The intensity in units of (2π)², i.e. ∫dk/2π ∫dw/2π S^{zz}₂.
    pub fn per_zone(&self) -> f64 {
        self.integrated_intensity / (TWO_PI * TWO_PI)
    }
}

fn tensor_tanh_sinh<F>(rule_a: &TanhSinh, rule_b: &TanhSinh, a: (f64, f64), inner: F) -> Result<(f64, f64)>
where
    F: Fn(f64, f64, &TanhSinh) -> Result<(f64, f64)> + Sync,
{
    let half_len = 0.5 * (a.1 - a.0);
    let parts: Vec<(f64, f64)> = rule_a
        .nodes
        .par_iter()
        .map(|node| {
            let d = half_len * node.complement;
            let x = if node.x < 0.0 { a.0 + d } else { a.1 - d };
            inner(x, d, rule_b)
        })
        .collect::<Result<_>>()?;
    let (mut full, mut half) = (0.0, 0.0);
    for (node, (f, h)) in rule_a.nodes.iter().zip(parts) {
        full += node.weight * f;
        if let Some(hw) = node.half_weight {
            half += hw * h;
        }
    }
    Ok((full * half_len, half * half_len))
}

/// Integrated S^{zz}₂ over the zone, as a convergence diagnostic.
pub fn sum_rule_fraction(grid: &GridSpec, scheme: SumRuleScheme, ctx: &DsfContext) -> Result<SumRuleReport> {
    grid.validate()?;
    let rule_k = TanhSinh::new(grid.k_points);
    let rule_w = TanhSinh::new(grid.w_points);
    let (full, half) = match scheme {
        SumRuleScheme::EdgeAngle => {
            // k ∈ (0, π) and doubled by k → 2π − k; θ from asin(w_l/w_u) = π/2 − k/2
            let (f, h) = tensor_tanh_sinh(&rule_k, &rule_w, (0.0, PI), |k, _, rule| {
                let theta_l = 0.5 * (PI - k);
                let mut err = None;
                let r = rule.integrate(theta_l, 0.5 * PI, |theta, _| {
                    let gap = theta - theta_l;
                    if gap <= 0.0 {
                        return 0.0;
                    }
                    // r = cos²θ / (sin(θ − θ_l) sin(θ + θ_l))
                    let r = theta.cos().powi(2) / (gap.sin() * (theta + theta_l).sin());
                    let x = 2.0 * r.max(0.0).sqrt().asinh();
                    ctx.aminus_sq(x).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        0.0
                    })
                });
                err.map_or(Ok(r), Err)
            })?;
            (4.0 * f, 4.0 * h)
        }
        SumRuleScheme::Momentum => {
            tensor_tanh_sinh(&rule_k, &rule_w, (-PI, 0.0), |p1, _, rule| {
                let b1 = match rapidity_of_momentum(SpinonMomentum(p1)) {
                    Ok(b) => b.0,
                    Err(_) => return Ok((0.0, 0.0)),
                };
                let mut err = None;
                let r = rule.integrate(-PI, 0.0, |p2, _| {
                    let Ok(b2) = rapidity_of_momentum(SpinonMomentum(p2)) else { return 0.0 };
                    ctx.aminus_sq(b1 - b2.0).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        0.0
                    })
                });
                err.map_or(Ok(r), Err)
            })?
        }
    };
    Ok(SumRuleReport {
        integrated_intensity: full,
        grid_resolution: (grid.k_points, grid.w_points),
        refinement_delta: (full - half).abs(),
        scheme,
    })
}
