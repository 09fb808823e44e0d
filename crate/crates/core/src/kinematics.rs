//! Two-spinon continuum and the solutions of the conservation laws
//!
//! W = −π (sin p₁ + sin p₂),  K ≡ −p₁ − p₂ (mod 2π),  p₁, p₂ ∈ [−π, 0].

use std::f64::consts::PI;

use crate::dispersion::{rapidity_of_momentum, SpinonMomentum};
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const MERGE_TOL: f64 = 1e-12;

/// Reduce a momentum to the first zone [0, 2π]. Values already inside are
/// returned unchanged, so 2π stays 2π.
pub fn reduce_momentum(k: f64) -> f64 {
    if (0.0..=TWO_PI).contains(&k) {
        k
    } else {
        k.rem_euclid(TWO_PI)
    }
}

/// Energy and momentum transfer, with k in the first zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPoint {
    pub w: f64,
    pub k: f64,
}

impl TransferPoint {
    pub fn new(w: f64, k: f64) -> Result<Self> {
        if !(w >= 0.0 && w.is_finite() && k.is_finite()) {
            return Err(Error::Domain(format!("invalid transfer point (w, k) = ({w}, {k})")));
        }
        Ok(Self { w, k: reduce_momentum(k) })
    }
}

/// Upper and lower edges of the two-spinon continuum at total momentum K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundaries {
    pub w_u: f64,
    pub w_l: f64,
}

impl Boundaries {
    /// Strictly inside (w_l, w_u).
    pub fn contains(&self, w: f64) -> bool {
        w > self.w_l && w < self.w_u
    }

    /// w_u² − w², formed as a product to keep digits near the upper edge.
    pub fn upper_gap_sq(&self, w: f64) -> f64 {
        (self.w_u - w) * (self.w_u + w)
    }
}

pub fn boundaries(k: f64) -> Boundaries {
    let k = reduce_momentum(k);
    Boundaries { w_u: TWO_PI * (0.5 * k).sin().abs(), w_l: PI * k.sin().abs() }
}

/// Ordered pairs (p₁, p₂) solving the conservation laws.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairSolutions {
    pub pairs: Vec<(SpinonMomentum, SpinonMomentum)>,
}

impl PairSolutions {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All ordered solutions in [−π, 0]² at (W, K).
///
/// With S = p₁ + p₂ ≡ −K and D = p₁ − p₂ the energy law reads
/// W = −2π sin(S/2) cos(D/2). Only S = −K (K reduced to [0, 2π]) lies in
/// [−2π, 0] except at the zone edges, where the continuum is empty. The two
/// sign branches of D give the two orderings; they merge at W = W_u.
pub fn solve_pairs(w: f64, k: f64) -> PairSolutions {
    solve_pairs_with_gap(w, k, boundaries(k).upper_gap_sq(w))
}

/// [`solve_pairs`] with W_u² − W² supplied by the caller, for points so close
/// to the upper edge that forming the difference would lose digits.
pub fn solve_pairs_with_gap(w: f64, k: f64, upper_gap_sq: f64) -> PairSolutions {
    let k = reduce_momentum(k);
    let b = boundaries(k);
    if !(w > b.w_l && upper_gap_sq > 0.0) {
        return PairSolutions::default();
    }
    let mut pairs: Vec<(SpinonMomentum, SpinonMomentum)> = Vec::with_capacity(2);
    let s = -k;
    // D/2 = acos(W/W_u), via atan2 for accuracy near the upper edge.
    let half_d = upper_gap_sq.sqrt().atan2(w);
    for sign in [1.0, -1.0] {
        let p1 = 0.5 * s + sign * half_d;
        let p2 = 0.5 * s - sign * half_d;
        if !(-PI..=0.0).contains(&p1) || !(-PI..=0.0).contains(&p2) {
            continue;
        }
        let dup = pairs
            .iter()
            .any(|(a, b)| (a.0 - p1).abs() < MERGE_TOL && (b.0 - p2).abs() < MERGE_TOL);
        if !dup {
            pairs.push((SpinonMomentum(p1), SpinonMomentum(p2)));
        }
    }
    PairSolutions { pairs }
}

/// The four-element orbit (p₁, p₂), (p₂, p₁), (−p₁ − π, −p₂ − π),
/// (−p₂ − π, −p₁ − π) of a two-spinon pair. The reflected images carry the
/// same energy and total momentum 2π − K; at n = 2 all four give the same
/// integrand, which is how the orbit weight of the generic pipeline arises.
pub fn pair_orbit(p1: f64, p2: f64) -> [(f64, f64); 4] {
    [(p1, p2), (p2, p1), (-p1 - PI, -p2 - PI), (-p2 - PI, -p1 - PI)]
}

/// acos(y) − acos(x) for y < x, from x − y and the sines of both angles,
/// keeping full relative accuracy when the two are close.
pub fn acos_difference(x: f64, y: f64, x_minus_y: f64, sin_x: f64, sin_y: f64) -> f64 {
    let sin_diff = x_minus_y * (x + y) / (x * sin_y + y * sin_x);
    sin_diff.atan2(x * y + sin_x * sin_y)
}

/// β(p) for p = −ε (`near_minus_pi` false) or p = −π + ε, from ε ∈ (0, π).
pub fn rapidity_near_endpoint(eps: f64, near_minus_pi: bool) -> f64 {
    let b = (1.0 / eps.tan()).asinh();
    if near_minus_pi {
        b
    } else {
        -b
    }
}

/// Two-spinon kinematics at a total momentum K = mπ + δ known through its
/// offset δ from the nearest multiple of π.
///
/// Near K ≡ 0 the continuum (W_l, W_u) shrinks like K³ and both momenta of
/// a pair approach the same endpoint of [−π, 0]; near the lower edge one of
/// them does. [`PairFrame::rapidities`] works from δ and from the distances
/// to both edges, so none of these limits loses digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFrame {
    pub w_u: f64,
    pub w_l: f64,
    /// κ/2 with κ = min(K, 2π − K).
    half_kappa: f64,
    cos_hk: f64,
    sin_hk: f64,
    /// K > π, where the pair sums to −2π + κ and sits near −π.
    near_minus_pi: bool,
}

impl PairFrame {
    pub fn new(m: i64, delta: f64) -> Self {
        let (s, c) = (0.5 * delta.abs()).sin_cos();
        let (half_kappa, sin_hk, cos_hk, near_minus_pi) = if m.rem_euclid(2) == 0 {
            (0.5 * delta.abs(), s, c, delta < 0.0)
        } else {
            (0.5 * (PI - delta.abs()), c, s, delta > 0.0)
        };
        Self {
            w_u: TWO_PI * sin_hk,
            w_l: TWO_PI * sin_hk * cos_hk,
            half_kappa,
            cos_hk,
            sin_hk,
            near_minus_pi,
        }
    }

    /// W_u − W_l without cancellation at the pinch.
    pub fn width(&self) -> f64 {
        2.0 * self.w_u * (0.5 * self.half_kappa).sin().powi(2)
    }

    pub fn from_momentum(k: f64) -> Self {
        let m = (k / PI).round();
        Self::new(m as i64, k - m * PI)
    }

    /// Rapidities (β̄₁, β̄₂) of the pair at energy `w`, given W − W_l and
    /// W_u − W. The swapped pair is the other ordered solution.
    pub fn rapidities(&self, w: f64, gap_l: f64, gap_u: f64) -> Option<(f64, f64)> {
        if !(gap_l > 0.0 && gap_u > 0.0 && self.w_u > 0.0) {
            return None;
        }
        let a = w / self.w_u;
        let root = (gap_u * (self.w_u + w)).sqrt();
        let sin_a = root / self.w_u;
        // D/2 = acos(W/W_u); the momenta lie at ε = κ/2 ∓ D/2 from the endpoint
        let half_d = root.atan2(w);
        let eps1 = acos_difference(a, self.cos_hk, gap_l / self.w_u, sin_a, self.sin_hk);
        let eps2 = self.half_kappa + half_d;
        Some((
            rapidity_near_endpoint(eps1, self.near_minus_pi),
            rapidity_near_endpoint(eps2, self.near_minus_pi),
        ))
    }
}

/// β(p̄₁) − β(p̄₂) ≥ 0 for the pair with p̄₁ ≤ p̄₂, from the transfer alone:
/// 2 cosh⁻¹ √((w_u² − w_l²)/(w² − w_l²)), written as 2 sinh⁻¹ √r with
/// r = (w_u² − w²)/(w² − w_l²) to avoid cancellation near w_u.
pub fn rapidity_difference(w: f64, k: f64) -> Result<f64> {
    let b = boundaries(k);
    if !(w > b.w_l && w <= b.w_u) {
        return Err(Error::Domain(format!(
            "rapidity difference needs w_l < w <= w_u, got w = {w} with (w_l, w_u) = ({}, {}) at k = {k}",
            b.w_l, b.w_u
        )));
    }
    let r = b.upper_gap_sq(w).max(0.0) / ((w - b.w_l) * (w + b.w_l));
    Ok(2.0 * r.sqrt().asinh())
}

/// β(p₁) − β(p₂) computed from a momentum pair; used to cross-check
/// [`rapidity_difference`].
pub fn pair_rapidity_difference(p1: SpinonMomentum, p2: SpinonMomentum) -> Result<f64> {
    Ok(rapidity_of_momentum(p1)?.0 - rapidity_of_momentum(p2)?.0)
}
