//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use spinon_core::quad::gauss_legendre;
use spinon_core::specfun::log_gamma;
use spinon_core::{g_value, Rapidity, ResidueSpec, SpinConfig};

// g by numerical contour integration.
//
// For n = 4 with the contour variable at position ℓ, the poles of the
// integrand F in the strip 0 < Im α < π are exactly the m = 0 residues, and
// the half-plane Im α < −π holds exactly the m ≥ 1 residues. Hence
//
//   g = (1/2πi) [∫F(x) dx − ∫F(x + iπ) dx − ∫F(x − iπ) dx],
//
// each line integral taken with the trapezoid rule, which converges
// geometrically for these analytic, exponentially decaying integrands.

fn integrand(alpha: Complex64, ell: usize, betas: &[f64]) -> Complex64 {
    let i = Complex64::i();
    let mut log_part = Complex64::new(0.0, 0.0);
    let mut poly = Complex64::new(1.0, 0.0);
    for (k, &b) in betas.iter().enumerate() {
        let u = (alpha - b) / (2.0 * PI * i);
        log_part += log_gamma(u - 0.25).unwrap() + log_gamma(-u - 0.25).unwrap();
        if k < ell {
            poly *= alpha - b + 0.5 * PI * i;
        } else if k > ell {
            poly *= b - alpha + 0.5 * PI * i;
        }
    }
    poly * log_part.exp() * alpha.sinh()
}

fn contour_line(shift: f64, ell: usize, betas: &[f64], step: f64) -> Complex64 {
    let reach = 70.0 + betas.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let n = (reach / step).ceil() as i64;
    (-n..=n)
        .map(|s| integrand(Complex64::new(s as f64 * step, shift), ell, betas))
        .sum::<Complex64>()
        * step
}

pub fn contour_g(ell: usize, betas: &[f64], step: f64) -> Complex64 {
    let total = contour_line(0.0, ell, betas, step) - contour_line(PI, ell, betas, step) - contour_line(-PI, ell, betas, step);
    total / (2.0 * PI * Complex64::i())
}

pub fn residue_g(ell: usize, betas: &[f64]) -> Complex64 {
    let mut eps = vec![-1i8; betas.len()];
    eps[ell] = 1;
    let cfg = SpinConfig::new(eps).unwrap();
    let r: Vec<Rapidity> = betas.iter().map(|&b| Rapidity(b)).collect();
    g_value(&cfg, &r, &ResidueSpec::default()).unwrap().value
}

/// Integrand of the |A₋(x)|² exponent as written, switching to the scaled
/// form once cosh(2t) would overflow.
fn aminus_integrand_raw(t: f64, x: f64) -> f64 {
    let w = 2.0 * x / PI;
    if t < 20.0 {
        ((2.0 * t).cosh() * (w * t).cos() - 1.0) * t.exp() / (t * (2.0 * t).sinh() * t.cosh())
    } else {
        let q = (-2.0 * t).exp();
        (2.0 * (1.0 + q * q) * (w * t).cos() - 4.0 * q) / (t * (1.0 - q * q) * (1.0 + q))
    }
}

/// ∫ over [a, b] in equal segments of at most `h`, 20-point Gauss-Legendre each.
fn segmented(a: f64, b: f64, h: f64, x: f64, rule: &[(f64, f64)]) -> f64 {
    let n = ((b - a) / h).ceil() as usize;
    let len = (b - a) / n as f64;
    (0..n)
        .map(|s| {
            let lo = a + s as f64 * len;
            rule.iter()
                .map(|&(node, weight)| weight * aminus_integrand_raw(lo + 0.5 * len * (node + 1.0), x))
                .sum::<f64>()
                * 0.5
                * len
        })
        .sum()
}

/// |A₋(x)|² by brute force: short segments up to t = 40, then partial
/// integrals at half-period steps of the cos(2xt/π)/t tail, summed by
/// repeated averaging.
pub fn aminus_sq_brute(x: f64) -> f64 {
    let rule = gauss_legendre(20);
    let w = 2.0 * x / PI;
    let half_period = PI / w;
    let h = (half_period / 16.0).min(0.05);
    let t0 = 40.0;
    let mut partial = vec![segmented(0.0, t0, h, x, &rule)];
    for j in 0..30 {
        let a = t0 + j as f64 * half_period;
        let next = partial[j] + segmented(a, a + half_period, h, x, &rule);
        partial.push(next);
    }
    while partial.len() > 1 {
        partial = partial.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }
    (-partial[0]).exp()
}
