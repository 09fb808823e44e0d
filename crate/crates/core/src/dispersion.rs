//! Spinon kinematics.
//!
//! In the isotropic chain a spinon of rapidity β carries momentum
//! p = cot⁻¹(sinh β) on the branch (−π, 0) and energy e = π / cosh β, so
//! that e = −π sin p. The anisotropic dispersion in terms of the spectral
//! angle α is kept for checking the isotropic limit.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{jacobi_am_dn_kc, theta, EllipticModulus};

/// Real spectral parameter of one spinon.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Rapidity(pub f64);

impl Rapidity {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() {
            Ok(Self(beta))
        } else {
            Err(Error::Domain(format!("rapidity must be finite, got {beta}")))
        }
    }
}

/// Spinon momentum on the branch [−π, 0].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpinonMomentum(pub f64);

impl SpinonMomentum {
    pub fn new(p: f64) -> Result<Self> {
        if (-PI..=0.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::Domain(format!("spinon momentum must lie in [-π, 0], got {p}")))
        }
    }
}

/// p(β) = cot⁻¹(sinh β) with range (−π, 0). Strictly decreasing, p(0) = −π/2.
pub fn momentum_of_rapidity(beta: Rapidity) -> SpinonMomentum {
    // (cos p, sin p) ∝ (−sinh β, −1)
    SpinonMomentum((-1.0f64).atan2(-beta.0.sinh()))
}

/// e(β) = π / cosh β.
pub fn energy_of_rapidity(beta: Rapidity) -> f64 {
    PI / beta.0.cosh()
}

/// Inverse of [`momentum_of_rapidity`]: β = arcsinh(cot p). The endpoints
/// p = 0 and p = −π correspond to infinite rapidity and are rejected.
pub fn rapidity_of_momentum(p: SpinonMomentum) -> Result<Rapidity> {
    let p = p.0;
    if !(p > -PI && p < 0.0) {
        return Err(Error::Domain(format!(
            "momentum {p} is an ideal endpoint (infinite rapidity)"
        )));
    }
    Ok(Rapidity((p.cos() / p.sin()).asinh()))
}

/// Parameters of the anisotropic chain in the massive regime,
/// q = −e^{−ε} with ε > 0. The elliptic nome is −q = e^{−ε}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XxzParams {
    pub epsilon: f64,
    pub modulus: EllipticModulus,
}

impl XxzParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon, modulus: EllipticModulus::from_nome((-epsilon).exp())? })
    }

    /// q = −e^{−ε}.
    pub fn q(&self) -> f64 {
        -(-self.epsilon).exp()
    }

    /// Anisotropy Δ = (q + 1/q) / 2 (below −1 in this regime).
    pub fn anisotropy(&self) -> f64 {
        let q = self.q();
        0.5 * (q + 1.0 / q)
    }

    fn elliptic_argument(&self, alpha: f64) -> f64 {
        2.0 * self.modulus.big_k * alpha / PI
    }
}

/// Spinon energy (2K/π) sinh(πK'/K) dn(2Kα/π).
pub fn xxz_energy(alpha: f64, params: &XxzParams) -> Result<f64> {
    let m = &params.modulus;
    let (_, dn) = jacobi_am_dn_kc(params.elliptic_argument(alpha), m.k, m.kprime)?;
    Ok(2.0 * m.big_k / PI * (PI * m.big_kprime / m.big_k).sinh() * dn)
}

/// Spinon momentum am(2Kα/π) + π/2.
pub fn xxz_momentum(alpha: f64, params: &XxzParams) -> Result<f64> {
    let m = &params.modulus;
    let (am, _) = jacobi_am_dn_kc(params.elliptic_argument(alpha), m.k, m.kprime)?;
    Ok(am + FRAC_PI_2)
}

/// τ(ξ) = ξ⁻¹ θ_{q⁴}(q ξ²) / θ_{q⁴}(q ξ⁻²) at ξ = i e^{iα}; unimodular, with
/// phase −p(α).
pub fn tau(alpha: f64, params: &XxzParams) -> Result<Complex64> {
    let q = params.q();
    let x = q.powi(4);
    let xi = Complex64::i() * Complex64::from_polar(1.0, alpha);
    let xi2 = xi * xi;
    let num = theta(x, q * xi2, 1e-17, 100_000)?;
    let den = theta(x, q / xi2, 1e-17, 100_000)?;
    if den.norm() == 0.0 {
        return Err(Error::Domain(format!("τ has a pole at α = {alpha}")));
    }
    Ok(num / den / xi)
}

/// Harness for the q → −1 limit. The isotropic rapidity enters through
/// ξ = i e^{εβ/(iπ)}, i.e. α = −εβ/π; this substitution is used only here.
pub mod limit_check {
    use super::*;

    /// Spectral angle corresponding to rapidity β at anisotropy ε.
    pub fn alpha_of_beta(beta: f64, epsilon: f64) -> f64 {
        -epsilon * beta / PI
    }

    /// sup over `betas` of |e_xxz(α(β)) − π / cosh β|.
    pub fn energy_deviation(epsilon: f64, betas: &[f64]) -> Result<f64> {
        let params = XxzParams::new(epsilon)?;
        betas.iter().try_fold(0.0f64, |acc, &b| {
            let e = xxz_energy(alpha_of_beta(b, epsilon), &params)?;
            Ok(acc.max((e - energy_of_rapidity(Rapidity(b))).abs()))
        })
    }

    /// sup over `betas` of the distance between the anisotropic momentum and
    /// p(β), measured modulo π (the cot⁻¹ branch period).
    pub fn momentum_deviation_mod_pi(epsilon: f64, betas: &[f64]) -> Result<f64> {
        let params = XxzParams::new(epsilon)?;
        betas.iter().try_fold(0.0f64, |acc, &b| {
            let p = xxz_momentum(alpha_of_beta(b, epsilon), &params)?;
            let d = (p - momentum_of_rapidity(Rapidity(b)).0).rem_euclid(PI);
            Ok(acc.max(d.min(PI - d)))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_of(b: f64) -> f64 {
        momentum_of_rapidity(Rapidity(b)).0
    }

    #[test]
    fn momentum_examples() {
        assert_eq!(p_of(0.0), -FRAC_PI_2);
        let b = (3f64.sqrt() + 2.0).ln();
        assert!((p_of(b) + 5.0 * PI / 6.0).abs() < 1e-14);
        assert!((p_of(40.0) + PI).abs() < 1e-15);
        let tail = p_of(-40.0);
        assert!(tail < 0.0 && tail > -1e-15);
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_of_rapidity(Rapidity(0.0)), PI);
        let b = (3f64.sqrt() + 2.0).ln();
        assert!((energy_of_rapidity(Rapidity(b)) - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn inverse_examples() {
        let b = rapidity_of_momentum(SpinonMomentum(-FRAC_PI_2)).unwrap();
        assert!(b.0.abs() < 1e-15);
        let b = rapidity_of_momentum(SpinonMomentum(-PI / 6.0)).unwrap();
        assert!((b.0 + (3f64.sqrt() + 2.0).ln()).abs() < 1e-14);
        assert!(rapidity_of_momentum(SpinonMomentum(0.0)).is_err());
        assert!(rapidity_of_momentum(SpinonMomentum(-PI)).is_err());
        assert!(SpinonMomentum::new(0.1).is_err());
    }

    #[test]
    fn inverse_round_trip_grid() {
        for i in 1..1000 {
            let p = -PI * f64::from(i) / 1000.0;
            let b = rapidity_of_momentum(SpinonMomentum(p)).unwrap();
            assert!((p_of(b.0) - p).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn xxz_origin_values() {
        let params = XxzParams::new(0.7).unwrap();
        let m = params.modulus;
        let e0 = xxz_energy(0.0, &params).unwrap();
        assert!((e0 - 2.0 * m.big_k / PI * (PI * m.big_kprime / m.big_k).sinh()).abs() < 1e-14);
        assert!((xxz_momentum(0.0, &params).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(params.anisotropy() < -1.0);
    }

    #[test]
    fn xxz_energy_has_period_pi() {
        for eps in [0.3, 1.0, 2.5] {
            let params = XxzParams::new(eps).unwrap();
            for alpha in [-1.1, 0.2, 0.9] {
                let a = xxz_energy(alpha, &params).unwrap();
                let b = xxz_energy(alpha + PI, &params).unwrap();
                assert!((a - b).abs() < 1e-10, "eps = {eps}, alpha = {alpha}");
            }
        }
    }

    #[test]
    fn tau_is_unimodular_with_phase_minus_p() {
        for eps in [0.5, 1.0, 2.0] {
            let params = XxzParams::new(eps).unwrap();
            for i in 0..20 {
                let alpha = -PI + 2.0 * PI * (f64::from(i) + 0.37) / 20.0;
                let t = tau(alpha, &params).unwrap();
                assert!((t.norm() - 1.0).abs() < 1e-10);
                let p = xxz_momentum(alpha, &params).unwrap();
                let d = (t.arg() + p).rem_euclid(2.0 * PI);
                assert!(d.min(2.0 * PI - d) < 1e-8, "eps = {eps}, alpha = {alpha}: {d}");
            }
        }
    }

    #[test]
    fn isotropic_limit_energy_and_momentum() {
        let betas: Vec<f64> = (0..=120).map(|i| -3.0 + 0.05 * f64::from(i)).collect();
        let devs: Vec<f64> = [0.1, 0.05, 0.01]
            .iter()
            .map(|&e| limit_check::energy_deviation(e, &betas).unwrap())
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
        assert!(devs[2] < 0.05);
        let dp = limit_check::momentum_deviation_mod_pi(0.05, &betas).unwrap();
        assert!(dp < 1e-10, "{dp}");
    }
}
