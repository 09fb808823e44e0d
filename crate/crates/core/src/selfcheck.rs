//! Fast invariant checks of every module, used by `spinon selfcheck`.
//!
//! Each check takes well under a second and uses direct quadrature, so the
//! suite does not build the |A₋|² table.

use std::f64::consts::PI;

use crate::aminus::a_minus_sq_real;
use crate::dispersion::{energy_of_rapidity, momentum_of_rapidity, rapidity_of_momentum, Rapidity};
use crate::dsf::{c_n, DsfContext};
use crate::error::Result;
use crate::gfunction::{g_value, ResidueSpec, SpinConfig};
use crate::kinematics::{boundaries, pair_rapidity_difference, rapidity_difference, solve_pairs};
use crate::specfun::{ln_gamma_real, QuadratureSpec};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}::{} ({})", self.module, self.name, self.detail)
    }
}

fn line(module: &'static str, name: &'static str, check: Result<(bool, String)>) -> CheckLine {
    match check {
        Ok((passed, detail)) => CheckLine { module, name, passed, detail },
        Err(e) => CheckLine { module, name, passed: false, detail: e.to_string() },
    }
}

fn specfun_gamma_half() -> Result<(bool, String)> {
    let err = (2.0 * ln_gamma_real(0.5)? - PI.ln()).abs();
    Ok((err < 1e-14, format!("|2 ln Γ(1/2) − ln π| = {err:.2e}")))
}

fn dispersion_identity() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut round_trip = 0.0f64;
    for i in 0..1000 {
        let b = -8.0 + 16.0 * (f64::from(i) + 0.5) / 1000.0;
        let p = momentum_of_rapidity(Rapidity(b));
        worst = worst.max((energy_of_rapidity(Rapidity(b)) + PI * p.0.sin()).abs());
        round_trip = round_trip.max((rapidity_of_momentum(p)?.0 - b).abs());
    }
    Ok((worst < 1e-12 && round_trip < 1e-9, format!("e + π sin p: {worst:.2e}, round trip: {round_trip:.2e}")))
}

fn kinematics_anchor() -> Result<(bool, String)> {
    let d = rapidity_difference(PI, PI)?;
    let err = (d - 2.0 * (2.0 + 3f64.sqrt()).ln()).abs();
    let mut worst = 0.0f64;
    for i in 1..20 {
        let k = 2.0 * PI * f64::from(i) / 20.0;
        let b = boundaries(k);
        for j in 1..20 {
            let w = b.w_l + (b.w_u - b.w_l) * f64::from(j) / 20.0;
            let x = rapidity_difference(w, k)?;
            for (p, q) in solve_pairs(w, k).pairs {
                worst = worst.max((pair_rapidity_difference(p, q)?.abs() - x).abs());
            }
        }
    }
    Ok((err < 1e-12 && worst < 1e-9, format!("anchor {err:.2e}, pair solver {worst:.2e}")))
}

fn aminus_edge(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let v: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&x| a_minus_sq_real(x, quad)).collect::<Result<_>>()?;
    Ok((v[0] > v[1] && v[1] > v[2] && v[2] > 0.0, format!("|A₋|² at 0.2, 0.1, 0.05: {:.3e} {:.3e} {:.3e}", v[0], v[1], v[2])))
}

fn gfunction_two_spinon(residue: &ResidueSpec) -> Result<(bool, String)> {
    let cfg = SpinConfig::new(vec![-1, -1])?;
    let g = g_value(&cfg, &[Rapidity(0.4), Rapidity(-1.3)], residue)?;
    Ok((g.value.re == 1.0 && g.value.im == 0.0, format!("g = {}", g.value)))
}

fn dsf_normalisation(ctx: &DsfContext) -> Result<(bool, String)> {
    let c2 = c_n(2, ctx.a_half)?;
    let mut worst = 0.0f64;
    for &(w, k) in &[(3.5, 2.2), (5.0, 3.0), (PI, PI), (4.0, 4.5)] {
        let a = ctx.s2_pm(w, k)?;
        worst = worst.max((ctx.s2_pm_generic(w, k)? / a - 1.0).abs());
    }
    Ok(((8.0 * c2 - 1.0).abs() < 1e-14 && worst < 1e-9, format!("8 C₂ = {:.15}, generic vs closed form {worst:.2e}", 8.0 * c2)))
}

fn dsf_support(ctx: &DsfContext) -> Result<(bool, String)> {
    let k = PI / 2.0;
    let b = boundaries(k);
    let outside = ctx.s2_pm(b.w_u + 0.1, k)? == 0.0 && ctx.s2_pm(b.w_l - 0.1, k)? == 0.0;
    let edge: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|d| ctx.s2_pm(2.0 * PI - d, PI)).collect::<Result<_>>()?;
    let reflect = ctx.s2_pm(2.5, 1.9)? == ctx.s2_pm(2.5, 2.0 * PI - 1.9)?;
    let ok = outside && edge[0] > edge[1] && edge[1] > edge[2] && reflect;
    Ok((ok, format!("zero outside: {outside}, upper edge {:.2e} → {:.2e}, reflection: {reflect}", edge[0], edge[2])))
}

/// Run every check.
pub fn run_all() -> Vec<CheckLine> {
    let quad = QuadratureSpec::default();
    let residue = ResidueSpec::default();
    let mut out = vec![
        line("specfun", "gamma_half", specfun_gamma_half()),
        line("dispersion", "energy_identity", dispersion_identity()),
        line("kinematics", "rapidity_difference", kinematics_anchor()),
        line("aminus", "vanishes_at_origin", aminus_edge(&quad)),
        line("gfunction", "two_spinon_is_one", gfunction_two_spinon(&residue)),
    ];
    match DsfContext::direct(quad, residue) {
        Ok(ctx) => {
            out.push(line("dsf", "normalisation", dsf_normalisation(&ctx)));
            out.push(line("dsf", "support", dsf_support(&ctx)));
        }
        Err(e) => out.push(line("dsf", "context", Err(e))),
    }
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for l in super::run_all() {
            assert!(l.passed, "{l}");
        }
    }
}
