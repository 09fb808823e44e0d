//! Acceptance criteria 1–10. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

mod common;

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spinon_core::dispersion::limit_check;
use spinon_core::kinematics::pair_rapidity_difference;
use spinon_core::{
    a_minus_sq_real, boundaries, c_n, energy_of_rapidity, g_value, momentum_of_rapidity,
    rapidity_difference, s4_pm, solve_pairs, sum_rule_fraction, DsfContext, FourSpinonSpec, GridSpec,
    QuadratureSpec, Rapidity, ResidueSpec, SpinConfig, SumRuleScheme,
};

const TWO_PI: f64 = 2.0 * PI;

/// ∫₀^{2π}dk ∫dw S^{zz}₂, frozen from the (k, θ) scheme at 128 × 128 nodes.
const SUM_RULE_FIXTURE: f64 = 28.776_349_23;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn ctx() -> DsfContext {
    DsfContext::new(QuadratureSpec::default(), ResidueSpec::default()).unwrap()
}

fn dispersion_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let b = Rapidity(rng.random_range(-20.0..20.0));
        worst = worst.max((energy_of_rapidity(b) + PI * momentum_of_rapidity(b).0.sin()).abs());
    }
    outcome(worst < 1e-12, format!("max |e + π sin p| = {worst:.2e}"))
}

fn xxz_limit() -> Outcome {
    let betas: Vec<f64> = (0..=600).map(|i| -3.0 + 6.0 * f64::from(i) / 600.0).collect();
    let dev: Vec<f64> = [0.1, 0.05, 0.01]
        .iter()
        .map(|&eps| limit_check::energy_deviation(eps, &betas).unwrap())
        .collect();
    let ok = dev[0] > dev[1] && dev[1] > dev[2] && dev[2] < 0.05;
    outcome(ok, format!("sup deviation at ε = 0.1, 0.05, 0.01: {:.3e}, {:.3e}, {:.3e}", dev[0], dev[1], dev[2]))
}

fn rapidity_difference_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..=50 {
        let k = TWO_PI * f64::from(i) / 51.0;
        let b = boundaries(k);
        for j in 1..=50 {
            let w = b.w_l + (b.w_u - b.w_l) * f64::from(j) / 51.0;
            let x = rapidity_difference(w, k).unwrap();
            for (p, q) in solve_pairs(w, k).pairs {
                worst = worst.max((pair_rapidity_difference(p, q).unwrap().abs() - x).abs());
            }
        }
    }
    let anchor = (rapidity_difference(PI, PI).unwrap() - 2.0 * (2.0 + 3f64.sqrt()).ln()).abs();
    outcome(worst < 1e-9 && anchor < 1e-12, format!("grid {worst:.2e}, anchor {anchor:.2e}"))
}

fn two_spinon_g_is_one() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let cfg = SpinConfig::new(vec![-1, -1]).unwrap();
    let mut exact = 0;
    for _ in 0..100 {
        let b = [Rapidity(rng.random_range(-10.0..10.0)), Rapidity(rng.random_range(-10.0..10.0))];
        let g = g_value(&cfg, &b, &ResidueSpec::default()).unwrap().value;
        if g.re == 1.0 && g.im == 0.0 {
            exact += 1;
        }
    }
    outcome(exact == 100, format!("{exact}/100 exactly 1"))
}

fn four_spinon_g_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut cases = Vec::new();
    while cases.len() < 5 {
        let b: [f64; 4] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        if (0..4).all(|j| (j + 1..4).all(|k| (b[j] - b[k]).abs() > 0.05)) {
            cases.push(b);
        }
    }
    let mut worst = 0.0f64;
    for betas in &cases {
        for ell in 0..4 {
            let r = common::residue_g(ell, betas);
            let c = common::contour_g(ell, betas, 0.05);
            worst = worst.max((r - c).norm() / c.norm());
        }
    }
    outcome(worst < 1e-6, format!("5 quadruples × 4 positions, max relative deviation {worst:.2e}"))
}

fn aminus_edges(ctx: &DsfContext) -> Outcome {
    let quad = QuadratureSpec::default();
    let a: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&x| a_minus_sq_real(x, &quad).unwrap()).collect();
    let s: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|d| ctx.s2_pm(TWO_PI - d, PI).unwrap()).collect();
    let ok = a[0] > a[1] && a[1] > a[2] && s[0] > s[1] && s[1] > s[2] && s[2] < 1e-2;
    outcome(
        ok,
        format!(
            "|A₋|² at 0.2, 0.1, 0.05: {:.3e}, {:.3e}, {:.3e}; S₂ at w_u − δ: {:.3e}, {:.3e}, {:.3e}",
            a[0], a[1], a[2], s[0], s[1], s[2]
        ),
    )
}

fn aminus_two_schemes() -> Outcome {
    let mut worst = 0.0f64;
    for x in [0.5, 1.0, 2.0, 4.0] {
        let a = a_minus_sq_real(x, &QuadratureSpec::default()).unwrap();
        let b = common::aminus_sq_brute(x);
        worst = worst.max((a - b).abs() / b);
    }
    outcome(worst < 1e-7, format!("max relative deviation {worst:.2e}"))
}

fn generic_anchor(ctx: &DsfContext) -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let k = rng.random_range(0.05..TWO_PI - 0.05);
        let b = boundaries(k);
        let w = b.w_l + (b.w_u - b.w_l) * rng.random_range(0.01..0.99);
        let a = ctx.s2_pm(w, k).unwrap();
        let g = ctx.s2_pm_generic(w, k).unwrap();
        worst = worst.max((a - g).abs() / a);
    }
    let c2 = c_n(2, ctx.a_half).unwrap();
    let ok = worst < 1e-9 && (c2 - 0.125).abs() < 1e-15;
    outcome(ok, format!("200 points, max relative deviation {worst:.2e}; C₂ = {c2}"))
}

fn four_spinon_convergence(ctx: &DsfContext) -> Outcome {
    let coarse = FourSpinonSpec { nodes: 48, ..Default::default() };
    let fine = FourSpinonSpec { nodes: 96, ..Default::default() };
    let a = s4_pm(4.0, PI, &coarse, ctx).unwrap();
    let b = s4_pm(4.0, PI, &fine, ctx).unwrap();
    let doubling = (a.value - b.value).abs();
    let r = s4_pm(4.0, 2.0, &coarse, ctx).unwrap();
    let s = s4_pm(4.0, TWO_PI - 2.0, &coarse, ctx).unwrap();
    let reflection = (r.value - s.value).abs();
    let ok = a.value > 0.0
        && doubling <= 5.0 * a.est_error
        && reflection <= 5.0 * r.est_error.max(s.est_error);
    outcome(
        ok,
        format!(
            "S₄(4, π) = {:.6e} ± {:.1e}, doubling Δ = {doubling:.1e}; S₄(4, 2) − S₄(4, 2π − 2) = {reflection:.1e} (± {:.1e})",
            a.value, a.est_error, r.est_error
        ),
    )
}

fn sum_rule(ctx: &DsfContext) -> Outcome {
    let grid = |n| GridSpec { k_points: n, w_points: n, ..Default::default() };
    let run = |n, s| sum_rule_fraction(&grid(n), s, ctx).unwrap().integrated_intensity;
    let a64 = run(64, SumRuleScheme::EdgeAngle);
    let a128 = run(128, SumRuleScheme::EdgeAngle);
    let b64 = run(64, SumRuleScheme::Momentum);
    let b128 = run(128, SumRuleScheme::Momentum);
    let three_figures = |x: f64, y: f64| (x - y).abs() < 5e-4 * y;
    let fixture = (a128 - SUM_RULE_FIXTURE).abs() / SUM_RULE_FIXTURE;
    let ok = three_figures(a64, a128) && three_figures(b64, b128) && three_figures(a128, b128) && fixture < 1e-8;
    outcome(
        ok,
        format!(
            "(k, θ): {a64:.9}, {a128:.9}; (p₁, p₂): {b64:.9}, {b128:.9}; per (2π)²: {:.6}",
            a128 / (TWO_PI * TWO_PI)
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let ctx = ctx();
    let results = [
        ("1 dispersion identity", dispersion_identity()),
        ("2 XXZ limit", xxz_limit()),
        ("3 rapidity difference", rapidity_difference_closed_form()),
        ("4 g at n = 2", two_spinon_g_is_one()),
        ("5 g at n = 4 vs contour", four_spinon_g_oracle()),
        ("6 |A₋|² edges", aminus_edges(&ctx)),
        ("7 |A₋|² two schemes", aminus_two_schemes()),
        ("8 generic n = 2 anchor", generic_anchor(&ctx)),
        ("9 n = 4 self-convergence", four_spinon_convergence(&ctx)),
        ("10 sum rule", sum_rule(&ctx)),
    ];
    let mut failed = Vec::new();
    for (name, r) in &results {
        println!("{} criterion {name}: {}", if r.passed { "PASS" } else { "FAIL" }, r.detail);
        if !r.passed {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
