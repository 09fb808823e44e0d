use std::f64::consts::PI;

use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spinon_core::aminus::a_minus_sq_detailed;
use spinon_core::{
    boundaries, energy_of_rapidity, g_sum_sq_detailed, g_value, momentum_of_rapidity, s4_pm, s4_pm_monte_carlo,
    s_component, sum_rule_fraction, AminusArg, Axis, DsfContext, Error, FourSpinonSpec, GridSpec,
    QuadratureSpec, Rapidity, ResidueSpec, Result, SpinConfig, SumRuleScheme,
};

use crate::table::{Cell, Table};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Spinon momentum and energy over a rapidity range.
    Dispersion(DispersionArgs),
    /// Lower and upper edges of the two-spinon continuum over k.
    Boundaries(BoundariesArgs),
    /// |A₋(x)|² on the real axis.
    Aminus(AminusArgs),
    /// Σ|g|² at one rapidity tuple, or g for one spin configuration.
    Gfun(GfunArgs),
    /// Two-spinon S(w, k) on a (k, w) grid.
    Dsf2(Dsf2Args),
    /// Four-spinon S(w, k) at one k over a w range.
    Dsf4(Dsf4Args),
    /// Integrated two-spinon intensity over the zone.
    Sumrule(SumruleArgs),
    /// Invariant checks of every module.
    Selfcheck(SelfcheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dispersion(_) => "dispersion",
            Command::Boundaries(_) => "boundaries",
            Command::Aminus(_) => "aminus",
            Command::Gfun(_) => "gfun",
            Command::Dsf2(_) => "dsf2",
            Command::Dsf4(_) => "dsf4",
            Command::Sumrule(_) => "sumrule",
            Command::Selfcheck(_) => "selfcheck",
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct DispersionArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
    pub beta_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 5.0)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct BoundariesArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub k_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = TWO_PI)]
    pub k_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct AminusArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub x_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct GfunArgs {
    /// Rapidities, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = false)]
    pub betas: Vec<f64>,
    /// Spin configuration (±1 per rapidity); without it Σ|g|² over all
    /// configurations is reported.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    pub eps: Option<Vec<i8>>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct Dsf2Args {
    /// Single momentum; overrides the k range.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub k_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = TWO_PI)]
    pub k_max: f64,
    #[arg(long, default_value_t = 65)]
    pub k_points: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub w_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = TWO_PI)]
    pub w_max: f64,
    #[arg(long, default_value_t = 201)]
    pub w_points: usize,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct Dsf4Args {
    #[arg(long, allow_hyphen_values = true, default_value_t = PI)]
    pub k: f64,
    /// Single energy; overrides the w range.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub w_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 4.0 * PI)]
    pub w_max: f64,
    #[arg(long, default_value_t = 9)]
    pub w_points: usize,
    /// Tanh-sinh nodes of the inner rule; the outer half-panels use half.
    #[arg(long, default_value_t = 48)]
    pub grid: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1e-7)]
    pub jitter: f64,
    /// Use the seeded Monte Carlo estimate with this many samples.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EdgeAngle,
    Momentum,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct SumruleArgs {
    /// Nodes per axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Scheme::EdgeAngle)]
    pub scheme: Scheme,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
pub struct SelfcheckArgs {}

/// `points` values from `min` to `max` inclusive.
fn linspace(name: &str, min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min <= max) || points == 0 {
        return Err(Error::Domain(format!("bad {name} range: min = {min}, max = {max}, points = {points}")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { max } else { min + (max - min) * i as f64 / last }).collect())
}

/// Re-tag an error with the point it was raised at.
fn at(e: Error, point: String) -> Error {
    let m = |s: String| format!("{s} at {point}");
    match e {
        Error::Pole(s) => Error::Pole(m(s)),
        Error::Domain(s) => Error::Domain(m(s)),
        Error::Convergence(s) => Error::Convergence(m(s)),
        Error::Degeneracy(s) => Error::Degeneracy(m(s)),
        Error::Overflow(s) => Error::Overflow(m(s)),
    }
}

pub fn dispersion(a: &DispersionArgs) -> Result<Table> {
    let mut t = Table::new(&["beta", "p", "e"]);
    for b in linspace("beta", a.beta_min, a.beta_max, a.points)? {
        let r = Rapidity(b);
        t.rows.push(vec![Cell::Num(b), Cell::Num(momentum_of_rapidity(r).0), Cell::Num(energy_of_rapidity(r))]);
    }
    Ok(t)
}

pub fn boundaries_table(a: &BoundariesArgs) -> Result<Table> {
    let mut t = Table::new(&["k", "w_l", "w_u"]);
    for k in linspace("k", a.k_min, a.k_max, a.points)? {
        let b = boundaries(k);
        t.rows.push(vec![Cell::Num(k), Cell::Num(b.w_l), Cell::Num(b.w_u)]);
    }
    Ok(t)
}

pub fn aminus(a: &AminusArgs, quad: &QuadratureSpec) -> Result<Table> {
    if a.x_min < 0.0 {
        return Err(Error::Domain(format!("x_min must be ≥ 0, got {}", a.x_min)));
    }
    let xs = linspace("x", a.x_min, a.x_max, a.points)?;
    let values = xs
        .par_iter()
        .map(|&x| a_minus_sq_detailed(AminusArg::real(x), quad).map_err(|e| at(e, format!("x = {x}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["x", "a_minus_sq", "est_error"]);
    for (x, v) in xs.into_iter().zip(values) {
        t.rows.push(vec![Cell::Num(x), Cell::Num(v.value), Cell::Num(v.est_error)]);
    }
    Ok(t)
}

pub fn gfun(a: &GfunArgs, residue: &ResidueSpec) -> Result<Table> {
    if a.betas.len() < 2 {
        return Err(Error::Domain(format!("need at least two rapidities, got {}", a.betas.len())));
    }
    let betas: Vec<Rapidity> = a.betas.iter().map(|&b| Rapidity::new(b)).collect::<Result<_>>()?;
    match &a.eps {
        Some(eps) => {
            let cfg = SpinConfig::new(eps.clone())?;
            let g = g_value(&cfg, &betas, residue)?;
            let mut t = Table::new(&["n", "g_re", "g_im", "est_error", "depth"]);
            t.rows.push(vec![
                Cell::Int(betas.len() as u64),
                Cell::Num(g.value.re),
                Cell::Num(g.value.im),
                Cell::Num(g.est_error),
                Cell::Int(g.depth as u64),
            ]);
            Ok(t)
        }
        None => {
            let g = g_sum_sq_detailed(betas.len(), &betas, residue)?;
            let mut t = Table::new(&["n", "g_sum_sq", "est_error", "depth"]);
            t.rows.push(vec![
                Cell::Int(betas.len() as u64),
                Cell::Num(g.value),
                Cell::Num(g.est_error),
                Cell::Int(g.depth as u64),
            ]);
            Ok(t)
        }
    }
}

pub fn dsf2(a: &Dsf2Args, ctx: &DsfContext) -> Result<Table> {
    let ks = match a.k {
        Some(k) => vec![k],
        None => linspace("k", a.k_min, a.k_max, a.k_points)?,
    };
    let ws = linspace("w", a.w_min, a.w_max, a.w_points)?;
    if a.w_min < 0.0 {
        return Err(Error::Domain(format!("w_min must be ≥ 0, got {}", a.w_min)));
    }
    let points: Vec<(f64, f64)> = ks.iter().flat_map(|&k| ws.iter().map(move |&w| (w, k))).collect();
    let values = points
        .par_iter()
        .map(|&(w, k)| {
            let point = |e| at(e, format!("(w, k) = ({w}, {k})"));
            let pm = ctx.s2_pm(w, k).map_err(point)?;
            let zz = s_component(Axis::Z, 2, w, k, ctx, &FourSpinonSpec::default()).map_err(point)?;
            Ok((pm, zz))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["w", "k", "S2_pm", "S2_zz"]);
    for ((w, k), (pm, zz)) in points.into_iter().zip(values) {
        t.rows.push(vec![Cell::Num(w), Cell::Num(k), Cell::Num(pm), Cell::Num(zz)]);
    }
    Ok(t)
}

pub fn dsf4(a: &Dsf4Args, ctx: &DsfContext) -> Result<Table> {
    let ws = match a.w {
        Some(w) => vec![w],
        None => linspace("w", a.w_min, a.w_max, a.w_points)?,
    };
    let spec = FourSpinonSpec { nodes: a.grid, jitter: a.jitter };
    // points run one after another; each integral is parallel inside
    let mut t = Table::new(&["w", "k", "value", "est_error", "S4_zz"]);
    for w in ws {
        let p = match a.mc_samples {
            Some(n) => s4_pm_monte_carlo(w, a.k, n, a.seed, ctx)?,
            None => s4_pm(w, a.k, &spec, ctx)?,
        };
        t.rows.push(vec![Cell::Num(w), Cell::Num(a.k), Cell::Num(p.value), Cell::Num(p.est_error), Cell::Num(2.0 * p.value)]);
    }
    Ok(t)
}

pub fn sumrule(a: &SumruleArgs, ctx: &DsfContext) -> Result<Table> {
    let grid = GridSpec { k_points: a.grid, w_points: a.grid, quad: ctx.quad, residue: ctx.residue, ..Default::default() };
    let scheme = match a.scheme {
        Scheme::EdgeAngle => SumRuleScheme::EdgeAngle,
        Scheme::Momentum => SumRuleScheme::Momentum,
    };
    let r = sum_rule_fraction(&grid, scheme, ctx)?;
    let mut t = Table::new(&["scheme", "grid", "integrated_intensity", "per_zone", "refinement_delta"]);
    let name = serde_json::to_value(a.scheme).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    t.rows.push(vec![
        Cell::Text(name),
        Cell::Int(a.grid as u64),
        Cell::Num(r.integrated_intensity),
        Cell::Num(r.per_zone()),
        Cell::Num(r.refinement_delta),
    ]);
    Ok(t)
}
