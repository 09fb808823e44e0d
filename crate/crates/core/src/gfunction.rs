//! The contour-integral factor g_{ε₁…εₙ}(β₁…βₙ).
//!
//! One contour variable α_ℓ is attached to each position ℓ with ε_ℓ = +1. In
//! α_ℓ the only poles inside C_ℓ come from Γ(−1/4 + (α − β_j)/(2πi)):
//!
//!   α* = β_j + iπ/2 − 2πi m,  m ≥ 0,
//!
//! with residue (in the measure dα/2πi) 2πi (−1)^m / m! times the rest of the
//! integrand at α*. The cross factors between contour variables are entire,
//! so g is the sum over all assignments (j_ℓ, m_ℓ).
//!
//! The summand decays only algebraically in the depth m, so partial sums over
//! depth shells are taken at M = 8, 16, 32, … and accelerated by Richardson
//! extrapolation in 1/M.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::dispersion::Rapidity;
use crate::error::{Error, Result};
use crate::specfun::log_gamma;

const TWO_PI: f64 = 2.0 * PI;

/// Pole separation below which two rapidities are treated as coincident.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// First checkpoint depth of the residue series.
const FIRST_CHECKPOINT: usize = 8;

/// Richardson columns kept beyond the first.
const MAX_RICHARDSON_ORDER: usize = 4;

/// Spin configuration ε₁…εₙ with εⱼ = ±1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    pub eps: Vec<i8>,
}

impl SpinConfig {
    pub fn new(eps: Vec<i8>) -> Result<Self> {
        if eps.len() < 2 || eps.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::Domain(format!("spin configuration must have at least two ±1 entries, got {eps:?}")));
        }
        Ok(Self { eps })
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// True iff Σε = −2; otherwise g vanishes identically.
    pub fn selected(&self) -> bool {
        self.eps.iter().map(|&e| i32::from(e)).sum::<i32>() == -2
    }

    /// All configurations of length n with Σε = −2, in lexicographic order of
    /// the up-spin positions.
    pub fn admissible(n: usize) -> Result<Vec<SpinConfig>> {
        if n < 2 || n % 2 == 1 {
            return Err(Error::Domain(format!("spinon number must be even and at least 2, got {n}")));
        }
        let ups = (n - 2) / 2;
        let mut out = Vec::new();
        let mut pos: Vec<usize> = (0..ups).collect();
        loop {
            let mut eps = vec![-1i8; n];
            for &p in &pos {
                eps[p] = 1;
            }
            out.push(SpinConfig { eps });
            // next combination
            let mut i = ups;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if pos[i] < n - ups + i {
                    pos[i] += 1;
                    for t in i + 1..ups {
                        pos[t] = pos[t - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

/// Positions (0-based) carrying a contour variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LSet {
    pub indices: Vec<usize>,
}

/// The up-spin positions when Σε = −2, empty otherwise (check
/// [`SpinConfig::selected`] to tell the cases apart).
pub fn l_set(cfg: &SpinConfig) -> LSet {
    if !cfg.selected() {
        return LSet::default();
    }
    LSet { indices: cfg.eps.iter().enumerate().filter(|(_, &e)| e == 1).map(|(i, _)| i).collect() }
}

/// A candidate pole of the integrand in the contour variable at position `ell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSite {
    pub ell: usize,
    pub j: usize,
    /// Depth in the listing β_j + iπ/2 (m = 0) and β_j − (2m+1)iπ/2 (m ≥ 1).
    pub m: usize,
    pub location: Complex64,
    pub order: usize,
}

impl PoleSite {
    /// Whether the site is an actual pole of Γ(−1/4 + (α − β_j)/(2πi)).
    /// Sites β_j − (2m+1)iπ/2 with m even are regular points.
    pub fn is_genuine(&self) -> bool {
        self.m == 0 || self.m % 2 == 1
    }

    /// Depth m′ in α* = β_j + iπ/2 − 2πi m′, for genuine sites.
    pub fn gamma_depth(&self) -> Option<usize> {
        if self.m == 0 {
            Some(0)
        } else if self.m % 2 == 1 {
            Some(self.m.div_ceil(2))
        } else {
            None
        }
    }
}

/// The enclosed region listed for C_ℓ, up to listing depth `max_m`. The
/// order is 2 where two rapidities coincide.
pub fn enclosed_sites(ell: usize, betas: &[Rapidity], max_m: usize) -> Vec<PoleSite> {
    let mut out = Vec::new();
    for (j, b) in betas.iter().enumerate() {
        let order = 1 + betas
            .iter()
            .enumerate()
            .filter(|&(k, c)| k != j && (c.0 - b.0).abs() < DEGENERACY_TOL)
            .count();
        for m in 0..=max_m {
            let im = if m == 0 { FRAC_PI_2 } else { -((2 * m + 1) as f64) * FRAC_PI_2 };
            out.push(PoleSite { ell, j, m, location: Complex64::new(b.0, im), order });
        }
    }
    out
}

/// Controls of the residue series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueSpec {
    /// Largest depth m that may be summed.
    pub m_max: usize,
    /// Relative change between successive extrapolated checkpoints that
    /// counts as converged.
    pub tail_tol: f64,
    /// Number of successive converged checkpoints required.
    pub consecutive_small: usize,
}

impl Default for ResidueSpec {
    fn default() -> Self {
        Self { m_max: 4096, tail_tol: 1e-10, consecutive_small: 2 }
    }
}

impl ResidueSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_max < 1 || !(self.tail_tol > 0.0) || self.consecutive_small < 2 {
            return Err(Error::Domain(format!("invalid residue spec {self:?}")));
        }
        Ok(())
    }
}

/// g with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValue {
    pub value: Complex64,
    pub est_error: f64,
    /// Number of depth shells summed.
    pub depth: usize,
    /// Depth beyond which the shell magnitudes decrease monotonically.
    pub onset: usize,
}

impl GValue {
    fn exact(value: f64) -> Self {
        Self { value: Complex64::new(value, 0.0), est_error: 0.0, depth: 0, onset: 0 }
    }
}

/// Σ_ε |g_ε|² with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSumSq {
    pub value: f64,
    pub est_error: f64,
    pub depth: usize,
}

/// Pole weights w(j, m), the residue of everything that does not depend on
/// the contour position: 2πi (−1)^m/m! Γ(m − 1/2) Π_{k≠j} Γ(−m − iy_jk)
/// Γ(m − 1/2 + iy_jk) · i cosh β_j with y_jk = (β_j − β_k)/2π. The m = 0 seed
/// is assembled in log space; deeper weights follow from the ratio
///
///   w(j, m+1)/w(j, m) = −(m − 1/2)/(m + 1) Π_{k≠j} (m − 1/2 + iy)/(−m − 1 − iy),
///
/// whose factors all have modulus below one, so no overflow can occur. The
/// table is shared by all configurations.
struct PoleTable {
    betas: Vec<f64>,
    y: Vec<Vec<f64>>,
    w: Vec<Vec<Complex64>>,
}

fn ln_cosh(b: f64) -> f64 {
    let a = b.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl PoleTable {
    fn new(betas: &[Rapidity]) -> Result<Self> {
        let b: Vec<f64> = betas.iter().map(|r| r.0).collect();
        if let Some(bad) = b.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("rapidity must be finite, got {bad}")));
        }
        let n = b.len();
        for j in 0..n {
            for k in j + 1..n {
                if (b[j] - b[k]).abs() < DEGENERACY_TOL {
                    return Err(Error::Degeneracy(format!(
                        "rapidities {} and {} (positions {j}, {k}) give coincident poles",
                        b[j], b[k]
                    )));
                }
            }
        }
        let y = (0..n).map(|j| (0..n).map(|k| (b[j] - b[k]) / TWO_PI).collect()).collect();
        let mut table = Self { betas: b, y, w: vec![Vec::new(); n] };
        let i_two_pi = Complex64::new(0.0, TWO_PI);
        let i = Complex64::i();
        let lg_half = log_gamma(Complex64::new(-0.5, 0.0))?;
        for j in 0..n {
            let mut lw = i_two_pi.ln() + lg_half + i.ln() + ln_cosh(table.betas[j]);
            for k in (0..n).filter(|&k| k != j) {
                let yk = table.y[j][k];
                lw += log_gamma(Complex64::new(0.0, -yk))? + log_gamma(Complex64::new(-0.5, yk))?;
            }
            let w = lw.exp();
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::Overflow(format!("pole weight overflows at β = {}", table.betas[j])));
            }
            table.w[j].push(w);
        }
        Ok(table)
    }

    fn depth(&self) -> usize {
        self.w[0].len()
    }

    /// Extend every row to at least `depth` entries.
    fn extend_to(&mut self, depth: usize) {
        let n = self.betas.len();
        while self.depth() < depth {
            let last = self.depth() - 1;
            let m = last as f64;
            for j in 0..n {
                let mut ratio = Complex64::new(-(m - 0.5) / (m + 1.0), 0.0);
                for k in (0..n).filter(|&k| k != j) {
                    let yk = self.y[j][k];
                    ratio *= Complex64::new(m - 0.5, yk) / Complex64::new(-(m + 1.0), -yk);
                }
                let next = self.w[j][last] * ratio;
                self.w[j].push(next);
            }
        }
    }

    /// Position prefactor Π_{k<ℓ}(α* − β_k + iπ/2) Π_{k>ℓ}(β_k − α* + iπ/2)
    /// at α* = β_j + iπ/2 − 2πi m.
    fn prefactor(&self, ell: usize, j: usize, m: usize) -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        let tm = TWO_PI * m as f64;
        for k in 0..self.betas.len() {
            let d = self.betas[j] - self.betas[k];
            if k < ell {
                p *= Complex64::new(d, PI - tm);
            } else if k > ell {
                p *= Complex64::new(-d, tm);
            }
        }
        p
    }

    /// (α_ℓ − α_ℓ′ + πi) sinh(α_ℓ − α_ℓ′) at two pole sites.
    fn cross(&self, j: usize, m: usize, jp: usize, mp: usize) -> Complex64 {
        let d = self.betas[j] - self.betas[jp];
        Complex64::new(d, PI - TWO_PI * (m as f64 - mp as f64)) * d.sinh()
    }

    /// Sum of all terms with max(m_ℓ) = `shell` for the given positions.
    fn shell(&self, ells: &[usize], shell: usize) -> Complex64 {
        let n = self.betas.len();
        let l = ells.len();
        if l == 1 {
            return (0..n).map(|j| self.w[j][shell] * self.prefactor(ells[0], j, shell)).sum();
        }
        let mut total = Complex64::new(0.0, 0.0);
        // odometer over (j_ℓ, m_ℓ) with m_ℓ ≤ shell, keeping those touching the shell
        let mut js = vec![0usize; l];
        let mut ms = vec![0usize; l];
        loop {
            if ms.contains(&shell) && (0..l).all(|a| (a + 1..l).all(|b| js[a] != js[b])) {
                let mut term = Complex64::new(1.0, 0.0);
                for a in 0..l {
                    term *= self.w[js[a]][ms[a]] * self.prefactor(ells[a], js[a], ms[a]);
                }
                for a in 0..l {
                    for b in a + 1..l {
                        term *= self.cross(js[a], ms[a], js[b], ms[b]);
                    }
                }
                total += term;
            }
            let mut idx = 0;
            loop {
                if idx == l {
                    return total;
                }
                js[idx] += 1;
                if js[idx] < n {
                    break;
                }
                js[idx] = 0;
                ms[idx] += 1;
                if ms[idx] <= shell {
                    break;
                }
                ms[idx] = 0;
                idx += 1;
            }
        }
    }
}

/// Tail exponent of the depth partial sums: the shell sums decay like
/// M^{−(n/2 + 2)}, so the remainder after M shells goes like M^{−(n/2 + 1)}.
fn tail_exponent(n: usize) -> i32 {
    (n / 2 + 1) as i32
}

fn evaluate(table: &mut PoleTable, ells: &[usize], spec: &ResidueSpec) -> Result<GValue> {
    let n = table.betas.len();
    let p = tail_exponent(n);
    let mut partial = Complex64::new(0.0, 0.0);
    let mut shells: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut best_prev: Option<Complex64> = None;
    let mut small = 0;
    let mut checkpoint = FIRST_CHECKPOINT;
    let mut depth = 0;
    loop {
        if checkpoint > spec.m_max + 1 {
            return Err(Error::Convergence(format!(
                "residue series not converged within m_max = {} for β = {:?}",
                spec.m_max, table.betas
            )));
        }
        table.extend_to(checkpoint);
        while depth < checkpoint {
            let s = table.shell(ells, depth);
            partial += s;
            shells.push(s.norm());
            depth += 1;
        }
        let mut row = vec![partial];
        if let Some(prev) = rows.last() {
            for i in 1..=prev.len().min(MAX_RICHARDSON_ORDER) {
                let f = 2f64.powi(p + i as i32 - 1);
                row.push((row[i - 1] * f - prev[i - 1]) / (f - 1.0));
            }
        }
        let best = *row.last().unwrap();
        rows.push(row);
        if !(best.re.is_finite() && best.im.is_finite()) {
            return Err(Error::Overflow(format!("residue sum overflows for β = {:?}", table.betas)));
        }
        if let Some(prev) = best_prev {
            let delta = (best - prev).norm();
            if delta <= spec.tail_tol * best.norm() {
                small += 1;
            } else {
                small = 0;
            }
            // a bare first difference has nothing to extrapolate; count from the
            // third checkpoint on
            if small >= spec.consecutive_small - 1 && rows.len() >= 3 {
                let onset = onset_depth(&shells);
                return Ok(GValue { value: best, est_error: delta, depth, onset });
            }
        }
        best_prev = Some(best);
        checkpoint *= 2;
    }
}

fn onset_depth(shells: &[f64]) -> usize {
    let mut onset = shells.len().saturating_sub(1);
    while onset > 0 && shells[onset] < shells[onset - 1] {
        onset -= 1;
    }
    onset
}

fn check_betas(n: usize, betas: &[Rapidity]) -> Result<()> {
    if betas.len() != n {
        return Err(Error::Domain(format!("expected {n} rapidities, got {}", betas.len())));
    }
    Ok(())
}

/// g_ε(β₁…βₙ) by residue summation.
pub fn g_value(cfg: &SpinConfig, betas: &[Rapidity], spec: &ResidueSpec) -> Result<GValue> {
    spec.validate()?;
    check_betas(cfg.len(), betas)?;
    if !cfg.selected() {
        return Ok(GValue::exact(0.0));
    }
    let ells = l_set(cfg).indices;
    if ells.is_empty() {
        return Ok(GValue::exact(1.0));
    }
    let mut table = PoleTable::new(betas)?;
    evaluate(&mut table, &ells, spec)
}

/// Σ_ε |g_ε|² over all configurations with Σε = −2; exactly 1 for n = 2.
pub fn g_sum_sq_detailed(n: usize, betas: &[Rapidity], spec: &ResidueSpec) -> Result<GSumSq> {
    spec.validate()?;
    let configs = SpinConfig::admissible(n)?;
    check_betas(n, betas)?;
    if n == 2 {
        return Ok(GSumSq { value: 1.0, est_error: 0.0, depth: 0 });
    }
    let mut table = PoleTable::new(betas)?;
    let mut out = GSumSq { value: 0.0, est_error: 0.0, depth: 0 };
    for cfg in &configs {
        let g = evaluate(&mut table, &l_set(cfg).indices, spec)?;
        out.value += g.value.norm_sqr();
        out.est_error += 2.0 * g.value.norm() * g.est_error + g.est_error * g.est_error;
        out.depth = out.depth.max(g.depth);
    }
    Ok(out)
}

pub fn g_sum_sq(n: usize, betas: &[Rapidity], spec: &ResidueSpec) -> Result<f64> {
    Ok(g_sum_sq_detailed(n, betas, spec)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rap(v: &[f64]) -> Vec<Rapidity> {
        v.iter().map(|&b| Rapidity(b)).collect()
    }

    const BETAS: [f64; 4] = [0.3, -0.2, 0.9, -1.1];

    // Independent 30-digit evaluation, contour variable at position ℓ.
    const REFERENCE: [(f64, f64); 4] = [
        (15_975.368_301_008_022, 1_550.882_103_779_807),
        (-373.532_434_935_305_7, 1_470.529_424_368_630_8),
        (-1_508.807_733_150_280_5, 4_554.049_593_831_654),
        (14_840.093_002_793_047, 4_634.402_273_242_83),
    ];
    const REFERENCE_SUM: f64 = 524_641_524.161_036_86;

    fn cfg_up_at(ell: usize) -> SpinConfig {
        let mut eps = vec![-1i8; 4];
        eps[ell] = 1;
        SpinConfig::new(eps).unwrap()
    }

    #[test]
    fn l_set_examples() {
        let c = SpinConfig::new(vec![-1, -1]).unwrap();
        assert!(c.selected() && l_set(&c).indices.is_empty());
        assert_eq!(l_set(&SpinConfig::new(vec![1, -1, -1, -1]).unwrap()).indices, vec![0]);
        let c = SpinConfig::new(vec![1, 1, -1, -1]).unwrap();
        assert!(!c.selected() && l_set(&c).indices.is_empty());
        assert!(SpinConfig::new(vec![1, 0]).is_err());
    }

    #[test]
    fn admissible_configurations() {
        assert_eq!(SpinConfig::admissible(2).unwrap().len(), 1);
        assert_eq!(SpinConfig::admissible(4).unwrap().len(), 4);
        let six = SpinConfig::admissible(6).unwrap();
        assert_eq!(six.len(), 15);
        assert!(six.iter().all(SpinConfig::selected));
        assert!(SpinConfig::admissible(3).is_err());
    }

    #[test]
    fn two_spinon_value_is_one() {
        let cfg = SpinConfig::new(vec![-1, -1]).unwrap();
        let g = g_value(&cfg, &rap(&[0.4, 0.4]), &ResidueSpec::default()).unwrap();
        assert_eq!(g.value, Complex64::new(1.0, 0.0));
        assert_eq!(g_sum_sq(2, &rap(&[1.0, -3.0]), &ResidueSpec::default()).unwrap(), 1.0);
    }

    #[test]
    fn unselected_configuration_vanishes() {
        let cfg = SpinConfig::new(vec![1, 1, 1, -1]).unwrap();
        let g = g_value(&cfg, &rap(&BETAS), &ResidueSpec::default()).unwrap();
        assert_eq!(g.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn four_spinon_reference_values() {
        let spec = ResidueSpec::default();
        for (ell, (re, im)) in REFERENCE.into_iter().enumerate() {
            let g = g_value(&cfg_up_at(ell), &rap(&BETAS), &spec).unwrap();
            let want = Complex64::new(re, im);
            assert!((g.value - want).norm() < 1e-9 * want.norm(), "ell = {ell}: {} vs {want}", g.value);
            assert!(g.est_error <= spec.tail_tol * g.value.norm());
            assert!(g.onset < g.depth);
        }
        let s = g_sum_sq(4, &rap(&BETAS), &spec).unwrap();
        assert!(((s - REFERENCE_SUM) / REFERENCE_SUM).abs() < 1e-9);
    }

    #[test]
    fn recurrence_matches_direct_log_gamma() {
        let betas = rap(&BETAS);
        let mut t = PoleTable::new(&betas).unwrap();
        t.extend_to(101);
        let m = 100.0;
        for j in 0..4 {
            let mut lw = Complex64::new(0.0, TWO_PI).ln()
                + log_gamma(Complex64::new(m - 0.5, 0.0)).unwrap()
                - log_gamma(Complex64::new(m + 1.0, 0.0)).unwrap()
                + Complex64::i().ln()
                + BETAS[j].cosh().ln();
            for k in (0..4).filter(|&k| k != j) {
                let y = (BETAS[j] - BETAS[k]) / TWO_PI;
                lw += log_gamma(Complex64::new(-m, -y)).unwrap() + log_gamma(Complex64::new(m - 0.5, y)).unwrap();
            }
            let direct = lw.exp();
            assert!((t.w[j][100] - direct).norm() < 1e-11 * direct.norm(), "j = {j}");
        }
    }

    #[test]
    fn shell_sums_decay_with_expected_power() {
        let betas = rap(&BETAS);
        let mut t = PoleTable::new(&betas).unwrap();
        t.extend_to(401);
        let (a, b) = (t.shell(&[1], 200).norm(), t.shell(&[1], 400).norm());
        let power = (a / b).log2();
        assert!((power - f64::from(tail_exponent(4) + 1)).abs() < 0.1, "{power}");
    }

    #[test]
    fn enclosure_listing_contains_regular_points() {
        let sites = enclosed_sites(0, &rap(&BETAS), 4);
        let genuine: Vec<_> = sites.iter().filter(|s| s.is_genuine()).collect();
        assert_eq!(sites.len(), 20);
        assert_eq!(genuine.len(), 12);
        for s in &sites {
            match s.gamma_depth() {
                Some(mp) => {
                    assert_eq!(s.location.re, BETAS[s.j]);
                    assert!((s.location.im - (FRAC_PI_2 - TWO_PI * mp as f64)).abs() < 1e-12);
                }
                None => assert_eq!(s.m % 2, 0),
            }
        }
    }

    #[test]
    fn coincident_rapidities_are_rejected() {
        let cfg = cfg_up_at(0);
        let r = g_value(&cfg, &rap(&[0.3, 0.3 + 1e-9, 0.9, -1.1]), &ResidueSpec::default());
        assert!(matches!(r, Err(Error::Degeneracy(_))));
        assert!(enclosed_sites(0, &rap(&[0.3, 0.3, 1.0, 2.0]), 0)[0].order == 2);
    }

    #[test]
    fn depth_limit_is_reported() {
        let spec = ResidueSpec { m_max: 20, tail_tol: 1e-14, consecutive_small: 2 };
        let r = g_value(&cfg_up_at(0), &rap(&BETAS), &spec);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn sum_is_symmetric_under_permutation_and_reflection() {
        let spec = ResidueSpec::default();
        let base = g_sum_sq(4, &rap(&BETAS), &spec).unwrap();
        let perm = g_sum_sq(4, &rap(&[0.9, 0.3, -1.1, -0.2]), &spec).unwrap();
        let refl = g_sum_sq(4, &rap(&BETAS.map(|b| -b)), &spec).unwrap();
        assert!(((perm - base) / base).abs() < 1e-8);
        assert!(((refl - base) / base).abs() < 1e-8);
    }
}
