//! Two-dimensional criterion: `G₁`, `G₂`, the angle analysis, the sufficient
//! condition, critical-load solving and grid certification of `G₁ ≥ 0`.
//!
//! Notation: `Y = h'(λ²)`, `Λ = (λ₁, λ₂)` the singular values, `Λ₀ = (λ, λ)`,
//! and `Λ − Λ₀ = ρ(cos μ, sin μ)` in polar form.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::reduce::par_argmin;
use crate::search::bisect_predicate;
use crate::svcalc::SingularSpectrum;
use crate::volumetric::Material2D;
use crate::zhang::{c1, c2, little_f};

/// Relative margin separating a strict inequality from equality.
pub const STRICT_REL_TOL: f64 = 1e-9;

fn check_positive<const N: usize>(l: &SingularSpectrum<N>) -> Result<()> {
    match l.values().into_iter().find(|v| !(*v > 0.0)) {
        Some(v) => Err(Error::Domain { what: "singular value", value: v }),
        None => Ok(()),
    }
}

/// `f_{√2λ}(|Λ−Λ₀|) + Y(λ₁−λ)(λ₂−λ)`.
pub fn g1(l: &SingularSpectrum<2>, lambda: f64, material: &Material2D) -> Result<f64> {
    check_positive(l)?;
    let [l1, l2] = l.values();
    Ok(g1_raw(l1, l2, lambda, material.q(), material.hprime_at_load(lambda)))
}

fn g1_raw(l1: f64, l2: f64, lambda: f64, q: f64, y: f64) -> f64 {
    let (d1, d2) = (l1 - lambda, l2 - lambda);
    little_f(d1.hypot(d2), SQRT_2 * lambda, q) + y * d1 * d2
}

/// `λY(λ₁ + λ₂ − 2λ)`.
pub fn g2(l: &SingularSpectrum<2>, lambda: f64, material: &Material2D) -> Result<f64> {
    check_positive(l)?;
    Ok(lambda * material.hprime_at_load(lambda) * (l.sum() - 2.0 * lambda))
}

/// `cos μ |sin μ|^{q−1}`.
pub fn e_mu(mu: f64, q: f64) -> f64 {
    mu.cos() * mu.sin().abs().powf(q - 1.0)
}

/// `(q−1)^{(q−1)/2} q^{−q/2}`, attained where `cos² μ = 1/q`.
pub fn e_max(q: f64) -> f64 {
    (q - 1.0).powf(0.5 * (q - 1.0)) * q.powf(-0.5 * q)
}

/// Maximiser of [`e_mu`] in `(−π/4, 0)`.
pub fn e_argmax(q: f64) -> f64 {
    -(1.0 / q.sqrt()).acos()
}

/// `((q−1)^{q−1} q^{−q} / 2^{2−q})^{1/2}`.
pub fn y_q(q: f64) -> f64 {
    ((q - 1.0).powf(q - 1.0) * q.powf(-q) / 2f64.powf(2.0 - q)).sqrt()
}

/// `t²/2` on `[0, 1]`, `t^q/q + 1/2 − 1/q` beyond.
pub fn g_growth(t: f64, q: f64) -> f64 {
    if t <= 1.0 {
        0.5 * t * t
    } else {
        t.powf(q) / q + 0.5 - 1.0 / q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    HprimeNonpositive,
    ConditionChecked,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::HprimeNonpositive => "hprime_nonpositive",
            Self::ConditionChecked => "condition_checked",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Criterion2DReport {
    pub lambda: f64,
    pub q: f64,
    pub hprime_at_lambda_sq: f64,
    /// `C₂ / (Y λ^{2−q})`; `+∞` when `Y ≤ 0`.
    pub lhs_second: f64,
    pub rhs_second: f64,
    /// `C₁(√2λ, q)`.
    pub lhs_first: f64,
    pub rhs_first: f64,
    pub satisfied: bool,
    pub strict: bool,
    pub branch: Branch,
}

impl Criterion2DReport {
    pub fn second_holds(&self) -> bool {
        self.lhs_second >= self.rhs_second
    }

    pub fn first_holds(&self) -> bool {
        self.lhs_first >= self.rhs_first
    }
}

pub fn check_sufficient_2d(lambda: f64, material: &Material2D) -> Criterion2DReport {
    let q = material.q();
    let y = material.hprime_at_load(lambda);
    let rhs_second = e_max(q);
    let (branch, lhs_second) = if y <= 0.0 {
        (Branch::HprimeNonpositive, f64::INFINITY)
    } else {
        (Branch::ConditionChecked, c2(q) / (y * lambda.powf(2.0 - q)))
    };
    let satisfied = y <= 0.0 || lhs_second >= rhs_second;
    let strict = satisfied && (y <= 0.0 || lhs_second > rhs_second * (1.0 + STRICT_REL_TOL));
    Criterion2DReport {
        lambda,
        q,
        hprime_at_lambda_sq: y,
        lhs_second,
        rhs_second,
        lhs_first: c1(SQRT_2 * lambda, q),
        rhs_first: 0.5 * y,
        satisfied,
        strict,
        branch,
    }
}

/// Points in the monotonicity scan of a critical-load bracket.
pub const LOAD_SCAN_POINTS: usize = 1000;
/// Final bracket width of the critical-load bisection.
pub const LOAD_BISECT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalLoad {
    pub lambda_star: f64,
    /// The criterion holds on the whole bracket; `lambda_star` is its upper end.
    pub never_violated: bool,
    /// The scan saw more than one change of the criterion; the first is returned.
    pub conservative: bool,
}

/// Largest load in the bracket up to which `holds` is true, by a uniform scan
/// followed by bisection inside the first true→false cell.
pub fn solve_critical_load<P: Fn(f64) -> bool + Sync>(bracket: (f64, f64), holds: P) -> Result<CriticalLoad> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidBracket { lo, hi, reason: "need 0 < lo < hi".into() });
    }
    let n = LOAD_SCAN_POINTS;
    let at = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let flags = crate::reduce::par_map(n, |i| holds(at(i)));
    if !flags[0] {
        return Err(Error::InvalidBracket { lo, hi, reason: "criterion fails at the lower end".into() });
    }
    let changes = flags.windows(2).filter(|w| w[0] != w[1]).count();
    let Some(first_fail) = flags.iter().position(|f| !f) else {
        return Ok(CriticalLoad { lambda_star: hi, never_violated: true, conservative: false });
    };
    let (last_true, _) = bisect_predicate(at(first_fail - 1), at(first_fail), LOAD_BISECT_TOL, &holds);
    Ok(CriticalLoad { lambda_star: last_true, never_violated: false, conservative: changes > 1 })
}

pub fn critical_load_2d(material: &Material2D, bracket: (f64, f64)) -> Result<CriticalLoad> {
    solve_critical_load(bracket, |l| check_sufficient_2d(l, material).satisfied)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarGrid {
    pub n_rho: usize,
    pub n_mu: usize,
    /// Upper radius as a multiple of `λ`.
    pub rho_max_factor: f64,
    /// Lower radius as a multiple of `λ`.
    pub rho_min_factor: f64,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self { n_rho: 1000, n_mu: 1000, rho_max_factor: 1e3, rho_min_factor: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint2 {
    pub rho: f64,
    pub mu: f64,
    pub lambdas: [f64; 2],
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G1Certification {
    pub lambda: f64,
    pub min: f64,
    pub argmin: GridPoint2,
    pub evaluated: usize,
    /// Lower bound on `G₁/ρ^q` for `ρ > ρ_max`; `−∞` when no bound exists.
    pub tail_margin: f64,
    pub tail_certified: bool,
}

impl G1Certification {
    pub fn certified(&self) -> bool {
        self.min >= 0.0 && self.tail_certified
    }
}

/// Lower bound on `G₁/ρ^q` valid for all `ρ ≥ ρ_max ≥ √2λ` inside `ℝ^{++}`:
/// a negative coordinate `sin μ` forces `ρ|sin μ| < λ`, so
/// `Y ρ² |sin μ cos μ| ≤ Y λ ρ`.
pub fn tail_margin_2d(lambda: f64, material: &Material2D, rho_max: f64) -> f64 {
    let q = material.q();
    let y = material.hprime_at_load(lambda);
    if y < 0.0 || rho_max < SQRT_2 * lambda {
        return f64::NEG_INFINITY;
    }
    c2(q) - y * lambda.powf(2.0 - q) * (lambda / rho_max).powf(q - 1.0)
}

/// Exhaustive evaluation of `G₁` on a polar grid restricted to `ℝ^{++}`,
/// with `ρ` log-spaced. Ties resolve to the lowest `(ρ, μ)` index.
pub fn grid_verify_g1(lambda: f64, material: &Material2D, grid: &PolarGrid) -> G1Certification {
    let q = material.q();
    let y = material.hprime_at_load(lambda);
    let rho_min = grid.rho_min_factor * lambda;
    let rho_max = grid.rho_max_factor * lambda;
    let (n_rho, n_mu) = (grid.n_rho.max(2), grid.n_mu.max(1));
    let log_step = (rho_max / rho_min).ln() / (n_rho - 1) as f64;
    let point = |i: usize| {
        let rho = rho_min * (log_step * (i / n_mu) as f64).exp();
        let mu = 2.0 * PI * (i % n_mu) as f64 / n_mu as f64;
        let (s, c) = mu.sin_cos();
        (rho, mu, lambda + rho * c, lambda + rho * s)
    };
    let value = |i: usize| {
        let (_, _, l1, l2) = point(i);
        if l1 > 0.0 && l2 > 0.0 {
            g1_raw(l1, l2, lambda, q, y)
        } else {
            f64::NAN
        }
    };
    let n = n_rho * n_mu;
    let evaluated = (0..n).filter(|&i| !value(i).is_nan()).count();
    let (idx, min) = par_argmin(n, value).unwrap_or((0, f64::INFINITY));
    let (rho, mu, l1, l2) = point(idx);
    let tail_margin = tail_margin_2d(lambda, material, rho_max);
    G1Certification {
        lambda,
        min,
        argmin: GridPoint2 { rho, mu, lambdas: [l1, l2], value: min },
        evaluated,
        tail_margin,
        tail_certified: tail_margin > 0.0,
    }
}

/// Radius where `C₂ρ^q = Y|sin μ cos μ|ρ²`.
pub fn rho_bar(mu: f64, lambda: f64, material: &Material2D) -> f64 {
    let y = material.hprime_at_load(lambda);
    let sc = (mu.sin() * mu.cos()).abs();
    (c2(material.q()) / (y * sc)).powf(1.0 / (2.0 - material.q()))
}

/// Pointwise negativity of `G₁` (not a failure of the energy inequality).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G1Counterexample {
    pub lambda: f64,
    pub rho: f64,
    pub mu: f64,
    pub lambdas: [f64; 2],
    pub g1: f64,
}

/// Probes `G₁` just beyond `ρ̄(μ*)` along the maximising angle of `e`.
/// Returns `None` unless `Y > 0` and the probe lies in `ℝ^{++}` with `G₁ < 0`.
pub fn counterexample_2d(lambda: f64, material: &Material2D) -> Option<G1Counterexample> {
    let y = material.hprime_at_load(lambda);
    if !(y > 0.0) {
        return None;
    }
    let mu = e_argmax(material.q());
    let rho = rho_bar(mu, lambda, material) * (1.0 + 1e-3);
    let (s, c) = mu.sin_cos();
    let (l1, l2) = (lambda + rho * c, lambda + rho * s);
    if !(l1 > 0.0 && l2 > 0.0) {
        return None;
    }
    let g = g1_raw(l1, l2, lambda, material.q(), y);
    (g < 0.0).then_some(G1Counterexample { lambda, rho, mu, lambdas: [l1, l2], g1: g })
}

/// Explicit `c₀ > 0` with `G₁(Λ) ≥ c₀ g(|Λ−Λ₀|)` on `ℝ^{++}`, under the strict
/// condition. Inner region: `G₁ ≥ (C₁ − Y/2)ρ²`; outer region:
/// `G₁ ≥ (C₂ − Yλ^{2−q}e_max)ρ^q`; and `g(t) ≤ min(t²/2, t^q/q)`.
pub fn c0_lower_bound(lambda: f64, material: &Material2D) -> Result<f64> {
    let report = check_sufficient_2d(lambda, material);
    let y = report.hprime_at_lambda_sq;
    if !(y > 0.0) {
        return Err(Error::HprimeNonpositive(y));
    }
    if !report.strict {
        return Err(Error::ConditionNotStrict { lhs: report.lhs_second, rhs: report.rhs_second });
    }
    let q = material.q();
    let inner = 2.0 * (report.lhs_first - report.rhs_first);
    let eps = c2(q) - y * lambda.powf(2.0 - q) * e_max(q);
    let c0 = inner.min(q * eps);
    if !(c0 > 0.0) {
        return Err(Error::ConditionNotStrict { lhs: report.lhs_first, rhs: report.rhs_first });
    }
    Ok(c0)
}
