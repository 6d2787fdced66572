//! Three-dimensional criterion built on
//! `F₁ = κ|Λ−Λ₀|^q + Y Π(λᵢ−λ)` and `F₂ = γ|Λ−Λ₀|² + λY Σ_{i<j}(λᵢ−λ)(λⱼ−λ)`,
//! with `Y = h'(λ³)` and `Λ − Λ₀ = ρ(cos φ sin θ, sin φ sin θ, cos θ)`.

pub mod conjecture;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::critload2d::{solve_critical_load, Branch, CriticalLoad, STRICT_REL_TOL};
use crate::error::{Error, Result};
use crate::reduce::par_argmin;
use crate::search::{zoom_maximize, zoom_maximize_1d, Box2};
use crate::svcalc::SingularSpectrum;
use crate::volumetric::Material3D;
use crate::zhang::{kappa_bounds, kappa_numeric};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KappaMode {
    LowerBound,
    Numeric,
}

impl KappaMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LowerBound => "lower_bound",
            Self::Numeric => "numeric",
        }
    }
}

/// Grid resolution of the numeric κ search.
pub const KAPPA_RESOLUTION: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaUsed {
    pub value: f64,
    pub mode: KappaMode,
}

impl KappaUsed {
    pub fn resolve(q: f64, mode: KappaMode) -> Result<Self> {
        let value = match mode {
            KappaMode::LowerBound => kappa_bounds(q).0,
            KappaMode::Numeric => kappa_numeric(q, KAPPA_RESOLUTION)?.numeric,
        };
        Ok(Self { value, mode })
    }
}

fn check_positive(l: &SingularSpectrum<3>) -> Result<()> {
    match l.values().into_iter().find(|v| !(*v > 0.0)) {
        Some(v) => Err(Error::Domain { what: "singular value", value: v }),
        None => Ok(()),
    }
}

fn f1_raw(d: [f64; 3], q: f64, kappa: f64, y: f64) -> f64 {
    let rho = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    kappa * rho.powf(q) + y * d[0] * d[1] * d[2]
}

fn f2_raw(d: [f64; 3], lambda: f64, gamma: f64, y: f64) -> f64 {
    let rho2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    gamma * rho2 + lambda * y * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2])
}

pub fn f1(l: &SingularSpectrum<3>, lambda: f64, material: &Material3D, kappa: &KappaUsed) -> Result<f64> {
    check_positive(l)?;
    let d = l.values().map(|v| v - lambda);
    Ok(f1_raw(d, material.q(), kappa.value, material.hprime_at_load(lambda)))
}

pub fn f2(l: &SingularSpectrum<3>, lambda: f64, material: &Material3D) -> Result<f64> {
    check_positive(l)?;
    let d = l.values().map(|v| v - lambda);
    Ok(f2_raw(d, lambda, material.gamma(), material.hprime_at_load(lambda)))
}

pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [cp * st, sp * st, ct]
}

/// Positive radii where a coordinate of `Λ₀ + ρ·l(θ, φ)` reaches zero.
pub fn exit_radii(theta: f64, phi: f64, lambda: f64) -> [Option<f64>; 3] {
    direction(theta, phi).map(|c| (c < 0.0).then(|| -lambda / c))
}

/// `(q−2)^{(q−2)/2} q^{−q/2}`.
pub fn main_threshold(q: f64) -> f64 {
    (q - 2.0).powf(0.5 * (q - 2.0)) * q.powf(-0.5 * q)
}

/// `4 (q−2)^{(q−2)/2} q^{−q/2}`.
pub fn s_closed(q: f64) -> f64 {
    4.0 * main_threshold(q)
}

/// `|sin φ| |cos φ|^{q−2}`.
pub fn f_phi(phi: f64, q: f64) -> f64 {
    phi.sin().abs() * phi.cos().abs().powf(q - 2.0)
}

/// Maximum of [`f_phi`] on `[π/2, 5π/4]`, at `cos² φ = (q−2)/(q−1)`:
/// `(q−2)^{(q−2)/2} / (q−1)^{(q−1)/2}`.
pub fn f_phi_max(q: f64) -> f64 {
    (q - 2.0).powf(0.5 * (q - 2.0)) / (q - 1.0).powf(0.5 * (q - 1.0))
}

/// `|cos θ|^{q−2} sin² θ`, maximal where `sin² θ = 2/q`.
pub fn r_theta(theta: f64, q: f64) -> f64 {
    theta.cos().abs().powf(q - 2.0) * theta.sin().powi(2)
}

/// The angular ratios whose suprema define `s₁, s₂, s₃`.
pub fn m_ratio(i: usize, theta: f64, phi: f64, q: f64) -> f64 {
    let num = ((2.0 * phi).sin() * (2.0 * theta).sin() * theta.sin()).abs();
    let den = match i {
        1 => (phi.cos() * theta.sin()).abs(),
        2 => (phi.sin() * theta.sin()).abs(),
        _ => theta.cos().abs(),
    };
    num / den.powf(3.0 - q)
}

/// Closed boxes in `(θ, φ)` whose union is the angle set `Sᵢ`.
pub fn angle_boxes(i: usize) -> Vec<Box2> {
    let upper = (0.0, FRAC_PI_2);
    let lower = (FRAC_PI_2, PI);
    match i {
        1 => vec![Box2 { x: upper, y: (FRAC_PI_2, PI) }, Box2 { x: lower, y: (PI, 5.0 * FRAC_PI_4) }],
        2 => vec![Box2 { x: lower, y: (PI, 5.0 * FRAC_PI_4) }],
        _ => vec![Box2 { x: lower, y: (FRAC_PI_4, FRAC_PI_2) }, Box2 { x: lower, y: (PI, 5.0 * FRAC_PI_4) }],
    }
}

/// Membership in `Sᵢ`, including the sign condition on the exit radius.
pub fn in_angle_set(i: usize, theta: f64, phi: f64) -> bool {
    let l = direction(theta, phi);
    let ct = theta.cos();
    let in_s = (ct > 0.0 && (FRAC_PI_2..=PI).contains(&phi))
        || (ct < 0.0 && ((FRAC_PI_4..=FRAC_PI_2).contains(&phi) || (PI..=5.0 * FRAC_PI_4).contains(&phi)));
    in_s && l[i - 1] < 0.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleGrid {
    pub n: usize,
    pub levels: usize,
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self { n: 200, levels: 30 }
    }
}

/// Brute-force suprema `(s₁, s₂, s₃)` over the angle sets.
pub fn s_numeric(q: f64, grid: &AngleGrid) -> [f64; 3] {
    std::array::from_fn(|k| {
        let i = k + 1;
        angle_boxes(i)
            .into_iter()
            .map(|bx| {
                zoom_maximize(bx, grid.n, grid.levels, |t, p| if in_angle_set(i, t, p) { m_ratio(i, t, p, q) } else { f64::NAN })
                    .2
            })
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Grid maximum of [`f_phi`] on `[π/2, 5π/4]`, with its location.
pub fn f_phi_numeric(q: f64, grid: &AngleGrid) -> (f64, f64) {
    zoom_maximize_1d((FRAC_PI_2, 5.0 * FRAC_PI_4), grid.n, grid.levels, |p| f_phi(p, q))
}

/// Grid maximum of [`r_theta`] on `[π/2, π]`, with its location.
pub fn r_theta_numeric(q: f64, grid: &AngleGrid) -> (f64, f64) {
    zoom_maximize_1d((FRAC_PI_2, PI), grid.n, grid.levels, |t| r_theta(t, q))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Criterion3DReport {
    pub lambda: f64,
    pub q: f64,
    pub gamma: f64,
    pub kappa: KappaUsed,
    pub hprime_at_lambda_cubed: f64,
    /// `κ / (Y λ^{3−q})`; `+∞` when `Y ≤ 0`.
    pub lhs_main: f64,
    pub rhs_main: f64,
    /// `γ / (λY)`; `+∞` when `Y ≤ 0`.
    pub lhs_gamma: f64,
    pub rhs_gamma: f64,
    pub satisfied: bool,
    pub strict_main: bool,
    pub branch: Branch,
}

impl Criterion3DReport {
    pub fn main_holds(&self) -> bool {
        self.lhs_main >= self.rhs_main
    }

    pub fn gamma_holds(&self) -> bool {
        self.lhs_gamma >= self.rhs_gamma
    }
}

pub fn check_sufficient_3d_with(lambda: f64, material: &Material3D, kappa: KappaUsed) -> Criterion3DReport {
    let q = material.q();
    let y = material.hprime_at_load(lambda);
    let rhs_main = main_threshold(q);
    let (branch, lhs_main, lhs_gamma) = if y <= 0.0 {
        (Branch::HprimeNonpositive, f64::INFINITY, f64::INFINITY)
    } else {
        (Branch::ConditionChecked, kappa.value / (y * lambda.powf(3.0 - q)), material.gamma() / (lambda * y))
    };
    let main = lhs_main >= rhs_main;
    let gamma_ok = lhs_gamma >= 0.5;
    Criterion3DReport {
        lambda,
        q,
        gamma: material.gamma(),
        kappa,
        hprime_at_lambda_cubed: y,
        lhs_main,
        rhs_main,
        lhs_gamma,
        rhs_gamma: 0.5,
        satisfied: y <= 0.0 || (main && gamma_ok),
        strict_main: y <= 0.0 || lhs_main > rhs_main * (1.0 + STRICT_REL_TOL),
        branch,
    }
}

pub fn check_sufficient_3d(lambda: f64, material: &Material3D, mode: KappaMode) -> Result<Criterion3DReport> {
    Ok(check_sufficient_3d_with(lambda, material, KappaUsed::resolve(material.q(), mode)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    Main,
    Gamma,
}

impl Binding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Main => "main",
            Self::Gamma => "gamma",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalLoad3D {
    pub main: CriticalLoad,
    pub gamma: CriticalLoad,
    pub binding: Binding,
    pub lambda_star: f64,
    pub kappa: KappaUsed,
}

pub fn critical_load_3d(material: &Material3D, bracket: (f64, f64), mode: KappaMode) -> Result<CriticalLoad3D> {
    let kappa = KappaUsed::resolve(material.q(), mode)?;
    let main = solve_critical_load(bracket, |l| check_sufficient_3d_with(l, material, kappa).main_holds())?;
    let gamma = solve_critical_load(bracket, |l| check_sufficient_3d_with(l, material, kappa).gamma_holds())?;
    let binding = if main.lambda_star <= gamma.lambda_star { Binding::Main } else { Binding::Gamma };
    Ok(CriticalLoad3D { main, gamma, binding, lambda_star: main.lambda_star.min(gamma.lambda_star), kappa })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalGrid {
    pub n_rho: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub rho_max_factor: f64,
    pub rho_min_factor: f64,
}

impl Default for SphericalGrid {
    fn default() -> Self {
        Self { n_rho: 200, n_theta: 200, n_phi: 200, rho_max_factor: 1e6, rho_min_factor: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint3 {
    pub rho: f64,
    pub theta: f64,
    pub phi: f64,
    pub lambdas: [f64; 3],
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FCertification {
    pub lambda: f64,
    pub min_f1: f64,
    pub argmin_f1: GridPoint3,
    pub min_f2: f64,
    pub argmin_f2: GridPoint3,
    /// Lower bound on `F₁/ρ^q` for `ρ ≥ ρ_max`.
    pub tail_margin_f1: f64,
    /// `γ + λY·min Σ lᵢlⱼ`; `F₂ = ρ²·(direction factor) ≥ ρ²·this`.
    pub f2_direction_min: f64,
}

impl FCertification {
    pub fn certified(&self) -> bool {
        self.min_f1 >= 0.0 && self.min_f2 >= 0.0 && self.tail_margin_f1 > 0.0 && self.f2_direction_min >= 0.0
    }
}

/// For `ρ ≥ ρ_max`: a negative product needs a negative coordinate with
/// `ρ|lᵢ| < λ`, and `|lⱼlₖ| ≤ 1/2`, so `Yρ³|l₁l₂l₃| ≤ (Y/2)λρ²`.
pub fn tail_margin_f1(lambda: f64, material: &Material3D, kappa: &KappaUsed, rho_max: f64) -> f64 {
    let q = material.q();
    let y = material.hprime_at_load(lambda);
    if y < 0.0 {
        return f64::NEG_INFINITY;
    }
    kappa.value - 0.5 * y * lambda.powf(3.0 - q) * (lambda / rho_max).powf(q - 2.0)
}

/// Minimum over unit vectors of `γ + λY Σ_{i<j} lᵢlⱼ`; the sum ranges over
/// `[−1/2, 1]`.
pub fn f2_direction_min(lambda: f64, material: &Material3D) -> f64 {
    let y = material.hprime_at_load(lambda);
    material.gamma() + lambda * y * if y > 0.0 { -0.5 } else { 1.0 }
}

/// Grid evaluation of `F₁` and `F₂` over `ℝ^{+++}` in the ordering sector
/// `λ̂₁ ≤ λ̂₂ ≤ λ̂₃`, with `ρ` log-spaced.
pub fn grid_verify_f(lambda: f64, material: &Material3D, kappa: &KappaUsed, grid: &SphericalGrid) -> FCertification {
    let q = material.q();
    let y = material.hprime_at_load(lambda);
    let rho_min = grid.rho_min_factor * lambda;
    let rho_max = grid.rho_max_factor * lambda;
    let (nr, nt, np) = (grid.n_rho.max(2), grid.n_theta.max(2), grid.n_phi.max(2));
    let log_step = (rho_max / rho_min).ln() / (nr - 1) as f64;
    let point = |i: usize| {
        let ir = i / (nt * np);
        let it = (i / np) % nt;
        let ip = i % np;
        let rho = rho_min * (log_step * ir as f64).exp();
        let theta = PI * it as f64 / (nt - 1) as f64;
        let phi = FRAC_PI_4 + PI * ip as f64 / (np - 1) as f64;
        (rho, theta, phi, direction(theta, phi).map(|c| rho * c))
    };
    let admissible = |d: &[f64; 3]| d[0] <= d[1] && d[1] <= d[2] && d.iter().all(|c| lambda + c > 0.0);
    let n = nr * nt * np;
    let eval = |i: usize, which: u8| {
        let (_, _, _, d) = point(i);
        if !admissible(&d) {
            return f64::NAN;
        }
        if which == 1 {
            f1_raw(d, q, kappa.value, y)
        } else {
            f2_raw(d, lambda, material.gamma(), y)
        }
    };
    let to_point = |(i, v): (usize, f64)| {
        let (rho, theta, phi, d) = point(i);
        GridPoint3 { rho, theta, phi, lambdas: d.map(|c| lambda + c), value: v }
    };
    let best1 = par_argmin(n, |i| eval(i, 1)).unwrap_or((0, f64::INFINITY));
    let best2 = par_argmin(n, |i| eval(i, 2)).unwrap_or((0, f64::INFINITY));
    FCertification {
        lambda,
        min_f1: best1.1,
        argmin_f1: to_point(best1),
        min_f2: best2.1,
        argmin_f2: to_point(best2),
        tail_margin_f1: tail_margin_f1(lambda, material, kappa, rho_max),
        f2_direction_min: f2_direction_min(lambda, material),
    }
}

/// `F₁` just beyond its zero along the worst direction
/// `l = (−√((q−2)/q), 1/√q, 1/√q)`. `None` unless `Y > 0`, the probe lies in
/// `ℝ^{+++}` and `F₁ < 0`.
pub fn counterexample_3d(lambda: f64, material: &Material3D, kappa: &KappaUsed) -> Option<GridPoint3> {
    let q = material.q();
    let y = material.hprime_at_load(lambda);
    if !(y > 0.0) {
        return None;
    }
    let l = [-((q - 2.0) / q).sqrt(), q.powf(-0.5), q.powf(-0.5)];
    let prod = (l[0] * l[1] * l[2]).abs();
    let rho = (kappa.value / (y * prod)).powf(1.0 / (3.0 - q)) * (1.0 + 1e-3);
    let d = l.map(|c| rho * c);
    let lambdas = d.map(|c| lambda + c);
    if lambdas.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let value = f1_raw(d, q, kappa.value, y);
    let theta = l[2].acos();
    let phi = l[1].atan2(l[0]);
    (value < 0.0).then_some(GridPoint3 { rho, theta, phi, lambdas, value })
}
