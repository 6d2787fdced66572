//! Volumetric laws `h` and the stored-energy densities built from them.
//!
//! Two-dimensional materials have `W(A) = |A|^q + h(det A)` with `1 < q < 2`;
//! three-dimensional ones `W(A) = |A|^q + γ|A|² + Z(cof A) + h(det A)` with
//! `2 < q < 3`. `h` is `+∞` for `t ≤ 0`, represented by the `f64::INFINITY`
//! sentinel in energy evaluations and by [`Error::Domain`] in `h_eval`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::svcalc::{Mat2, Mat3, SingularSpectrum, SquareOps};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied law given as paired value/derivative evaluators.
#[derive(Clone)]
pub struct CustomLaw {
    pub name: String,
    h: ScalarFn,
    dh: ScalarFn,
}

impl CustomLaw {
    pub fn new(
        name: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dh: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), h: Arc::new(h), dh: Arc::new(dh) }
    }
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw").field("name", &self.name).finish()
    }
}

#[derive(Clone, Debug)]
pub enum VolumetricLaw {
    /// `h(t) = a t^p + b t^{-r}` with `a, b, r > 0`, `p ≥ 1`.
    PowerLog {
        a: f64,
        p: f64,
        b: f64,
        r: f64,
    },
    /// `h(t) = a (t − 1)² + b (t − 1 − ln t)` with `a, b > 0`; `h(1) = h'(1) = 0`.
    QuadLog {
        a: f64,
        b: f64,
    },
    Custom(CustomLaw),
}

impl VolumetricLaw {
    pub fn power_log(a: f64, p: f64, b: f64, r: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && r > 0.0 && p >= 1.0) || ![a, p, b, r].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power_log needs a, b, r > 0 and p >= 1 (got a={a}, p={p}, b={b}, r={r})"
            )));
        }
        Ok(Self::PowerLog { a, p, b, r })
    }

    pub fn quad_log(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("quad_log needs a, b > 0 (got a={a}, b={b})")));
        }
        Ok(Self::QuadLog { a, b })
    }

    pub fn name(&self) -> &str {
        match self {
            Self::PowerLog { .. } => "power_log",
            Self::QuadLog { .. } => "quad_log",
            Self::Custom(c) => &c.name,
        }
    }

    /// `h(t)` for `t > 0`.
    pub fn h_eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain { what: "h", value: t });
        }
        Ok(self.h_unchecked(t))
    }

    /// `h'(t)` for `t > 0`.
    pub fn hprime_eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain { what: "h'", value: t });
        }
        Ok(self.hprime_unchecked(t))
    }

    /// `h(t)`, or `+∞` for `t ≤ 0`.
    pub fn h_or_inf(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.h_unchecked(t)
        } else {
            f64::INFINITY
        }
    }

    fn h_unchecked(&self, t: f64) -> f64 {
        match self {
            Self::PowerLog { a, p, b, r } => a * t.powf(*p) + b * t.powf(-r),
            Self::QuadLog { a, b } => a * (t - 1.0).powi(2) + b * ((t - 1.0) - t.ln()),
            Self::Custom(c) => (c.h)(t),
        }
    }

    fn hprime_unchecked(&self, t: f64) -> f64 {
        match self {
            Self::PowerLog { a, p, b, r } => a * p * t.powf(p - 1.0) - b * r * t.powf(-r - 1.0),
            Self::QuadLog { a, b } => 2.0 * a * (t - 1.0) + b * (1.0 - 1.0 / t),
            Self::Custom(c) => (c.dh)(t),
        }
    }
}

/// Log-spaced sample grid on `(t_min, t_max)`.
#[derive(Clone, Copy, Debug)]
pub struct LogGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { t_min: 1e-3, t_max: 1e3, points: 400 }
    }
}

impl LogGrid {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let (l0, l1) = (self.t_min.ln(), self.t_max.ln());
        let n = self.points.max(2);
        (0..n).map(move |i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
    }
}

/// Proxy point for the blow-up hypothesis `h(0⁺) = +∞`.
pub const BLOWUP_PROBE: f64 = 1e-8;
/// Required margin `h(BLOWUP_PROBE) − h(1)`.
pub const BLOWUP_MARGIN: f64 = 10.0;
/// Probe points and threshold for `liminf h(t)/t > 0`.
pub const GROWTH_PROBES: [f64; 3] = [1e2, 1e4, 1e6];
pub const GROWTH_MIN_RATIO: f64 = 1e-3;
/// Relative step for the central-difference derivative check.
pub const FD_REL_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum HypothesisFailure {
    Negative { t: f64, h: f64 },
    NotConvex { t: f64, excess: f64 },
    DerivativeMismatch { t: f64, analytic: f64, central: f64 },
    NoBlowUp { h_probe: f64, h_one: f64 },
    NoLinearGrowth { t: f64, ratio: f64 },
    NotFinite { t: f64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HypothesisReport {
    pub failures: Vec<HypothesisFailure>,
    /// Smallest `h(T)/T` over the growth probes.
    pub growth_ratio: f64,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sampled checks of convexity, C¹ consistency, nonnegativity, blow-up at
/// `0⁺` and linear growth at infinity. Never aborts; collects failures.
pub fn check_hypotheses(law: &VolumetricLaw, grid: &LogGrid) -> HypothesisReport {
    let mut failures = Vec::new();
    let ts: Vec<f64> = grid.iter().collect();
    let hs: Vec<f64> = ts.iter().map(|&t| law.h_or_inf(t)).collect();

    for (&t, &h) in ts.iter().zip(&hs) {
        if !h.is_finite() {
            failures.push(HypothesisFailure::NotFinite { t });
        } else if h < -1e-12 {
            failures.push(HypothesisFailure::Negative { t, h });
        }
    }

    for i in 1..ts.len().saturating_sub(1) {
        let (t0, t1, t2) = (ts[i - 1], ts[i], ts[i + 1]);
        let chord = ((t2 - t1) * hs[i - 1] + (t1 - t0) * hs[i + 1]) / (t2 - t0);
        let excess = hs[i] - chord;
        if excess > 1e-12 * (1.0 + hs[i].abs()) {
            failures.push(HypothesisFailure::NotConvex { t: t1, excess });
        }
    }

    for &t in &ts {
        let step = FD_REL_STEP * t;
        let central = (law.h_or_inf(t + step) - law.h_or_inf(t - step)) / (2.0 * step);
        let analytic = law.hprime_unchecked(t);
        if !((central - analytic).abs() <= FD_TOL * (1.0 + analytic.abs())) {
            failures.push(HypothesisFailure::DerivativeMismatch { t, analytic, central });
        }
    }

    let h_probe = law.h_or_inf(BLOWUP_PROBE);
    let h_one = law.h_or_inf(1.0);
    if !(h_probe - h_one > BLOWUP_MARGIN) {
        failures.push(HypothesisFailure::NoBlowUp { h_probe, h_one });
    }
    let mut growth_ratio = f64::INFINITY;
    for &t in &GROWTH_PROBES {
        let ratio = law.h_or_inf(t) / t;
        growth_ratio = growth_ratio.min(ratio);
        if !(ratio >= GROWTH_MIN_RATIO) {
            failures.push(HypothesisFailure::NoLinearGrowth { t, ratio });
        }
    }
    HypothesisReport { failures, growth_ratio }
}

/// Isotropic convex cofactor term `Z`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum CofactorTerm {
    #[default]
    Zero,
    /// `Z(C) = c |C|^p` with `c ≥ 0`, `p ≥ 1`.
    PowerOfNorm { c: f64, p: f64 },
}

impl CofactorTerm {
    pub fn power_of_norm(c: f64, p: f64) -> Result<Self> {
        if !(c >= 0.0 && p >= 1.0 && c.is_finite() && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("power_of_norm needs c >= 0, p >= 1 (got c={c}, p={p})")));
        }
        Ok(Self::PowerOfNorm { c, p })
    }

    /// Value from the singular values of the argument.
    pub fn eval_spectrum(&self, s: &SingularSpectrum<3>) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::PowerOfNorm { c, p } => c * s.norm_sq().sqrt().powf(*p),
        }
    }

    pub fn eval(&self, m: &Mat3) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::PowerOfNorm { c, p } => c * m.norm().powf(*p),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Material2D {
    q: f64,
    law: VolumetricLaw,
}

impl Material2D {
    pub fn new(q: f64, law: VolumetricLaw) -> Result<Self> {
        if !(q > 1.0 && q < 2.0) {
            return Err(Error::InvalidParameter(format!("2D growth exponent q={q} not in (1,2)")));
        }
        Ok(Self { q, law })
    }

    /// `h(t) = (t−1)² + 2(t−1−ln t)`, `q = 1.5`: the worked-example material.
    pub fn reference() -> Self {
        Self::new(1.5, VolumetricLaw::QuadLog { a: 1.0, b: 2.0 }).expect("valid reference material")
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn law(&self) -> &VolumetricLaw {
        &self.law
    }

    /// `h'(λ²)`.
    pub fn hprime_at_load(&self, lambda: f64) -> f64 {
        self.law.hprime_unchecked(lambda * lambda)
    }
}

#[derive(Clone, Debug)]
pub struct Material3D {
    q: f64,
    gamma: f64,
    law: VolumetricLaw,
    z: CofactorTerm,
}

impl Material3D {
    pub fn new(q: f64, gamma: f64, law: VolumetricLaw, z: CofactorTerm) -> Result<Self> {
        if !(q > 2.0 && q < 3.0) {
            return Err(Error::InvalidParameter(format!("3D growth exponent q={q} not in (2,3)")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma={gamma} must be positive")));
        }
        Ok(Self { q, gamma, law, z })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn law(&self) -> &VolumetricLaw {
        &self.law
    }

    pub fn z(&self) -> &CofactorTerm {
        &self.z
    }

    /// `h'(λ³)`.
    pub fn hprime_at_load(&self, lambda: f64) -> f64 {
        self.law.hprime_unchecked(lambda * lambda * lambda)
    }
}

/// Either dimension, as read from a material config.
#[derive(Clone, Debug)]
pub enum Material {
    Two(Material2D),
    Three(Material3D),
}

impl Material {
    pub fn dim(&self) -> usize {
        match self {
            Self::Two(_) => 2,
            Self::Three(_) => 3,
        }
    }

    pub fn law(&self) -> &VolumetricLaw {
        match self {
            Self::Two(m) => m.law(),
            Self::Three(m) => m.law(),
        }
    }

    pub fn q(&self) -> f64 {
        match self {
            Self::Two(m) => m.q(),
            Self::Three(m) => m.q(),
        }
    }
}

/// `|F|^q + h(det F)`, or `+∞` when `det F ≤ 0`.
pub fn energy_density_2d(material: &Material2D, f: &Mat2) -> f64 {
    let det = f.det();
    if !(det > 0.0) {
        return f64::INFINITY;
    }
    f.norm().powf(material.q) + material.law.h_unchecked(det)
}

/// `|F|^q + γ|F|² + Z(cof F) + h(det F)`, or `+∞` when `det F ≤ 0`.
pub fn energy_density_3d(material: &Material3D, f: &Mat3) -> f64 {
    let det = f.det();
    if !(det > 0.0) {
        return f64::INFINITY;
    }
    let n2 = f.norm_sq();
    n2.sqrt().powf(material.q) + material.gamma * n2 + material.z.eval(&f.cof()) + material.law.h_unchecked(det)
}

/// Energy density from singular values (isotropy), used by radial profiles.
pub fn energy_density_3d_spectrum(material: &Material3D, s: &SingularSpectrum<3>) -> f64 {
    let det = s.product();
    if !(det > 0.0) {
        return f64::INFINITY;
    }
    let [a, b, c] = s.values();
    let cof = SingularSpectrum::from_values([b * c, a * c, a * b]).expect("nonnegative");
    let n2 = s.norm_sq();
    n2.sqrt().powf(material.q) + material.gamma * n2 + material.z.eval_spectrum(&cof) + material.law.h_unchecked(det)
}
