//! Radial maps `u(x) = r(|x|) x/|x|` on the unit ball and the energy
//! comparison against the homogeneous stretch `u_λ(x) = λx`.
//!
//! For such maps `|∇u|² = r'² + (n−1)(r/R)²` and `det ∇u = r'(r/R)^{n−1}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh_unit;
use crate::reduce::par_map;
use crate::search::{bisect_predicate, golden_min};
use crate::svcalc::{Mat2, Mat3, SingularSpectrum};
use crate::volumetric::{energy_density_2d, energy_density_3d, energy_density_3d_spectrum, Material};

/// Relative tolerance of the tanh–sinh quadrature.
pub const RADIAL_QUAD_TOL: f64 = 1e-13;
pub const MAX_KNOTS: usize = 200;
pub const MAX_ITERATIONS: usize = 500;
/// Cavity radii stay below `λ(1 − A_MARGIN)`.
pub const A_MARGIN: f64 = 1e-6;
/// Bisection tolerance of the empirical cavitation load.
pub const CAVITATION_LOAD_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum RadialProfile {
    /// `r(R) = (λ̃ⁿRⁿ + aⁿ)^{1/n}` with `λ̃ⁿ = λⁿ − aⁿ`.
    TrialFamily { n: usize, lambda: f64, a: f64 },
    /// Values at the uniform knots `R_k = k/N`, linear in between.
    PiecewiseLinear { lambda: f64, knots: Vec<f64> },
}

impl RadialProfile {
    pub fn trial(n: usize, lambda: f64, a: f64) -> Result<Self> {
        if !(a >= 0.0 && lambda > 0.0 && a < lambda) {
            return Err(Error::InvalidParameter(format!("trial family needs 0 <= a < lambda (a={a}, lambda={lambda})")));
        }
        if n != 2 && n != 3 {
            return Err(Error::DimensionMismatch { expected: 2, got: n });
        }
        Ok(Self::TrialFamily { n, lambda, a })
    }

    pub fn piecewise(lambda: f64, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() > MAX_KNOTS + 1 {
            return Err(Error::InvalidParameter(format!("{} knots outside [2, {}]", knots.len(), MAX_KNOTS + 1)));
        }
        if knots[0] < 0.0 || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("knot values must be nonnegative and strictly increasing".into()));
        }
        if (knots[knots.len() - 1] - lambda).abs() > 1e-14 * lambda {
            return Err(Error::InvalidParameter("last knot must equal lambda".into()));
        }
        Ok(Self::PiecewiseLinear { lambda, knots })
    }

    /// Samples a profile at `segments + 1` uniform knots.
    pub fn sample(&self, segments: usize) -> Result<Self> {
        let segments = segments.clamp(1, MAX_KNOTS);
        let mut knots: Vec<f64> = (0..=segments).map(|k| self.r(k as f64 / segments as f64)).collect();
        knots[segments] = self.lambda();
        Self::piecewise(self.lambda(), knots)
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Self::TrialFamily { lambda, .. } | Self::PiecewiseLinear { lambda, .. } => *lambda,
        }
    }

    /// Cavity radius `r(0)`.
    pub fn a(&self) -> f64 {
        match self {
            Self::TrialFamily { a, .. } => *a,
            Self::PiecewiseLinear { knots, .. } => knots[0],
        }
    }

    pub fn r(&self, big_r: f64) -> f64 {
        match self {
            Self::TrialFamily { n, lambda, a } => {
                let n = *n as i32;
                let lt = lambda.powi(n) - a.powi(n);
                (lt * big_r.powi(n) + a.powi(n)).powf(1.0 / n as f64)
            }
            Self::PiecewiseLinear { knots, .. } => {
                let segs = knots.len() - 1;
                let pos = (big_r * segs as f64).clamp(0.0, segs as f64);
                let k = (pos.floor() as usize).min(segs - 1);
                let t = pos - k as f64;
                knots[k] + t * (knots[k + 1] - knots[k])
            }
        }
    }
}

/// `(r', r/R)` of the trial family, with `r/R` from an expression that stays
/// accurate as `R → 0`.
fn trial_derivs(n: usize, lambda: f64, a: f64, big_r: f64) -> (f64, f64) {
    let ni = n as i32;
    let lt = lambda.powi(ni) - a.powi(ni);
    let r = (lt * big_r.powi(ni) + a.powi(ni)).powf(1.0 / n as f64);
    let rp = lt * big_r.powi(ni - 1) / r.powi(ni - 1);
    let ratio = if big_r > 0.0 { (lt + a.powi(ni) / big_r.powi(ni)).powf(1.0 / n as f64) } else { f64::INFINITY };
    (rp, ratio)
}

/// Energy density of the radial map at a point where `r' = rp`, `r/R = ratio`.
fn radial_density(material: &Material, rp: f64, ratio: f64) -> f64 {
    match material {
        Material::Two(m) => energy_density_2d(m, &Mat2::diag([rp, ratio])),
        Material::Three(m) => match SingularSpectrum::from_values([rp, ratio, ratio]) {
            Ok(s) => energy_density_3d_spectrum(m, &s),
            Err(_) => f64::INFINITY,
        },
    }
}

fn sphere_area(n: usize) -> f64 {
    if n == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

/// Volume of the unit ball.
pub fn ball_volume(n: usize) -> f64 {
    if n == 2 {
        PI
    } else {
        4.0 * PI / 3.0
    }
}

/// `W(λ𝟙) · |B₁|`.
pub fn homogeneous_energy(material: &Material, lambda: f64) -> f64 {
    let w = match material {
        Material::Two(m) => energy_density_2d(m, &Mat2::scaled_identity(lambda)),
        Material::Three(m) => energy_density_3d(m, &Mat3::scaled_identity(lambda)),
    };
    w * ball_volume(material.dim())
}

/// `∫₀^R₁ e(R) R^{n−1} dR` for an integrand with an `R^{−q}` singularity at
/// the origin, via `R = R₁ u^{1/(n−q)}`.
fn integrate_from_origin<F: Fn(f64) -> f64>(n: usize, q: f64, r1: f64, e: F) -> f64 {
    let p = 1.0 / (n as f64 - q);
    tanh_sinh_unit(
        |u| {
            let big_r = r1 * u.powf(p);
            // dR = r1 p u^{p−1} du
            e(big_r) * big_r.powi(n as i32 - 1) * r1 * p * u.powf(p - 1.0)
        },
        RADIAL_QUAD_TOL,
    )
}

fn integrate_segment<F: Fn(f64) -> f64>(n: usize, r0: f64, r1: f64, e: F) -> f64 {
    (r1 - r0)
        * tanh_sinh_unit(
            |u| {
                let big_r = r0 + (r1 - r0) * u;
                e(big_r) * big_r.powi(n as i32 - 1)
            },
            RADIAL_QUAD_TOL,
        )
}

fn segment_energy(material: &Material, knots: &[f64], k: usize) -> Result<f64> {
    let n = material.dim();
    let segs = knots.len() - 1;
    let h = 1.0 / segs as f64;
    let slope = (knots[k + 1] - knots[k]) / h;
    if !(slope > 0.0) {
        return Err(Error::Inadmissible { node: k, det: slope });
    }
    let (r0, r1) = (k as f64 * h, (k + 1) as f64 * h);
    let e = |big_r: f64| {
        let r = knots[k] + slope * (big_r - r0);
        radial_density(material, slope, r / big_r)
    };
    let v = if k == 0 { integrate_from_origin(n, material.q(), r1, e) } else { integrate_segment(n, r0, r1, e) };
    Ok(sphere_area(n) * v)
}

/// Energy of the radial map on the unit ball.
pub fn radial_energy(profile: &RadialProfile, material: &Material) -> Result<f64> {
    let n = material.dim();
    match profile {
        RadialProfile::TrialFamily { n: pn, lambda, a } => {
            if *pn != n {
                return Err(Error::DimensionMismatch { expected: n, got: *pn });
            }
            let (lambda, a) = (*lambda, *a);
            let v = integrate_from_origin(n, material.q(), 1.0, |big_r| {
                let (rp, ratio) = trial_derivs(n, lambda, a, big_r);
                radial_density(material, rp, ratio)
            });
            Ok(sphere_area(n) * v)
        }
        RadialProfile::PiecewiseLinear { knots, .. } => {
            let parts = (0..knots.len() - 1).map(|k| segment_energy(material, knots, k)).collect::<Result<Vec<_>>>()?;
            Ok(crate::reduce::pairwise_sum(&parts))
        }
    }
}

/// Default grid `a_k = λ(1 − A_MARGIN)·k/points`, `k = 0..points`.
pub fn default_a_grid(lambda: f64, points: usize) -> Vec<f64> {
    let top = lambda * (1.0 - A_MARGIN);
    (0..points).map(|k| top * k as f64 / points as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialMinimum {
    pub lambda: f64,
    pub a_star: f64,
    pub i_star: f64,
    pub i_homogeneous: f64,
    pub cavitated: bool,
}

/// Energy gain below which a cavity is not counted.
pub fn cavitation_tolerance(i_homogeneous: f64) -> f64 {
    1e-9 * (1.0 + i_homogeneous.abs())
}

/// Scan of `a ↦ I(r_a)` with golden-section refinement around the best cell.
pub fn minimize_trial_family(lambda: f64, material: &Material, a_grid: &[f64]) -> Result<TrialMinimum> {
    let n = material.dim();
    let top = lambda * (1.0 - A_MARGIN);
    if a_grid.is_empty() || a_grid[0] != 0.0 || a_grid.iter().any(|&a| !(0.0..top).contains(&a) && a != 0.0) {
        return Err(Error::InvalidParameter("a_grid must start at 0 and stay below lambda(1 - 1e-6)".into()));
    }
    let energy =
        |a: f64| -> f64 { RadialProfile::trial(n, lambda, a).and_then(|p| radial_energy(&p, material)).unwrap_or(f64::INFINITY) };
    let values = par_map(a_grid.len(), |i| energy(a_grid[i]));
    let i_homogeneous = homogeneous_energy(material, lambda);
    let best = (0..values.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let (mut a_star, mut i_star) = (a_grid[best], values[best]);
    if best > 0 {
        let lo = a_grid[best - 1];
        let hi = a_grid.get(best + 1).copied().unwrap_or(top);
        let (a, v) = golden_min(lo, hi, 1e-10 * lambda, energy);
        if v < i_star {
            a_star = a;
            i_star = v;
        }
    }
    Ok(TrialMinimum {
        lambda,
        a_star,
        i_star,
        i_homogeneous,
        cavitated: i_star < i_homogeneous - cavitation_tolerance(i_homogeneous),
    })
}

/// Smallest load in the bracket at which the trial family cavitates.
pub fn empirical_critical_load(material: &Material, bracket: (f64, f64), a_points: usize) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidBracket { lo, hi, reason: "need 0 < lo < hi".into() });
    }
    let cavitates = |l: f64| minimize_trial_family(l, material, &default_a_grid(l, a_points)).map(|m| m.cavitated);
    if cavitates(lo)? {
        return Err(Error::InvalidBracket { lo, hi, reason: "already cavitated at the lower end".into() });
    }
    if !cavitates(hi)? {
        return Err(Error::InvalidBracket { lo, hi, reason: "no cavitation at the upper end".into() });
    }
    let (_, first_cav) = bisect_predicate(lo, hi, CAVITATION_LOAD_TOL, |l| !cavitates(l).unwrap_or(true));
    Ok(first_cav)
}

/// Projected coordinate descent on interior knot values (and `r(0)`), each
/// move kept between its neighbours and accepted only if the energy drops.
pub fn refine_piecewise(profile: &RadialProfile, material: &Material, iterations: usize) -> Result<(RadialProfile, f64)> {
    let RadialProfile::PiecewiseLinear { lambda, knots } = profile else {
        return Err(Error::InvalidParameter("refine_piecewise needs a piecewise-linear profile".into()));
    };
    let mut knots = knots.clone();
    let segs = knots.len() - 1;
    let mut seg_e = (0..segs).map(|k| segment_energy(material, &knots, k)).collect::<Result<Vec<_>>>()?;
    let mut total = crate::reduce::pairwise_sum(&seg_e);
    for _ in 0..iterations.min(MAX_ITERATIONS) {
        let before = total;
        for k in 0..segs {
            let lo = if k == 0 { 0.0 } else { knots[k - 1] };
            let hi = knots[k + 1];
            let gap = 1e-9 * (hi - lo);
            let local = |v: f64, knots: &mut Vec<f64>| -> f64 {
                let old = knots[k];
                knots[k] = v;
                let mut e = segment_energy(material, knots, k).unwrap_or(f64::INFINITY);
                if k > 0 {
                    e += segment_energy(material, knots, k - 1).unwrap_or(f64::INFINITY);
                }
                knots[k] = old;
                e
            };
            let current = seg_e[k] + if k > 0 { seg_e[k - 1] } else { 0.0 };
            let mut scratch = knots.clone();
            let (v, e) = golden_min(lo + gap, hi - gap, 1e-12 * (hi - lo), |v| local(v, &mut scratch));
            if e < current {
                knots[k] = v;
                seg_e[k] = segment_energy(material, &knots, k)?;
                if k > 0 {
                    seg_e[k - 1] = segment_energy(material, &knots, k - 1)?;
                }
                total = crate::reduce::pairwise_sum(&seg_e);
            }
        }
        if before - total <= 1e-14 * (1.0 + total.abs()) {
            break;
        }
    }
    Ok((RadialProfile::PiecewiseLinear { lambda: *lambda, knots }, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volumetric::{CofactorTerm, Material2D, Material3D, VolumetricLaw};

    fn power_log_2d() -> Material {
        Material::Two(Material2D::new(1.5, VolumetricLaw::power_log(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap())
    }

    fn material_3d() -> Material {
        Material::Three(
            Material3D::new(
                2.5,
                0.5,
                VolumetricLaw::power_log(1.0, 1.0, 1.0, 1.0).unwrap(),
                CofactorTerm::power_of_norm(0.2, 1.0).unwrap(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn homogeneous_profile_energy() {
        for m in [power_log_2d(), material_3d()] {
            let p = RadialProfile::trial(m.dim(), 1.4, 0.0).unwrap();
            let e = radial_energy(&p, &m).unwrap();
            let h = homogeneous_energy(&m, 1.4);
            assert!((e - h).abs() <= 1e-10 * h, "{e} vs {h}");
        }
    }

    #[test]
    fn trial_family_has_constant_determinant() {
        for n in [2usize, 3] {
            let (lam, a) = (1.7f64, 0.6f64);
            let lt = lam.powi(n as i32) - a.powi(n as i32);
            for big_r in [1e-6, 0.01, 0.3, 1.0] {
                let (rp, ratio) = trial_derivs(n, lam, a, big_r);
                let det = rp * ratio.powi(n as i32 - 1);
                assert!((det - lt).abs() < 1e-12 * lt, "n={n} R={big_r}");
            }
            let p = RadialProfile::trial(n, lam, a).unwrap();
            assert!((p.r(1.0) - lam).abs() < 1e-14 && (p.r(0.0) - a).abs() < 1e-14);
        }
    }

    #[test]
    fn h_term_integrates_exactly() {
        // With |A|^q and the other terms removed, the energy is h(λ̃ⁿ)|B₁|;
        // check via the difference of two laws that differ only in h.
        let (lam, a) = (2.0, 0.9);
        let m1 = Material::Two(Material2D::new(1.5, VolumetricLaw::power_log(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap());
        let m2 = Material::Two(Material2D::new(1.5, VolumetricLaw::power_log(2.0, 1.0, 1.0, 1.0).unwrap()).unwrap());
        let p = RadialProfile::trial(2, lam, a).unwrap();
        let diff = radial_energy(&p, &m2).unwrap() - radial_energy(&p, &m1).unwrap();
        let lt = lam * lam - a * a;
        assert!((diff - lt * PI).abs() < 1e-9, "{diff}");
    }

    #[test]
    fn cavitation_small_and_large_loads() {
        let m = power_log_2d();
        let small = minimize_trial_family(1.1, &m, &default_a_grid(1.1, 32)).unwrap();
        assert!(!small.cavitated);
        let large = minimize_trial_family(8.0, &m, &default_a_grid(8.0, 32)).unwrap();
        assert!(large.cavitated && large.a_star > 0.0);
        let larger = minimize_trial_family(12.0, &m, &default_a_grid(12.0, 32)).unwrap();
        assert!(larger.a_star > large.a_star);
    }

    #[test]
    fn piecewise_matches_trial_family_and_refines() {
        let m = power_log_2d();
        let p = RadialProfile::trial(2, 1.1, 0.0).unwrap();
        let pw = p.sample(16).unwrap();
        let e0 = radial_energy(&pw, &m).unwrap();
        let exact = radial_energy(&p, &m).unwrap();
        assert!((e0 - exact).abs() < 1e-10 * exact);
        let (refined, e1) = refine_piecewise(&pw, &m, 5).unwrap();
        assert!(e1 <= e0 && e0 - e1 < 1e-10, "{e0} {e1}");
        if let RadialProfile::PiecewiseLinear { knots, .. } = refined {
            assert!(knots.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn refinement_never_increases_energy_for_cavity() {
        let m = power_log_2d();
        let start = minimize_trial_family(6.0, &m, &default_a_grid(6.0, 32)).unwrap();
        let p = RadialProfile::trial(2, 6.0, start.a_star).unwrap().sample(12).unwrap();
        let e0 = radial_energy(&p, &m).unwrap();
        let (_, e1) = refine_piecewise(&p, &m, 3).unwrap();
        assert!(e1 <= e0);
        assert!(e1 < start.i_homogeneous);
    }

    #[test]
    fn invalid_inputs() {
        assert!(RadialProfile::trial(2, 1.0, 1.0).is_err());
        assert!(RadialProfile::piecewise(1.0, vec![0.5, 0.4, 1.0]).is_err());
        assert!(matches!(empirical_critical_load(&power_log_2d(), (8.0, 9.0), 16), Err(Error::InvalidBracket { .. })));
    }
}
