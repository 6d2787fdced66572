//! Boundary-compatible deformation fields `u = λx + φ` on the unit square or
//! cube, sampled at tensor Gauss–Legendre nodes with analytic gradients.

use std::f64::consts::PI;

use crate::critload2d::{g1, g2, g_growth};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gk, composite_unit};
use crate::reduce::{par_map, par_sum, par_sum_many};
use crate::svcalc::{antitrace, excess_integrand_x, phi2, psi, Mat, Mat2, Mat3, SquareOps};
use crate::volumetric::{energy_density_2d, energy_density_3d, Material2D, Material3D};

/// Per-cell Gauss–Legendre order.
pub const DEFAULT_ORDER: usize = 4;
/// Order used for the quadrature error estimate.
pub const CHECK_ORDER: usize = 6;
/// Smallest accepted number of cells per axis.
pub const MIN_RESOLUTION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationFamily {
    /// `φ = amp · d · Π sin²(kπxᵢ)`.
    Bump,
    /// `φⱼ = amp · dⱼ · Πᵢ sin(k_{ji}πxᵢ)`, `k_{ji} = k(1 + (i+j) mod 2)`.
    Trig,
    /// Rotated gradient (2D) or `∇s × d` (3D) of `s = Π sin²(kπxᵢ)`.
    DivFree,
}

impl PerturbationFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Bump => "bump",
            Self::Trig => "trig",
            Self::DivFree => "divfree",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub family: PerturbationFamily,
    pub dim: usize,
    pub amp: f64,
    pub freq: f64,
    /// Unit vector of length `dim`.
    pub direction: Vec<f64>,
}

impl Perturbation {
    pub fn new(family: PerturbationFamily, dim: usize, amp: f64, freq: f64, direction: Option<Vec<f64>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::DimensionMismatch { expected: 2, got: dim });
        }
        if !amp.is_finite() || !(freq > 0.0 && freq.is_finite()) {
            return Err(Error::InvalidParameter(format!("amp={amp}, freq={freq}")));
        }
        let d = direction.unwrap_or_else(|| [1.0, -0.6, 0.3][..dim].to_vec());
        if d.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: d.len() });
        }
        let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("direction must be a nonzero vector".into()));
        }
        Ok(Self { family, dim, amp, freq, direction: d.iter().map(|x| x / n).collect() })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(PerturbationFamily::Bump, dim, 0.0, 1.0, None).expect("valid zero perturbation")
    }

    /// `φ` vanishes on the boundary of the unit cell.
    pub fn boundary_compatible(&self) -> bool {
        self.amp == 0.0 || self.freq.fract() == 0.0
    }

    /// `∇φ(x)`, rows indexed by component.
    pub fn gradient<const N: usize>(&self, x: &[f64; N]) -> Mat<N> {
        let k = self.freq * PI;
        let mut g = Mat::<N>::zeros();
        match self.family {
            PerturbationFamily::Bump => {
                let ds = bump_gradient(x, k);
                for j in 0..N {
                    for i in 0..N {
                        g.0[j][i] = self.amp * self.direction[j] * ds[i];
                    }
                }
            }
            PerturbationFamily::Trig => {
                for j in 0..N {
                    let kj: [f64; N] = std::array::from_fn(|i| k * (1.0 + ((i + j) % 2) as f64));
                    for i in 0..N {
                        let mut p = self.amp * self.direction[j] * kj[i] * (kj[i] * x[i]).cos();
                        for l in (0..N).filter(|&l| l != i) {
                            p *= (kj[l] * x[l]).sin();
                        }
                        g.0[j][i] = p;
                    }
                }
            }
            PerturbationFamily::DivFree => {
                let h = bump_hessian(x, k);
                if N == 2 {
                    // φ = (∂₂s, −∂₁s)
                    for i in 0..2 {
                        g.0[0][i] = self.amp * h[1][i];
                        g.0[1][i] = -self.amp * h[0][i];
                    }
                } else {
                    // φⱼ = ε_{jab} ∂ₐs d_b
                    let d = &self.direction;
                    for j in 0..3 {
                        let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                        for i in 0..3 {
                            g.0[j][i] = self.amp * (h[a][i] * d[b] - h[b][i] * d[a]);
                        }
                    }
                }
            }
        }
        g
    }
}

/// `∇s` for `s = Π sin²(k xᵢ)`.
fn bump_gradient<const N: usize>(x: &[f64; N], k: f64) -> [f64; N] {
    let sq: [f64; N] = std::array::from_fn(|i| (k * x[i]).sin().powi(2));
    std::array::from_fn(|i| {
        let mut p = k * (2.0 * k * x[i]).sin();
        for l in (0..N).filter(|&l| l != i) {
            p *= sq[l];
        }
        p
    })
}

/// Hessian of `s = Π sin²(k xᵢ)`.
fn bump_hessian<const N: usize>(x: &[f64; N], k: f64) -> [[f64; N]; N] {
    let sq: [f64; N] = std::array::from_fn(|i| (k * x[i]).sin().powi(2));
    let d1: [f64; N] = std::array::from_fn(|i| k * (2.0 * k * x[i]).sin());
    let d2: [f64; N] = std::array::from_fn(|i| 2.0 * k * k * (2.0 * k * x[i]).cos());
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut p = if a == b { d2[a] } else { d1[a] * d1[b] };
            for l in (0..N).filter(|&l| l != a && l != b) {
                p *= sq[l];
            }
            p
        })
    })
}

/// Gradient samples and quadrature weights of a deformation.
#[derive(Clone, Debug)]
pub struct DeformationField<const N: usize> {
    pub lambda: f64,
    pub gradients: Vec<Mat<N>>,
    pub weights: Vec<f64>,
    pub boundary_compatible: bool,
}

impl<const N: usize> DeformationField<N>
where
    Mat<N>: SquareOps<N>,
{
    /// Field from arbitrary samples (weights in volume units).
    pub fn from_samples(lambda: f64, gradients: Vec<Mat<N>>, weights: Vec<f64>, boundary_compatible: bool) -> Result<Self> {
        if gradients.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: gradients.len(), got: weights.len() });
        }
        Ok(Self { lambda, gradients, weights, boundary_compatible })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn volume(&self) -> f64 {
        par_sum(self.len(), |i| self.weights[i])
    }

    /// `∫ f(∇u) dx`.
    pub fn integrate<F: Fn(&Mat<N>) -> f64 + Sync>(&self, f: F) -> f64 {
        par_sum(self.len(), |i| self.weights[i] * f(&self.gradients[i]))
    }

    /// Index and value of the smallest `det ∇u`.
    pub fn min_det(&self) -> (usize, f64) {
        crate::reduce::par_argmin(self.len(), |i| self.gradients[i].det()).unwrap_or((0, f64::INFINITY))
    }
}

/// Samples `λ𝟙 + ∇φ` on `resolution` cells per axis with `order` Gauss points
/// per cell. With `admissible`, every node must have `det ∇u > 0`.
pub fn make_field_with_order<const N: usize>(
    perturbation: &Perturbation,
    lambda: f64,
    resolution: usize,
    order: usize,
    admissible: bool,
) -> Result<DeformationField<N>>
where
    Mat<N>: SquareOps<N>,
{
    if perturbation.dim != N {
        return Err(Error::DimensionMismatch { expected: N, got: perturbation.dim });
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParameter(format!("resolution {resolution} below {MIN_RESOLUTION}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda={lambda} must be positive")));
    }
    let (xs, ws) = composite_unit(resolution, order);
    let m = xs.len();
    let total = m.pow(N as u32);
    let node = |idx: usize| -> ([f64; N], f64) {
        let mut rest = idx;
        let mut x = [0.0; N];
        let mut w = 1.0;
        for d in (0..N).rev() {
            let k = rest % m;
            rest /= m;
            x[d] = xs[k];
            w *= ws[k];
        }
        (x, w)
    };
    let base = Mat::<N>::scaled_identity(lambda);
    let samples: Vec<(Mat<N>, f64)> = par_map(total, |i| {
        let (x, w) = node(i);
        (base + perturbation.gradient(&x), w)
    });
    let (gradients, weights): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
    let field = DeformationField { lambda, gradients, weights, boundary_compatible: perturbation.boundary_compatible() };
    if admissible {
        let (node, det) = field.min_det();
        if !(det > 0.0) {
            return Err(Error::Inadmissible { node, det });
        }
    }
    Ok(field)
}

pub fn make_field<const N: usize>(
    perturbation: &Perturbation,
    lambda: f64,
    resolution: usize,
    admissible: bool,
) -> Result<DeformationField<N>>
where
    Mat<N>: SquareOps<N>,
{
    make_field_with_order(perturbation, lambda, resolution, DEFAULT_ORDER, admissible)
}

pub fn energy_2d(field: &DeformationField<2>, material: &Material2D) -> f64 {
    field.integrate(|f| energy_density_2d(material, f))
}

pub fn energy_3d(field: &DeformationField<3>, material: &Material3D) -> f64 {
    field.integrate(|f| energy_density_3d(material, f))
}

/// `I(u) − W(λ𝟙)·|Ω|`.
pub fn delta_2d(field: &DeformationField<2>, material: &Material2D) -> f64 {
    let w0 = energy_density_2d(material, &Mat2::scaled_identity(field.lambda));
    field.integrate(|f| energy_density_2d(material, f) - w0)
}

pub fn delta_3d(field: &DeformationField<3>, material: &Material3D) -> f64 {
    let w0 = energy_density_3d(material, &Mat3::scaled_identity(field.lambda));
    field.integrate(|f| energy_density_3d(material, f) - w0)
}

/// `∫ min{|∇u − λ𝟙|², |∇u − λ𝟙|^q}`.
pub fn lhs_rig1_2d(field: &DeformationField<2>, q: f64) -> f64 {
    let id = Mat2::scaled_identity(field.lambda);
    field.integrate(|f| {
        let t = (*f - id).norm();
        (t * t).min(t.powf(q))
    })
}

/// `∫ ψ(u, λ)` with `curl u = atr ∇u`, `div u = tr ∇u`.
pub fn lhs_rig2_2d(field: &DeformationField<2>) -> f64 {
    let lambda = field.lambda;
    field.integrate(|f| psi(antitrace(f), f.trace(), lambda))
}

/// `∫ |∇u − λ𝟙|^q`.
pub fn lhs_rig_3d(field: &DeformationField<3>, q: f64) -> f64 {
    let id = Mat3::scaled_identity(field.lambda);
    field.integrate(|f| (*f - id).norm().powf(q))
}

/// `∫ (det ∇u − λⁿ)`.
pub fn jacobian_deficit<const N: usize>(field: &DeformationField<N>) -> f64
where
    Mat<N>: SquareOps<N>,
{
    let ln = field.lambda.powi(N as i32);
    field.integrate(|f| f.det() - ln)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullLagrangianReport {
    /// `|∫(∇u − λ𝟙)|`.
    pub gradient: f64,
    /// `|∫(cof ∇u − cof λ𝟙)|`.
    pub cofactor: f64,
    /// `|∫(det ∇u − λⁿ)|`.
    pub determinant: f64,
}

impl NullLagrangianReport {
    pub fn max(&self) -> f64 {
        self.gradient.max(self.cofactor).max(self.determinant)
    }
}

fn matrix_integral_norm<const N: usize, F>(field: &DeformationField<N>, f: F) -> f64
where
    F: Fn(&Mat<N>) -> Mat<N> + Sync,
    Mat<N>: SquareOps<N>,
{
    let mut total: f64 = 0.0;
    for r in 0..N {
        for c in 0..N {
            let v = field.integrate(|g| f(g).0[r][c]);
            total += v * v;
        }
    }
    total.sqrt()
}

pub fn null_lagrangian_check<const N: usize>(field: &DeformationField<N>) -> NullLagrangianReport
where
    Mat<N>: SquareOps<N>,
{
    let id = Mat::<N>::scaled_identity(field.lambda);
    let cof_id = id.cof();
    NullLagrangianReport {
        gradient: matrix_integral_norm(field, |g| *g - id),
        cofactor: matrix_integral_norm(field, |g| g.cof() - cof_id),
        determinant: jacobian_deficit(field).abs(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldReport {
    pub i_u: f64,
    pub i_ulambda: f64,
    pub delta: f64,
    pub lhs_rig1: f64,
    pub lhs_rig2: f64,
    /// `∫ g(dist(∇u, λSO(2)))`.
    pub g_integral: f64,
    pub psi_integral: f64,
    /// `∫ (σ₁ + σ₂ − 2λ)`.
    pub trace_excess: f64,
    pub g1_integral: f64,
    pub g2_integral: f64,
    pub jacobian_deficit: f64,
    pub null_lagrangian: NullLagrangianReport,
}

/// Pass tolerance `1e−6 (1 + |δ|)` for the inequality chain.
pub fn chain_tolerance(delta: f64) -> f64 {
    1e-6 * (1.0 + delta.abs())
}

/// Null-Lagrangian integrals must vanish to `1e−8 · |Ω|`.
pub const NULL_LAGRANGIAN_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainChecks {
    pub delta_dominates_g: bool,
    pub g_sum_nonnegative: bool,
    /// `None` when no `c₀` is available.
    pub c0_bound: Option<bool>,
    pub trace_dominates_psi: bool,
    pub null_lagrangians: bool,
}

impl ChainChecks {
    pub fn all(&self) -> bool {
        self.delta_dominates_g
            && self.g_sum_nonnegative
            && self.c0_bound.unwrap_or(true)
            && self.trace_dominates_psi
            && self.null_lagrangians
    }
}

impl FieldReport {
    pub fn checks(&self, c0: Option<f64>, volume: f64) -> ChainChecks {
        let tol = chain_tolerance(self.delta);
        let gsum = self.g1_integral + self.g2_integral;
        ChainChecks {
            delta_dominates_g: self.delta >= gsum - tol,
            g_sum_nonnegative: gsum >= -tol,
            c0_bound: c0.map(|c| self.g1_integral >= c * self.g_integral - tol),
            trace_dominates_psi: self.trace_excess >= self.psi_integral - tol,
            null_lagrangians: self.null_lagrangian.max() <= NULL_LAGRANGIAN_TOL * volume,
        }
    }
}

/// Integrals of the 2D error-estimate chain.
pub fn decomposition_check_2d(field: &DeformationField<2>, material: &Material2D) -> Result<FieldReport> {
    let (node, det) = field.min_det();
    if !(det > 0.0) {
        return Err(Error::Inadmissible { node, det });
    }
    let lambda = field.lambda;
    let q = material.q();
    let id = Mat2::scaled_identity(lambda);
    let w0 = energy_density_2d(material, &id);
    let sums = par_sum_many::<9, _>(field.len(), |i| {
        let f = &field.gradients[i];
        let w = field.weights[i];
        let s = f.singular_values();
        let dist = s.dist_to_reference(lambda);
        let t = (*f - id).norm();
        let wu = energy_density_2d(material, f);
        [
            w * wu,
            w * (wu - w0),
            w * (t * t).min(t.powf(q)),
            w * psi(antitrace(f), f.trace(), lambda),
            w * g_growth(dist, q),
            w * (s.sum() - 2.0 * lambda),
            w * g1(&s, lambda, material).unwrap_or(f64::NAN),
            w * g2(&s, lambda, material).unwrap_or(f64::NAN),
            w,
        ]
    });
    let [i_u, delta, lhs_rig1, psi_integral, g_integral, trace_excess, g1_integral, g2_integral, volume] = sums;
    Ok(FieldReport {
        i_u,
        i_ulambda: w0 * volume,
        delta,
        lhs_rig1,
        lhs_rig2: psi_integral,
        g_integral,
        psi_integral,
        trace_excess,
        g1_integral,
        g2_integral,
        jacobian_deficit: jacobian_deficit(field),
        null_lagrangian: null_lagrangian_check(field),
    })
}

/// `δ` at orders 4 and 6 and their difference.
pub fn delta_error_estimate_2d(
    perturbation: &Perturbation,
    lambda: f64,
    resolution: usize,
    material: &Material2D,
) -> Result<(f64, f64, f64)> {
    let lo: DeformationField<2> = make_field_with_order(perturbation, lambda, resolution, DEFAULT_ORDER, true)?;
    let hi: DeformationField<2> = make_field_with_order(perturbation, lambda, resolution, CHECK_ORDER, true)?;
    let (a, b) = (delta_2d(&lo, material), delta_2d(&hi, material));
    Ok((a, b, (a - b).abs()))
}

/// Paths with `min φ(ω(s))` below this are rejected.
pub const DEGENERATE_PATH_THRESHOLD: f64 = 1e-3;
/// Absolute tolerance of the adaptive quadrature in the excess identity.
pub const EXCESS_QUAD_TOL: f64 = 1e-13;
/// Contract on the excess-identity residual.
pub const EXCESS_RESIDUAL_TOL: f64 = 1e-7;

/// Minimum of `φ(λ𝟙 + s(ξ − λ𝟙))` over `s ∈ [0, 1]`; the square is a
/// quadratic in `s`.
pub fn min_phi_on_path(xi: &Mat2, lambda: f64) -> f64 {
    let d = *xi - Mat2::scaled_identity(lambda);
    let (a, b, c) = (2.0 * lambda, d.trace(), antitrace(&d));
    let denom = b * b + c * c;
    let s = if denom > 0.0 { (-a * b / denom).clamp(0.0, 1.0) } else { 0.0 };
    (a + b * s).hypot(c * s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcessCheck {
    pub residual: f64,
    pub min_phi: f64,
    pub integral: f64,
    pub quad_error: f64,
}

/// Residual of `φ(ξ) = φ(λ𝟙) + tr(ξ − λ𝟙) + ∫₀¹ (1−s) X(ω(s), ξ − λ𝟙) ds`.
pub fn excess_identity_check(xi: &Mat2, lambda: f64) -> Result<ExcessCheck> {
    let min_phi = min_phi_on_path(xi, lambda);
    if !(min_phi >= DEGENERATE_PATH_THRESHOLD) {
        return Err(Error::DegeneratePath { min_phi, threshold: DEGENERATE_PATH_THRESHOLD });
    }
    let id = Mat2::scaled_identity(lambda);
    let d = *xi - id;
    let (integral, quad_error) =
        adaptive_gk(|s| (1.0 - s) * excess_integrand_x(&(id + d * s), &d).unwrap_or(f64::NAN), 0.0, 1.0, EXCESS_QUAD_TOL);
    let residual = (phi2(xi) - phi2(&id) - d.trace() - integral).abs();
    Ok(ExcessCheck { residual, min_phi, integral, quad_error })
}
