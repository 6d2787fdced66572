//! Fixed-size matrix and singular-value calculus for 2×2 and 3×3 gradients.
//!
//! Everything here is a pure function of its arguments. Matrix norms are
//! Frobenius norms, `A · B = tr(AᵀB)`, and `adj A = (cof A)ᵀ`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Radicands above this (negative) threshold are clamped to zero.
pub const RADICAND_CLAMP: f64 = -1e-12;

/// Normalised cubic discriminant below which the 3×3 solve switches to Jacobi.
pub const DISCRIMINANT_FALLBACK: f64 = 1e-12;

/// Maximum number of cyclic Jacobi sweeps in the repeated-root fallback.
pub const JACOBI_SWEEPS: usize = 50;

/// Square matrix of dimension `N`, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat<const N: usize>(pub [[f64; N]; N]);

pub type Mat2 = Mat<2>;
pub type Mat3 = Mat<3>;

impl<const N: usize> Default for Mat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Mat<N> {
    pub const DIM: usize = N;

    pub fn zeros() -> Self {
        Mat([[0.0; N]; N])
    }

    pub fn identity() -> Self {
        Self::scaled_identity(1.0)
    }

    pub fn scaled_identity(s: f64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = s;
        }
        m
    }

    pub fn diag(d: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_rows(rows: [[f64; N]; N]) -> Self {
        Mat(rows)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    /// Frobenius inner product `tr(AᵀB)`.
    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            for j in 0..N {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                let mut s = 0.0;
                for k in 0..N {
                    s += self.0[i][k] * other.0[k][j];
                }
                m.0[i][j] = s;
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for x in row.iter_mut() {
                *x = f(*x);
            }
        }
        m
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self;
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut m = self;
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl<const N: usize> Neg for Mat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<const N: usize> Mul<f64> for Mat<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|x| x * s)
    }
}

impl<const N: usize> Mul<Mat<N>> for f64 {
    type Output = Mat<N>;
    fn mul(self, m: Mat<N>) -> Mat<N> {
        m * self
    }
}

/// Ordered singular values `0 ≤ σ₁ ≤ … ≤ σ_N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularSpectrum<const N: usize> {
    values: [f64; N],
}

impl<const N: usize> SingularSpectrum<N> {
    /// Builds a spectrum from arbitrary nonnegative values, sorting them.
    pub fn from_values(mut values: [f64; N]) -> Result<Self> {
        for &v in &values {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain { what: "singular value", value: v });
            }
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> [f64; N] {
        self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `|Λ − Λ₀|` with `Λ₀ = (λ, …, λ)`.
    pub fn dist_to_reference(&self, lambda: f64) -> f64 {
        self.values.iter().map(|v| (v - lambda) * (v - lambda)).sum::<f64>().sqrt()
    }

    /// Sum over `i < j` of `σᵢσⱼ`.
    pub fn pair_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..N {
            for j in (i + 1)..N {
                s += self.values[i] * self.values[j];
            }
        }
        s
    }
}

/// Dimension-specific operations (determinant, cofactor, singular values).
pub trait SquareOps<const N: usize> {
    fn det(&self) -> f64;
    fn cof(&self) -> Mat<N>;
    fn singular_values(&self) -> SingularSpectrum<N>;

    fn adj(&self) -> Mat<N> {
        self.cof().transpose()
    }
}

#[inline]
fn clamped_sqrt(x: f64) -> f64 {
    if (RADICAND_CLAMP..0.0).contains(&x) {
        0.0
    } else {
        x.max(0.0).sqrt()
    }
}

impl SquareOps<2> for Mat2 {
    fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    fn cof(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat([[d, -c], [-b, a]])
    }

    /// Closed form from `|M|²` and `det M`:
    /// `σ₁ + σ₂ = √(|M|² + 2|det|)`, `σ₂ − σ₁ = √(|M|² − 2|det|)`.
    fn singular_values(&self) -> SingularSpectrum<2> {
        let fro = self.norm_sq();
        let d = self.det().abs();
        let sum = clamped_sqrt(fro + 2.0 * d);
        let diff = clamped_sqrt(fro - 2.0 * d);
        let s2 = 0.5 * (sum + diff);
        // σ₁ = |det|/σ₂ keeps full relative accuracy for nearly singular M.
        let s1 = if s2 > 0.0 { (d / s2).min(s2) } else { 0.0 };
        SingularSpectrum { values: [s1, s2] }
    }
}

impl SquareOps<3> for Mat3 {
    fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn cof(&self) -> Mat3 {
        let m = &self.0;
        let mut c = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                c.0[i][j] = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];
            }
        }
        c
    }

    fn singular_values(&self) -> SingularSpectrum<3> {
        let s = self.transpose().matmul(self);
        let mut eig = symmetric_eigenvalues_3(&s);
        eig.sort_by(f64::total_cmp);
        let mut sv = eig.map(clamped_sqrt);
        // Eigenvalues of MᵀM lose relative accuracy in the smallest value.
        let top = sv[1] * sv[2];
        if top > 0.0 {
            sv[0] = self.det().abs() / top;
        }
        sv.sort_by(f64::total_cmp);
        SingularSpectrum { values: sv }
    }
}

/// Eigenvalues of a symmetric 3×3 matrix: trigonometric cubic solution,
/// with cyclic Jacobi when the cubic is close to a repeated root.
pub fn symmetric_eigenvalues_3(s: &Mat3) -> [f64; 3] {
    let m = &s.0;
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let q = s.trace() / 3.0;
    let scale = m.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return [0.0; 3];
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p <= DISCRIMINANT_FALLBACK * scale {
        return jacobi_eigenvalues_3(s);
    }
    let b = (*s - Mat3::scaled_identity(q)) * (1.0 / p);
    let r = (b.det() / 2.0).clamp(-1.0, 1.0);
    // Discriminant of the depressed cubic is proportional to 1 − r².
    if 1.0 - r * r <= DISCRIMINANT_FALLBACK {
        return jacobi_eigenvalues_3(s);
    }
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric 3×3 matrix.
pub fn jacobi_eigenvalues_3(s: &Mat3) -> [f64; 3] {
    let mut a = s.0;
    for _ in 0..JACOBI_SWEEPS {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        let diag = a[0][0].powi(2) + a[1][1].powi(2) + a[2][2].powi(2);
        if off <= f64::EPSILON * f64::EPSILON * diag || off == 0.0 {
            break;
        }
        for (p, qq) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][qq];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[qq][qq] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * c;
            // A ← JᵀAJ with the Givens rotation in the (p, q) plane.
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][qq];
                a[k][p] = c * akp - sn * akq;
                a[k][qq] = sn * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[qq][k];
                a[p][k] = c * apk - sn * aqk;
                a[qq][k] = sn * apk + c * aqk;
            }
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}

pub fn singular_values<const N: usize>(m: &Mat<N>) -> SingularSpectrum<N>
where
    Mat<N>: SquareOps<N>,
{
    m.singular_values()
}

/// `φ(ξ) = √(|ξ|² + 2 det ξ)`, which equals `σ₁ + σ₂` when `det ξ ≥ 0`.
///
/// Evaluated as `hypot(tr ξ, atr ξ)`, an exact rearrangement of the radicand.
pub fn phi2(xi: &Mat2) -> f64 {
    xi.trace().hypot(antitrace(xi))
}

/// `φ(ξ)` straight from the radical, with tiny negative radicands clamped.
pub fn phi2_radical(xi: &Mat2) -> f64 {
    clamped_sqrt(xi.norm_sq() + 2.0 * xi.det())
}

/// `|Λ − Λ₀|`; equals `dist(F, λ SO(n))` when `det F ≥ 0`.
pub fn dist_to_scaled_rotations<const N: usize>(f: &Mat<N>, lambda: f64) -> f64
where
    Mat<N>: SquareOps<N>,
{
    f.singular_values().dist_to_reference(lambda)
}

/// `η₁₂ − η₂₁`.
pub fn antitrace(eta: &Mat2) -> f64 {
    eta.0[0][1] - eta.0[1][0]
}

/// Below this `φ(ω)` the excess integrand is treated as degenerate.
pub const EXCESS_DENOMINATOR_TOL: f64 = 1e-12;

/// Second-variation integrand of `φ` along the segment through `ω` in the
/// direction `d`, in antitrace form:
/// `(atr ω · tr d − atr d · tr ω)² / φ³(ω)`.
pub fn excess_integrand_x(omega: &Mat2, d: &Mat2) -> Result<f64> {
    let ph = phi2(omega);
    if ph <= EXCESS_DENOMINATOR_TOL {
        return Err(Error::DegenerateDenominator(ph));
    }
    let cross = antitrace(omega) * d.trace() - antitrace(d) * omega.trace();
    Ok(cross * cross / (ph * ph * ph))
}

/// The same integrand in cofactor form:
/// `(φ²(ω)φ²(d) − ((ω + cof ω)·d)²) / φ³(ω)`.
pub fn excess_integrand_x_cof_form(omega: &Mat2, d: &Mat2) -> Result<f64> {
    let ph = phi2(omega);
    if ph <= EXCESS_DENOMINATOR_TOL {
        return Err(Error::DegenerateDenominator(ph));
    }
    let pd = phi2(d);
    let inner = (*omega + omega.cof()).dot(d);
    Ok((ph * ph * pd * pd - inner * inner) / (ph * ph * ph))
}

/// Pointwise excess density
/// `2λ² curl² / (3 (curl² + max{4λ², div²})^{3/2})`.
pub fn psi(curl: f64, div: f64, lambda: f64) -> f64 {
    let denom = curl * curl + (4.0 * lambda * lambda).max(div * div);
    if curl == 0.0 {
        return 0.0;
    }
    2.0 * lambda * lambda * curl * curl / (3.0 * denom * denom.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn singular_values_examples() {
        let s = Mat2::identity().singular_values().values();
        assert!(close(s[0], 1.0, 1e-15) && close(s[1], 1.0, 1e-15));

        let s = Mat2::from_rows([[2.0, 1.0], [1.0, 2.0]]).singular_values().values();
        assert!(close(s[0], 1.0, 1e-14) && close(s[1], 3.0, 1e-14), "{s:?}");

        let s = Mat3::diag([3.0, 4.0, 5.0]).singular_values().values();
        for (a, b) in s.iter().zip([3.0, 4.0, 5.0]) {
            assert!(close(*a, b, 1e-12), "{s:?}");
        }
    }

    #[test]
    fn repeated_and_zero_spectra() {
        assert_eq!(Mat3::zeros().singular_values().values(), [0.0; 3]);
        assert_eq!(Mat2::zeros().singular_values().values(), [0.0; 2]);
        let s = Mat3::scaled_identity(2.5).singular_values().values();
        for v in s {
            assert!(close(v, 2.5, 1e-14));
        }
        // Two equal singular values exercise the fallback.
        let s = Mat3::diag([1.0, 1.0, 3.0]).singular_values().values();
        assert!(close(s[0], 1.0, 1e-13) && close(s[1], 1.0, 1e-13) && close(s[2], 3.0, 1e-13));
    }

    #[test]
    fn jacobi_matches_trig_on_distinct_roots() {
        let s = Mat3::from_rows([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]]);
        let mut a = symmetric_eigenvalues_3(&s);
        let mut b = jacobi_eigenvalues_3(&s);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for i in 0..3 {
            assert!(close(a[i], b[i], 1e-12));
        }
    }

    #[test]
    fn phi2_examples() {
        let lam = 1.7;
        assert!(close(phi2(&Mat2::scaled_identity(lam)), 2.0 * lam, 1e-15));
        assert!(close(phi2(&Mat2::diag([3.0, 4.0])), 7.0, 1e-15));
        let rot = Mat2::from_rows([[0.0, -1.0], [1.0, 0.0]]);
        assert!(close(phi2(&rot), 2.0, 1e-15));
        assert!(close(phi2_radical(&rot), 2.0, 1e-15));
    }

    #[test]
    fn dist_examples() {
        let lam = 0.8;
        assert_eq!(dist_to_scaled_rotations(&Mat2::scaled_identity(lam), lam), 0.0);
        let d = dist_to_scaled_rotations(&Mat2::diag([lam, 2.0 * lam]), lam);
        assert!(close(d, lam, 1e-14));
    }

    #[test]
    fn antitrace_examples() {
        assert_eq!(antitrace(&Mat2::identity()), 0.0);
        assert_eq!(antitrace(&Mat2::from_rows([[0.0, -1.0], [1.0, 0.0]])), -2.0);
    }

    #[test]
    fn excess_integrand_examples() {
        let lam = 1.3;
        let omega = Mat2::scaled_identity(lam);
        let x = excess_integrand_x(&omega, &Mat2::scaled_identity(0.4)).unwrap();
        assert_eq!(x, 0.0);
        let c = 0.7;
        // atr = c, tr = 0
        let d = Mat2::from_rows([[0.0, c / 2.0], [-c / 2.0, 0.0]]);
        let x = excess_integrand_x(&omega, &d).unwrap();
        let expected = (2.0 * lam * c).powi(2) / (2.0 * lam).powi(3);
        assert!(close(x, expected, 1e-14));
        assert!(matches!(excess_integrand_x(&Mat2::zeros(), &d), Err(Error::DegenerateDenominator(_))));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(0.0, 3.0, 1.0), 0.0);
        let v = psi(1.0, 0.0, 1.0);
        assert!(close(v, 2.0 / (3.0 * 5f64.powf(1.5)), 1e-15));
        // max branch: any |div| ≤ 2λ gives the same value
        assert_eq!(psi(0.3, 0.5, 1.0), psi(0.3, -1.9, 1.0));
    }

    #[test]
    fn cofactor_examples() {
        assert_eq!(Mat3::identity().cof(), Mat3::identity());
        assert_eq!(Mat2::identity().cof(), Mat2::identity());
        assert!(close(Mat3::diag([2.0, 3.0, 5.0]).det(), 30.0, 1e-14));
        let m = Mat3::from_rows([[1.0, 2.0, 0.5], [-0.3, 1.5, 2.0], [0.7, -1.1, 0.9]]);
        let r = m.matmul(&m.adj()) - Mat3::scaled_identity(m.det());
        assert!(r.norm() < 1e-13);
    }
}
