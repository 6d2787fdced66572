//! Growth constants and convexity-defect lower bounds for `|A|^q`.
//!
//! In 2D (`1 < q < 2`) the defect `|A+B|^q − |A|^q − q|A|^{q−2} A·B` is
//! compared against `F_M(B) = C₁|B|²` for `|B| ≤ M`, `C₂|B|^q` beyond.
//! In 3D (`2 < q < 3`) the analogous constant is `κ(q)`, the best constant in
//! `defect ≥ κ|B|^q`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::reduce::par_argmin;
use crate::search::golden_min;
use crate::svcalc::Mat2;

/// `C₁(M, q) = 1 / (2 (2M)^{2−q})`.
pub fn c1(m: f64, q: f64) -> f64 {
    0.5 / (2.0 * m).powf(2.0 - q)
}

/// `C₂(q) = 1 / (2 · 2^{2−q})`.
pub fn c2(q: f64) -> f64 {
    0.5 / 2f64.powf(2.0 - q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthConstants2D {
    pub c1: f64,
    pub c2: f64,
    pub m: f64,
    pub q: f64,
}

impl GrowthConstants2D {
    pub fn new(m: f64, q: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("M={m} must be positive")));
        }
        if !(q > 1.0 && q < 2.0) {
            return Err(Error::InvalidParameter(format!("q={q} not in (1,2)")));
        }
        Ok(Self { c1: c1(m, q), c2: c2(q), m, q })
    }

    /// `f_M(t) = min(C₁t², C₂t^q)`.
    pub fn little_f(&self, t: f64) -> f64 {
        (self.c1 * t * t).min(self.c2 * t.powf(self.q))
    }

    /// `F_M(B)`, switching branch at `|B| = M`.
    pub fn big_f(&self, b_norm: f64) -> f64 {
        if b_norm <= self.m {
            self.c1 * b_norm * b_norm
        } else {
            self.c2 * b_norm.powf(self.q)
        }
    }
}

pub fn little_f(t: f64, m: f64, q: f64) -> f64 {
    (c1(m, q) * t * t).min(c2(q) * t.powf(q))
}

pub fn big_f(b: &Mat2, m: f64, q: f64) -> f64 {
    let n = b.norm();
    if n <= m {
        c1(m, q) * n * n
    } else {
        c2(q) * n.powf(q)
    }
}

/// `|A+B|^q − |A|^q − q|A|^{q−2} A·B`.
pub fn convexity_defect<const N: usize>(a: &crate::svcalc::Mat<N>, b: &crate::svcalc::Mat<N>, q: f64) -> f64 {
    let na = a.norm();
    (*a + *b).norm().powf(q) - na.powf(q) - q * na.powf(q - 2.0) * a.dot(b)
}

/// Defect minus `F_M(B)` with `M = |A|`.
pub fn verify_zhang(a: &Mat2, b: &Mat2, q: f64) -> f64 {
    convexity_defect(a, b, q) - big_f(b, a.norm(), q)
}

/// Pass threshold for sampled residuals.
pub const ZHANG_RESIDUAL_TOL: f64 = -1e-12;
/// Range of `|B|/|A|`, sampled log-uniformly.
pub const RATIO_RANGE: (f64, f64) = (1e-3, 1e3);
/// Range of `|A|`, sampled log-uniformly.
pub const A_NORM_RANGE: (f64, f64) = (1e-1, 1e1);

#[derive(Clone, Debug, PartialEq)]
pub struct ZhangCertification {
    pub q: f64,
    pub samples: usize,
    pub min_residual: f64,
    pub argmin: (Mat2, Mat2),
    pub passed: bool,
}

fn random_direction(rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let e: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let m = Mat2::from_rows([[e[0], e[1]], [e[2], e[3]]]);
        let n = m.norm();
        if n > 1e-12 {
            return m * (1.0 / n);
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Draws `(A, B)` pairs: uniform directions, log-uniform `|A|` and `|B|/|A|`.
pub fn sample_pairs(rng: &mut ChaCha8Rng, samples: usize) -> Vec<(Mat2, Mat2)> {
    (0..samples)
        .map(|_| {
            let na = log_uniform(rng, A_NORM_RANGE);
            let ratio = log_uniform(rng, RATIO_RANGE);
            let a = random_direction(rng) * na;
            let b = random_direction(rng) * (na * ratio);
            (a, b)
        })
        .collect()
}

/// Brute-force check of `defect ≥ F_{|A|}(B)` on seeded random pairs.
pub fn certify_zhang(q: f64, samples: usize, rng: &mut ChaCha8Rng) -> Result<ZhangCertification> {
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::InvalidParameter(format!("q={q} not in (1,2)")));
    }
    let pairs = sample_pairs(rng, samples);
    let (idx, min_residual) = par_argmin(pairs.len(), |i| verify_zhang(&pairs[i].0, &pairs[i].1, q))
        .ok_or_else(|| Error::InvalidParameter("no samples".into()))?;
    Ok(ZhangCertification { q, samples, min_residual, argmin: pairs[idx], passed: min_residual >= ZHANG_RESIDUAL_TOL })
}

/// `(2^{2−q}, q 2^{1−q})`.
pub fn kappa_bounds(q: f64) -> (f64, f64) {
    (2f64.powf(2.0 - q), q * 2f64.powf(1.0 - q))
}

/// `3 − q + (2 − √2)(q − 2)`.
pub fn kappa_affine(q: f64) -> f64 {
    3.0 - q + (2.0 - std::f64::consts::SQRT_2) * (q - 2.0)
}

/// Scalar reduction of the 3D defect: `((1+2ct+t²)^{q/2} − 1 − qct) / t^q`
/// with `t = |B|/|A|` and `c` the cosine between `A` and `B`.
pub fn kappa_objective(t: f64, c: f64, q: f64) -> f64 {
    let s = (1.0 + 2.0 * c * t + t * t).max(0.0);
    (s.powf(0.5 * q) - 1.0 - q * c * t) / t.powf(q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaEstimate {
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
    pub numeric: f64,
    pub affine: f64,
    pub argmin_t: f64,
    pub argmin_c: f64,
}

impl KappaEstimate {
    pub fn in_bracket(&self) -> bool {
        self.lower <= self.numeric && self.numeric <= self.upper
    }

    pub fn affine_gap(&self) -> f64 {
        (self.numeric - self.affine).abs()
    }
}

/// Search window for `log t`.
const KAPPA_LOG_T: (f64, f64) = (-9.2, 9.2);

/// Grid minimisation over `(log t, c)` followed by alternating golden-section
/// refinement inside the neighbouring cells.
pub fn kappa_numeric(q: f64, resolution: usize) -> Result<KappaEstimate> {
    if !(q > 2.0 && q < 3.0) {
        return Err(Error::InvalidParameter(format!("q={q} not in (2,3)")));
    }
    let n = resolution.max(8);
    let dlt = (KAPPA_LOG_T.1 - KAPPA_LOG_T.0) / (n - 1) as f64;
    let dc = 2.0 / (n - 1) as f64;
    let at = |i: usize| (KAPPA_LOG_T.0 + dlt * (i / n) as f64, -1.0 + dc * (i % n) as f64);
    let (best, _) = par_argmin(n * n, |i| {
        let (lt, c) = at(i);
        kappa_objective(lt.exp(), c, q)
    })
    .ok_or_else(|| Error::InvalidParameter("empty kappa grid".into()))?;
    let (mut lt, mut c) = at(best);
    let lt_win = (lt - dlt, lt + dlt);
    let c_win = ((c - dc).max(-1.0), (c + dc).min(1.0));
    let mut val = kappa_objective(lt.exp(), c, q);
    for _ in 0..8 {
        let (nlt, _) = golden_min(lt_win.0, lt_win.1, 1e-12, |x| kappa_objective(x.exp(), c, q));
        lt = nlt;
        let (nc, nv) = golden_min(c_win.0, c_win.1, 1e-13, |y| kappa_objective(lt.exp(), y, q));
        c = nc;
        let done = (val - nv).abs() <= 1e-15;
        val = val.min(nv);
        if done {
            break;
        }
    }
    let (lower, upper) = kappa_bounds(q);
    Ok(KappaEstimate { q, lower, upper, numeric: val, affine: kappa_affine(q), argmin_t: lt.exp(), argmin_c: c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn constant_examples() {
        assert!((c2(1.5) - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((c2(2.0 - 1e-12) - 0.5).abs() < 1e-11);
        for q in [1.1, 1.5, 1.9] {
            assert!(c2(q) > 0.5 / 3f64.powf(2.0 - q));
        }
    }

    #[test]
    fn branch_switch_at_m() {
        let g = GrowthConstants2D::new(1.7, 1.5).unwrap();
        assert_eq!(g.little_f(0.0), 0.0);
        assert!((g.c1 * g.m * g.m - g.c2 * g.m.powf(g.q)).abs() < 1e-14);
        assert!((g.little_f(g.m) - g.c1 * g.m * g.m).abs() < 1e-14);
        let b = Mat2::diag([2.0 * 1.7, 0.0]);
        assert!((big_f(&b, 1.7, 1.5) - g.c2 * (3.4f64).powf(1.5)).abs() < 1e-14);
        assert_eq!(big_f(&Mat2::zeros(), 1.7, 1.5), 0.0);
    }

    #[test]
    fn zhang_zero_perturbation() {
        let a = Mat2::from_rows([[1.0, 0.3], [-0.2, 0.8]]);
        assert_eq!(verify_zhang(&a, &Mat2::zeros(), 1.5), 0.0);
    }

    #[test]
    fn zhang_opposite_perturbation_at_q_1_8() {
        // B = −A: defect = (q − 1)|A|^q, F = C₁|A|².
        let a = Mat2::scaled_identity(2f64.sqrt());
        let q = 1.8;
        let expected = (q - 1.0) * a.norm().powf(q) - c1(a.norm(), q) * a.norm_sq();
        assert!((verify_zhang(&a, &(-a), q) - expected).abs() < 1e-13);
        assert!(expected >= 0.0);
    }

    #[test]
    fn certification_is_seeded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a = certify_zhang(1.8, 2000, &mut r1).unwrap();
        let b = certify_zhang(1.8, 2000, &mut r2).unwrap();
        assert_eq!(a, b);
        assert!(a.passed, "{}", a.min_residual);
    }

    #[test]
    fn kappa_examples() {
        let (lo, hi) = kappa_bounds(2.5);
        assert!((lo - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 && (hi - 0.88388).abs() < 1e-5);
        assert!((kappa_objective(2.0, -1.0, 2.5) - hi).abs() < 1e-14);
        assert!((kappa_affine(2.0) - 1.0).abs() < 1e-15);
        assert!((kappa_affine(3.0) - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!((kappa_affine(2.5) - 0.79289).abs() < 1e-5);
        let k = kappa_numeric(2.5, 200).unwrap();
        assert!(k.in_bracket(), "{k:?}");
        assert!(k.affine_gap() <= 0.025, "{k:?}");
    }

    #[test]
    fn kappa_near_three_matches_limit() {
        // At q = 3 the infimum is 2 − √2, attained at t = 2 + √2, c = −1.
        let t = 2.0 + 2f64.sqrt();
        assert!((kappa_objective(t, -1.0, 3.0) - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        let k = kappa_numeric(2.999, 200).unwrap();
        assert!((k.numeric - (2.0 - 2f64.sqrt())).abs() < 2e-3, "{k:?}");
    }

    proptest! {
        #[test]
        fn continuity_of_f(m in 1e-2f64..1e2, q in 1.01f64..1.99) {
            let a = c1(m, q) * m * m;
            let b = c2(q) * m.powf(q);
            prop_assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        }

        #[test]
        fn little_f_below_both_branches(t in 0.0f64..1e3, m in 0.1f64..10.0, q in 1.01f64..1.99) {
            let f = little_f(t, m, q);
            prop_assert!(f <= c1(m, q) * t * t);
            prop_assert!(f <= c2(q) * t.powf(q));
        }

        #[test]
        fn little_f_monotone(t in 0.0f64..100.0, dt in 0.0f64..10.0, q in 1.01f64..1.99) {
            prop_assert!(little_f(t, 1.3, q) <= little_f(t + dt, 1.3, q));
        }
    }
}
