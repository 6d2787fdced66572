//! Empirical probe of `∫ P(λ𝟙 + ∇φ) dx ≥ 0` with
//! `P(A) = Σ_{i<j} σᵢσⱼ − λ Σ σᵢ`. Results are evidence, never a proof.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::fields::{make_field, DeformationField, Perturbation, PerturbationFamily};
use crate::svcalc::{Mat3, SquareOps};

/// `Σ_{i<j} σᵢσⱼ − λ Σ σᵢ`.
pub fn p_function(a: &Mat3, lambda: f64) -> f64 {
    let s = a.singular_values();
    s.pair_sum() - lambda * s.sum()
}

/// `|A|² + 3λ|A|`.
pub fn p_bound(a: &Mat3, lambda: f64) -> f64 {
    a.norm_sq() + 3.0 * lambda * a.norm()
}

/// Quadrature cells per unit of the highest sampled frequency.
pub const CELLS_PER_FREQ: usize = 4;
/// Frequencies are drawn from `1..=MAX_FREQ`.
pub const MAX_FREQ: u32 = 2;
/// Amplitudes are log-uniform on this range.
pub const AMP_RANGE: (f64, f64) = (1e-3, 0.3);
/// A trial below this is reported as a counterexample candidate.
pub const PROBE_TOL: f64 = -1e-6;
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub perturbation: Perturbation,
    pub integral: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureReport {
    pub lambda: f64,
    pub trials: Vec<Trial>,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// `(lower edge, upper edge, count)`.
    pub histogram: Vec<(f64, f64, usize)>,
}

impl ConjectureReport {
    pub fn argmin(&self) -> Option<&Trial> {
        self.trials.iter().min_by(|a, b| a.integral.total_cmp(&b.integral))
    }

    /// No trial fell below [`PROBE_TOL`].
    pub fn consistent(&self) -> bool {
        self.min >= PROBE_TOL
    }
}

/// `∫ P(∇u) dx` over the unit cube.
pub fn p_integral(field: &DeformationField<3>) -> f64 {
    let lambda = field.lambda;
    field.integrate(|a| p_function(a, lambda))
}

/// Random bump or divergence-free perturbation with uniform direction.
pub fn random_perturbation(rng: &mut ChaCha8Rng) -> Perturbation {
    let family = if rng.gen_bool(0.5) { PerturbationFamily::Bump } else { PerturbationFamily::DivFree };
    let freq = rng.gen_range(1..=MAX_FREQ) as f64;
    let amp = rng.gen_range(AMP_RANGE.0.ln()..AMP_RANGE.1.ln()).exp();
    let direction: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
    Perturbation::new(family, 3, amp, freq, Some(direction)).expect("valid random perturbation")
}

pub fn probe_one(perturbation: &Perturbation, lambda: f64) -> Result<f64> {
    let cells = (CELLS_PER_FREQ * perturbation.freq.ceil() as usize).max(crate::fields::MIN_RESOLUTION);
    let field = make_field::<3>(perturbation, lambda, cells, false)?;
    Ok(p_integral(&field))
}

pub fn conjecture_probe(lambda: f64, trials: usize, rng: &mut ChaCha8Rng) -> Result<ConjectureReport> {
    let perturbations: Vec<Perturbation> = (0..trials).map(|_| random_perturbation(rng)).collect();
    let mut out = Vec::with_capacity(trials);
    for p in perturbations {
        let integral = probe_one(&p, lambda)?;
        out.push(Trial { perturbation: p, integral });
    }
    Ok(summarize(lambda, out))
}

fn summarize(lambda: f64, trials: Vec<Trial>) -> ConjectureReport {
    let values: Vec<f64> = trials.iter().map(|t| t.integral).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = crate::reduce::pairwise_sum(&values) / values.len().max(1) as f64;
    let mut histogram = Vec::new();
    if !values.is_empty() {
        let width = (max - min) / HISTOGRAM_BINS as f64;
        for b in 0..HISTOGRAM_BINS {
            let lo = min + width * b as f64;
            let hi = if b + 1 == HISTOGRAM_BINS { max } else { min + width * (b + 1) as f64 };
            let count = values.iter().filter(|&&v| v >= lo && (v < hi || (b + 1 == HISTOGRAM_BINS && v <= hi))).count();
            histogram.push((lo, hi, count));
        }
    }
    ConjectureReport { lambda, trials, min, mean, max, histogram }
}
