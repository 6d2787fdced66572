use std::path::Path;

use critload_core::critload2d::{check_sufficient_2d, counterexample_2d, critical_load_2d, grid_verify_g1, PolarGrid};
use critload_core::critload3d::{
    check_sufficient_3d_with, counterexample_3d, critical_load_3d, grid_verify_f, KappaMode, KappaUsed, SphericalGrid,
};
use critload_core::fields::{
    decomposition_check_2d, excess_identity_check, make_field, min_phi_on_path, Perturbation, PerturbationFamily,
    DEGENERATE_PATH_THRESHOLD, EXCESS_RESIDUAL_TOL,
};
use critload_core::reduce::par_map;
use critload_core::svcalc::Mat2;
use critload_core::volumetric::{CofactorTerm, Material, Material2D, Material3D, VolumetricLaw};
use critload_core::zhang::{certify_zhang, ZHANG_RESIDUAL_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::material_from;
use crate::outcome::{Failure, Outcome};
use crate::output::{flag, num, Provenance, Sink, Table};
use crate::Lemma;

const HEADER: [&str; 9] = ["lemma", "q", "lambda", "samples", "statistic", "threshold", "passed", "expected_violation", "detail"];

/// One verification result; `passed` refers to the certification itself.
struct Verdict {
    lemma: &'static str,
    q: Option<f64>,
    lambda: Option<f64>,
    samples: usize,
    statistic: f64,
    threshold: f64,
    passed: bool,
    expected_violation: bool,
    detail: String,
}

impl Verdict {
    fn outcome(&self) -> Outcome {
        Outcome::from_pass(self.passed || self.expected_violation)
    }

    fn cells(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        vec![
            self.lemma.into(),
            opt(self.q),
            opt(self.lambda),
            self.samples.to_string(),
            num(self.statistic),
            num(self.threshold),
            flag(self.passed),
            flag(self.expected_violation),
            self.detail.clone(),
        ]
    }
}

fn q_in(q: Option<f64>, range: (f64, f64), default: Option<f64>) -> Result<f64, Failure> {
    let q = q.or(default).ok_or_else(|| Failure::usage("--q is required for this lemma"))?;
    if q > range.0 && q < range.1 {
        Ok(q)
    } else {
        Err(Failure::usage(format!("--q {q} outside ({}, {})", range.0, range.1)))
    }
}

fn positive(lambda: Option<f64>) -> Result<Option<f64>, Failure> {
    match lambda {
        Some(l) if !(l > 0.0 && l.is_finite()) => Err(Failure::usage(format!("--lambda must be positive, got {l}"))),
        other => Ok(other),
    }
}

pub fn run(
    out: &mut Sink,
    lemma: Lemma,
    q: Option<f64>,
    lambda: Option<f64>,
    samples: Option<usize>,
    material: Option<&Path>,
    seed: u64,
) -> Result<Outcome, Failure> {
    let lambda = positive(lambda)?;
    let mut prov = Provenance::new("verify");
    prov.field("lemma", format!("{lemma:?}"))
        .field("q", format!("{q:?}"))
        .field("lambda", format!("{lambda:?}"))
        .field("samples", format!("{samples:?}"))
        .field("seed", seed);
    let material = match material {
        Some(p) => {
            let (m, text) = material_from(p)?;
            prov.file("material", &text);
            Some(m)
        }
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verdict = match lemma {
        Lemma::Zhang => zhang(q_in(q, (1.0, 2.0), None)?, samples.unwrap_or(100_000), &mut rng)?,
        Lemma::Lesperanza => lesperanza(q, lambda, material)?,
        Lemma::Lesperanza2 => lesperanza2(q, lambda, material)?,
        Lemma::Excess => excess(lambda.unwrap_or(1.0), samples.unwrap_or(10_000), &mut rng)?,
        Lemma::Trace => trace(lambda.unwrap_or(1.0), samples.unwrap_or(20), &mut rng)?,
    };
    let mut t = Table::start(out, &prov, &[], &HEADER)?;
    t.row(&verdict.cells())?;
    t.finish()?;
    Ok(verdict.outcome())
}

fn zhang(q: f64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Verdict, Failure> {
    let c = certify_zhang(q, samples, rng)?;
    let (a, b) = c.argmin;
    Ok(Verdict {
        lemma: "zhang",
        q: Some(q),
        lambda: None,
        samples,
        statistic: c.min_residual,
        threshold: ZHANG_RESIDUAL_TOL,
        passed: c.passed,
        expected_violation: false,
        detail: format!("argmin A={:?} B={:?}", a.0, b.0),
    })
}

fn material_2d(q: Option<f64>, material: Option<Material>) -> Result<Material2D, Failure> {
    match material {
        Some(Material::Two(m)) => {
            if q.is_some_and(|q| q != m.q()) {
                return Err(Failure::usage("--q disagrees with the material file"));
            }
            Ok(m)
        }
        Some(Material::Three(_)) => Err(Failure::usage("lesperanza needs a dim = 2 material")),
        None => {
            let q = q_in(q, (1.0, 2.0), Some(1.5))?;
            Ok(Material2D::new(q, VolumetricLaw::quad_log(1.0, 2.0)?)?)
        }
    }
}

fn material_3d(q: Option<f64>, material: Option<Material>) -> Result<Material3D, Failure> {
    match material {
        Some(Material::Three(m)) => {
            if q.is_some_and(|q| q != m.q()) {
                return Err(Failure::usage("--q disagrees with the material file"));
            }
            Ok(m)
        }
        Some(Material::Two(_)) => Err(Failure::usage("lesperanza2 needs a dim = 3 material")),
        None => {
            let q = q_in(q, (2.0, 3.0), Some(2.5))?;
            Ok(Material3D::new(q, 1.0, VolumetricLaw::power_log(1.0, 1.0, 1.0, 1.0)?, CofactorTerm::Zero)?)
        }
    }
}

fn lesperanza(q: Option<f64>, lambda: Option<f64>, material: Option<Material>) -> Result<Verdict, Failure> {
    let m = material_2d(q, material)?;
    let lambda = match lambda {
        Some(l) => l,
        None => critical_load_2d(&m, (0.5, 3.0))?.lambda_star,
    };
    let report = check_sufficient_2d(lambda, &m);
    let applies = report.satisfied && report.hprime_at_lambda_sq > 0.0;
    let grid = PolarGrid::default();
    let cert = grid_verify_g1(lambda, &m, &grid);
    let witness = counterexample_2d(lambda, &m);
    let p = cert.argmin;
    Ok(Verdict {
        lemma: "lesperanza",
        q: Some(m.q()),
        lambda: Some(lambda),
        samples: cert.evaluated,
        statistic: cert.min,
        threshold: 0.0,
        passed: cert.certified(),
        expected_violation: !applies,
        detail: format!(
            "argmin rho={} mu={}; tail_margin={}; counterexample={}",
            num(p.rho),
            num(p.mu),
            num(cert.tail_margin),
            witness.map(|w| format!("rho={} mu={} g1={}", num(w.rho), num(w.mu), num(w.g1))).unwrap_or_else(|| "none".into())
        ),
    })
}

fn lesperanza2(q: Option<f64>, lambda: Option<f64>, material: Option<Material>) -> Result<Verdict, Failure> {
    let m = material_3d(q, material)?;
    let kappa = KappaUsed::resolve(m.q(), KappaMode::LowerBound)?;
    let lambda = match lambda {
        Some(l) => l,
        None => critical_load_3d(&m, (0.5, 3.0), KappaMode::LowerBound)?.lambda_star,
    };
    let report = check_sufficient_3d_with(lambda, &m, kappa);
    let applies = report.satisfied && report.hprime_at_lambda_cubed > 0.0;
    let grid = SphericalGrid::default();
    let cert = grid_verify_f(lambda, &m, &kappa, &grid);
    let witness = counterexample_3d(lambda, &m, &kappa);
    Ok(Verdict {
        lemma: "lesperanza2",
        q: Some(m.q()),
        lambda: Some(lambda),
        samples: grid.n_rho * grid.n_theta * grid.n_phi,
        statistic: cert.min_f1.min(cert.min_f2),
        threshold: 0.0,
        passed: cert.certified(),
        expected_violation: !applies,
        detail: format!(
            "min_f1={} min_f2={} tail_margin_f1={} f2_direction_min={} kappa={}; counterexample={}",
            num(cert.min_f1),
            num(cert.min_f2),
            num(cert.tail_margin_f1),
            num(cert.f2_direction_min),
            num(kappa.value),
            witness.map(|w| format!("rho={} value={}", num(w.rho), num(w.value))).unwrap_or_else(|| "none".into())
        ),
    })
}

/// Seeded `ξ = λ𝟙 + N(0,1)/2`, rejecting paths that come close to `φ = 0`.
pub fn excess_samples(lambda: f64, samples: usize, rng: &mut ChaCha8Rng) -> Vec<Mat2> {
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let e: [f64; 4] = std::array::from_fn(|_| 0.5 * rng.sample::<f64, _>(StandardNormal));
        let xi = Mat2::from_rows([[lambda + e[0], e[1]], [e[2], lambda + e[3]]]);
        if min_phi_on_path(&xi, lambda) >= DEGENERATE_PATH_THRESHOLD {
            out.push(xi);
        }
    }
    out
}

fn excess(lambda: f64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Verdict, Failure> {
    let xs = excess_samples(lambda, samples, rng);
    let residuals = par_map(xs.len(), |i| excess_identity_check(&xs[i], lambda).map(|c| c.residual));
    let residuals = residuals.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (worst, max) = residuals.iter().enumerate().fold((0, 0.0f64), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(Verdict {
        lemma: "excess",
        q: None,
        lambda: Some(lambda),
        samples,
        statistic: max,
        threshold: EXCESS_RESIDUAL_TOL,
        passed: max <= EXCESS_RESIDUAL_TOL,
        expected_violation: false,
        detail: format!("argmax xi={:?}", xs.get(worst).map(|m| m.0)),
    })
}

/// Seeded 2D bump/trig/divfree perturbation with log-uniform amplitude.
pub fn random_perturbation_2d(rng: &mut ChaCha8Rng) -> Perturbation {
    let family = match rng.gen_range(0..3) {
        0 => PerturbationFamily::Bump,
        1 => PerturbationFamily::Trig,
        _ => PerturbationFamily::DivFree,
    };
    let freq = rng.gen_range(1..=2) as f64;
    let amp = rng.gen_range(1e-3f64.ln()..0.1f64.ln()).exp();
    let direction: Vec<f64> = (0..2).map(|_| rng.sample(StandardNormal)).collect();
    Perturbation::new(family, 2, amp, freq, Some(direction)).expect("valid random perturbation")
}

/// `∫(σ₁+σ₂−2λ) ≥ ∫ψ` on random fields at resolution 16.
fn trace(lambda: f64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Verdict, Failure> {
    let reference = Material2D::reference();
    let mut worst = f64::INFINITY;
    let mut worst_trace = f64::INFINITY;
    let mut detail = String::new();
    for _ in 0..samples {
        let p = random_perturbation_2d(rng);
        let field = make_field::<2>(&p, lambda, 16, true)?;
        let r = decomposition_check_2d(&field, &reference)?;
        let slack = r.trace_excess - r.psi_integral;
        worst_trace = worst_trace.min(r.trace_excess);
        if slack < worst {
            worst = slack;
            detail = format!("{} amp={} freq={}", p.family.as_str(), num(p.amp), num(p.freq));
        }
    }
    let tol = -1e-6;
    Ok(Verdict {
        lemma: "trace",
        q: None,
        lambda: Some(lambda),
        samples,
        statistic: worst,
        threshold: tol,
        passed: samples == 0 || (worst >= tol && worst_trace >= tol),
        expected_violation: false,
        detail: format!("min trace excess={}; worst {detail}", num(worst_trace)),
    })
}
