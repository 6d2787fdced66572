use std::path::Path;

use critload_core::critload3d::conjecture::{conjecture_probe, ConjectureReport, Trial, PROBE_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::outcome::{Failure, Outcome};
use crate::output::{num, Provenance, Sink, Table};

const HEADER: [&str; 8] = ["trial", "family", "amp", "freq", "d1", "d2", "d3", "integral"];

/// Field file reproducing a trial, loadable by `field-check`.
pub fn trial_toml(t: &Trial, lambda: f64) -> String {
    let p = &t.perturbation;
    let d: Vec<String> = p.direction.iter().map(|v| format!("{v:?}")).collect();
    format!(
        "# integral = {:?}\nlambda = {lambda:?}\nresolution = {}\ndim = 3\n\n[perturbation]\nfamily = \"{}\"\namp = {:?}\nfreq = {:?}\ndirection = [{}]\n",
        t.integral,
        (4.0 * p.freq).ceil().max(8.0) as usize,
        p.family.as_str(),
        p.amp,
        p.freq,
        d.join(", ")
    )
}

fn summary(r: &ConjectureReport) -> Vec<String> {
    let mut notes = vec![format!("min={} mean={} max={} tolerance={}", num(r.min), num(r.mean), num(r.max), num(PROBE_TOL))];
    let bins: Vec<String> = r.histogram.iter().map(|(lo, hi, c)| format!("[{},{}]:{c}", num(*lo), num(*hi))).collect();
    notes.push(format!("histogram {}", bins.join(" ")));
    notes
}

pub fn run(out: &mut Sink, trials: usize, lambda: f64, seed: u64, artifact: &Path) -> Result<Outcome, Failure> {
    if !(lambda > 0.0 && lambda.is_finite()) || trials == 0 {
        return Err(Failure::usage("--lambda must be positive and --trials nonzero"));
    }
    let mut prov = Provenance::new("conjecture");
    prov.field("trials", trials).field("lambda", lambda).field("seed", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = conjecture_probe(lambda, trials, &mut rng)?;
    let mut t = Table::start(out, &prov, &summary(&report), &HEADER)?;
    for (i, tr) in report.trials.iter().enumerate() {
        let p = &tr.perturbation;
        t.row(&[
            i.to_string(),
            p.family.as_str().into(),
            num(p.amp),
            num(p.freq),
            num(p.direction[0]),
            num(p.direction[1]),
            num(p.direction[2]),
            num(tr.integral),
        ])?;
    }
    t.finish()?;
    if report.consistent() {
        return Ok(Outcome::Pass);
    }
    if let Some(worst) = report.argmin() {
        std::fs::write(artifact, trial_toml(worst, lambda))?;
        eprintln!("counterexample candidate written to {}", artifact.display());
    }
    Ok(Outcome::Violation)
}
