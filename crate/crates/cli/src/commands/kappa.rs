use critload_core::critload3d::KAPPA_RESOLUTION;
use critload_core::reduce::par_map;
use critload_core::zhang::kappa_numeric;

use crate::outcome::{Failure, Outcome};
use crate::output::{num, parse_list, Provenance, Sink, Table};

/// Accuracy claimed for the affine approximation of κ.
pub const AFFINE_TOL: f64 = 0.025;

const HEADER: [&str; 6] = ["q", "lower", "numeric", "upper", "affine", "abs_gap"];

pub fn q_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let v = parse_list(spec, "--q-grid")?;
    let [start, stop, step] = v[..] else {
        return Err(Failure::usage("--q-grid must be `start,stop,step`"));
    };
    if !(step > 0.0 && start <= stop) {
        return Err(Failure::usage("--q-grid needs step > 0 and start <= stop"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let qs: Vec<f64> = (0..n).map(|i| ((start + step * i as f64) * 1e12).round() / 1e12).collect();
    if qs.iter().any(|&q| !(q > 2.0 && q < 3.0)) {
        return Err(Failure::usage("--q-grid must lie inside (2, 3)"));
    }
    Ok(qs)
}

pub fn run(out: &mut Sink, spec: &str) -> Result<Outcome, Failure> {
    let qs = q_grid(spec)?;
    let mut prov = Provenance::new("kappa");
    prov.field("q_grid", spec).field("resolution", KAPPA_RESOLUTION);
    let estimates = par_map(qs.len(), |i| kappa_numeric(qs[i], KAPPA_RESOLUTION));
    let estimates = estimates.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::start(out, &prov, &[], &HEADER)?;
    let mut pass = true;
    for e in &estimates {
        pass &= e.in_bracket() && e.affine_gap() <= AFFINE_TOL;
        t.row(&[num(e.q), num(e.lower), num(e.numeric), num(e.upper), num(e.affine), num(e.affine_gap())])?;
    }
    t.finish()?;
    Ok(Outcome::from_pass(pass))
}
