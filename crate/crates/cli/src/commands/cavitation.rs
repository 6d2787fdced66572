use std::path::Path;

use critload_core::critload2d::critical_load_2d;
use critload_core::critload3d::{critical_load_3d, KappaMode};
use critload_core::radial::{default_a_grid, empirical_critical_load, minimize_trial_family, TrialMinimum};
use critload_core::volumetric::Material;

use super::{material_from, require_dim, uniform};
use crate::outcome::{Failure, Outcome};
use crate::output::{flag, num, parse_pair, Provenance, Sink, Table};

const HEADER: [&str; 5] = ["lambda", "a_star", "I_star", "I_homogeneous", "cavitated"];

/// Bracket used for the sufficient-condition load.
pub const CRITICAL_BRACKET: (f64, f64) = (0.5, 3.0);

fn cells(m: &TrialMinimum) -> Vec<String> {
    vec![num(m.lambda), num(m.a_star), num(m.i_star), num(m.i_homogeneous), flag(m.cavitated)]
}

pub fn sufficient_load(material: &Material) -> Result<f64, Failure> {
    Ok(match material {
        Material::Two(m) => critical_load_2d(m, CRITICAL_BRACKET)?.lambda_star,
        Material::Three(m) => critical_load_3d(m, CRITICAL_BRACKET, KappaMode::LowerBound)?.lambda_star,
    })
}

pub fn run(out: &mut Sink, path: &Path, dim: usize, bracket: &str, points: usize, a_points: usize) -> Result<Outcome, Failure> {
    let (material, text) = material_from(path)?;
    require_dim(&material, dim)?;
    let (lo, hi) = parse_pair(bracket, "--bracket")?;
    if lo <= 0.0 || a_points < 2 {
        return Err(Failure::usage("--bracket must be positive and --a-points at least 2"));
    }
    let mut prov = Provenance::new("cavitation");
    prov.field("dim", dim)
        .field("bracket", format!("{lo},{hi}"))
        .field("points", points)
        .field("a_points", a_points)
        .file("material", &text);

    let lambda_star = sufficient_load(&material)?;
    let lambda_cav = empirical_critical_load(&material, (lo, hi), a_points)?;
    let consistent = lambda_cav >= lambda_star;
    let notes = vec![
        format!("lambda_cav={} lambda_star={}", num(lambda_cav), num(lambda_star)),
        format!("lambda_cav_ge_lambda_star={consistent}"),
    ];
    let mut t = Table::start(out, &prov, &notes, &HEADER)?;
    for l in uniform(lo, hi, points) {
        t.row(&cells(&minimize_trial_family(l, &material, &default_a_grid(l, a_points))?))?;
    }
    t.row(&cells(&minimize_trial_family(lambda_cav, &material, &default_a_grid(lambda_cav, a_points))?))?;
    t.finish()?;
    Ok(Outcome::from_pass(consistent))
}
