use std::path::Path;

use critload_core::critload2d::{check_sufficient_2d, critical_load_2d, Criterion2DReport};
use critload_core::critload3d::{check_sufficient_3d_with, critical_load_3d, Criterion3DReport, KappaMode};
use critload_core::volumetric::Material;

use super::{material_from, require_dim, require_hypotheses, uniform};
use crate::outcome::{Failure, Outcome};
use crate::output::{flag, num, parse_pair, Provenance, Sink, Table};
use crate::KappaArg;

const HEADER_2D: [&str; 11] =
    ["kind", "lambda", "q", "hprime", "lhs_second", "rhs_second", "lhs_first", "rhs_first", "satisfied", "strict", "branch"];

const HEADER_3D: [&str; 14] = [
    "kind",
    "lambda",
    "q",
    "gamma",
    "kappa",
    "kappa_mode",
    "hprime",
    "lhs_main",
    "rhs_main",
    "lhs_gamma",
    "rhs_gamma",
    "satisfied",
    "strict_main",
    "branch",
];

fn row_2d(kind: &str, r: &Criterion2DReport) -> Vec<String> {
    vec![
        kind.into(),
        num(r.lambda),
        num(r.q),
        num(r.hprime_at_lambda_sq),
        num(r.lhs_second),
        num(r.rhs_second),
        num(r.lhs_first),
        num(r.rhs_first),
        flag(r.satisfied),
        flag(r.strict),
        r.branch.as_str().into(),
    ]
}

fn row_3d(kind: &str, r: &Criterion3DReport) -> Vec<String> {
    vec![
        kind.into(),
        num(r.lambda),
        num(r.q),
        num(r.gamma),
        num(r.kappa.value),
        r.kappa.mode.as_str().into(),
        num(r.hprime_at_lambda_cubed),
        num(r.lhs_main),
        num(r.rhs_main),
        num(r.lhs_gamma),
        num(r.rhs_gamma),
        flag(r.satisfied),
        flag(r.strict_main),
        r.branch.as_str().into(),
    ]
}

pub fn run(out: &mut Sink, dim: usize, path: &Path, kappa: KappaArg, bracket: &str, points: usize) -> Result<Outcome, Failure> {
    let (material, text) = material_from(path)?;
    require_dim(&material, dim)?;
    let (lo, hi) = parse_pair(bracket, "--bracket")?;
    if lo <= 0.0 {
        return Err(Failure::usage("--bracket must be positive"));
    }
    require_hypotheses(&material)?;
    let mode = match kappa {
        KappaArg::Lower => KappaMode::LowerBound,
        KappaArg::Numeric => KappaMode::Numeric,
    };
    let mut prov = Provenance::new("critical-load");
    prov.field("dim", dim).field("bracket", format!("{lo},{hi}")).field("points", points).file("material", &text);

    match &material {
        Material::Two(m) => {
            let cl = critical_load_2d(m, (lo, hi))?;
            let notes = vec![
                format!("lambda_star={}", num(cl.lambda_star)),
                format!("never_violated={} conservative={}", cl.never_violated, cl.conservative),
            ];
            let mut t = Table::start(out, &prov, &notes, &HEADER_2D)?;
            for l in uniform(lo, hi, points) {
                t.row(&row_2d("scan", &check_sufficient_2d(l, m)))?;
            }
            t.row(&row_2d("critical", &check_sufficient_2d(cl.lambda_star, m)))?;
            t.finish()?;
        }
        Material::Three(m) => {
            prov.field("kappa", mode.as_str());
            let cl = critical_load_3d(m, (lo, hi), mode)?;
            let notes = vec![
                format!("lambda_star={} binding={}", num(cl.lambda_star), cl.binding.as_str()),
                format!("lambda_main={} lambda_gamma={}", num(cl.main.lambda_star), num(cl.gamma.lambda_star)),
                format!("kappa={} kappa_mode={}", num(cl.kappa.value), cl.kappa.mode.as_str()),
            ];
            let mut t = Table::start(out, &prov, &notes, &HEADER_3D)?;
            for l in uniform(lo, hi, points) {
                t.row(&row_3d("scan", &check_sufficient_3d_with(l, m, cl.kappa)))?;
            }
            t.row(&row_3d("critical", &check_sufficient_3d_with(cl.lambda_star, m, cl.kappa)))?;
            t.finish()?;
        }
    }
    Ok(Outcome::Pass)
}
