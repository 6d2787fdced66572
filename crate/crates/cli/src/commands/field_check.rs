use std::path::{Path, PathBuf};

use critload_core::config::FieldSpec;
use critload_core::critload2d::c0_lower_bound;
use critload_core::fields::{
    chain_tolerance, decomposition_check_2d, delta_3d, energy_3d, jacobian_deficit, lhs_rig_3d, make_field,
    null_lagrangian_check, NULL_LAGRANGIAN_TOL,
};
use critload_core::svcalc::{Mat3, SquareOps};
use critload_core::volumetric::{energy_density_3d, Material};

use super::cavitation::sufficient_load;
use super::material_from;
use crate::outcome::{Failure, Outcome};
use crate::output::{flag, num, read_file, Provenance, Sink, Table};

const HEADER: [&str; 27] = [
    "file",
    "dim",
    "family",
    "amp",
    "freq",
    "resolution",
    "lambda",
    "boundary_compatible",
    "I_u",
    "I_ulambda",
    "delta",
    "lhs_rig1",
    "lhs_rig2",
    "g_integral",
    "psi_integral",
    "trace_excess",
    "G1_integral",
    "G2_integral",
    "jacobian_deficit",
    "null_lagrangian",
    "c0",
    "delta_ge_G",
    "G_nonneg",
    "c0_bound",
    "trace_ge_psi",
    "null_ok",
    "pass",
];

/// Expands directories into their `*.toml` files, sorted by name.
pub fn collect(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Failure::usage(format!("cannot list {}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| e.extension().is_some_and(|x| x == "toml"))
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Failure::usage("no field files given"));
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_flag(v: Option<bool>) -> String {
    v.map(flag).unwrap_or_default()
}

pub fn run(out: &mut Sink, material_path: &Path, fields: &[PathBuf], lambda_factor: Option<f64>) -> Result<Outcome, Failure> {
    let (material, text) = material_from(material_path)?;
    let files = collect(fields)?;
    let mut prov = Provenance::new("field-check");
    prov.field("lambda_factor", format!("{lambda_factor:?}")).file("material", &text);
    let mut specs = Vec::new();
    for f in &files {
        let body = read_file(f)?;
        let spec = FieldSpec::parse(&body).map_err(|e| Failure::usage(format!("{}: {e}", f.display())))?;
        if spec.dim != material.dim() {
            return Err(Failure::usage(format!("{}: dim {} does not match the material", f.display(), spec.dim)));
        }
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        prov.file(&name, &body);
        specs.push((name, spec));
    }
    let scale = match lambda_factor {
        Some(k) if k > 0.0 => Some(k * sufficient_load(&material)?),
        Some(k) => return Err(Failure::usage(format!("--lambda-factor must be positive, got {k}"))),
        None => None,
    };
    let mut notes = Vec::new();
    if let Some(l) = scale {
        notes.push(format!("lambda={} from lambda_factor", num(l)));
    }
    let mut t = Table::start(out, &prov, &notes, &HEADER)?;
    let mut all = true;
    for (name, spec) in &specs {
        let p = spec.perturbation()?;
        let lambda = scale.unwrap_or(spec.lambda);
        let compatible = p.boundary_compatible();
        let head = vec![
            name.clone(),
            spec.dim.to_string(),
            p.family.as_str().into(),
            num(p.amp),
            num(p.freq),
            spec.resolution.to_string(),
            num(lambda),
            flag(compatible),
        ];
        let tail = match &material {
            Material::Two(m) => {
                let field = make_field::<2>(&p, lambda, spec.resolution, true)?;
                let r = decomposition_check_2d(&field, m)?;
                let c0 = if m.hprime_at_load(lambda) > 0.0 { c0_lower_bound(lambda, m).ok() } else { None };
                let c = r.checks(c0, field.volume());
                let pass = !compatible || c.all();
                all &= pass;
                vec![
                    num(r.i_u),
                    num(r.i_ulambda),
                    num(r.delta),
                    num(r.lhs_rig1),
                    num(r.lhs_rig2),
                    num(r.g_integral),
                    num(r.psi_integral),
                    num(r.trace_excess),
                    num(r.g1_integral),
                    num(r.g2_integral),
                    num(r.jacobian_deficit),
                    num(r.null_lagrangian.max()),
                    opt(c0),
                    flag(c.delta_dominates_g),
                    flag(c.g_sum_nonnegative),
                    opt_flag(c.c0_bound),
                    flag(c.trace_dominates_psi),
                    flag(c.null_lagrangians),
                    flag(pass),
                ]
            }
            Material::Three(m) => {
                let field = make_field::<3>(&p, lambda, spec.resolution, true)?;
                let delta = delta_3d(&field, m);
                let trace = field.integrate(|f| f.singular_values().sum() - 3.0 * lambda);
                let nl = null_lagrangian_check(&field);
                let null_ok = nl.max() <= NULL_LAGRANGIAN_TOL * field.volume();
                let trace_ok = trace >= -chain_tolerance(delta);
                let pass = !compatible || (null_ok && trace_ok);
                all &= pass;
                let mut row = vec![
                    num(energy_3d(&field, m)),
                    num(energy_density_3d(m, &Mat3::scaled_identity(lambda)) * field.volume()),
                    num(delta),
                    num(lhs_rig_3d(&field, m.q())),
                    String::new(),
                    String::new(),
                    String::new(),
                    num(trace),
                    String::new(),
                    String::new(),
                    num(jacobian_deficit(&field)),
                    num(nl.max()),
                ];
                row.extend([
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    flag(trace_ok),
                    flag(null_ok),
                    flag(pass),
                ]);
                row
            }
        };
        t.row(&[head, tail].concat())?;
    }
    t.finish()?;
    Ok(Outcome::from_pass(all))
}
