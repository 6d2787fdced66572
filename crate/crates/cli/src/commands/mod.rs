use std::path::Path;

use critload_core::config::load_material;
use critload_core::volumetric::{check_hypotheses, LogGrid, Material};

use crate::outcome::Failure;
use crate::output::read_file;

pub mod cavitation;
pub mod conjecture;
pub mod critical_load;
pub mod field_check;
pub mod kappa;
pub mod verify;

/// Reads and builds a material; every failure here is a config error.
pub fn material_from(path: &Path) -> Result<(Material, String), Failure> {
    let text = read_file(path)?;
    let material = load_material(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok((material, text))
}

pub fn require_dim(material: &Material, dim: usize) -> Result<(), Failure> {
    if dim != 2 && dim != 3 {
        return Err(Failure::usage(format!("--dim must be 2 or 3, got {dim}")));
    }
    if material.dim() != dim {
        return Err(Failure::usage(format!("--dim {dim} but the material has dim = {}", material.dim())));
    }
    Ok(())
}

pub fn require_hypotheses(material: &Material) -> Result<(), Failure> {
    let report = check_hypotheses(material.law(), &LogGrid::default());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("volumetric law fails its hypotheses: {:?}", report.failures)))
    }
}

/// `points` loads spread uniformly over `[lo, hi]`.
pub fn uniform(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
