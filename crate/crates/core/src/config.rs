//! TOML material and field specifications.
//!
//! A material file looks like
//!
//! ```toml
//! dim = 3
//! q = 2.5
//! gamma = 1.0
//!
//! [h]
//! family = "quad_log"
//! params = { a = 1.0, b = 2.0 }
//!
//! [Z]
//! family = "power_of_norm"
//! params = { c = 0.5, p = 1.5 }
//! ```
//!
//! and a field file like
//!
//! ```toml
//! lambda = 1.02
//! resolution = 32
//!
//! [perturbation]
//! family = "bump"
//! amp = 0.05
//! freq = 1.0
//! ```

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fields::{Perturbation, PerturbationFamily};
use crate::volumetric::{CofactorTerm, Material, Material2D, Material3D, VolumetricLaw};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub dim: usize,
    pub q: f64,
    pub gamma: Option<f64>,
    pub h: LawSpec,
    #[serde(rename = "Z")]
    pub z: Option<LawSpec>,
}

fn take_params(spec: &LawSpec, names: &[&str]) -> Result<Vec<f64>> {
    for key in spec.params.keys() {
        if !names.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown parameter `{key}` for family `{}`", spec.family)));
        }
    }
    names
        .iter()
        .map(|n| {
            spec.params.get(*n).copied().ok_or_else(|| Error::Config(format!("family `{}` needs parameter `{n}`", spec.family)))
        })
        .collect()
}

impl LawSpec {
    pub fn to_law(&self) -> Result<VolumetricLaw> {
        match self.family.as_str() {
            "power_log" => {
                let v = take_params(self, &["a", "p", "b", "r"])?;
                VolumetricLaw::power_log(v[0], v[1], v[2], v[3])
            }
            "quad_log" => {
                let v = take_params(self, &["a", "b"])?;
                VolumetricLaw::quad_log(v[0], v[1])
            }
            other => Err(Error::Config(format!("unknown h.family `{other}`"))),
        }
    }

    pub fn to_cofactor(&self) -> Result<CofactorTerm> {
        match self.family.as_str() {
            "zero" => {
                take_params(self, &[])?;
                Ok(CofactorTerm::Zero)
            }
            "power_of_norm" => {
                let v = take_params(self, &["c", "p"])?;
                CofactorTerm::power_of_norm(v[0], v[1])
            }
            other => Err(Error::Config(format!("unknown Z.family `{other}`"))),
        }
    }
}

impl MaterialSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Material> {
        let law = self.h.to_law()?;
        match self.dim {
            2 => {
                if self.gamma.is_some() || self.z.is_some() {
                    return Err(Error::Config("`gamma` and `Z` apply to dim = 3 only".into()));
                }
                Ok(Material::Two(Material2D::new(self.q, law)?))
            }
            3 => {
                let gamma = self.gamma.ok_or_else(|| Error::Config("dim = 3 requires `gamma`".into()))?;
                let z = match &self.z {
                    Some(spec) => spec.to_cofactor()?,
                    None => CofactorTerm::Zero,
                };
                Ok(Material::Three(Material3D::new(self.q, gamma, law, z)?))
            }
            d => Err(Error::Config(format!("dim must be 2 or 3, got {d}"))),
        }
    }
}

pub fn load_material(text: &str) -> Result<Material> {
    MaterialSpec::parse(text)?.build()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub family: String,
    pub amp: f64,
    pub freq: f64,
    pub direction: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub lambda: f64,
    pub resolution: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub perturbation: PerturbationSpec,
}

fn default_dim() -> usize {
    2
}

impl FieldSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn perturbation(&self) -> Result<Perturbation> {
        let family = match self.perturbation.family.as_str() {
            "bump" => PerturbationFamily::Bump,
            "trig" => PerturbationFamily::Trig,
            "divfree" => PerturbationFamily::DivFree,
            other => return Err(Error::Config(format!("unknown perturbation.family `{other}`"))),
        };
        if !(self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        Perturbation::new(family, self.dim, self.perturbation.amp, self.perturbation.freq, self.perturbation.direction.clone())
    }
}
