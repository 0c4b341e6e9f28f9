//! Run configuration files. The JSON schema lives in `schema/run-config.schema.json`.

use std::path::{Path, PathBuf};

use orbitcount::algebra::{parse_polynomial, GaussianRational, Polynomial};
use orbitcount::dynamics::{FieldFile, VectorField};
use orbitcount::systems::{make_system, SystemSpec};
use orbitcount::{Error, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    /// Inline system definition.
    pub system: Option<SystemSpec>,
    /// Field file (as written by `systems-make`), relative to the config file.
    pub system_path: Option<PathBuf>,
    /// Base point, Gaussian rationals such as `"1/2 + 3*i"`.
    pub point: Option<Vec<String>>,
    pub poly: Option<String>,
    pub polys: Option<Vec<String>>,
    pub d: Option<u32>,
    pub mu: Option<usize>,
    #[serde(rename = "H")]
    pub h: Option<u64>,
    #[serde(rename = "Hs")]
    pub hs: Option<Vec<u64>>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub degrees: Option<Vec<u32>>,
    pub samples: Option<usize>,
    pub outer_radius: Option<f64>,
    pub cutoff: Option<u32>,
    pub strategy: Option<Strategy>,
    pub seed: Option<u64>,
    /// Taylor coefficients for `pade`.
    pub coefficients: Option<Vec<String>>,
    pub family: Option<Vec<FamilyMember>>,
    pub max_degree: Option<usize>,
    pub terms: Option<usize>,
    /// Complex point `[[re, im], ...]` for `lojas`.
    pub complex_point: Option<Vec<[f64; 2]>>,
    pub starts: Option<usize>,
    pub search_radius: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Auto,
    Exhaustive,
    Greedy,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyMember {
    pub name: String,
    pub coefficients: Vec<String>,
}

pub fn missing(key: &str) -> Error {
    Error::Domain(format!("config needs \"{key}\""))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn field(&self, base: &Path) -> Result<VectorField> {
        match (&self.system, &self.system_path) {
            (Some(spec), None) => VectorField::from_file(&make_system(spec)?.field),
            (None, Some(p)) => {
                let path = base.join(p);
                let text =
                    std::fs::read_to_string(&path).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
                let file: FieldFile = serde_json::from_str(&text)?;
                VectorField::from_file(&file)
            }
            (Some(_), Some(_)) => Err(Error::Domain("give either \"system\" or \"systemPath\", not both".into())),
            (None, None) => Err(missing("system")),
        }
    }

    pub fn point(&self) -> Result<Vec<GaussianRational>> {
        self.point.as_ref().ok_or_else(|| missing("point"))?.iter().map(|s| s.parse()).collect()
    }

    pub fn poly(&self, field: &VectorField) -> Result<Polynomial> {
        parse_polynomial(self.poly.as_deref().ok_or_else(|| missing("poly"))?, field.names())
    }

    pub fn polys(&self, field: &VectorField, count: Option<usize>) -> Result<Vec<Polynomial>> {
        let ps = self.polys.as_ref().ok_or_else(|| missing("polys"))?;
        if let Some(c) = count {
            if ps.len() != c {
                return Err(Error::Domain(format!("\"polys\" needs exactly {c} entries")));
            }
        }
        ps.iter().map(|s| parse_polynomial(s, field.names())).collect()
    }

    pub fn d(&self) -> Result<u32> {
        self.d.ok_or_else(|| missing("d"))
    }
}
