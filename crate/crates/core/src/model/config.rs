//! Plain-text system configuration (TOML).
//!
//! ```toml
//! format = 1
//!
//! [system]
//! frequencies = [1.0, 1.4142135623730951]
//! epsilon = 0.05
//! m0 = 3.0                 # optional, default 3
//! psi_kind = "constant"    # optional: constant | elliptic | smooth
//! alpha = 1.0              # required when psi_kind = "elliptic"
//!
//! [drift]
//! p1 = ["-v1", "-v2"]
//!
//! [hamiltonian]            # optional section
//! h = "abs2(v1)*abs2(v2)"
//!
//! [dispersion]
//! psi = [["1", "0"], ["0", "1"]]
//!
//! [run]                    # optional experiment parameters
//! t_end = 1.0
//! v0 = [[1.0, 0.0], [1.0, 0.0]]
//! ```

use serde::{Deserialize, Serialize};

use super::{parse_field_expr, ComplexVec, FieldExpr, Frequencies, PsiKind, SystemSpec};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub format: u32,
    pub system: SystemSection,
    pub drift: DriftSection,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSection>,
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub frequencies: Vec<f64>,
    pub epsilon: f64,
    #[serde(default = "default_m0")]
    pub m0: f64,
    #[serde(default)]
    pub psi_kind: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

fn default_m0() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub p1: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub h: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSection {
    pub psi: Vec<Vec<String>>,
}

/// Numeric experiment parameters. Every field is optional; consumers supply defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: Option<f64>,
    pub dtau: Option<f64>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub eps_list: Option<Vec<f64>>,
    pub delta_list: Option<Vec<f64>>,
    pub r_cutoff: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub v0: Option<Vec<[f64; 2]>>,
    pub v1: Option<Vec<[f64; 2]>>,
    pub v2: Option<Vec<[f64; 2]>>,
    pub variant: Option<String>,
    pub grid: Option<usize>,
    pub order_bound: Option<i64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub feature_count: Option<usize>,
    pub point: Option<Vec<[f64; 2]>>,
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.format != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported format = {} (expected {FORMAT_VERSION})",
                cfg.format
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn system(&self) -> Result<SystemSpec> {
        let n = self.system.frequencies.len();
        let freqs = Frequencies::new(self.system.frequencies.clone())?;
        let parse = |s: &String| parse_field_expr(s, n);
        let p1 = self.drift.p1.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let h = self.hamiltonian.as_ref().map(|h| parse(&h.h)).transpose()?;
        let psi = self
            .dispersion
            .psi
            .iter()
            .map(|row| row.iter().map(parse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let kind = match self.system.psi_kind.as_deref() {
            None if psi.iter().flatten().all(FieldExpr::is_literal) => PsiKind::Constant,
            None | Some("smooth") => PsiKind::Smooth,
            Some("constant") => PsiKind::Constant,
            Some("elliptic") => PsiKind::Elliptic {
                alpha: self
                    .system
                    .alpha
                    .ok_or_else(|| Error::Config("psi_kind = \"elliptic\" requires alpha".into()))?,
            },
            Some(other) => return Err(Error::Config(format!("unknown psi_kind `{other}`"))),
        };
        SystemSpec::new(freqs, self.system.epsilon, p1, h, psi, kind, self.system.m0)
    }
}

/// Converts `[[re, im], ...]` into a complex vector.
pub fn complex_vec(pairs: &[[f64; 2]]) -> Result<ComplexVec> {
    ComplexVec::from_pairs(&pairs.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>())
}
