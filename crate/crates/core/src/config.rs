//! Scenario files: strict TOML describing comparison scenarios and output.
//!
//! ```toml
//! version = 1
//!
//! [output]
//! dir = "out"
//! formats = ["csv", "json"]
//!
//! [[scenario]]
//! name = "hyperbolic-plane"
//! n = 2
//! r0 = 1.0
//! kappa_g = { kind = "constant", value = -1.0 }
//! kappa_minus = { kind = "constant", value = -1.2 }
//! kappa_plus = { kind = "constant", value = -0.8 }
//! phi = { kind = "quadratic", sign = 1 }
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compare::ComparisonScenario;
use crate::error::{Error, Result};
use crate::profiles::{BuiltinCurvature, CurvatureProfile, Potential};

pub const CONFIG_VERSION: u32 = 1;

/// A curvature function `kappa(s)` as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurvatureSpec {
    Constant { value: f64 },
    Named { name: BuiltinCurvature },
    /// `kappa(s) = c_0 + c_1 s + ...`.
    Polynomial { coeffs: Vec<f64> },
    /// Monotone cubic through `(s_i, kappa_i)`.
    Tabulated { s: Vec<f64>, kappa: Vec<f64> },
}

impl CurvatureSpec {
    pub fn build(&self, s_max: f64) -> Result<CurvatureProfile> {
        match self {
            CurvatureSpec::Constant { value } => CurvatureProfile::constant(*value, s_max),
            CurvatureSpec::Named { name } => CurvatureProfile::named(*name, s_max),
            CurvatureSpec::Polynomial { coeffs } => CurvatureProfile::polynomial(coeffs.clone(), s_max),
            CurvatureSpec::Tabulated { s, kappa } => CurvatureProfile::tabulated(s.clone(), kappa.clone(), s_max),
        }
    }

    /// Right end of a tabulated profile.
    fn table_end(&self) -> Option<f64> {
        match self {
            CurvatureSpec::Tabulated { s, .. } => s.last().copied(),
            _ => None,
        }
    }
}

/// A potential `phi(s)` as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant { value: f64 },
    /// `phi = sign * s`.
    Linear { sign: f64 },
    /// `phi = sign * s^2`.
    Quadratic { sign: f64 },
    /// `phi = -2 log(s / sinh s)`.
    HyperbolicLog,
    Tabulated { s: Vec<f64>, phi: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self, s_max: f64) -> Result<Potential> {
        match self {
            PotentialSpec::Zero => Potential::zero(s_max),
            PotentialSpec::Constant { value } => Potential::constant(*value, s_max),
            PotentialSpec::Linear { sign } => Potential::linear(*sign, s_max),
            PotentialSpec::Quadratic { sign } => Potential::quadratic(*sign, s_max),
            PotentialSpec::HyperbolicLog => Potential::hyperbolic_log(s_max),
            PotentialSpec::Tabulated { s, phi } => Potential::tabulated(s.clone(), phi.clone(), s_max),
        }
    }

    fn table_end(&self) -> Option<f64> {
        match self {
            PotentialSpec::Tabulated { s, .. } => s.last().copied(),
            _ => None,
        }
    }
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Zero
    }
}

/// Default `s_max`: `1.25 r0`, shortened to the end of any table.
pub(crate) fn default_s_max(r0: f64, curvatures: &[&CurvatureSpec], phi: &PotentialSpec) -> f64 {
    curvatures
        .iter()
        .filter_map(|c| c.table_end())
        .chain(phi.table_end())
        .fold(1.25 * r0, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: BTreeSet<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> BTreeSet<Format> {
    [Format::Csv, Format::Json].into_iter().collect()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

impl OutputSpec {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<ComparisonScenario>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if config.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {}; expected {CONFIG_VERSION}",
                config.version
            )));
        }
        let mut names = BTreeSet::new();
        for scenario in &config.scenarios {
            if !names.insert(scenario.name.as_str()) {
                return Err(Error::Config(format!("duplicate scenario name '{}'", scenario.name)));
            }
            scenario.check().map_err(|e| e.in_scenario(&scenario.name))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn scenario(&self, name: &str) -> Result<&ComparisonScenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("no scenario named '{name}'")))
    }
}
