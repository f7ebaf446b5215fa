//! Run configuration: a TOML file with `[voa]`, `[modules.NAME]`, `[intertwiners.NAME]` and
//! `[command]` sections. Rationals are strings such as `"-22/5"`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;
use vertexbound::exact::{parse_rational, Rational};
use vertexbound::voa::SingularVector;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Requested truncation depth D of every report.
    pub depth: usize,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    pub voa: VoaConfig,
    #[serde(default)]
    pub modules: BTreeMap<String, ModuleConfig>,
    #[serde(default)]
    pub intertwiners: BTreeMap<String, IntertwinerConfig>,
    #[serde(default)]
    pub command: CommandConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoaConfig {
    /// `heisenberg` or `virasoro`.
    pub kind: String,
    #[serde(default)]
    pub central_charge: Option<String>,
    /// Singular vectors of the vacuum Verma module to quotient by.
    #[serde(default)]
    pub singular: Vec<SingularConfig>,
    #[serde(default)]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularConfig {
    pub level: usize,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleConfig {
    /// `fock`, `verma`, `quotient`, `adjoint` or `direct_sum`.
    pub kind: String,
    #[serde(default)]
    pub charge: Option<String>,
    #[serde(default)]
    pub highest_weight: Option<String>,
    #[serde(default)]
    pub singular: Vec<SingularConfig>,
    /// Levels at which singular vectors are searched for and all of them quotiented out.
    #[serde(default)]
    pub singular_levels: Vec<usize>,
    #[serde(default)]
    pub summands: Vec<String>,
    #[serde(default)]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntertwinerConfig {
    #[serde(default)]
    pub left: Option<String>,
    #[serde(default)]
    pub right: Option<String>,
    /// `(left summand, right summand, scale)`; defaults to `[[0, 0, "1"]]`.
    #[serde(default)]
    pub couplings: Option<Vec<(usize, usize, String)>>,
    #[serde(default)]
    pub scale: Option<String>,
    #[serde(default)]
    pub join: Vec<String>,
    #[serde(default)]
    pub zero: bool,
    #[serde(default)]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorConfig {
    pub level: usize,
    pub coords: Vec<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandConfig {
    #[serde(default)]
    pub module: Option<String>,
    #[serde(default)]
    pub modules: Vec<String>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub left: Option<String>,
    #[serde(default)]
    pub right: Option<String>,
    #[serde(default)]
    pub p: Option<VectorConfig>,
    #[serde(default)]
    pub q: Option<VectorConfig>,
    #[serde(default)]
    pub balanced: bool,
    #[serde(default)]
    pub exponent: Option<String>,
    #[serde(default)]
    pub series_depth: Option<usize>,
    #[serde(default)]
    pub max_log: Option<usize>,
    #[serde(default)]
    pub intertwiners: Vec<String>,
    #[serde(default)]
    pub nilpotency: Option<[usize; 3]>,
    #[serde(default)]
    pub reference: Vec<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, m) in &self.modules {
            for s in &m.summands {
                if !self.modules.contains_key(s) {
                    return Err(CliError::Parse(format!("module {name}: undefined summand {s}")));
                }
            }
        }
        for (name, y) in &self.intertwiners {
            for n in [&y.left, &y.right].into_iter().flatten() {
                if !self.modules.contains_key(n) {
                    return Err(CliError::Parse(format!("intertwiner {name}: undefined module {n}")));
                }
            }
            for j in &y.join {
                if !self.intertwiners.contains_key(j) {
                    return Err(CliError::Parse(format!("intertwiner {name}: undefined intertwiner {j}")));
                }
            }
        }
        let c = &self.command;
        for n in c.module.iter().chain(&c.left).chain(&c.right).chain(&c.modules) {
            if !self.modules.contains_key(n) {
                return Err(CliError::Parse(format!("command: undefined module {n}")));
            }
        }
        for n in &c.intertwiners {
            if !self.intertwiners.contains_key(n) {
                return Err(CliError::Parse(format!("command: undefined intertwiner {n}")));
            }
        }
        if c.m == Some(0) {
            return Err(CliError::Parse("command.m must be positive".into()));
        }
        Ok(())
    }
}

pub fn rational(field: &str, s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|_| CliError::Parse(format!("{field}: not a rational: {s:?}")))
}

pub fn rationals(field: &str, v: &[String]) -> Result<Vec<Rational>, CliError> {
    v.iter().map(|s| rational(field, s)).collect()
}

pub fn singular(field: &str, v: &[SingularConfig]) -> Result<Vec<SingularVector>, CliError> {
    v.iter()
        .map(|s| Ok(SingularVector { level: s.level, coefficients: rationals(field, &s.coefficients)? }))
        .collect()
}
