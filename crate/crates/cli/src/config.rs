//! `--config` files.
//!
//! A config is a JSON object with optional global keys and one optional
//! section per subcommand whose keys are that subcommand's flags in
//! snake_case:
//!
//! ```json
//! {"seed": 7, "threads": 2, "format": "csv", "ctrw": {"alpha": 0.5, "walkers": 1000}}
//! ```
//!
//! Values from the file override values given on the command line.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::output::Format;
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub ml: Option<Map<String, Value>>,
    pub fracop: Option<Map<String, Value>>,
    pub relax: Option<Map<String, Value>>,
    pub fit: Option<Map<String, Value>>,
    pub visco: Option<Map<String, Value>>,
    pub ctrw: Option<Map<String, Value>>,
    pub diffusion: Option<Map<String, Value>>,
    pub extension: Option<Map<String, Value>>,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        let c: RunConfig =
            serde_json::from_str(s).map_err(|e| CliError::invalid(format!("config: {e}")))?;
        if c.threads == Some(0) {
            return Err(CliError::invalid("config: threads must be positive"));
        }
        Ok(c)
    }

    pub fn section(&self, command: &str) -> Option<&Map<String, Value>> {
        match command {
            "ml" => self.ml.as_ref(),
            "fracop" => self.fracop.as_ref(),
            "relax" => self.relax.as_ref(),
            "fit" => self.fit.as_ref(),
            "visco" => self.visco.as_ref(),
            "ctrw" => self.ctrw.as_ref(),
            "diffusion" => self.diffusion.as_ref(),
            "extension" => self.extension.as_ref(),
            _ => None,
        }
    }
}

/// Replaces fields of `args` by the entries of `section`. Unknown keys and
/// ill-typed values are rejected by the argument type's deserializer.
pub fn overlay<T>(args: &T, section: Option<&Map<String, Value>>) -> Result<T, CliError>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let Some(section) = section else {
        return serde_json::from_value(serde_json::to_value(args).map_err(CliError::internal)?)
            .map_err(CliError::internal);
    };
    let mut v = serde_json::to_value(args).map_err(CliError::internal)?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| CliError::internal("arguments are not an object"))?;
    for (k, val) in section {
        obj.insert(k.clone(), val.clone());
    }
    serde_json::from_value(v).map_err(|e| CliError::invalid(format!("config: {e}")))
}
