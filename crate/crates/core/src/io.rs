//! Parsing of the JSON inputs accepted by the command-line front end.
//!
//! Every parser validates what it reads, so a successful parse yields a value
//! the numerical routines accept.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac_ops::{HistoryFunction, Operand};
use crate::visco::{Material, StrainProgram};

fn from_json<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

/// A tagged operand, e.g. `{"kind": "power_plus", "beta": 1.5}`.
pub fn history_from_json(s: &str) -> Result<HistoryFunction> {
    let h: HistoryFunction = from_json(s)?;
    h.validate()?;
    Ok(h)
}

/// Material and strain program for the viscoelastic routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscoInput {
    pub material: Material,
    pub strain: StrainProgram,
}

pub fn visco_input_from_json(s: &str) -> Result<ViscoInput> {
    let v: ViscoInput = from_json(s)?;
    v.material.validate()?;
    v.strain.validate()?;
    Ok(v)
}

pub fn strain_from_json(s: &str) -> Result<StrainProgram> {
    let p: StrainProgram = from_json(s)?;
    p.validate()?;
    Ok(p)
}
