//! JSON form of a super-linearization.

use std::fmt;

use serde::{Deserialize, Serialize};
use slin_core::poly::parse_rational;
use slin_core::{parse_polynomial, Observable, Rational, SuperLinearization, VariableSpace};

pub const SCHEMA: &str = "slin-lift/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableEntry {
    pub name: String,
    /// Over the lifted coordinates that existed when it was introduced.
    pub definition: String,
    /// Over the state variables.
    pub expansion: String,
}

/// `z' = A z + D` with `z = (x, p(x))`; rationals are strings such as `"1485/2"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftDocument {
    pub schema: String,
    pub variables: Vec<String>,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(rename = "D")]
    pub d: Vec<String>,
    pub observables: Vec<ObservableEntry>,
}

#[derive(Debug)]
pub enum DocumentError {
    Json(serde_json::Error),
    Schema(String),
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentError::Json(e) => write!(f, "malformed lift document: {e}"),
            DocumentError::Schema(msg) => write!(f, "invalid lift document: {msg}"),
        }
    }
}

impl std::error::Error for DocumentError {}

fn schema_err<T>(msg: impl Into<String>) -> Result<T, DocumentError> {
    Err(DocumentError::Schema(msg.into()))
}

fn rational(s: &str, what: &str) -> Result<Rational, DocumentError> {
    parse_rational(s.trim()).ok_or_else(|| DocumentError::Schema(format!("{what}: `{s}` is not a rational number")))
}

impl LiftDocument {
    pub fn from_lift(sl: &SuperLinearization) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            variables: sl.state_space().names().to_vec(),
            n: sl.n(),
            m: sl.m(),
            a: sl
                .matrix()
                .iter()
                .map(|row| row.iter().map(|c| c.to_string()).collect())
                .collect(),
            d: sl.offset().iter().map(|c| c.to_string()).collect(),
            observables: sl
                .observables()
                .iter()
                .map(|o| ObservableEntry {
                    name: o.name.clone(),
                    definition: o.definition.to_string(),
                    expansion: o.expansion.to_string(),
                })
                .collect(),
        }
    }

    /// Parses every field exactly and rebuilds the lift, which re-checks that
    /// each definition expands to the stated expansion.
    pub fn to_lift(&self) -> Result<SuperLinearization, DocumentError> {
        if self.schema != SCHEMA {
            return schema_err(format!("unsupported schema `{}` (expected `{SCHEMA}`)", self.schema));
        }
        if self.variables.len() != self.n {
            return schema_err(format!("n = {} but {} variables are listed", self.n, self.variables.len()));
        }
        if self.observables.len() != self.m {
            return schema_err(format!("m = {} but {} observables are listed", self.m, self.observables.len()));
        }
        let dim = self.n + self.m;
        if self.a.len() != dim || self.a.iter().any(|r| r.len() != dim) {
            return schema_err(format!("A must be {dim}x{dim}"));
        }
        if self.d.len() != dim {
            return schema_err(format!("D must have {dim} entries"));
        }
        let state = VariableSpace::new(self.variables.iter().cloned()).map_err(|e| DocumentError::Schema(e.to_string()))?;
        let lifted = state
            .extended(self.observables.iter().map(|o| o.name.clone()))
            .map_err(|e| DocumentError::Schema(e.to_string()))?;
        let matrix = self
            .a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| rational(s, &format!("A[{i}][{j}]")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let offset = self
            .d
            .iter()
            .enumerate()
            .map(|(i, s)| rational(s, &format!("D[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let observables = self
            .observables
            .iter()
            .enumerate()
            .map(|(k, o)| {
                let definition = parse_polynomial(&o.definition, &lifted)
                    .map_err(|e| DocumentError::Schema(format!("definition of {}: {e}", o.name)))?;
                let expansion = parse_polynomial(&o.expansion, &state)
                    .map_err(|e| DocumentError::Schema(format!("expansion of {}: {e}", o.name)))?;
                Ok(Observable {
                    index: k + 1,
                    name: o.name.clone(),
                    definition,
                    expansion,
                })
            })
            .collect::<Result<Vec<_>, DocumentError>>()?;
        SuperLinearization::new(state, lifted, matrix, offset, observables).map_err(|e| DocumentError::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document is plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        serde_json::from_str(text).map_err(DocumentError::Json)
    }
}

pub fn read_lift(text: &str) -> Result<SuperLinearization, DocumentError> {
    LiftDocument::from_json(text)?.to_lift()
}
