//! JSON model documents.
//!
//! ```json
//! {"kind": "dtmc", "states": 2, "P": [[0.9, 0.1], [0.2, 0.8]], "f": [1, 0]}
//! {"kind": "ctmc", "states": 2, "B": [[-1, 1], [1, -1]], "f": [1, 0]}
//! {"kind": "mdp", "states": 1, "actions": 2, "p": [[[1], [1]]],
//!  "f": [[1, 0]], "policy": [[1, 0]]}
//! ```
//!
//! Rows are nested outermost by state, then by action for `p`, `f` and
//! `policy` of an MDP. The reward `f` is optional for chains and processes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeneratorMatrix, MdpModel, RewardVector, StochasticMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dtmc,
    Ctmc,
    Mdp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RewardSpec {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

/// The document as written on disk, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: ModelKind,
    pub states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<usize>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<Vec<f64>>>,
    #[serde(rename = "p", default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<RewardSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<Vec<Vec<f64>>>,
}

/// A validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Dtmc {
        p: StochasticMatrix,
        f: Option<RewardVector>,
    },
    Ctmc {
        b: GeneratorMatrix,
        f: Option<RewardVector>,
    },
    Mdp(MdpModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Dtmc { .. } => ModelKind::Dtmc,
            Model::Ctmc { .. } => ModelKind::Ctmc,
            Model::Mdp(_) => ModelKind::Mdp,
        }
    }

    pub fn states(&self) -> usize {
        match self {
            Model::Dtmc { p, .. } => p.size(),
            Model::Ctmc { b, .. } => b.size(),
            Model::Mdp(m) => m.states(),
        }
    }
}

pub fn parse_model(text: &str, row_tol: f64) -> Result<Model> {
    let doc: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    doc.validate(row_tol)
}

pub fn load_model(path: impl AsRef<Path>, row_tol: f64) -> Result<Model> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    parse_model(&text, row_tol)
}

fn missing(field: &str, kind: &str) -> Error {
    Error::ModelFormat(format!("field `{field}` is required for kind `{kind}`"))
}

fn expect_states(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

fn vector_reward(f: Option<RewardSpec>, states: usize) -> Result<Option<RewardVector>> {
    match f {
        None => Ok(None),
        Some(RewardSpec::Vector(v)) => {
            expect_states("reward vector", states, v.len())?;
            RewardVector::new(v).map(Some)
        }
        Some(RewardSpec::Matrix(_)) => Err(Error::ModelFormat(
            "`f` must be a vector for chains and processes".into(),
        )),
    }
}

impl ModelFile {
    pub fn validate(self, row_tol: f64) -> Result<Model> {
        match self.kind {
            ModelKind::Dtmc => {
                let rows = self.chain.ok_or_else(|| missing("P", "dtmc"))?;
                expect_states("transition matrix", self.states, rows.len())?;
                let p = StochasticMatrix::from_rows(&rows, row_tol)?;
                let f = vector_reward(self.f, self.states)?;
                Ok(Model::Dtmc { p, f })
            }
            ModelKind::Ctmc => {
                let rows = self.generator.ok_or_else(|| missing("B", "ctmc"))?;
                expect_states("generator matrix", self.states, rows.len())?;
                let b = GeneratorMatrix::from_rows(&rows, row_tol)?;
                let f = vector_reward(self.f, self.states)?;
                Ok(Model::Ctmc { b, f })
            }
            ModelKind::Mdp => {
                let actions = self.actions.ok_or_else(|| missing("actions", "mdp"))?;
                let p = self.transitions.ok_or_else(|| missing("p", "mdp"))?;
                let policy = self.policy.ok_or_else(|| missing("policy", "mdp"))?;
                let f = match self.f {
                    Some(RewardSpec::Matrix(m)) => m,
                    Some(RewardSpec::Vector(_)) => {
                        return Err(Error::ModelFormat(
                            "`f` must be a states x actions matrix for kind `mdp`".into(),
                        ))
                    }
                    None => return Err(missing("f", "mdp")),
                };
                expect_states("transition tensor", self.states, p.len())?;
                if let Some(per_state) = p.first() {
                    expect_states("actions", actions, per_state.len())?;
                }
                MdpModel::new(&p, &f, &policy, row_tol).map(Model::Mdp)
            }
        }
    }
}
