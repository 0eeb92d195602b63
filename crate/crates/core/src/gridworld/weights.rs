//! Agent weights as TOML: a header and one row-major table per tensor.
//!
//! ```toml
//! version = 1
//! vocab = ["RED", "BLUE", "NORTH", "SOUTH", "EAST", "WEST"]
//! embed_width = 16
//! hidden_width = 64
//! seed = 0
//!
//! [[tensors]]
//! name = "embedding"
//! rows = 6
//! cols = 16
//! data = [0.1, ...]
//! ```

use serde::{Deserialize, Serialize};

use super::agent::{Agent, AgentSpec, Group};
use super::GridError;

pub const WEIGHT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFile {
    pub version: u32,
    pub vocab: Vec<String>,
    pub embed_width: usize,
    pub hidden_width: usize,
    pub seed: u64,
    pub tensors: Vec<TensorEntry>,
}

impl WeightFile {
    pub fn from_agent(agent: &Agent) -> Self {
        let spec = agent.spec();
        WeightFile {
            version: WEIGHT_FORMAT_VERSION,
            vocab: spec.vocab.clone(),
            embed_width: spec.embed_width,
            hidden_width: spec.hidden_width,
            seed: spec.seed,
            tensors: Group::ALL
                .iter()
                .map(|g| {
                    let (rows, cols) = g.shape(spec);
                    TensorEntry {
                        name: g.name().to_string(),
                        rows,
                        cols,
                        data: agent.group(*g).to_vec(),
                    }
                })
                .collect(),
        }
    }

    pub fn to_agent(&self) -> Result<Agent, GridError> {
        if self.version != WEIGHT_FORMAT_VERSION {
            return Err(GridError::WeightFile(format!("unsupported version {}", self.version)));
        }
        let spec = AgentSpec {
            vocab: self.vocab.clone(),
            embed_width: self.embed_width,
            hidden_width: self.hidden_width,
            seed: self.seed,
        };
        let mut agent = Agent::zeros(spec)?;
        for g in Group::ALL {
            let t = self
                .tensors
                .iter()
                .find(|t| t.name == g.name())
                .ok_or_else(|| GridError::WeightFile(format!("missing tensor `{}`", g.name())))?;
            let shape = g.shape(agent.spec());
            if (t.rows, t.cols) != shape || t.data.len() != shape.0 * shape.1 {
                return Err(GridError::WeightFile(format!(
                    "tensor `{}` has shape {}x{} with {} values, expected {}x{}",
                    t.name,
                    t.rows,
                    t.cols,
                    t.data.len(),
                    shape.0,
                    shape.1
                )));
            }
            agent.group_mut(g).copy_from_slice(&t.data);
        }
        if let Some(extra) = self.tensors.iter().find(|t| Group::ALL.iter().all(|g| g.name() != t.name)) {
            return Err(GridError::WeightFile(format!("unknown tensor `{}`", extra.name)));
        }
        Ok(agent)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GridError> {
        toml::from_str(text).map_err(|e| GridError::WeightFile(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, GridError> {
        toml::to_string(self).map_err(|e| GridError::WeightFile(e.to_string()))
    }
}
