use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};
use crate::formats;

pub const WEIGHTS_FORMAT: &str = "armplan.weights";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
}

/// Named trainable tensors in registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Parameter>,
    index: BTreeMap<String, ParamId>,
}

#[derive(Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    shape: [usize; 2],
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightsDoc {
    #[serde(default)]
    meta: serde_json::Value,
    tensors: Vec<NamedTensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: String, value: Tensor) -> Result<ParamId> {
        if self.index.contains_key(&name) {
            return Err(Error::invalid(format!("duplicate parameter {name}")));
        }
        let id = ParamId(self.params.len());
        let grad = Tensor::zeros(value.rows(), value.cols());
        self.index.insert(name.clone(), id);
        self.params.push(Parameter { name, value, grad });
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].grad
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].grad
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.params[id.0].name
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter> {
        self.params.iter_mut()
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    pub fn scale_grads(&mut self, s: f64) {
        for p in &mut self.params {
            p.grad.data_mut().iter_mut().for_each(|g| *g *= s);
        }
    }

    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// Copies every value from `other`, which must hold the same names and shapes.
    pub fn load_values_from(&mut self, other: &ParamStore) -> Result<()> {
        if other.len() != self.len() {
            return Err(Error::MissingWeights(format!(
                "expected {} tensors, found {}",
                self.len(),
                other.len()
            )));
        }
        for p in &mut self.params {
            let Some(id) = other.id(&p.name) else {
                return Err(Error::MissingWeights(format!(
                    "tensor {} not found",
                    p.name
                )));
            };
            let v = other.value(id);
            if v.shape() != p.value.shape() {
                return Err(Error::shape(
                    "load_weights",
                    format!("{}: {:?} vs {:?}", p.name, v.shape(), p.value.shape()),
                ));
            }
            p.value = v.clone();
        }
        Ok(())
    }

    pub fn to_document(&self, meta: serde_json::Value) -> Result<String> {
        let doc = WeightsDoc {
            meta,
            tensors: self
                .params
                .iter()
                .map(|p| NamedTensor {
                    name: p.name.clone(),
                    shape: p.value.shape(),
                    values: p.value.data().to_vec(),
                })
                .collect(),
        };
        formats::to_string(WEIGHTS_FORMAT, &doc)
    }

    /// Parses a weight document, returning the tensors and the free-form metadata.
    pub fn from_document(text: &str, path: Option<&Path>) -> Result<(Self, serde_json::Value)> {
        let doc: WeightsDoc = formats::from_str(WEIGHTS_FORMAT, text, path)?;
        let mut store = ParamStore::new();
        for t in doc.tensors {
            let tensor =
                Tensor::new(t.shape[0], t.shape[1], t.values).map_err(|e| Error::Format {
                    path: path.map(Path::to_path_buf),
                    detail: format!("tensor {}: {e}", t.name),
                })?;
            store.insert(t.name, tensor)?;
        }
        Ok((store, doc.meta))
    }

    pub fn save(&self, path: &Path, meta: serde_json::Value) -> Result<()> {
        formats::write_atomic(path, &self.to_document(meta)?)
    }

    pub fn load(path: &Path) -> Result<(Self, serde_json::Value)> {
        Self::from_document(&formats::read_text(path)?, Some(path))
    }
}
