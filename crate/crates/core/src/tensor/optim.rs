use serde::{Deserialize, Serialize};

use super::store::ParamStore;
use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam moments for every parameter of one store, with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamState {
    pub fn new(store: &ParamStore, config: AdamConfig) -> Self {
        let zeros = || {
            store
                .iter()
                .map(|p| Tensor::zeros(p.value.rows(), p.value.cols()))
                .collect::<Vec<_>>()
        };
        Self {
            config,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    fn check(&self, store: &ParamStore) -> Result<()> {
        let ok = self.first.len() == store.len()
            && store
                .iter()
                .zip(&self.first)
                .all(|(p, m)| p.value.shape() == m.shape());
        if ok {
            Ok(())
        } else {
            Err(Error::shape(
                "adam_step",
                "optimizer state does not match parameters",
            ))
        }
    }

    /// Applies one update from the accumulated gradients. Gradients are left untouched.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<()> {
        self.check(store)?;
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for ((p, m), v) in store
            .iter_mut()
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            let grad = p.grad.data();
            let value = p.value.data_mut();
            for i in 0..grad.len() {
                let gi = grad[i];
                let mi = &mut m.data_mut()[i];
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                let mhat = *mi / c1;
                let vi = &mut v.data_mut()[i];
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let vhat = *vi / c2;
                value[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
            if !value.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite("adam_step"));
            }
        }
        Ok(())
    }
}
