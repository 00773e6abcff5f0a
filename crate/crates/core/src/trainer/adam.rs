//! Bias-corrected Adam, operating on named flat parameter slices so the
//! encoder and the loss head share one optimizer state.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 3e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Parse(format!("adam lr must be positive, got {}", self.lr)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b.is_finite() && (0.0..1.0).contains(&b)) {
                return Err(Error::Parse(format!("adam {name} must lie in [0,1), got {b}")));
            }
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::Parse(format!("adam eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AdamState {
    cfg: AdamConfig,
    step: u64,
    moments: BTreeMap<String, Moments>,
}

impl AdamState {
    pub fn new(cfg: AdamConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(AdamState { cfg, step: 0, moments: BTreeMap::new() })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Advances the shared step counter; call once per optimization step,
    /// before updating the step's tensors.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    /// Applies one Adam update to a named tensor. Moment buffers are
    /// allocated on first sight and glued to the tensor's length.
    pub fn update(&mut self, name: &str, param: &mut [f64], grad: &[f64]) -> Result<()> {
        if self.step == 0 {
            return Err(Error::Parse("adam update before begin_step".into()));
        }
        if param.len() != grad.len() {
            return Err(Error::ShapeMismatch(format!(
                "adam `{name}`: {} params vs {} grads",
                param.len(),
                grad.len()
            )));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient for `{name}`")));
        }
        let slot = self
            .moments
            .entry(name.to_string())
            .or_insert_with(|| Moments { m: vec![0.0; param.len()], v: vec![0.0; param.len()] });
        if slot.m.len() != param.len() {
            return Err(Error::ShapeMismatch(format!(
                "adam `{name}`: moment length {} vs param length {}",
                slot.m.len(),
                param.len()
            )));
        }
        let AdamConfig { lr, beta1, beta2, eps } = self.cfg;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for i in 0..param.len() {
            let g = grad[i];
            slot.m[i] = beta1 * slot.m[i] + (1.0 - beta1) * g;
            slot.v[i] = beta2 * slot.v[i] + (1.0 - beta2) * g * g;
            let m_hat = slot.m[i] / bc1;
            let v_hat = slot.v[i] / bc2;
            param[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}
