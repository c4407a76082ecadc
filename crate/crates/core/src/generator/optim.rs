//! Adaptive-moment optimizers: layer-wise Lamb (default) and plain Adam.

use serde::{Deserialize, Serialize};

use super::params::Parameters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Lamb,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Lamb,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-6,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub step: u64,
    /// Steps refused because the gradient held NaN or infinity.
    pub skipped: u64,
    m: Parameters,
    v: Parameters,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub applied: bool,
    /// L2 norm of the parameter change.
    pub step_norm: f64,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, params: &Parameters) -> Self {
        OptimizerState {
            config,
            step: 0,
            skipped: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    /// Applies one descent step on `params` for `grad`. Non-finite gradients
    /// are skipped (counted in `skipped`); an all-zero gradient leaves both
    /// the parameters and the moments untouched.
    pub fn apply(&mut self, params: &mut Parameters, grad: &Parameters) -> StepOutcome {
        assert!(params.same_shape(grad), "gradient shape does not match parameters");
        if !grad.all_finite() {
            self.skipped += 1;
            return StepOutcome {
                applied: false,
                step_norm: 0.0,
            };
        }
        if grad.all_zero() {
            return StepOutcome {
                applied: true,
                step_norm: 0.0,
            };
        }
        let c = self.config;
        self.step += 1;
        let bc1 = 1.0 - c.beta1.powi(self.step as i32);
        let bc2 = 1.0 - c.beta2.powi(self.step as i32);
        let mut sq = 0.0;
        for (li, layer) in params.layers.iter_mut().enumerate() {
            let g = &grad.layers[li].values;
            let m = &mut self.m.layers[li].values;
            let v = &mut self.v.layers[li].values;
            let mut update = Vec::with_capacity(g.len());
            for i in 0..g.len() {
                m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
                v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                update.push(mhat / (vhat.sqrt() + c.eps) + c.weight_decay * layer.values[i]);
            }
            let ratio = match c.kind {
                OptimizerKind::Adam => 1.0,
                OptimizerKind::Lamb => {
                    let wn = layer.norm();
                    let un = crate::text::l2_norm(&update);
                    if wn > 0.0 && un > 0.0 {
                        wn / un
                    } else {
                        1.0
                    }
                }
            };
            for (w, u) in layer.values.iter_mut().zip(&update) {
                let delta = c.learning_rate * ratio * u;
                *w -= delta;
                sq += delta * delta;
            }
        }
        StepOutcome {
            applied: true,
            step_norm: sq.sqrt(),
        }
    }
}
