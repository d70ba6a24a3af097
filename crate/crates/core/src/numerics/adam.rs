//! Adam optimizer with bias-corrected moments and decoupled weight decay.

use crate::error::{Error, Result};
use crate::numerics::params::{Gradients, ParamStore};
use crate::numerics::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled decay: applied directly to the weights, not mixed into
    /// the gradient (the AdamW rule).
    pub weight_decay: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<Option<Tensor>>,
    v: Vec<Option<Tensor>>,
    step_count: u64,
}

impl Adam {
    pub fn new(cfg: AdamConfig) -> Result<Self> {
        if cfg.lr <= 0.0 {
            return Err(Error::config(format!("adam lr must be > 0, got {}", cfg.lr)));
        }
        Ok(Adam {
            cfg,
            m: Vec::new(),
            v: Vec::new(),
            step_count: 0,
        })
    }

    pub fn lr(&self) -> f64 {
        self.cfg.lr
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.cfg.lr = lr;
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One update over every trainable parameter that received a
    /// gradient. Moments are allocated lazily per parameter.
    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients) -> Result<()> {
        if self.m.len() < store.len() {
            self.m.resize(store.len(), None);
            self.v.resize(store.len(), None);
        }
        self.step_count += 1;
        let t = self.step_count;
        let c1 = 1.0 - self.cfg.beta1.powi(t as i32);
        let c2 = 1.0 - self.cfg.beta2.powi(t as i32);

        for (id, g) in grads.iter() {
            if !store.is_trainable(id) {
                continue;
            }
            if !g.all_finite() {
                return Err(Error::Optimizer {
                    param: store.name(id).to_string(),
                    msg: "non-finite gradient".to_string(),
                });
            }
            let w = store.value(id);
            if g.shape() != w.shape() {
                return Err(Error::Shape {
                    op: "adam_step",
                    lhs: w.shape().to_vec(),
                    rhs: g.shape().to_vec(),
                });
            }
            let m = self.m[id.0].get_or_insert_with(|| Tensor::zeros(w.rows(), w.cols()));
            let v = self.v[id.0].get_or_insert_with(|| Tensor::zeros(w.rows(), w.cols()));

            let w = store.value_mut(id);
            let (b1, b2) = (self.cfg.beta1, self.cfg.beta2);
            for i in 0..w.numel() {
                let gi = g.data()[i];
                let mi = b1 * m.data()[i] + (1.0 - b1) * gi;
                let vi = b2 * v.data()[i] + (1.0 - b2) * gi * gi;
                m.data_mut()[i] = mi;
                v.data_mut()[i] = vi;
                let m_hat = mi / c1;
                let v_hat = vi / c2;
                let wi = &mut w.data_mut()[i];
                *wi -= self.cfg.lr * (m_hat / (v_hat.sqrt() + self.cfg.eps)
                    + self.cfg.weight_decay * *wi);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::params::Session;

    fn grads_for(store: &ParamStore, id: crate::numerics::params::ParamId, g: Tensor) -> Gradients {
        // build a session producing exactly the requested gradient:
        // loss = sum(w * g_const)
        let mut sess = Session::new(store);
        let w = sess.param(id);
        let gc = sess.constant(g);
        let prod = sess.g.mul_elem(w, gc).unwrap();
        let loss = sess.g.sum_all(prod);
        sess.backward(loss).unwrap()
    }

    #[test]
    fn first_step_magnitude_is_lr() {
        let mut store = ParamStore::new();
        let id = store.insert("w", Tensor::scalar(0.0), true).unwrap();
        let grads = grads_for(&store, id, Tensor::scalar(0.7));
        let mut opt = Adam::new(AdamConfig::with_lr(0.01)).unwrap();
        opt.step(&mut store, &grads).unwrap();
        // bias-corrected first step: lr * g / (|g| + eps) ~ lr * sign(g)
        let w = store.value(id).item();
        assert!((w + 0.01).abs() < 1e-8, "w = {w}");
    }

    #[test]
    fn quadratic_converges() {
        // f(w) = (w - 3)^2
        let mut store = ParamStore::new();
        let id = store.insert("w", Tensor::scalar(0.0), true).unwrap();
        let mut opt = Adam::new(AdamConfig::with_lr(0.1)).unwrap();
        for _ in 0..500 {
            let mut sess = Session::new(&store);
            let w = sess.param(id);
            let target = sess.constant(Tensor::scalar(3.0));
            let r = sess.g.sub(w, target).unwrap();
            let sq = sess.g.mul_elem(r, r).unwrap();
            let loss = sess.g.sum_all(sq);
            let grads = sess.backward(loss).unwrap();
            opt.step(&mut store, &grads).unwrap();
        }
        assert!((store.value(id).item() - 3.0).abs() < 1e-2);
    }

    #[test]
    fn decoupled_decay_shrinks_with_zero_grad() {
        let mut store = ParamStore::new();
        let id = store.insert("w", Tensor::scalar(2.0), true).unwrap();
        let grads = grads_for(&store, id, Tensor::scalar(0.0));
        let mut cfg = AdamConfig::with_lr(0.05);
        cfg.weight_decay = 0.1;
        let mut opt = Adam::new(cfg).unwrap();
        opt.step(&mut store, &grads).unwrap();
        let expected = 2.0 * (1.0 - 0.05 * 0.1);
        assert!((store.value(id).item() - expected).abs() < 1e-15);
    }

    #[test]
    fn nan_gradient_names_parameter() {
        let mut store = ParamStore::new();
        store.insert("bad.weight", Tensor::scalar(1.0), true).unwrap();
        let grads = Gradients::from_parts(vec![Some(Tensor::scalar(f64::NAN))]);
        let mut opt = Adam::new(AdamConfig::with_lr(0.1)).unwrap();
        let err = opt.step(&mut store, &grads).unwrap_err();
        assert!(err.to_string().contains("bad.weight"), "{err}");
    }
}
