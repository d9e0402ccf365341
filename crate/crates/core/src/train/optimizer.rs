//! Adam with linear warmup then linear decay.

use crate::model::{GradientSet, Parameters};
use crate::nn::Tensor;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub warmup_steps: usize,
    pub total_steps: usize,
}

impl AdamConfig {
    pub fn new(lr: f64, warmup_steps: usize, total_steps: usize) -> AdamConfig {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            warmup_steps,
            total_steps: total_steps.max(1),
        }
    }

    /// Linear warmup to `lr`, then linear decay to a 10% floor so late
    /// epochs keep learning at desk scale.
    pub fn lr_at(&self, step: usize) -> f64 {
        let t = step as f64;
        if self.warmup_steps > 0 && step < self.warmup_steps {
            return self.lr * (t + 1.0) / self.warmup_steps as f64;
        }
        let total = self.total_steps.max(self.warmup_steps + 1) as f64;
        let frac = ((total - t) / (total - self.warmup_steps as f64)).clamp(0.0, 1.0);
        self.lr * frac.max(0.1)
    }
}

pub struct Adam {
    cfg: AdamConfig,
    m: Vec<Tensor<f32>>,
    v: Vec<Tensor<f32>>,
    step: usize,
}

impl Adam {
    pub fn new(cfg: AdamConfig, params: &Parameters<f32>) -> Adam {
        let mut m = Vec::new();
        params
            .tree
            .visit(&mut |_, t| m.push(Tensor::zeros(t.rows(), t.cols())));
        let v = m.clone();
        Adam { cfg, m, v, step: 0 }
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    /// Apply one update. Gradients must be aligned with the parameter visit
    /// order (as produced by `model::gradients`). `freeze` marks parameter
    /// indices to leave untouched.
    pub fn step(&mut self, params: &mut Parameters<f32>, grads: &GradientSet<f32>, freeze: &[bool]) {
        let lr = self.cfg.lr_at(self.step) as f32;
        self.step += 1;
        let b1 = self.cfg.beta1 as f32;
        let b2 = self.cfg.beta2 as f32;
        let eps = self.cfg.eps as f32;
        let bc1 = 1.0 - (self.cfg.beta1 as f32).powi(self.step as i32);
        let bc2 = 1.0 - (self.cfg.beta2 as f32).powi(self.step as i32);
        let mut idx = 0;
        params.tree.visit_mut(&mut |t| {
            if freeze.get(idx).copied().unwrap_or(false) {
                idx += 1;
                return;
            }
            let g = &grads.by_name[idx].1;
            let m = &mut self.m[idx];
            let v = &mut self.v[idx];
            for ((p, &gi), (mi, vi)) in t
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut().iter_mut().zip(v.data_mut().iter_mut()))
            {
                *mi = b1 * *mi + (1.0 - b1) * gi;
                *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                let mhat = *mi / bc1;
                let vhat = *vi / bc2;
                *p -= lr * mhat / (vhat.sqrt() + eps);
            }
            idx += 1;
        });
    }
}

/// Sum a batch of gradient sets in index order (deterministic regardless of
/// how the per-example gradients were produced) and scale by 1/n.
pub fn mean_gradients(mut batch: Vec<GradientSet<f32>>) -> GradientSet<f32> {
    assert!(!batch.is_empty());
    let mut acc = batch.remove(0);
    let n = (batch.len() + 1) as f32;
    for g in batch {
        for ((_, a), (_, b)) in acc.by_name.iter_mut().zip(g.by_name) {
            a.add_assign(&b);
        }
    }
    for (_, t) in acc.by_name.iter_mut() {
        t.scale_assign(1.0 / n);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn warmup_then_decay() {
        let cfg = AdamConfig::new(1e-3, 10, 110);
        assert!(cfg.lr_at(0) < cfg.lr_at(9));
        assert!((cfg.lr_at(9) - 1e-3).abs() < 1e-10);
        assert!(cfg.lr_at(60) < cfg.lr_at(10));
        // decay bottoms out at the 10% floor
        assert!((cfg.lr_at(109) - 1e-4).abs() < 1e-12);
        assert!((cfg.lr_at(200) - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn adam_descends_a_quadratic() {
        // minimize sum(p^2) through the gradient interface
        let cfg = ModelConfig::toy(8);
        let mut params: Parameters<f32> =
            Parameters::init(cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let mut adam = Adam::new(AdamConfig::new(0.05, 0, 200), &params);
        let loss_of = |p: &Parameters<f32>| -> f32 {
            let mut s = 0.0;
            p.tree.visit(&mut |_, t| {
                for &x in t.data() {
                    s += x * x;
                }
            });
            s
        };
        let initial = loss_of(&params);
        for _ in 0..50 {
            let mut by_name = Vec::new();
            params.tree.visit(&mut |name, t| {
                by_name.push((name, t.map(|x| 2.0 * x)));
            });
            let grads = GradientSet { by_name };
            let freeze = vec![false; grads.by_name.len()];
            adam.step(&mut params, &grads, &freeze);
        }
        assert!(loss_of(&params) < initial * 0.5);
    }

    #[test]
    fn frozen_parameters_do_not_move() {
        let cfg = ModelConfig::toy(8);
        let mut params: Parameters<f32> =
            Parameters::init(cfg, &mut ChaCha8Rng::seed_from_u64(6));
        let before = params.tree.flat()[0].1.data().to_vec();
        let mut adam = Adam::new(AdamConfig::new(0.1, 0, 10), &params);
        let mut by_name = Vec::new();
        params
            .tree
            .visit(&mut |name, t| by_name.push((name, t.map(|_| 1.0))));
        let grads = GradientSet { by_name };
        let mut freeze = vec![false; grads.by_name.len()];
        freeze[0] = true;
        adam.step(&mut params, &grads, &freeze);
        let after = params.tree.flat()[0].1.data().to_vec();
        assert_eq!(before, after);
        assert_ne!(
            params.tree.flat()[1].1.data(),
            grads.by_name[1].1.map(|_| 0.0).data()
        );
    }

    #[test]
    fn mean_gradients_averages() {
        let t1 = GradientSet {
            by_name: vec![("a".into(), Tensor::from_vec(1, 2, vec![2.0f32, 4.0]))],
        };
        let t2 = GradientSet {
            by_name: vec![("a".into(), Tensor::from_vec(1, 2, vec![4.0f32, 0.0]))],
        };
        let m = mean_gradients(vec![t1, t2]);
        assert_eq!(m.by_name[0].1.data(), &[3.0, 2.0]);
    }
}
