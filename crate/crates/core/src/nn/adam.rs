//! Bias-corrected Adam, for networks and for single scalars.

use ndarray::{Array1, Array2};

use super::{Gradients, Mlp};

/// Adam state for one [`Mlp`]; moment accumulators mirror the parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<(Array2<f64>, Array1<f64>)>,
    v: Vec<(Array2<f64>, Array1<f64>)>,
}

impl AdamState {
    pub fn new(mlp: &Mlp, lr: f64) -> AdamState {
        let zeros = || {
            mlp.layers()
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect::<Vec<_>>()
        };
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update of `mlp` in the direction of `-grads`.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) {
        assert_eq!(grads.layers.len(), self.m.len(), "gradient shape mismatch");
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);

        for (l, layer) in mlp.layers_mut().iter_mut().enumerate() {
            let (gw, gb) = &grads.layers[l];
            assert_eq!(gw.dim(), layer.w.dim(), "gradient shape mismatch");
            let (mw, mb) = &mut self.m[l];
            let (vw, vb) = &mut self.v[l];

            ndarray::Zip::from(&mut layer.w)
                .and(mw)
                .and(vw)
                .and(gw)
                .for_each(|p, m, v, &g| {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                });
            ndarray::Zip::from(&mut layer.b)
                .and(mb)
                .and(vb)
                .and(gb)
                .for_each(|p, m, v, &g| {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                });
        }
    }
}

/// Adam for a single scalar parameter (the entropy temperature).
#[derive(Debug, Clone)]
pub struct AdamScalar {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    m: f64,
    v: f64,
}

impl AdamScalar {
    pub fn new(lr: f64) -> AdamScalar {
        AdamScalar {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: 0.0,
            v: 0.0,
        }
    }

    pub fn step(&mut self, param: &mut f64, grad: f64) {
        self.step += 1;
        let t = self.step as i32;
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad;
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad;
        let m_hat = self.m / (1.0 - self.beta1.powi(t));
        let v_hat = self.v / (1.0 - self.beta2.powi(t));
        *param -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_learning_rate_keeps_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut mlp = Mlp::new(&[2, 3, 1], &mut rng);
        let before = mlp.to_dto();
        let mut opt = AdamState::new(&mlp, 0.0);
        let mut grads = Gradients::zeros_like(&mlp);
        grads.layers[0].0[(0, 0)] = 5.0;
        opt.step(&mut mlp, &grads);
        let after = mlp.to_dto();
        assert_eq!(before.weights, after.weights);
        assert_eq!(before.biases, after.biases);
    }

    #[test]
    fn first_step_matches_hand_formula() {
        // from zero moments, one step with gradient g:
        //   m_hat = g, v_hat = g^2, update = -lr * g / (|g| + eps)
        let mut mlp = Mlp::zeros(&[1, 1]);
        let mut opt = AdamState::new(&mlp, 0.01);
        let mut grads = Gradients::zeros_like(&mlp);
        grads.layers[0].0[(0, 0)] = -3.0;
        opt.step(&mut mlp, &grads);
        let expect = 0.01 * 3.0 / (3.0 + 1e-8);
        assert!((mlp.layers()[0].w[(0, 0)] - expect).abs() < 1e-12);
    }

    #[test]
    fn deterministic_updates() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut mlp = Mlp::new(&[3, 4, 2], &mut rng);
            let mut opt = AdamState::new(&mlp, 0.001);
            for k in 0..10 {
                let mut grads = Gradients::zeros_like(&mlp);
                for (w, b) in &mut grads.layers {
                    w.mapv_inplace(|_| (k as f64 + 1.0) * 0.1);
                    b.mapv_inplace(|_| -0.05);
                }
                opt.step(&mut mlp, &grads);
            }
            mlp.to_dto()
        };
        let a = run();
        let b = run();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.biases, b.biases);
    }

    #[test]
    fn scalar_adam_first_step() {
        let mut p = 1.0;
        let mut opt = AdamScalar::new(0.1);
        opt.step(&mut p, 2.0);
        assert!((p - (1.0 - 0.1 * 2.0 / (2.0 + 1e-8))).abs() < 1e-12);
    }
}
