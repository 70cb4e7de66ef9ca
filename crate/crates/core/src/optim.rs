//! Adam over a [`ParamSet`].

use alloc::vec::Vec;

use crate::grad::ParamSet;
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    pub fn new(lr: f64, like: &ParamSet) -> Self {
        let zeros: Vec<Tensor> = like.tensors().iter().map(|t| Tensor::zeros(t.rows(), t.cols())).collect();
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: zeros.clone(), v: zeros }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Descends along `grads` (pass the negated gradient to ascend).
    pub fn step(&mut self, params: &mut ParamSet, grads: &[Tensor]) {
        assert_eq!(grads.len(), params.len(), "gradient count mismatch");
        self.step += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.step as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.step as f64);
        for (i, p) in params.tensors_mut().iter_mut().enumerate() {
            let g = grads[i].data();
            assert_eq!(g.len(), p.len(), "gradient shape mismatch");
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            for (j, w) in p.data_mut().iter_mut().enumerate() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                *w -= self.lr * m_hat / (libm::sqrt(v_hat) + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn minimizes_a_quadratic() {
        let mut p = ParamSet::new().with("x", Tensor::row(vec![3.0, -2.0]));
        let mut opt = Adam::new(0.05, &p);
        for _ in 0..2000 {
            let g = p.tensors()[0].scale(2.0);
            opt.step(&mut p, &[g]);
        }
        assert!(p.tensors()[0].data().iter().all(|v| v.abs() < 1e-3));
    }

    #[test]
    fn zero_lr_is_a_no_op() {
        let p0 = ParamSet::new().with("x", Tensor::row(vec![1.0, 2.0]));
        let mut p = p0.clone();
        let mut opt = Adam::new(0.0, &p);
        opt.step(&mut p, &[Tensor::row(vec![5.0, -1.0])]);
        assert_eq!(p, p0);
    }
}
