//! Returns, advantages and the linear feature baseline.
//!
//! All helpers work on trajectory-major rows (`i * horizon + t`).

use alloc::vec;
use alloc::vec::Vec;

use crate::tensor::Tensor;

pub const N_FEATURES: usize = 8;
const RIDGE: f64 = 1e-5;

/// `sum_{k >= t} gamma^(k-t) r_k` within each trajectory.
pub fn reward_to_go(rewards: &[f64], horizon: usize, gamma: f64) -> Vec<f64> {
    assert_eq!(rewards.len() % horizon, 0, "rewards are not a whole number of trajectories");
    let mut out = vec![0.0; rewards.len()];
    for traj in 0..rewards.len() / horizon {
        let mut acc = 0.0;
        for t in (0..horizon).rev() {
            let r = traj * horizon + t;
            acc = rewards[r] + gamma * acc;
            out[r] = acc;
        }
    }
    out
}

/// Generalized advantage estimation with `V_H = 0`.
pub fn gae(rewards: &[f64], values: &[f64], horizon: usize, gamma: f64, lambda: f64) -> Vec<f64> {
    assert_eq!(rewards.len(), values.len(), "rewards and values differ in length");
    let mut out = vec![0.0; rewards.len()];
    for traj in 0..rewards.len() / horizon {
        let mut acc = 0.0;
        for t in (0..horizon).rev() {
            let r = traj * horizon + t;
            let next_v = if t + 1 < horizon { values[r + 1] } else { 0.0 };
            let delta = rewards[r] + gamma * next_v - values[r];
            acc = delta + gamma * lambda * acc;
            out[r] = acc;
        }
    }
    out
}

/// Shifts and scales to zero mean and unit standard deviation. A constant
/// input becomes all zeros.
pub fn normalize(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = libm::sqrt(var) + 1e-8;
    for v in values.iter_mut() {
        *v = (*v - mean) / std;
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// `[s, s*s, t/H, (t/H)^2, (t/H)^3, 1]` for every row.
pub fn features(states: &Tensor, horizon: usize) -> Tensor {
    assert_eq!(states.cols(), 2, "features expect 2-d states");
    let rows = states.rows();
    let mut x = Tensor::zeros(rows, N_FEATURES);
    for r in 0..rows {
        let (sx, sy) = (states.get(r, 0), states.get(r, 1));
        let tau = (r % horizon) as f64 / horizon as f64;
        let row = [sx, sy, sx * sx, sy * sy, tau, tau * tau, tau * tau * tau, 1.0];
        for (c, v) in row.into_iter().enumerate() {
            x.set(r, c, v);
        }
    }
    x
}

/// Ridge-regularized least squares on [`features`].
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFeatureBaseline {
    pub weights: [f64; N_FEATURES],
}

impl LinearFeatureBaseline {
    /// Fits `targets` (one per row of `states`). Never fails: the ridge is
    /// raised tenfold until the normal equations factor.
    pub fn fit(states: &Tensor, horizon: usize, targets: &[f64]) -> Self {
        assert_eq!(states.rows(), targets.len(), "one target per row");
        let x = features(states, horizon);
        let xtx = x.transpose().matmul(&x);
        let xty = x.transpose().matmul(&Tensor::column(targets.to_vec()));
        let mut ridge = RIDGE;
        loop {
            let mut a = xtx.clone();
            // the bias column is left unpenalized so constants fit exactly
            for i in 0..N_FEATURES - 1 {
                a.set(i, i, a.get(i, i) + ridge);
            }
            if let Some(w) = cholesky_solve(&a, xty.data()) {
                if w.iter().all(|v| v.is_finite()) {
                    let mut weights = [0.0; N_FEATURES];
                    weights.copy_from_slice(&w);
                    return Self { weights };
                }
            }
            ridge *= 10.0;
        }
    }

    pub fn predict(&self, states: &Tensor, horizon: usize) -> Vec<f64> {
        let x = features(states, horizon);
        (0..x.rows()).map(|r| x.row_slice(r).iter().zip(&self.weights).map(|(a, b)| a * b).sum()).collect()
    }
}

fn cholesky_solve(a: &Tensor, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    let mut l = Tensor::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l.set(i, i, libm::sqrt(s));
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_states(n: usize, seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::from_vec(n, 2, (0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect())
    }

    #[test]
    fn reward_to_go_per_trajectory() {
        let r = [1.0, 2.0, 3.0, 10.0, 0.0, 1.0];
        assert_eq!(reward_to_go(&r, 3, 1.0), vec![6.0, 5.0, 3.0, 11.0, 1.0, 1.0]);
        assert_eq!(reward_to_go(&r, 3, 0.5), vec![1.0 + 1.0 + 0.75, 2.0 + 1.5, 3.0, 10.0 + 0.25, 0.5, 1.0]);
    }

    #[test]
    fn gae_with_unit_lambda_is_return_minus_value() {
        let r = [0.5, -1.0, 2.0, 0.0];
        let v = [0.3, 0.1, -0.2, 0.7];
        let a = gae(&r, &v, 2, 0.9, 1.0);
        let rtg = reward_to_go(&r, 2, 0.9);
        for i in 0..4 {
            assert!((a[i] - (rtg[i] - v[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_targets_are_reproduced() {
        let s = random_states(400, 1);
        let y = vec![3.25; 400];
        let b = LinearFeatureBaseline::fit(&s, 100, &y);
        for p in b.predict(&s, 100) {
            assert!((p - 3.25).abs() < 1e-8, "{p}");
        }
    }

    #[test]
    fn realizable_targets_leave_tiny_residual() {
        let s = random_states(300, 2);
        let x = features(&s, 50);
        let w = [0.5, -1.0, 0.25, 0.1, 2.0, -0.7, 0.3, 1.5];
        let y: Vec<f64> = (0..300).map(|r| x.row_slice(r).iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
        let b = LinearFeatureBaseline::fit(&s, 50, &y);
        let pred = b.predict(&s, 50);
        // the ridge shrinks the time polynomials slightly; the mean squared
        // residual stays far below the tolerance
        let mse = pred.iter().zip(&y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / 300.0;
        assert!(mse < 1e-6, "{mse}");
    }

    #[test]
    fn fit_never_worse_than_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..20 {
            let s = random_states(200, 100 + seed);
            let y: Vec<f64> = (0..200).map(|_| rng.random_range(-5.0..5.0)).collect();
            let m = mean(&y);
            let var = y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 200.0;
            let pred = LinearFeatureBaseline::fit(&s, 20, &y).predict(&s, 20);
            let mse = pred.iter().zip(&y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / 200.0;
            assert!(mse <= var + 1e-12);
        }
    }

    #[test]
    fn degenerate_design_still_fits() {
        // every state identical and horizon 1: only the bias is identifiable
        let s = Tensor::zeros(10, 2);
        let b = LinearFeatureBaseline::fit(&s, 1, &[2.0; 10]);
        assert!(b.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn normalize_handles_constants() {
        let mut v = [4.0; 5];
        normalize(&mut v);
        assert!(v.iter().all(|&x| x == 0.0));
        let mut w = [1.0, 2.0, 3.0];
        normalize(&mut w);
        assert!(mean(&w).abs() < 1e-12);
    }
}
