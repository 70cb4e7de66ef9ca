//! Gaussian MLP policies and the supervision network.
//!
//! Each network keeps its weights in a [`ParamSet`] and offers two forward
//! paths: a plain one over [`Tensor`]s used during rollouts, and a graph one
//! over [`Var`]s used for gradients. Both run the same kernels in the same
//! order, so log-probabilities recorded at sampling time are bit-identical to
//! the ones recomputed in a graph from the same weights.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::grad::{Graph, ParamSet, Var};
use crate::tensor::Tensor;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Layer sizes of a tanh MLP with a linear output layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlpArch {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
}

impl MlpArch {
    pub fn new(input: usize, hidden: &[usize], output: usize) -> Self {
        Self { input, hidden: hidden.to_vec(), output }
    }

    fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden.len() + 2);
        w.push(self.input);
        w.extend_from_slice(&self.hidden);
        w.push(self.output);
        w
    }

    pub fn n_layers(&self) -> usize {
        self.hidden.len() + 1
    }

    /// Weights uniform in `±1/sqrt(fan_in)`, zero biases.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamSet {
        let widths = self.widths();
        let mut p = ParamSet::new();
        for (i, pair) in widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / libm::sqrt(fan_in.max(1) as f64);
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            let w = (0..fan_in * fan_out).map(|_| dist.sample(rng)).collect();
            p = p
                .with(&format!("l{i}.w"), Tensor::from_vec(fan_in, fan_out, w))
                .with(&format!("l{i}.b"), Tensor::zeros(1, fan_out));
        }
        p
    }
}

/// Plain forward pass. `layers` holds `[w0, b0, w1, b1, ...]`.
pub fn mlp_forward(layers: &[Tensor], x: &Tensor) -> Tensor {
    let n = layers.len() / 2;
    let mut h = x.clone();
    for i in 0..n {
        let pre = h.matmul(&layers[2 * i]).add(&layers[2 * i + 1].broadcast(h.rows(), layers[2 * i + 1].cols()));
        h = if i + 1 < n { pre.tanh() } else { pre };
    }
    h
}

/// Graph forward pass over the same layout as [`mlp_forward`].
pub fn mlp_forward_graph<'g>(layers: &[Var<'g>], x: Var<'g>) -> Var<'g> {
    let n = layers.len() / 2;
    let mut h = x;
    for i in 0..n {
        let xw = h.matmul(layers[2 * i]);
        let (r, c) = xw.shape();
        let pre = xw + layers[2 * i + 1].broadcast(r, c);
        h = if i + 1 < n { pre.tanh() } else { pre };
    }
    h
}

/// Diagonal Gaussian policy with a state-independent, learnable log-std.
///
/// Parameters are laid out as the mean MLP's layers followed by `log_std`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPolicy {
    pub obs_dim: usize,
    /// Width of the latent appended to observations; 0 when unconditioned.
    pub z_dim: usize,
    pub act_dim: usize,
    pub arch: MlpArch,
    pub params: ParamSet,
}

impl GaussianPolicy {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, z_dim: usize, act_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let arch = MlpArch::new(obs_dim + z_dim, hidden, act_dim);
        let params = arch.init(rng).with("log_std", Tensor::zeros(1, act_dim));
        Self { obs_dim, z_dim, act_dim, arch, params }
    }

    pub fn input_dim(&self) -> usize {
        self.obs_dim + self.z_dim
    }

    pub fn with_params(&self, params: ParamSet) -> Self {
        assert_eq!(params.len(), self.params.len(), "parameter layout mismatch");
        Self { params, ..self.clone() }
    }

    fn n_mean(&self) -> usize {
        self.params.len() - 1
    }

    /// Observations with the latent appended to every row.
    pub fn input(&self, obs: &Tensor, z: Option<&Tensor>) -> Tensor {
        assert_eq!(obs.cols(), self.obs_dim, "observation width mismatch");
        match (z, self.z_dim) {
            (None, 0) => obs.clone(),
            (Some(z), d) if d > 0 => {
                assert_eq!(z.shape(), (1, d), "latent shape mismatch");
                obs.concat_cols(&z.broadcast(obs.rows(), d))
            }
            _ => panic!("latent must be supplied exactly when the policy is z-conditioned"),
        }
    }

    /// Graph counterpart of [`GaussianPolicy::input`].
    pub fn input_graph<'g>(&self, obs: Var<'g>, z: Option<Var<'g>>) -> Var<'g> {
        assert_eq!(obs.shape().1, self.obs_dim, "observation width mismatch");
        match (z, self.z_dim) {
            (None, 0) => obs,
            (Some(z), d) if d > 0 => {
                assert_eq!(z.shape(), (1, d), "latent shape mismatch");
                obs.concat_cols(z.broadcast(obs.shape().0, d))
            }
            _ => panic!("latent must be supplied exactly when the policy is z-conditioned"),
        }
    }

    pub fn mean(&self, input: &Tensor) -> Tensor {
        assert_eq!(input.cols(), self.input_dim(), "policy input width mismatch");
        mlp_forward(&self.params.tensors()[..self.n_mean()], input)
    }

    fn clamped_log_std(&self) -> Tensor {
        self.params.tensors()[self.n_mean()].map(|x| x.clamp(LOG_STD_MIN, LOG_STD_MAX))
    }

    /// Per-row log-density of `actions`, `n x 1`.
    pub fn log_prob(&self, input: &Tensor, actions: &Tensor) -> Tensor {
        let mean = self.mean(input);
        assert_eq!(actions.shape(), mean.shape(), "action shape mismatch");
        let log_std = self.clamped_log_std();
        gaussian_log_prob(&mean, &log_std, actions)
    }

    /// Graph log-density, differentiable in the weights, the log-std and the input.
    pub fn log_prob_graph<'g>(&self, vars: &[Var<'g>], input: Var<'g>, actions: Var<'g>) -> Var<'g> {
        assert_eq!(vars.len(), self.params.len(), "parameter layout mismatch");
        assert_eq!(input.shape().1, self.input_dim(), "policy input width mismatch");
        let mean = mlp_forward_graph(&vars[..self.n_mean()], input);
        assert_eq!(actions.shape(), mean.shape(), "action shape mismatch");
        let log_std = vars[self.n_mean()].clip(LOG_STD_MIN, LOG_STD_MAX);
        gaussian_log_prob_graph(mean, log_std, actions)
    }

    /// Draws one action per input row: `mean + exp(log_std) * eps`.
    /// Returns the actions and their log-densities.
    pub fn sample<R: Rng + ?Sized>(&self, input: &Tensor, rng: &mut R) -> (Tensor, Tensor) {
        let mean = self.mean(input);
        let log_std = self.clamped_log_std();
        let std = log_std.exp();
        let mut actions = mean.clone();
        for r in 0..actions.rows() {
            for c in 0..actions.cols() {
                let eps: f64 = StandardNormal.sample(rng);
                actions.set(r, c, mean.get(r, c) + std.get(0, c) * eps);
            }
        }
        let lp = gaussian_log_prob(&mean, &log_std, &actions);
        (actions, lp)
    }
}

fn gaussian_log_prob(mean: &Tensor, log_std: &Tensor, actions: &Tensor) -> Tensor {
    let (n, d) = mean.shape();
    let std = log_std.exp();
    let standardized = actions.sub(mean).zip_map(&std.broadcast(n, d), |x, s| x / s);
    let quad = standardized.map(|x| x * x).sum_cols().scale(-0.5);
    let norm = Tensor::scalar(log_std.sum_all()).map(|s| s + d as f64 * HALF_LN_2PI);
    quad.sub(&norm.broadcast(n, 1))
}

fn gaussian_log_prob_graph<'g>(mean: Var<'g>, log_std: Var<'g>, actions: Var<'g>) -> Var<'g> {
    let (n, d) = mean.shape();
    let std = log_std.exp();
    let standardized = (actions - mean) / std.broadcast(n, d);
    let quad = standardized.square().sum_cols().scale(-0.5);
    let norm = log_std.sum().shift(d as f64 * HALF_LN_2PI);
    quad - norm.broadcast(n, 1)
}

/// `M(s, a, z) = w^T m([s; a; z])`: an MLP body producing a representation
/// and a bias-free linear head.
///
/// Parameters are the body's layers followed by `head.w` (`repr_dim x 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct SupervisionNet {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub z_dim: usize,
    pub repr_dim: usize,
    pub arch: MlpArch,
    pub params: ParamSet,
}

impl SupervisionNet {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        act_dim: usize,
        z_dim: usize,
        hidden: &[usize],
        repr_dim: usize,
        rng: &mut R,
    ) -> Self {
        let arch = MlpArch::new(obs_dim + act_dim + z_dim, hidden, repr_dim);
        let mut params = arch.init(rng);
        let head = MlpArch::new(repr_dim, &[], 1).init(rng).tensors()[0].clone();
        params.push("head.w", head).expect("unique name");
        Self { obs_dim, act_dim, z_dim, repr_dim, arch, params }
    }

    pub fn with_params(&self, params: ParamSet) -> Self {
        assert_eq!(params.len(), self.params.len(), "parameter layout mismatch");
        Self { params, ..self.clone() }
    }

    pub fn input_dim(&self) -> usize {
        self.obs_dim + self.act_dim + self.z_dim
    }

    fn n_body(&self) -> usize {
        self.params.len() - 1
    }

    /// Representation `m([s; a; z])`, `n x repr_dim`.
    pub fn representation(&self, input: &Tensor) -> Tensor {
        assert_eq!(input.cols(), self.input_dim(), "supervision input width mismatch");
        mlp_forward(&self.params.tensors()[..self.n_body()], input)
    }

    pub fn predict(&self, input: &Tensor) -> Tensor {
        self.representation(input).matmul(&self.params.tensors()[self.n_body()])
    }

    /// Graph prediction, `n x 1`, differentiable in body, head and input.
    pub fn predict_graph<'g>(&self, vars: &[Var<'g>], input: Var<'g>) -> Var<'g> {
        assert_eq!(vars.len(), self.params.len(), "parameter layout mismatch");
        assert_eq!(input.shape().1, self.input_dim(), "supervision input width mismatch");
        mlp_forward_graph(&vars[..self.n_body()], input).matmul(vars[self.n_body()])
    }

    /// `[s; a; z]` rows for a graph, with `z` broadcast across rows.
    pub fn input_graph<'g>(&self, graph: &'g Graph, obs: &Tensor, actions: &Tensor, z_rows: Var<'g>) -> Var<'g> {
        assert_eq!(z_rows.shape(), (obs.rows(), self.z_dim), "latent rows shape mismatch");
        graph.constant(obs.concat_cols(actions)).concat_cols(z_rows)
    }
}

/// Shared task latent. The stored value is always the zero vector; adapted
/// latents are produced per task by the inner loop.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentZ(Tensor);

impl LatentZ {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "latent dimension must be at least 1");
        Self(Tensor::zeros(1, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }
}
