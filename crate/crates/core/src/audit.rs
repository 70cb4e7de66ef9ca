//! Randomized audit of reverse-mode gradients against central differences,
//! covering every graph op, second-order use, and both network types.
//!
//! `stop_gradient` and `magic_box` are not derivatives of their forward
//! values, so their trials difference a reference form instead: `x * x0`
//! with `x0` frozen for the stop, and `exp(h(x) - h(x0))` for the box.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::grad::{GradError, Graph, ParamSet, Var};
use crate::nets::{GaussianPolicy, SupervisionNet};
use crate::tensor::Tensor;

/// Entries smaller than this are compared absolutely: central differences at
/// `eps = 1e-5` carry truncation error near `1e-10`, which would swamp a
/// relative comparison of an entry near `1e-6`.
pub const ABS_FLOOR: f64 = 1e-4;

type Objective = Box<dyn for<'g> Fn(&'g Graph, &[Var<'g>]) -> Var<'g>>;

/// One randomized problem: inputs, the objective whose reverse-mode gradient
/// is checked, and the objective that is differenced.
pub struct Trial {
    pub inputs: ParamSet,
    analytic: Objective,
    numeric: Option<Objective>,
}

impl Trial {
    fn plain(inputs: ParamSet, f: Objective) -> Self {
        Self { inputs, analytic: f, numeric: None }
    }

    /// Worst `|a - n| / max(|a|, |n|, ABS_FLOOR)` over all input entries.
    pub fn max_rel_error(&self, eps: f64) -> Result<f64, GradError> {
        let eval = |p: &ParamSet| -> Result<f64, GradError> {
            let g = Graph::new();
            let vars = p.register(&g);
            let f = self.numeric.as_ref().unwrap_or(&self.analytic);
            let v = f(&g, &vars).item();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(GradError::NonFinite)
            }
        };
        let analytic: Vec<f64> = {
            let g = Graph::new();
            let vars = self.inputs.register(&g);
            let loss = (self.analytic)(&g, &vars);
            g.grad(loss, &vars)?.iter().flat_map(|v| v.value().data().to_vec()).collect()
        };
        let base = self.inputs.flatten();
        let mut probe = base.clone();
        let mut worst = 0.0f64;
        for i in 0..base.len() {
            probe[i] = base[i] + eps;
            let up = eval(&self.inputs.unflatten(&probe)?)?;
            probe[i] = base[i] - eps;
            let down = eval(&self.inputs.unflatten(&probe)?)?;
            probe[i] = base[i];
            let numeric = (up - down) / (2.0 * eps);
            let denom = analytic[i].abs().max(numeric.abs()).max(ABS_FLOOR);
            worst = worst.max((analytic[i] - numeric).abs() / denom);
        }
        Ok(worst)
    }
}

/// Fixed, shape-agnostic cotangent so every output entry matters.
fn contract(out: Var) -> Var {
    let (r, c) = out.shape();
    let w = Tensor::from_vec(r, c, (0..r * c).map(|i| libm::cos(1.3 * i as f64 + 0.4)).collect());
    (out * out.graph().constant(w)).sum()
}

fn uniform(rng: &mut ChaCha8Rng, shape: (usize, usize), lo: f64, hi: f64) -> Tensor {
    let n = shape.0 * shape.1;
    Tensor::from_vec(shape.0, shape.1, (0..n).map(|_| rng.random_range(lo..hi)).collect())
}

/// Uniform on `[-1, 1]` but at least `gap` away from each point in `avoid`.
fn avoiding(rng: &mut ChaCha8Rng, shape: (usize, usize), avoid: &[f64], gap: f64) -> Tensor {
    let n = shape.0 * shape.1;
    let data = (0..n)
        .map(|_| loop {
            let x: f64 = rng.random_range(-1.0..1.0);
            if avoid.iter().all(|a| (x - a).abs() >= gap) {
                break x;
            }
        })
        .collect();
    Tensor::from_vec(shape.0, shape.1, data)
}

fn dim(rng: &mut ChaCha8Rng) -> usize {
    rng.random_range(1..=4)
}

fn inputs(tensors: Vec<Tensor>) -> ParamSet {
    let mut p = ParamSet::new();
    for (i, t) in tensors.into_iter().enumerate() {
        p.push(alloc::format!("x{i}"), t).expect("distinct names");
    }
    p
}

fn unary(rng: &mut ChaCha8Rng, f: for<'g> fn(Var<'g>) -> Var<'g>) -> Trial {
    let shape = (dim(rng), dim(rng));
    Trial::plain(inputs(vec![uniform(rng, shape, -1.0, 1.0)]), Box::new(move |_, v| contract(f(v[0]))))
}

fn binary(rng: &mut ChaCha8Rng, lo: f64, f: for<'g> fn(Var<'g>, Var<'g>) -> Var<'g>) -> Trial {
    let shape = (dim(rng), dim(rng));
    let a = uniform(rng, shape, -1.0, 1.0);
    let b = uniform(rng, shape, lo, 2.0);
    Trial::plain(inputs(vec![a, b]), Box::new(move |_, v| contract(f(v[0], v[1]))))
}

/// Names of every audited case, in [`trial`] order.
pub const CASES: &[&str] = &[
    "add", "sub", "mul", "div", "neg", "matmul", "matmul_nt", "matmul_tn", "transpose", "tanh", "exp", "log",
    "square", "scale", "shift", "sum", "sum_rows", "sum_cols", "mean", "reduce_to", "broadcast_row",
    "broadcast_scalar", "clip", "minimum", "concat_cols", "concat_rows", "slice_cols", "slice_rows", "pad_cols",
    "pad_rows", "reshape", "stop_gradient", "magic_box", "magic_box_second_order", "second_order_mlp",
    "gaussian_policy", "gaussian_policy_latent", "supervision_net",
];

/// Builds a random instance of case `name`, or `None` for an unknown name.
pub fn trial(name: &str, rng: &mut ChaCha8Rng) -> Option<Trial> {
    Some(match name {
        "add" => binary(rng, -2.0, |a, b| a + b),
        "sub" => binary(rng, -2.0, |a, b| a - b),
        "mul" => binary(rng, -2.0, |a, b| a * b),
        "div" => binary(rng, 0.5, |a, b| a / b),
        "neg" => unary(rng, |a| -a),
        "matmul" | "matmul_nt" | "matmul_tn" => {
            let (m, k, n) = (dim(rng), dim(rng), dim(rng));
            let (sa, sb, f): (_, _, for<'g> fn(Var<'g>, Var<'g>) -> Var<'g>) = match name {
                "matmul" => ((m, k), (k, n), |a, b| a.matmul(b)),
                "matmul_nt" => ((m, k), (n, k), |a, b| a.matmul_nt(b)),
                _ => ((k, m), (k, n), |a, b| a.matmul_tn(b)),
            };
            let ins = inputs(vec![uniform(rng, sa, -1.0, 1.0), uniform(rng, sb, -1.0, 1.0)]);
            Trial::plain(ins, Box::new(move |_, v| contract(f(v[0], v[1]))))
        }
        "transpose" => unary(rng, |a| a.t()),
        "tanh" => unary(rng, |a| a.tanh()),
        "exp" => unary(rng, |a| a.exp()),
        "log" => {
            let shape = (dim(rng), dim(rng));
            Trial::plain(inputs(vec![uniform(rng, shape, 0.3, 2.0)]), Box::new(|_, v| contract(v[0].log())))
        }
        "square" => unary(rng, |a| a.square()),
        "scale" => unary(rng, |a| a.scale(-1.7)),
        "shift" => unary(rng, |a| a.shift(0.3).square()),
        "sum" => unary(rng, |a| a.square().sum()),
        "sum_rows" => unary(rng, |a| a.tanh().sum_rows()),
        "sum_cols" => unary(rng, |a| a.tanh().sum_cols()),
        "mean" => unary(rng, |a| a.exp().mean()),
        "reduce_to" => unary(rng, |a| {
            let (r, _) = a.shape();
            a.square().reduce_to((r, 1))
        }),
        "broadcast_row" => {
            let (r, c) = (dim(rng), dim(rng));
            Trial::plain(inputs(vec![uniform(rng, (1, c), -1.0, 1.0)]), Box::new(move |_, v| contract(v[0].broadcast(r, c).tanh())))
        }
        "broadcast_scalar" => {
            let (r, c) = (dim(rng), dim(rng));
            Trial::plain(inputs(vec![uniform(rng, (1, 1), -1.0, 1.0)]), Box::new(move |_, v| contract(v[0].broadcast(r, c).square())))
        }
        "clip" => {
            let shape = (dim(rng), dim(rng));
            let x = avoiding(rng, shape, &[-0.5, 0.5], 0.01);
            Trial::plain(inputs(vec![x]), Box::new(|_, v| contract(v[0].clip(-0.5, 0.5).square())))
        }
        "minimum" => {
            let shape = (dim(rng), dim(rng));
            let a = uniform(rng, shape, -1.0, 1.0);
            let gap = Tensor::from_vec(
                shape.0,
                shape.1,
                (0..shape.0 * shape.1)
                    .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(0.05..1.0))
                    .collect(),
            );
            let b = a.add(&gap);
            Trial::plain(inputs(vec![a, b]), Box::new(|_, v| contract(v[0].minimum(v[1]))))
        }
        "concat_cols" | "concat_rows" => {
            let (r, c1, c2) = (dim(rng), dim(rng), dim(rng));
            let cols = name == "concat_cols";
            let (sa, sb) = if cols { ((r, c1), (r, c2)) } else { ((c1, r), (c2, r)) };
            let ins = inputs(vec![uniform(rng, sa, -1.0, 1.0), uniform(rng, sb, -1.0, 1.0)]);
            Trial::plain(
                ins,
                Box::new(move |_, v| {
                    let joined = if cols { v[0].concat_cols(v[1]) } else { v[0].concat_rows(v[1]) };
                    contract(joined.tanh())
                }),
            )
        }
        "slice_cols" | "slice_rows" | "pad_cols" | "pad_rows" => {
            let (r, c) = (dim(rng) + 1, dim(rng) + 1);
            let along = if name.ends_with("cols") { c } else { r };
            let start = rng.random_range(0..along);
            let len = rng.random_range(1..=along - start);
            let total = along + rng.random_range(0..3);
            let kind = ["slice_cols", "slice_rows", "pad_cols", "pad_rows"].iter().position(|k| *k == name).unwrap_or(3);
            Trial::plain(
                inputs(vec![uniform(rng, (r, c), -1.0, 1.0)]),
                Box::new(move |_, v| {
                    let out = match kind {
                        0 => v[0].slice_cols(start, len),
                        1 => v[0].slice_rows(start, len),
                        2 => v[0].pad_cols(total - along, total),
                        _ => v[0].pad_rows(total - along, total),
                    };
                    contract(out.square())
                }),
            )
        }
        "reshape" => {
            let (r, c) = (dim(rng), dim(rng));
            Trial::plain(inputs(vec![uniform(rng, (r, c), -1.0, 1.0)]), Box::new(move |_, v| contract(v[0].reshape(c, r).tanh())))
        }
        "stop_gradient" => {
            let shape = (dim(rng), dim(rng));
            let x0 = uniform(rng, shape, -1.0, 1.0);
            let frozen = x0.clone();
            Trial {
                inputs: inputs(vec![x0]),
                analytic: Box::new(|_, v| contract(v[0] * v[0].stop_gradient())),
                numeric: Some(Box::new(move |g, v| contract(v[0] * g.constant(frozen.clone())))),
            }
        }
        "magic_box" | "magic_box_second_order" => {
            let shape = (dim(rng), dim(rng));
            let x0 = uniform(rng, shape, -1.0, 1.0);
            // h(x0), the sampling-time log-probability the box stands in for
            let h0 = {
                let g = Graph::new();
                (*box_exponent(g.constant(x0.clone())).value()).clone()
            };
            let second = name == "magic_box_second_order";
            let analytic: Objective = Box::new(move |g, v| {
                let f = box_weighted(v[0], box_exponent(v[0]).magic_box());
                if second {
                    let d = g.grad(f, &[v[0]]).expect("scalar objective");
                    contract(d[0])
                } else {
                    f
                }
            });
            let numeric: Objective = Box::new(move |g, v| {
                let w = (box_exponent(v[0]) - g.constant(h0.clone())).exp();
                let f = box_weighted(v[0], w);
                if second {
                    let d = g.grad(f, &[v[0]]).expect("scalar objective");
                    contract(d[0])
                } else {
                    f
                }
            });
            Trial { inputs: inputs(vec![x0]), analytic, numeric: Some(numeric) }
        }
        "second_order_mlp" => {
            let (n, d, h) = (dim(rng), dim(rng), dim(rng));
            let ins = inputs(vec![
                uniform(rng, (n, d), -1.0, 1.0),
                uniform(rng, (d, h), -1.0, 1.0),
                uniform(rng, (h, 1), -1.0, 1.0),
            ]);
            // squared norm of the input gradient of a tanh net
            Trial::plain(
                ins,
                Box::new(|g, v| {
                    let out = v[0].matmul(v[1]).tanh().matmul(v[2]).square().sum();
                    let d = g.grad(out, &[v[0]]).expect("scalar objective");
                    d[0].square().sum()
                }),
            )
        }
        "gaussian_policy" | "gaussian_policy_latent" => {
            let z_dim = if name == "gaussian_policy" { 0 } else { dim(rng) };
            let (obs, act, rows) = (dim(rng), dim(rng), dim(rng));
            let hidden: Vec<usize> = (0..rng.random_range(1..=2)).map(|_| dim(rng) + 1).collect();
            let mut policy = GaussianPolicy::new(obs, z_dim, act, &hidden, rng);
            let n = policy.params.len();
            // move log-std off its initial zero so the density shape varies
            policy.params.tensors_mut()[n - 1] = uniform(rng, (1, act), -0.8, 0.8);
            let states = uniform(rng, (rows, obs), -1.0, 1.0);
            let actions = uniform(rng, (rows, act), -1.5, 1.5);
            let mut ins = policy.params.clone();
            if z_dim > 0 {
                ins.push("z", uniform(rng, (1, z_dim), -1.0, 1.0)).expect("fresh name");
            }
            Trial::plain(
                ins,
                Box::new(move |g, v| {
                    let z = (z_dim > 0).then(|| v[n]);
                    let input = policy.input_graph(g.constant(states.clone()), z);
                    contract(policy.log_prob_graph(&v[..n], input, g.constant(actions.clone())))
                }),
            )
        }
        "supervision_net" => {
            let (obs, act, z_dim, repr, rows) = (dim(rng), dim(rng), dim(rng), dim(rng), dim(rng));
            let hidden: Vec<usize> = (0..rng.random_range(0..=2)).map(|_| dim(rng) + 1).collect();
            let net = SupervisionNet::new(obs, act, z_dim, &hidden, repr, rng);
            let n = net.params.len();
            let states = uniform(rng, (rows, obs), -1.0, 1.0);
            let actions = uniform(rng, (rows, act), -1.0, 1.0);
            let mut ins = net.params.clone();
            ins.push("z", uniform(rng, (1, z_dim), -1.0, 1.0)).expect("fresh name");
            Trial::plain(
                ins,
                Box::new(move |g, v| {
                    let z_rows = v[n].broadcast(rows, z_dim);
                    contract(net.predict_graph(&v[..n], net.input_graph(g, &states, &actions, z_rows)))
                }),
            )
        }
        _ => return None,
    })
}

/// Running row sums of `tanh(x)`, a stand-in for cumulative log-probabilities.
fn box_exponent(x: Var) -> Var {
    let c = x.shape().1;
    x.tanh().matmul(x.graph().constant(Tensor::upper_ones(c)))
}

fn box_weighted<'g>(x: Var<'g>, weights: Var<'g>) -> Var<'g> {
    contract(weights * x.square())
}

/// Worst error of one case over `trials` seeded instances.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseReport {
    pub name: &'static str,
    pub trials: usize,
    pub max_rel_error: f64,
}

/// Runs every case `trials` times from `seed`.
pub fn run(seed: u64, trials: usize, eps: f64) -> Result<Vec<CaseReport>, GradError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(CASES.len());
    for &name in CASES {
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let t = trial(name, &mut rng).expect("listed case");
            worst = worst.max(t.max_rel_error(eps)?);
        }
        out.push(CaseReport { name, trials, max_rel_error: worst });
    }
    Ok(out)
}
