//! Likelihood-ratio surrogates shared by every learner.

use crate::grad::{Graph, Var};
use crate::tensor::Tensor;

/// `mean(min(rho * A, clip(rho, 1 - eps, 1 + eps) * A))` with
/// `rho = exp(logp - logp_old)`.
pub fn clipped_surrogate<'g>(logp: Var<'g>, logp_old: &[f64], advantages: &[f64], eps: f64) -> Var<'g> {
    let g = logp.graph();
    let n = logp.shape().0;
    assert_eq!(logp.shape(), (n, 1), "log-probabilities must be a column");
    assert_eq!(logp_old.len(), n, "one old log-probability per row");
    assert_eq!(advantages.len(), n, "one advantage per row");
    let ratio = (logp - column(g, logp_old)).exp();
    let adv = column(g, advantages);
    let unclipped = ratio * adv;
    let clipped = ratio.clip(1.0 - eps, 1.0 + eps) * adv;
    unclipped.minimum(clipped).mean()
}

/// `sum(logp * weights) * scale`: the score-function surrogate whose gradient
/// is `scale * sum(grad log p * weight)`.
pub fn score_surrogate<'g>(logp: Var<'g>, weights: &[f64], scale: f64) -> Var<'g> {
    let g = logp.graph();
    (logp * column(g, weights)).sum().scale(scale)
}

pub(crate) fn column<'g>(g: &'g Graph, values: &[f64]) -> Var<'g> {
    g.constant(Tensor::column(values.to_vec()))
}
