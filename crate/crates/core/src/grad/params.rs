use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{GradError, Graph, Var};
use crate::tensor::Tensor;

/// Named parameter tensors with a stable order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: Tensor) -> Result<(), GradError> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(GradError::DuplicateName(name));
        }
        self.names.push(name);
        self.tensors.push(value);
        Ok(())
    }

    /// Builder-style [`ParamSet::push`]; panics on a duplicate name.
    pub fn with(mut self, name: &str, value: Tensor) -> Self {
        self.push(name, value).expect("duplicate parameter name");
        self
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    /// Total number of scalar entries.
    pub fn total_dim(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_dim());
        for t in &self.tensors {
            out.extend_from_slice(t.data());
        }
        out
    }

    /// Same names and shapes, values taken from `flat` in order.
    pub fn unflatten(&self, flat: &[f64]) -> Result<Self, GradError> {
        if flat.len() != self.total_dim() {
            return Err(GradError::FlatLength { expected: self.total_dim(), got: flat.len() });
        }
        let mut offset = 0;
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                let (r, c) = t.shape();
                let chunk = flat[offset..offset + t.len()].to_vec();
                offset += t.len();
                Tensor::from_vec(r, c, chunk)
            })
            .collect();
        Ok(Self { names: self.names.clone(), tensors })
    }

    /// Registers every tensor as a leaf of `graph`, in order.
    pub fn register<'g>(&self, graph: &'g Graph) -> Vec<Var<'g>> {
        self.tensors.iter().map(|t| graph.leaf(t.clone())).collect()
    }

    /// Copies of the tensors under new names with `prefix.` prepended.
    pub fn prefixed(&self, prefix: &str) -> Self {
        let mut names = Vec::with_capacity(self.len());
        for n in &self.names {
            let mut s = prefix.to_string();
            s.push('.');
            s.push_str(n);
            names.push(s);
        }
        Self { names, tensors: self.tensors.clone() }
    }

    /// Concatenation of several sets; names must stay unique.
    pub fn merged(parts: &[&ParamSet]) -> Result<Self, GradError> {
        let mut out = Self::new();
        for p in parts {
            for (n, t) in p.iter() {
                out.push(n, t.clone())?;
            }
        }
        Ok(out)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            names: self.names.clone(),
            tensors: self.tensors.iter().map(|t| Tensor::zeros(t.rows(), t.cols())).collect(),
        }
    }
}

/// Per-leaf gradients; each entry is a differentiable node.
#[derive(Clone, Debug)]
pub struct GradientVector<'g> {
    grads: Vec<Var<'g>>,
}

impl<'g> GradientVector<'g> {
    /// Reverse-mode gradients of `loss` with respect to `params`.
    pub fn of(loss: Var<'g>, params: &[Var<'g>]) -> Result<Self, GradError> {
        Ok(Self { grads: loss.graph().grad(loss, params)? })
    }

    pub fn vars(&self) -> &[Var<'g>] {
        &self.grads
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn values(&self) -> Vec<Tensor> {
        self.grads.iter().map(|g| (*g.value()).clone()).collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in &self.grads {
            out.extend_from_slice(g.value().data());
        }
        out
    }
}

/// Worst elementwise disagreement between reverse-mode gradients and central
/// differences of `f` at `params`, using `|a - b| / max(|a|, |b|, 1e-8)`.
///
/// `f` is rebuilt on a fresh graph for every evaluation.
pub fn finite_diff_check<F>(f: F, params: &ParamSet, eps: f64) -> Result<f64, GradError>
where
    F: for<'g> Fn(&'g Graph, &[Var<'g>]) -> Var<'g>,
{
    let eval = |p: &ParamSet| -> Result<f64, GradError> {
        let g = Graph::new();
        let vars = p.register(&g);
        let v = f(&g, &vars).item();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GradError::NonFinite)
        }
    };

    let analytic = {
        let g = Graph::new();
        let vars = params.register(&g);
        let loss = f(&g, &vars);
        if !loss.item().is_finite() {
            return Err(GradError::NonFinite);
        }
        GradientVector::of(loss, &vars)?.flatten()
    };

    let base = params.flatten();
    let mut worst = 0.0f64;
    let mut probe = base.clone();
    for i in 0..base.len() {
        probe[i] = base[i] + eps;
        let up = eval(&params.unflatten(&probe)?)?;
        probe[i] = base[i] - eps;
        let down = eval(&params.unflatten(&probe)?)?;
        probe[i] = base[i];
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic[i];
        let denom = a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}
