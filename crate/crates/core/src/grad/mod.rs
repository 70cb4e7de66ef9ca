//! Reverse-mode automatic differentiation with reentrant gradients.

mod graph;
mod params;

pub use graph::{Graph, Var};
pub use params::{finite_diff_check, GradientVector, ParamSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GradError {
    #[error("loss must be a 1x1 node, got {rows}x{cols}")]
    NonScalarLoss { rows: usize, cols: usize },
    #[error("objective evaluated to a non-finite value")]
    NonFinite,
    #[error("parameter name `{0}` registered twice")]
    DuplicateName(alloc::string::String),
    #[error("flat parameter vector has {got} entries, expected {expected}")]
    FlatLength { expected: usize, got: usize },
    #[error("parameter `{0}` not found")]
    MissingName(alloc::string::String),
}
