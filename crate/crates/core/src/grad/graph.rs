//! Reverse-mode tape over [`Tensor`] values.
//!
//! A [`Graph`] is an append-only arena of nodes. Every operation pushes a new
//! node holding its forward value and the ids of its inputs; nothing recorded
//! is ever mutated. [`Graph::grad`] walks the arena backwards and expresses
//! each vector-Jacobian product with the same recorded operations, so the
//! gradients it returns are ordinary nodes that can be differentiated again.

use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::ops;

use crate::tensor::{broadcast_compatible, Tensor};

use super::GradError;

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Scale(usize, f64),
    Shift(usize),
    MatMul(usize, usize),
    MatMulNT(usize, usize),
    MatMulTN(usize, usize),
    Transpose(usize),
    Tanh(usize),
    Exp(usize),
    Log(usize),
    Square(usize),
    ReduceTo(usize),
    Broadcast(usize),
    Clip(usize, f64, f64),
    Min(usize, usize),
    ConcatCols(usize, usize),
    ConcatRows(usize, usize),
    SliceCols(usize, usize),
    SliceRows(usize, usize),
    PadCols(usize, usize),
    PadRows(usize, usize),
    Reshape(usize),
    StopGradient,
    MagicBox(usize),
}

impl Op {
    fn parents(self) -> (Option<usize>, Option<usize>) {
        use Op::*;
        match self {
            Leaf => (None, None),
            // Gradient never crosses a stop_gradient.
            StopGradient => (None, None),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | MatMul(a, b) | MatMulNT(a, b) | MatMulTN(a, b) | Min(a, b) | ConcatCols(a, b)
            | ConcatRows(a, b) => (Some(a), Some(b)),
            Neg(a) | Scale(a, _) | Shift(a) | Transpose(a) | Tanh(a) | Exp(a) | Log(a) | Square(a)
            | ReduceTo(a) | Broadcast(a) | Clip(a, _, _) | SliceCols(a, _) | SliceRows(a, _) | PadCols(a, _)
            | PadRows(a, _) | Reshape(a) | MagicBox(a) => (Some(a), None),
        }
    }
}

struct Node {
    value: Rc<Tensor>,
    op: Op,
}

/// Arena of recorded operations. Single-threaded; build one per task.
#[derive(Default)]
pub struct Graph {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a node of a [`Graph`].
#[derive(Clone, Copy)]
pub struct Var<'g> {
    graph: &'g Graph,
    id: usize,
}

impl core::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let (r, c) = self.shape();
        write!(f, "Var#{}({}x{})", self.id, r, c)
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, value: Tensor, op: Op) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { value: Rc::new(value), op });
        Var { graph: self, id: nodes.len() - 1 }
    }

    /// A leaf node. Leaves are differentiable when passed to [`Graph::grad`];
    /// otherwise they act as constants.
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf)
    }

    pub fn constant(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf)
    }

    pub fn scalar(&self, value: f64) -> Var<'_> {
        self.constant(Tensor::scalar(value))
    }

    fn value_of(&self, id: usize) -> Rc<Tensor> {
        Rc::clone(&self.nodes.borrow()[id].value)
    }

    fn op_of(&self, id: usize) -> Op {
        self.nodes.borrow()[id].op
    }

    fn var(&self, id: usize) -> Var<'_> {
        Var { graph: self, id }
    }

    /// Gradients of the scalar `loss` with respect to each of `wrt`.
    ///
    /// The returned nodes live in this graph and may themselves be
    /// differentiated. A target that does not influence `loss` receives a
    /// zero-filled constant of its own shape.
    pub fn grad<'g>(&'g self, loss: Var<'g>, wrt: &[Var<'g>]) -> Result<Vec<Var<'g>>, GradError> {
        assert!(core::ptr::eq(loss.graph, self), "loss belongs to another graph");
        let (r, c) = loss.shape();
        if (r, c) != (1, 1) {
            return Err(GradError::NonScalarLoss { rows: r, cols: c });
        }
        let end = loss.id + 1;

        let mut on_path = vec![false; end];
        for w in wrt {
            assert!(core::ptr::eq(w.graph, self), "gradient target belongs to another graph");
            if w.id < end {
                on_path[w.id] = true;
            }
        }
        for id in 0..end {
            if on_path[id] {
                continue;
            }
            let (a, b) = self.op_of(id).parents();
            on_path[id] = a.is_some_and(|p| on_path[p]) || b.is_some_and(|p| on_path[p]);
        }

        let mut adjoint: Vec<Option<Var<'g>>> = vec![None; end];
        if on_path[loss.id] {
            adjoint[loss.id] = Some(self.scalar(1.0));
        }
        for id in (0..end).rev() {
            if !on_path[id] {
                continue;
            }
            let Some(g) = adjoint[id] else { continue };
            let op = self.op_of(id);
            self.propagate(op, self.var(id), g, &on_path, &mut adjoint);
        }

        Ok(wrt
            .iter()
            .map(|w| {
                adjoint.get(w.id).copied().flatten().unwrap_or_else(|| {
                    let (r, c) = w.shape();
                    self.constant(Tensor::zeros(r, c))
                })
            })
            .collect())
    }

    fn propagate<'g>(
        &'g self,
        op: Op,
        out: Var<'g>,
        g: Var<'g>,
        on_path: &[bool],
        adjoint: &mut [Option<Var<'g>>],
    ) {
        let mut send = |id: usize, contribution: &dyn Fn() -> Var<'g>| {
            if on_path[id] {
                let c = contribution();
                adjoint[id] = Some(match adjoint[id] {
                    Some(prev) => prev + c,
                    None => c,
                });
            }
        };
        let v = |id: usize| self.var(id);
        use Op::*;
        match op {
            Leaf | StopGradient => {}
            Add(a, b) => {
                send(a, &|| g);
                send(b, &|| g);
            }
            Sub(a, b) => {
                send(a, &|| g);
                send(b, &|| -g);
            }
            Mul(a, b) => {
                send(a, &|| g * v(b));
                send(b, &|| g * v(a));
            }
            Div(a, b) => {
                send(a, &|| g / v(b));
                send(b, &|| -(g * out) / v(b));
            }
            Neg(a) => send(a, &|| -g),
            Scale(a, k) => send(a, &|| g.scale(k)),
            Shift(a) => send(a, &|| g),
            MatMul(a, b) => {
                send(a, &|| g.matmul_nt(v(b)));
                send(b, &|| v(a).matmul_tn(g));
            }
            MatMulNT(a, b) => {
                send(a, &|| g.matmul(v(b)));
                send(b, &|| g.matmul_tn(v(a)));
            }
            MatMulTN(a, b) => {
                send(a, &|| v(b).matmul_nt(g));
                send(b, &|| v(a).matmul(g));
            }
            Transpose(a) => send(a, &|| g.t()),
            Tanh(a) => send(a, &|| g * (-out.square()).shift(1.0)),
            Exp(a) => send(a, &|| g * out),
            Log(a) => send(a, &|| g / v(a)),
            Square(a) => send(a, &|| (g * v(a)).scale(2.0)),
            ReduceTo(a) => {
                let (r, c) = v(a).shape();
                send(a, &|| g.broadcast(r, c));
            }
            Broadcast(a) => {
                let shape = v(a).shape();
                send(a, &|| g.reduce_to(shape));
            }
            Clip(a, lo, hi) => send(a, &|| {
                let mask = self.value_of(a).map(|x| if (lo..=hi).contains(&x) { 1.0 } else { 0.0 });
                g * self.constant(mask)
            }),
            Min(a, b) => {
                let va = self.value_of(a);
                let vb = self.value_of(b);
                let mask = va.zip_map(&vb, |x, y| if x <= y { 1.0 } else { 0.0 });
                send(a, &|| g * self.constant(mask.clone()));
                send(b, &|| g * self.constant(mask.map(|m| 1.0 - m)));
            }
            ConcatCols(a, b) => {
                let ca = v(a).shape().1;
                let cb = v(b).shape().1;
                send(a, &|| g.slice_cols(0, ca));
                send(b, &|| g.slice_cols(ca, cb));
            }
            ConcatRows(a, b) => {
                let ra = v(a).shape().0;
                let rb = v(b).shape().0;
                send(a, &|| g.slice_rows(0, ra));
                send(b, &|| g.slice_rows(ra, rb));
            }
            SliceCols(a, start) => {
                let total = v(a).shape().1;
                send(a, &|| g.pad_cols(start, total));
            }
            SliceRows(a, start) => {
                let total = v(a).shape().0;
                send(a, &|| g.pad_rows(start, total));
            }
            PadCols(a, start) => {
                let len = v(a).shape().1;
                send(a, &|| g.slice_cols(start, len));
            }
            PadRows(a, start) => {
                let len = v(a).shape().0;
                send(a, &|| g.slice_rows(start, len));
            }
            Reshape(a) => {
                let (r, c) = v(a).shape();
                send(a, &|| g.reshape(r, c));
            }
            // d/dx exp(x - stop(x)) = exp(x - stop(x)): the output node itself.
            MagicBox(a) => send(a, &|| g * out),
        }
    }
}

impl<'g> Var<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn id(&self) -> usize {
        self.id
    }

    /// Forward value (shared, never mutated).
    pub fn value(&self) -> Rc<Tensor> {
        self.graph.value_of(self.id)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.graph.nodes.borrow()[self.id].value.shape()
    }

    /// Value of a scalar node.
    pub fn item(&self) -> f64 {
        self.value().item()
    }

    fn same_graph(&self, other: Var<'g>) {
        assert!(core::ptr::eq(self.graph, other.graph), "operands belong to different graphs");
    }

    fn unary(self, value: Tensor, op: Op) -> Var<'g> {
        self.graph.push(value, op)
    }

    fn elementwise(self, other: Var<'g>, name: &str, f: impl Fn(&Tensor, &Tensor) -> Tensor, op: Op) -> Var<'g> {
        self.same_graph(other);
        let (a, b) = (self.value(), other.value());
        assert_eq!(a.shape(), b.shape(), "{name}: shape mismatch {:?} vs {:?}", a.shape(), b.shape());
        self.graph.push(f(&a, &b), op)
    }

    pub fn matmul(self, other: Var<'g>) -> Var<'g> {
        self.same_graph(other);
        let value = self.value().matmul(&other.value());
        self.graph.push(value, Op::MatMul(self.id, other.id))
    }

    /// `self * other^T`.
    pub fn matmul_nt(self, other: Var<'g>) -> Var<'g> {
        self.same_graph(other);
        let value = self.value().matmul_nt(&other.value());
        self.graph.push(value, Op::MatMulNT(self.id, other.id))
    }

    /// `self^T * other`.
    pub fn matmul_tn(self, other: Var<'g>) -> Var<'g> {
        self.same_graph(other);
        let value = self.value().matmul_tn(&other.value());
        self.graph.push(value, Op::MatMulTN(self.id, other.id))
    }

    pub fn t(self) -> Var<'g> {
        self.unary(self.value().transpose(), Op::Transpose(self.id))
    }

    pub fn tanh(self) -> Var<'g> {
        self.unary(self.value().tanh(), Op::Tanh(self.id))
    }

    pub fn exp(self) -> Var<'g> {
        self.unary(self.value().exp(), Op::Exp(self.id))
    }

    pub fn log(self) -> Var<'g> {
        self.unary(self.value().ln(), Op::Log(self.id))
    }

    pub fn square(self) -> Var<'g> {
        self.unary(self.value().map(|x| x * x), Op::Square(self.id))
    }

    pub fn scale(self, k: f64) -> Var<'g> {
        self.unary(self.value().scale(k), Op::Scale(self.id, k))
    }

    /// Adds the constant `k` to every element.
    pub fn shift(self, k: f64) -> Var<'g> {
        self.unary(self.value().map(|x| x + k), Op::Shift(self.id))
    }

    /// Sum of all elements, `1 x 1`.
    pub fn sum(self) -> Var<'g> {
        self.reduce_to((1, 1))
    }

    /// Column totals, `r x c -> 1 x c`.
    pub fn sum_rows(self) -> Var<'g> {
        let c = self.shape().1;
        self.reduce_to((1, c))
    }

    /// Row totals, `r x c -> r x 1`.
    pub fn sum_cols(self) -> Var<'g> {
        let r = self.shape().0;
        self.reduce_to((r, 1))
    }

    pub fn mean(self) -> Var<'g> {
        let n = self.value().len();
        assert!(n > 0, "mean of an empty tensor");
        self.sum().scale(1.0 / n as f64)
    }

    pub fn reduce_to(self, shape: (usize, usize)) -> Var<'g> {
        if shape == self.shape() {
            return self;
        }
        self.unary(self.value().reduce_to(shape), Op::ReduceTo(self.id))
    }

    pub fn broadcast(self, rows: usize, cols: usize) -> Var<'g> {
        if (rows, cols) == self.shape() {
            return self;
        }
        assert!(broadcast_compatible(self.shape(), (rows, cols)), "cannot broadcast {:?} to {rows}x{cols}", self.shape());
        self.unary(self.value().broadcast(rows, cols), Op::Broadcast(self.id))
    }

    /// Elementwise clamp into `[lo, hi]`; zero gradient outside.
    pub fn clip(self, lo: f64, hi: f64) -> Var<'g> {
        assert!(lo <= hi, "clip bounds reversed");
        self.unary(self.value().map(|x| x.clamp(lo, hi)), Op::Clip(self.id, lo, hi))
    }

    /// Elementwise minimum; ties route the gradient to `self`.
    pub fn minimum(self, other: Var<'g>) -> Var<'g> {
        self.elementwise(other, "minimum", |a, b| a.zip_map(b, f64::min), Op::Min(self.id, other.id))
    }

    pub fn concat_cols(self, other: Var<'g>) -> Var<'g> {
        self.same_graph(other);
        let value = self.value().concat_cols(&other.value());
        self.graph.push(value, Op::ConcatCols(self.id, other.id))
    }

    pub fn concat_rows(self, other: Var<'g>) -> Var<'g> {
        self.same_graph(other);
        let value = self.value().concat_rows(&other.value());
        self.graph.push(value, Op::ConcatRows(self.id, other.id))
    }

    pub fn slice_cols(self, start: usize, len: usize) -> Var<'g> {
        self.unary(self.value().slice_cols(start, len), Op::SliceCols(self.id, start))
    }

    pub fn slice_rows(self, start: usize, len: usize) -> Var<'g> {
        self.unary(self.value().slice_rows(start, len), Op::SliceRows(self.id, start))
    }

    pub fn pad_cols(self, start: usize, total: usize) -> Var<'g> {
        self.unary(self.value().pad_cols(start, total), Op::PadCols(self.id, start))
    }

    pub fn pad_rows(self, start: usize, total: usize) -> Var<'g> {
        self.unary(self.value().pad_rows(start, total), Op::PadRows(self.id, start))
    }

    pub fn reshape(self, rows: usize, cols: usize) -> Var<'g> {
        if (rows, cols) == self.shape() {
            return self;
        }
        self.unary(self.value().reshape(rows, cols), Op::Reshape(self.id))
    }

    /// Same values; gradients stop here.
    pub fn stop_gradient(self) -> Var<'g> {
        self.unary((*self.value()).clone(), Op::StopGradient)
    }

    /// `exp(x - stop_gradient(x))` elementwise: forward value exactly 1,
    /// derivative equal to itself.
    pub fn magic_box(self) -> Var<'g> {
        let (r, c) = self.shape();
        self.unary(Tensor::ones(r, c), Op::MagicBox(self.id))
    }
}

impl<'g> ops::Add for Var<'g> {
    type Output = Var<'g>;
    fn add(self, rhs: Var<'g>) -> Var<'g> {
        self.elementwise(rhs, "add", Tensor::add, Op::Add(self.id, rhs.id))
    }
}

impl<'g> ops::Sub for Var<'g> {
    type Output = Var<'g>;
    fn sub(self, rhs: Var<'g>) -> Var<'g> {
        self.elementwise(rhs, "sub", Tensor::sub, Op::Sub(self.id, rhs.id))
    }
}

impl<'g> ops::Mul for Var<'g> {
    type Output = Var<'g>;
    fn mul(self, rhs: Var<'g>) -> Var<'g> {
        self.elementwise(rhs, "mul", Tensor::mul, Op::Mul(self.id, rhs.id))
    }
}

impl<'g> ops::Div for Var<'g> {
    type Output = Var<'g>;
    fn div(self, rhs: Var<'g>) -> Var<'g> {
        self.elementwise(rhs, "div", |a, b| a.zip_map(b, |x, y| x / y), Op::Div(self.id, rhs.id))
    }
}

impl<'g> ops::Neg for Var<'g> {
    type Output = Var<'g>;
    fn neg(self) -> Var<'g> {
        self.unary(self.value().map(|x| -x), Op::Neg(self.id))
    }
}
