//! Reverse-mode automatic differentiation over small dense matrices.
//!
//! Every forward pass builds a fresh tape; `backward` walks it once in
//! reverse and accumulates gradients for all leaves. Matrices are `f64`
//! and row-major; vectors are 1xN matrices.

use ndarray::Array2;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub usize);

enum Op {
    Leaf,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    MatMul(usize, usize),
    /// Broadcast-add a 1xK row to every row of an NxK matrix.
    AddRow(usize, usize),
    Scale(usize, f64),
    Gelu(usize),
    Sigmoid(usize),
    Tanh(usize),
    /// sqrt(x + eps), elementwise; the backward pass only needs the output.
    SqrtEps(usize),
    SoftmaxRows(usize),
    SumAll(usize),
    ConcatCols(Vec<usize>),
    ConcatRows(Vec<usize>),
    SliceCols(usize, usize, usize),
    Row(usize, usize),
    /// 1x1 scalar node times a matrix node.
    ScalarMul(usize, usize),
    Transpose(usize),
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

/// Gradient tape; nodes are appended in topological order.
pub struct Tape {
    nodes: Vec<Node>,
}

pub fn gelu_scalar(x: f64) -> f64 {
    // tanh approximation of GELU
    let c = (2.0 / std::f64::consts::PI).sqrt();
    0.5 * x * (1.0 + (c * (x + 0.044715 * x * x * x)).tanh())
}

fn gelu_grad_scalar(x: f64) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    let u = c * (x + 0.044715 * x * x * x);
    let t = u.tanh();
    let du = c * (1.0 + 3.0 * 0.044715 * x * x);
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        debug_assert_eq!(self.nodes[v.0].value.dim(), (1, 1));
        self.nodes[v.0].value[[0, 0]]
    }

    /// New leaf node (input or parameter).
    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> Var {
        self.leaf(Array2::zeros((rows, cols)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = &self.nodes[a.0].value + &self.nodes[b.0].value;
        self.push(v, Op::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = &self.nodes[a.0].value - &self.nodes[b.0].value;
        self.push(v, Op::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = &self.nodes[a.0].value * &self.nodes[b.0].value;
        self.push(v, Op::Mul(a.0, b.0))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.nodes[a.0].value.dot(&self.nodes[b.0].value);
        self.push(v, Op::MatMul(a.0, b.0))
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let r = &self.nodes[row.0].value;
        debug_assert_eq!(r.nrows(), 1);
        let v = &self.nodes[a.0].value + &r.row(0);
        self.push(v, Op::AddRow(a.0, row.0))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = self.nodes[a.0].value.mapv(|x| x * c);
        self.push(v, Op::Scale(a.0, c))
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let v = self.nodes[a.0].value.mapv(gelu_scalar);
        self.push(v, Op::Gelu(a.0))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.nodes[a.0].value.mapv(|x| 1.0 / (1.0 + (-x).exp()));
        self.push(v, Op::Sigmoid(a.0))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let v = self.nodes[a.0].value.mapv(f64::tanh);
        self.push(v, Op::Tanh(a.0))
    }

    pub fn sqrt_eps(&mut self, a: Var, eps: f64) -> Var {
        let v = self.nodes[a.0].value.mapv(|x| (x + eps).sqrt());
        self.push(v, Op::SqrtEps(a.0))
    }

    /// Numerically stable softmax applied independently to each row.
    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let x = &self.nodes[a.0].value;
        let mut v = x.clone();
        for mut row in v.rows_mut() {
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut s = 0.0;
            for e in row.iter_mut() {
                *e = (*e - m).exp();
                s += *e;
            }
            for e in row.iter_mut() {
                *e /= s;
            }
        }
        self.push(v, Op::SoftmaxRows(a.0))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s = self.nodes[a.0].value.sum();
        self.push(Array2::from_elem((1, 1), s), Op::SumAll(a.0))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.nodes[parts[0].0].value.nrows();
        let total: usize = parts.iter().map(|p| self.nodes[p.0].value.ncols()).sum();
        let mut v = Array2::zeros((rows, total));
        let mut off = 0;
        for p in parts {
            let pv = &self.nodes[p.0].value;
            v.slice_mut(ndarray::s![.., off..off + pv.ncols()]).assign(pv);
            off += pv.ncols();
        }
        self.push(v, Op::ConcatCols(parts.iter().map(|p| p.0).collect()))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let cols = self.nodes[parts[0].0].value.ncols();
        let total: usize = parts.iter().map(|p| self.nodes[p.0].value.nrows()).sum();
        let mut v = Array2::zeros((total, cols));
        let mut off = 0;
        for p in parts {
            let pv = &self.nodes[p.0].value;
            v.slice_mut(ndarray::s![off..off + pv.nrows(), ..]).assign(pv);
            off += pv.nrows();
        }
        self.push(v, Op::ConcatRows(parts.iter().map(|p| p.0).collect()))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Var {
        let v = self.nodes[a.0]
            .value
            .slice(ndarray::s![.., start..start + len])
            .to_owned();
        self.push(v, Op::SliceCols(a.0, start, len))
    }

    pub fn row(&mut self, a: Var, idx: usize) -> Var {
        let v = self.nodes[a.0]
            .value
            .row(idx)
            .to_owned()
            .insert_axis(ndarray::Axis(0));
        self.push(v, Op::Row(a.0, idx))
    }

    pub fn scalar_mul(&mut self, scalar: Var, m: Var) -> Var {
        debug_assert_eq!(self.nodes[scalar.0].value.dim(), (1, 1));
        let s = self.nodes[scalar.0].value[[0, 0]];
        let v = self.nodes[m.0].value.mapv(|x| x * s);
        self.push(v, Op::ScalarMul(scalar.0, m.0))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.nodes[a.0].value.t().to_owned();
        self.push(v, Op::Transpose(a.0))
    }

    /// One minus the input, elementwise.
    pub fn one_minus(&mut self, a: Var) -> Var {
        let (r, c) = self.nodes[a.0].value.dim();
        let ones = self.leaf(Array2::from_elem((r, c), 1.0));
        self.sub(ones, a)
    }

    /// Mean over all entries of a 1xN (or NxM) node, as a 1x1 scalar.
    pub fn mean_all(&mut self, a: Var) -> Var {
        let n = self.nodes[a.0].value.len() as f64;
        let s = self.sum_all(a);
        self.scale(s, 1.0 / n)
    }

    /// Gradients of `root` (must be 1x1) w.r.t. every node. Returns a dense
    /// gradient vector aligned with node indices; untouched nodes are None.
    pub fn backward(&self, root: Var) -> Vec<Option<Array2<f64>>> {
        let n = self.nodes.len();
        let mut grads: Vec<Option<Array2<f64>>> = (0..n).map(|_| None).collect();
        grads[root.0] = Some(Array2::from_elem((1, 1), 1.0));

        fn acc(grads: &mut [Option<Array2<f64>>], idx: usize, g: Array2<f64>) {
            match &mut grads[idx] {
                Some(existing) => *existing += &g,
                slot @ None => *slot = Some(g),
            }
        }

        for i in (0..n).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            match &self.nodes[i].op {
                Op::Leaf => {
                    grads[i] = Some(g);
                    continue;
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::Sub(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, -g);
                }
                Op::Mul(a, b) => {
                    acc(&mut grads, *a, &g * &self.nodes[*b].value);
                    acc(&mut grads, *b, &g * &self.nodes[*a].value);
                }
                Op::MatMul(a, b) => {
                    acc(&mut grads, *a, g.dot(&self.nodes[*b].value.t()));
                    acc(&mut grads, *b, self.nodes[*a].value.t().dot(&g));
                }
                Op::AddRow(a, row) => {
                    let col_sum = g.sum_axis(ndarray::Axis(0)).insert_axis(ndarray::Axis(0));
                    acc(&mut grads, *a, g);
                    acc(&mut grads, *row, col_sum);
                }
                Op::Scale(a, c) => acc(&mut grads, *a, g.mapv(|x| x * c)),
                Op::Gelu(a) => {
                    let dx = self.nodes[*a].value.mapv(gelu_grad_scalar);
                    acc(&mut grads, *a, &g * &dx);
                }
                Op::Sigmoid(a) => {
                    let y = &self.nodes[i].value;
                    acc(&mut grads, *a, &g * &(y * &y.mapv(|v| 1.0 - v)));
                }
                Op::Tanh(a) => {
                    let y = &self.nodes[i].value;
                    acc(&mut grads, *a, &g * &y.mapv(|v| 1.0 - v * v));
                }
                Op::SqrtEps(a) => {
                    let y = &self.nodes[i].value;
                    acc(&mut grads, *a, &g * &y.mapv(|v| 0.5 / v));
                }
                Op::SoftmaxRows(a) => {
                    let y = &self.nodes[i].value;
                    let mut dx = Array2::zeros(y.dim());
                    for r in 0..y.nrows() {
                        let dot: f64 = (0..y.ncols()).map(|c| g[[r, c]] * y[[r, c]]).sum();
                        for c in 0..y.ncols() {
                            dx[[r, c]] = y[[r, c]] * (g[[r, c]] - dot);
                        }
                    }
                    acc(&mut grads, *a, dx);
                }
                Op::SumAll(a) => {
                    let dim = self.nodes[*a].value.dim();
                    acc(&mut grads, *a, Array2::from_elem(dim, g[[0, 0]]));
                }
                Op::ConcatCols(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let w = self.nodes[*p].value.ncols();
                        let gp = g.slice(ndarray::s![.., off..off + w]).to_owned();
                        acc(&mut grads, *p, gp);
                        off += w;
                    }
                }
                Op::ConcatRows(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let h = self.nodes[*p].value.nrows();
                        let gp = g.slice(ndarray::s![off..off + h, ..]).to_owned();
                        acc(&mut grads, *p, gp);
                        off += h;
                    }
                }
                Op::SliceCols(a, start, len) => {
                    let mut ga = Array2::zeros(self.nodes[*a].value.dim());
                    ga.slice_mut(ndarray::s![.., *start..*start + *len]).assign(&g);
                    acc(&mut grads, *a, ga);
                }
                Op::Row(a, idx) => {
                    let mut ga = Array2::zeros(self.nodes[*a].value.dim());
                    ga.row_mut(*idx).assign(&g.row(0));
                    acc(&mut grads, *a, ga);
                }
                Op::ScalarMul(s, m) => {
                    let ds = (&g * &self.nodes[*m].value).sum();
                    let sv = self.nodes[*s].value[[0, 0]];
                    acc(&mut grads, *s, Array2::from_elem((1, 1), ds));
                    acc(&mut grads, *m, g.mapv(|x| x * sv));
                }
                Op::Transpose(a) => acc(&mut grads, *a, g.t().to_owned()),
            }
        }
        grads
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}
