//! Minimal reverse-mode differentiation over dense row-major tensors.
//!
//! Nodes are appended in topological order and evaluated eagerly, so a
//! single reverse sweep yields exact gradients. The op set is just what
//! the loss graphs need: matrix products, elementwise arithmetic, the
//! guarded angular-error primitives, and a 3x3 inverse for the
//! least-squares solve.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    Transpose(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    /// (m x n, n x 1): scale column j of the matrix by vector entry j.
    RowScale(usize, usize),
    ScaleConst(usize, f64),
    /// Tensor times a 1x1 scalar variable.
    ScaleVar(usize, usize),
    Recip(usize),
    Sqrt(usize),
    Abs(usize),
    /// acos(clamp(x, -1, 1)) with a guarded derivative near the poles.
    AcosClamped(usize),
    ClampMin(usize, f64),
    /// m x n -> m x 1 row sums.
    RowSum(usize),
    /// -> 1 x 1 total.
    Sum(usize),
    /// Extract one element -> 1 x 1.
    Index(usize, usize),
    /// 3 x 3 inverse via the adjugate.
    Inverse3(usize),
}

struct Node {
    op: Op,
    rows: usize,
    cols: usize,
    value: Vec<f64>,
}

/// Derivative guard for acos near |x| = 1: the true derivative diverges,
/// but at a collinear optimum the upstream factor vanishes, so clamping
/// the pole to zero keeps gradients finite and exact at the optimum.
const ACOS_POLE: f64 = 1e-9;

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        (self.nodes[v.0].rows, self.nodes[v.0].cols)
    }

    fn push(&mut self, op: Op, rows: usize, cols: usize, value: Vec<f64>) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node {
            op,
            rows,
            cols,
            value,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, rows: usize, cols: usize, value: Vec<f64>) -> Result<Var> {
        if value.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "leaf {rows}x{cols} needs {} values, got {}",
                rows * cols,
                value.len()
            )));
        }
        Ok(self.push(Op::Leaf, rows, cols, value))
    }

    pub fn scalar_leaf(&mut self, value: f64) -> Var {
        self.push(Op::Leaf, 1, 1, vec![value])
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.shape(a);
        let (k2, n) = self.shape(b);
        if k != k2 {
            return Err(Error::DimensionMismatch(format!(
                "matmul {m}x{k} * {k2}x{n}"
            )));
        }
        let mut out = vec![0.0; m * n];
        let av = &self.nodes[a.0].value;
        let bv = &self.nodes[b.0].value;
        for i in 0..m {
            for l in 0..k {
                let x = av[i * k + l];
                if x == 0.0 {
                    continue;
                }
                let brow = &bv[l * n..(l + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, bb) in orow.iter_mut().zip(brow) {
                    *o += x * bb;
                }
            }
        }
        Ok(self.push(Op::MatMul(a.0, b.0), m, n, out))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let (m, n) = self.shape(a);
        let av = &self.nodes[a.0].value;
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = av[i * n + j];
            }
        }
        self.push(Op::Transpose(a.0), n, m, out)
    }

    fn elementwise(
        &mut self,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: impl Fn(usize, usize) -> Op,
    ) -> Result<Var> {
        let (m, n) = self.shape(a);
        if self.shape(b) != (m, n) {
            return Err(Error::DimensionMismatch(format!(
                "elementwise {m}x{n} vs {:?}",
                self.shape(b)
            )));
        }
        let value = self.nodes[a.0]
            .value
            .iter()
            .zip(&self.nodes[b.0].value)
            .map(|(x, y)| f(*x, *y))
            .collect();
        Ok(self.push(op(a.0, b.0), m, n, value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, |x, y| x + y, Op::Add)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, |x, y| x - y, Op::Sub)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, |x, y| x * y, Op::Mul)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, |x, y| x / y, Op::Div)
    }

    pub fn row_scale(&mut self, a: Var, v: Var) -> Result<Var> {
        let (m, n) = self.shape(a);
        if self.shape(v) != (n, 1) {
            return Err(Error::DimensionMismatch(format!(
                "row_scale {m}x{n} by {:?}",
                self.shape(v)
            )));
        }
        let av = &self.nodes[a.0].value;
        let vv = &self.nodes[v.0].value;
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[i * n + j] = av[i * n + j] * vv[j];
            }
        }
        Ok(self.push(Op::RowScale(a.0, v.0), m, n, out))
    }

    pub fn scale_const(&mut self, a: Var, c: f64) -> Var {
        let (m, n) = self.shape(a);
        let value = self.nodes[a.0].value.iter().map(|x| x * c).collect();
        self.push(Op::ScaleConst(a.0, c), m, n, value)
    }

    pub fn scale_var(&mut self, a: Var, s: Var) -> Result<Var> {
        if self.shape(s) != (1, 1) {
            return Err(Error::DimensionMismatch(format!(
                "scale_var expects a scalar, got {:?}",
                self.shape(s)
            )));
        }
        let (m, n) = self.shape(a);
        let sv = self.nodes[s.0].value[0];
        let value = self.nodes[a.0].value.iter().map(|x| x * sv).collect();
        Ok(self.push(Op::ScaleVar(a.0, s.0), m, n, value))
    }

    fn unary(&mut self, a: Var, f: impl Fn(f64) -> f64, op: impl Fn(usize) -> Op) -> Var {
        let (m, n) = self.shape(a);
        let value = self.nodes[a.0].value.iter().map(|x| f(*x)).collect();
        self.push(op(a.0), m, n, value)
    }

    pub fn recip(&mut self, a: Var) -> Var {
        self.unary(a, |x| 1.0 / x, Op::Recip)
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        self.unary(a, f64::sqrt, Op::Sqrt)
    }

    pub fn abs(&mut self, a: Var) -> Var {
        self.unary(a, f64::abs, Op::Abs)
    }

    pub fn acos_clamped(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.clamp(-1.0, 1.0).acos(), Op::AcosClamped)
    }

    pub fn clamp_min(&mut self, a: Var, floor: f64) -> Var {
        self.unary(a, |x| x.max(floor), move |i| Op::ClampMin(i, floor))
    }

    pub fn row_sum(&mut self, a: Var) -> Var {
        let (m, n) = self.shape(a);
        let av = &self.nodes[a.0].value;
        let value = (0..m)
            .map(|i| av[i * n..(i + 1) * n].iter().sum())
            .collect();
        self.push(Op::RowSum(a.0), m, 1, value)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let total = self.nodes[a.0].value.iter().sum();
        self.push(Op::Sum(a.0), 1, 1, vec![total])
    }

    pub fn index(&mut self, a: Var, k: usize) -> Result<Var> {
        if k >= self.nodes[a.0].value.len() {
            return Err(Error::DimensionMismatch(format!(
                "index {k} out of range for {:?}",
                self.shape(a)
            )));
        }
        let v = self.nodes[a.0].value[k];
        Ok(self.push(Op::Index(a.0, k), 1, 1, vec![v]))
    }

    pub fn inverse3(&mut self, a: Var) -> Result<Var> {
        if self.shape(a) != (3, 3) {
            return Err(Error::DimensionMismatch(format!(
                "inverse3 expects 3x3, got {:?}",
                self.shape(a)
            )));
        }
        let m = crate::math::Mat3::from_row_major(&self.nodes[a.0].value)?;
        let inv = m.inverse()?;
        Ok(self.push(Op::Inverse3(a.0), 3, 3, inv.to_row_major().to_vec()))
    }

    /// Reverse sweep from a scalar output. Callers read the gradients of
    /// their parameter leaves out of the returned store.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        if self.shape(output) != (1, 1) {
            return Err(Error::DimensionMismatch(
                "backward needs a scalar output".into(),
            ));
        }
        let mut grads: Vec<Vec<f64>> = self
            .nodes
            .iter()
            .map(|n| vec![0.0; n.value.len()])
            .collect();
        grads[output.0][0] = 1.0;

        for idx in (0..=output.0).rev() {
            let g = std::mem::take(&mut grads[idx]);
            if g.iter().all(|v| *v == 0.0) {
                grads[idx] = g;
                continue;
            }
            let node = &self.nodes[idx];
            match node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (m, k) = (self.nodes[a].rows, self.nodes[a].cols);
                    let n = self.nodes[b].cols;
                    let av = &self.nodes[a].value;
                    let bv = &self.nodes[b].value;
                    // dA += G * B^t ; dB += A^t * G
                    for i in 0..m {
                        for l in 0..k {
                            let mut acc = 0.0;
                            for j in 0..n {
                                acc += g[i * n + j] * bv[l * n + j];
                            }
                            grads[a][i * k + l] += acc;
                        }
                    }
                    for l in 0..k {
                        for j in 0..n {
                            let mut acc = 0.0;
                            for i in 0..m {
                                acc += av[i * k + l] * g[i * n + j];
                            }
                            grads[b][l * n + j] += acc;
                        }
                    }
                }
                Op::Transpose(a) => {
                    let (m, n) = (self.nodes[a].rows, self.nodes[a].cols);
                    for i in 0..m {
                        for j in 0..n {
                            grads[a][i * n + j] += g[j * m + i];
                        }
                    }
                }
                Op::Add(a, b) => {
                    for (ga, gi) in grads[a].iter_mut().zip(&g) {
                        *ga += gi;
                    }
                    for (gb, gi) in grads[b].iter_mut().zip(&g) {
                        *gb += gi;
                    }
                }
                Op::Sub(a, b) => {
                    for (ga, gi) in grads[a].iter_mut().zip(&g) {
                        *ga += gi;
                    }
                    for (gb, gi) in grads[b].iter_mut().zip(&g) {
                        *gb -= gi;
                    }
                }
                Op::Mul(a, b) => {
                    for i in 0..g.len() {
                        grads[a][i] += g[i] * self.nodes[b].value[i];
                        grads[b][i] += g[i] * self.nodes[a].value[i];
                    }
                }
                Op::Div(a, b) => {
                    for i in 0..g.len() {
                        let bv = self.nodes[b].value[i];
                        grads[a][i] += g[i] / bv;
                        grads[b][i] -= g[i] * self.nodes[a].value[i] / (bv * bv);
                    }
                }
                Op::RowScale(a, v) => {
                    let (m, n) = (self.nodes[a].rows, self.nodes[a].cols);
                    for i in 0..m {
                        for j in 0..n {
                            let gi = g[i * n + j];
                            grads[a][i * n + j] += gi * self.nodes[v].value[j];
                            grads[v][j] += gi * self.nodes[a].value[i * n + j];
                        }
                    }
                }
                Op::ScaleConst(a, c) => {
                    for (ga, gi) in grads[a].iter_mut().zip(&g) {
                        *ga += gi * c;
                    }
                }
                Op::ScaleVar(a, s) => {
                    let sv = self.nodes[s].value[0];
                    let mut gs = 0.0;
                    for i in 0..g.len() {
                        grads[a][i] += g[i] * sv;
                        gs += g[i] * self.nodes[a].value[i];
                    }
                    grads[s][0] += gs;
                }
                Op::Recip(a) => {
                    for i in 0..g.len() {
                        let y = node.value[i];
                        grads[a][i] -= g[i] * y * y;
                    }
                }
                Op::Sqrt(a) => {
                    for i in 0..g.len() {
                        grads[a][i] += g[i] / (2.0 * node.value[i]);
                    }
                }
                Op::Abs(a) => {
                    for i in 0..g.len() {
                        let x = self.nodes[a].value[i];
                        grads[a][i] += g[i] * if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 };
                    }
                }
                Op::AcosClamped(a) => {
                    for i in 0..g.len() {
                        let x = self.nodes[a].value[i];
                        if x.abs() < 1.0 - ACOS_POLE {
                            grads[a][i] -= g[i] / (1.0 - x * x).sqrt();
                        }
                    }
                }
                Op::ClampMin(a, floor) => {
                    for i in 0..g.len() {
                        if self.nodes[a].value[i] >= floor {
                            grads[a][i] += g[i];
                        }
                    }
                }
                Op::RowSum(a) => {
                    let (m, n) = (self.nodes[a].rows, self.nodes[a].cols);
                    for i in 0..m {
                        for j in 0..n {
                            grads[a][i * n + j] += g[i];
                        }
                    }
                }
                Op::Sum(a) => {
                    for ga in grads[a].iter_mut() {
                        *ga += g[0];
                    }
                }
                Op::Index(a, k) => {
                    grads[a][k] += g[0];
                }
                Op::Inverse3(a) => {
                    // d(A^-1) rule: dA = -Y^t G Y^t with Y = A^-1.
                    let y = &node.value;
                    let mut yt_g = [0.0; 9];
                    for i in 0..3 {
                        for j in 0..3 {
                            let mut acc = 0.0;
                            for l in 0..3 {
                                acc += y[l * 3 + i] * g[l * 3 + j];
                            }
                            yt_g[i * 3 + j] = acc;
                        }
                    }
                    for i in 0..3 {
                        for j in 0..3 {
                            let mut acc = 0.0;
                            for l in 0..3 {
                                acc += yt_g[i * 3 + l] * y[j * 3 + l];
                            }
                            grads[a][i * 3 + j] -= acc;
                        }
                    }
                }
            }
            grads[idx] = g;
        }
        Ok(Gradients { grads })
    }
}

/// Per-node gradient buffers from a [`Tape::backward`] sweep.
pub struct Gradients {
    grads: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> &[f64] {
        &self.grads[v.0]
    }
}
