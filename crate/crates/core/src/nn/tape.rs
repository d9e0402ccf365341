//! Reverse-mode automatic differentiation on a flat tape.
//!
//! Each operation appends a node holding its value and a backward closure
//! that scatters the output gradient to its parents. `backward` walks the
//! tape once in reverse. Values are plain tensors, so the same code path
//! serves training (f32) and the high-precision identity/gradient tests
//! (f64).

use super::tensor::{Real, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

/// Softmax visibility: every column, or a causal window over token columns
/// after `prefix` always-visible prefix columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttnMask {
    Full,
    Causal { prefix: usize },
}

type BackFn<T> = Box<dyn Fn(&Tensor<T>, &[Tensor<T>], &mut [Option<Tensor<T>>])>;

pub struct Tape<T: Real> {
    values: Vec<Tensor<T>>,
    backs: Vec<Option<BackFn<T>>>,
}

pub struct Grads<T> {
    inner: Vec<Option<Tensor<T>>>,
}

impl<T: Real> Grads<T> {
    pub fn get(&self, v: Var) -> Option<&Tensor<T>> {
        self.inner[v.0].as_ref()
    }

    /// Gradient of a parameter, densified to its shape when absent.
    pub fn dense(&self, v: Var, shape: (usize, usize)) -> Tensor<T> {
        match &self.inner[v.0] {
            Some(t) => t.clone(),
            None => Tensor::zeros(shape.0, shape.1),
        }
    }
}

fn accumulate<T: Real>(slot: &mut Option<Tensor<T>>, grad: Tensor<T>) {
    match slot {
        None => *slot = Some(grad),
        Some(t) => t.add_assign(&grad),
    }
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Tape<T> {
        Tape {
            values: Vec::new(),
            backs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.values[v.0]
    }

    fn push(&mut self, value: Tensor<T>, back: Option<BackFn<T>>) -> Var {
        self.values.push(value);
        self.backs.push(back);
        Var(self.values.len() - 1)
    }

    /// Register a leaf (input or parameter).
    pub fn input(&mut self, value: Tensor<T>) -> Var {
        self.push(value, None)
    }

    /// Reverse pass from a scalar root; returns per-node gradients.
    pub fn backward(&self, root: Var) -> Grads<T> {
        assert_eq!(self.values[root.0].shape(), (1, 1), "root must be scalar");
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; self.values.len()];
        grads[root.0] = Some(Tensor::scalar(T::ONE));
        for i in (0..=root.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if let Some(back) = &self.backs[i] {
                back(&g, &self.values, &mut grads);
            }
            grads[i] = Some(g);
        }
        Grads { inner: grads }
    }

    // ---- arithmetic ----

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.value(a).shape(), self.value(b).shape());
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                accumulate(&mut grads[a.0], g.clone());
                accumulate(&mut grads[b.0], g.clone());
            })),
        )
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.value(a).shape(), self.value(b).shape());
        let bv = self.value(b).map(|x| -x);
        let mut out = self.value(a).clone();
        out.add_assign(&bv);
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                accumulate(&mut grads[a.0], g.clone());
                accumulate(&mut grads[b.0], g.map(|x| -x));
            })),
        )
    }

    pub fn scale(&mut self, a: Var, c: T) -> Var {
        let out = self.value(a).map(|x| x * c);
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                accumulate(&mut grads[a.0], g.map(|x| x * c));
            })),
        )
    }

    pub fn add_scalar(&mut self, a: Var, c: T) -> Var {
        let out = self.value(a).map(|x| x + c);
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                accumulate(&mut grads[a.0], g.clone());
            })),
        )
    }

    pub fn mul_elem(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.value(a).shape(), self.value(b).shape());
        let (av, bv) = (self.value(a), self.value(b));
        let data = av
            .data()
            .iter()
            .zip(bv.data())
            .map(|(&x, &y)| x * y)
            .collect();
        let out = Tensor::from_vec(av.rows(), av.cols(), data);
        self.push(
            out,
            Some(Box::new(move |g, values, grads| {
                let (av, bv) = (&values[a.0], &values[b.0]);
                let ga = Tensor::from_vec(
                    g.rows(),
                    g.cols(),
                    g.data().iter().zip(bv.data()).map(|(&x, &y)| x * y).collect(),
                );
                let gb = Tensor::from_vec(
                    g.rows(),
                    g.cols(),
                    g.data().iter().zip(av.data()).map(|(&x, &y)| x * y).collect(),
                );
                accumulate(&mut grads[a.0], ga);
                accumulate(&mut grads[b.0], gb);
            })),
        )
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul(self.value(b));
        self.push(
            out,
            Some(Box::new(move |g, values, grads| {
                let ga = g.matmul_nt(&values[b.0]); // dA = dC @ Bᵀ
                let gb = values[a.0].matmul_tn(g); // dB = Aᵀ @ dC
                accumulate(&mut grads[a.0], ga);
                accumulate(&mut grads[b.0], gb);
            })),
        )
    }

    /// `a @ bᵀ` — the attention-score shape.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).matmul_nt(self.value(b));
        self.push(
            out,
            Some(Box::new(move |g, values, grads| {
                let ga = g.matmul(&values[b.0]); // dA = dC @ B
                let gb = g.matmul_tn(&values[a.0]); // dB = dCᵀ @ A
                accumulate(&mut grads[a.0], ga);
                accumulate(&mut grads[b.0], gb);
            })),
        )
    }

    /// Broadcast-add a 1×C bias row to every row of `x`.
    pub fn add_bias_row(&mut self, x: Var, bias: Var) -> Var {
        let (xv, bv) = (self.value(x), self.value(bias));
        assert_eq!(bv.rows(), 1);
        assert_eq!(xv.cols(), bv.cols());
        let mut out = xv.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            for (o, &b) in row.iter_mut().zip(bv.data()) {
                *o = *o + b;
            }
        }
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                accumulate(&mut grads[x.0], g.clone());
                let mut gb = Tensor::zeros(1, g.cols());
                for r in 0..g.rows() {
                    for (s, &v) in gb.data_mut().iter_mut().zip(g.row(r)) {
                        *s = *s + v;
                    }
                }
                accumulate(&mut grads[bias.0], gb);
            })),
        )
    }

    pub fn concat_rows(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).concat_rows(self.value(b));
        let a_rows = self.value(a).rows();
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                let cols = g.cols();
                let ga = Tensor::from_vec(a_rows, cols, g.data()[..a_rows * cols].to_vec());
                let gb = Tensor::from_vec(
                    g.rows() - a_rows,
                    cols,
                    g.data()[a_rows * cols..].to_vec(),
                );
                accumulate(&mut grads[a.0], ga);
                accumulate(&mut grads[b.0], gb);
            })),
        )
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Var {
        let out = self.value(x).slice_cols(start, len);
        let full_cols = self.value(x).cols();
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                let mut gx = Tensor::zeros(g.rows(), full_cols);
                for r in 0..g.rows() {
                    gx.row_mut(r)[start..start + len].copy_from_slice(g.row(r));
                }
                accumulate(&mut grads[x.0], gx);
            })),
        )
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let rows = self.value(parts[0]).rows();
        let widths: Vec<usize> = parts.iter().map(|&p| self.value(p).cols()).collect();
        let total: usize = widths.iter().sum();
        let mut out = Tensor::zeros(rows, total);
        let mut off = 0;
        for (&p, &w) in parts.iter().zip(&widths) {
            let pv = self.value(p);
            assert_eq!(pv.rows(), rows);
            for r in 0..rows {
                out.row_mut(r)[off..off + w].copy_from_slice(pv.row(r));
            }
            off += w;
        }
        let parts: Vec<Var> = parts.to_vec();
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                let mut off = 0;
                for (&p, &w) in parts.iter().zip(&widths) {
                    let mut gp = Tensor::zeros(g.rows(), w);
                    for r in 0..g.rows() {
                        gp.row_mut(r).copy_from_slice(&g.row(r)[off..off + w]);
                    }
                    accumulate(&mut grads[p.0], gp);
                    off += w;
                }
            })),
        )
    }

    /// Rows of `table` selected by `ids`; gradient scatter-adds.
    pub fn gather_rows(&mut self, table: Var, ids: Vec<usize>) -> Var {
        let tv = self.value(table);
        let mut out = Tensor::zeros(ids.len(), tv.cols());
        for (r, &id) in ids.iter().enumerate() {
            out.row_mut(r).copy_from_slice(tv.row(id));
        }
        let table_rows = tv.rows();
        self.push(
            out,
            Some(Box::new(move |g, _, grads| {
                let mut gt = Tensor::zeros(table_rows, g.cols());
                for (r, &id) in ids.iter().enumerate() {
                    let dst = gt.row_mut(id);
                    for (d, &s) in dst.iter_mut().zip(g.row(r)) {
                        *d = *d + s;
                    }
                }
                accumulate(&mut grads[table.0], gt);
            })),
        )
    }

    /// Row-wise masked softmax. Row `r` sees all prefix columns plus token
    /// columns up to `prefix + r` inclusive under the causal mask; masked
    /// entries are exactly zero.
    pub fn softmax_rows(&mut self, x: Var, mask: AttnMask) -> Var {
        let xv = self.value(x);
        let (rows, cols) = xv.shape();
        let visible = move |r: usize| -> usize {
            match mask {
                AttnMask::Full => cols,
                AttnMask::Causal { prefix } => (prefix + r + 1).min(cols),
            }
        };
        let mut out = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let vis = visible(r);
            let row = &xv.row(r)[..vis];
            let mut mx = row[0];
            for &v in row {
                mx = mx.maximum(v);
            }
            let mut sum = T::ZERO;
            let orow = out.row_mut(r);
            for (o, &v) in orow[..vis].iter_mut().zip(row) {
                *o = (v - mx).exp();
                sum = sum + *o;
            }
            for o in orow[..vis].iter_mut() {
                *o = *o / sum;
            }
        }
        self.push(
            out,
            Some(Box::new(move |g, values, grads| {
                // recompute the row softmax from x (cheaper than capturing a
                // clone of the output for every attention site)
                let xv = &values[x.0];
                let mut gx = Tensor::zeros(g.rows(), g.cols());
                for r in 0..g.rows() {
                    let vis = visible(r);
                    let row = &xv.row(r)[..vis];
                    let mut mx = row[0];
                    for &v in row {
                        mx = mx.maximum(v);
                    }
                    let mut sum = T::ZERO;
                    let mut y: Vec<T> = row.iter().map(|&v| (v - mx).exp()).collect();
                    for &v in &y {
                        sum = sum + v;
                    }
                    for v in y.iter_mut() {
                        *v = *v / sum;
                    }
                    let grow = &g.row(r)[..vis];
                    let mut dot = T::ZERO;
                    for (&gi, &yi) in grow.iter().zip(&y) {
                        dot = dot + gi * yi;
                    }
                    let gxr = gx.row_mut(r);
                    for ((gx_i, &gi), &yi) in gxr[..vis].iter_mut().zip(grow).zip(&y) {
                        *gx_i = yi * (gi - dot);
                    }
                }
                accumulate(&mut grads[x.0], gx);
            })),
        )
    }

    /// Pre-norm layer normalization with learned gain and bias (both 1×C).
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: T) -> Var {
        let (xv, gv, bv) = (self.value(x), self.value(gain), self.value(bias));
        let (rows, cols) = xv.shape();
        assert_eq!(gv.shape(), (1, cols));
        assert_eq!(bv.shape(), (1, cols));
        let mut out = Tensor::zeros(rows, cols);
        for r in 0..rows {
            let row = xv.row(r);
            let (mu, sigma) = row_moments(row, eps);
            let orow = out.row_mut(r);
            for c in 0..cols {
                orow[c] = (row[c] - mu) / sigma * gv.data()[c] + bv.data()[c];
            }
        }
        self.push(
            out,
            Some(Box::new(move |g, values, grads| {
                let xv = &values[x.0];
                let gv = &values[gain.0];
                let (rows, cols) = xv.shape();
                let dim = T::from_f64(cols as f64);
                let mut gx = Tensor::zeros(rows, cols);
                let mut ggain = Tensor::zeros(1, cols);
                let mut gbias = Tensor::zeros(1, cols);
                for r in 0..rows {
                    let row = xv.row(r);
                    let (mu, sigma) = row_moments(row, eps);
                    let xhat: Vec<T> = row.iter().map(|&v| (v - mu) / sigma).collect();
                    let grow = g.row(r);
                    let mut dxhat: Vec<T> = Vec::with_capacity(cols);
                    for c in 0..cols {
                        ggain.data_mut()[c] = ggain.data_mut()[c] + grow[c] * xhat[c];
                        gbias.data_mut()[c] = gbias.data_mut()[c] + grow[c];
                        dxhat.push(grow[c] * gv.data()[c]);
                    }
                    let mut mean_dxhat = T::ZERO;
                    let mut mean_dxhat_xhat = T::ZERO;
                    for c in 0..cols {
                        mean_dxhat = mean_dxhat + dxhat[c];
                        mean_dxhat_xhat = mean_dxhat_xhat + dxhat[c] * xhat[c];
                    }
                    mean_dxhat = mean_dxhat / dim;
                    mean_dxhat_xhat = mean_dxhat_xhat / dim;
                    let gxr = gx.row_mut(r);
                    for c in 0..cols {
                        gxr[c] = (dxhat[c] - mean_dxhat - xhat[c] * mean_dxhat_xhat) / sigma;
                    }
                }
                accumulate(&mut grads[x.0], gx);
                accumulate(&mut grads[gain.0], ggain);
                accumulate(&mut grads[bias.0], gbias);
            })),
        )
    }

    /// Gaussian error linear unit (tanh approximation).
    pub fn gelu(&mut self, x: Var) -> Var {
        let k = T::from_f64(0.7978845608028654); // sqrt(2/pi)
        let c3 = T::from_f64(0.044715);
        let half = T::from_f64(0.5);
        let out = self.value(x).map(|v| {
            let u = k * (v + c3 * v * v * v);
            half * v * (T::ONE + u.tanh())
        });
        self.push(
            out,
            Some(Box::new(move |g, values, grads| {
                let xv = &values[x.0];
                let three = T::from_f64(3.0);
                let data = xv
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&v, &gi)| {
                        let u = k * (v + c3 * v * v * v);
                        let t = u.tanh();
                        let du = k * (T::ONE + three * c3 * v * v);
                        let d = half * (T::ONE + t) + half * v * (T::ONE - t * t) * du;
                        gi * d
                    })
                    .collect();
                accumulate(
                    &mut grads[x.0],
                    Tensor::from_vec(xv.rows(), xv.cols(), data),
                );
            })),
        )
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.value(x).map(|v| v.maximum(T::ZERO));
        self.push(
            out,
            Some(Box::new(move |g, values, grads| {
                let xv = &values[x.0];
                let data = xv
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&v, &gi)| if v > T::ZERO { gi } else { T::ZERO })
                    .collect();
                accumulate(
                    &mut grads[x.0],
                    Tensor::from_vec(xv.rows(), xv.cols(), data),
                );
            })),
        )
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let mut acc = T::ZERO;
        for &v in self.value(x).data() {
            acc = acc + v;
        }
        let shape = self.value(x).shape();
        self.push(
            Tensor::scalar(acc),
            Some(Box::new(move |g, _, grads| {
                let gi = g.item();
                accumulate(
                    &mut grads[x.0],
                    Tensor::from_vec(shape.0, shape.1, vec![gi; shape.0 * shape.1]),
                );
            })),
        )
    }

    /// Mean cross-entropy between `softmax(logits)` rows and smoothed one-hot
    /// targets: mass `1−β` on the target token, `β/(N−1)` elsewhere.
    pub fn ce_smoothed(&mut self, logits: Var, targets: Vec<usize>, beta: T) -> Var {
        let lv = self.value(logits);
        let (rows, cols) = lv.shape();
        assert_eq!(rows, targets.len());
        let off = beta / T::from_f64((cols - 1) as f64);
        let on = T::ONE - beta;
        let mut loss = T::ZERO;
        for (r, &t) in targets.iter().enumerate() {
            let lp = log_softmax_row(lv.row(r));
            let mut row_loss = T::ZERO;
            for (c, &l) in lp.iter().enumerate() {
                let q = if c == t { on } else { off };
                row_loss = row_loss - q * l;
            }
            loss = loss + row_loss;
        }
        loss = loss / T::from_f64(rows as f64);
        self.push(
            Tensor::scalar(loss),
            Some(Box::new(move |g, values, grads| {
                let lv = &values[logits.0];
                let scale = g.item() / T::from_f64(rows as f64);
                let mut gl = Tensor::zeros(rows, cols);
                for (r, &t) in targets.iter().enumerate() {
                    let p = softmax_row(lv.row(r));
                    let grow = gl.row_mut(r);
                    for c in 0..cols {
                        let q = if c == t { on } else { off };
                        grow[c] = (p[c] - q) * scale;
                    }
                }
                accumulate(&mut grads[logits.0], gl);
            })),
        )
    }

    /// Sum over rows of the log-softmax value at each row's target column:
    /// the sequence log-probability under teacher forcing.
    pub fn log_prob_sum(&mut self, logits: Var, targets: Vec<usize>) -> Var {
        let lv = self.value(logits);
        let (rows, cols) = lv.shape();
        assert_eq!(rows, targets.len());
        let mut total = T::ZERO;
        for (r, &t) in targets.iter().enumerate() {
            total = total + log_softmax_row(lv.row(r))[t];
        }
        self.push(
            Tensor::scalar(total),
            Some(Box::new(move |g, values, grads| {
                let lv = &values[logits.0];
                let scale = g.item();
                let mut gl = Tensor::zeros(rows, cols);
                for (r, &t) in targets.iter().enumerate() {
                    let p = softmax_row(lv.row(r));
                    let grow = gl.row_mut(r);
                    for c in 0..cols {
                        let indicator = if c == t { T::ONE } else { T::ZERO };
                        grow[c] = (indicator - p[c]) * scale;
                    }
                }
                accumulate(&mut grads[logits.0], gl);
            })),
        )
    }
}

fn row_moments<T: Real>(row: &[T], eps: T) -> (T, T) {
    let n = T::from_f64(row.len() as f64);
    let mut mu = T::ZERO;
    for &v in row {
        mu = mu + v;
    }
    mu = mu / n;
    let mut var = T::ZERO;
    for &v in row {
        var = var + (v - mu) * (v - mu);
    }
    var = var / n;
    (mu, (var + eps).sqrt())
}

fn softmax_row<T: Real>(row: &[T]) -> Vec<T> {
    let mut mx = row[0];
    for &v in row {
        mx = mx.maximum(v);
    }
    let mut out: Vec<T> = row.iter().map(|&v| (v - mx).exp()).collect();
    let mut sum = T::ZERO;
    for &v in &out {
        sum = sum + v;
    }
    for v in out.iter_mut() {
        *v = *v / sum;
    }
    out
}

fn log_softmax_row<T: Real>(row: &[T]) -> Vec<T> {
    let mut mx = row[0];
    for &v in row {
        mx = mx.maximum(v);
    }
    let mut sum = T::ZERO;
    for &v in row {
        sum = sum + (v - mx).exp();
    }
    let lse = mx + sum.ln();
    row.iter().map(|&v| v - lse).collect()
}
