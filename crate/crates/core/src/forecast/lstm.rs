use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::ForecastError;

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weights of one LSTM layer. Gate blocks are stacked in the order
/// input, forget, cell candidate, output; matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayerParams {
    pub input_size: usize,
    pub hidden_size: usize,
    /// 4H x I
    pub w_x: Vec<f64>,
    /// 4H x H
    pub w_h: Vec<f64>,
    /// 4H
    pub bias: Vec<f64>,
}

impl LstmLayerParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        let g = 4 * hidden_size;
        Self {
            input_size,
            hidden_size,
            w_x: vec![0.0; g * input_size],
            w_h: vec![0.0; g * hidden_size],
            bias: vec![0.0; g],
        }
    }
}

/// Linear read-out from the last hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub weights: Vec<f64>,
    pub bias: [f64; 1],
}

/// All trainable tensors. Gradients use the same type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub layers: Vec<LstmLayerParams>,
    pub head: Head,
}

impl Params {
    pub fn zeros(n_layers: usize, hidden_size: usize) -> Self {
        Self {
            layers: (0..n_layers)
                .map(|l| LstmLayerParams::zeros(if l == 0 { 1 } else { hidden_size }, hidden_size))
                .collect(),
            head: Head {
                weights: vec![0.0; hidden_size],
                bias: [0.0],
            },
        }
    }

    /// Uniform in +-1/sqrt(H), forget-gate biases set to 1.
    pub fn init<R: Rng + ?Sized>(n_layers: usize, hidden_size: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(n_layers, hidden_size);
        let bound = 1.0 / (hidden_size as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        for t in p.tensors_mut() {
            for x in t.iter_mut() {
                *x = dist.sample(rng);
            }
        }
        p.head.bias = [0.0];
        for layer in &mut p.layers {
            layer.bias[hidden_size..2 * hidden_size].fill(1.0);
        }
        p
    }

    pub fn hidden_size(&self) -> usize {
        self.head.weights.len()
    }

    /// Every tensor in a fixed order.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for l in &self.layers {
            out.push(&l.w_x);
            out.push(&l.w_h);
            out.push(&l.bias);
        }
        out.push(&self.head.weights);
        out.push(&self.head.bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(3 * self.layers.len() + 2);
        for l in &mut self.layers {
            out.push(&mut l.w_x);
            out.push(&mut l.w_h);
            out.push(&mut l.bias);
        }
        out.push(&mut self.head.weights);
        out.push(&mut self.head.bias);
        out
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, k: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x *= k);
        }
    }
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Row and column stride of a dense matrix view.
type Strides = (usize, usize);

/// `c = a * b + beta * c` with `a: m x k`, `b: k x n`, `c: m x n`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    (m, k, n): (usize, usize, usize),
    a: &[f64],
    sa: Strides,
    b: &[f64],
    sb: Strides,
    beta: f64,
    c: &mut [f64],
    sc: Strides,
) {
    let last = |(r, col): Strides, rows: usize, cols: usize| {
        if rows == 0 || cols == 0 {
            0
        } else {
            (rows - 1) * r + (cols - 1) * col + 1
        }
    };
    assert!(a.len() >= last(sa, m, k) && b.len() >= last(sb, k, n) && c.len() >= last(sc, m, n));
    // SAFETY: the assertion keeps every strided access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            sa.0 as isize,
            sa.1 as isize,
            b.as_ptr(),
            sb.0 as isize,
            sb.1 as isize,
            beta,
            c.as_mut_ptr(),
            sc.0 as isize,
            sc.1 as isize,
        );
    }
}

/// Activations of one layer over a batch of windows, batch index fastest:
/// `gates[t][j][b]`, `c[t][k][b]` and `h[t][k][b]` with W + 1 rows of `c`
/// and `h` (row 0 is the zero initial state), `tanh_c[t][k][b]`.
#[derive(Debug, Clone)]
struct LayerTrace {
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

/// Everything backpropagation needs from a forward pass over a batch.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    steps: usize,
    hidden: usize,
    /// `input[t][b]`
    input: Vec<f64>,
    layers: Vec<LayerTrace>,
    pub predictions: Vec<f64>,
}

impl ForwardCache {
    /// Hidden state of `layer` after step `t` (0-based) for batch item `b`.
    pub fn hidden(&self, layer: usize, t: usize, b: usize) -> Vec<f64> {
        let (n, hs) = (self.batch, self.hidden);
        let base = (t + 1) * hs * n;
        (0..hs).map(|k| self.layers[layer].h[base + k * n + b]).collect()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Forward pass over equally long normalized windows.
pub fn forward_batch(params: &Params, windows: &[&[f64]]) -> Result<ForwardCache, ForecastError> {
    let n = windows.len();
    let hsz = params.hidden_size();
    let steps = windows.first().map_or(0, |w| w.len());
    if n == 0 {
        return Err(ForecastError::EmptyBatch);
    }
    if steps == 0 {
        return Err(ForecastError::WindowLength { expected: 1, got: 0 });
    }
    if let Some(w) = windows.iter().find(|w| w.len() != steps) {
        return Err(ForecastError::WindowLength {
            expected: steps,
            got: w.len(),
        });
    }
    let mut input = vec![0.0; steps * n];
    for (b, w) in windows.iter().enumerate() {
        for (t, &x) in w.iter().enumerate() {
            input[t * n + b] = x;
        }
    }
    let g4 = 4 * hsz;
    let mut layers: Vec<LayerTrace> = Vec::with_capacity(params.layers.len());
    let mut pre = vec![0.0; g4 * n];
    for (li, layer) in params.layers.iter().enumerate() {
        let isz = layer.input_size;
        let mut tr = LayerTrace {
            gates: vec![0.0; steps * g4 * n],
            c: vec![0.0; (steps + 1) * hsz * n],
            tanh_c: vec![0.0; steps * hsz * n],
            h: vec![0.0; (steps + 1) * hsz * n],
        };
        for t in 0..steps {
            let x: &[f64] = match layers.last() {
                None => &input[t * n..(t + 1) * n],
                Some(below) => &below.h[(t + 1) * hsz * n..(t + 2) * hsz * n],
            };
            let h_prev = &tr.h[t * hsz * n..(t + 1) * hsz * n];
            for j in 0..g4 {
                pre[j * n..(j + 1) * n].fill(layer.bias[j]);
            }
            gemm((g4, isz, n), &layer.w_x, (isz, 1), x, (n, 1), 1.0, &mut pre, (n, 1));
            gemm((g4, hsz, n), &layer.w_h, (hsz, 1), h_prev, (n, 1), 1.0, &mut pre, (n, 1));
            let gates = &mut tr.gates[t * g4 * n..(t + 1) * g4 * n];
            for (e, (g, a)) in gates.iter_mut().zip(&pre).enumerate() {
                *g = if e / (hsz * n) == 2 { a.tanh() } else { sigmoid(*a) };
            }
            let (c_done, c_next) = tr.c.split_at_mut((t + 1) * hsz * n);
            let c_prev = &c_done[t * hsz * n..];
            let c_next = &mut c_next[..hsz * n];
            let tanh_c = &mut tr.tanh_c[t * hsz * n..(t + 1) * hsz * n];
            let h_next = &mut tr.h[(t + 1) * hsz * n..(t + 2) * hsz * n];
            for e in 0..hsz * n {
                let (i, f, g, o) = (
                    gates[e],
                    gates[hsz * n + e],
                    gates[2 * hsz * n + e],
                    gates[3 * hsz * n + e],
                );
                let c = f * c_prev[e] + i * g;
                let tc = c.tanh();
                c_next[e] = c;
                tanh_c[e] = tc;
                h_next[e] = o * tc;
            }
            if h_next.iter().chain(c_next.iter()).any(|v| !v.is_finite()) {
                return Err(ForecastError::NonFinite { layer: li, step: t });
            }
        }
        layers.push(tr);
    }
    let top = layers.last().expect("at least one layer");
    let last = &top.h[steps * hsz * n..(steps + 1) * hsz * n];
    let mut predictions = vec![params.head.bias[0]; n];
    for k in 0..hsz {
        axpy(&mut predictions, params.head.weights[k], &last[k * n..(k + 1) * n]);
    }
    if predictions.iter().any(|p| !p.is_finite()) {
        return Err(ForecastError::NonFinite {
            layer: params.layers.len(),
            step: steps - 1,
        });
    }
    Ok(ForwardCache {
        batch: n,
        steps,
        hidden: hsz,
        input,
        layers,
        predictions,
    })
}

/// Forward pass over one normalized window; returns the prediction.
pub fn forward(params: &Params, window: &[f64]) -> Result<f64, ForecastError> {
    Ok(forward_batch(params, &[window])?.predictions[0])
}

/// Gradient of `sum_b dpred[b] * prediction[b]`.
fn backward(params: &Params, cache: &ForwardCache, dpred: &[f64]) -> Params {
    let n = cache.batch;
    let hsz = cache.hidden;
    let steps = cache.steps;
    let g4 = 4 * hsz;
    let n_layers = params.layers.len();
    let mut grads = Params::zeros(n_layers, hsz);

    let top = &cache.layers[n_layers - 1];
    let last_h = &top.h[steps * hsz * n..(steps + 1) * hsz * n];
    grads.head.bias[0] = dpred.iter().sum();
    for k in 0..hsz {
        grads.head.weights[k] = dpred.iter().zip(&last_h[k * n..(k + 1) * n]).map(|(d, h)| d * h).sum();
    }

    // gradient w.r.t. this layer's outputs, dh_out[t][k][b]
    let mut dh_out = vec![0.0; steps * hsz * n];
    for k in 0..hsz {
        axpy(
            &mut dh_out[((steps - 1) * hsz + k) * n..((steps - 1) * hsz + k + 1) * n],
            params.head.weights[k],
            dpred,
        );
    }

    let mut da = vec![0.0; g4 * n];
    let mut dh_next = vec![0.0; hsz * n];
    let mut dc_next = vec![0.0; hsz * n];
    for li in (0..n_layers).rev() {
        let layer = &params.layers[li];
        let tr = &cache.layers[li];
        let g = &mut grads.layers[li];
        let isz = layer.input_size;
        let input: &[f64] = if li == 0 {
            &cache.input
        } else {
            &cache.layers[li - 1].h[hsz * n..]
        };
        let mut dx = vec![0.0; steps * isz * n];
        dh_next.fill(0.0);
        dc_next.fill(0.0);
        for t in (0..steps).rev() {
            let gates = &tr.gates[t * g4 * n..(t + 1) * g4 * n];
            let c_prev = &tr.c[t * hsz * n..(t + 1) * hsz * n];
            let tanh_c = &tr.tanh_c[t * hsz * n..(t + 1) * hsz * n];
            let dh_t = &dh_out[t * hsz * n..(t + 1) * hsz * n];
            let hn = hsz * n;
            for e in 0..hn {
                let (i, f, gg, o) = (gates[e], gates[hn + e], gates[2 * hn + e], gates[3 * hn + e]);
                let dh = dh_t[e] + dh_next[e];
                let dc = dh * o * (1.0 - tanh_c[e] * tanh_c[e]) + dc_next[e];
                da[e] = dc * gg * i * (1.0 - i);
                da[hn + e] = dc * c_prev[e] * f * (1.0 - f);
                da[2 * hn + e] = dc * i * (1.0 - gg * gg);
                da[3 * hn + e] = dh * tanh_c[e] * o * (1.0 - o);
                dc_next[e] = dc * f;
            }
            let x = &input[t * isz * n..(t + 1) * isz * n];
            let h_prev = &tr.h[t * hsz * n..(t + 1) * hsz * n];
            for j in 0..g4 {
                g.bias[j] += da[j * n..(j + 1) * n].iter().sum::<f64>();
            }
            let dxt = &mut dx[t * isz * n..(t + 1) * isz * n];
            // weight gradients: da * input^T; input gradients: W^T * da
            gemm((g4, n, isz), &da, (n, 1), x, (1, n), 1.0, &mut g.w_x, (isz, 1));
            gemm((isz, g4, n), &layer.w_x, (1, isz), &da, (n, 1), 0.0, dxt, (n, 1));
            gemm((g4, n, hsz), &da, (n, 1), h_prev, (1, n), 1.0, &mut g.w_h, (hsz, 1));
            gemm((hsz, g4, n), &layer.w_h, (1, hsz), &da, (n, 1), 0.0, &mut dh_next, (n, 1));
        }
        dh_out = dx;
    }
    grads
}

fn batch_windows(batch: &[(Vec<f64>, f64)]) -> Vec<&[f64]> {
    batch.iter().map(|(w, _)| w.as_slice()).collect()
}

/// Mean squared error over `batch` and its exact gradient (BPTT).
pub fn loss_and_gradients(
    params: &Params,
    batch: &[(Vec<f64>, f64)],
) -> Result<(f64, Params), ForecastError> {
    if batch.is_empty() {
        return Err(ForecastError::EmptyBatch);
    }
    let cache = forward_batch(params, &batch_windows(batch))?;
    let n = batch.len() as f64;
    let residuals: Vec<f64> = cache
        .predictions
        .iter()
        .zip(batch)
        .map(|(p, (_, y))| p - y)
        .collect();
    let loss = residuals.iter().map(|r| r * r).sum::<f64>() / n;
    let dpred: Vec<f64> = residuals.iter().map(|r| 2.0 * r / n).collect();
    Ok((loss, backward(params, &cache, &dpred)))
}

/// MSE only.
pub fn loss(params: &Params, batch: &[(Vec<f64>, f64)]) -> Result<f64, ForecastError> {
    if batch.is_empty() {
        return Err(ForecastError::EmptyBatch);
    }
    let cache = forward_batch(params, &batch_windows(batch))?;
    Ok(cache
        .predictions
        .iter()
        .zip(batch)
        .map(|(p, (_, y))| (p - y) * (p - y))
        .sum::<f64>()
        / batch.len() as f64)
}
