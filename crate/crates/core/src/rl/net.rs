//! Single-hidden-layer perceptron with hand-derived gradients and Adam.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Linear,
    Sigmoid,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// `n_in -> n_hidden (ReLU) -> n_out`, parameters stored flat as
/// `[w1 (in x hidden), b1, w2 (hidden x out), b2]`.
///
/// Both weight matrices are stored input-major: inputs are mostly zero bits
/// and half the hidden units are inactive, so whole rows get skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    output: OutputActivation,
    params: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Mlp {
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize, output: OutputActivation, rng: &mut impl Rng) -> Self {
        let len = n_hidden * n_in + n_hidden + n_out * n_hidden + n_out;
        let mut params = vec![0.0; len];
        // He-uniform for the ReLU layer, Glorot-uniform for the head
        let a1 = (6.0 / n_in.max(1) as f64).sqrt();
        let a2 = (6.0 / (n_hidden + n_out) as f64).sqrt();
        for w in &mut params[..n_hidden * n_in] {
            *w = rng.gen_range(-a1..a1);
        }
        let w2 = n_hidden * n_in + n_hidden;
        for w in &mut params[w2..w2 + n_out * n_hidden] {
            *w = rng.gen_range(-a2..a2);
        }
        Self {
            n_in,
            n_hidden,
            n_out,
            output,
            m: vec![0.0; len],
            v: vec![0.0; len],
            params,
            t: 0,
        }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Copies weights only; optimizer state stays untouched.
    pub fn copy_weights_from(&mut self, other: &Mlp) {
        self.params.copy_from_slice(&other.params);
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.n_hidden * self.n_in;
        let w2 = b1 + self.n_hidden;
        let b2 = w2 + self.n_out * self.n_hidden;
        (b1, w2, b2)
    }

    /// Forward pass keeping the hidden activations for backpropagation.
    fn trace_into(&self, x: &[f64], hidden: &mut Vec<f64>, out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.n_in);
        let (b1, w2, b2) = self.offsets();
        let p = &self.params;
        hidden.clear();
        hidden.extend_from_slice(&p[b1..b1 + self.n_hidden]);
        for (k, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let col = &p[k * self.n_hidden..(k + 1) * self.n_hidden];
            for (h, w) in hidden.iter_mut().zip(col) {
                *h += w * xi;
            }
        }
        for h in hidden.iter_mut() {
            *h = h.max(0.0);
        }
        out.clear();
        out.extend_from_slice(&p[b2..b2 + self.n_out]);
        for (h, &a) in hidden.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let row = &p[w2 + h * self.n_out..w2 + (h + 1) * self.n_out];
            for (z, w) in out.iter_mut().zip(row) {
                *z += w * a;
            }
        }
        if self.output == OutputActivation::Sigmoid {
            for z in out.iter_mut() {
                *z = 1.0 / (1.0 + (-*z).exp());
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut hidden = Vec::with_capacity(self.n_hidden);
        let mut out = Vec::with_capacity(self.n_out);
        self.trace_into(x, &mut hidden, &mut out);
        out
    }

    /// One Adam step. `grad_out(i, out)` returns the loss gradient with
    /// respect to the output pre-activations of example `i`, already scaled
    /// by any batch averaging.
    pub fn train_step<F>(&mut self, inputs: &[Vec<f64>], learning_rate: f64, mut grad_out: F)
    where
        F: FnMut(usize, &[f64]) -> Vec<f64>,
    {
        let (b1, w2, b2) = self.offsets();
        let mut grad = vec![0.0; self.params.len()];
        let mut g_hidden = vec![0.0; self.n_hidden];
        let mut hidden = Vec::with_capacity(self.n_hidden);
        let mut out = Vec::with_capacity(self.n_out);
        for (i, x) in inputs.iter().enumerate() {
            self.trace_into(x, &mut hidden, &mut out);
            let g_out = grad_out(i, &out);
            for (o, &g) in g_out.iter().enumerate() {
                grad[b2 + o] += g;
            }
            for (h, &a) in hidden.iter().enumerate() {
                g_hidden[h] = 0.0;
                if a <= 0.0 {
                    continue;
                }
                let k = w2 + h * self.n_out;
                let w_row = &self.params[k..k + self.n_out];
                let g_row = &mut grad[k..k + self.n_out];
                let mut gh = 0.0;
                for ((gw, w), g) in g_row.iter_mut().zip(w_row).zip(&g_out) {
                    *gw += g * a;
                    gh += g * w;
                }
                g_hidden[h] = gh;
            }
            for (gb, g) in grad[b1..b1 + self.n_hidden].iter_mut().zip(&g_hidden) {
                *gb += g;
            }
            for (k, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let col = &mut grad[k * self.n_hidden..(k + 1) * self.n_hidden];
                for (gc, g) in col.iter_mut().zip(&g_hidden) {
                    *gc += g * xi;
                }
            }
        }
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (k, g) in grad.into_iter().enumerate() {
            self.m[k] = BETA1 * self.m[k] + (1.0 - BETA1) * g;
            self.v[k] = BETA2 * self.v[k] + (1.0 - BETA2) * g * g;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            self.params[k] -= learning_rate * m_hat / (v_hat.sqrt() + EPS);
        }
    }
}
