//! Single-layer LSTM without peephole connections and without a forget-gate
//! bias. Gate rows of the weight matrices are ordered input, forget, output,
//! candidate; the bias holds only the input, output and candidate blocks.
//!
//! ```text
//! z = Wx x + Wh h_prev (+ b on i, o, g)
//! i = σ(z_i)  f = σ(z_f)  o = σ(z_o)  g = tanh(z_g)
//! c = f ⊙ c_prev + i ⊙ g
//! h = o ⊙ tanh(c)
//! ```

use serde::{Deserialize, Serialize};

use super::tensor::{sigmoid, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    pub wx: Tensor,
    pub wh: Tensor,
    /// `3H` entries: input, output and candidate gate biases.
    pub b: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

impl Lstm {
    pub fn zeros(prefix: &str, input: usize, hidden: usize) -> Self {
        Self {
            wx: Tensor::zeros(&format!("{prefix}.wx"), 4 * hidden, input),
            wh: Tensor::zeros(&format!("{prefix}.wh"), 4 * hidden, hidden),
            b: Tensor::zeros(&format!("{prefix}.b"), 3 * hidden, 1),
        }
    }

    pub fn hidden(&self) -> usize {
        self.wh.cols
    }

    pub fn input(&self) -> usize {
        self.wx.cols
    }

    pub fn tensors(&self) -> [&Tensor; 3] {
        [&self.wx, &self.wh, &self.b]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 3] {
        [&mut self.wx, &mut self.wh, &mut self.b]
    }

    /// Runs one step given the input contribution `xin = Wx x` (length 4H).
    pub fn step_preact(&self, xin: &[f64], state: &LstmState) -> (LstmState, StepCache) {
        let hd = self.hidden();
        let mut z = xin.to_vec();
        self.wh.matvec_add(&state.h, &mut z);
        let b = &self.b.data;
        let mut i = vec![0.0; hd];
        let mut f = vec![0.0; hd];
        let mut o = vec![0.0; hd];
        let mut g = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let mut h = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        for k in 0..hd {
            i[k] = sigmoid(z[k] + b[k]);
            f[k] = sigmoid(z[hd + k]);
            o[k] = sigmoid(z[2 * hd + k] + b[hd + k]);
            g[k] = (z[3 * hd + k] + b[2 * hd + k]).tanh();
            c[k] = f[k] * state.c[k] + i[k] * g[k];
            tanh_c[k] = c[k].tanh();
            h[k] = o[k] * tanh_c[k];
        }
        let cache = StepCache {
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            i,
            f,
            o,
            g,
            tanh_c,
        };
        (LstmState { h, c }, cache)
    }

    /// One step on a dense input. Returns the output `h` and the new state.
    pub fn step(&self, x: &[f64], state: &LstmState) -> Result<(Vec<f64>, LstmState)> {
        if x.len() != self.input() {
            return Err(Error::DimensionMismatch {
                expected: self.input(),
                got: x.len(),
            });
        }
        if state.h.len() != self.hidden() || state.c.len() != self.hidden() {
            return Err(Error::DimensionMismatch {
                expected: self.hidden(),
                got: state.h.len(),
            });
        }
        let mut xin = vec![0.0; 4 * self.hidden()];
        self.wx.matvec_add(x, &mut xin);
        let (next, _) = self.step_preact(&xin, state);
        Ok((next.h.clone(), next))
    }

    /// Backward through one step. `dh` is the total gradient reaching `h`,
    /// `dc_next` the gradient flowing into `c` from the following step.
    /// Accumulates `wh` and `b` gradients into `grads` and returns
    /// `(dz, dh_prev, dc_prev)`; the caller handles the `wx` term.
    pub fn backward_step(
        &self,
        cache: &StepCache,
        dh: &[f64],
        dc_next: &[f64],
        grads: &mut Lstm,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hd = self.hidden();
        let mut dz = vec![0.0; 4 * hd];
        let mut dc_prev = vec![0.0; hd];
        for k in 0..hd {
            let (i, f, o, g, tc) = (cache.i[k], cache.f[k], cache.o[k], cache.g[k], cache.tanh_c[k]);
            let d_o = dh[k] * tc;
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
            let d_i = dc * g;
            let d_g = dc * i;
            let d_f = dc * cache.c_prev[k];
            dc_prev[k] = dc * f;
            dz[k] = d_i * i * (1.0 - i);
            dz[hd + k] = d_f * f * (1.0 - f);
            dz[2 * hd + k] = d_o * o * (1.0 - o);
            dz[3 * hd + k] = d_g * (1.0 - g * g);
        }
        grads.wh.outer_add(&dz, &cache.h_prev);
        let gb = &mut grads.b.data;
        for k in 0..hd {
            gb[k] += dz[k];
            gb[hd + k] += dz[2 * hd + k];
            gb[2 * hd + k] += dz[3 * hd + k];
        }
        let mut dh_prev = vec![0.0; hd];
        self.wh.matvec_t_add(&dz, &mut dh_prev);
        (dz, dh_prev, dc_prev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_zero_output() {
        let lstm = Lstm::zeros("t", 3, 4);
        let (h, st) = lstm.step(&[1.0, -2.0, 0.5], &LstmState::zeros(4)).unwrap();
        assert_eq!(h, vec![0.0; 4]);
        assert_eq!(st.c, vec![0.0; 4]);
    }

    #[test]
    fn dimension_mismatch() {
        let lstm = Lstm::zeros("t", 3, 4);
        assert!(matches!(
            lstm.step(&[1.0], &LstmState::zeros(4)),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    /// Scalar re-derivation of the gate equations, written independently of
    /// the matrix code above.
    fn scalar_reference(wx: &[[f64; 2]; 8], wh: &[[f64; 2]; 8], b: &[f64; 6], x: [f64; 2], h0: [f64; 2], c0: [f64; 2]) -> ([f64; 2], [f64; 2]) {
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut h = [0.0; 2];
        let mut c = [0.0; 2];
        for k in 0..2 {
            let pre = |row: usize| wx[row][0] * x[0] + wx[row][1] * x[1] + wh[row][0] * h0[0] + wh[row][1] * h0[1];
            let ig = sig(pre(k) + b[k]);
            let fg = sig(pre(2 + k));
            let og = sig(pre(4 + k) + b[2 + k]);
            let gg = (pre(6 + k) + b[4 + k]).tanh();
            c[k] = fg * c0[k] + ig * gg;
            h[k] = og * c[k].tanh();
        }
        (h, c)
    }

    #[test]
    fn golden_two_by_two() {
        let wx = [[0.1, -0.2], [0.3, 0.05], [-0.4, 0.2], [0.15, 0.1], [0.25, -0.3], [0.05, 0.4], [-0.1, 0.35], [0.2, -0.25]];
        let wh = [[0.05, 0.1], [-0.15, 0.2], [0.3, -0.1], [0.1, 0.1], [-0.2, 0.05], [0.12, -0.07], [0.09, 0.2], [-0.3, 0.15]];
        let b = [0.01, -0.02, 0.03, 0.04, -0.05, 0.06];
        let mut lstm = Lstm::zeros("t", 2, 2);
        lstm.wx.data = wx.iter().flatten().copied().collect();
        lstm.wh.data = wh.iter().flatten().copied().collect();
        lstm.b.data = b.to_vec();
        let state = LstmState { h: vec![0.2, -0.1], c: vec![0.5, -0.3] };
        let (h, next) = lstm.step(&[1.0, -0.5], &state).unwrap();
        let (h_ref, c_ref) = scalar_reference(&wx, &wh, &b, [1.0, -0.5], [0.2, -0.1], [0.5, -0.3]);
        // frozen from the scalar reference
        let golden_h = [0.013465434147855941, 0.003515711845795409];
        let golden_c = [0.02263186061044789, 0.0073205611687928995];
        for k in 0..2 {
            assert!((h[k] - h_ref[k]).abs() < 1e-12);
            assert!((next.c[k] - c_ref[k]).abs() < 1e-12);
            assert!((h[k] - golden_h[k]).abs() < 1e-12, "h[{k}] = {:.17}", h[k]);
            assert!((next.c[k] - golden_c[k]).abs() < 1e-12, "c[{k}] = {:.17}", next.c[k]);
        }
    }
}
