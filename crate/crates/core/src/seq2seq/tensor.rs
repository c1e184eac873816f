use serde::{Deserialize, Serialize};

/// Dense row-major matrix (a vector is a `rows × 1` tensor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(name: &str, rows: usize, cols: usize) -> Self {
        Self {
            name: name.to_string(),
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn zeros_like(other: &Tensor) -> Self {
        Self::zeros(&other.name, other.rows, other.cols)
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// `y += A x`
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            *out += dot(self.row(r), x);
        }
    }

    /// `y += A[:, col_start..col_start + x.len()] x`
    pub fn matvec_cols_add(&self, col_start: usize, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let row = &self.row(r)[col_start..col_start + x.len()];
            *out += dot(row, x);
        }
    }

    /// `y += A^T x`
    pub fn matvec_t_add(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (r, &xr) in x.iter().enumerate() {
            if xr != 0.0 {
                axpy(xr, self.row(r), y);
            }
        }
    }

    /// `y += A[:, col_start..col_start + y.len()]^T x`
    pub fn matvec_t_cols_add(&self, col_start: usize, x: &[f64], y: &mut [f64]) {
        for (r, &xr) in x.iter().enumerate() {
            if xr != 0.0 {
                let row = &self.row(r)[col_start..col_start + y.len()];
                axpy(xr, row, y);
            }
        }
    }

    /// `A += a b^T`
    pub fn outer_add(&mut self, a: &[f64], b: &[f64]) {
        self.outer_cols_add(0, a, b);
    }

    /// `A[:, col_start..col_start + b.len()] += a b^T`
    pub fn outer_cols_add(&mut self, col_start: usize, a: &[f64], b: &[f64]) {
        let cols = self.cols;
        for (r, &ar) in a.iter().enumerate() {
            if ar != 0.0 {
                let row = &mut self.data[r * cols + col_start..r * cols + col_start + b.len()];
                axpy(ar, b, row);
            }
        }
    }

    /// `A[:, col] += a`
    pub fn column_add(&mut self, col: usize, a: &[f64]) {
        for (r, &ar) in a.iter().enumerate() {
            self.data[r * self.cols + col] += ar;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for o in &mut out {
        *o /= sum;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose() {
        let mut a = Tensor::zeros("a", 2, 3);
        a.data = vec![1., 2., 3., 4., 5., 6.];
        let mut y = vec![0.0; 2];
        a.matvec_add(&[1., 0., -1.], &mut y);
        assert_eq!(y, vec![-2., -2.]);
        let mut z = vec![0.0; 3];
        a.matvec_t_add(&[1., 1.], &mut z);
        assert_eq!(z, vec![5., 7., 9.]);
        let mut w = vec![0.0; 2];
        a.matvec_cols_add(1, &[1., 1.], &mut w);
        assert_eq!(w, vec![5., 11.]);
    }

    #[test]
    fn softmax_is_a_distribution() {
        let p = softmax(&[1000.0, 0.0, -1000.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
        let u = softmax(&[0.0; 4]);
        assert!(u.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }
}
