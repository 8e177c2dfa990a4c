//! Minimal CSR matrices for operator-times-dense products.
//!
//! Ladder operators and the two-photon Hamiltonians have at most a few
//! nonzeros per row, so Liouvillian evaluations go through these instead of
//! dense matrix products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub(crate) struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Rough upper bound on the spectral norm: `sqrt(||A||_1 ||A||_inf)`.
    pub fn norm_bound(&self) -> f64 {
        let mut col_sums = vec![0.0; self.n];
        let mut max_row: f64 = 0.0;
        for i in 0..self.n {
            let mut row = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.vals[idx].norm();
                row += a;
                col_sums[self.cols[idx]] += a;
            }
            max_row = max_row.max(row);
        }
        let max_col = col_sums.into_iter().fold(0.0, f64::max);
        (max_row * max_col).sqrt()
    }

    /// `out += coef * A x`.
    pub fn mul_vec_acc(&self, x: &DVector<Complex64>, coef: Complex64, out: &mut DVector<Complex64>) {
        for i in 0..self.n {
            let mut acc = Complex64::new(0.0, 0.0);
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            out[i] += coef * acc;
        }
    }

    /// `out += coef * A X`.
    pub fn left_mul_acc(&self, x: &DMatrix<Complex64>, coef: Complex64, out: &mut DMatrix<Complex64>) {
        let n = self.n;
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let xs = xc.as_slice();
            let mut oc = out.column_mut(c);
            let os = oc.as_mut_slice();
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[idx] * xs[self.cols[idx]];
                }
                os[i] += coef * acc;
            }
        }
    }

    /// `out += coef * X A^dagger`.
    pub fn right_mul_adjoint_acc(
        &self,
        x: &DMatrix<Complex64>,
        coef: Complex64,
        out: &mut DMatrix<Complex64>,
    ) {
        // (X A^dagger)[:, j] = sum_k X[:, k] conj(A[j, k])
        let rows = x.nrows();
        for j in 0..self.n {
            for idx in self.row_ptr[j]..self.row_ptr[j + 1] {
                let k = self.cols[idx];
                let w = coef * self.vals[idx].conj();
                for r in 0..rows {
                    let v = x[(r, k)];
                    out[(r, j)] += w * v;
                }
            }
        }
    }

    /// `out += coef * A X A^dagger`, using `tmp` as scratch.
    pub fn sandwich_acc(
        &self,
        x: &DMatrix<Complex64>,
        coef: Complex64,
        tmp: &mut DMatrix<Complex64>,
        out: &mut DMatrix<Complex64>,
    ) {
        tmp.fill(Complex64::new(0.0, 0.0));
        self.left_mul_acc(x, Complex64::new(1.0, 0.0), tmp);
        self.right_mul_adjoint_acc(tmp, coef, out);
    }
}
