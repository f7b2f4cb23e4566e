//! Small dense matrices over `Complex64`, plus the real Gauss-Jordan inverse
//! used for information matrices. Everything here is sized for desk-scale
//! problems (tens of rows), so the implementations favour clarity and exact
//! reproducibility over blocked performance.

use num_complex::Complex64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        debug_assert!(rows.iter().all(|row| row.len() == c));
        CMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn col(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.at(r, c)).collect()
    }

    /// Conjugate transpose.
    pub fn herm(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.at(r, c).conj());
            }
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.at(r, c) + a * other.at(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude of `self - other^H`, relative to the Frobenius
    /// norm; zero for an exactly Hermitian matrix.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let norm = self.frobenius();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = (self.at(r, c) - self.at(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / norm
    }
}

/// Invert an `n x n` real matrix (row-major) by Gauss-Jordan elimination with
/// partial pivoting. Returns `None` when the matrix is numerically singular:
/// some pivot magnitude falls below `1e-12` times the largest input entry.
pub fn invert_real(matrix: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(matrix.len(), n * n);
    let max_abs = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 || !max_abs.is_finite() {
        return None;
    }
    let threshold = 1e-12 * max_abs;

    // Augmented system [A | I], reduced in place.
    let mut a = matrix.to_vec();
    let mut inv = vec![0.0f64; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .expect("pivot comparison on non-finite entry")
            })
            .unwrap();
        let pivot = a[pivot_row * n + col];
        if pivot.abs() < threshold {
            return None;
        }
        if pivot_row != col {
            for c in 0..n {
                a.swap(col * n + c, pivot_row * n + c);
                inv.swap(col * n + c, pivot_row * n + c);
            }
        }
        let inv_pivot = 1.0 / pivot;
        for c in 0..n {
            a[col * n + c] *= inv_pivot;
            inv[col * n + c] *= inv_pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..n {
                a[r * n + c] -= factor * a[col * n + c];
                inv[r * n + c] -= factor * inv[col * n + c];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herm_and_product_shapes() {
        let m = CMatrix::from_rows(&[
            vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0)],
            vec![Complex64::new(3.0, 0.0), Complex64::new(2.0, 2.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)],
        ]);
        let h = m.herm();
        assert_eq!(h.rows(), 2);
        assert_eq!(h.cols(), 3);
        assert_eq!(h.at(0, 0), Complex64::new(1.0, -2.0));
        let g = h.mul(&m); // 2x2 Gram matrix, Hermitian by construction
        assert!(g.hermitian_defect() < 1e-15);
        assert!((g.at(0, 0).re - (1.0 + 4.0 + 9.0)).abs() < 1e-12);
    }

    #[test]
    fn invert_recovers_identity() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, -0.25, 0.5, -0.25, 2.0];
        let inv = invert_real(&a, 3).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[r * 3 + k] * inv[k * 3 + c];
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "({r},{c}) -> {s}");
            }
        }
    }

    #[test]
    fn invert_rejects_singular() {
        // Rank-1 matrix.
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(invert_real(&a, 2).is_none());
        assert!(invert_real(&[0.0; 4], 2).is_none());
    }

    #[test]
    fn invert_handles_permutation_pivoting() {
        // Leading zero forces a row swap.
        let a = [0.0, 1.0, 1.0, 0.0];
        let inv = invert_real(&a, 2).unwrap();
        assert_eq!(inv, vec![0.0, 1.0, 1.0, 0.0]);
    }
}
