//! Dense matrices over a finite field: products, determinants, reduced row
//! echelon form, ranks, kernels, and inverses. Everything is exact and
//! deterministic; pivoting always picks the first nonzero entry.

use crate::field::{Felt, Field};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Felt>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Felt::ZERO; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Felt>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Felt) -> Matrix {
        let mut m = Matrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Felt {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Felt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Felt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if field.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, field.add(cur, field.mul(a, other.get(l, j))));
                }
            }
        }
        out
    }

    pub fn add(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o = field.add(*o, *b);
        }
        out
    }

    pub fn sub(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            *o = field.sub(*o, *b);
        }
        out
    }

    pub fn scale(&self, field: &Field, c: Felt) -> Matrix {
        let mut out = self.clone();
        for o in out.data.iter_mut() {
            *o = field.mul(*o, c);
        }
        out
    }

    pub fn pow(&self, field: &Field, e: u64) -> Matrix {
        assert_eq!(self.rows, self.cols);
        let mut acc = Matrix::identity(field, self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base);
            }
            base = base.mul(field, &base);
            e >>= 1;
        }
        acc
    }

    pub fn mat_vec(&self, field: &Field, v: &[Felt]) -> Vec<Felt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = field.zero();
                for j in 0..self.cols {
                    acc = field.add(acc, field.mul(self.get(i, j), v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn det(&self, field: &Field) -> Felt {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = m.rows;
        let mut det = field.one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !field.is_zero(m.get(r, col)));
            let Some(pr) = pivot else {
                return field.zero();
            };
            if pr != col {
                for j in 0..n {
                    let a = m.get(col, j);
                    let b = m.get(pr, j);
                    m.set(col, j, b);
                    m.set(pr, j, a);
                }
                det = field.neg(det);
            }
            let pv = m.get(col, col);
            det = field.mul(det, pv);
            let pinv = field.inv(pv).expect("pivot nonzero");
            for r in (col + 1)..n {
                let factor = field.mul(m.get(r, col), pinv);
                if field.is_zero(factor) {
                    continue;
                }
                for j in col..n {
                    let v = field.sub(m.get(r, j), field.mul(factor, m.get(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    /// In-place reduced row echelon form; returns pivot column indices.
    pub fn rref(&mut self, field: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| !field.is_zero(self.get(r, col))) else {
                continue;
            };
            if pr != row {
                for j in 0..self.cols {
                    let a = self.get(row, j);
                    let b = self.get(pr, j);
                    self.set(row, j, b);
                    self.set(pr, j, a);
                }
            }
            let pinv = field.inv(self.get(row, col)).expect("pivot nonzero");
            for j in 0..self.cols {
                let v = field.mul(self.get(row, j), pinv);
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if field.is_zero(factor) {
                    continue;
                }
                for j in 0..self.cols {
                    let v = field.sub(self.get(r, j), field.mul(factor, self.get(row, j)));
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self, field: &Field) -> usize {
        let mut m = self.clone();
        m.rref(field).len()
    }

    /// Basis of the right kernel `{v : M v = 0}`, one vector per free column,
    /// in ascending free-column order.
    pub fn kernel_basis(&self, field: &Field) -> Vec<Vec<Felt>> {
        let mut m = self.clone();
        let pivots = m.rref(field);
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = Some(r);
            }
            v
        };
        let mut basis = Vec::new();
        for j in 0..self.cols {
            if pivot_of_col[j].is_some() {
                continue;
            }
            let mut vec = vec![field.zero(); self.cols];
            vec[j] = field.one();
            for (r, &c) in pivots.iter().enumerate() {
                vec[c] = field.neg(m.get(r, j));
            }
            basis.push(vec);
        }
        basis
    }

    pub fn inverse(&self, field: &Field) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, field.one());
        }
        let pivots = aug.rref(field);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Matrix::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        Some(inv)
    }

    pub fn is_identity(&self, field: &Field) -> bool {
        self.rows == self.cols && *self == Matrix::identity(field, self.rows)
    }
}
