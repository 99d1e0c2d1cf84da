//! Dense matrices over `K`.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::field::{Fe, Field};
use crate::poly::MultiPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Fe>>) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, f: &Field, rng: &mut R) -> Matrix {
        Matrix { rows, cols, data: (0..rows * cols).map(|_| f.random(rng)).collect() }
    }

    /// Uniform entries, rejected until invertible. Returns the matrix and its inverse.
    pub fn random_invertible<R: Rng + ?Sized>(n: usize, f: &Field, rng: &mut R) -> (Matrix, Matrix) {
        loop {
            let m = Matrix::random(n, n, f, rng);
            if let Some(inv) = m.inverse(f) {
                return (m, inv);
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, o: &Matrix, f: &Field) -> Matrix {
        assert_eq!(self.cols, o.rows);
        let mut r = Matrix::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let v = f.add(r.get(i, j), f.mul(a, o.get(k, j)));
                    r.set(i, j, v);
                }
            }
        }
        r
    }

    pub fn apply(&self, v: &[Fe], f: &Field) -> Vec<Fe> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Fe::ZERO, |acc, (&a, &x)| f.add(acc, f.mul(a, x))))
            .collect()
    }

    /// Gauss-Jordan inverse; `None` if singular or non-square.
    pub fn inverse(&self, f: &Field) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if piv != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(piv, j));
                    a.set(col, j, y);
                    a.set(piv, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(piv, j));
                    inv.set(col, j, y);
                    inv.set(piv, j, x);
                }
            }
            let s = f.inv(a.get(col, col))?;
            for j in 0..n {
                a.set(col, j, f.mul(a.get(col, j), s));
                inv.set(col, j, f.mul(inv.get(col, j), s));
            }
            for r in 0..n {
                let factor = a.get(r, col);
                if r == col || factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, f.sub(a.get(r, j), f.mul(factor, a.get(col, j))));
                    inv.set(r, j, f.sub(inv.get(r, j), f.mul(factor, inv.get(col, j))));
                }
            }
        }
        Some(inv)
    }

    /// Row `i` as a homogeneous linear form in `cols` variables.
    pub fn row_form(&self, i: usize) -> MultiPoly {
        MultiPoly::linear(self.cols, self.row(i), Fe::ZERO)
    }

    /// All rows as linear forms.
    pub fn linear_forms(&self) -> Vec<MultiPoly> {
        (0..self.rows).map(|i| self.row_form(i)).collect()
    }
}
