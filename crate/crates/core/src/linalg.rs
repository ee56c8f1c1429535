//! Small dense matrices over a [`Scalar`].
//!
//! Game graphs are small (a few hundred nodes at most), so a row-major dense
//! representation with an LU solve is all the solvers need.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let n = rows.len();
        Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// `selfᵀ x` without materialising the transpose.
    pub fn transpose_mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                if !a.is_zero() {
                    out[j] = out[j].clone() + a.clone() * xi.clone();
                }
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::<S>::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix<S> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Sub-matrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix<S> {
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn scale(&self, factor: &S) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.clone() * factor.clone()).collect(),
        }
    }

    pub fn row_sums(&self) -> Vec<S> {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(S::zero(), |acc, v| acc + v.clone()))
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Matrix<S>) -> S {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |acc, (a, b)| S::max_of(acc, (a.clone() - b.clone()).abs()))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Returned when elimination meets a zero pivot column.
#[derive(Debug, Clone, PartialEq)]
pub struct Singular {
    pub column: usize,
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
///
/// `B` may hold several right-hand sides. For exact scalars the pivot choice
/// is irrelevant to accuracy but keeps the code path identical.
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>, Singular> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "square system required");
    assert_eq!(b.rows(), n);
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = x.cols();

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| {
                lu[(p, col)]
                    .abs()
                    .partial_cmp(&lu[(q, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if lu[(pivot, col)].is_zero() {
            return Err(Singular { column: col });
        }
        if pivot != col {
            for j in 0..n {
                lu.data.swap(pivot * n + j, col * n + j);
            }
            for j in 0..m {
                x.data.swap(pivot * m + j, col * m + j);
            }
        }
        let diag = lu[(col, col)].clone();
        for r in col + 1..n {
            if lu[(r, col)].is_zero() {
                continue;
            }
            let factor = lu[(r, col)].clone() / diag.clone();
            for j in col..n {
                let v = lu[(col, j)].clone();
                if !v.is_zero() {
                    lu[(r, j)] = lu[(r, j)].clone() - factor.clone() * v;
                }
            }
            for j in 0..m {
                let v = x[(col, j)].clone();
                if !v.is_zero() {
                    x[(r, j)] = x[(r, j)].clone() - factor.clone() * v;
                }
            }
        }
    }

    for col in (0..n).rev() {
        let diag = lu[(col, col)].clone();
        for j in 0..m {
            let mut acc = x[(col, j)].clone();
            for k in col + 1..n {
                let a = &lu[(col, k)];
                if !a.is_zero() {
                    acc = acc - a.clone() * x[(k, j)].clone();
                }
            }
            x[(col, j)] = acc / diag.clone();
        }
    }
    Ok(x)
}

/// Solves `A x = b` for a single right-hand side.
pub fn solve_vec<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>, Singular> {
    let rhs = Matrix::from_rows(b.iter().map(|v| vec![v.clone()]).collect());
    let rhs = if b.is_empty() { Matrix::zeros(0, 1) } else { rhs };
    solve(a, &rhs).map(|x| x.column(0))
}

pub fn sup_norm_diff<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| S::max_of(acc, (x.clone() - y.clone()).abs()))
}
