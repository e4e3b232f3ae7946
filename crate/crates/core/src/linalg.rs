//! Small dense linear algebra: Cholesky for SPD systems and Householder QR
//! for least squares. Matrices are square or tall and stored row-major.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix buffer size");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T A v`
    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.mul_vec(v))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    lower: Matrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// Fails with a conditioning error when a pivot is not safely positive.
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::input("cholesky requires a square matrix"));
        }
        let scale = (0..n).map(|i| a[(i, i)].abs()).fold(T::zero(), T::max);
        let floor = scale * T::epsilon() * T::from_count(n.max(1)) * T::lit(16.0);
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > floor) || !d.is_finite() {
                return Err(Error::conditioning(format!(
                    "matrix is not numerically positive definite (pivot {j} = {d})"
                )));
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lower.rows();
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s = s - l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }

    /// `b^T A^{-1} b`, computed as `|L^{-1} b|^2`.
    pub fn inv_quad_form(&self, b: &[T]) -> T {
        let n = self.lower.rows();
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        dot(&y, &y)
    }
}

/// Least-squares solution of the tall system `A x ~= b` by Householder QR.
///
/// Rank deficiency (a diagonal entry of `R` negligible relative to the
/// largest) is reported as a conditioning error.
pub fn least_squares<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::input("right-hand side length does not match rows"));
    }
    if m < n {
        return Err(Error::conditioning(format!(
            "underdetermined system: {m} rows for {n} unknowns"
        )));
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let norm = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<T>().sqrt();
        if norm == T::zero() {
            diag.push(T::zero());
            continue;
        }
        let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
        // v = x - alpha e1, stored in column k below the diagonal
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 > T::zero() {
            for j in k..n {
                let s = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<T>();
                let f = T::two() * s / vnorm2;
                for i in k..m {
                    r[(i, j)] = r[(i, j)] - f * v[i - k];
                }
            }
            let s = (k..m).map(|i| v[i - k] * rhs[i]).sum::<T>();
            let f = T::two() * s / vnorm2;
            for i in k..m {
                rhs[i] = rhs[i] - f * v[i - k];
            }
        }
        diag.push(r[(k, k)]);
    }
    let largest = diag.iter().fold(T::zero(), |acc, d| acc.max(d.abs()));
    let tol = largest * T::epsilon() * T::from_count(m.max(n)) * T::lit(10.0);
    for (k, d) in diag.iter().enumerate() {
        if d.abs() <= tol {
            return Err(Error::conditioning(format!(
                "design matrix is rank deficient (column {k})"
            )));
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..n {
            s = s - r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    Ok(x)
}

/// Design matrix with a leading constant-1 column.
pub fn design_with_intercept<T: Real>(features: impl Iterator<Item = impl AsRef<[T]>>, dim: usize) -> Matrix<T> {
    let mut data = Vec::new();
    let mut rows = 0;
    for x in features {
        data.push(T::one());
        data.extend_from_slice(x.as_ref());
        rows += 1;
    }
    Matrix::from_rows(rows, dim + 1, data)
}

/// `[1, x...]`
pub fn augment<T: Real>(x: &[T]) -> Vec<T> {
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push(T::one());
    v.extend_from_slice(x);
    v
}
