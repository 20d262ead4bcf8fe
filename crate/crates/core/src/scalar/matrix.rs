use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Scalar, SUBSPACE_TOL};

/// Dense row-major matrix over any [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Matrix<T> {
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

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<T>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> Vec<T> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() && T::EXACT {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = a.times(&rhs[(k, j)]);
                    out[(i, j)] = out[(i, j)].plus(&t);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "shape mismatch in apply");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, j| acc.plus(&self[(i, j)].times(&v[j]))))
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a.plus(b))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a.minus(b))
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.times(s)).collect(),
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::identity(self.rows);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Inverse by Gauss-Jordan; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = T::one();
        }
        let (red, pivots) = rref(&aug);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = red[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }
}

impl Matrix<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out[(r, c)] = m[(r, c)];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Reduced row echelon form and pivot columns.
///
/// Pivots are the first nonzero entry in a column for exact scalars and the
/// largest-magnitude entry for floats.
pub fn rref<T: Scalar>(m: &Matrix<T>) -> (Matrix<T>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let candidate = if T::EXACT {
            (row..a.rows).find(|&r| !a[(r, col)].is_zero())
        } else {
            (row..a.rows)
                .filter(|&r| !a[(r, col)].is_zero())
                .max_by(|&x, &y| a[(x, col)].to_f64().abs().total_cmp(&a[(y, col)].to_f64().abs()))
        };
        let Some(p) = candidate else { continue };
        if p != row {
            for c in 0..a.cols {
                a.data.swap(p * a.cols + c, row * a.cols + c);
            }
        }
        let inv = a[(row, col)].inverse().expect("nonzero pivot");
        for c in col..a.cols {
            a[(row, c)] = a[(row, c)].times(&inv);
        }
        for r in 0..a.rows {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let factor = a[(r, col)].clone();
            for c in col..a.cols {
                let t = factor.times(&a[(row, c)]);
                a[(r, c)] = a[(r, c)].minus(&t);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

pub(super) fn exact_kernel<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let (red, pivots) = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); m.cols];
            v[f] = T::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = red[(i, f)].negated();
            }
            v
        })
        .collect()
}

pub(super) fn exact_span_basis<T: Scalar>(rows: &[Vec<T>], dim: usize) -> Vec<Vec<T>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let (red, pivots) = rref(&Matrix::from_rows(rows.to_vec()));
    debug_assert_eq!(red.cols(), dim);
    (0..pivots.len()).map(|r| red.row(r)).collect()
}

fn singular_values(m: &Matrix<f64>) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    m.to_nalgebra().singular_values().iter().copied().collect()
}

pub(super) fn float_rank(m: &Matrix<f64>) -> usize {
    singular_values(m).into_iter().filter(|s| *s >= SUBSPACE_TOL).count()
}

/// Right singular vectors with singular value below [`SUBSPACE_TOL`].
pub(super) fn float_kernel(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    let n = m.cols();
    if n == 0 {
        return Vec::new();
    }
    // pad to at least n rows so the SVD exposes all n right singular vectors
    let rows = m.rows().max(n);
    let mut padded = DMatrix::<f64>::zeros(rows, n);
    for r in 0..m.rows() {
        for c in 0..n {
            padded[(r, c)] = m[(r, c)];
        }
    }
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < SUBSPACE_TOL)
        .map(|(i, _)| v_t.row(i).iter().copied().collect())
        .collect()
}

/// Orthonormal basis of the span, by modified Gram-Schmidt with one
/// reorthogonalization pass. A vector contributes only if its residual
/// exceeds the cutoff relative to its own length.
pub(super) fn float_span_basis(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in rows {
        debug_assert_eq!(v.len(), dim);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // below this every float vector here is rounding noise
        if !(norm > 1e-12) || !norm.is_finite() {
            continue;
        }
        let mut r: Vec<f64> = v.iter().map(|x| x / norm).collect();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if rn > SUBSPACE_TOL {
            basis.push(r.into_iter().map(|x| x / rn).collect());
        }
        if basis.len() == dim {
            break;
        }
    }
    basis
}

/// Scale a rational vector to a primitive integer vector (gcd 1).
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|q| (q * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Sign-normalize so the first nonzero entry is positive.
pub fn normalize_sign(v: &mut [BigInt]) {
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        v.iter_mut().for_each(|x| *x = -x.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldElement;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exact_inverse_round_trip() {
        let m = Matrix::from_rows(vec![vec![q(2, 1), q(1, 1)], vec![q(1, 3), q(1, 1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(2));
        let singular = Matrix::from_rows(vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn field_kernel_is_exact() {
        let r2: FieldElement = "sqrt2".parse().unwrap();
        // columns (1, √2) and (√2, 2) are proportional over the field
        let m = Matrix::from_rows(vec![
            vec![FieldElement::one(), r2.clone()],
            vec![r2.clone(), FieldElement::from_int(2)],
        ]);
        let ker = FieldElement::kernel(&m);
        assert_eq!(ker.len(), 1);
        assert!(m.apply(&ker[0]).iter().all(FieldElement::is_zero));
    }

    #[test]
    fn float_kernel_and_rank() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert_eq!(f64::rank(&m), 1);
        let ker = f64::kernel(&m);
        assert_eq!(ker.len(), 2);
        for v in ker {
            assert!(m.apply(&v).iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn primitive_vector() {
        let v = primitive_integer_vector(&[q(-1, 2), q(1, 1), q(0, 1)]);
        assert_eq!(v, vec![BigInt::from(-1), BigInt::from(2), BigInt::from(0)]);
    }
}
