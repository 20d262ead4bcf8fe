use serde::{Deserialize, Serialize};

use super::LieAlgebraSpec;
use crate::scalar::{Matrix, Scalar};

/// A linear subspace of `T^ambient`, held as a basis of independent vectors.
///
/// Exact scalars keep the reduced-row-echelon basis; floats keep an
/// orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subspace<T> {
    ambient: usize,
    basis: Vec<Vec<T>>,
}

impl<T: Scalar> Subspace<T> {
    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Matrix::<T>::identity(ambient).row_vectors(),
        }
    }

    pub fn span(ambient: usize, vectors: &[Vec<T>]) -> Self {
        debug_assert!(vectors.iter().all(|v| v.len() == ambient));
        Self {
            ambient,
            basis: T::span_basis(vectors, ambient),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    pub fn contains(&self, v: &[T]) -> bool {
        if v.iter().all(Scalar::is_zero) {
            return true;
        }
        if self.is_full() {
            return true;
        }
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        T::span_basis(&rows, self.ambient).len() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Self) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Self::span(self.ambient, &rows)
    }

    /// Equal as subspaces.
    pub fn same_as(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other)
    }

    /// Linear functionals vanishing on the subspace.
    pub fn annihilator(&self) -> Vec<Vec<T>> {
        if self.basis.is_empty() {
            return Matrix::<T>::identity(self.ambient).row_vectors();
        }
        T::kernel(&Matrix::from_rows(self.basis.clone()))
    }

    /// `span{[x, y] : x ∈ self, y ∈ other}`.
    pub fn bracket(&self, algebra: &LieAlgebraSpec, other: &Self) -> Self {
        let mut rows = Vec::new();
        for x in &self.basis {
            for y in &other.basis {
                rows.push(algebra.bracket(x, y));
            }
        }
        Self::span(self.ambient, &rows)
    }

    pub fn is_subalgebra(&self, algebra: &LieAlgebraSpec) -> bool {
        self.contains_subspace(&self.bracket(algebra, self))
    }

    pub fn is_ideal(&self, algebra: &LieAlgebraSpec) -> bool {
        self.violating_bracket(algebra).is_none()
    }

    /// First `(i, j)` with `[e_i, b_j] ∉ self`, where `b_j` is the j-th basis vector.
    pub fn violating_bracket(&self, algebra: &LieAlgebraSpec) -> Option<(usize, usize)> {
        let n = algebra.dim();
        for i in 0..n {
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            for (j, b) in self.basis.iter().enumerate() {
                if !self.contains(&algebra.bracket(&e, b)) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// `{x : [x, h] ∈ self for all h ∈ self}`.
    pub fn normalizer(&self, algebra: &LieAlgebraSpec) -> Self {
        let n = algebra.dim();
        let ann = self.annihilator();
        if ann.is_empty() {
            return Self::full(n);
        }
        let mut rows = Vec::new();
        for h in &self.basis {
            // [x, h] = -ad(h) x, so f·[x, h] = 0 iff (f^T ad(h)) x = 0
            let ad = algebra.ad_matrix(h);
            for f in &ann {
                rows.push(ad.transpose().apply(f));
            }
        }
        if rows.is_empty() {
            return Self::full(n);
        }
        Self::span(n, &T::kernel(&Matrix::from_rows(rows)))
    }

    /// Lower central series of the subspace viewed as a subalgebra; true
    /// iff it reaches zero.
    pub fn is_nilpotent_subalgebra(&self, algebra: &LieAlgebraSpec) -> bool {
        let mut term = self.clone();
        for _ in 0..=self.ambient {
            if term.is_zero() {
                return true;
            }
            let next = self.bracket(algebra, &term);
            if next.dim() == term.dim() {
                return false;
            }
            term = next;
        }
        term.is_zero()
    }

    pub fn to_f64(&self) -> Subspace<f64> {
        let rows: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|v| v.iter().map(Scalar::to_f64).collect())
            .collect();
        Subspace::span(self.ambient, &rows)
    }
}
