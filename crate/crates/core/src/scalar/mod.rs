//! Scalars: exact multiquadratic field elements, rationals and floats behind
//! one small trait, plus the dense linear algebra the rest of the crate uses.

mod field;
mod matrix;

pub use field::{FieldElement, DEGREE, RADICANDS};
pub use matrix::{normalize_sign, primitive_integer_vector, rref, Matrix};

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Singular-value / residual cutoff for float subspaces.
pub const SUBSPACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Parse `p`, `p/q` or a decimal such as `0.25` into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            d => d.parse().ok()?,
        };
        let frac_part: BigInt = frac.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = BigRational::new(int_part * &scale + frac_part, scale);
        return Some(if neg { -mag } else { mag });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Field operations shared by the exact and floating-point backends.
///
/// Exact implementations decide zero exactly and use elimination for rank
/// and kernels; the `f64` implementation uses singular values with cutoff
/// [`SUBSPACE_TOL`].
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(n.into()))
    }

    fn rank(m: &Matrix<Self>) -> usize {
        rref(m).1.len()
    }

    /// Basis of the right null space `{x : m x = 0}`.
    fn kernel(m: &Matrix<Self>) -> Vec<Vec<Self>> {
        matrix::exact_kernel(m)
    }

    /// A basis of the span of `rows`.
    fn span_basis(rows: &[Vec<Self>], dim: usize) -> Vec<Vec<Self>> {
        matrix::exact_span_basis(rows, dim)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for FieldElement {
    const EXACT: bool = true;
    fn zero() -> Self {
        FieldElement::zero()
    }
    fn one() -> Self {
        FieldElement::one()
    }
    fn from_rational(q: &BigRational) -> Self {
        FieldElement::from_rational(q.clone())
    }
    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self.clone()
    }
    fn inverse(&self) -> Option<Self> {
        self.inv()
    }
    fn to_f64(&self) -> f64 {
        FieldElement::to_f64(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        self.abs() < SUBSPACE_TOL
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        (*self != 0.0).then(|| 1.0 / self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn rank(m: &Matrix<Self>) -> usize {
        matrix::float_rank(m)
    }
    fn kernel(m: &Matrix<Self>) -> Vec<Vec<Self>> {
        matrix::float_kernel(m)
    }
    fn span_basis(rows: &[Vec<Self>], dim: usize) -> Vec<Vec<Self>> {
        matrix::float_span_basis(rows, dim)
    }
}

/// Rank over Q of a list of equal-length rational vectors; 0 for an empty list.
pub fn qrank(vectors: &[Vec<BigRational>]) -> Result<usize, ScalarError> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let cols = first.len();
    if vectors.iter().any(|v| v.len() != cols) {
        return Err(ScalarError::Dimension("vectors of unequal length".into()));
    }
    Ok(BigRational::rank(&Matrix::from_rows(vectors.to_vec())))
}

/// Outcome of testing `{1, a_1, ..., a_n}` for Q-linear independence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QIndependence {
    Independent,
    /// Primitive integer coefficients `q_0..q_n` with `q_0 + Σ q_j a_j = 0`.
    Relation {
        #[serde(with = "crate::serde_util::bigints")]
        coefficients: Vec<BigInt>,
    },
}

impl QIndependence {
    pub fn is_independent(&self) -> bool {
        matches!(self, QIndependence::Independent)
    }
}

/// Decide whether `1, values[0], ..., values[n-1]` are Q-linearly independent.
///
/// The coordinate vectors (over the field basis) of `1` and every value form
/// the columns of an `8 × (n+1)` rational matrix; a relation is a kernel
/// vector. When several independent relations exist the one with the
/// smallest coefficients is returned, normalized so that the first nonzero
/// `q_j` with `j ≥ 1` is positive.
pub fn q_independent_with_one(values: &[FieldElement]) -> QIndependence {
    let cols = values.len() + 1;
    let mut m = Matrix::<BigRational>::zeros(DEGREE, cols);
    m[(0, 0)] = <BigRational as One>::one();
    for (j, v) in values.iter().enumerate() {
        for (i, c) in v.coeffs().iter().enumerate() {
            m[(i, j + 1)] = c.clone();
        }
    }
    let kernel = BigRational::kernel(&m);
    let best = kernel
        .iter()
        .map(|v| primitive_integer_vector(v))
        .min_by_key(|v| v.iter().map(|c| c.abs()).max().unwrap_or_default());
    match best {
        None => QIndependence::Independent,
        Some(mut q) => {
            if let Some(lead) = q[1..].iter().find(|c| !c.is_zero()) {
                if lead.is_negative() {
                    q.iter_mut().for_each(|c| *c = -c.clone());
                }
            }
            QIndependence::Relation { coefficients: q }
        }
    }
}

/// Evaluate `q_0 + Σ q_j a_j` exactly.
pub fn evaluate_relation(coefficients: &[BigInt], values: &[FieldElement]) -> FieldElement {
    let mut acc = FieldElement::from_rational(BigRational::from_integer(coefficients[0].clone()));
    for (q, a) in coefficients[1..].iter().zip(values) {
        acc += &a.scale(&BigRational::from_integer(q.clone()));
    }
    acc
}
