//! Structure-constant Lie algebras, subspaces of them, and the adjoint
//! representation of the bundled group models.

mod adjoint;
mod algebra;
mod subspace;

pub use adjoint::{
    adjoint, cartan_of_regular, characteristic_polynomial, eigenvalue_one_multiplicity, is_regular, AdjointMatrix,
    CartanReport, CartanSubalgebra, Regularity, EIGEN_TOL,
};
pub use algebra::{fixtures, CentralSeries, LieAlgebraSpec, Violation};
pub use subspace::Subspace;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(
        "not an ideal: bracket of basis vector e{basis_index} with ideal vector {ideal_index} leaves the subspace"
    )]
    NotIdeal { basis_index: usize, ideal_index: usize },
    #[error("element is not regular: eigenvalue 1 has multiplicity {multiplicity}, generic value is {generic}")]
    NotRegular { multiplicity: usize, generic: usize },
    #[error("{0}")]
    Group(String),
}
