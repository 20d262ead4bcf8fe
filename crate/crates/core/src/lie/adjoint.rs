//! The adjoint representation of the group models, regular elements and
//! their Cartan subalgebras.
//!
//! Regularity follows the eigenvalue-1 convention: `g` is regular when the
//! multiplicity of 1 as a root of the characteristic polynomial of `Ad(g)`
//! is the model's generic value, and the Cartan subalgebra is the
//! generalized eigenspace of `Ad(g)` at 1.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{LieError, Subspace};
use crate::group::{sl2_hat, sl2_vee, so3_hat, so3_vee, GroupElement, GroupError, GroupModel, ModelKind};
use crate::scalar::{FieldElement, Matrix, Scalar, SUBSPACE_TOL};

/// Tolerance for clustering float eigenvalues at 1.
pub const EIGEN_TOL: f64 = 1e-6;

/// `Ad(g)` in the model's algebra basis: exact for the nilpotent models.
#[derive(Clone, Debug, PartialEq)]
pub enum AdjointMatrix {
    Exact(Matrix<FieldElement>),
    Float(Matrix<f64>),
}

impl AdjointMatrix {
    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            AdjointMatrix::Exact(m) => m.to_f64(),
            AdjointMatrix::Float(m) => m.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AdjointMatrix::Exact(_))
    }
}

fn exp_nilpotent<T: Scalar>(ad: &Matrix<T>) -> Matrix<T> {
    let n = ad.rows();
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..n.max(1) {
        term = term.mul(ad).scale(&T::from_i64(k as i64).inverse().expect("k ≥ 1"));
        sum = sum.add(&term);
    }
    sum
}

/// Matrix of `Ad(g)`. For the nilpotent models `Ad(g) = exp(ad(log g))`,
/// a finite sum; for the matrix models column `i` is `g·Eᵢ·g⁻¹`.
pub fn adjoint(model: &GroupModel, g: &GroupElement) -> Result<AdjointMatrix, GroupError> {
    if g.model() != model.kind() {
        return Err(GroupError::ModelMismatch {
            left: model.kind(),
            right: g.model(),
        });
    }
    let n = model.dim();
    match model.kind() {
        ModelKind::Euclidean(_) | ModelKind::Torus(_) => Ok(AdjointMatrix::Exact(Matrix::identity(n))),
        ModelKind::Heisenberg | ModelKind::Filiform4 => {
            let x = model.log_exact(g)?;
            let ad = model.algebra().ad_matrix(&x);
            Ok(AdjointMatrix::Exact(exp_nilpotent(&ad)))
        }
        kind @ (ModelKind::Sl2r | ModelKind::So3) => {
            let (hat, vee): (fn(&[f64]) -> Matrix<f64>, fn(&Matrix<f64>) -> Vec<f64>) = if kind == ModelKind::Sl2r {
                (sl2_hat, sl2_vee)
            } else {
                (so3_hat, so3_vee)
            };
            let m = g.matrix().expect("matrix model");
            let inv = model.invert(g)?;
            let inv = inv.matrix().expect("matrix model");
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    vee(&m.mul(&hat(&e)).mul(inv))
                })
                .collect();
            Ok(AdjointMatrix::Float(Matrix::from_columns(&cols)))
        }
    }
}

/// Coefficients `c_0..c_n` (ascending) of `det(λI − m)` by Faddeev–LeVerrier.
pub fn characteristic_polynomial<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    let n = m.rows();
    let mut coeffs = vec![T::zero(); n + 1];
    coeffs[n] = T::one();
    let mut mk = Matrix::<T>::zeros(n, n);
    for k in 1..=n {
        let prev = coeffs[n - k + 1].clone();
        mk = m.mul(&mk).add(&Matrix::identity(n).scale(&prev));
        let amk = m.mul(&mk);
        let trace = (0..n).fold(T::zero(), |acc, i| acc.plus(&amk[(i, i)]));
        coeffs[n - k] = trace.times(&T::from_i64(k as i64).inverse().expect("k ≥ 1")).negated();
    }
    coeffs
}

/// Algebraic multiplicity of the eigenvalue 1 of `Ad(g)`.
///
/// Exact: number of vanishing low-order coefficients of the characteristic
/// polynomial of `Ad(g) − I`. Float: number of eigenvalues within
/// [`EIGEN_TOL`] of 1.
pub fn eigenvalue_one_multiplicity(ad: &AdjointMatrix) -> usize {
    match ad {
        AdjointMatrix::Exact(m) => {
            let shifted = m.sub(&Matrix::identity(m.rows()));
            characteristic_polynomial(&shifted)
                .iter()
                .take_while(|c| c.is_zero())
                .count()
        }
        AdjointMatrix::Float(m) => {
            let dm: DMatrix<f64> = m.to_nalgebra();
            dm.complex_eigenvalues()
                .iter()
                .filter(|z| ((z.re - 1.0).powi(2) + z.im.powi(2)).sqrt() < EIGEN_TOL)
                .count()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regularity {
    pub regular: bool,
    pub multiplicity: usize,
    pub generic: usize,
}

pub fn is_regular(model: &GroupModel, g: &GroupElement) -> Result<Regularity, GroupError> {
    let multiplicity = eigenvalue_one_multiplicity(&adjoint(model, g)?);
    let generic = model.kind().generic_multiplicity();
    Ok(Regularity {
        regular: multiplicity == generic,
        multiplicity,
        generic,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum CartanSubalgebra {
    Exact(Subspace<FieldElement>),
    Float(Subspace<f64>),
}

impl CartanSubalgebra {
    pub fn dim(&self) -> usize {
        match self {
            CartanSubalgebra::Exact(s) => s.dim(),
            CartanSubalgebra::Float(s) => s.dim(),
        }
    }

    pub fn to_f64(&self) -> Subspace<f64> {
        match self {
            CartanSubalgebra::Exact(s) => s.to_f64(),
            CartanSubalgebra::Float(s) => s.clone(),
        }
    }
}

/// The generalized eigenvalue-1 space of `Ad(g)` and the three defining
/// properties of a Cartan subalgebra, each checked separately.
#[derive(Clone, Debug)]
pub struct CartanReport {
    pub subspace: CartanSubalgebra,
    pub is_subalgebra: bool,
    pub is_nilpotent: bool,
    pub self_normalizing: bool,
}

impl CartanReport {
    pub fn is_cartan(&self) -> bool {
        self.is_subalgebra && self.is_nilpotent && self.self_normalizing
    }
}

fn properties<T: Scalar>(model: &GroupModel, s: &Subspace<T>) -> (bool, bool, bool) {
    let alg = model.algebra();
    (
        s.is_subalgebra(alg),
        s.is_nilpotent_subalgebra(alg),
        s.normalizer(alg).same_as(s),
    )
}

/// Cartan subalgebra of a regular element: `ker (Ad(g) − I)^n`.
///
/// Over floats the kernel is read off the SVD; its dimension is the
/// eigenvalue-1 multiplicity, so the right singular vectors of the
/// `multiplicity` smallest singular values are taken, and each must fall
/// below the subspace cutoff scaled by the matrix norm.
pub fn cartan_of_regular(model: &GroupModel, g: &GroupElement) -> Result<CartanReport, LieError> {
    let ad = adjoint(model, g).map_err(|e| LieError::Group(e.to_string()))?;
    let multiplicity = eigenvalue_one_multiplicity(&ad);
    let generic = model.kind().generic_multiplicity();
    if multiplicity != generic {
        return Err(LieError::NotRegular { multiplicity, generic });
    }
    let n = model.dim();
    let subspace = match ad {
        AdjointMatrix::Exact(m) => {
            let power = m.sub(&Matrix::identity(n)).pow(n as u32);
            CartanSubalgebra::Exact(Subspace::span(n, &FieldElement::kernel(&power)))
        }
        AdjointMatrix::Float(m) => {
            let power = m.sub(&Matrix::identity(n)).pow(n as u32).to_nalgebra();
            let svd = power.clone().svd(false, true);
            let v_t = svd.v_t.expect("requested V^T");
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
            let scale = power.norm().max(1.0);
            let vectors: Vec<Vec<f64>> = order[..multiplicity]
                .iter()
                .filter(|&&i| svd.singular_values[i] < SUBSPACE_TOL * scale || multiplicity == n)
                .map(|&i| v_t.row(i).iter().copied().collect())
                .collect();
            CartanSubalgebra::Float(Subspace::span(n, &vectors))
        }
    };
    let (is_subalgebra, is_nilpotent, self_normalizing) = match &subspace {
        CartanSubalgebra::Exact(s) => properties(model, s),
        CartanSubalgebra::Float(s) => properties(model, s),
    };
    Ok(CartanReport {
        subspace,
        is_subalgebra,
        is_nilpotent,
        self_normalizing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::NeighbourhoodSpec;
    use crate::seed::trial_rng;

    fn diag(model: &GroupModel, a: f64) -> GroupElement {
        model
            .element_from_matrix(Matrix::from_rows(vec![vec![a, 0.0], vec![0.0, 1.0 / a]]))
            .unwrap()
    }

    #[test]
    fn abelian_adjoint_is_identity() {
        let m = GroupModel::by_name("euclidean3").unwrap();
        let mut rng = trial_rng(2, 2);
        let g = m.haar_sample(&m.default_neighbourhood(), &mut rng).unwrap();
        assert_eq!(adjoint(&m, &g).unwrap(), AdjointMatrix::Exact(Matrix::identity(3)));
        let r = is_regular(&m, &g).unwrap();
        assert_eq!((r.multiplicity, r.regular), (3, true));
        let e = is_regular(&m, &m.identity()).unwrap();
        assert!(e.regular);
    }

    #[test]
    fn sl2_diagonal_adjoint() {
        let m = GroupModel::by_name("sl2r").unwrap();
        let g = diag(&m, 2.0);
        let ad = adjoint(&m, &g).unwrap().to_f64();
        // conjugation oracle: g E g⁻¹ = 4E, g H g⁻¹ = H, g F g⁻¹ = F/4
        let expected = Matrix::from_rows(vec![vec![4.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.25]]);
        assert!(ad.max_abs_diff(&expected) < 1e-14);
        let r = is_regular(&m, &g).unwrap();
        assert_eq!((r.multiplicity, r.regular), (1, true));
        let e = is_regular(&m, &m.identity()).unwrap();
        assert_eq!((e.multiplicity, e.regular), (3, false));
    }

    #[test]
    fn filiform_adjoint_is_unipotent() {
        let m = GroupModel::by_name("filiform4").unwrap();
        let g = m.element_from_ratios(&[(1, 1), (0, 1), (0, 1), (0, 1)]).unwrap();
        let AdjointMatrix::Exact(ad) = adjoint(&m, &g).unwrap() else {
            panic!("exact expected")
        };
        for i in 0..4 {
            assert_eq!(ad[(i, i)], FieldElement::one());
            for j in i + 1..4 {
                // lower triangular in the basis A, B, C, D: Ad(g) pushes down the series
                assert!(ad[(i, j)].is_zero());
            }
        }
        // conjugation oracle: g exp(tY) g⁻¹ = exp(t Ad(g) Y)
        let y = vec![
            FieldElement::from_int(0),
            FieldElement::from_int(1),
            FieldElement::from_int(2),
            FieldElement::from_int(-1),
        ];
        let lhs = {
            let h = m.exp_exact(&y).unwrap();
            let gh = m.multiply(&g, &h).unwrap();
            m.multiply(&gh, &m.invert(&g).unwrap()).unwrap()
        };
        let rhs = m.exp_exact(&ad.apply(&y)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cartan_examples() {
        let sl = GroupModel::by_name("sl2r").unwrap();
        let rep = cartan_of_regular(&sl, &diag(&sl, 2.0)).unwrap();
        assert!(rep.is_cartan());
        let s = rep.subspace.to_f64();
        assert_eq!(s.dim(), 1);
        assert!(s.contains(&[0.0, 1.0, 0.0]));

        let so = GroupModel::by_name("so3").unwrap();
        let r = so.exp_chart(&[0.0, 0.0, 1.0]).unwrap();
        let rep = cartan_of_regular(&so, &r).unwrap();
        assert!(rep.is_cartan());
        let s = rep.subspace.to_f64();
        assert_eq!(s.dim(), 1);
        assert!(s.contains(&[0.0, 0.0, 1.0]));

        let eu = GroupModel::by_name("euclidean2").unwrap();
        let rep = cartan_of_regular(&eu, &eu.identity()).unwrap();
        assert_eq!(rep.subspace.dim(), 2);
        assert!(rep.is_cartan());

        assert!(matches!(
            cartan_of_regular(&sl, &sl.identity()),
            Err(LieError::NotRegular { .. })
        ));
    }

    #[test]
    fn adjoint_is_a_homomorphism() {
        for name in ["heisenberg", "filiform4", "sl2r", "so3"] {
            let m = GroupModel::by_name(name).unwrap();
            let w: NeighbourhoodSpec = m.default_neighbourhood();
            let mut rng = trial_rng(9, 0);
            for _ in 0..20 {
                let g = m.haar_sample(&w, &mut rng).unwrap();
                let h = m.haar_sample(&w, &mut rng).unwrap();
                let gh = m.multiply(&g, &h).unwrap();
                let lhs = adjoint(&m, &gh).unwrap();
                match (adjoint(&m, &g).unwrap(), adjoint(&m, &h).unwrap(), lhs) {
                    (AdjointMatrix::Exact(a), AdjointMatrix::Exact(b), AdjointMatrix::Exact(c)) => {
                        assert_eq!(a.mul(&b), c)
                    }
                    (a, b, c) => assert!(a.to_f64().mul(&b.to_f64()).max_abs_diff(&c.to_f64()) < 1e-9),
                }
            }
        }
    }

    #[test]
    fn characteristic_polynomial_of_diagonal() {
        let m = Matrix::from_rows(vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
        let c = characteristic_polynomial(&m);
        assert_eq!(c, vec![6.0, -5.0, 1.0]);
    }
}
