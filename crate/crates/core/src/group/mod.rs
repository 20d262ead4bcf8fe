//! Concrete connected Lie groups: vector groups, tori, the Heisenberg group,
//! the 4-dimensional filiform group, SL(2,R) and SO(3).
//!
//! The nilpotent models (and tori) carry exact coordinates in Q(√2,√3,√5);
//! their laws are polynomial, so every product stays in the field. The two
//! matrix models are float-only.

mod charts;
mod haar;
pub mod laws;

pub use charts::{op_norm, sl2_chart_density, sl2_hat, sl2_vee, so3_angle, so3_hat, so3_vee};
pub use haar::{Chart, NeighbourhoodSpec, GRID_BITS, MAX_PROPOSALS};

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::{fixtures, LieAlgebraSpec};
use crate::scalar::{FieldElement, Matrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("model mismatch: {left} vs {right}")]
    ModelMismatch { left: ModelKind, right: ModelKind },
    #[error("invalid element for {model}: {reason}")]
    InvalidElement { model: ModelKind, reason: String },
    #[error("{model}: element at distance {distance:.3e} is outside the log domain (radius {radius})")]
    OutsideLogDomain {
        model: ModelKind,
        distance: f64,
        radius: f64,
    },
    #[error("rejection budget exhausted after {proposals} proposals ({accepted} accepted, rate {rate:.2e})")]
    RejectionBudget {
        proposals: usize,
        accepted: usize,
        rate: f64,
    },
    #[error("invalid neighbourhood: {0}")]
    Neighbourhood(String),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("{model} does not support {operation}")]
    Unsupported { model: ModelKind, operation: &'static str },
}

/// Which group. Serialized by name: `euclidean2`, `torus3`, `heisenberg`,
/// `filiform4`, `sl2r`, `so3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelKind {
    Euclidean(usize),
    Torus(usize),
    Heisenberg,
    Filiform4,
    Sl2r,
    So3,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Euclidean(n) => write!(f, "euclidean{n}"),
            ModelKind::Torus(n) => write!(f, "torus{n}"),
            ModelKind::Heisenberg => f.write_str("heisenberg"),
            ModelKind::Filiform4 => f.write_str("filiform4"),
            ModelKind::Sl2r => f.write_str("sl2r"),
            ModelKind::So3 => f.write_str("so3"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = GroupError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let unknown = || GroupError::UnknownModel(s.to_string());
        let dim = |rest: &str| -> Result<usize, GroupError> {
            match rest.trim_start_matches(['-', '_']).parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(unknown()),
            }
        };
        Ok(match lower.as_str() {
            "heisenberg" | "heis" => ModelKind::Heisenberg,
            "filiform4" | "filiform" => ModelKind::Filiform4,
            "sl2r" | "sl2" | "sl(2,r)" => ModelKind::Sl2r,
            "so3" | "so(3)" => ModelKind::So3,
            _ => {
                if let Some(rest) = lower.strip_prefix("euclidean") {
                    ModelKind::Euclidean(dim(rest)?)
                } else if let Some(rest) = lower.strip_prefix("torus") {
                    ModelKind::Torus(dim(rest)?)
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for ModelKind {
    type Error = GroupError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl ModelKind {
    pub fn dim(self) -> usize {
        match self {
            ModelKind::Euclidean(n) | ModelKind::Torus(n) => n,
            ModelKind::Heisenberg | ModelKind::Sl2r | ModelKind::So3 => 3,
            ModelKind::Filiform4 => 4,
        }
    }

    /// Exact coordinates in the multiquadratic field.
    pub fn is_exact(self) -> bool {
        !matches!(self, ModelKind::Sl2r | ModelKind::So3)
    }

    pub fn is_nilpotent(self) -> bool {
        self.is_exact()
    }

    pub fn is_abelian(self) -> bool {
        matches!(self, ModelKind::Euclidean(_) | ModelKind::Torus(_))
    }

    /// Dimension of the abelianization `G/G'` (nilpotent models).
    pub fn abelianization_dim(self) -> usize {
        match self {
            ModelKind::Heisenberg | ModelKind::Filiform4 => 2,
            other => other.dim(),
        }
    }

    /// Generic (minimal) multiplicity of the eigenvalue 1 of `Ad(g)`.
    ///
    /// Nilpotent groups have unipotent `Ad`, so the value is the dimension.
    /// For SL(2,R) and SO(3) the generic element has a one-dimensional
    /// centralizer; the constant was confirmed as the minimum over a
    /// 10⁴-sample Haar draw (see the regularity tests).
    pub fn generic_multiplicity(self) -> usize {
        match self {
            ModelKind::Sl2r | ModelKind::So3 => 1,
            other => other.dim(),
        }
    }

    /// Radius of the log chart: `∞` for the nilpotent models, rotation angle
    /// π for SO(3), operator-norm distance 0.5 from `I` for SL(2,R).
    pub fn injectivity_radius(self) -> f64 {
        match self {
            ModelKind::Sl2r => 0.5,
            ModelKind::So3 => std::f64::consts::PI,
            _ => f64::INFINITY,
        }
    }

    fn matrix_size(self) -> usize {
        match self {
            ModelKind::Sl2r => 2,
            _ => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Payload {
    Coords(Vec<FieldElement>),
    Matrix(Matrix<f64>),
}

/// An element of one of the models: exact coordinates or a float matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ElementRepr", try_from = "ElementRepr")]
pub struct GroupElement {
    model: ModelKind,
    payload: Payload,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<FieldElement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
}

impl From<GroupElement> for ElementRepr {
    fn from(g: GroupElement) -> Self {
        match g.payload {
            Payload::Coords(c) => ElementRepr {
                model: g.model,
                coords: Some(c),
                matrix: None,
            },
            Payload::Matrix(m) => ElementRepr {
                model: g.model,
                coords: None,
                matrix: Some(m.row_vectors()),
            },
        }
    }
}

impl TryFrom<ElementRepr> for GroupElement {
    type Error = GroupError;
    fn try_from(r: ElementRepr) -> Result<Self, Self::Error> {
        let model = GroupModel::new(r.model)?;
        match (r.coords, r.matrix) {
            (Some(c), None) => model.element(c),
            (None, Some(rows)) => {
                let n = r.model.matrix_size();
                if rows.len() != n || rows.iter().any(|row| row.len() != n) {
                    return Err(model.invalid("matrix has the wrong shape"));
                }
                model.element_from_matrix(Matrix::from_rows(rows))
            }
            _ => Err(model.invalid("expected exactly one of coords / matrix")),
        }
    }
}

impl GroupElement {
    pub fn model(&self) -> ModelKind {
        self.model
    }

    /// Exact coordinates (exact models only).
    pub fn coords(&self) -> Option<&[FieldElement]> {
        match &self.payload {
            Payload::Coords(c) => Some(c),
            Payload::Matrix(_) => None,
        }
    }

    /// Matrix (SL(2,R) and SO(3) only).
    pub fn matrix(&self) -> Option<&Matrix<f64>> {
        match &self.payload {
            Payload::Matrix(m) => Some(m),
            Payload::Coords(_) => None,
        }
    }

    /// Coordinates as floats, or matrix entries in row-major order.
    pub fn to_f64(&self) -> Vec<f64> {
        match &self.payload {
            Payload::Coords(c) => c.iter().map(FieldElement::to_f64).collect(),
            Payload::Matrix(m) => m.entries().to_vec(),
        }
    }

    fn exact(&self) -> &[FieldElement] {
        self.coords().expect("exact payload")
    }

    fn mat(&self) -> &Matrix<f64> {
        self.matrix().expect("matrix payload")
    }
}

/// A group model together with its Lie algebra.
#[derive(Clone, Debug)]
pub struct GroupModel {
    kind: ModelKind,
    algebra: LieAlgebraSpec,
}

impl GroupModel {
    pub fn new(kind: ModelKind) -> Result<Self, GroupError> {
        let algebra = match kind {
            ModelKind::Euclidean(0) | ModelKind::Torus(0) => return Err(GroupError::UnknownModel(kind.to_string())),
            ModelKind::Euclidean(n) | ModelKind::Torus(n) => LieAlgebraSpec::abelian(n),
            ModelKind::Heisenberg => fixtures::heisenberg(),
            ModelKind::Filiform4 => fixtures::filiform4(),
            ModelKind::Sl2r => fixtures::sl2(),
            ModelKind::So3 => fixtures::so3(),
        };
        debug_assert_eq!(algebra.dim(), kind.dim());
        Ok(Self { kind, algebra })
    }

    pub fn by_name(name: &str) -> Result<Self, GroupError> {
        Self::new(name.parse()?)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn algebra(&self) -> &LieAlgebraSpec {
        &self.algebra
    }

    fn invalid(&self, reason: impl Into<String>) -> GroupError {
        GroupError::InvalidElement {
            model: self.kind,
            reason: reason.into(),
        }
    }

    fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if g.model != self.kind {
            return Err(GroupError::ModelMismatch {
                left: self.kind,
                right: g.model,
            });
        }
        Ok(())
    }

    fn coords_element(&self, coords: Vec<FieldElement>) -> GroupElement {
        GroupElement {
            model: self.kind,
            payload: Payload::Coords(coords),
        }
    }

    fn matrix_element(&self, m: Matrix<f64>) -> GroupElement {
        GroupElement {
            model: self.kind,
            payload: Payload::Matrix(m),
        }
    }

    /// Element from exact coordinates; torus coordinates must lie in `[0, 1)`.
    pub fn element(&self, coords: Vec<FieldElement>) -> Result<GroupElement, GroupError> {
        if !self.kind.is_exact() {
            return Err(self.invalid("matrix model needs a matrix payload"));
        }
        if coords.len() != self.dim() {
            return Err(self.invalid(format!("expected {} coordinates, got {}", self.dim(), coords.len())));
        }
        if matches!(self.kind, ModelKind::Torus(_)) && coords.iter().any(|c| *c != c.fract()) {
            return Err(self.invalid("torus coordinates must lie in [0, 1)"));
        }
        Ok(self.coords_element(coords))
    }

    /// Element from small integer / rational coordinates, e.g. `&[(1, 1), (0, 1)]`.
    pub fn element_from_ratios(&self, coords: &[(i64, i64)]) -> Result<GroupElement, GroupError> {
        self.element(coords.iter().map(|&(n, d)| FieldElement::from_ratio(n, d)).collect())
    }

    /// Torus element from any real lift (reduced into `[0, 1)`).
    pub fn torus_element(&self, lift: &[FieldElement]) -> Result<GroupElement, GroupError> {
        self.element(lift.iter().map(FieldElement::fract).collect())
    }

    /// Element from a matrix: determinant 1 (SL(2,R)) or orthogonal with
    /// determinant 1 (SO(3)), both to within 1e-12 relative.
    pub fn element_from_matrix(&self, m: Matrix<f64>) -> Result<GroupElement, GroupError> {
        let n = match self.kind {
            ModelKind::Sl2r => 2,
            ModelKind::So3 => 3,
            _ => return Err(self.invalid("coordinate model needs exact coordinates")),
        };
        if m.rows() != n || m.cols() != n {
            return Err(self.invalid("matrix has the wrong shape"));
        }
        if m.entries().iter().any(|x| !x.is_finite()) {
            return Err(self.invalid("non-finite entry"));
        }
        let scale = m.entries().iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let det = m.to_nalgebra().determinant();
        if (det - 1.0).abs() > 1e-12 * scale.powi(n as i32) {
            return Err(self.invalid(format!("determinant {det} is not 1")));
        }
        if self.kind == ModelKind::So3 {
            let gram = m.transpose().mul(&m);
            let err = gram.max_abs_diff(&Matrix::identity(3));
            if err > 1e-12 {
                return Err(self.invalid(format!("not orthogonal (error {err:.1e})")));
            }
        }
        Ok(self.matrix_element(m))
    }

    pub fn identity(&self) -> GroupElement {
        if self.kind.is_exact() {
            self.coords_element(vec![FieldElement::zero(); self.dim()])
        } else {
            self.matrix_element(Matrix::identity(self.kind.matrix_size()))
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match self.kind {
            ModelKind::Sl2r | ModelKind::So3 => self.matrix_element(a.mat().mul(b.mat())),
            ModelKind::Torus(_) => {
                self.coords_element(a.exact().iter().zip(b.exact()).map(|(x, y)| (x + y).fract()).collect())
            }
            kind => self.coords_element(laws::multiply(kind, a.exact(), b.exact())),
        })
    }

    pub fn invert(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        Ok(match self.kind {
            ModelKind::Sl2r => {
                let m = a.mat();
                self.matrix_element(Matrix::from_rows(vec![
                    vec![m[(1, 1)], -m[(0, 1)]],
                    vec![-m[(1, 0)], m[(0, 0)]],
                ]))
            }
            ModelKind::So3 => self.matrix_element(a.mat().transpose()),
            ModelKind::Torus(_) => self.coords_element(a.exact().iter().map(|x| (-x.clone()).fract()).collect()),
            kind => self.coords_element(laws::invert(kind, a.exact())),
        })
    }

    /// `ζ_g(h) = g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        let gh = self.multiply(g, h)?;
        let ghg = self.multiply(&gh, &self.invert(g)?)?;
        self.multiply(&ghg, &self.invert(h)?)
    }

    /// `g^k` by repeated squaring.
    pub fn power(&self, g: &GroupElement, k: i64) -> Result<GroupElement, GroupError> {
        let base = if k < 0 { self.invert(g)? } else { g.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.multiply(&acc, &sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = self.multiply(&sq, &sq)?;
            }
        }
        Ok(acc)
    }

    /// Evaluate a word of signed 1-based generator indices (`-2` is `g₂⁻¹`).
    pub fn evaluate_word(&self, gens: &[GroupElement], word: &[i32]) -> Result<GroupElement, GroupError> {
        let mut acc = self.identity();
        for &letter in word {
            let idx = letter.unsigned_abs() as usize;
            assert!(idx >= 1 && idx <= gens.len(), "letter {letter} out of range");
            let g = &gens[idx - 1];
            let factor = if letter < 0 { self.invert(g)? } else { g.clone() };
            acc = self.multiply(&acc, &factor)?;
        }
        Ok(acc)
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        match &g.payload {
            Payload::Coords(c) => c.iter().all(FieldElement::is_zero),
            Payload::Matrix(m) => m.max_abs_diff(&Matrix::identity(m.rows())) == 0.0,
        }
    }

    /// Distance to the identity: Euclidean norm of coordinates (torus:
    /// distance to the nearest lattice point), Frobenius norm of `g − I` for
    /// matrix models.
    pub fn distance_to_identity(&self, g: &GroupElement) -> f64 {
        match (&g.payload, self.kind) {
            (Payload::Coords(c), ModelKind::Torus(_)) => c
                .iter()
                .map(|x| {
                    let t = x.to_f64();
                    let d = t.min(1.0 - t);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            (Payload::Coords(c), _) => c.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt(),
            (Payload::Matrix(m), _) => m
                .sub(&Matrix::identity(m.rows()))
                .entries()
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Exact exponential chart (exact models).
    pub fn exp_exact(&self, v: &[FieldElement]) -> Result<GroupElement, GroupError> {
        match self.kind {
            ModelKind::Sl2r | ModelKind::So3 => Err(GroupError::Unsupported {
                model: self.kind,
                operation: "exact charts",
            }),
            ModelKind::Torus(_) => self.torus_element(v),
            kind => self.element(laws::exp(kind, v)),
        }
    }

    /// Exact logarithm (exact models). Torus logs are taken in `[-1/2, 1/2)`.
    pub fn log_exact(&self, g: &GroupElement) -> Result<Vec<FieldElement>, GroupError> {
        self.check(g)?;
        match self.kind {
            ModelKind::Sl2r | ModelKind::So3 => Err(GroupError::Unsupported {
                model: self.kind,
                operation: "exact charts",
            }),
            ModelKind::Torus(_) => {
                let half = FieldElement::from_ratio(1, 2);
                Ok(g.exact()
                    .iter()
                    .map(|x| {
                        if *x >= half {
                            x - &FieldElement::one()
                        } else {
                            x.clone()
                        }
                    })
                    .collect())
            }
            kind => Ok(laws::log(kind, g.exact())),
        }
    }

    /// Exponential chart from float algebra coordinates. Exact models store
    /// the binary expansion of the floats exactly.
    pub fn exp_chart(&self, v: &[f64]) -> Result<GroupElement, GroupError> {
        if v.len() != self.dim() || v.iter().any(|x| !x.is_finite()) {
            return Err(self.invalid("algebra vector has wrong length or non-finite entries"));
        }
        match self.kind {
            ModelKind::Sl2r => Ok(self.matrix_element(charts::sl2_exp(v))),
            ModelKind::So3 => Ok(self.matrix_element(charts::so3_exp(v))),
            _ => {
                let exact: Vec<FieldElement> = v
                    .iter()
                    .map(|x| FieldElement::from_rational(BigRational::from_float(*x).expect("finite float")))
                    .collect();
                self.exp_exact(&exact)
            }
        }
    }

    /// Logarithm chart in float coordinates. Errors outside the injectivity
    /// radius instead of returning a wrapped branch.
    pub fn log_chart(&self, g: &GroupElement) -> Result<Vec<f64>, GroupError> {
        self.check(g)?;
        match self.kind {
            ModelKind::Sl2r => {
                let dist = op_norm(&g.mat().sub(&Matrix::identity(2)));
                if dist >= self.kind.injectivity_radius() {
                    return Err(GroupError::OutsideLogDomain {
                        model: self.kind,
                        distance: dist,
                        radius: self.kind.injectivity_radius(),
                    });
                }
                Ok(charts::sl2_log(g.mat()))
            }
            ModelKind::So3 => {
                let angle = so3_angle(g.mat());
                // the axis is ill-conditioned this close to π
                if angle >= std::f64::consts::PI - 1e-9 {
                    return Err(GroupError::OutsideLogDomain {
                        model: self.kind,
                        distance: angle,
                        radius: self.kind.injectivity_radius(),
                    });
                }
                Ok(charts::so3_log(g.mat()))
            }
            _ => Ok(self.log_exact(g)?.iter().map(FieldElement::to_f64).collect()),
        }
    }

    /// Image in the abelianization `G/G'` (nilpotent models): the first
    /// `abelianization_dim` canonical coordinates.
    pub fn abelianization(&self, g: &GroupElement) -> Result<Vec<FieldElement>, GroupError> {
        self.check(g)?;
        if !self.kind.is_nilpotent() {
            return Err(GroupError::Unsupported {
                model: self.kind,
                operation: "abelianization",
            });
        }
        Ok(g.exact()[..self.kind.abelianization_dim()].to_vec())
    }

    /// `Ad(g)` acting on the algebra, as a float matrix.
    pub fn adjoint_f64(&self, g: &GroupElement) -> Result<Matrix<f64>, GroupError> {
        Ok(crate::lie::adjoint(self, g)?.to_f64())
    }

    pub fn haar_sample<R: rand::Rng + ?Sized>(
        &self,
        w: &NeighbourhoodSpec,
        rng: &mut R,
    ) -> Result<GroupElement, GroupError> {
        haar::sample(self, w, rng)
    }

    /// Neighbourhood used when none is given: unit coordinate box for the
    /// nilpotent models, the whole torus, angle ball 1 in SO(3), chart ball
    /// 0.3 in SL(2,R).
    pub fn default_neighbourhood(&self) -> NeighbourhoodSpec {
        match self.kind {
            ModelKind::Torus(n) => NeighbourhoodSpec::coordinate_box(self.kind, vec![0.5; n]),
            ModelKind::Sl2r => NeighbourhoodSpec::exp_ball(self.kind, 0.3),
            ModelKind::So3 => NeighbourhoodSpec::exp_ball(self.kind, 1.0),
            kind => NeighbourhoodSpec::coordinate_box(kind, vec![1.0; kind.dim()]),
        }
    }
}

/// The quotient map from the filiform group onto the Heisenberg group by
/// its center: `(a, b, c, d) ↦ (a, b, c)`.
pub fn filiform_to_heisenberg(g: &GroupElement) -> Result<GroupElement, GroupError> {
    if g.model != ModelKind::Filiform4 {
        return Err(GroupError::ModelMismatch {
            left: ModelKind::Filiform4,
            right: g.model,
        });
    }
    Ok(GroupElement {
        model: ModelKind::Heisenberg,
        payload: Payload::Coords(g.exact()[..3].to_vec()),
    })
}

/// Float evaluation of the polynomial laws, for brute-force checks that
/// would be too slow exactly.
pub fn float_multiply(kind: ModelKind, a: &[f64], b: &[f64]) -> Vec<f64> {
    match kind {
        ModelKind::Torus(_) => a.iter().zip(b).map(|(x, y)| (x + y).rem_euclid(1.0)).collect(),
        _ => laws::multiply::<f64>(kind, a, b),
    }
}
