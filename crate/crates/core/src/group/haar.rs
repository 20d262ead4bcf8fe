//! Haar sampling on relatively compact neighbourhoods of the identity.
//!
//! * Vector groups, tori, Heisenberg, filiform: coordinate volume is Haar
//!   (left translations have unit Jacobian), so coordinates are drawn
//!   uniformly. To keep every later certificate exact, each coordinate is
//!   `q₀ + q₁√2 + q₂√3 + q₃√5` with all `qᵢ` on the grid `2^-16 Z`: the
//!   irrational part is drawn first and `q₀` is the grid point closest to a
//!   uniform target minus that part.
//! * SO(3): uniform unit quaternions, rejected into the angle ball.
//! * SL(2,R): uniform proposals in the exponential-chart ball, accepted
//!   with probability `(sinh s / s)² / (sinh r / r)²`, the chart density of
//!   Haar measure relative to its maximum on the ball of radius `r`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{charts, GroupElement, GroupError, GroupModel, ModelKind};
use crate::scalar::{FieldElement, Matrix};

/// Coefficient grid `2^-GRID_BITS` for exact samples.
pub const GRID_BITS: u32 = 16;

/// Proposal budget per sample before giving up.
pub const MAX_PROPOSALS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chart {
    /// `Π [-wᵢ, wᵢ]` in canonical coordinates.
    CoordinateBox { half_widths: Vec<f64> },
    /// Euclidean ball in exponential-chart coordinates (for SO(3) the radius
    /// is the rotation angle).
    ExpBall { radius: f64 },
}

/// A relatively compact neighbourhood of the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodSpec {
    pub model: ModelKind,
    pub chart: Chart,
}

impl NeighbourhoodSpec {
    pub fn coordinate_box(model: ModelKind, half_widths: Vec<f64>) -> Self {
        Self {
            model,
            chart: Chart::CoordinateBox { half_widths },
        }
    }

    pub fn exp_ball(model: ModelKind, radius: f64) -> Self {
        Self {
            model,
            chart: Chart::ExpBall { radius },
        }
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        let bad = |m: String| Err(GroupError::Neighbourhood(m));
        match (&self.chart, self.model.is_exact()) {
            (Chart::CoordinateBox { half_widths }, true) => {
                if half_widths.len() != self.model.dim() {
                    return bad(format!(
                        "{} half-widths for a {}-dimensional model",
                        half_widths.len(),
                        self.model.dim()
                    ));
                }
                if half_widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return bad("half-widths must be positive and finite".into());
                }
                if matches!(self.model, ModelKind::Torus(_)) && half_widths.iter().any(|w| *w > 0.5) {
                    return bad("torus half-widths cannot exceed 1/2".into());
                }
                Ok(())
            }
            (Chart::ExpBall { radius }, false) => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad("radius must be positive and finite".into());
                }
                if self.model == ModelKind::So3 && *radius > std::f64::consts::PI {
                    return bad("SO(3) angle radius cannot exceed π".into());
                }
                Ok(())
            }
            _ => bad(format!("chart kind does not fit {}", self.model)),
        }
    }

    /// Whether `g` lies in the neighbourhood.
    pub fn contains(&self, model: &GroupModel, g: &GroupElement) -> bool {
        match &self.chart {
            Chart::CoordinateBox { half_widths } => {
                let coords = g.to_f64();
                coords.iter().zip(half_widths).all(|(x, w)| {
                    if matches!(self.model, ModelKind::Torus(_)) {
                        x.min(1.0 - x) <= *w
                    } else {
                        x.abs() <= *w
                    }
                })
            }
            Chart::ExpBall { radius } => match self.model {
                ModelKind::So3 => charts::so3_angle(g.matrix().unwrap()) < *radius,
                _ => model
                    .log_chart(g)
                    .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt() < *radius)
                    .unwrap_or(false),
            },
        }
    }
}

fn grid_rational(k: i64) -> BigRational {
    BigRational::new(BigInt::from(k), BigInt::from(1i64 << GRID_BITS))
}

/// One exact coordinate close to uniform on `[-w, w]`.
fn exact_coordinate<R: Rng + ?Sized>(w: f64, rng: &mut R) -> FieldElement {
    let scale = (1i64 << GRID_BITS) as f64;
    let bound = BigRational::from_float(w).expect("finite width");
    loop {
        let t: f64 = rng.random_range(-w..=w);
        let ks: [i64; 3] = std::array::from_fn(|_| rng.random_range(-(1i64 << GRID_BITS)..=(1i64 << GRID_BITS)));
        let irr: f64 = ks
            .iter()
            .zip([2.0f64, 3.0, 5.0])
            .map(|(k, r)| *k as f64 / scale * r.sqrt())
            .sum();
        let k0 = ((t - irr) * scale).round() as i64;
        let mut x = FieldElement::from_rational(grid_rational(k0));
        for (k, radicand) in ks.iter().zip([2u32, 3, 5]) {
            x += &FieldElement::sqrt_of(radicand)
                .expect("basis radicand")
                .scale(&grid_rational(*k));
        }
        let limit = FieldElement::from_rational(bound.clone());
        if x.abs() <= limit {
            return x;
        }
    }
}

fn uniform_in_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    dir.into_iter().map(|x| x / norm * r).collect()
}

fn quaternion_matrix(q: [f64; 4]) -> Matrix<f64> {
    let [w, x, y, z] = q;
    Matrix::from_rows(vec![
        vec![
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        vec![
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        vec![
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ])
}

fn budget_error(proposals: usize, accepted: usize) -> GroupError {
    GroupError::RejectionBudget {
        proposals,
        accepted,
        rate: accepted as f64 / proposals.max(1) as f64,
    }
}

pub(super) fn sample<R: Rng + ?Sized>(
    model: &GroupModel,
    w: &NeighbourhoodSpec,
    rng: &mut R,
) -> Result<GroupElement, GroupError> {
    if w.model != model.kind() {
        return Err(GroupError::ModelMismatch {
            left: model.kind(),
            right: w.model,
        });
    }
    w.validate()?;
    match (&w.chart, model.kind()) {
        (Chart::CoordinateBox { half_widths }, ModelKind::Torus(_)) => {
            let lift: Vec<FieldElement> = half_widths.iter().map(|hw| exact_coordinate(*hw, rng)).collect();
            model.torus_element(&lift)
        }
        (Chart::CoordinateBox { half_widths }, _) => {
            model.element(half_widths.iter().map(|hw| exact_coordinate(*hw, rng)).collect())
        }
        (Chart::ExpBall { radius }, ModelKind::So3) => {
            for _ in 0..MAX_PROPOSALS {
                let mut q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                q.iter_mut().for_each(|x| *x /= norm);
                if q[0] < 0.0 {
                    q.iter_mut().for_each(|x| *x = -*x);
                }
                let angle = 2.0 * q[0].clamp(-1.0, 1.0).acos();
                if angle < *radius {
                    return Ok(model.matrix_element(quaternion_matrix(q)));
                }
            }
            Err(budget_error(MAX_PROPOSALS, 0))
        }
        (Chart::ExpBall { radius }, ModelKind::Sl2r) => {
            let w_max = charts::sl2_chart_density(&[0.0, *radius, 0.0]);
            for _ in 0..MAX_PROPOSALS {
                let v = uniform_in_ball(3, *radius, rng);
                let weight = charts::sl2_chart_density(&v) / w_max;
                if rng.random::<f64>() < weight {
                    return model.exp_chart(&v);
                }
            }
            Err(budget_error(MAX_PROPOSALS, 0))
        }
        _ => Err(GroupError::Neighbourhood(format!(
            "chart kind does not fit {}",
            model.kind()
        ))),
    }
}
