//! Commutator dynamics `x ↦ ζ_g(x)` and measured Z-neighbourhood radii.

use serde::{Deserialize, Serialize};

use super::ClosureError;
use crate::group::{GroupElement, GroupModel, ModelKind, NeighbourhoodSpec};
use crate::seed::trial_rng;

/// Iterates stop once the distance to `e` exceeds this.
const DIVERGED: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Number of applications of `ζ_g` performed.
    pub iterates: usize,
    pub final_distance: f64,
    pub converged: bool,
    /// Distance to the identity after each application.
    pub trajectory: Vec<f64>,
}

/// Iterate `x ← ζ_g(x)` until the identity is reached or `max_iter` runs
/// out. Exact models stop only on the exact identity; float models stop
/// when the distance drops below `eps_id`.
pub fn commutator_orbit(
    model: &GroupModel,
    g: &GroupElement,
    x: &GroupElement,
    max_iter: usize,
    eps_id: f64,
) -> Result<ConvergenceReport, ClosureError> {
    if !(eps_id > 0.0) {
        return Err(ClosureError::Config("eps_id must be positive".into()));
    }
    let exact = model.kind().is_exact();
    let mut current = x.clone();
    let mut trajectory = Vec::new();
    for k in 1..=max_iter {
        current = model.commutator(g, &current)?;
        let d = model.distance_to_identity(&current);
        trajectory.push(d);
        let reached = if exact { model.is_identity(&current) } else { d < eps_id };
        if reached {
            return Ok(ConvergenceReport {
                iterates: k,
                final_distance: d,
                converged: true,
                trajectory,
            });
        }
        if !d.is_finite() || d > DIVERGED {
            break;
        }
    }
    Ok(ConvergenceReport {
        iterates: trajectory.len(),
        final_distance: trajectory
            .last()
            .copied()
            .unwrap_or_else(|| model.distance_to_identity(x)),
        converged: false,
        trajectory,
    })
}

/// Neighbourhood of the given "radius": half-width `r` box for coordinate
/// models (capped at 1/2 on tori), exponential ball of radius `r` otherwise.
pub fn neighbourhood_of_radius(model: &GroupModel, r: f64) -> NeighbourhoodSpec {
    match model.kind() {
        ModelKind::Sl2r | ModelKind::So3 => NeighbourhoodSpec::exp_ball(model.kind(), r),
        ModelKind::Torus(n) => NeighbourhoodSpec::coordinate_box(model.kind(), vec![r.min(0.5); n]),
        kind => NeighbourhoodSpec::coordinate_box(kind, vec![r; kind.dim()]),
    }
}

/// Radius of the bisection search: the whole tested range passes for the
/// nilpotent models, SO(3) is capped just below a half turn.
pub fn radius_upper_bound(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::Sl2r => 1.0,
        ModelKind::So3 => 3.0,
        ModelKind::Torus(_) => 0.5,
        _ => 1.0,
    }
}

/// Number of bisection steps in [`estimate_z_radius`].
pub const BISECTION_STEPS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZRadius {
    pub model: ModelKind,
    /// Largest radius on the bisection grid at which every sampled pair converged.
    pub radius: f64,
    /// Smallest failing radius found (equal to `radius` when the upper bound passes).
    pub failing: Option<f64>,
    pub upper_bound: f64,
    pub budget: usize,
    pub steps: usize,
}

impl ZRadius {
    /// Width of the final bisection bracket.
    pub fn resolution(&self) -> f64 {
        self.upper_bound / (1u64 << self.steps) as f64
    }

    pub fn neighbourhood(&self, model: &GroupModel) -> NeighbourhoodSpec {
        neighbourhood_of_radius(model, self.radius)
    }
}

/// Whether all `budget` sampled pairs `(g, x)` in the radius-`r`
/// neighbourhood converge. Samples come from a stream keyed by `(seed, tag)`.
pub fn radius_passes(
    model: &GroupModel,
    r: f64,
    budget: usize,
    max_iter: usize,
    eps_id: f64,
    seed: u64,
    tag: u64,
) -> Result<bool, ClosureError> {
    let w = neighbourhood_of_radius(model, r);
    let mut rng = trial_rng(seed, tag);
    for _ in 0..budget {
        let g = model.haar_sample(&w, &mut rng)?;
        let x = model.haar_sample(&w, &mut rng)?;
        if !commutator_orbit(model, &g, &x, max_iter, eps_id)?.converged {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bisection for the largest radius whose sampled pairs all converge.
///
/// The bracket `[lo, hi]` always has `lo` passing (or 0) and `hi` failing,
/// so the result is monotone by construction. When the upper bound itself
/// passes it is returned.
pub fn estimate_z_radius(
    model: &GroupModel,
    budget: usize,
    max_iter: usize,
    eps_id: f64,
    seed: u64,
) -> Result<ZRadius, ClosureError> {
    if budget == 0 {
        return Err(ClosureError::Config("sample budget must be at least 1".into()));
    }
    let upper = radius_upper_bound(model.kind());
    let mut report = ZRadius {
        model: model.kind(),
        radius: upper,
        failing: None,
        upper_bound: upper,
        budget,
        steps: BISECTION_STEPS,
    };
    if radius_passes(model, upper, budget, max_iter, eps_id, seed, 0)? {
        return Ok(report);
    }
    let (mut lo, mut hi) = (0.0, upper);
    for step in 1..=BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if radius_passes(model, mid, budget, max_iter, eps_id, seed, step as u64)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Err(ClosureError::NoPassingRadius { tested_down_to: hi });
    }
    report.radius = lo;
    report.failing = Some(hi);
    Ok(report)
}

/// Largest radius on the bisection grid of `measured`, at most its radius,
/// whose neighbourhood passes [`spot_check`]. The measured radius sits on a
/// sampled boundary, so a fresh sample can still find a slow pair there.
pub fn verified_radius(
    model: &GroupModel,
    measured: &ZRadius,
    pairs: usize,
    max_iter: usize,
    eps_id: f64,
    seed: u64,
) -> Result<f64, ClosureError> {
    let step = measured.resolution();
    let mut r = measured.radius;
    while r > 0.0 {
        let w = neighbourhood_of_radius(model, r);
        if spot_check(model, &w, pairs, max_iter, eps_id, seed)? {
            return Ok(r);
        }
        r -= step;
    }
    Err(ClosureError::NotZNeighbourhood)
}

/// Spot check that `w` behaves as a Z-neighbourhood: `pairs` sampled pairs
/// must all converge.
pub fn spot_check(
    model: &GroupModel,
    w: &NeighbourhoodSpec,
    pairs: usize,
    max_iter: usize,
    eps_id: f64,
    seed: u64,
) -> Result<bool, ClosureError> {
    let mut rng = trial_rng(seed, u64::MAX);
    for _ in 0..pairs {
        let g = model.haar_sample(w, &mut rng)?;
        let x = model.haar_sample(w, &mut rng)?;
        if !commutator_orbit(model, &g, &x, max_iter, eps_id)?.converged {
            return Ok(false);
        }
    }
    Ok(true)
}
