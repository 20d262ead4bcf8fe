//! Closures of finitely generated subgroups: commutator dynamics, the
//! dimension of the closure, density reports and theorem trials.
//!
//! Nilpotent and abelian models are handled algebraically and exactly.
//! For SL(2,R) and SO(3) the closure's Lie algebra is estimated from short
//! words landing near the identity, so the verdict there is statistical.

mod nilpotent;
mod orbit;
mod trial;
mod words;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{DensityError, DensityVerdict};
use crate::group::{GroupElement, GroupError, GroupModel, ModelKind};

pub use nilpotent::{nilpotent_density_check, NilpotentDensity};
pub use orbit::{
    commutator_orbit, estimate_z_radius, neighbourhood_of_radius, radius_passes, radius_upper_bound, spot_check,
    verified_radius, ConvergenceReport, ZRadius, BISECTION_STEPS,
};
pub use trial::{theorem_trial, TrialResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosureError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("at least one generator is required")]
    NoGenerators,
    #[error("{model} is not nilpotent")]
    NotNilpotent { model: ModelKind },
    #[error("no sampled radius converged (tested down to {tested_down_to})")]
    NoPassingRadius { tested_down_to: f64 },
    #[error("neighbourhood failed the commutator spot check")]
    NotZNeighbourhood,
}

/// Parameters of the closure estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClosureConfig {
    /// Longest reduced word explored by the word search.
    pub word_length: usize,
    /// Only words within this distance of `e` contribute logarithms.
    pub rho: f64,
    /// Words closer than this to `e` count as trivial.
    pub trivial_distance: f64,
    /// Cap on distinct word values explored.
    pub max_words: usize,
    pub eps_id: f64,
    pub max_iter: usize,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            word_length: 12,
            rho: 0.2,
            trivial_distance: 1e-9,
            max_words: 200_000,
            eps_id: 1e-9,
            max_iter: 200,
        }
    }
}

impl ClosureConfig {
    pub fn validate(&self) -> Result<(), ClosureError> {
        if self.word_length == 0 {
            return Err(ClosureError::Config("word_length must be at least 1".into()));
        }
        if !(self.rho > 0.0) || !(self.eps_id > 0.0) || !(self.trivial_distance >= 0.0) {
            return Err(ClosureError::Config("rho, eps_id must be positive".into()));
        }
        if self.trivial_distance >= self.rho {
            return Err(ClosureError::Config("trivial_distance must be below rho".into()));
        }
        if self.max_words == 0 || self.max_iter == 0 {
            return Err(ClosureError::Config("max_words and max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// How sure the density flag is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseFlag {
    /// Proven by an exact certificate.
    Certified,
    /// The estimated closure algebra is everything.
    Statistical,
    False,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureMethod {
    /// Exact reduction to closures of subgroups of vector groups.
    Algebraic,
    /// Logarithms of short words near the identity, saturated under brackets and `Ad`.
    WordSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub model: ModelKind,
    /// Dimension of the identity component of the closure (a lower bound when
    /// `dimension_upper` is larger).
    pub dimension: usize,
    pub dimension_upper: usize,
    pub dense: DenseFlag,
    pub discrete: bool,
    /// Whether `discrete` is proven rather than inferred from the absence of short words.
    pub discreteness_certified: bool,
    pub method: ClosureMethod,
    /// Basis of the closure's Lie algebra, in algebra coordinates.
    pub algebra_basis: Vec<Vec<f64>>,
    /// Words whose logarithms raised the dimension (word search only).
    pub evidence: Vec<Vec<i32>>,
    pub words_examined: usize,
    /// Near-identity words whose logarithm could not be taken.
    pub chart_failures: usize,
    /// Density verdict in `G/G'` (nilpotent models).
    pub abelianization: Option<DensityVerdict>,
}

impl ClosureReport {
    pub fn is_dense(&self) -> bool {
        self.dense != DenseFlag::False
    }
}

/// Dimension and density of the closure of `⟨gens⟩`.
pub fn closure_dimension(
    model: &GroupModel,
    gens: &[GroupElement],
    config: &ClosureConfig,
) -> Result<ClosureReport, ClosureError> {
    config.validate()?;
    if gens.is_empty() {
        return Err(ClosureError::NoGenerators);
    }
    for g in gens {
        if g.model() != model.kind() {
            return Err(GroupError::ModelMismatch {
                left: model.kind(),
                right: g.model(),
            }
            .into());
        }
    }
    if model.kind().is_nilpotent() {
        nilpotent::algebraic_closure(model, gens)
    } else {
        words::word_search(model, gens, config)
    }
}

#[cfg(test)]
mod tests;
