//! One randomized trial: `dim G + 1` Haar samples from a Z-neighbourhood,
//! their regularity, and the closure of the subgroup they generate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{closure_dimension, ClosureConfig, ClosureError, ClosureReport};
use crate::group::{GroupElement, GroupModel, ModelKind, NeighbourhoodSpec};
use crate::lie::{is_regular, Regularity};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub model: ModelKind,
    pub seed: u64,
    pub generators: Vec<GroupElement>,
    pub regularity: Vec<Regularity>,
    pub all_regular: bool,
    pub report: ClosureReport,
}

/// Sample `dim G + 1` elements of `w` and estimate the closure they generate.
///
/// `w` is expected to be a Z-neighbourhood; callers check that once with
/// [`super::spot_check`] rather than per trial. The result depends only on
/// `seed`.
pub fn theorem_trial(
    model: &GroupModel,
    w: &NeighbourhoodSpec,
    seed: u64,
    config: &ClosureConfig,
) -> Result<TrialResult, ClosureError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generators = (0..=model.dim())
        .map(|_| model.haar_sample(w, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let regularity = generators
        .iter()
        .map(|g| is_regular(model, g))
        .collect::<Result<Vec<_>, _>>()?;
    let all_regular = regularity.iter().all(|r| r.regular);
    let report = closure_dimension(model, &generators, config)?;
    Ok(TrialResult {
        model: model.kind(),
        seed,
        generators,
        regularity,
        all_regular,
        report,
    })
}
