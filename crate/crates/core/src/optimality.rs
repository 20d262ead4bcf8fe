//! Schottky pieces in SL(2,R): `n` disjoint left translates `V_i = c_i·B`
//! of one small ball, such that any choice of one element per piece
//! generates a free discrete group. Sampling `n` elements uniformly from
//! `U = ∪ V_i` hits every piece exactly once with probability `n!/n^n`.
//!
//! Discreteness is certified by ping-pong on the boundary circle. A line
//! through the origin at angle `φ` is recorded by `θ = 2φ ∈ [0, 2π)`; each
//! slot `i` owns an attracting arc `A_i` and a repelling arc `R_i`, all `2n`
//! arcs pairwise disjoint, and its element must map `S¹ \ R_i` into `A_i`.
//! For an orientation-preserving circle map that single condition already
//! implies the reverse one, `g⁻¹(S¹ \ A_i) ⊂ R_i`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{op_norm, GroupElement, GroupError, GroupModel, ModelKind, NeighbourhoodSpec};
use crate::scalar::Matrix;
use crate::seed::trial_rng;

/// Interior points checked per arc, besides the endpoints.
pub const ARC_SAMPLES: usize = 64;
/// Elements sampled per piece when choosing the ball radius.
pub const PIECE_SAMPLES: usize = 256;
const MAX_DOUBLINGS: usize = 60;
const MAX_HALVINGS: usize = 40;
const INITIAL_RADIUS: f64 = 0.5;
/// Seed of the sampler used while building a family.
const BUILD_SEED: u64 = 0x5eed_0f_5c4077;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimalityError {
    #[error("need at least two generators, got {0}")]
    TooFewGenerators(usize),
    #[error("margin must be positive and finite, got {0}")]
    InvalidMargin(f64),
    #[error("{arcs} arcs separated by gaps of {delta} do not fit on the circle (arc width would be {width})")]
    Infeasible { arcs: usize, delta: f64, width: f64 },
    #[error("no stretch factor up to {0} satisfies ping-pong")]
    NoStretch(f64),
    #[error("no ball radius down to {0} keeps the pieces disjoint and ping-pong")]
    NoRadius(f64),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Closed arc `[start, start + width]` on the circle, angles mod 2π.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub width: f64,
}

impl Arc {
    pub fn end(&self) -> f64 {
        (self.start + self.width).rem_euclid(TAU)
    }

    /// Position of `theta` measured from `start` in the positive direction, in `[0, 2π)`.
    pub fn offset(&self, theta: f64) -> f64 {
        (theta - self.start).rem_euclid(TAU)
    }

    /// Whether `theta` lies in the arc shrunk by `margin` at both ends.
    pub fn contains_inner(&self, theta: f64, margin: f64) -> bool {
        let t = self.offset(theta);
        t >= margin && t <= self.width - margin
    }

    pub fn midpoint(&self) -> f64 {
        (self.start + self.width / 2.0).rem_euclid(TAU)
    }

    /// Smallest gap between two disjoint arcs, or a negative value when they overlap.
    pub fn gap(&self, other: &Arc) -> f64 {
        if self.offset(other.start) <= self.width || other.offset(self.start) <= other.width {
            return -1.0;
        }
        let forward = (other.start - (self.start + self.width)).rem_euclid(TAU);
        let backward = (self.start - (other.start + other.width)).rem_euclid(TAU);
        forward.min(backward)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PingPongCertificate {
    pub generators: Vec<GroupElement>,
    pub attracting: Vec<Arc>,
    pub repelling: Vec<Arc>,
    /// Gap between consecutive arcs.
    pub delta: f64,
    /// Inclusions are checked against arcs shrunk by this much.
    pub margin: f64,
    /// Eigenvalue `λ > 1` of the constructed generators.
    pub stretch: f64,
}

impl PingPongCertificate {
    pub fn slots(&self) -> usize {
        self.attracting.len()
    }

    /// All `2n` arcs, attracting and repelling interleaved.
    pub fn arcs(&self) -> Vec<Arc> {
        self.attracting
            .iter()
            .zip(&self.repelling)
            .flat_map(|(a, r)| [*a, *r])
            .collect()
    }

    /// The arcs are pairwise disjoint with gaps of at least `delta`.
    pub fn arcs_disjoint(&self) -> bool {
        let arcs = self.arcs();
        let tol = 1e-12;
        arcs.iter()
            .enumerate()
            .all(|(i, a)| arcs[i + 1..].iter().all(|b| a.gap(b) >= self.delta - tol))
    }
}

/// Left translates `c_i·B` of a ball `B` around the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceFamily {
    pub base: NeighbourhoodSpec,
    pub centers: Vec<GroupElement>,
}

impl PieceFamily {
    pub fn radius(&self) -> f64 {
        match self.base.chart {
            crate::group::Chart::ExpBall { radius } => radius,
            _ => unreachable!("pieces are chart balls"),
        }
    }

    /// Sufficient test for pairwise disjointness: with `‖X‖_op ≤ √2 |v|`
    /// on the chart, every `x y⁻¹` with `x, y ∈ B` satisfies
    /// `‖x y⁻¹ − I‖_op ≤ e^{2√2 r} − 1`, so centers with
    /// `‖c_j⁻¹ c_i − I‖_op` above that bound give disjoint pieces.
    pub fn pieces_disjoint(&self) -> bool {
        let bound = (2.0 * std::f64::consts::SQRT_2 * self.radius()).exp() - 1.0;
        let m = sl2();
        let eye = Matrix::<f64>::identity(2);
        for (i, ci) in self.centers.iter().enumerate() {
            for cj in &self.centers[i + 1..] {
                let q = m.multiply(&m.invert(cj).unwrap(), ci).unwrap();
                if op_norm(&q.matrix().unwrap().sub(&eye)) <= bound {
                    return false;
                }
            }
        }
        true
    }

    /// Haar sample from piece `i`.
    pub fn sample_piece<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<GroupElement, GroupError> {
        let m = sl2();
        let x = m.haar_sample(&self.base, rng)?;
        m.multiply(&self.centers[i], &x)
    }
}

fn sl2() -> GroupModel {
    GroupModel::new(ModelKind::Sl2r).expect("SL(2,R) model")
}

/// Action of `g` on the boundary circle in doubled-angle coordinates.
pub fn boundary_action(g: &Matrix<f64>, theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    let x = g[(0, 0)] * c + g[(0, 1)] * s;
    let y = g[(1, 0)] * c + g[(1, 1)] * s;
    (2.0 * y.atan2(x)).rem_euclid(TAU)
}

/// Whether `g` maps the complement of `repelling` into `attracting` shrunk by `margin`.
///
/// The complement is the arc from the end of `repelling` round to its
/// start; its image is the positively oriented arc between the images of
/// those endpoints, so it suffices that both images land inside and in
/// order. Interior samples are checked as well.
pub fn maps_complement_into(g: &Matrix<f64>, repelling: &Arc, attracting: &Arc, margin: f64) -> bool {
    let from = repelling.end();
    let length = TAU - repelling.width;
    let p = boundary_action(g, from);
    let q = boundary_action(g, from + length);
    if !attracting.contains_inner(p, margin) || !attracting.contains_inner(q, margin) {
        return false;
    }
    if attracting.offset(p) > attracting.offset(q) {
        return false;
    }
    (1..=ARC_SAMPLES).all(|k| {
        let t = from + length * k as f64 / (ARC_SAMPLES + 1) as f64;
        attracting.contains_inner(boundary_action(g, t), margin)
    })
}

/// True iff each element maps the complement of its slot's repelling arc
/// into its attracting arc. By the ping-pong lemma the elements then
/// generate a free discrete group.
pub fn check_ping_pong(elements: &[GroupElement], certificate: &PingPongCertificate) -> bool {
    if elements.len() != certificate.slots() {
        return false;
    }
    elements.iter().enumerate().all(|(i, g)| match g.matrix() {
        Some(m) if g.model() == ModelKind::Sl2r => maps_complement_into(
            m,
            &certificate.repelling[i],
            &certificate.attracting[i],
            certificate.margin,
        ),
        _ => false,
    })
}

/// Hyperbolic element with attracting line at doubled angle `attract`,
/// repelling line at `repel` and eigenvalues `λ, 1/λ`.
fn hyperbolic(attract: f64, repel: f64, lambda: f64) -> Matrix<f64> {
    let (sa, ca) = (attract / 2.0).sin_cos();
    let (sr, cr) = (repel / 2.0).sin_cos();
    let p = Matrix::from_rows(vec![vec![ca, cr], vec![sa, sr]]);
    let d = Matrix::from_rows(vec![vec![lambda, 0.0], vec![0.0, 1.0 / lambda]]);
    let p_inv = p.inverse().expect("distinct lines");
    p.mul(&d).mul(&p_inv)
}

/// Ping-pong generators for `n` slots with arc gaps `delta`, and `n`
/// disjoint pieces around them on which ping-pong still holds.
pub fn build_schottky_family(n: usize, delta: f64) -> Result<(PieceFamily, PingPongCertificate), OptimalityError> {
    if n < 2 {
        return Err(OptimalityError::TooFewGenerators(n));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(OptimalityError::InvalidMargin(delta));
    }
    let arcs = 2 * n;
    let width = PI / n as f64 - delta;
    if width <= 0.0 {
        return Err(OptimalityError::Infeasible { arcs, delta, width });
    }
    let arc = |k: usize| Arc {
        start: k as f64 * (width + delta),
        width,
    };
    let attracting: Vec<Arc> = (0..n).map(|i| arc(2 * i)).collect();
    let repelling: Vec<Arc> = (0..n).map(|i| arc(2 * i + 1)).collect();
    let margin = (delta / 2.0).min(width / 4.0);

    let model = sl2();
    let mut lambda = 2.0;
    let generators = loop {
        let gens: Vec<Matrix<f64>> = (0..n)
            .map(|i| hyperbolic(attracting[i].midpoint(), repelling[i].midpoint(), lambda))
            .collect();
        if gens
            .iter()
            .zip(attracting.iter().zip(&repelling))
            .all(|(g, (a, r))| maps_complement_into(g, r, a, margin))
        {
            break gens;
        }
        lambda *= 2.0;
        if lambda > 2f64.powi(MAX_DOUBLINGS as i32) {
            return Err(OptimalityError::NoStretch(lambda));
        }
    };
    let generators = generators
        .into_iter()
        .map(|g| model.element_from_matrix(g))
        .collect::<Result<Vec<_>, _>>()?;
    let certificate = PingPongCertificate {
        generators: generators.clone(),
        attracting,
        repelling,
        delta,
        margin,
        stretch: lambda,
    };

    let mut radius = INITIAL_RADIUS;
    let mut rng = trial_rng(BUILD_SEED, n as u64);
    for _ in 0..MAX_HALVINGS {
        let family = PieceFamily {
            base: NeighbourhoodSpec::exp_ball(ModelKind::Sl2r, radius),
            centers: generators.clone(),
        };
        if family.pieces_disjoint() && pieces_keep_ping_pong(&family, &certificate, &mut rng)? {
            return Ok((family, certificate));
        }
        radius /= 2.0;
    }
    Err(OptimalityError::NoRadius(radius))
}

fn pieces_keep_ping_pong(
    family: &PieceFamily,
    certificate: &PingPongCertificate,
    rng: &mut ChaCha8Rng,
) -> Result<bool, GroupError> {
    for i in 0..family.centers.len() {
        for _ in 0..PIECE_SAMPLES {
            let g = family.sample_piece(i, rng)?;
            if !maps_complement_into(
                g.matrix().unwrap(),
                &certificate.repelling[i],
                &certificate.attracting[i],
                certificate.margin,
            ) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `n!/n^n`, the chance that `n` uniform draws from `n` pieces hit each once.
pub fn permutation_probability(n: usize) -> f64 {
    (1..=n).map(|k| k as f64 / n as f64).product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityTrial {
    pub seed: u64,
    /// Piece index of each sampled element.
    pub pattern: Vec<usize>,
    pub permutation_event: bool,
    /// Ping-pong holds after putting each element in its piece's slot
    /// (only attempted on the permutation event).
    pub discrete_certified: bool,
}

/// Draw `n` elements Haar-uniformly from `U` (a uniform piece, then a
/// uniform point of that piece) and certify discreteness when every piece
/// is hit once.
pub fn optimality_trial(
    family: &PieceFamily,
    certificate: &PingPongCertificate,
    seed: u64,
) -> Result<OptimalityTrial, OptimalityError> {
    let n = family.centers.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pattern = Vec::with_capacity(n);
    let mut elements = Vec::with_capacity(n);
    for _ in 0..n {
        let piece = rng.random_range(0..n);
        pattern.push(piece);
        elements.push(family.sample_piece(piece, &mut rng)?);
    }
    let mut hits = vec![0usize; n];
    pattern.iter().for_each(|&p| hits[p] += 1);
    let permutation_event = hits.iter().all(|&h| h == 1);
    let discrete_certified = permutation_event && {
        let mut slots = elements.clone();
        for (element, &piece) in elements.into_iter().zip(&pattern) {
            slots[piece] = element;
        }
        check_ping_pong(&slots, certificate)
    };
    Ok(OptimalityTrial {
        seed,
        pattern,
        permutation_event,
        discrete_certified,
    })
}
