//! Closure estimate for the float models: logarithms of short words that
//! land near the identity span part of the closure's Lie algebra, which is
//! then saturated under brackets and `Ad(g_i^{±1})`.

use std::collections::HashSet;

use super::{ClosureConfig, ClosureError, ClosureMethod, ClosureReport, DenseFlag};
use crate::group::{GroupElement, GroupModel};
use crate::lie::Subspace;
use crate::scalar::Matrix;

/// Word values closer than this (entrywise) are treated as equal.
const DEDUP_GRID: f64 = 1e-12;

fn key(g: &GroupElement) -> Vec<i64> {
    g.to_f64().iter().map(|x| (x / DEDUP_GRID).round() as i64).collect()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Smallest subspace containing `span` and `x` that is closed under brackets
/// and the given linear maps.
fn saturate(model: &GroupModel, span: &Subspace<f64>, x: &[f64], maps: &[Matrix<f64>]) -> Subspace<f64> {
    let n = model.dim();
    let mut current = span.sum(&Subspace::span(n, &[normalized(x)]));
    loop {
        let mut candidates = Vec::new();
        let basis = current.basis();
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i + 1..] {
                candidates.push(model.algebra().bracket(a, b));
            }
            for m in maps {
                candidates.push(m.apply(a));
            }
        }
        let fresh: Vec<Vec<f64>> = candidates
            .into_iter()
            .filter(|v| v.iter().any(|x| x.abs() > 1e-12) && !current.contains(&normalized(v)))
            .map(|v| normalized(&v))
            .collect();
        if fresh.is_empty() || current.is_full() {
            return current;
        }
        current = current.sum(&Subspace::span(n, &fresh));
    }
}

struct Node {
    g: GroupElement,
    word: Vec<i32>,
}

pub(super) fn word_search(
    model: &GroupModel,
    gens: &[GroupElement],
    config: &ClosureConfig,
) -> Result<ClosureReport, ClosureError> {
    let n = model.dim();
    let inverses = gens.iter().map(|g| model.invert(g)).collect::<Result<Vec<_>, _>>()?;
    let mut maps = Vec::with_capacity(2 * gens.len());
    for g in gens.iter().chain(&inverses) {
        maps.push(model.adjoint_f64(g)?);
    }
    let letters: Vec<i32> = (1..=gens.len() as i32).flat_map(|i| [i, -i]).collect();
    let letter_element = |l: i32| {
        let i = (l.unsigned_abs() - 1) as usize;
        if l > 0 {
            &gens[i]
        } else {
            &inverses[i]
        }
    };

    let mut span = Subspace::<f64>::zero(n);
    let mut evidence = Vec::new();
    let mut seen = HashSet::new();
    let identity = model.identity();
    seen.insert(key(&identity));
    let mut frontier = vec![Node {
        g: identity,
        word: Vec::new(),
    }];
    let mut examined = 0usize;
    let mut chart_failures = 0usize;
    let mut near_identity = 0usize;

    'search: for _ in 0..config.word_length {
        let mut next = Vec::new();
        for node in &frontier {
            for &l in &letters {
                if node.word.last() == Some(&-l) {
                    continue;
                }
                let h = model.multiply(&node.g, letter_element(l))?;
                if !seen.insert(key(&h)) {
                    continue;
                }
                examined += 1;
                let mut word = node.word.clone();
                word.push(l);
                let d = model.distance_to_identity(&h);
                if d > config.trivial_distance && d < config.rho {
                    near_identity += 1;
                    match model.log_chart(&h) {
                        Ok(x) => {
                            if !span.contains(&normalized(&x)) {
                                span = saturate(model, &span, &x, &maps);
                                evidence.push(word.clone());
                            }
                        }
                        Err(_) => chart_failures += 1,
                    }
                }
                if span.is_full() || examined >= config.max_words {
                    break 'search;
                }
                next.push(Node { g: h, word });
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }

    let dimension = span.dim();
    Ok(ClosureReport {
        model: model.kind(),
        dimension,
        dimension_upper: dimension,
        dense: if dimension == n {
            DenseFlag::Statistical
        } else {
            DenseFlag::False
        },
        discrete: near_identity == 0,
        discreteness_certified: false,
        method: ClosureMethod::WordSearch,
        algebra_basis: span.basis().to_vec(),
        evidence,
        words_examined: examined,
        chart_failures,
        abelianization: None,
    })
}
