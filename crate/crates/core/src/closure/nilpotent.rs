//! Exact closures in the nilpotent and abelian models.
//!
//! `Γ` is dense iff its image in `G/G'` is. When that image is discrete the
//! identity component of `Γ̄` lives in `G' ≅ R^m`, where it is the identity
//! component of the closure of the Z-module `Γ ∩ G'`. That module is (up to
//! finite index) generated by the commutators `[g_i, g_j]` and the words
//! realising integer relations among the projections, closed under the
//! linear conjugation maps `T_{g_i} - I`.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{ClosureError, ClosureMethod, ClosureReport, DenseFlag};
use crate::abelian::{closure_structure, decide_density, DensityVerdict};
use crate::group::{GroupElement, GroupModel, ModelKind};
use crate::scalar::{primitive_integer_vector, FieldElement, Matrix, DEGREE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilpotentDensity {
    pub model: ModelKind,
    pub dense: bool,
    /// Verdict for the projected generators in `G/G'` (for tori, with the
    /// integer lattice adjoined).
    pub abelianization: DensityVerdict,
}

/// Images in `G/G'`, plus the standard basis on a torus so that density in
/// `R^n / Z^n` becomes density in `R^n`.
fn projections(model: &GroupModel, gens: &[GroupElement]) -> Result<(Vec<Vec<FieldElement>>, usize), ClosureError> {
    let mut out = gens
        .iter()
        .map(|g| model.abelianization(g))
        .collect::<Result<Vec<_>, _>>()?;
    let d = model.kind().abelianization_dim();
    if let ModelKind::Torus(n) = model.kind() {
        for i in 0..n {
            let mut e = vec![FieldElement::zero(); n];
            e[i] = FieldElement::one();
            out.push(e);
        }
    }
    Ok((out, d))
}

/// Density of `⟨gens⟩` in a nilpotent (or abelian) model, decided in `G/G'`.
pub fn nilpotent_density_check(model: &GroupModel, gens: &[GroupElement]) -> Result<NilpotentDensity, ClosureError> {
    if !model.kind().is_nilpotent() {
        return Err(ClosureError::NotNilpotent { model: model.kind() });
    }
    if gens.is_empty() {
        return Err(ClosureError::NoGenerators);
    }
    let (proj, d) = projections(model, gens)?;
    let verdict = decide_density(&proj, d)?;
    Ok(NilpotentDensity {
        model: model.kind(),
        dense: verdict.is_dense(),
        abelianization: verdict,
    })
}

fn to_f64(v: &[FieldElement]) -> Vec<f64> {
    v.iter().map(FieldElement::to_f64).collect()
}

/// Coordinates of `G'` inside the canonical coordinates.
fn derived_range(kind: ModelKind) -> std::ops::Range<usize> {
    let d = kind.abelianization_dim();
    d..kind.dim()
}

fn embed(model: &GroupModel, v: &[FieldElement]) -> Result<GroupElement, ClosureError> {
    let mut coords = vec![FieldElement::zero(); model.dim() - v.len()];
    coords.extend_from_slice(v);
    Ok(model.element(coords)?)
}

fn derived_coords(model: &GroupModel, g: &GroupElement) -> Vec<FieldElement> {
    let c = g.coords().expect("exact model");
    debug_assert!(c[..model.kind().abelianization_dim()].iter().all(FieldElement::is_zero));
    c[derived_range(model.kind())].to_vec()
}

/// Matrix of `x ↦ g x g⁻¹ - x` on `G'`. Conjugation is a continuous
/// automorphism of the vector group `G'`, hence linear.
fn conjugation_minus_identity(model: &GroupModel, g: &GroupElement) -> Result<Matrix<FieldElement>, ClosureError> {
    let m = derived_range(model.kind()).len();
    let g_inv = model.invert(g)?;
    let mut cols = Vec::with_capacity(m);
    for j in 0..m {
        let mut e = vec![FieldElement::zero(); m];
        e[j] = FieldElement::one();
        let x = embed(model, &e)?;
        let conj = model.multiply(&model.multiply(g, &x)?, &g_inv)?;
        let mut col = derived_coords(model, &conj);
        col[j] -= &FieldElement::one();
        cols.push(col);
    }
    Ok(Matrix::from_columns(&cols))
}

/// Primitive integer vectors spanning the rational relations `Σ r_i π_i = 0`.
fn integer_relations(proj: &[Vec<FieldElement>]) -> Vec<Vec<i64>> {
    let k = proj.len();
    let d = proj.first().map_or(0, Vec::len);
    let mut lift = Matrix::<BigRational>::zeros(d * DEGREE, k);
    for (i, p) in proj.iter().enumerate() {
        for (j, x) in p.iter().enumerate() {
            for t in 0..DEGREE {
                lift[(j * DEGREE + t, i)] = x.coeffs()[t].clone();
            }
        }
    }
    <BigRational as crate::scalar::Scalar>::kernel(&lift)
        .iter()
        .map(|v| {
            primitive_integer_vector(v)
                .iter()
                .map(|z| i64::try_from(z).expect("relation coefficients fit in i64"))
                .collect()
        })
        .collect()
}

/// Generators of a finite-index subgroup of `Γ ∩ G'`, in `G'` coordinates.
fn derived_module(
    model: &GroupModel,
    gens: &[GroupElement],
    relations: &[Vec<i64>],
) -> Result<Vec<Vec<FieldElement>>, ClosureError> {
    let mut layer = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            layer.push(derived_coords(model, &model.commutator(&gens[i], &gens[j])?));
        }
    }
    for r in relations {
        let mut w = model.identity();
        for (g, &e) in gens.iter().zip(r) {
            w = model.multiply(&w, &model.power(g, e)?)?;
        }
        layer.push(derived_coords(model, &w));
    }
    let maps = gens
        .iter()
        .map(|g| conjugation_minus_identity(model, g))
        .collect::<Result<Vec<_>, _>>()?;
    let mut module: Vec<Vec<FieldElement>> = Vec::new();
    // the maps are nilpotent on G', so this stops after at most dim G' rounds
    while !layer.is_empty() {
        layer.retain(|v| !v.iter().all(FieldElement::is_zero));
        let next: Vec<Vec<FieldElement>> = layer
            .iter()
            .flat_map(|v| maps.iter().map(move |n| n.apply(v)))
            .filter(|v| !v.iter().all(FieldElement::is_zero))
            .collect();
        module.append(&mut layer);
        layer = next;
    }
    Ok(module)
}

pub(super) fn algebraic_closure(model: &GroupModel, gens: &[GroupElement]) -> Result<ClosureReport, ClosureError> {
    let kind = model.kind();
    let n = kind.dim();
    let (proj, d) = projections(model, gens)?;
    let verdict = decide_density(&proj, d)?;
    let mut report = ClosureReport {
        model: kind,
        dimension: 0,
        dimension_upper: 0,
        dense: DenseFlag::False,
        discrete: false,
        discreteness_certified: true,
        method: ClosureMethod::Algebraic,
        algebra_basis: Vec::new(),
        evidence: Vec::new(),
        words_examined: 0,
        chart_failures: 0,
        abelianization: None,
    };

    if verdict.is_dense() {
        report.dimension = n;
        report.dimension_upper = n;
        report.algebra_basis = Matrix::<f64>::identity(n).row_vectors();
        report.dense = DenseFlag::Certified;
        report.abelianization = Some(verdict);
        return Ok(report);
    }

    let top = closure_structure(&proj, d)?;
    if kind.is_abelian() {
        // G' is trivial: the closure is read off directly
        report.dimension = top.identity_component_dim;
        report.dimension_upper = top.identity_component_dim;
        report.algebra_basis = top.identity_component.iter().map(|v| to_f64(v)).collect();
        report.discrete = top.is_discrete();
        report.abelianization = Some(verdict);
        return Ok(report);
    }

    let relations = if top.is_discrete() {
        integer_relations(&proj)
    } else {
        Vec::new()
    };
    let module = derived_module(model, gens, &relations)?;
    let m = n - d;
    let structure = if module.is_empty() {
        None
    } else {
        Some(closure_structure(&module, m)?)
    };
    let lower = structure.as_ref().map_or(0, |s| s.identity_component_dim);
    let pad = |v: &[FieldElement]| {
        let mut out = vec![0.0; d];
        out.extend(to_f64(v));
        out
    };
    if top.is_discrete() {
        report.dimension = lower;
        report.dimension_upper = lower;
        report.algebra_basis = structure
            .map(|s| s.identity_component.iter().map(|v| pad(v)).collect())
            .unwrap_or_default();
        report.discrete = lower == 0;
    } else {
        // the image in G/G' has a closure of dimension strictly between 0 and d
        report.dimension = lower;
        report.dimension_upper = top.identity_component_dim + m;
        // a non-discrete projection does not rule out a discrete Γ
        report.discrete = false;
        report.discreteness_certified = lower > 0;
    }
    report.abelianization = Some(verdict);
    Ok(report)
}
