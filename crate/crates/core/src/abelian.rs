//! Certified density decisions for finitely generated subgroups of `R^n`.
//!
//! A subgroup `Γ = Z g_1 + … + Z g_k` fails to be dense exactly when some
//! nonzero linear functional `F` takes integer values on every generator;
//! such an `F` is the certificate for [`Verdict::NotDense`]. For `k = n + 1`
//! generators spanning `R^n`, writing the extra generator as
//! `Σ a_j b_j` in a basis drawn from the others, `Γ` is dense iff
//! `1, a_1, …, a_n` are linearly independent over Q.
//!
//! For other `k` the verdict comes from the closure structure: with an
//! R-basis `b_1..b_s` of the span taken from the generators and the others
//! written as `α^(l)` in that basis, the identity component of the closure
//! has dimension equal to the Q-rank of the matrix of irrational
//! coordinates of all `α^(l)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{
    primitive_integer_vector, q_independent_with_one, rref, FieldElement, Matrix, QIndependence, DEGREE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("ambient dimension must be at least 1")]
    ZeroAmbient,
    #[error("generator {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dense,
    NotDense,
    Inconclusive,
}

/// Why a subgroup fails to be dense.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstruction {
    /// The generators span a proper subspace; `F` vanishes on it.
    RankDeficient,
    /// `n` generators spanning `R^n` form a lattice; `F` is a dual-basis functional.
    Lattice,
    /// `n + 1` generators whose coefficients satisfy a rational relation.
    RationalRelation,
    /// Found from the closure structure (more than `n + 1` generators).
    ClosureStructure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `g_extra = Σ a_j g_{basis[j]}` with `{1, a_1, …, a_n}` Q-independent.
    Dense {
        basis: Vec<usize>,
        extra: usize,
        coefficients: Vec<FieldElement>,
        independence: QIndependence,
    },
    /// Dense by closure structure: the irrational coordinates have full Q-rank.
    DenseClosure {
        basis: Vec<usize>,
        irrational_rank: usize,
    },
    /// `F ≠ 0` with `F(g_i) ∈ Z` for every generator.
    NotDense {
        obstruction: Obstruction,
        functional: Vec<FieldElement>,
        values: Vec<FieldElement>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        relation: Option<QIndependence>,
    },
    Inconclusive {
        analysis: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityVerdict {
    pub verdict: Verdict,
    pub certificate: Certificate,
}

impl DensityVerdict {
    pub fn is_dense(&self) -> bool {
        self.verdict == Verdict::Dense
    }

    pub fn functional(&self) -> Option<&[FieldElement]> {
        match &self.certificate {
            Certificate::NotDense { functional, .. } => Some(functional),
            _ => None,
        }
    }
}

/// Identity component of the closure of a finitely generated subgroup of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureStructure {
    pub ambient: usize,
    /// Dimension of the real span.
    pub real_rank: usize,
    /// Generators forming an R-basis of the span.
    pub basis: Vec<usize>,
    /// Dimension of the identity component `V` of the closure.
    pub identity_component_dim: usize,
    /// A basis of `V` in ambient coordinates.
    pub identity_component: Vec<Vec<FieldElement>>,
}

impl ClosureStructure {
    pub fn is_dense(&self) -> bool {
        self.identity_component_dim == self.ambient
    }

    pub fn is_discrete(&self) -> bool {
        self.identity_component_dim == 0
    }
}

/// Coordinates of the generators in a greedily chosen basis.
struct Coordinates {
    basis: Vec<usize>,
    /// `alpha[l]` are the basis coordinates of non-basis generator `others[l]`.
    others: Vec<usize>,
    alpha: Vec<Vec<FieldElement>>,
}

fn check_shape(gens: &[Vec<FieldElement>], n: usize) -> Result<(), DensityError> {
    if n == 0 {
        return Err(DensityError::ZeroAmbient);
    }
    for (index, g) in gens.iter().enumerate() {
        if g.len() != n {
            return Err(DensityError::DimensionMismatch {
                index,
                found: g.len(),
                expected: n,
            });
        }
    }
    Ok(())
}

fn coordinates(gens: &[Vec<FieldElement>]) -> Coordinates {
    let mut basis: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<FieldElement>> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let mut trial = rows.clone();
        trial.push(g.clone());
        if crate::scalar::Scalar::rank(&Matrix::from_rows(trial.clone())) > rows.len() {
            rows = trial;
            basis.push(i);
        }
    }
    let s = basis.len();
    let others: Vec<usize> = (0..gens.len()).filter(|i| !basis.contains(i)).collect();
    let alpha = others
        .iter()
        .map(|&l| {
            // reduce [b_1 … b_s | g_l]; the last column holds the coordinates
            let mut cols: Vec<Vec<FieldElement>> = basis.iter().map(|&b| gens[b].clone()).collect();
            cols.push(gens[l].clone());
            let (red, _) = rref(&Matrix::from_columns(&cols));
            (0..s).map(|j| red[(j, s)].clone()).collect()
        })
        .collect();
    Coordinates { basis, others, alpha }
}

/// Rational `s × (7·m)` matrix of irrational coordinates of the `α^(l)`.
fn irrational_matrix(s: usize, alpha: &[Vec<FieldElement>]) -> Matrix<BigRational> {
    let cols = alpha.len() * (DEGREE - 1);
    let mut m = Matrix::<BigRational>::zeros(s, cols);
    for (l, a) in alpha.iter().enumerate() {
        for (j, x) in a.iter().enumerate() {
            for t in 1..DEGREE {
                m[(j, l * (DEGREE - 1) + t - 1)] = x.coeffs()[t].clone();
            }
        }
    }
    m
}

fn combine(coeffs: &[BigRational], vectors: &[&Vec<FieldElement>], n: usize) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::zero(); n];
    for (c, v) in coeffs.iter().zip(vectors) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += &x.scale(c);
        }
    }
    out
}

/// Identity component of the closure of `Z g_1 + … + Z g_k` in `R^n`.
pub fn closure_structure(gens: &[Vec<FieldElement>], n: usize) -> Result<ClosureStructure, DensityError> {
    check_shape(gens, n)?;
    let coords = coordinates(gens);
    let s = coords.basis.len();
    let m = irrational_matrix(s, &coords.alpha);
    let column_basis = <BigRational as crate::scalar::Scalar>::span_basis(&m.transpose().row_vectors(), s);
    let basis_vectors: Vec<&Vec<FieldElement>> = coords.basis.iter().map(|&b| &gens[b]).collect();
    let identity_component: Vec<Vec<FieldElement>> =
        column_basis.iter().map(|c| combine(c, &basis_vectors, n)).collect();
    Ok(ClosureStructure {
        ambient: n,
        real_rank: s,
        basis: coords.basis,
        identity_component_dim: identity_component.len(),
        identity_component,
    })
}

fn evaluate(functional: &[FieldElement], v: &[FieldElement]) -> FieldElement {
    functional
        .iter()
        .zip(v)
        .fold(FieldElement::zero(), |acc, (f, x)| &acc + &(f * x))
}

fn not_dense(
    obstruction: Obstruction,
    functional: Vec<FieldElement>,
    gens: &[Vec<FieldElement>],
    relation: Option<QIndependence>,
) -> DensityVerdict {
    let values = gens.iter().map(|g| evaluate(&functional, g)).collect();
    let verdict = DensityVerdict {
        verdict: Verdict::NotDense,
        certificate: Certificate::NotDense {
            obstruction,
            functional,
            values,
            relation,
        },
    };
    debug_assert!(witness_check(verdict.functional().unwrap(), gens));
    verdict
}

/// Inverse of the square matrix whose columns are the basis generators.
fn dual_basis(gens: &[Vec<FieldElement>], basis: &[usize]) -> Matrix<FieldElement> {
    let cols: Vec<Vec<FieldElement>> = basis.iter().map(|&b| gens[b].clone()).collect();
    Matrix::from_columns(&cols)
        .inverse()
        .expect("basis generators are independent")
}

/// Row functional `kᵀ B⁻¹`, so that `F(b_j) = k_j`.
fn functional_from(k: &[BigRational], dual: &Matrix<FieldElement>) -> Vec<FieldElement> {
    let n = dual.cols();
    (0..n)
        .map(|c| {
            k.iter()
                .enumerate()
                .fold(FieldElement::zero(), |acc, (r, kr)| &acc + &dual[(r, c)].scale(kr))
        })
        .collect()
}

fn integers(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().cloned().map(BigRational::from_integer).collect()
}

/// Decide whether the subgroup generated by `gens` is dense in `R^n`.
///
/// Verdicts are exact: every `NotDense` carries a functional that passes
/// [`witness_check`], every `Dense` carries an independence certificate.
/// The procedure is complete for any number of generators, so
/// [`Verdict::Inconclusive`] is never produced.
pub fn decide_density(gens: &[Vec<FieldElement>], n: usize) -> Result<DensityVerdict, DensityError> {
    check_shape(gens, n)?;
    if gens.len() == n + 1 && n <= CRAMER_MAX_DIM {
        if let Some(v) = dense_by_cramer(gens, n) {
            return Ok(v);
        }
    }
    if gens.len() == n && n <= CRAMER_MAX_DIM {
        if let Some(v) = lattice_by_cofactors(gens, n) {
            return Ok(v);
        }
    }
    let coords = coordinates(gens);
    let s = coords.basis.len();

    if s < n {
        // F vanishing on the span: any vector in the kernel of the generator rows
        let functional = if coords.basis.is_empty() {
            let mut e = vec![FieldElement::zero(); n];
            e[0] = FieldElement::one();
            e
        } else {
            let rows: Vec<Vec<FieldElement>> = coords.basis.iter().map(|&b| gens[b].clone()).collect();
            crate::scalar::Scalar::kernel(&Matrix::from_rows(rows))
                .into_iter()
                .next()
                .expect("proper subspace has a nonzero annihilator")
        };
        return Ok(not_dense(Obstruction::RankDeficient, functional, gens, None));
    }

    let dual = dual_basis(gens, &coords.basis);
    match gens.len() - n {
        0 => {
            let mut k = vec![BigRational::zero(); n];
            k[0] = BigRational::one();
            Ok(not_dense(Obstruction::Lattice, functional_from(&k, &dual), gens, None))
        }
        1 => {
            let a = coords.alpha[0].clone();
            match q_independent_with_one(&a) {
                QIndependence::Independent => Ok(DensityVerdict {
                    verdict: Verdict::Dense,
                    certificate: Certificate::Dense {
                        basis: coords.basis.clone(),
                        extra: coords.others[0],
                        coefficients: a,
                        independence: QIndependence::Independent,
                    },
                }),
                rel @ QIndependence::Relation { .. } => {
                    let QIndependence::Relation { coefficients } = &rel else {
                        unreachable!()
                    };
                    let k = integers(&coefficients[1..]);
                    let f = functional_from(&k, &dual);
                    Ok(not_dense(Obstruction::RationalRelation, f, gens, Some(rel)))
                }
            }
        }
        _ => {
            // a dense (n+1)-subset is the simplest certificate when one exists
            if let Some(v) = dense_subset(gens, n) {
                return Ok(v);
            }
            let m = irrational_matrix(s, &coords.alpha);
            let rank = crate::scalar::Scalar::rank(&m);
            if rank == n {
                return Ok(DensityVerdict {
                    verdict: Verdict::Dense,
                    certificate: Certificate::DenseClosure {
                        basis: coords.basis,
                        irrational_rank: rank,
                    },
                });
            }
            // k with kᵀ M = 0, scaled so that k·(rational part of α^(l)) ∈ Z
            let left_kernel = crate::scalar::Scalar::kernel(&m.transpose());
            let k = left_kernel
                .iter()
                .map(|v| primitive_integer_vector(v))
                .min_by_key(|v| v.iter().map(|c| c.magnitude().clone()).max().unwrap_or_default())
                .expect("rank below n leaves a left kernel");
            let mut scale = BigInt::one();
            for a in &coords.alpha {
                let dot = k.iter().zip(a).fold(BigRational::zero(), |acc, (ki, x)| {
                    acc + BigRational::from_integer(ki.clone()) * &x.coeffs()[0]
                });
                scale = scale.lcm(dot.denom());
            }
            let k: Vec<BigRational> = k.into_iter().map(|ki| BigRational::from_integer(ki * &scale)).collect();
            let f = functional_from(&k, &dual);
            Ok(not_dense(Obstruction::ClosureStructure, f, gens, None))
        }
    }
}

/// Largest dimension for which the determinant fast path is used.
const CRAMER_MAX_DIM: usize = 4;

/// Determinant by cofactor expansion; no field divisions.
fn determinant(cols: &[&Vec<FieldElement>]) -> FieldElement {
    fn minor(cols: &[&Vec<FieldElement>], rows: &[usize]) -> FieldElement {
        let Some((first, rest)) = cols.split_first() else {
            return FieldElement::one();
        };
        let mut acc = FieldElement::zero();
        for (pos, &r) in rows.iter().enumerate() {
            if first[r].is_zero() {
                continue;
            }
            let others: Vec<usize> = rows.iter().copied().filter(|&x| x != r).collect();
            let term = &first[r] * &minor(rest, &others);
            if pos % 2 == 0 {
                acc += &term;
            } else {
                acc -= &term;
            }
        }
        acc
    }
    let rows: Vec<usize> = (0..cols.len()).collect();
    minor(cols, &rows)
}

/// `n + 1` generators whose first `n` form a basis: by Cramer's rule
/// `a_j = D_j / D_0`, and `1, a_1, …, a_n` are Q-independent iff
/// `D_0, D_1, …, D_n` are. Returns `None` unless the verdict is `Dense`, so
/// that obstructions are always certified by the general path.
fn dense_by_cramer(gens: &[Vec<FieldElement>], n: usize) -> Option<DensityVerdict> {
    let basis: Vec<&Vec<FieldElement>> = gens[..n].iter().collect();
    let d0 = determinant(&basis);
    if d0.is_zero() {
        return None;
    }
    let mut dets = vec![d0.clone()];
    for j in 0..n {
        let mut cols = basis.clone();
        cols[j] = &gens[n];
        dets.push(determinant(&cols));
    }
    let lifted: Vec<Vec<BigRational>> = dets.iter().map(|d| d.coeffs().to_vec()).collect();
    if crate::scalar::qrank(&lifted).ok()? < n + 1 {
        return None;
    }
    let inv = d0.inv()?;
    Some(DensityVerdict {
        verdict: Verdict::Dense,
        certificate: Certificate::Dense {
            basis: (0..n).collect(),
            extra: n,
            coefficients: dets[1..].iter().map(|d| d * &inv).collect(),
            independence: QIndependence::Independent,
        },
    })
}

/// `n` independent generators: the first row of the inverse basis matrix,
/// read off as cofactors over the determinant. `None` when the generators
/// are dependent.
fn lattice_by_cofactors(gens: &[Vec<FieldElement>], n: usize) -> Option<DensityVerdict> {
    let basis: Vec<&Vec<FieldElement>> = gens.iter().collect();
    let inv = determinant(&basis).inv()?;
    let functional = (0..n)
        .map(|r| {
            let mut e = vec![FieldElement::zero(); n];
            e[r] = FieldElement::one();
            let mut cols = basis.clone();
            cols[0] = &e;
            &determinant(&cols) * &inv
        })
        .collect();
    Some(not_dense(Obstruction::Lattice, functional, gens, None))
}

fn dense_subset(gens: &[Vec<FieldElement>], n: usize) -> Option<DensityVerdict> {
    let k = gens.len();
    let mut idx: Vec<usize> = (0..=n).collect();
    loop {
        let subset: Vec<Vec<FieldElement>> = idx.iter().map(|&i| gens[i].clone()).collect();
        if let Ok(v) = decide_density(&subset, n) {
            if let Certificate::Dense {
                basis,
                extra,
                coefficients,
                independence,
            } = v.certificate
            {
                return Some(DensityVerdict {
                    verdict: Verdict::Dense,
                    certificate: Certificate::Dense {
                        basis: basis.iter().map(|&b| idx[b]).collect(),
                        extra: idx[extra],
                        coefficients,
                        independence,
                    },
                });
            }
        }
        // next combination in lexicographic order
        let r = n + 1;
        let mut i = r;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] < k - r + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..=n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// True iff `F ≠ 0` and `F(g_i) ∈ Z` for every generator, decided exactly.
pub fn witness_check(functional: &[FieldElement], gens: &[Vec<FieldElement>]) -> bool {
    if functional.iter().all(FieldElement::is_zero) {
        return false;
    }
    gens.iter()
        .all(|g| g.len() == functional.len() && evaluate(functional, g).is_integer())
}

/// Split a generator line into coordinates: on `,` or `;` outside
/// parentheses when present, otherwise on whitespace.
fn split_coordinates(line: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    let has_separator = {
        let mut d = 0;
        line.chars().any(|c| {
            match c {
                '(' => d += 1,
                ')' => d -= 1,
                _ => {}
            }
            d == 0 && (c == ',' || c == ';')
        })
    };
    for c in line.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let split = if has_separator {
            depth == 0 && (c == ',' || c == ';')
        } else {
            depth == 0 && c.is_whitespace()
        };
        if split {
            if !current.trim().is_empty() {
                parts.push(current.trim().to_string());
            }
            current.clear();
        } else {
            current.push(c);
        }
    }
    if !current.trim().is_empty() {
        parts.push(current.trim().to_string());
    }
    parts
}

/// Parse a generator file: one vector per line, coordinates as field
/// element strings (`1/2`, `sqrt2`, `1 + sqrt3`, or the 8-tuple form).
/// Blank lines and `#` comments are ignored. Returns the vectors and their
/// common dimension.
pub fn parse_generators(text: &str) -> Result<(Vec<Vec<FieldElement>>, usize), DensityError> {
    let mut gens = Vec::new();
    let mut dim = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let coords: Vec<FieldElement> = split_coordinates(line)
            .iter()
            .map(|p| {
                p.parse().map_err(|e: crate::scalar::ScalarError| DensityError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(DensityError::Parse {
                    line: i + 1,
                    message: format!("expected {d} coordinates, got {}", coords.len()),
                })
            }
            _ => {}
        }
        gens.push(coords);
    }
    let dim = dim.ok_or(DensityError::Parse {
        line: 0,
        message: "no generators".into(),
    })?;
    Ok((gens, dim))
}
