use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{LieError, Subspace};
use crate::scalar::{parse_rational, Matrix};

/// A finite-dimensional real Lie algebra given by rational structure
/// constants: `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraSpec {
    name: String,
    dim: usize,
    constants: Vec<BigRational>,
    labels: Vec<String>,
}

/// A failed structural check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `c[i][j][k] ≠ -c[j][i][k]`.
    Antisymmetry { i: usize, j: usize, k: usize },
    /// Component `k` of the Jacobi sum for `(e_i, e_j, e_l)` is nonzero.
    Jacobi { i: usize, j: usize, l: usize, k: usize },
}

/// Terms of the lower central series, `g^[1] = g`, `g^[k+1] = [g, g^[k]]`,
/// listed until the series hits zero or stabilizes (the stable term is
/// repeated once).
#[derive(Clone, Debug)]
pub struct CentralSeries {
    pub terms: Vec<Subspace<BigRational>>,
    pub nilpotent: bool,
    /// Nilpotency class: number of steps to reach zero.
    pub class: Option<usize>,
}

impl CentralSeries {
    pub fn dims(&self) -> Vec<usize> {
        self.terms.iter().map(Subspace::dim).collect()
    }

    pub fn last(&self) -> &Subspace<BigRational> {
        self.terms.last().expect("series has at least one term")
    }
}

impl LieAlgebraSpec {
    /// The abelian algebra of dimension `dim`.
    pub fn abelian(dim: usize) -> Self {
        Self::new(format!("abelian{dim}"), dim, Vec::new())
    }

    pub fn new(name: impl Into<String>, dim: usize, labels: Vec<String>) -> Self {
        let labels = if labels.len() == dim {
            labels
        } else {
            (0..dim).map(|i| format!("e{i}")).collect()
        };
        Self {
            name: name.into(),
            dim,
            constants: vec![BigRational::zero(); dim * dim * dim],
            labels,
        }
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    /// Set one raw constant without touching its antisymmetric partner.
    pub fn set_constant(&mut self, i: usize, j: usize, k: usize, value: BigRational) {
        let at = self.idx(i, j, k);
        self.constants[at] = value;
    }

    /// Declare `[e_i, e_j] = Σ value·e_k`, filling `[e_j, e_i]` by antisymmetry.
    pub fn with_bracket(mut self, i: usize, j: usize, terms: &[(usize, i64)]) -> Self {
        for &(k, v) in terms {
            let v = BigRational::from_integer(v.into());
            self.set_constant(j, i, k, -v.clone());
            self.set_constant(i, j, k, v);
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.constants[self.idx(i, j, k)]
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().all(Zero::is_zero)
    }

    pub fn bracket<T: crate::scalar::Scalar>(&self, x: &[T], y: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            if T::EXACT && x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if T::EXACT && y[j].is_zero() {
                    continue;
                }
                let xy = x[i].times(&y[j]);
                for (k, slot) in out.iter_mut().enumerate() {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        *slot = slot.plus(&xy.times(&T::from_rational(c)));
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad x = [x, ·]` in the standard basis.
    pub fn ad_matrix<T: crate::scalar::Scalar>(&self, x: &[T]) -> Matrix<T> {
        let n = self.dim;
        let mut m = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            for (k, v) in self.bracket(x, &e).into_iter().enumerate() {
                m[(k, j)] = v;
            }
        }
        m
    }

    /// Check antisymmetry and the Jacobi identity exactly.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let n = self.dim;
        let mut found = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if *self.constant(i, j, k) != -self.constant(j, i, k).clone() {
                        found.push(Violation::Antisymmetry { i, j, k });
                    }
                }
            }
        }
        let basis = Matrix::<BigRational>::identity(n).row_vectors();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let (a, b, c) = (&basis[i], &basis[j], &basis[l]);
                    let t1 = self.bracket(a, &self.bracket(b, c));
                    let t2 = self.bracket(b, &self.bracket(c, a));
                    let t3 = self.bracket(c, &self.bracket(a, b));
                    for k in 0..n {
                        if !(&t1[k] + &t2[k] + &t3[k]).is_zero() {
                            found.push(Violation::Jacobi { i, j, l, k });
                        }
                    }
                }
            }
        }
        if found.is_empty() {
            Ok(())
        } else {
            Err(found)
        }
    }

    pub fn lower_central_series(&self) -> CentralSeries {
        let full = Subspace::<BigRational>::full(self.dim);
        let mut terms = vec![full.clone()];
        loop {
            let last = terms.last().unwrap();
            if last.is_zero() {
                break;
            }
            let next = full.bracket(self, last);
            let stable = next.dim() == last.dim();
            terms.push(next);
            if stable {
                break;
            }
        }
        let nilpotent = terms.last().unwrap().is_zero();
        let class = nilpotent.then(|| terms.len() - 1);
        CentralSeries {
            terms,
            nilpotent,
            class,
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().nilpotent
    }

    /// The stable term of the lower central series: the smallest ideal with
    /// nilpotent quotient.
    pub fn nilpotent_shadow(&self) -> Subspace<BigRational> {
        self.lower_central_series().last().clone()
    }

    /// Derived algebra `[g, g]`.
    pub fn derived(&self) -> Subspace<BigRational> {
        let full = Subspace::full(self.dim);
        full.bracket(self, &full)
    }

    /// The quotient by an ideal, on a complement spanned by standard basis
    /// vectors (the non-pivot coordinates of the ideal's echelon basis).
    pub fn quotient(&self, ideal: &Subspace<BigRational>) -> Result<LieAlgebraSpec, LieError> {
        if let Some((i, j)) = ideal.violating_bracket(self) {
            return Err(LieError::NotIdeal {
                basis_index: i,
                ideal_index: j,
            });
        }
        let n = self.dim;
        let mut rows: Vec<Vec<BigRational>> = ideal.basis().to_vec();
        let mut complement = Vec::new();
        for i in 0..n {
            let mut e = vec![BigRational::zero(); n];
            e[i] = BigRational::one();
            let mut trial = rows.clone();
            trial.push(e.clone());
            if <BigRational as crate::scalar::Scalar>::rank(&Matrix::from_rows(trial.clone())) == rows.len() + 1 {
                rows = trial;
                complement.push(i);
            }
        }
        let q = complement.len();
        let change = Matrix::from_columns(&rows);
        let inv = change.inverse().expect("ideal basis plus complement is a basis");
        let skip = ideal.dim();
        let labels = complement.iter().map(|&i| self.labels[i].clone()).collect();
        let mut out = LieAlgebraSpec::new(format!("{}/ideal", self.name), q, labels);
        for (a, &ia) in complement.iter().enumerate() {
            for (b, &ib) in complement.iter().enumerate() {
                let mut ea = vec![BigRational::zero(); n];
                ea[ia] = BigRational::one();
                let mut eb = vec![BigRational::zero(); n];
                eb[ib] = BigRational::one();
                let coords = inv.apply(&self.bracket(&ea, &eb));
                for c in 0..q {
                    out.set_constant(a, b, c, coords[skip + c].clone());
                }
            }
        }
        Ok(out)
    }

    /// Parse the text format:
    ///
    /// ```text
    /// # comment
    /// name filiform4
    /// dim 4
    /// labels A B C D
    /// A B C 1      # c[A][B][C] = 1, partner c[B][A][C] = -1 filled in
    /// 0 2 3 1      # indices work as well as labels
    /// ```
    ///
    /// An antisymmetric partner is only filled in when it is not listed
    /// explicitly, so inconsistent files surface in [`LieAlgebraSpec::validate`].
    pub fn parse(text: &str) -> Result<Self, LieError> {
        let mut name = String::from("algebra");
        let mut dim = None;
        let mut labels: Vec<String> = Vec::new();
        let mut entries: Vec<(usize, [String; 3], String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "name" => name = tokens[1..].join(" "),
                "dim" => {
                    dim = Some(tokens.get(1).and_then(|t| t.parse().ok()).ok_or(LieError::Parse {
                        line: lineno + 1,
                        message: "dim needs a count".into(),
                    })?)
                }
                "labels" => labels = tokens[1..].iter().map(|s| s.to_string()).collect(),
                _ if tokens.len() == 4 => entries.push((
                    lineno + 1,
                    [tokens[0].into(), tokens[1].into(), tokens[2].into()],
                    tokens[3].into(),
                )),
                _ => {
                    return Err(LieError::Parse {
                        line: lineno + 1,
                        message: format!("unrecognized line {line:?}"),
                    })
                }
            }
        }
        let dim = dim.ok_or(LieError::Parse {
            line: 0,
            message: "missing dim".into(),
        })?;
        if !labels.is_empty() && labels.len() != dim {
            return Err(LieError::Parse {
                line: 0,
                message: format!("{} labels for dimension {dim}", labels.len()),
            });
        }
        let mut spec = LieAlgebraSpec::new(name, dim, labels);
        let resolve = |tok: &str, line: usize| -> Result<usize, LieError> {
            spec.labels
                .iter()
                .position(|l| l == tok)
                .or_else(|| tok.parse::<usize>().ok().filter(|&i| i < dim))
                .ok_or(LieError::Parse {
                    line,
                    message: format!("unknown basis element {tok:?}"),
                })
        };
        let mut explicit = HashMap::new();
        for (line, [a, b, c], v) in &entries {
            let (i, j, k) = (resolve(a, *line)?, resolve(b, *line)?, resolve(c, *line)?);
            let value = parse_rational(v).ok_or(LieError::Parse {
                line: *line,
                message: format!("bad rational {v:?}"),
            })?;
            explicit.insert((i, j, k), value);
        }
        for (&(i, j, k), v) in &explicit {
            spec.set_constant(i, j, k, v.clone());
            if !explicit.contains_key(&(j, i, k)) {
                spec.set_constant(j, i, k, -v.clone());
            }
        }
        Ok(spec)
    }

    /// Inverse of [`LieAlgebraSpec::parse`]; lists only entries with `i < j`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name {}", self.name);
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "labels {}", self.labels.join(" "));
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        let _ = writeln!(out, "{} {} {} {}", self.labels[i], self.labels[j], self.labels[k], c);
                    }
                }
            }
        }
        out
    }
}

/// Bundled algebras.
pub mod fixtures {
    use super::LieAlgebraSpec;

    fn load(text: &str) -> LieAlgebraSpec {
        LieAlgebraSpec::parse(text).expect("bundled fixture parses")
    }

    pub fn abelian3() -> LieAlgebraSpec {
        load(include_str!("../../fixtures/abelian3.lie"))
    }

    pub fn heisenberg() -> LieAlgebraSpec {
        load(include_str!("../../fixtures/heisenberg.lie"))
    }

    pub fn filiform4() -> LieAlgebraSpec {
        load(include_str!("../../fixtures/filiform4.lie"))
    }

    pub fn aff1() -> LieAlgebraSpec {
        load(include_str!("../../fixtures/aff1.lie"))
    }

    pub fn sl2() -> LieAlgebraSpec {
        load(include_str!("../../fixtures/sl2.lie"))
    }

    pub fn so3() -> LieAlgebraSpec {
        load(include_str!("../../fixtures/so3.lie"))
    }

    pub fn all() -> Vec<LieAlgebraSpec> {
        vec![abelian3(), heisenberg(), filiform4(), aff1(), sl2(), so3()]
    }
}
