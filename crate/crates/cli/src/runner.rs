//! Seeded batch runner. Trials run on a rayon pool; trial `i` draws all of
//! its randomness from `derive_seed(master, i)`, so records do not depend on
//! scheduling. Errors (and panics) inside a trial are recorded on that trial
//! and the run continues.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use denselab::abelian::{decide_density, parse_generators, witness_check, Certificate, DensityVerdict, Verdict};
use denselab::closure::{
    closure_dimension, commutator_orbit, estimate_z_radius, neighbourhood_of_radius, nilpotent_density_check,
    theorem_trial, verified_radius, ClosureConfig, DenseFlag, ZRadius,
};
use denselab::group::{GroupElement, GroupModel, ModelKind, NeighbourhoodSpec};
use denselab::lie::is_regular;
use denselab::optimality::{
    build_schottky_family, optimality_trial, permutation_probability, PieceFamily, PingPongCertificate,
};
use denselab::scalar::{qrank, FieldElement};
use denselab::seed::{derive_seed, trial_rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, Experiment, ExperimentConfig};

/// Report format version, bumped when the record layout changes.
pub const ARTIFACT_VERSION: &str = "1";

/// Sample pairs per bisection step when measuring a Z-radius.
pub const ZRADIUS_BUDGET: usize = 1000;

/// Pairs used to spot-check a measured neighbourhood before a theorem run.
pub const SPOT_CHECK_PAIRS: usize = 200;

/// Resampling budget for instances that must satisfy the filiform hypotheses.
const EXAMPLE_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("setup failed: {0}")]
    Setup(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One CSV cell. Floats are stored already rounded to 12 significant digits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn float(x: f64) -> Cell {
        Cell::Float(round12(x))
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Round to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal for an already-rounded float.
pub fn format_float(x: f64) -> String {
    let r = round12(x);
    if r != 0.0 && r.is_finite() && !(1e-6..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else if r == r.trunc() && r.is_finite() {
        format!("{r:.1}")
    } else {
        r.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// CSV row, keyed by column name.
    pub row: BTreeMap<String, Cell>,
    /// Events counted in the aggregate.
    pub flags: BTreeMap<String, bool>,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: u64,
    pub errors: u64,
    pub counts: BTreeMap<String, u64>,
    /// `count / trials` for every flag.
    pub fractions: BTreeMap<String, f64>,
    /// 95% Wilson intervals for the fractions.
    pub intervals: BTreeMap<String, [f64; 2]>,
    pub statistics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Everything a run produces. `summary.json` holds all but `records`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: ExperimentConfig,
    pub wall_clock_seconds: f64,
    pub columns: Vec<String>,
    pub aggregate: Aggregate,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Column order of the CSV for each experiment.
pub fn columns(experiment: Experiment) -> Vec<String> {
    let cols: &[&str] = match experiment {
        Experiment::Theorem => &["seed", "model", "all_regular", "dim", "dense", "discrete"],
        Experiment::Abelian => &["seed", "model", "generators", "verdict", "witness_verified"],
        Experiment::Nilpotent => &["seed", "model", "generators", "dense"],
        Experiment::Example5 => &["seed", "model", "attempts", "dim", "center", "dense", "discrete"],
        Experiment::Zradius => &["seed", "model", "radius", "iterates", "final_distance", "converged"],
        Experiment::Regularity => &["seed", "model", "multiplicity", "regular", "conjugate_regular"],
        Experiment::Optimality => &["seed", "pattern", "permutation_event", "discrete_certified"],
        Experiment::Densecheck => &["generators", "dim", "verdict", "verified"],
    };
    cols.iter().map(|c| c.to_string()).collect()
}

/// A trial's outcome before it is stamped with index and seed.
#[derive(Default)]
struct Outcome {
    row: Vec<(&'static str, Cell)>,
    flags: Vec<(&'static str, bool)>,
    detail: Value,
}

impl Outcome {
    fn cell(mut self, name: &'static str, c: Cell) -> Self {
        self.row.push((name, c));
        self
    }

    fn flag(mut self, name: &'static str, b: bool) -> Self {
        self.flags.push((name, b));
        self
    }

    fn detail(mut self, v: Value) -> Self {
        self.detail = v;
        self
    }
}

type TrialResult = Result<Outcome, String>;

/// Shared, read-only state built once before the trials run.
enum Setup {
    Theorem {
        model: GroupModel,
        w: NeighbourhoodSpec,
        closure: ClosureConfig,
    },
    Exact {
        model: GroupModel,
        k: usize,
    },
    Example {
        model: GroupModel,
        closure: ClosureConfig,
    },
    Zradius {
        model: GroupModel,
        radius: ZRadius,
        max_iter: usize,
        eps_id: f64,
    },
    Regularity {
        model: GroupModel,
    },
    Optimality {
        family: PieceFamily,
        certificate: PingPongCertificate,
    },
    Densecheck {
        gens: Vec<Vec<FieldElement>>,
        dim: usize,
    },
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn closure_config(c: &ExperimentConfig) -> Result<ClosureConfig, RunError> {
    let closure = ClosureConfig {
        word_length: c.word_length,
        rho: c.rho,
        eps_id: c.eps_id,
        max_iter: c.max_iter,
        ..ClosureConfig::default()
    };
    closure.validate().map_err(|e| RunError::Setup(e.to_string()))?;
    Ok(closure)
}

fn setup(c: &ExperimentConfig) -> Result<(Setup, BTreeMap<String, f64>), RunError> {
    let setup_err = |e: &dyn std::fmt::Display| RunError::Setup(e.to_string());
    let kind = c.model_kind()?;
    let model = GroupModel::new(kind).map_err(|e| setup_err(&e))?;
    let mut stats = BTreeMap::new();
    let s = match c.experiment {
        Experiment::Theorem => {
            let closure = closure_config(c)?;
            if kind.is_exact() {
                let w = model.default_neighbourhood();
                Setup::Theorem { model, w, closure }
            } else {
                let radius = estimate_z_radius(&model, ZRADIUS_BUDGET, c.max_iter, c.eps_id, c.seed)
                    .map_err(|e| setup_err(&e))?;
                let r = verified_radius(&model, &radius, SPOT_CHECK_PAIRS, c.max_iter, c.eps_id, c.seed)
                    .map_err(|e| setup_err(&e))?;
                stats.insert("z_radius".into(), radius.radius);
                stats.insert("sampling_radius".into(), r);
                let w = neighbourhood_of_radius(&model, r);
                Setup::Theorem { model, w, closure }
            }
        }
        Experiment::Abelian => Setup::Exact {
            k: c.n.unwrap_or(kind.dim() + 1),
            model,
        },
        Experiment::Nilpotent => Setup::Exact {
            k: c.n.unwrap_or(kind.abelianization_dim() + 1),
            model,
        },
        Experiment::Example5 => Setup::Example {
            model,
            closure: closure_config(c)?,
        },
        Experiment::Zradius => {
            let radius =
                estimate_z_radius(&model, ZRADIUS_BUDGET, c.max_iter, c.eps_id, c.seed).map_err(|e| setup_err(&e))?;
            stats.insert("z_radius".into(), radius.radius);
            stats.insert("z_radius_resolution".into(), radius.resolution());
            if let Some(f) = radius.failing {
                stats.insert("z_radius_failing".into(), f);
            }
            Setup::Zradius {
                model,
                radius,
                max_iter: c.max_iter,
                eps_id: c.eps_id,
            }
        }
        Experiment::Regularity => Setup::Regularity { model },
        Experiment::Optimality => {
            let (family, certificate) = build_schottky_family(c.n.unwrap_or(2), c.delta).map_err(|e| setup_err(&e))?;
            stats.insert("piece_radius".into(), family.radius());
            stats.insert("stretch".into(), certificate.stretch);
            stats.insert("margin".into(), certificate.margin);
            Setup::Optimality { family, certificate }
        }
        Experiment::Densecheck => {
            let path = c.input.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let (gens, dim) =
                parse_generators(&text).map_err(|e| RunError::Setup(format!("{}: {e}", path.display())))?;
            Setup::Densecheck { gens, dim }
        }
    };
    Ok((s, stats))
}

fn coords_text(g: &GroupElement) -> Value {
    match g.coords() {
        Some(c) => json!(c.iter().map(FieldElement::pretty).collect::<Vec<_>>()),
        None => json!(g.to_f64().into_iter().map(round12).collect::<Vec<_>>()),
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Dense => "dense",
        Verdict::NotDense => "not_dense",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Whether a density verdict's certificate checks out independently.
fn certificate_verified(verdict: &DensityVerdict, gens: &[Vec<FieldElement>]) -> bool {
    match &verdict.certificate {
        Certificate::Dense { independence, .. } => independence.is_independent(),
        Certificate::DenseClosure { irrational_rank, .. } => *irrational_rank > 0,
        Certificate::NotDense { functional, .. } => witness_check(functional, gens),
        Certificate::Inconclusive { .. } => false,
    }
}

fn sample_exact(model: &GroupModel, k: usize, seed: u64) -> Result<Vec<GroupElement>, String> {
    let w = model.default_neighbourhood();
    let mut rng = trial_rng(seed, 0);
    (0..k).map(|_| model.haar_sample(&w, &mut rng).map_err(err)).collect()
}

/// Vectors fed to the abelian decision: coordinates, plus `Z^n` on a torus.
fn abelian_vectors(model: &GroupModel, gens: &[GroupElement]) -> Result<Vec<Vec<FieldElement>>, String> {
    let mut out = gens
        .iter()
        .map(|g| model.abelianization(g).map_err(err))
        .collect::<Result<Vec<_>, _>>()?;
    if let ModelKind::Torus(n) = model.kind() {
        for i in 0..n {
            let mut e = vec![FieldElement::zero(); n];
            e[i] = FieldElement::one();
            out.push(e);
        }
    }
    Ok(out)
}

/// Density expected with probability one: more than `d` generators, or a torus.
fn density_expected(kind: ModelKind, k: usize) -> bool {
    matches!(kind, ModelKind::Torus(_)) || k > kind.abelianization_dim()
}

/// The filiform hypotheses: `(a₁,b₁)`, `(a₂,b₂)` linearly independent and
/// `a₁, a₂` linearly independent over Q.
fn filiform_hypotheses(g1: &GroupElement, g2: &GroupElement) -> bool {
    let (c1, c2) = (g1.coords().expect("exact"), g2.coords().expect("exact"));
    let det = &(&c1[0] * &c2[1]) - &(&c1[1] * &c2[0]);
    let a = [c1[0].coeffs().to_vec(), c2[0].coeffs().to_vec()];
    !det.is_zero() && qrank(&a).is_ok_and(|r| r == 2)
}

fn run_trial(setup: &Setup, kind: Option<ModelKind>, seed: u64) -> TrialResult {
    let model_cell = || Cell::Text(kind.map(|k| k.to_string()).unwrap_or_default());
    match setup {
        Setup::Theorem { model, w, closure, .. } => {
            let t = theorem_trial(model, w, seed, closure).map_err(err)?;
            let r = &t.report;
            Ok(Outcome::default()
                .cell("seed", Cell::Int(seed as i64))
                .cell("model", model_cell())
                .cell("all_regular", Cell::Bool(t.all_regular))
                .cell("dim", Cell::Int(r.dimension as i64))
                .cell("dense", Cell::Bool(r.is_dense()))
                .cell("discrete", Cell::Bool(r.discrete))
                .flag("dense_certified", r.dense == DenseFlag::Certified)
                .flag("dense", r.is_dense())
                .flag("discrete", r.discrete)
                .flag("all_regular", t.all_regular)
                .flag("full_dimension", r.dimension == model.dim())
                .detail(json!({
                    "generators": t.generators.iter().map(coords_text).collect::<Vec<_>>(),
                    "dimension_upper": r.dimension_upper,
                    "method": r.method,
                    "words_examined": r.words_examined,
                    "chart_failures": r.chart_failures,
                })))
        }
        Setup::Exact { model, k } if matches!(kind, Some(k) if k.is_abelian()) => {
            let gens = sample_exact(model, *k, seed)?;
            let vectors = abelian_vectors(model, &gens)?;
            let verdict = decide_density(&vectors, model.dim()).map_err(err)?;
            let verified = certificate_verified(&verdict, &vectors);
            let not_dense = verdict.verdict == Verdict::NotDense;
            Ok(Outcome::default()
                .cell("seed", Cell::Int(seed as i64))
                .cell("model", model_cell())
                .cell("generators", Cell::Int(*k as i64))
                .cell("verdict", Cell::Text(verdict_name(verdict.verdict).into()))
                .cell("witness_verified", Cell::Bool(not_dense && verified))
                .flag("dense_certified", verdict.is_dense() && verified)
                .flag("not_dense", not_dense)
                .flag("inconclusive", verdict.verdict == Verdict::Inconclusive)
                .flag("witness_verified", not_dense && verified)
                .flag("expected", verdict.is_dense() == density_expected(model.kind(), *k))
                .detail(json!({
                    "generators": gens.iter().map(coords_text).collect::<Vec<_>>(),
                    "certificate": verdict.certificate,
                })))
        }
        Setup::Exact { model, k } => {
            let gens = sample_exact(model, *k, seed)?;
            let check = nilpotent_density_check(model, &gens).map_err(err)?;
            let vectors = abelian_vectors(model, &gens)?;
            let verified = certificate_verified(&check.abelianization, &vectors);
            Ok(Outcome::default()
                .cell("seed", Cell::Int(seed as i64))
                .cell("model", model_cell())
                .cell("generators", Cell::Int(*k as i64))
                .cell("dense", Cell::Bool(check.dense))
                .flag("dense_certified", check.dense && verified)
                .flag("dense", check.dense)
                .flag("expected", check.dense == density_expected(model.kind(), *k))
                .detail(json!({
                    "generators": gens.iter().map(coords_text).collect::<Vec<_>>(),
                    "abelianization": check.abelianization.certificate,
                })))
        }
        Setup::Example { model, closure } => {
            let w = model.default_neighbourhood();
            let mut rng = trial_rng(seed, 0);
            let mut attempts = 0;
            let gens = loop {
                attempts += 1;
                let g1 = model.haar_sample(&w, &mut rng).map_err(err)?;
                let g2 = model.haar_sample(&w, &mut rng).map_err(err)?;
                if filiform_hypotheses(&g1, &g2) {
                    break [g1, g2];
                }
                if attempts == EXAMPLE_ATTEMPTS {
                    return Err(format!("no instance met the hypotheses in {attempts} attempts"));
                }
            };
            let r = closure_dimension(model, &gens, closure).map_err(err)?;
            let center = r.dimension == 1
                && r.algebra_basis
                    .first()
                    .is_some_and(|v| v[..3].iter().all(|x| *x == 0.0) && v[3] != 0.0);
            let neither = r.dimension == 1 && r.dimension_upper == 1 && center && !r.is_dense() && !r.discrete;
            let zeta = model.commutator(&gens[0], &gens[1]).map_err(err)?;
            Ok(Outcome::default()
                .cell("seed", Cell::Int(seed as i64))
                .cell("model", model_cell())
                .cell("attempts", Cell::Int(attempts as i64))
                .cell("dim", Cell::Int(r.dimension as i64))
                .cell("center", Cell::Bool(center))
                .cell("dense", Cell::Bool(r.is_dense()))
                .cell("discrete", Cell::Bool(r.discrete))
                .flag("center", center)
                .flag("neither_dense_nor_discrete", neither)
                .detail(json!({
                    "generators": gens.iter().map(coords_text).collect::<Vec<_>>(),
                    "commutator": coords_text(&zeta),
                })))
        }
        Setup::Zradius {
            model,
            radius,
            max_iter,
            eps_id,
        } => {
            let w = radius.neighbourhood(model);
            let mut rng = trial_rng(seed, 0);
            let g = model.haar_sample(&w, &mut rng).map_err(err)?;
            let x = model.haar_sample(&w, &mut rng).map_err(err)?;
            let orbit = commutator_orbit(model, &g, &x, *max_iter, *eps_id).map_err(err)?;
            let mut outcome = Outcome::default()
                .cell("seed", Cell::Int(seed as i64))
                .cell("model", model_cell())
                .cell("radius", Cell::float(radius.radius))
                .cell("iterates", Cell::Int(orbit.iterates as i64))
                .cell("final_distance", Cell::float(orbit.final_distance))
                .cell("converged", Cell::Bool(orbit.converged))
                .flag("converged", orbit.converged);
            if model.kind().is_nilpotent() {
                outcome = outcome.flag("within_three", orbit.converged && orbit.iterates <= 3);
            }
            Ok(outcome.detail(json!({ "g": coords_text(&g), "x": coords_text(&x) })))
        }
        Setup::Regularity { model } => {
            let w = model.default_neighbourhood();
            let mut rng = trial_rng(seed, 0);
            let g = model.haar_sample(&w, &mut rng).map_err(err)?;
            let h = model.haar_sample(&w, &mut rng).map_err(err)?;
            let conj = model
                .multiply(&model.multiply(&h, &g).map_err(err)?, &model.invert(&h).map_err(err)?)
                .map_err(err)?;
            let reg = is_regular(model, &g).map_err(err)?;
            let conj_reg = is_regular(model, &conj).map_err(err)?;
            Ok(Outcome::default()
                .cell("seed", Cell::Int(seed as i64))
                .cell("model", model_cell())
                .cell("multiplicity", Cell::Int(reg.multiplicity as i64))
                .cell("regular", Cell::Bool(reg.regular))
                .cell("conjugate_regular", Cell::Bool(conj_reg.regular))
                .flag("non_regular", !reg.regular)
                .flag("conjugation_mismatch", reg.regular != conj_reg.regular)
                .detail(json!({ "g": coords_text(&g), "h": coords_text(&h) })))
        }
        Setup::Optimality { family, certificate } => {
            let t = optimality_trial(family, certificate, seed).map_err(err)?;
            let pattern = t.pattern.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
            Ok(Outcome::default()
                .cell("seed", Cell::Int(seed as i64))
                .cell("pattern", Cell::Text(pattern))
                .cell("permutation_event", Cell::Bool(t.permutation_event))
                .cell("discrete_certified", Cell::Bool(t.discrete_certified))
                .flag("permutation_event", t.permutation_event)
                .flag("discrete_certified", t.discrete_certified)
                .flag("uncertified_event", t.permutation_event && !t.discrete_certified)
                .detail(json!({ "pattern": t.pattern })))
        }
        Setup::Densecheck { gens, dim } => {
            let verdict = decide_density(gens, *dim).map_err(err)?;
            let verified = certificate_verified(&verdict, gens);
            Ok(Outcome::default()
                .cell("generators", Cell::Int(gens.len() as i64))
                .cell("dim", Cell::Int(*dim as i64))
                .cell("verdict", Cell::Text(verdict_name(verdict.verdict).into()))
                .cell("verified", Cell::Bool(verified))
                .flag("dense", verdict.is_dense())
                .flag("verified", verified)
                .detail(json!({ "certificate": verdict.certificate })))
        }
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn record(setup: &Setup, config: &ExperimentConfig, kind: Option<ModelKind>, index: u64) -> TrialRecord {
    let seed = derive_seed(config.seed, index);
    let result = catch_unwind(AssertUnwindSafe(|| run_trial(setup, kind, seed)))
        .unwrap_or_else(|p| Err(format!("panic: {}", panic_message(p))));
    match result {
        Ok(o) => TrialRecord {
            index,
            seed,
            error: None,
            row: o.row.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            flags: o.flags.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            detail: o.detail,
        },
        Err(e) => TrialRecord {
            index,
            seed,
            error: Some(e),
            row: BTreeMap::new(),
            flags: BTreeMap::new(),
            detail: Value::Null,
        },
    }
}

/// 95% Wilson score interval.
pub fn wilson(successes: u64, n: u64) -> [f64; 2] {
    if n == 0 {
        return [0.0, 1.0];
    }
    let lo_exact = successes == 0;
    let hi_exact = successes == n;
    let z = 1.959963984540054;
    let (n, p) = (n as f64, successes as f64 / n as f64);
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    [
        if lo_exact {
            0.0
        } else {
            round12((center - half).max(0.0))
        },
        if hi_exact {
            1.0
        } else {
            round12((center + half).min(1.0))
        },
    ]
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

/// Counts, fractions and intervals over the records, plus the pass/fail
/// checks for the experiment.
pub fn aggregate(
    config: &ExperimentConfig,
    records: &[TrialRecord],
    mut statistics: BTreeMap<String, f64>,
) -> Aggregate {
    let trials = records.len() as u64;
    let errors = records.iter().filter(|r| r.error.is_some()).count() as u64;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for r in records {
        for (name, &hit) in &r.flags {
            *counts.entry(name.clone()).or_default() += hit as u64;
        }
    }
    let fraction = |n: u64| {
        if trials == 0 {
            0.0
        } else {
            round12(n as f64 / trials as f64)
        }
    };
    let fractions = counts.iter().map(|(k, &v)| (k.clone(), fraction(v))).collect();
    let intervals = counts.iter().map(|(k, &v)| (k.clone(), wilson(v, trials))).collect();
    let count = |k: &str| counts.get(k).copied().unwrap_or(0);
    let all = |k: &str| check(k, count(k) == trials, format!("{}/{trials}", count(k)));
    let none = |k: &str| check(k, count(k) == 0, format!("{} of {trials}", count(k)));

    let mut checks = vec![check("no_trial_errors", errors == 0, format!("{errors} errors"))];
    let kind = config.model_kind().ok();
    match config.experiment {
        Experiment::Theorem => {
            if kind.is_some_and(ModelKind::is_exact) {
                checks.push(all("dense_certified"));
            } else {
                let full = count("full_dimension");
                checks.push(check(
                    "full_dimension",
                    full as f64 >= 0.99 * trials as f64,
                    format!("{full}/{trials} (threshold 99%)"),
                ));
            }
        }
        Experiment::Abelian | Experiment::Nilpotent => {
            checks.push(all("expected"));
            if config.experiment == Experiment::Abelian {
                checks.push(none("inconclusive"));
                checks.push(check(
                    "witnesses_verified",
                    count("witness_verified") == count("not_dense"),
                    format!("{} of {} obstructions", count("witness_verified"), count("not_dense")),
                ));
            } else {
                checks.push(check(
                    "certificates_verified",
                    count("dense_certified") == count("dense"),
                    format!("{} of {} dense verdicts", count("dense_certified"), count("dense")),
                ));
            }
        }
        Experiment::Example5 => {
            checks.push(all("neither_dense_nor_discrete"));
            checks.push(all("center"));
        }
        Experiment::Zradius => {
            checks.push(all("converged"));
            if kind.is_some_and(ModelKind::is_nilpotent) {
                checks.push(all("within_three"));
            }
        }
        Experiment::Regularity => {
            checks.push(none("non_regular"));
            checks.push(none("conjugation_mismatch"));
        }
        Experiment::Optimality => {
            let p = permutation_probability(config.n.unwrap_or(2));
            let sigma = (p * (1.0 - p) / trials.max(1) as f64).sqrt();
            let freq = fraction(count("permutation_event"));
            statistics.insert("expected_probability".into(), p);
            statistics.insert("sigma".into(), sigma);
            statistics.insert("z_score".into(), if sigma > 0.0 { (freq - p) / sigma } else { 0.0 });
            checks.push(check(
                "frequency_within_4_sigma",
                (freq - p).abs() <= 4.0 * sigma,
                format!("{freq} vs {p} (σ = {sigma:.3e})"),
            ));
            checks.push(none("uncertified_event"));
        }
        Experiment::Densecheck => checks.push(all("verified")),
    }
    let statistics = statistics.into_iter().map(|(k, v)| (k, round12(v))).collect();
    let passed = checks.iter().all(|c| c.passed);
    Aggregate {
        trials,
        errors,
        counts,
        fractions,
        intervals,
        statistics,
        checks,
        passed,
    }
}

/// Run every trial of `config` and aggregate. Nothing is written to disk.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, RunError> {
    config.validate()?;
    let start = Instant::now();
    let (setup, statistics) = setup(config)?;
    let kind = config.model_kind().ok();
    let trials = if config.experiment == Experiment::Densecheck {
        1
    } else {
        config.trials
    };
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|i| record(&setup, config, kind, i))
        .collect();
    let aggregate = aggregate(config, &records, statistics);
    Ok(Report {
        version: ARTIFACT_VERSION.into(),
        config: config.clone(),
        wall_clock_seconds: round12(start.elapsed().as_secs_f64()),
        columns: columns(config.experiment),
        aggregate,
        records,
    })
}
