use super::*;
use crate::abelian::Verdict;
use crate::group::NeighbourhoodSpec;
use crate::scalar::{FieldElement, Matrix};

fn fe(s: &str) -> FieldElement {
    s.parse().unwrap()
}

fn exact(model: &GroupModel, coords: &[&str]) -> GroupElement {
    model.element(coords.iter().map(|s| fe(s)).collect()).unwrap()
}

fn filiform() -> GroupModel {
    GroupModel::new(ModelKind::Filiform4).unwrap()
}

fn sl2() -> GroupModel {
    GroupModel::new(ModelKind::Sl2r).unwrap()
}

#[test]
fn abelian_orbit_converges_at_once() {
    let m = GroupModel::new(ModelKind::Euclidean(2)).unwrap();
    let g = exact(&m, &["sqrt2", "1/3"]);
    let x = exact(&m, &["5", "-sqrt3"]);
    let r = commutator_orbit(&m, &g, &x, 200, 1e-9).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterates, 1);
    assert_eq!(r.final_distance, 0.0);
}

#[test]
fn filiform_orbit_reaches_identity_exactly() {
    let m = filiform();
    let g = exact(&m, &["sqrt2", "-3/2", "1 + sqrt5", "7"]);
    let x = exact(&m, &["1/3", "sqrt3", "-2", "sqrt30"]);
    let r = commutator_orbit(&m, &g, &x, 200, 1e-9).unwrap();
    assert!(r.converged);
    assert!(r.iterates <= 3);
    assert_eq!(r.trajectory.len(), r.iterates);
}

#[test]
fn sl2_orbit_near_identity_converges() {
    let m = sl2();
    let g = m.exp_chart(&[0.03, -0.02, 0.03]).unwrap();
    let x = m.exp_chart(&[-0.02, 0.04, 0.01]).unwrap();
    let r = commutator_orbit(&m, &g, &x, 200, 1e-9).unwrap();
    assert!(r.converged, "{r:?}");
    assert!(r.iterates <= 60);
    assert!(r.final_distance < 1e-9);
}

#[test]
fn sl2_orbit_far_from_identity_does_not_converge() {
    let m = sl2();
    let g = m
        .element_from_matrix(Matrix::from_rows(vec![vec![4.0, 0.0], vec![0.0, 0.25]]))
        .unwrap();
    let x = m.exp_chart(&[1.2, 0.8, -1.3]).unwrap();
    let r = commutator_orbit(&m, &g, &x, 200, 1e-9).unwrap();
    assert!(!r.converged);
    assert!(r.trajectory.len() <= 200);
    assert!(!(r.final_distance < 1e-9));
}

#[test]
fn orbit_rejects_nonpositive_tolerance() {
    let m = filiform();
    let e = m.identity();
    assert!(matches!(
        commutator_orbit(&m, &e, &e, 10, 0.0),
        Err(ClosureError::Config(_))
    ));
}

#[test]
fn nilpotent_radius_is_the_upper_bound() {
    for kind in [ModelKind::Filiform4, ModelKind::Euclidean(2), ModelKind::Torus(2)] {
        let m = GroupModel::new(kind).unwrap();
        let z = estimate_z_radius(&m, 20, 200, 1e-9, 1).unwrap();
        assert_eq!(z.radius, radius_upper_bound(kind));
        assert_eq!(z.failing, None);
    }
}

#[test]
fn radius_budget_must_be_positive() {
    assert!(matches!(
        estimate_z_radius(&sl2(), 0, 200, 1e-9, 1),
        Err(ClosureError::Config(_))
    ));
}

#[test]
fn sl2_radius_is_bracketed() {
    let m = sl2();
    let z = estimate_z_radius(&m, 200, 200, 1e-9, 11).unwrap();
    assert!((0.02..=1.0).contains(&z.radius));
    let failing = z.failing.unwrap();
    assert!((failing - z.radius - z.resolution()).abs() < 1e-12);
    assert!(spot_check(&m, &z.neighbourhood(&m), 50, 200, 1e-9, 3).unwrap());
}

#[test]
fn euclidean_closure_delegates_to_density() {
    let m = GroupModel::new(ModelKind::Euclidean(2)).unwrap();
    let gens = [
        exact(&m, &["1", "0"]),
        exact(&m, &["0", "1"]),
        exact(&m, &["sqrt2", "sqrt3"]),
    ];
    let r = closure_dimension(&m, &gens, &ClosureConfig::default()).unwrap();
    assert_eq!(r.dimension, 2);
    assert_eq!(r.dense, DenseFlag::Certified);
    assert!(!r.discrete);
    assert_eq!(r.abelianization.unwrap().verdict, Verdict::Dense);
}

#[test]
fn euclidean_lattice_is_discrete() {
    let m = GroupModel::new(ModelKind::Euclidean(2)).unwrap();
    let gens = [exact(&m, &["1", "sqrt2"]), exact(&m, &["0", "1"])];
    let r = closure_dimension(&m, &gens, &ClosureConfig::default()).unwrap();
    assert_eq!(r.dimension, 0);
    assert!(r.discrete && r.discreteness_certified);
    assert_eq!(r.dense, DenseFlag::False);
}

#[test]
fn torus_rotation_by_irrational_is_dense() {
    let m = GroupModel::new(ModelKind::Torus(1)).unwrap();
    let dense = closure_dimension(&m, &[exact(&m, &["sqrt2 - 1"])], &ClosureConfig::default()).unwrap();
    assert_eq!(dense.dense, DenseFlag::Certified);
    let finite = closure_dimension(&m, &[exact(&m, &["1/3"])], &ClosureConfig::default()).unwrap();
    assert_eq!(finite.dimension, 0);
    assert!(finite.discrete);
}

/// Two filiform elements with independent `(a, b)` parts and Q-independent `a`s.
fn example_pair(m: &GroupModel) -> [GroupElement; 2] {
    [
        exact(m, &["sqrt2", "1", "1/2", "0"]),
        exact(m, &["sqrt3", "-1", "0", "sqrt5"]),
    ]
}

#[test]
fn filiform_pair_closure_is_the_center() {
    let m = filiform();
    let gens = example_pair(&m);
    let r = closure_dimension(&m, &gens, &ClosureConfig::default()).unwrap();
    assert_eq!(r.dimension, 1);
    assert_eq!(r.dimension_upper, 1);
    assert_eq!(r.dense, DenseFlag::False);
    assert!(!r.discrete);
    let v = &r.algebra_basis[0];
    assert!(v[..3].iter().all(|x| *x == 0.0) && v[3] != 0.0, "{v:?}");
    assert_eq!(r.abelianization.unwrap().verdict, Verdict::NotDense);
}

#[test]
fn filiform_rational_a_parts_give_a_discrete_group() {
    let m = filiform();
    let gens = [exact(&m, &["1", "0", "0", "0"]), exact(&m, &["0", "1", "0", "0"])];
    let r = closure_dimension(&m, &gens, &ClosureConfig::default()).unwrap();
    assert_eq!(r.dimension, 0);
    assert!(r.discrete && r.discreteness_certified);
}

#[test]
fn nilpotent_density_examples() {
    let m = filiform();
    let three = [
        exact(&m, &["1", "0", "sqrt5", "0"]),
        exact(&m, &["0", "1", "0", "1/7"]),
        exact(&m, &["sqrt2", "sqrt3", "0", "0"]),
    ];
    let d = nilpotent_density_check(&m, &three).unwrap();
    assert!(d.dense);
    let d = nilpotent_density_check(&m, &example_pair(&m)).unwrap();
    assert!(!d.dense);
    assert_eq!(d.abelianization.verdict, Verdict::NotDense);
    assert!(matches!(
        nilpotent_density_check(&sl2(), &[sl2().identity()]),
        Err(ClosureError::NotNilpotent { .. })
    ));
}

#[test]
fn euclidean_density_check_matches_decide_density() {
    let m = GroupModel::new(ModelKind::Euclidean(2)).unwrap();
    let gens = [
        exact(&m, &["1", "sqrt2"]),
        exact(&m, &["sqrt3", "1"]),
        exact(&m, &["1/2", "sqrt5"]),
    ];
    let vectors: Vec<Vec<FieldElement>> = gens.iter().map(|g| g.coords().unwrap().to_vec()).collect();
    let direct = crate::abelian::decide_density(&vectors, 2).unwrap();
    assert_eq!(nilpotent_density_check(&m, &gens).unwrap().abelianization, direct);
}

#[test]
fn word_search_finds_full_algebra_for_so3() {
    let m = GroupModel::new(ModelKind::So3).unwrap();
    let gens = [
        m.exp_chart(&[0.3, 0.1, -0.2]).unwrap(),
        m.exp_chart(&[-0.1, 0.25, 0.15]).unwrap(),
    ];
    let r = closure_dimension(&m, &gens, &ClosureConfig::default()).unwrap();
    assert_eq!(r.dimension, 3);
    assert_eq!(r.dense, DenseFlag::Statistical);
    assert!(!r.evidence.is_empty());
    for w in &r.evidence {
        let g = m.evaluate_word(&gens, w).unwrap();
        assert!(m.distance_to_identity(&g) < 0.2);
    }
}

#[test]
fn word_search_sees_nothing_for_a_single_large_rotation() {
    // a rotation by 2π/5 generates a finite group: only e is near e
    let m = GroupModel::new(ModelKind::So3).unwrap();
    let g = m.exp_chart(&[0.0, 0.0, 2.0 * std::f64::consts::PI / 5.0]).unwrap();
    let r = closure_dimension(&m, &[g], &ClosureConfig::default()).unwrap();
    assert_eq!(r.dimension, 0);
    assert!(r.discrete);
    assert!(!r.discreteness_certified);
}

#[test]
fn one_parameter_subgroup_has_dimension_one() {
    // two rotations about the same axis by incommensurable angles
    let m = GroupModel::new(ModelKind::So3).unwrap();
    let gens = [
        m.exp_chart(&[0.0, 0.0, 1.0]).unwrap(),
        m.exp_chart(&[0.0, 0.0, 2f64.sqrt()]).unwrap(),
    ];
    let r = closure_dimension(&m, &gens, &ClosureConfig::default()).unwrap();
    assert_eq!(r.dimension, 1);
    assert_eq!(r.dense, DenseFlag::False);
}

#[test]
fn reported_algebra_is_bracket_closed_and_ad_stable() {
    let m = GroupModel::new(ModelKind::So3).unwrap();
    let gens = [
        m.exp_chart(&[0.0, 0.0, 1.0]).unwrap(),
        m.exp_chart(&[0.0, 0.0, 0.3]).unwrap(),
    ];
    let r = closure_dimension(&m, &gens, &ClosureConfig::default()).unwrap();
    let span = crate::lie::Subspace::span(3, &r.algebra_basis);
    for a in &r.algebra_basis {
        for b in &r.algebra_basis {
            assert!(span.contains(&m.algebra().bracket(a, b)));
        }
        for g in &gens {
            assert!(span.contains(&m.adjoint_f64(g).unwrap().apply(a)));
        }
    }
}

#[test]
fn closure_requires_generators_of_the_right_model() {
    let m = filiform();
    assert!(matches!(
        closure_dimension(&m, &[], &ClosureConfig::default()),
        Err(ClosureError::NoGenerators)
    ));
    assert!(matches!(
        closure_dimension(&m, &[sl2().identity()], &ClosureConfig::default()),
        Err(ClosureError::Group(_))
    ));
}

#[test]
fn config_validation() {
    assert!(ClosureConfig::default().validate().is_ok());
    let bad = ClosureConfig {
        rho: 0.0,
        ..ClosureConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = ClosureConfig {
        word_length: 0,
        ..ClosureConfig::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn trials_are_deterministic_and_serialize() {
    let m = filiform();
    let w = m.default_neighbourhood();
    let a = theorem_trial(&m, &w, 9, &ClosureConfig::default()).unwrap();
    let b = theorem_trial(&m, &w, 9, &ClosureConfig::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.generators.len(), 5);
    assert!(a.all_regular);
    assert_eq!(a.report.dense, DenseFlag::Certified);
    let json = serde_json::to_string(&a).unwrap();
    let back: TrialResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back, a);
}

#[test]
fn sl2_trial_in_small_ball_is_full_dimensional() {
    let m = sl2();
    let w = NeighbourhoodSpec::exp_ball(ModelKind::Sl2r, 0.17);
    let t = theorem_trial(&m, &w, 4, &ClosureConfig::default()).unwrap();
    assert_eq!(t.report.dimension, 3);
    assert_eq!(t.report.dense, DenseFlag::Statistical);
}
