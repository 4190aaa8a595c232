//! The example families and their declared check suites.

use hsoliton_core::examples::*;
use hsoliton_core::expr::{evaluate, parse_expression};
use hsoliton_core::geometry::sample_points;
use hsoliton_core::soliton::{
    conformal_killing_check, gradient_soliton_residual, lambda_summary, soliton_residual, Classification,
};
use hsoliton_core::suites::{run_example, CheckOptions};
use hsoliton_core::{Error, ParameterBinding};

fn opts() -> CheckOptions {
    CheckOptions::default()
}

#[test]
fn every_example_suite_realizes_its_verdicts() {
    for id in ExampleId::ALL {
        let out = run_example(&ExampleSpec::new(id), &opts()).unwrap();
        for c in &out.checks {
            assert!(c.realized(), "{id}: {} sup {:e}", c.report.name, c.report.sup_residual);
        }
        assert!(out.pass(), "{id}");
    }
}

#[test]
fn space_form_families() {
    let s = example_space_form(1.0, 3, 2.0, 1.0).unwrap();
    let pts = sample_points(s.metric().chart(), Some(s.metric()), s.binding(), 200, 42).unwrap();
    assert!(gradient_soliton_residual(&s, &pts, 1e-8).unwrap().pass);

    let hyp = ExampleSpec::new(ExampleId::SpaceFormGradient)
        .with("c", -1.0)
        .unwrap()
        .with("tau", 5.0)
        .unwrap();
    let out = run_example(&hyp, &opts()).unwrap();
    assert!(out.pass());
    assert_eq!(out.classification, Some(Classification::Expanding));

    assert!(matches!(example_space_form(1.0, 3, 2.0, 0.2), Err(Error::Invalid(_))));
    assert!(example_space_form(1.0, 3, 2.0, 1.0 / 3.0).is_err());
    assert!(example_space_form(0.5, 3, 2.0, 1.0).is_err());
    assert!(example_space_form(1.0, 3, 0.0, 1.0).is_err());
    assert!(example_space_form(1.0, 2, 2.0, 1.0).is_err());
}

#[test]
fn euclidean_gradient_family() {
    let out = run_example(&ExampleSpec::new(ExampleId::EuclideanGradient), &opts()).unwrap();
    assert!(out.check("gradient-soliton-equation").unwrap().report.sup_residual < 1e-10);
    assert_eq!(out.classification, Some(Classification::Shrinking));
    // L_X g = 4g, a homothety
    assert_eq!(out.trivial, Some(true));
    assert!((out.homothety.unwrap() - 4.0).abs() < 1e-10);
    assert!(example_euclidean_gradient(3, 3.0, 0.0).is_err());
}

#[test]
fn claimed_field_fails_in_higher_dimension() {
    for n in [3, 4] {
        let ex = example_euclidean_claimed_conformal(n).unwrap();
        assert!(!ex.expect_conformal);
        let b = ParameterBinding::new();
        let pts = sample_points(ex.metric.chart(), Some(&ex.metric), &b, 100, 9).unwrap();
        let v = conformal_killing_check(&ex.metric, &ex.field, &b, &pts, 1e-8).unwrap();
        assert!(!v.conformal, "n = {n}");

        let fixed = example_euclidean_conformal_corrected(n).unwrap();
        let v = conformal_killing_check(&fixed.metric, &fixed.field, &b, &pts, 1e-10).unwrap();
        assert!(v.conformal);
        for (p, r) in pts.iter().zip(&v.rho) {
            assert!((r - p.coords[n - 1]).abs() < 1e-12);
        }
    }
}

#[test]
fn claimed_field_at_a_hand_computed_point() {
    let ex = example_euclidean_claimed_conformal(3).unwrap();
    let b = ParameterBinding::new();
    let p = [1.0, 0.0, 1.0];
    let e = ex.expected_traceless.get(0, 2);
    assert_eq!(evaluate(e, &p, &b).unwrap(), 0.5);
    assert_eq!(evaluate(&ex.expected_rho, &p, &b).unwrap(), 1.0);
}

#[test]
fn pseudo_hyperbolic_families() {
    let ph = example_pseudo_hyperbolic(3, -1.0, 1.0, 0.0, PseudoH::NegMOverU(2.0)).unwrap();
    assert_eq!(ph.structure.lambda().as_const(), Some(-4.0));
    let out = run_example(&ExampleSpec::new(ExampleId::PseudoHyperbolic), &opts()).unwrap();
    assert!(out.pass());
    assert_eq!(out.classification, Some(Classification::Expanding));

    let h = parse_expression("sinh(t)", &["t"], &[]).unwrap();
    let s = example_pseudo_hyperbolic(3, -1.0, 1.0, 0.0, PseudoH::Function(h))
        .unwrap()
        .structure;
    let pts = sample_points(s.metric().chart(), Some(s.metric()), s.binding(), 200, 42).unwrap();
    assert!(soliton_residual(&s, &pts, 1e-8).unwrap().pass);
    assert!(!lambda_summary(&s, &pts).unwrap().is_constant());

    assert!(example_pseudo_hyperbolic(3, 1.0, 1.0, 0.0, PseudoH::NegMOverU(2.0)).is_err());
    assert!(example_pseudo_hyperbolic(3, -1.0, 0.0, 0.0, PseudoH::NegMOverU(2.0)).is_err());
    assert!(example_pseudo_hyperbolic(3, -1.0, 1.0, -1.0, PseudoH::NegMOverU(2.0)).is_err());
    let bad_h = parse_expression("x1", &["t", "x1"], &[]).unwrap();
    assert!(example_pseudo_hyperbolic(3, -1.0, 1.0, 0.0, PseudoH::Function(bad_h)).is_err());
}

#[test]
fn neg_m_sphere_family() {
    let s = example_neg_m_sphere(3, 2.0, 1.0, 2.0).unwrap();
    let pts = sample_points(s.metric().chart(), Some(s.metric()), s.binding(), 200, 42).unwrap();
    assert!(gradient_soliton_residual(&s, &pts, 1e-8).unwrap().pass);
    let lam = lambda_summary(&s, &pts).unwrap();
    assert!(lam.spread > 1e-8, "λ genuinely varies");

    assert!(matches!(example_neg_m_sphere(3, 2.0, 1.0, 1.0), Err(Error::Invalid(_))));
    assert!(example_neg_m_sphere(3, 0.0, 1.0, 2.0).is_err());

    let einstein = run_example(
        &ExampleSpec::new(ExampleId::NegMSphere).with("a", 0.0).unwrap(),
        &opts(),
    )
    .unwrap();
    assert!(einstein.pass());
    assert_eq!(einstein.trivial, Some(true));
}

#[test]
fn example_ids_round_trip() {
    for id in ExampleId::ALL {
        assert_eq!(id.as_str().parse::<ExampleId>().unwrap(), id);
    }
    assert!("nope".parse::<ExampleId>().is_err());
    assert!(ExampleSpec::new(ExampleId::NegMSphere).with("tau", 1.0).is_err());
}
