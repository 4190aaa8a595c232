//! Soliton residuals, classification, conserved quantities and the
//! warped Einstein construction.

use std::sync::Arc;

use hsoliton_core::examples::{
    example_euclidean_claimed_conformal, example_euclidean_gradient, example_neg_m_sphere, example_pseudo_hyperbolic,
    example_space_form, example_warping_profile, PseudoH,
};
use hsoliton_core::expr::{evaluate, sum, Expr, ParameterBinding};
use hsoliton_core::geometry::random::{random_metric, random_scalar};
use hsoliton_core::geometry::{d_scalar_on, gradient, sample_points, trace, MetricField, PointSample, VectorField};
use hsoliton_core::report::{pointwise, Residual};
use hsoliton_core::soliton::*;
use hsoliton_core::spaces::{
    einstein_fiber, flat_fiber, height_function, last_axis, make_euclidean, make_sphere, Fiber,
};
use hsoliton_core::Error;
use proptest::prelude::*;

const SEED: u64 = 42;

fn nob() -> ParameterBinding {
    ParameterBinding::new()
}

fn pts_for(s: &SolitonStructure, count: usize) -> Vec<PointSample> {
    sample_points(s.metric().chart(), Some(s.metric()), s.binding(), count, SEED).unwrap()
}

fn pts_on(g: &MetricField, count: usize) -> Vec<PointSample> {
    sample_points(g.chart(), Some(g), &nob(), count, SEED).unwrap()
}

fn at(e: &Expr, p: &[f64]) -> f64 {
    evaluate(e, p, &nob()).unwrap()
}

fn flat(n: usize) -> Arc<MetricField> {
    make_euclidean(n).unwrap().metric().clone()
}

fn sphere_hv(n: usize) -> (Arc<MetricField>, Expr) {
    let s = make_sphere(n, 1.0).unwrap();
    let h = height_function(&s, &last_axis(n)).unwrap().field;
    (s.metric().clone(), h)
}

fn position(n: usize) -> VectorField {
    VectorField((0..n).map(Expr::coord).collect())
}

#[test]
fn flat_trivial_soliton() {
    let s = SolitonStructure::new(
        flat(3),
        Drift::Vector(VectorField::zero(3)),
        Expr::one(),
        Expr::zero(),
        nob(),
    )
    .unwrap();
    let r = soliton_residual(&s, &pts_for(&s, 50), 1e-12).unwrap();
    assert_eq!(r.sup_residual, 0.0);
    assert!(matches!(
        gradient_soliton_residual(&s, &pts_for(&s, 5), 1e-8),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn shifted_lambda_gives_norm_of_shifted_metric() {
    let s = example_space_form(1.0, 3, 2.0, 1.0).unwrap();
    let pts = pts_for(&s, 200);
    assert!(soliton_residual(&s, &pts, 1e-8).unwrap().pass);
    let off = s.with_lambda(s.lambda() + 0.1);
    let r = soliton_residual(&off, &pts, 1e-8).unwrap();
    assert!(!r.pass);
    for v in &r.residuals {
        assert!((v - 0.1 * 3f64.sqrt()).abs() < 1e-9);
    }
}

#[test]
fn gradient_residual_examples() {
    let e = example_euclidean_gradient(3, 3.0, 1.0).unwrap();
    assert!(gradient_soliton_residual(&e, &pts_for(&e, 200), 1e-10).unwrap().pass);

    let (g, _) = sphere_hv(3);
    let c = SolitonStructure::new(
        g,
        Drift::Potential(Expr::constant(1.5)),
        Expr::one(),
        Expr::constant(2.0),
        nob(),
    )
    .unwrap();
    assert!(gradient_soliton_residual(&c, &pts_for(&c, 100), 1e-10).unwrap().pass);

    let neg = example_neg_m_sphere(3, 2.0, 1.0, 2.0).unwrap();
    assert!(gradient_soliton_residual(&neg, &pts_for(&neg, 200), 1e-8).unwrap().pass);
}

#[test]
fn gradient_and_vector_forms_agree_pointwise() {
    for s in [
        example_space_form(1.0, 3, 2.0, 1.0).unwrap(),
        example_euclidean_gradient(3, 3.0, 1.0).unwrap(),
        example_neg_m_sphere(4, 3.0, 0.5, 1.0).unwrap(),
    ] {
        let pts = pts_for(&s, 100);
        let a = soliton_residual(&s, &pts, 1e-8).unwrap();
        let b = gradient_soliton_residual(&s, &pts, 1e-8).unwrap();
        for (x, y) in a.residuals.iter().zip(&b.residuals) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(gradient_equivalence_residual(&s, &pts, 1e-10).unwrap().pass);
        assert!(trace_identity_residual(&s, &pts, 1e-10).unwrap().pass);
    }
}

#[test]
fn derived_field_invariants() {
    let s = example_space_form(1.0, 3, 2.0, 1.0).unwrap();
    let g = s.metric();
    let d = derived_fields(&s).unwrap();
    let pts = pts_for(&s, 100);
    let b = s.binding();
    let tr = |t| {
        pointwise(g, b, &pts, &Residual::Scalar(trace(g, t)))
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max)
    };
    assert!(tr(&d.s_ring) < 1e-10);
    assert!(tr(&d.ric_ring) < 1e-10);
    let r = &d.rho * s.h() - (s.lambda() - &d.scalar / 3.0);
    assert!(
        pointwise(g, b, &pts, &Residual::Scalar(r))
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max)
            < 1e-12
    );

    let zero_h = SolitonStructure::new(
        flat(3),
        Drift::Vector(VectorField::zero(3)),
        Expr::zero(),
        Expr::zero(),
        nob(),
    )
    .unwrap();
    let rho = rho_samples(&zero_h, &pts_for(&zero_h, 10)).unwrap();
    assert_eq!(rho.excluded, 10);
    assert!(rho.values.iter().all(Option::is_none));
}

#[test]
fn quasi_einstein_and_substitution() {
    let (g, _) = sphere_hv(3);
    let q = QuasiEinsteinStructure {
        metric: g.clone(),
        f: Expr::zero(),
        mu: Expr::constant(-0.5),
        lambda: Expr::constant(2.0),
        binding: nob(),
    };
    assert!(quasi_einstein_residual(&q, &pts_on(&g, 50), 1e-10).unwrap().pass);
    let u = substitute_u_for_f(&q, 2.0).unwrap();
    assert_eq!(u.potential().unwrap().as_const(), Some(1.0));

    let (m, tau) = (3.0, 1.0);
    let e = flat(3);
    let r2 = sum((0..3).map(|i| Expr::coord(i).powi(2)));
    let q = QuasiEinsteinStructure {
        metric: e.clone(),
        f: m * (tau + &r2).ln(),
        mu: Expr::constant(-1.0 / m),
        lambda: 2.0 * m / (tau + &r2),
        binding: nob(),
    };
    let pts = pts_on(&e, 100);
    let qe = quasi_einstein_residual(&q, &pts, 1e-10).unwrap();
    let s = substitute_u_for_f(&q, m).unwrap();
    assert_eq!(s.form(), HForm::MOverU(m));
    for p in &pts {
        assert!((at(s.potential().unwrap(), &p.coords) - at(&(tau + &r2), &p.coords)).abs() < 1e-12);
    }
    let gs = gradient_soliton_residual(&s, &pts, 1e-10).unwrap();
    assert!(qe.pass && gs.pass);

    let wrong = QuasiEinsteinStructure {
        lambda: Expr::constant(1.0),
        ..q.clone()
    };
    assert!(quasi_einstein_residual(&wrong, &pts, 1e-10).unwrap().sup_residual > 0.1);
    assert!(matches!(substitute_u_for_f(&q, 2.0), Err(Error::Precondition(_))));
}

#[test]
fn substitution_identity_on_random_metrics() {
    for seed in 0..4 {
        let g = random_metric(seed, 3, 0.1).unwrap();
        let f = random_scalar(seed, 3);
        let pts = pts_on(&g, 100);
        for m in [2.0, -3.0] {
            let sup = pointwise(&g, &nob(), &pts, &substitution_identity(&g, &f, m))
                .unwrap()
                .into_iter()
                .fold(0.0, f64::max);
            assert!(sup < 1e-9, "seed {seed} m {m}: {sup:e}");
        }
    }
}

#[test]
fn lambda_classification() {
    let e = example_euclidean_gradient(3, 3.0, 1.0).unwrap();
    assert_eq!(
        classify_lambda(&e, &pts_for(&e, 200)).unwrap(),
        Classification::Shrinking
    );
    let ph = example_pseudo_hyperbolic(3, -1.0, 1.0, 0.0, PseudoH::NegMOverU(2.0))
        .unwrap()
        .structure;
    assert_eq!(
        classify_lambda(&ph, &pts_for(&ph, 50)).unwrap(),
        Classification::Expanding
    );
    let (g, hv) = sphere_hv(3);
    let s = SolitonStructure::new(g, Drift::Vector(VectorField::zero(3)), Expr::one(), hv, nob()).unwrap();
    assert_eq!(
        classify_lambda(&s, &pts_for(&s, 200)).unwrap(),
        Classification::Undefined
    );
    let steady = SolitonStructure::new(
        flat(3),
        Drift::Vector(VectorField::zero(3)),
        Expr::one(),
        Expr::zero(),
        nob(),
    )
    .unwrap();
    assert_eq!(
        classify_lambda(&steady, &pts_for(&steady, 10)).unwrap(),
        Classification::Steady
    );
}

#[test]
fn triviality_examples() {
    let zero = SolitonStructure::new(
        flat(3),
        Drift::Vector(VectorField::zero(3)),
        Expr::one(),
        Expr::zero(),
        nob(),
    )
    .unwrap();
    let t = triviality_check(&zero, &pts_for(&zero, 50), 1e-10).unwrap();
    assert!(t.trivial);
    assert_eq!(t.homothety, 0.0);

    let pos = SolitonStructure::new(flat(3), Drift::Vector(position(3)), Expr::one(), Expr::zero(), nob()).unwrap();
    let t = triviality_check(&pos, &pts_for(&pos, 50), 1e-10).unwrap();
    assert!(t.trivial);
    assert!((t.homothety - 2.0).abs() < 1e-14);

    let sf = example_space_form(1.0, 3, 2.0, 1.0).unwrap();
    let t = triviality_check(&sf, &pts_for(&sf, 200), 1e-8).unwrap();
    assert!(t.traceless.pass, "∇u is conformal");
    assert!(!t.trivial, "but not homothetic");
}

#[test]
fn conformal_killing_examples() {
    let e = flat(3);
    let pts = pts_on(&e, 100);
    let v = conformal_killing_check(&e, &position(3), &nob(), &pts, 1e-10).unwrap();
    assert!(v.conformal);
    assert!(v.rho.iter().all(|r| *r == 1.0));

    let (g, hv) = sphere_hv(3);
    let spts = pts_on(&g, 100);
    let v = conformal_killing_check(&g, &gradient(&g, &hv), &nob(), &spts, 1e-9).unwrap();
    assert!(v.conformal);
    for (p, r) in spts.iter().zip(&v.rho) {
        assert!((r + at(&hv, &p.coords)).abs() < 1e-12);
    }

    let claimed = example_euclidean_claimed_conformal(3).unwrap();
    let v = conformal_killing_check(&claimed.metric, &claimed.field, &nob(), &pts, 1e-8).unwrap();
    assert!(!v.conformal);
    for p in &pts {
        let x = &p.coords;
        for i in 0..2 {
            assert!((at(v.s_ring.get(i, 2), x) - x[i] / 2.0).abs() < 1e-10);
        }
    }
}

#[test]
fn conformal_factor_examples() {
    let (g, hv) = sphere_hv(3);
    let pts = pts_on(&g, 200);
    assert!(
        conformal_factor_hessian_check(&g, &hv, &nob(), &pts, 1e-9)
            .unwrap()
            .pass
    );
    let u = potential_from_factor(&g, &hv, &nob(), &pts).unwrap();
    for p in &pts {
        assert!((at(&u, &p.coords) + at(&hv, &p.coords)).abs() < 1e-12);
    }
    assert!(
        conformal_potential_residual(&g, &u, &hv, &nob(), &pts, 1e-9)
            .unwrap()
            .pass
    );
    assert!(potential_from_factor(&g, &Expr::zero(), &nob(), &pts)
        .unwrap()
        .is_zero());

    let e = flat(3);
    let epts = pts_on(&e, 50);
    assert_eq!(
        conformal_factor_hessian_check(&e, &Expr::constant(3.0), &nob(), &epts, 1e-12)
            .unwrap()
            .sup_residual,
        0.0
    );
    assert_eq!(
        conformal_factor_hessian_check(&e, &Expr::coord(0), &nob(), &epts, 1e-12)
            .unwrap()
            .sup_residual,
        0.0
    );
    assert!(matches!(
        potential_from_factor(&e, &Expr::coord(0), &nob(), &epts),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn divric_identity_examples() {
    let sf = example_space_form(1.0, 3, 2.0, 1.0).unwrap();
    assert!(divric_identity_residual(&sf, &pts_for(&sf, 200), 1e-8).unwrap().pass);
    let e = example_euclidean_gradient(3, 3.0, 1.0).unwrap();
    assert!(divric_identity_residual(&e, &pts_for(&e, 200), 1e-7).unwrap().pass);
    let bad = e.with_lambda(e.lambda() + 0.5);
    assert!(matches!(
        divric_identity_residual(&bad, &pts_for(&bad, 20), 1e-7),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn conserved_quantity_examples() {
    let ph = example_pseudo_hyperbolic(3, -1.0, 1.0, 0.0, PseudoH::NegMOverU(2.0))
        .unwrap()
        .structure;
    assert_eq!(ph.lambda().as_const(), Some(-4.0));
    let mu = mu_field(&ph, &pts_for(&ph, 200), 1e-9).unwrap();
    assert!(mu.deviation < 1e-9 && mu.mu.abs() < 1e-9);

    // profile base with l = 1 carries μ = −(m−1)l
    let prof = example_warping_profile(-1.0, 1.0, 1.0, 2.0).unwrap();
    let mu = mu_field(&prof, &pts_for(&prof, 200), 1e-9).unwrap();
    assert!((mu.mu + 1.0).abs() < 1e-9 && mu.deviation < 1e-9);

    // the hyperbolic-fiber space with u = f′ carries μ = −(m−1)kl
    let ph = example_pseudo_hyperbolic(3, -1.0, 1.0, 1.0, PseudoH::NegMOverU(2.0))
        .unwrap()
        .structure;
    let pts = pts_for(&ph, 200);
    assert!(gradient_soliton_residual(&ph, &pts, 1e-8).unwrap().pass);
    let mu = mu_field(&ph, &pts, 1e-9).unwrap();
    assert!((mu.mu - 1.0).abs() < 1e-9 && mu.deviation < 1e-9);

    let (g, _) = sphere_hv(3);
    let c0 = 1.5;
    let s =
        SolitonStructure::gradient_with_form(g, Expr::constant(c0), HForm::NegMOverU(2.0), Expr::constant(2.0), nob())
            .unwrap();
    let mu = mu_field(&s, &pts_for(&s, 50), 1e-12).unwrap();
    assert_eq!(mu.deviation, 0.0);
    assert_eq!(mu.mu, 2.0 * c0 * c0);

    let e = example_euclidean_gradient(3, 3.0, 1.0).unwrap();
    assert!(matches!(
        mu_field(&e, &pts_for(&e, 10), 1e-9),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn one_form_identity_examples() {
    let s = example_neg_m_sphere(3, 2.0, 1.0, 2.0).unwrap();
    assert!(eqpprinc_residual(&s, &pts_for(&s, 200), 1e-8).unwrap().pass);

    let (g, _) = sphere_hv(3);
    let c = SolitonStructure::gradient_with_form(
        g,
        Expr::constant(1.5),
        HForm::NegMOverU(2.0),
        Expr::constant(2.0),
        nob(),
    )
    .unwrap();
    assert_eq!(
        eqpprinc_residual(&c, &pts_for(&c, 20), 1e-12).unwrap().sup_residual,
        0.0
    );
}

#[test]
fn one_form_identity_reduces_to_d_mu_for_constant_lambda() {
    // pure algebra: holds for any u once dλ = 0, soliton or not
    let g = Arc::new(random_metric(5, 3, 0.1).unwrap());
    let u = 3.0 + 0.3 * random_scalar(5, 3);
    let s =
        SolitonStructure::gradient_with_form(g.clone(), u, HForm::NegMOverU(2.0), Expr::constant(-1.3), nob()).unwrap();
    let form = eqpprinc_form(&s)
        .unwrap()
        .add(&d_scalar_on(&g, &mu_expression(&s).unwrap()));
    let sup = pointwise(&g, &nob(), &pts_for(&s, 100), &Residual::OneForm(form))
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max);
    assert!(sup < 1e-9, "{sup:e}");
}

#[test]
fn scaling_leaves_the_residual_unchanged() {
    let s = example_space_form(1.0, 3, 2.0, 1.0).unwrap();
    let pts = pts_for(&s, 100);
    let base = soliton_residual(&s, &pts, 1e-8).unwrap();
    for kappa in [0.5, -3.0, 7.0] {
        let scaled = soliton_residual(&s.scaled(kappa).unwrap(), &pts, 1e-8).unwrap();
        for (a, b) in base.residuals.iter().zip(&scaled.residuals) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let off = s.with_lambda(s.lambda() + 0.2);
    let a = soliton_residual(&off, &pts, 1e-8).unwrap();
    let b = soliton_residual(&off.scaled(4.0).unwrap(), &pts, 1e-8).unwrap();
    for (x, y) in a.residuals.iter().zip(&b.residuals) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn warped_einstein_products() {
    let ph = example_pseudo_hyperbolic(3, -1.0, 1.0, 0.0, PseudoH::NegMOverU(2.0))
        .unwrap()
        .structure;
    let w = warped_einstein_construct(
        &ph,
        Fiber::Explicit(Arc::new(flat_fiber("z", 2).unwrap())),
        0.0,
        200,
        SEED,
        1e-8,
    )
    .unwrap();
    assert_eq!(w.product.dim(), 5);
    assert_eq!(w.lambda, -4.0);
    assert!(w.einstein.pass, "{:e}", w.einstein.sup_residual);

    let abs = warped_einstein_construct(&ph, Fiber::Abstract { dim: 2, mu: None }, 0.0, 200, SEED, 1e-8).unwrap();
    assert!(abs.einstein.pass);

    let mismatch = warped_einstein_construct(&ph, Fiber::Abstract { dim: 2, mu: None }, 1.0, 50, SEED, 1e-8);
    assert!(matches!(mismatch, Err(Error::Precondition(_))));
    let wrong_dim = warped_einstein_construct(&ph, Fiber::Abstract { dim: 3, mu: None }, 0.0, 50, SEED, 1e-8);
    assert!(matches!(wrong_dim, Err(Error::Invalid(_))));
    let almost = example_neg_m_sphere(3, 2.0, 1.0, 2.0).unwrap();
    let r = warped_einstein_construct(&almost, Fiber::Abstract { dim: 2, mu: None }, 0.0, 50, SEED, 1e-8);
    assert!(matches!(r, Err(Error::Precondition(_))));

    // constant u on an Einstein base with a matching Einstein fiber
    let s2 = make_sphere(2, 1.0).unwrap().metric().clone();
    let base =
        SolitonStructure::gradient_with_form(s2, Expr::one(), HForm::NegMOverU(2.0), Expr::one(), nob()).unwrap();
    let w = warped_einstein_construct(
        &base,
        Fiber::Explicit(Arc::new(einstein_fiber(2, 1.0, "z").unwrap())),
        1.0,
        100,
        SEED,
        1e-8,
    )
    .unwrap();
    assert!(w.einstein.pass);

    // the profile base with a hyperbolic fiber
    let prof = example_warping_profile(-1.0, 1.0, 1.0, 2.0).unwrap();
    let w = warped_einstein_construct(
        &prof,
        Fiber::Explicit(Arc::new(einstein_fiber(2, -1.0, "z").unwrap())),
        -1.0,
        100,
        SEED,
        1e-8,
    )
    .unwrap();
    assert!(w.einstein.pass);
    assert_eq!(w.lambda, -2.0);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn mu_is_conserved_on_pseudo_hyperbolic_solitons(
        k in -2.0f64..-0.3,
        a in 0.3f64..2.0,
        l in prop_oneof![Just(0.0), 0.1f64..2.0],
        m in 1.5f64..4.0,
    ) {
        let s = example_pseudo_hyperbolic(3, k, a, l, PseudoH::NegMOverU(m)).unwrap().structure;
        let pts = pts_for(&s, 100);
        prop_assert!(gradient_soliton_residual(&s, &pts, 1e-8).unwrap().pass);
        let mu = mu_field(&s, &pts, 1e-9).unwrap();
        prop_assert!(mu.deviation < 1e-9, "deviation {:e}", mu.deviation);
        prop_assert!((mu.mu + (m - 1.0) * k * l).abs() < 1e-8 * (1.0 + mu.mu.abs()));
    }

    #[test]
    fn one_form_identity_on_neg_m_spheres(
        n in 3usize..5,
        m in 0.5f64..4.0,
        a in -1.0f64..1.0,
        gap in 0.2f64..2.0,
    ) {
        let s = example_neg_m_sphere(n, m, a, a.abs() + gap).unwrap();
        let pts = pts_for(&s, 60);
        prop_assert!(eqpprinc_residual(&s, &pts, 1e-8).unwrap().pass);
    }

    #[test]
    fn one_form_identity_on_space_forms(m in 0.5f64..4.0, tau in 0.5f64..3.0) {
        // h = m/u: the identity with m replaced by −m applies to −m
        let s = example_space_form(1.0, 3, -m, tau).unwrap();
        let s = SolitonStructure::gradient_with_form(
            s.metric().clone(), s.potential().unwrap().clone(), HForm::NegMOverU(m), s.lambda().clone(), s.binding().clone(),
        ).unwrap();
        let pts = pts_for(&s, 60);
        prop_assert!(eqpprinc_residual(&s, &pts, 1e-8).unwrap().pass);
    }
}
