//! Model spaces, height functions and warped products.

use std::sync::Arc;

use hsoliton_core::expr::{evaluate, Expr, ParameterBinding};
use hsoliton_core::geometry::{hessian, ricci, sample_points, MetricField, PointSample, SymTensorField};
use hsoliton_core::report::{pointwise, Residual};
use hsoliton_core::spaces::{
    einstein_fiber, flat_fiber, height_function, last_axis, make_euclidean, make_hyperbolic,
    make_hyperbolic_with_curvature, make_sphere, make_warped, oneill_ricci, oneill_ricci_at, real_line,
    warping_solution, Fiber, WarpedProduct,
};

fn nob() -> ParameterBinding {
    ParameterBinding::new()
}

fn samples(g: &MetricField, count: usize, seed: u64) -> Vec<PointSample> {
    sample_points(g.chart(), Some(g), &nob(), count, seed).unwrap()
}

fn sup(g: &MetricField, pts: &[PointSample], r: Residual) -> f64 {
    pointwise(g, &nob(), pts, &r).unwrap().into_iter().fold(0.0, f64::max)
}

#[test]
fn height_functions_satisfy_the_hessian_equation() {
    for (space, c) in [
        (make_sphere(3, 1.0).unwrap(), 1.0),
        (make_sphere(4, 1.0).unwrap(), 1.0),
        (make_hyperbolic(3).unwrap(), -1.0),
    ] {
        let g = space.metric();
        let n = g.dim();
        let h = height_function(&space, &last_axis(n)).unwrap().field;
        let hess = hessian(g, &h);
        let r = SymTensorField::from_fn(n, |i, j| hess.get(i, j) + c * &h * g.get(i, j));
        let pts = samples(g, 200, 42);
        assert!(sup(g, &pts, Residual::Sym(r)) < 1e-9);
        for p in &pts {
            let v = evaluate(&h, &p.coords, &nob()).unwrap();
            if c > 0.0 {
                assert!(v.abs() <= 1.0 + 1e-12);
            } else {
                assert!(v >= 1.0 - 1e-12);
            }
        }
    }
}

#[test]
fn tilted_sphere_height_function() {
    let s = make_sphere(3, 1.0).unwrap();
    let v = [0.5, 0.5, 0.5, 0.5];
    let h = height_function(&s, &v).unwrap().field;
    let g = s.metric();
    let hess = hessian(g, &h);
    let r = SymTensorField::from_fn(3, |i, j| hess.get(i, j) + &h * g.get(i, j));
    assert!(sup(g, &samples(g, 100, 1), Residual::Sym(r)) < 1e-9);
    assert!(height_function(&s, &[1.0, 1.0, 0.0, 0.0]).is_err());
    assert!(height_function(&make_euclidean(3).unwrap(), &last_axis(3)).is_err());
}

#[test]
fn exponential_warp_over_the_line() {
    let w = make_warped(
        Arc::new(real_line(-1.0, 1.0).unwrap()),
        Fiber::Explicit(Arc::new(flat_fiber("y", 2).unwrap())),
        Expr::coord(0).exp(),
        &nob(),
    )
    .unwrap();
    let g = w.product().unwrap();
    assert_eq!(g.dim(), 3);
    let p = [0.3, 0.1, -0.2];
    let e2t = (0.6f64).exp();
    for i in 0..3 {
        for j in 0..3 {
            let want = match (i, j) {
                (0, 0) => 1.0,
                (a, b) if a == b => e2t,
                _ => 0.0,
            };
            let got = evaluate(g.get(i, j), &p, &nob()).unwrap();
            assert!((got - want).abs() < 1e-14);
        }
    }
    // horospherical H³: Ric = −2g from both sides, mixed terms zero
    let o = oneill_ricci_at(&w, &nob(), &p).unwrap();
    assert_eq!(o.block[(0, 1)], 0.0);
    assert_eq!(o.block[(0, 2)], 0.0);
    let pts = samples(g, 100, 8);
    let direct = ricci(g);
    let formula = oneill_ricci(&w).unwrap().product.unwrap();
    assert!(
        sup(
            g,
            &pts,
            Residual::Components(direct.sub(&formula).components().to_vec())
        ) < 1e-9
    );
    let r = SymTensorField::from_fn(3, |i, j| formula.get(i, j) + 2.0 * g.get(i, j));
    assert!(sup(g, &pts, Residual::Components(r.components().to_vec())) < 1e-9);
}

fn oneill_matches_direct(w: &WarpedProduct, b: &ParameterBinding) -> f64 {
    let g = w.product().unwrap();
    let pts = sample_points(g.chart(), Some(g), b, 100, 3).unwrap();
    let diff = ricci(g).sub(&oneill_ricci(w).unwrap().product.unwrap());
    pointwise(g, b, &pts, &Residual::Components(diff.components().to_vec()))
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max)
}

#[test]
fn oneill_formulas_agree_with_direct_ricci() {
    let line = Arc::new(real_line(-1.0, 1.0).unwrap());
    let cases = [
        // Riemannian product with a round sphere
        (
            line.clone(),
            Fiber::Explicit(Arc::new(einstein_fiber(2, 1.0, "z").unwrap())),
            Expr::one(),
        ),
        (
            line.clone(),
            Fiber::Explicit(Arc::new(flat_fiber("y", 2).unwrap())),
            warping_solution(-1.0, 1.0, 3.0).unwrap().f,
        ),
        (
            line.clone(),
            Fiber::Explicit(Arc::new(flat_fiber("y", 2).unwrap())),
            Expr::coord(0).sinh() + 2.0 * Expr::coord(0).cosh(),
        ),
        (
            line,
            Fiber::Explicit(Arc::new(
                make_hyperbolic_with_curvature(2, -0.5)
                    .unwrap()
                    .metric()
                    .with_prefix("w")
                    .unwrap(),
            )),
            warping_solution(-1.0, 1.0, 0.5).unwrap().f,
        ),
        // two-dimensional base with a sphere fiber
        (
            Arc::new(make_sphere(2, 1.0).unwrap().metric().with_prefix("b").unwrap()),
            Fiber::Explicit(Arc::new(einstein_fiber(2, 1.0, "z").unwrap())),
            2.0 + Expr::coord(0) * Expr::coord(1) / 10.0,
        ),
    ];
    for (base, fiber, f) in cases {
        let w = make_warped(base, fiber, f, &nob()).unwrap();
        assert!(oneill_matches_direct(&w, &nob()) < 1e-9);
    }
}

#[test]
fn product_with_unit_warp_splits() {
    let base = Arc::new(real_line(-1.0, 1.0).unwrap());
    let w = make_warped(
        base,
        Fiber::Explicit(Arc::new(einstein_fiber(2, 1.0, "z").unwrap())),
        Expr::one(),
        &nob(),
    )
    .unwrap();
    let g = w.product().unwrap();
    let ric = ricci(g);
    let pts = samples(g, 50, 1);
    // Ric = 0 ⊕ g_{S²}
    let r = SymTensorField::from_fn(3, |i, j| {
        if i == 0 || j == 0 {
            ric.get(i, j).clone()
        } else {
            ric.get(i, j) - g.get(i, j)
        }
    });
    assert!(sup(g, &pts, Residual::Components(r.components().to_vec())) < 1e-10);
}

#[test]
fn abstract_fibers() {
    let base = Arc::new(real_line(-1.0, 1.0).unwrap());
    let w = make_warped(
        base.clone(),
        Fiber::Abstract { dim: 2, mu: None },
        Expr::coord(0).exp(),
        &nob(),
    )
    .unwrap();
    assert!(w.product().is_none());
    assert!(oneill_ricci(&w).is_err());
    let w = make_warped(
        base,
        Fiber::Abstract { dim: 2, mu: Some(0.0) },
        Expr::coord(0).exp(),
        &nob(),
    )
    .unwrap();
    let o = oneill_ricci_at(&w, &nob(), &[0.4]).unwrap();
    // horizontal −2, vertical factor c with Ric(V,W) = c⟨,⟩ = −2 f²⟨,⟩
    assert!((o.block[(0, 0)] + 2.0).abs() < 1e-12);
    assert!((o.vertical_factor.unwrap() + 2.0 * (0.8f64).exp()).abs() < 1e-12);
}

#[test]
fn warping_profiles() {
    for (k, a, l) in [(-1.0, 1.0, 0.0), (-4.0, 2.0, 3.0), (-0.25, -1.0, 1.0)] {
        let w = warping_solution(k, a, l).unwrap();
        let line = real_line(-1.0, 1.0).unwrap();
        let df = line.partial(&w.f, 0);
        let ddf = line.partial(&df, 0);
        let ode = &ddf + k * &w.f;
        let conserved = df.powi(2) + k * w.f.powi(2);
        for t in [-1.0, 0.0, 2.0, -3.0, 0.7] {
            let f = evaluate(&w.f, &[t], &nob()).unwrap();
            assert!(f > 0.0);
            let scale = f.abs().max(1.0);
            assert!(evaluate(&ode, &[t], &nob()).unwrap().abs() < 1e-12 * scale);
            assert!((evaluate(&conserved, &[t], &nob()).unwrap() + l).abs() < 1e-12 * scale * scale);
        }
    }
    let e = warping_solution(-1.0, 1.0, 0.0).unwrap();
    for t in [-1.0, 0.0, 0.5, 1.0] {
        assert!((evaluate(&e.f, &[t], &nob()).unwrap() - f64::exp(t)).abs() < 1e-14);
    }
}

#[test]
fn einstein_fibers_have_the_requested_constant() {
    for (m, mu) in [(2, 0.0), (2, 1.0), (3, 2.0), (2, -1.0), (3, -4.0)] {
        let g = einstein_fiber(m, mu, "z").unwrap();
        assert_eq!(g.chart().coords()[0], "z1");
        let r = SymTensorField::from_fn(m, |i, j| ricci(&g).get(i, j) - mu * g.get(i, j));
        assert!(sup(&g, &samples(&g, 50, 2), Residual::Sym(r)) < 1e-9, "m {m} μ {mu}");
    }
    assert!(einstein_fiber(1, 1.0, "z").is_err());
}
