use std::sync::Arc;

use super::{Drift, HForm, SolitonStructure};
use crate::error::{Error, Result};
use crate::expr::{evaluate, Expr, ParameterBinding};
use crate::geometry::{d_scalar_on, hessian, ricci, sym_product, MetricField, PointSample, SymTensorField};
use crate::report::{evaluate_residual, Residual, ResidualReport};

/// Generalized quasi-Einstein data `Ric + ∇²f − μ df⊗df = λ g`.
#[derive(Debug, Clone)]
pub struct QuasiEinsteinStructure {
    pub metric: Arc<MetricField>,
    pub f: Expr,
    pub mu: Expr,
    pub lambda: Expr,
    pub binding: ParameterBinding,
}

pub fn quasi_einstein_tensor(q: &QuasiEinsteinStructure) -> SymTensorField {
    let g = &*q.metric;
    let hess = hessian(g, &q.f);
    let df = d_scalar_on(g, &q.f);
    let dfdf = sym_product(&df, &df);
    let ric = ricci(g);
    SymTensorField::from_fn(g.dim(), |i, j| {
        ric.get(i, j) + hess.get(i, j) - &q.mu * dfdf.get(i, j) - &q.lambda * g.get(i, j)
    })
}

pub fn quasi_einstein_residual(q: &QuasiEinsteinStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    evaluate_residual(
        "quasi-einstein",
        &q.metric,
        &q.binding,
        points,
        &Residual::Sym(quasi_einstein_tensor(q)),
        tol,
    )
}

/// `u = e^{f/m}` with `h = m/u`; negative `m` gives `h = −|m|/u`. The
/// equations agree only when `μ = −1/m`, which is checked.
pub fn substitute_u_for_f(q: &QuasiEinsteinStructure, m: f64) -> Result<SolitonStructure> {
    if !(m.is_finite() && m != 0.0) {
        return Err(Error::invalid(format!("m must be a nonzero constant, got {m}")));
    }
    if q.mu.max_coord().is_some() {
        return Err(Error::precondition("μ must be constant for the substitution"));
    }
    let mu = evaluate(&q.mu, &vec![0.0; q.metric.dim()], &q.binding)?;
    let want = -1.0 / m;
    if (mu - want).abs() > 1e-12 * want.abs().max(1.0) {
        return Err(Error::precondition(format!(
            "μ = {mu} but the substitution needs μ = −1/m = {want}"
        )));
    }
    let u = (&q.f / m).exp();
    let form = if m > 0.0 {
        HForm::MOverU(m)
    } else {
        HForm::NegMOverU(-m)
    };
    let h = m / &u;
    SolitonStructure::new(
        q.metric.clone(),
        Drift::Potential(u),
        h,
        q.lambda.clone(),
        q.binding.clone(),
    )?
    .with_form(form)
}

/// `(m/u)∇²u − ∇²f − (1/m) df⊗df` with `u = e^{f/m}`.
pub fn substitution_identity(g: &MetricField, f: &Expr, m: f64) -> Residual {
    let u = (f / m).exp();
    let hu = hessian(g, &u);
    let hf = hessian(g, f);
    let df = d_scalar_on(g, f);
    let dfdf = sym_product(&df, &df);
    let c = m / &u;
    Residual::Sym(SymTensorField::from_fn(g.dim(), |i, j| {
        &c * hu.get(i, j) - hf.get(i, j) - dfdf.get(i, j) / m
    }))
}
