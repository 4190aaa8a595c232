//! h-almost Ricci solitons `Ric + (h/2) L_X g = λ g` and the identities
//! they satisfy.
//!
//! Sign convention: a soliton is *expanding*, *steady* or *shrinking* when λ
//! is negative, zero or positive respectively.

mod checks;
mod identities;
mod quasi;
mod warped;

pub use checks::*;
pub use identities::*;
pub use quasi::*;
pub use warped::*;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Expr, ParameterBinding};
use crate::geometry::{
    divergence_vector, gradient, hessian, lie_derivative_metric, ricci, scalar_curvature, traceless, MetricField,
    PointSample, SymTensorField, VectorField,
};
use crate::report::{evaluate_residual, sample_values, Residual, ResidualReport};

/// Relative spread below which λ counts as constant.
pub const LAMBDA_CONSTANT_SPREAD: f64 = 1e-8;

/// Points with `|h|` below this are left out of the conformal factor.
pub const DEGENERATE_H: f64 = 1e-12;

/// The field `X`, either given directly or as the gradient of a potential.
#[derive(Debug, Clone)]
pub enum Drift {
    Vector(VectorField),
    Potential(Expr),
}

/// Declared shape of `h` for gradient structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HForm {
    Free,
    /// `h = m/u`.
    MOverU(f64),
    /// `h = −m/u`.
    NegMOverU(f64),
}

impl HForm {
    pub fn tag(&self) -> &'static str {
        match self {
            HForm::Free => "free",
            HForm::MOverU(_) => "m-over-u",
            HForm::NegMOverU(_) => "neg-m-over-u",
        }
    }

    pub fn m(&self) -> Option<f64> {
        match self {
            HForm::Free => None,
            HForm::MOverU(m) | HForm::NegMOverU(m) => Some(*m),
        }
    }

    /// The `h` this form prescribes for potential `u`.
    pub fn h_for(&self, u: &Expr) -> Option<Expr> {
        match self {
            HForm::Free => None,
            HForm::MOverU(m) => Some(*m / u),
            HForm::NegMOverU(m) => Some(-*m / u),
        }
    }
}

/// `(M, g, X, h, λ)` together with the parameter values its expressions use.
#[derive(Debug, Clone)]
pub struct SolitonStructure {
    metric: Arc<MetricField>,
    drift: Drift,
    h: Expr,
    lambda: Expr,
    binding: ParameterBinding,
    form: HForm,
}

impl SolitonStructure {
    pub fn new(
        metric: Arc<MetricField>,
        drift: Drift,
        h: Expr,
        lambda: Expr,
        binding: ParameterBinding,
    ) -> Result<SolitonStructure> {
        let n = metric.dim();
        let mut exprs = vec![&h, &lambda];
        match &drift {
            Drift::Vector(x) => {
                if x.dim() != n {
                    return Err(Error::invalid(format!(
                        "vector field has {} components, expected {n}",
                        x.dim()
                    )));
                }
                exprs.extend(&x.0);
            }
            Drift::Potential(u) => exprs.push(u),
        }
        exprs.extend(metric.components().components());
        for e in exprs {
            if let Some(i) = e.max_coord() {
                if i >= n {
                    return Err(Error::invalid(format!(
                        "expression uses coordinate {i} on a {n}-dimensional chart"
                    )));
                }
            }
            for p in e.params() {
                if binding.get(&p).is_none() {
                    return Err(Error::invalid(format!("parameter `{p}` is not bound")));
                }
            }
        }
        Ok(SolitonStructure {
            metric,
            drift,
            h,
            lambda,
            binding,
            form: HForm::Free,
        })
    }

    /// Gradient structure with `h = ±m/u` built from the form. The chart
    /// gains the domain predicate `u > 0`.
    pub fn gradient_with_form(
        metric: Arc<MetricField>,
        u: Expr,
        form: HForm,
        lambda: Expr,
        binding: ParameterBinding,
    ) -> Result<SolitonStructure> {
        let m = form.m().ok_or_else(|| Error::invalid("a form with m is required"))?;
        if !(m.is_finite() && m != 0.0) {
            return Err(Error::invalid(format!("m must be a nonzero constant, got {m}")));
        }
        let h = form.h_for(&u).expect("form has m");
        let metric = Arc::new(metric.with_domain(vec![u.clone()])?);
        let mut s = SolitonStructure::new(metric, Drift::Potential(u), h, lambda, binding)?;
        s.form = form;
        Ok(s)
    }

    /// Declares the form of `h` without rebuilding it. Use
    /// [`SolitonStructure::form_residual`] to confirm it at samples.
    pub fn with_form(mut self, form: HForm) -> Result<SolitonStructure> {
        if form != HForm::Free && self.potential().is_none() {
            return Err(Error::invalid("an m/u form needs a potential"));
        }
        self.form = form;
        Ok(self)
    }

    pub fn with_lambda(&self, lambda: Expr) -> SolitonStructure {
        SolitonStructure { lambda, ..self.clone() }
    }

    /// `(κh, X/κ)`: the soliton equation is unchanged. The drift becomes an
    /// explicit vector field.
    pub fn scaled(&self, kappa: f64) -> Result<SolitonStructure> {
        if !(kappa.is_finite() && kappa != 0.0) {
            return Err(Error::invalid("scaling constant must be nonzero"));
        }
        let x = self.vector_field().scale(&Expr::constant(1.0 / kappa));
        SolitonStructure::new(
            self.metric.clone(),
            Drift::Vector(x),
            kappa * &self.h,
            self.lambda.clone(),
            self.binding.clone(),
        )
    }

    pub fn metric(&self) -> &Arc<MetricField> {
        &self.metric
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn lambda(&self) -> &Expr {
        &self.lambda
    }

    pub fn binding(&self) -> &ParameterBinding {
        &self.binding
    }

    pub fn form(&self) -> HForm {
        self.form
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn potential(&self) -> Option<&Expr> {
        match &self.drift {
            Drift::Potential(u) => Some(u),
            Drift::Vector(_) => None,
        }
    }

    pub fn is_gradient(&self) -> bool {
        self.potential().is_some()
    }

    /// `X`, or `∇u` for gradient structures.
    pub fn vector_field(&self) -> VectorField {
        match &self.drift {
            Drift::Vector(x) => x.clone(),
            Drift::Potential(u) => gradient(&self.metric, u),
        }
    }

    /// `h ∓ m/u` for a declared form, `None` when free.
    pub fn form_residual(&self) -> Option<Expr> {
        let u = self.potential()?;
        self.form.h_for(u).map(|h| &self.h - h)
    }

    /// Tags the report with the structure's parameters and form.
    pub fn annotate(&self, mut report: ResidualReport) -> ResidualReport {
        for (k, v) in self.binding.iter() {
            report = report.with_meta(&format!("param.{k}"), v);
        }
        report.with_meta("form", self.form.tag())
    }

    pub(crate) fn check(&self, name: &str, points: &[PointSample], r: &Residual, tol: f64) -> Result<ResidualReport> {
        Ok(self.annotate(evaluate_residual(name, &self.metric, &self.binding, points, r, tol)?))
    }

    pub(crate) fn values(&self, exprs: &[Expr], points: &[PointSample]) -> Result<Vec<Vec<f64>>> {
        sample_values(exprs, &self.binding, points)
    }
}

/// Quantities derived from a structure, all symbolic.
#[derive(Debug, Clone)]
pub struct DerivedFields {
    pub ric: SymTensorField,
    pub scalar: Expr,
    /// `S = ½ L_X g`.
    pub s: SymTensorField,
    pub s_ring: SymTensorField,
    pub ric_ring: SymTensorField,
    /// `ρ = (λ − R/n) / h`.
    pub rho: Expr,
    pub div_x: Expr,
}

pub fn derived_fields(s: &SolitonStructure) -> Result<DerivedFields> {
    let g = s.metric();
    let n = g.dim() as f64;
    let x = s.vector_field();
    let half = lie_derivative_metric(g, &x)?.scale(&Expr::constant(0.5));
    let ric = ricci(g).clone();
    let scalar = scalar_curvature(g).clone();
    Ok(DerivedFields {
        s_ring: traceless(g, &half),
        ric_ring: traceless(g, &ric),
        rho: (s.lambda() - &scalar / n) / s.h(),
        div_x: divergence_vector(g, &x)?,
        s: half,
        ric,
        scalar,
    })
}

/// `ρ` at each point; `None` where `|h| < 1e-12`.
#[derive(Debug, Clone)]
pub struct RhoSamples {
    pub values: Vec<Option<f64>>,
    pub excluded: usize,
}

pub fn rho_samples(s: &SolitonStructure, points: &[PointSample]) -> Result<RhoSamples> {
    let g = s.metric();
    let n = g.dim() as f64;
    let num = s.lambda() - scalar_curvature(g) / n;
    let rows = s.values(&[s.h().clone(), num], points)?;
    let values: Vec<Option<f64>> = rows
        .iter()
        .map(|r| {
            if r[0].abs() < DEGENERATE_H {
                None
            } else {
                Some(r[1] / r[0])
            }
        })
        .collect();
    let excluded = values.iter().filter(|v| v.is_none()).count();
    Ok(RhoSamples { values, excluded })
}

/// `Ric + (h/2) L_X g − λ g`.
pub fn soliton_tensor(s: &SolitonStructure) -> Result<SymTensorField> {
    let g = s.metric();
    let lie = lie_derivative_metric(g, &s.vector_field())?;
    let half_h = 0.5 * s.h();
    let n = g.dim();
    let ric = ricci(g);
    Ok(SymTensorField::from_fn(n, |i, j| {
        ric.get(i, j) + &half_h * lie.get(i, j) - s.lambda() * g.get(i, j)
    }))
}

/// `Ric + h ∇²u − λ g`.
pub fn gradient_soliton_tensor(s: &SolitonStructure) -> Result<SymTensorField> {
    let u = s
        .potential()
        .ok_or_else(|| Error::precondition("structure is not gradient"))?;
    let g = s.metric();
    let hess = hessian(g, u);
    let ric = ricci(g);
    Ok(SymTensorField::from_fn(g.dim(), |i, j| {
        ric.get(i, j) + s.h() * hess.get(i, j) - s.lambda() * g.get(i, j)
    }))
}

/// Sup g-norm of `Ric + (h/2) L_X g − λ g`.
pub fn soliton_residual(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    s.check("soliton-equation", points, &Residual::Sym(soliton_tensor(s)?), tol)
}

/// Sup g-norm of `Ric + h ∇²u − λ g`.
pub fn gradient_soliton_residual(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    s.check(
        "gradient-soliton-equation",
        points,
        &Residual::Sym(gradient_soliton_tensor(s)?),
        tol,
    )
}

/// `|h ∓ m/u|` for a declared form.
pub fn form_check(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    let r = s
        .form_residual()
        .ok_or_else(|| Error::precondition("no m/u form declared"))?;
    s.check("h-form", points, &Residual::Scalar(r), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_points, Chart};

    fn flat(n: usize) -> Arc<MetricField> {
        Arc::new(MetricField::euclidean(Chart::cube("x", n, -1.0, 1.0).unwrap()).unwrap())
    }

    #[test]
    fn trivial_flat_soliton() {
        let s = SolitonStructure::new(
            flat(3),
            Drift::Vector(VectorField::zero(3)),
            Expr::one(),
            Expr::zero(),
            ParameterBinding::new(),
        )
        .unwrap();
        let pts = sample_points(s.metric().chart(), None, s.binding(), 10, 1).unwrap();
        let r = soliton_residual(&s, &pts, 1e-12).unwrap();
        assert_eq!(r.sup_residual, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn unbound_parameter_rejected() {
        let e = SolitonStructure::new(
            flat(3),
            Drift::Potential(Expr::param("a")),
            Expr::one(),
            Expr::zero(),
            ParameterBinding::new(),
        );
        assert!(e.is_err());
        let e = SolitonStructure::new(
            flat(3),
            Drift::Vector(VectorField::zero(2)),
            Expr::one(),
            Expr::zero(),
            ParameterBinding::new(),
        );
        assert!(e.is_err());
    }

    #[test]
    fn gradient_residual_needs_potential() {
        let s = SolitonStructure::new(
            flat(3),
            Drift::Vector(VectorField::zero(3)),
            Expr::one(),
            Expr::zero(),
            ParameterBinding::new(),
        )
        .unwrap();
        assert!(matches!(gradient_soliton_tensor(&s), Err(Error::Precondition(_))));
        assert!(s.clone().with_form(HForm::NegMOverU(2.0)).is_err());
    }
}
