use super::{
    derived_fields, gradient_soliton_residual, lambda_summary, soliton_residual, soliton_tensor, HForm,
    SolitonStructure,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{
    d_scalar_on, divergence_sym2, divergence_vector, gradient, inner_nabla_vector_sym, laplacian,
    lie_derivative_metric, pair, ricci, scalar_curvature, sym_endomorphism, tensor_inner, trace, traceless,
    vector_inner, MetricField, OneFormField, PointSample, VectorField,
};
use crate::report::{mean, Residual, ResidualReport};

fn require_pass(r: &ResidualReport) -> Result<()> {
    if !r.pass {
        return Err(Error::precondition(format!(
            "{} does not hold (sup {:.3e} > {:.1e})",
            r.name, r.sup_residual, r.tolerance
        )));
    }
    Ok(())
}

fn neg_m(s: &SolitonStructure) -> Result<(f64, &Expr)> {
    match (s.form(), s.potential()) {
        (HForm::NegMOverU(m), Some(u)) => Ok((m, u)),
        _ => Err(Error::precondition("structure must be gradient with h = −m/u")),
    }
}

/// `div(Ric̊(X)) − (n−2)/(2n) ⟨∇R, X⟩ + h |S̊|²`, checked only once the
/// structure satisfies the soliton equation at `tol`.
pub fn divric_identity_residual(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    require_pass(&soliton_residual(s, points, tol)?)?;
    let g = s.metric();
    let n = g.dim() as f64;
    let d = derived_fields(s)?;
    let x = s.vector_field();
    let lhs = divergence_vector(g, &sym_endomorphism(g, &d.ric_ring, &x))?;
    let grad_r = gradient(g, &d.scalar);
    let rhs = (n - 2.0) / (2.0 * n) * vector_inner(g, &grad_r, &x) - s.h() * tensor_inner(g, &d.s_ring, &d.s_ring);
    s.check("divric-identity", points, &Residual::Scalar(lhs - rhs), tol)
}

/// Constancy of `μ = λu² + uΔu + (m−1)|∇u|²`.
#[derive(Debug, Clone)]
pub struct MuReport {
    /// Mean of μ over the samples.
    pub mu: f64,
    /// `max |μ − mean|`.
    pub deviation: f64,
    /// Per-point `|μ − mean|`.
    pub report: ResidualReport,
}

/// `λu² + uΔu + (m−1)|∇u|²` as an expression.
pub fn mu_expression(s: &SolitonStructure) -> Result<Expr> {
    let (m, u) = neg_m(s)?;
    let g = s.metric();
    let grad = gradient(g, u);
    Ok(s.lambda() * u.powi(2) + u * laplacian(g, u) + (m - 1.0) * vector_inner(g, &grad, &grad))
}

/// Requires `h = −m/u` and λ constant over the samples.
pub fn mu_field(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<MuReport> {
    let mu_e = mu_expression(s)?;
    let lam = lambda_summary(s, points)?;
    if !lam.is_constant() {
        return Err(Error::precondition(format!(
            "λ is not constant (relative spread {:.3e})",
            lam.spread
        )));
    }
    let vals: Vec<f64> = s.values(&[mu_e], points)?.iter().map(|r| r[0]).collect();
    let mu = mean(&vals);
    let dev: Vec<f64> = vals.iter().map(|v| (v - mu).abs()).collect();
    let report = s.annotate(ResidualReport::from_values("mu-constant", points, dev, tol).with_meta("mu", mu));
    Ok(MuReport {
        mu,
        deviation: report.sup_residual,
        report,
    })
}

/// The 1-form `d((n−2)/m·u²λ − uΔu − (m−1)|∇u|²) − ((m+n−2)/m) λ du²`.
pub fn eqpprinc_form(s: &SolitonStructure) -> Result<OneFormField> {
    let (m, u) = neg_m(s)?;
    let g = s.metric();
    let n = g.dim() as f64;
    let lam = s.lambda();
    let grad = gradient(g, u);
    let u2 = u.powi(2);
    let inner = (n - 2.0) / m * &u2 * lam - u * laplacian(g, u) - (m - 1.0) * vector_inner(g, &grad, &grad);
    let first = d_scalar_on(g, &inner);
    let second = d_scalar_on(g, &u2).scale(&((m + n - 2.0) / m * lam));
    Ok(first.sub(&second))
}

/// Requires `h = −m/u` and the gradient soliton equation at `tol`.
pub fn eqpprinc_residual(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    let form = eqpprinc_form(s)?;
    require_pass(&gradient_soliton_residual(s, points, tol)?)?;
    s.check("eqpprinc", points, &Residual::OneForm(form), tol)
}

/// `tr_g(Ric + (h/2) L_X g − λ g) − (R + h div X − nλ)`.
pub fn trace_identity_residual(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    let g = s.metric();
    let n = g.dim() as f64;
    let t = trace(g, &soliton_tensor(s)?);
    let rhs = scalar_curvature(g) + s.h() * divergence_vector(g, &s.vector_field())? - n * s.lambda();
    s.check("trace-identity", points, &Residual::Scalar(t - rhs), tol)
}

/// For gradient structures: `(Ric + (h/2) L_{∇u} g − λg) − (Ric + h∇²u − λg)`.
pub fn gradient_equivalence_residual(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<ResidualReport> {
    let a = soliton_tensor(s)?;
    let b = super::gradient_soliton_tensor(s)?;
    s.check("gradient-equivalence", points, &Residual::Sym(a.sub(&b)), tol)
}

/// The two steps behind the divergence identity, valid for any metric and
/// field:
///
/// - `div(Ric̊(X)) − (div Ric̊)(X) − ⟨∇X, Ric̊⟩`;
/// - `(div Ric̊)(X) − (n−2)/(2n) ⟨∇R, X⟩`.
pub fn divric_chain_residuals(g: &MetricField, x: &VectorField) -> Result<(Residual, Residual)> {
    let n = g.dim() as f64;
    let ric_ring = traceless(g, ricci(g));
    let div_ring_x = pair(&divergence_sym2(g, &ric_ring)?, x);
    let lhs = divergence_vector(g, &sym_endomorphism(g, &ric_ring, x))?;
    let first = lhs - &div_ring_x - inner_nabla_vector_sym(g, x, &ric_ring)?;
    let second = div_ring_x - (n - 2.0) / (2.0 * n) * pair(&d_scalar_on(g, scalar_curvature(g)), x);
    Ok((Residual::Scalar(first), Residual::Scalar(second)))
}

/// `⟨∇X, Ric̊⟩ − ⟨Ric̊, S̊⟩` with `S = ½ L_X g`.
pub fn traceless_inner_residual(g: &MetricField, x: &VectorField) -> Result<Residual> {
    let ric_ring = traceless(g, ricci(g));
    let s_ring = traceless(g, &lie_derivative_metric(g, x)?.scale(&Expr::constant(0.5)));
    Ok(Residual::Scalar(
        inner_nabla_vector_sym(g, x, &ric_ring)? - tensor_inner(g, &ric_ring, &s_ring),
    ))
}
