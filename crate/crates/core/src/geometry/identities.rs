//! Residuals of identities that hold on every Riemannian manifold. Each
//! function returns an expression-level residual that vanishes identically;
//! evaluating it at sample points measures the accumulated rounding error.

use super::{
    covariant_derivative_sym2, d_scalar_on, divergence_sym2, divergence_vector, gradient, hessian,
    inner_nabla_vector_sym, laplacian, lie_derivative_metric, ricci, scalar_curvature, sym_apply, sym_endomorphism,
    vector_inner, MetricField, SymTensorField, VectorField,
};
use crate::error::Result;
use crate::expr::Expr;
use crate::report::Residual;

/// `div Ric − ½ dR`.
pub fn bianchi_residual(g: &MetricField) -> Result<Residual> {
    let div = divergence_sym2(g, ricci(g))?;
    let dr = d_scalar_on(g, scalar_curvature(g)).scale(&Expr::constant(0.5));
    Ok(Residual::OneForm(div.sub(&dr)))
}

/// `div(φT) − φ div T − T(∇φ, ·)`.
pub fn div_product_residual(g: &MetricField, phi: &Expr, t: &SymTensorField) -> Result<Residual> {
    let lhs = divergence_sym2(g, &t.scale(phi))?;
    let rhs = divergence_sym2(g, t)?.scale(phi).add(&sym_apply(t, &gradient(g, phi)));
    Ok(Residual::OneForm(lhs.sub(&rhs)))
}

/// `∇(φT) − φ∇T − dφ ⊗ T`, componentwise.
pub fn nabla_product_residual(g: &MetricField, phi: &Expr, t: &SymTensorField) -> Result<Residual> {
    let n = g.dim();
    let lhs = covariant_derivative_sym2(g, &t.scale(phi))?;
    let rhs = covariant_derivative_sym2(g, t)?;
    let dphi = d_scalar_on(g, phi);
    let mut comps = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                comps.push(lhs.get(i, j, k) - phi * rhs.get(i, j, k) - &dphi.0[i] * t.get(j, k));
            }
        }
    }
    Ok(Residual::Components(comps))
}

/// `½ d|∇φ|² − ∇²φ(∇φ, ·)`.
pub fn gradient_norm_residual(g: &MetricField, phi: &Expr) -> Result<Residual> {
    let grad = gradient(g, phi);
    let lhs = d_scalar_on(g, &vector_inner(g, &grad, &grad)).scale(&Expr::constant(0.5));
    let rhs = sym_apply(&hessian(g, phi), &grad);
    Ok(Residual::OneForm(lhs.sub(&rhs)))
}

/// `div ∇²φ − Ric(∇φ, ·) − dΔφ`.
pub fn div_hessian_residual(g: &MetricField, phi: &Expr) -> Result<Residual> {
    let lhs = divergence_sym2(g, &hessian(g, phi))?;
    let rhs = sym_apply(ricci(g), &gradient(g, phi)).add(&d_scalar_on(g, &laplacian(g, phi)));
    Ok(Residual::OneForm(lhs.sub(&rhs)))
}

/// `div(T(φZ)) − φ(div T)(Z) − φ⟨∇Z, T⟩ − T(∇φ, Z)` where `T(φZ)` is the
/// vector field metrically dual to `T(φZ, ·)`.
pub fn lemma21_residual(g: &MetricField, t: &SymTensorField, phi: &Expr, z: &VectorField) -> Result<Residual> {
    let lhs = divergence_vector(g, &sym_endomorphism(g, t, &z.scale(phi)))?;
    let div_t = divergence_sym2(g, t)?;
    let div_t_z = super::pair(&div_t, z);
    let rhs = phi * div_t_z + phi * inner_nabla_vector_sym(g, z, t)? + super::sym_bilinear(t, &gradient(g, phi), z);
    Ok(Residual::Scalar(lhs - rhs))
}

/// `∇g`, componentwise.
pub fn metric_compatibility_residual(g: &MetricField) -> Result<Residual> {
    Ok(Residual::Components(
        covariant_derivative_sym2(g, g.components())?.components().to_vec(),
    ))
}

/// `L_{∇u} g − 2∇²u`.
pub fn lie_hessian_residual(g: &MetricField, u: &Expr) -> Result<Residual> {
    let lie = lie_derivative_metric(g, &gradient(g, u))?;
    Ok(Residual::Sym(lie.sub(&hessian(g, u).scale(&Expr::constant(2.0)))))
}
