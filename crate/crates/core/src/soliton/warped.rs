use std::sync::Arc;

use super::{gradient_soliton_residual, lambda_summary, mu_field, HForm, MuReport, SolitonStructure};
use crate::error::{Error, Result};
use crate::expr::{Expr, ParameterBinding};
use crate::geometry::{ricci, sample_points, MetricField, SymTensorField};
use crate::report::{evaluate_residual, pointwise, Residual, ResidualReport};
use crate::spaces::{make_warped, oneill_ricci, Fiber, WarpedProduct};

/// Tolerance for matching the fiber's Einstein constant against μ.
pub const MU_MATCH: f64 = 1e-7;

/// Result of building `B ×_u F` from a gradient `(−m/u)`-Ricci soliton.
#[derive(Debug, Clone)]
pub struct WarpedEinstein {
    pub product: WarpedProduct,
    pub lambda: f64,
    pub mu: MuReport,
    /// Sup g-norm of `Ric − λ g` on the product (direct curvature for
    /// explicit fibers, O'Neill blocks for abstract ones).
    pub einstein: ResidualReport,
}

/// Builds `B ×_u F^m` and verifies that it is Einstein with constant λ.
///
/// The base must be a gradient `(−m/u)`-Ricci soliton (λ constant) whose
/// conserved quantity μ matches the fiber's `Ric_F = μ⟨,⟩`, with `m ≥ 2`
/// an integer equal to the fiber dimension. Compact bases additionally need
/// λ > 0; this is noted in the report, not checked.
pub fn warped_einstein_construct(
    base: &SolitonStructure,
    fiber: Fiber,
    mu: f64,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<WarpedEinstein> {
    let (m, u) = match (base.form(), base.potential()) {
        (HForm::NegMOverU(m), Some(u)) => (m, u.clone()),
        _ => return Err(Error::precondition("base must be gradient with h = −m/u")),
    };
    if m.fract() != 0.0 || m < 2.0 {
        return Err(Error::invalid(format!("m must be an integer at least 2, got {m}")));
    }
    if fiber.dim() != m as usize {
        return Err(Error::invalid(format!(
            "fiber dimension {} differs from m = {m}",
            fiber.dim()
        )));
    }
    let g_b = base.metric().clone();
    let binding = base.binding();
    let pts = sample_points(g_b.chart(), Some(&g_b), binding, count, seed)?;
    let sol = gradient_soliton_residual(base, &pts, tol)?;
    if !sol.pass {
        return Err(Error::precondition(format!(
            "base is not a soliton (sup residual {:.3e})",
            sol.sup_residual
        )));
    }
    let lam = lambda_summary(base, &pts)?;
    if !lam.is_constant() {
        return Err(Error::precondition(format!(
            "λ is not constant (spread {:.3e})",
            lam.spread
        )));
    }
    let mu_rep = mu_field(base, &pts, tol)?;
    if (mu_rep.mu - mu).abs() > MU_MATCH {
        return Err(Error::precondition(format!(
            "μ mismatch: base gives {:.3e}, fiber has {mu}",
            mu_rep.mu
        )));
    }
    let fiber = match fiber {
        Fiber::Abstract { dim, mu: f_mu } => {
            if let Some(f_mu) = f_mu {
                if (f_mu - mu).abs() > MU_MATCH {
                    return Err(Error::precondition(format!(
                        "μ mismatch: fiber has {f_mu}, expected {mu}"
                    )));
                }
            }
            Fiber::Abstract { dim, mu: Some(mu) }
        }
        Fiber::Explicit(gf) => {
            check_fiber_einstein(&gf, mu, count, seed, tol)?;
            Fiber::Explicit(gf)
        }
    };
    let product = make_warped(g_b.clone(), fiber, u.clone(), binding)?;
    let lambda = Expr::constant(lam.mean);
    let einstein = match product.product() {
        Some(gp) => {
            let ric = ricci(gp);
            let r = SymTensorField::from_fn(gp.dim(), |i, j| ric.get(i, j) - &lambda * gp.get(i, j));
            let ppts = sample_points(gp.chart(), Some(gp), binding, count, seed)?;
            evaluate_residual("warped-einstein", gp, binding, &ppts, &Residual::Sym(r), tol)?
        }
        None => {
            // Ric − λg splits into the horizontal block and (c − λu²)⟨,⟩,
            // whose g-norm on the fiber is √m |c − λu²| / u².
            let o = oneill_ricci(&product)?;
            let horiz = SymTensorField::from_fn(g_b.dim(), |i, j| o.horizontal.get(i, j) - &lambda * g_b.get(i, j));
            let hn = pointwise(&g_b, binding, &pts, &Residual::Sym(horiz))?;
            let c = o.vertical_factor.expect("abstract fiber carries μ");
            let vert = m.sqrt() * (c - &lambda * u.powi(2)) / u.powi(2);
            let vn = pointwise(&g_b, binding, &pts, &Residual::Scalar(vert))?;
            let vals = hn.iter().zip(&vn).map(|(a, b)| a.hypot(*b)).collect();
            ResidualReport::from_values("warped-einstein", &pts, vals, tol).with_note("abstract fiber: O'Neill blocks")
        }
    };
    let einstein = base
        .annotate(einstein)
        .with_meta("lambda", lam.mean)
        .with_meta("mu", mu)
        .with_note("compact bases additionally require λ > 0 (not checked)");
    Ok(WarpedEinstein {
        product,
        lambda: lam.mean,
        mu: mu_rep,
        einstein,
    })
}

fn check_fiber_einstein(gf: &Arc<MetricField>, mu: f64, count: usize, seed: u64, tol: f64) -> Result<()> {
    let b = ParameterBinding::new();
    let pts = sample_points(gf.chart(), Some(gf), &b, count, seed)?;
    let ric = ricci(gf);
    let r = SymTensorField::from_fn(gf.dim(), |i, j| ric.get(i, j) - mu * gf.get(i, j));
    let rep = evaluate_residual("fiber-einstein", gf, &b, &pts, &Residual::Sym(r), tol.max(1e-8))?;
    if !rep.pass {
        return Err(Error::precondition(format!(
            "fiber is not Einstein with constant μ = {mu} (sup {:.3e})",
            rep.sup_residual
        )));
    }
    Ok(())
}
