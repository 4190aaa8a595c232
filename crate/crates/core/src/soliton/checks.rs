use serde::Serialize;

use super::{derived_fields, SolitonStructure, LAMBDA_CONSTANT_SPREAD};
use crate::error::{Error, Result};
use crate::expr::{Expr, ParameterBinding};
use crate::geometry::{
    divergence_vector, gradient, hessian, lie_derivative_metric, scalar_curvature, traceless, MetricField, PointSample,
    SymTensorField, VectorField,
};
use crate::report::{evaluate_residual, mean, relative_spread, sample_values, Residual, ResidualReport};

/// Relative spread of `(2/n) div X` below which `X` counts as homothetic.
pub const HOMOTHETY_SPREAD: f64 = 1e-6;

/// Sign of λ over the samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Expanding,
    Steady,
    Shrinking,
    Undefined,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Expanding => "expanding",
            Classification::Steady => "steady",
            Classification::Shrinking => "shrinking",
            Classification::Undefined => "undefined",
        }
    }

    /// `λ < 0` everywhere is expanding, `|λ| < 1e-12` everywhere steady,
    /// `λ > 0` everywhere shrinking; anything else is undefined.
    pub fn of_values(values: &[f64]) -> Classification {
        const ZERO: f64 = 1e-12;
        if values.is_empty() {
            Classification::Undefined
        } else if values.iter().all(|v| v.abs() < ZERO) {
            Classification::Steady
        } else if values.iter().all(|&v| v >= ZERO) {
            Classification::Shrinking
        } else if values.iter().all(|&v| v <= -ZERO) {
            Classification::Expanding
        } else {
            Classification::Undefined
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_lambda(s: &SolitonStructure, points: &[PointSample]) -> Result<Classification> {
    if points.is_empty() {
        return Err(Error::invalid("no sample points"));
    }
    let rows = s.values(std::slice::from_ref(s.lambda()), points)?;
    let vals: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    Ok(Classification::of_values(&vals))
}

/// λ at the samples: mean and relative spread.
#[derive(Debug, Clone, Copy)]
pub struct LambdaSummary {
    pub mean: f64,
    pub spread: f64,
}

impl LambdaSummary {
    pub fn is_constant(&self) -> bool {
        self.spread < LAMBDA_CONSTANT_SPREAD
    }
}

pub fn lambda_summary(s: &SolitonStructure, points: &[PointSample]) -> Result<LambdaSummary> {
    let rows = s.values(std::slice::from_ref(s.lambda()), points)?;
    let vals: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    Ok(LambdaSummary {
        mean: mean(&vals),
        spread: relative_spread(&vals),
    })
}

/// Whether `L_X g = c g` for a constant `c`.
#[derive(Debug, Clone)]
pub struct TrivialityVerdict {
    pub trivial: bool,
    /// Mean of `(2/n) div X`, the homothety constant when trivial.
    pub homothety: f64,
    pub spread: f64,
    /// Sup g-norm of the traceless part of `½ L_X g`.
    pub traceless: ResidualReport,
}

pub fn triviality_check(s: &SolitonStructure, points: &[PointSample], tol: f64) -> Result<TrivialityVerdict> {
    let d = derived_fields(s)?;
    let traceless = s.check("traceless-lie-derivative", points, &Residual::Sym(d.s_ring), tol)?;
    let factor = 2.0 / s.dim() as f64 * d.div_x;
    let c: Vec<f64> = s.values(&[factor], points)?.iter().map(|r| r[0]).collect();
    let spread = relative_spread(&c);
    Ok(TrivialityVerdict {
        trivial: traceless.pass && spread < HOMOTHETY_SPREAD,
        homothety: mean(&c),
        spread,
        traceless,
    })
}

/// Outcome of testing `L_X g = 2ρ g`.
#[derive(Debug, Clone)]
pub struct ConformalVerdict {
    pub conformal: bool,
    /// Sup g-norm of `(½ L_X g)̊`.
    pub traceless: ResidualReport,
    /// `ρ = div X / n` at each point.
    pub rho: Vec<f64>,
    /// `(½ L_X g)̊` itself.
    pub s_ring: SymTensorField,
}

pub fn conformal_killing_check(
    g: &MetricField,
    x: &VectorField,
    binding: &ParameterBinding,
    points: &[PointSample],
    tol: f64,
) -> Result<ConformalVerdict> {
    let half = lie_derivative_metric(g, x)?.scale(&Expr::constant(0.5));
    let s_ring = traceless(g, &half);
    let traceless = evaluate_residual(
        "conformal-killing",
        g,
        binding,
        points,
        &Residual::Sym(s_ring.clone()),
        tol,
    )?;
    let rho_e = divergence_vector(g, x)? / g.dim() as f64;
    let rho = sample_values(&[rho_e], binding, points)?.iter().map(|r| r[0]).collect();
    Ok(ConformalVerdict {
        conformal: traceless.pass,
        traceless,
        rho,
        s_ring,
    })
}

/// `∇²ρ + (R / (n(n−1))) ρ g`.
pub fn conformal_factor_hessian_check(
    g: &MetricField,
    rho: &Expr,
    binding: &ParameterBinding,
    points: &[PointSample],
    tol: f64,
) -> Result<ResidualReport> {
    let n = g.dim();
    let k = scalar_curvature(g) / (n * (n - 1)) as f64;
    let hess = hessian(g, rho);
    let r = SymTensorField::from_fn(n, |i, j| hess.get(i, j) + &k * rho * g.get(i, j));
    evaluate_residual("conformal-factor-hessian", g, binding, points, &Residual::Sym(r), tol)
}

/// `u = −(n(n−1)/R) ρ`. Requires the scalar curvature to be a nonzero
/// constant over the samples (relative spread below `1e-8`).
pub fn potential_from_factor(
    g: &MetricField,
    rho: &Expr,
    binding: &ParameterBinding,
    points: &[PointSample],
) -> Result<Expr> {
    let r: Vec<f64> = sample_values(std::slice::from_ref(scalar_curvature(g)), binding, points)?
        .iter()
        .map(|v| v[0])
        .collect();
    let spread = relative_spread(&r);
    if spread >= LAMBDA_CONSTANT_SPREAD {
        return Err(Error::precondition(format!(
            "scalar curvature is not constant (spread {spread:.3e})"
        )));
    }
    let rbar = mean(&r);
    if rbar.abs() < 1e-12 {
        return Err(Error::precondition("scalar curvature vanishes"));
    }
    let n = g.dim() as f64;
    Ok(-(n * (n - 1.0) / rbar) * rho)
}

/// `½ L_{∇u} g − ρ g`.
pub fn conformal_potential_residual(
    g: &MetricField,
    u: &Expr,
    rho: &Expr,
    binding: &ParameterBinding,
    points: &[PointSample],
    tol: f64,
) -> Result<ResidualReport> {
    let half = lie_derivative_metric(g, &gradient(g, u))?.scale(&Expr::constant(0.5));
    let r = SymTensorField::from_fn(g.dim(), |i, j| half.get(i, j) - rho * g.get(i, j));
    evaluate_residual("conformal-potential", g, binding, points, &Residual::Sym(r), tol)
}
