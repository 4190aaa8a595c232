//! Constructors for the explicit soliton families.
//!
//! Each constructor validates its parameters and returns a structure ready
//! for verification; out-of-domain parameters are errors, never clamped.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{sum, Expr, ParameterBinding};
use crate::geometry::{MetricField, SymTensorField, VectorField};
use crate::soliton::{Drift, HForm, SolitonStructure};
use crate::spaces::{
    flat_fiber, height_function, last_axis, make_euclidean, make_hyperbolic, make_hyperbolic_with_curvature,
    make_sphere, make_warped, real_line, Fiber, WarpedProduct, WarpingSolution,
};

/// Stable example identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleId {
    SpaceFormGradient,
    EuclideanGradient,
    EuclideanConformalClaimed,
    EuclideanConformalCorrected,
    PseudoHyperbolic,
    NegMSphere,
}

impl ExampleId {
    pub const ALL: [ExampleId; 6] = [
        ExampleId::SpaceFormGradient,
        ExampleId::EuclideanGradient,
        ExampleId::EuclideanConformalClaimed,
        ExampleId::EuclideanConformalCorrected,
        ExampleId::PseudoHyperbolic,
        ExampleId::NegMSphere,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleId::SpaceFormGradient => "space-form-gradient",
            ExampleId::EuclideanGradient => "euclidean-gradient",
            ExampleId::EuclideanConformalClaimed => "euclidean-conformal-claimed",
            ExampleId::EuclideanConformalCorrected => "euclidean-conformal-corrected",
            ExampleId::PseudoHyperbolic => "pseudo-hyperbolic",
            ExampleId::NegMSphere => "neg-m-sphere",
        }
    }

    /// Parameter names with their default values.
    pub fn default_params(&self) -> &'static [(&'static str, f64)] {
        match self {
            ExampleId::SpaceFormGradient => &[("c", 1.0), ("n", 3.0), ("m", 2.0), ("tau", 1.0)],
            ExampleId::EuclideanGradient => &[("n", 3.0), ("m", 3.0), ("tau", 1.0)],
            ExampleId::EuclideanConformalClaimed | ExampleId::EuclideanConformalCorrected => &[("n", 3.0)],
            ExampleId::PseudoHyperbolic => &[("n", 3.0), ("k", -1.0), ("a", 1.0), ("l", 0.0), ("m", 2.0)],
            ExampleId::NegMSphere => &[("n", 3.0), ("m", 2.0), ("a", 1.0), ("b", 2.0)],
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<ExampleId> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown example `{s}`")))
    }
}

/// An example id with concrete parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSpec {
    pub id: ExampleId,
    pub params: BTreeMap<String, f64>,
    /// Choice of `h` for the pseudo-hyperbolic family: `None` for `−m/u`,
    /// otherwise an expression in `t`.
    pub h: Option<String>,
}

impl ExampleSpec {
    pub fn new(id: ExampleId) -> ExampleSpec {
        ExampleSpec {
            id,
            params: id.default_params().iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            h: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Result<ExampleSpec> {
        self.set(key, value)?;
        Ok(self)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match self.params.get_mut(key) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::invalid(format!("example {} has no parameter `{key}`", self.id))),
        }
    }

    pub fn get(&self, key: &str) -> f64 {
        self.params[key]
    }

    /// Parameter `key` as a dimension.
    pub fn dim(&self, key: &str) -> Result<usize> {
        let v = self.get(key);
        if v.fract() != 0.0 || !(1.0..=16.0).contains(&v) {
            return Err(Error::invalid(format!(
                "`{key}` must be a small positive integer, got {v}"
            )));
        }
        Ok(v as usize)
    }
}

fn binding(pairs: &[(&str, f64)]) -> ParameterBinding {
    ParameterBinding::from_pairs(pairs.iter().copied())
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}

fn nonzero_m(m: f64) -> Result<()> {
    require(
        m.is_finite() && m != 0.0,
        format!("m must be a nonzero constant, got {m}"),
    )
}

fn at_least_three(n: usize) -> Result<()> {
    require(n >= 3, format!("dimension must be at least 3, got {n}"))
}

/// Gradient `(m/u)`-almost soliton on the space form of curvature `c`:
/// `u = τ − c h_v/n`, `λ = c(n−1) + m c² h_v / (nτ − c h_v)` with
/// `v = e_{n+1}`. The sphere needs `τ > 1/n`; on hyperbolic space `u > 0`
/// becomes a domain predicate.
pub fn example_space_form(c: f64, n: usize, m: f64, tau: f64) -> Result<SolitonStructure> {
    require(c == 1.0 || c == -1.0, format!("c must be 1 or -1, got {c}"))?;
    at_least_three(n)?;
    nonzero_m(m)?;
    require(tau.is_finite(), "τ must be finite")?;
    let space = if c > 0.0 {
        require(
            tau > 1.0 / n as f64,
            format!("τ must exceed 1/n = {}, got {tau}", 1.0 / n as f64),
        )?;
        make_sphere(n, 1.0)?
    } else {
        make_hyperbolic(n)?
    };
    let hv = height_function(&space, &last_axis(n))?.field;
    let nf = n as f64;
    let u = tau - c / nf * &hv;
    let lambda = c * (nf - 1.0) + m * c * c / (nf * tau - c * &hv) * &hv;
    SolitonStructure::gradient_with_form(
        space.metric().clone(),
        u,
        HForm::MOverU(m),
        lambda,
        binding(&[("c", c), ("n", nf), ("m", m), ("tau", tau)]),
    )
}

/// `u = τ + |x|²`, `h = m/u`, `λ = 2m/(τ + |x|²)` on `ℝ^n`.
pub fn example_euclidean_gradient(n: usize, m: f64, tau: f64) -> Result<SolitonStructure> {
    nonzero_m(m)?;
    require(tau.is_finite() && tau > 0.0, format!("τ must be positive, got {tau}"))?;
    let space = make_euclidean(n)?;
    let u = tau + sum((0..n).map(|i| Expr::coord(i).powi(2)));
    let lambda = 2.0 * m / &u;
    SolitonStructure::gradient_with_form(
        space.metric().clone(),
        u,
        HForm::MOverU(m),
        lambda,
        binding(&[("n", n as f64), ("m", m), ("tau", tau)]),
    )
}

/// A vector field on flat space together with what its conformality check
/// should produce.
#[derive(Debug, Clone)]
pub struct ConformalExample {
    pub metric: Arc<MetricField>,
    pub field: VectorField,
    pub expect_conformal: bool,
    /// Closed form of `(½ L_X g)̊`.
    pub expected_traceless: SymTensorField,
    /// Closed form of `ρ = div X / n`.
    pub expected_rho: Expr,
}

/// `X = (x_n x_1, …, x_n x_{n−1}, x_n²/2)`. It is *not* conformal:
/// `(½ L_X g)̊` has `(i, n)` entries `x_i/2`.
pub fn example_euclidean_claimed_conformal(n: usize) -> Result<ConformalExample> {
    let space = make_euclidean(n)?;
    let xn = Expr::coord(n - 1);
    let mut field: Vec<Expr> = (0..n - 1).map(|i| &xn * Expr::coord(i)).collect();
    field.push(0.5 * xn.powi(2));
    let expected_traceless = SymTensorField::from_fn(n, |i, j| match (i == n - 1, j == n - 1) {
        (true, false) => 0.5 * Expr::coord(j),
        (false, true) => 0.5 * Expr::coord(i),
        _ => Expr::zero(),
    });
    Ok(ConformalExample {
        metric: space.metric().clone(),
        field: VectorField(field),
        expect_conformal: false,
        expected_traceless,
        expected_rho: xn,
    })
}

/// Repaired field `⟨x, e_n⟩ x − (|x|²/2) e_n`, the special conformal
/// generator along `e_n`, with `ρ = x_n`. Not part of the original family.
pub fn example_euclidean_conformal_corrected(n: usize) -> Result<ConformalExample> {
    let space = make_euclidean(n)?;
    let xn = Expr::coord(n - 1);
    let norm2 = sum((0..n).map(|i| Expr::coord(i).powi(2)));
    let mut field: Vec<Expr> = (0..n).map(|i| &xn * Expr::coord(i)).collect();
    field[n - 1] = &field[n - 1] - 0.5 * norm2;
    Ok(ConformalExample {
        metric: space.metric().clone(),
        field: VectorField(field),
        expect_conformal: true,
        expected_traceless: SymTensorField::zero(n),
        expected_rho: xn,
    })
}

/// Choice of `h` on a pseudo-hyperbolic space.
#[derive(Debug, Clone)]
pub enum PseudoH {
    /// `h = −m/u`, giving the constant `λ = (n+m−1)k`.
    NegMOverU(f64),
    /// Any function of `t`, with `λ = (n−1)k − hku`.
    Function(Expr),
}

/// A pseudo-hyperbolic space `ℝ ×_f F` with a gradient soliton on it.
#[derive(Debug, Clone)]
pub struct PseudoHyperbolic {
    pub structure: SolitonStructure,
    pub warped: WarpedProduct,
    pub profile: WarpingSolution,
}

/// `ℝ ×_f F^{n−1}` with `f` from [`warping_solution`](crate::spaces::warping_solution)
/// and the potential `u` solving `∇²u + kug = 0`.
///
/// - `l = 0`: flat fiber, `u = f`;
/// - `l > 0`: fiber `H^{n−1}` of curvature `−l` (so `Ric_F = −(n−2)l⟨,⟩`),
///   `u = f′`, which is positive only on part of the line.
pub fn example_pseudo_hyperbolic(n: usize, k: f64, a: f64, l: f64, h: PseudoH) -> Result<PseudoHyperbolic> {
    at_least_three(n)?;
    let profile = crate::spaces::warping_solution(k, a, l)?;
    let b = binding(&[("n", n as f64), ("k", k), ("a", a), ("l", l)]);
    let base = Arc::new(real_line(-1.0, 1.0)?);
    let fiber = if l == 0.0 {
        flat_fiber("y", n - 1)?
    } else {
        make_hyperbolic_with_curvature(n - 1, -l)?.metric().as_ref().clone()
    };
    let warped = make_warped(base.clone(), Fiber::Explicit(Arc::new(fiber)), profile.f.clone(), &b)?;
    let metric = warped.product().expect("explicit fiber").clone();
    let u = if l == 0.0 {
        profile.f.clone()
    } else {
        base.partial(&profile.f, 0)
    };
    let nf = n as f64;
    let structure = match h {
        PseudoH::NegMOverU(m) => {
            nonzero_m(m)?;
            let mut b = b;
            b.set("m", m);
            SolitonStructure::gradient_with_form(metric, u, HForm::NegMOverU(m), Expr::constant((nf + m - 1.0) * k), b)?
        }
        PseudoH::Function(hf) => {
            require(hf.max_coord().unwrap_or(0) == 0, "h must be a function of t alone")?;
            let lambda = (nf - 1.0) * k - k * &hf * &u;
            SolitonStructure::new(metric, Drift::Potential(u), hf, lambda, b)?
        }
    };
    Ok(PseudoHyperbolic {
        structure,
        warped,
        profile,
    })
}

/// Gradient `(−m/u)`-almost soliton on `S^n(1)`: `u = a h_v + b` with
/// `b > |a|`, `λ = (n−1) + m a h_v / (a h_v + b)`.
pub fn example_neg_m_sphere(n: usize, m: f64, a: f64, b: f64) -> Result<SolitonStructure> {
    at_least_three(n)?;
    nonzero_m(m)?;
    require(a.is_finite() && b.is_finite(), "a and b must be finite")?;
    require(
        b > a.abs(),
        format!("b must exceed |a| so that u > 0, got a = {a}, b = {b}"),
    )?;
    let space = make_sphere(n, 1.0)?;
    let hv = height_function(&space, &last_axis(n))?.field;
    let u = a * &hv + b;
    let lambda = (n as f64 - 1.0) + m * a * &hv / &u;
    SolitonStructure::gradient_with_form(
        space.metric().clone(),
        u,
        HForm::NegMOverU(m),
        lambda,
        binding(&[("n", n as f64), ("m", m), ("a", a), ("b", b)]),
    )
}

/// The profile itself as a one-dimensional gradient `(−m/u)`-Ricci soliton:
/// base `(ℝ, dt²)`, `u = f`, `λ = mk`, with conserved `μ = −(m−1)l`. Its
/// warped product with an `m`-dimensional fiber of `Ric_F = μ⟨,⟩` is
/// Einstein with constant `mk`.
pub fn example_warping_profile(k: f64, a: f64, l: f64, m: f64) -> Result<SolitonStructure> {
    nonzero_m(m)?;
    let profile = crate::spaces::warping_solution(k, a, l)?;
    SolitonStructure::gradient_with_form(
        Arc::new(real_line(-1.0, 1.0)?),
        profile.f,
        HForm::NegMOverU(m),
        Expr::constant(m * k),
        binding(&[("k", k), ("a", a), ("l", l), ("m", m)]),
    )
}
