//! Model geometries and warped products.
//!
//! - spheres use stereographic coordinates from the north pole,
//!   `g = 4r⁴ / (r² + |x|²)² δ`, sectional curvature `1/r²`;
//! - hyperbolic space uses the upper half-space `g = x_n⁻² δ / |κ|`,
//!   sectional curvature `κ < 0` (default `κ = −1`);
//! - a warped product `B ×_f F` carries `g_B + f² g_F` on the product chart,
//!   base coordinates first.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{sum, Expr, ParameterBinding, Tape};
use crate::geometry::{
    gradient, hessian, laplacian, ricci, sample_points, vector_inner, Chart, MetricField, SymTensorField,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Euclidean,
    Sphere { radius: f64 },
    Hyperbolic { curvature: f64 },
}

#[derive(Debug, Clone)]
pub struct ModelSpace {
    kind: ModelKind,
    metric: Arc<MetricField>,
}

impl ModelSpace {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn metric(&self) -> &Arc<MetricField> {
        &self.metric
    }

    /// Constant sectional curvature.
    pub fn curvature(&self) -> f64 {
        match self.kind {
            ModelKind::Euclidean => 0.0,
            ModelKind::Sphere { radius } => 1.0 / (radius * radius),
            ModelKind::Hyperbolic { curvature } => curvature,
        }
    }

    /// Point of the ambient model (ℝ^{n+1} for spheres, Minkowski space for
    /// the hyperboloid) as expressions in chart coordinates.
    pub fn embedding(&self) -> Result<Vec<Expr>> {
        let n = self.dim();
        let x: Vec<Expr> = (0..n).map(Expr::coord).collect();
        let norm2 = sum(x.iter().map(|c| c.powi(2)));
        match self.kind {
            ModelKind::Euclidean => Err(Error::invalid("Euclidean space has no height functions")),
            ModelKind::Sphere { radius: r } => {
                // p = (2r² x, r(|x|² − r²)) / (r² + |x|²)
                let den = r * r + &norm2;
                let mut p: Vec<Expr> = x.iter().map(|c| 2.0 * r * r * c / &den).collect();
                p.push(r * (&norm2 - r * r) / &den);
                Ok(p)
            }
            ModelKind::Hyperbolic { curvature } => {
                // hyperboloid point of radius R = 1/√|κ| from the half space
                let big_r = 1.0 / (-curvature).sqrt();
                let xn = &x[n - 1];
                let mut p: Vec<Expr> = x[..n - 1].iter().map(|c| big_r * c / xn).collect();
                p.push(big_r * (&norm2 - 1.0) / (2.0 * xn));
                p.push(big_r * (&norm2 + 1.0) / (2.0 * xn));
                Ok(p)
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "model space dimension must be at least 2, got {n}"
        )));
    }
    Ok(())
}

pub fn make_euclidean(n: usize) -> Result<ModelSpace> {
    check_dim(n)?;
    Ok(ModelSpace {
        kind: ModelKind::Euclidean,
        metric: Arc::new(MetricField::euclidean(Chart::cube("x", n, -1.0, 1.0)?)?),
    })
}

pub fn make_sphere(n: usize, r: f64) -> Result<ModelSpace> {
    check_dim(n)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!("sphere radius must be positive, got {r}")));
    }
    let chart = Chart::cube("x", n, -2.0 * r, 2.0 * r)?;
    let norm2 = sum((0..n).map(|i| Expr::coord(i).powi(2)));
    let factor = 4.0 * r.powi(4) / (r * r + norm2).powi(2);
    Ok(ModelSpace {
        kind: ModelKind::Sphere { radius: r },
        metric: Arc::new(MetricField::conformally_flat(chart, factor)?),
    })
}

pub fn make_hyperbolic(n: usize) -> Result<ModelSpace> {
    check_dim(n)?;
    make_hyperbolic_with_curvature(n, -1.0)
}

/// Upper half-space model with sectional curvature `kappa < 0`. Dimension 1
/// is allowed so the model can serve as a fiber.
pub fn make_hyperbolic_with_curvature(n: usize, kappa: f64) -> Result<ModelSpace> {
    if n < 1 {
        return Err(Error::invalid("hyperbolic dimension must be positive"));
    }
    if !(kappa.is_finite() && kappa < 0.0) {
        return Err(Error::invalid(format!(
            "hyperbolic curvature must be negative, got {kappa}"
        )));
    }
    let mut bounds = vec![(-1.0, 1.0); n];
    bounds[n - 1] = (0.25, 2.0);
    let chart =
        Chart::new((1..=n).map(|i| format!("y{i}")).collect(), bounds)?.with_domain(vec![Expr::coord(n - 1)])?;
    let factor = (1.0 / -kappa) / Expr::coord(n - 1).powi(2);
    Ok(ModelSpace {
        kind: ModelKind::Hyperbolic { curvature: kappa },
        metric: Arc::new(MetricField::conformally_flat(chart, factor)?),
    })
}

/// Restriction of an ambient linear function `p ↦ Σ v_i p_i` to a sphere or
/// hyperbolic space. Satisfies `∇²h_v = −c·h_v·g` with `c` the curvature.
#[derive(Debug, Clone)]
pub struct HeightFunction {
    pub direction: Vec<f64>,
    pub field: Expr,
}

/// Height function along `v`. For spheres `v` must be a Euclidean unit
/// vector; for the hyperboloid `|⟨v,v⟩| = 1` in the Minkowski product
/// `Σ v_i² − v_{n+1}²`, so `v = e_{n+1}` gives `h_v = p_{n+1} ≥ 1`.
pub fn height_function(space: &ModelSpace, v: &[f64]) -> Result<HeightFunction> {
    let n = space.dim();
    if v.len() != n + 1 {
        return Err(Error::invalid(format!("direction needs {} components", n + 1)));
    }
    let euclid: f64 = v.iter().map(|c| c * c).sum();
    match space.kind {
        ModelKind::Euclidean => return Err(Error::invalid("height functions need a sphere or hyperbolic space")),
        ModelKind::Sphere { .. } => {
            if (euclid - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("direction must be a unit vector"));
            }
        }
        ModelKind::Hyperbolic { .. } => {
            let mink = euclid - 2.0 * v[n] * v[n];
            if (mink.abs() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("direction must have Minkowski norm ±1"));
            }
        }
    }
    let p = space.embedding()?;
    let field = sum(p.iter().zip(v).filter(|(_, c)| **c != 0.0).map(|(pi, c)| *c * pi));
    Ok(HeightFunction {
        direction: v.to_vec(),
        field,
    })
}

/// `e_{n+1}`, the direction used by the example constructors.
pub fn last_axis(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    v[n] = 1.0;
    v
}

/// Fiber of a warped product.
#[derive(Debug, Clone)]
pub enum Fiber {
    Explicit(Arc<MetricField>),
    /// Einstein fiber known only through its dimension and `Ric_F = μ⟨,⟩`.
    Abstract {
        dim: usize,
        mu: Option<f64>,
    },
}

impl Fiber {
    pub fn dim(&self) -> usize {
        match self {
            Fiber::Explicit(g) => g.dim(),
            Fiber::Abstract { dim, .. } => *dim,
        }
    }
}

/// `B ×_f F` with metric `g_B + f²⟨,⟩`.
#[derive(Debug, Clone)]
pub struct WarpedProduct {
    base: Arc<MetricField>,
    fiber: Fiber,
    warp: Expr,
    product: Option<Arc<MetricField>>,
}

impl WarpedProduct {
    pub fn base(&self) -> &Arc<MetricField> {
        &self.base
    }

    pub fn fiber(&self) -> &Fiber {
        &self.fiber
    }

    pub fn warp(&self) -> &Expr {
        &self.warp
    }

    /// Assembled product metric; `None` for abstract fibers.
    pub fn product(&self) -> Option<&Arc<MetricField>> {
        self.product.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.base.dim() + self.fiber.dim()
    }
}

/// Assembles `B ×_f F`. Fails if `f ≤ 0` at any of 64 seeded base samples
/// or if the warping function depends on fiber coordinates.
pub fn make_warped(base: Arc<MetricField>, fiber: Fiber, f: Expr, binding: &ParameterBinding) -> Result<WarpedProduct> {
    let nb = base.dim();
    if let Some(i) = f.max_coord() {
        if i >= nb {
            return Err(Error::invalid("warping function must depend on base coordinates only"));
        }
    }
    if fiber.dim() == 0 {
        return Err(Error::invalid("fiber dimension must be positive"));
    }
    let samples = sample_points(base.chart(), Some(&base), binding, 64, 0)?;
    let tape = Tape::compile(std::slice::from_ref(&f), binding)?;
    for p in &samples {
        let v = tape.eval(&p.coords).map_err(|source| Error::EvalAt {
            point: p.coords.clone(),
            source,
        })?[0];
        if v <= 0.0 {
            return Err(Error::invalid(format!("warping function is {v} at {:?}", p.coords)));
        }
    }
    let product = match &fiber {
        Fiber::Abstract { .. } => None,
        Fiber::Explicit(gf) => {
            let chart = base.chart().product(gf.chart())?.with_domain(vec![f.clone()])?;
            let n = nb + gf.dim();
            let f2 = f.powi(2);
            let g = SymTensorField::from_fn(n, |i, j| match (i < nb, j < nb) {
                (true, true) => base.get(i, j).clone(),
                (false, false) => &f2 * gf.get(i - nb, j - nb).shift_coords(nb),
                _ => Expr::zero(),
            });
            Some(Arc::new(MetricField::new(chart, g)?))
        }
    };
    Ok(WarpedProduct {
        base,
        fiber,
        warp: f,
        product,
    })
}

/// Ricci tensor of a warped product from the O'Neill formulas:
///
/// - `Ric(X,Y) = Ric_B(X,Y) − (m/f) ∇²f(X,Y)`,
/// - `Ric(X,V) = 0`,
/// - `Ric(V,W) = Ric_F(V,W) − (Δf/f + (m−1)|∇f|²/f²) g(V,W)`.
#[derive(Debug, Clone)]
pub struct OneillRicci {
    /// Horizontal block in base coordinates.
    pub horizontal: SymTensorField,
    /// Full tensor in product coordinates (explicit fibers only).
    pub product: Option<SymTensorField>,
    /// `c` with `Ric(V,W) = c⟨V,W⟩` when the fiber is Einstein with known μ:
    /// `c = μ − fΔf − (m−1)|∇f|²`.
    pub vertical_factor: Option<Expr>,
}

pub fn oneill_ricci(w: &WarpedProduct) -> Result<OneillRicci> {
    let base = &w.base;
    let nb = base.dim();
    let m = w.fiber.dim() as f64;
    let f = &w.warp;
    let hf = hessian(base, f);
    let ric_b = ricci(base);
    let horizontal = SymTensorField::from_fn(nb, |i, j| ric_b.get(i, j) - (m / f) * hf.get(i, j));
    let lap = laplacian(base, f);
    let grad = gradient(base, f);
    let grad2 = vector_inner(base, &grad, &grad);
    match &w.fiber {
        Fiber::Abstract { mu, .. } => {
            let mu = mu.ok_or_else(|| Error::invalid("abstract fiber without μ"))?;
            Ok(OneillRicci {
                horizontal,
                product: None,
                vertical_factor: Some(mu - f * &lap - (m - 1.0) * &grad2),
            })
        }
        Fiber::Explicit(gf) => {
            let ric_f = ricci(gf);
            let coeff = &lap / f + (m - 1.0) * &grad2 / f.powi(2);
            let f2 = f.powi(2);
            let n = nb + gf.dim();
            let product = SymTensorField::from_fn(n, |i, j| match (i < nb, j < nb) {
                (true, true) => horizontal.get(i, j).clone(),
                (false, false) => {
                    let (a, b) = (i - nb, j - nb);
                    ric_f.get(a, b).shift_coords(nb) - &coeff * (&f2 * gf.get(a, b).shift_coords(nb))
                }
                _ => Expr::zero(),
            });
            Ok(OneillRicci {
                horizontal,
                product: Some(product),
                vertical_factor: None,
            })
        }
    }
}

/// Numeric O'Neill Ricci at a product point (explicit fibers) or at a base
/// point (abstract fibers, horizontal block only).
#[derive(Debug, Clone)]
pub struct OneillValue {
    pub block: DMatrix<f64>,
    pub vertical_factor: Option<f64>,
}

pub fn oneill_ricci_at(w: &WarpedProduct, binding: &ParameterBinding, p: &[f64]) -> Result<OneillValue> {
    let o = oneill_ricci(w)?;
    let t = o.product.as_ref().unwrap_or(&o.horizontal);
    let mut roots = t.components().to_vec();
    if let Some(v) = &o.vertical_factor {
        roots.push(v.clone());
    }
    let vals = Tape::compile(&roots, binding)?
        .eval(p)
        .map_err(|source| Error::EvalAt {
            point: p.to_vec(),
            source,
        })?;
    let k = t.dim();
    Ok(OneillValue {
        block: DMatrix::from_row_slice(k, k, &vals[..k * k]),
        vertical_factor: o.vertical_factor.as_ref().map(|_| vals[k * k]),
    })
}

/// Profile `f(t) = (A/√−k) sinh(√−k t) + √((A²+l)/−k) cosh(√−k t)`, the
/// positive solution of `f″ + k f = 0` with `(f′)² + k f² = −l`.
#[derive(Debug, Clone)]
pub struct WarpingSolution {
    pub k: f64,
    pub amplitude: f64,
    pub l: f64,
    /// `f` in coordinate `x_0 = t`.
    pub f: Expr,
}

pub fn warping_solution(k: f64, amplitude: f64, l: f64) -> Result<WarpingSolution> {
    if !(k.is_finite() && k < 0.0) {
        return Err(Error::invalid(format!("k must be negative, got {k}")));
    }
    if !(amplitude.is_finite() && amplitude != 0.0) {
        return Err(Error::invalid("A must be a nonzero constant"));
    }
    if !(l.is_finite() && l >= 0.0) {
        return Err(Error::invalid(format!("l must be non-negative, got {l}")));
    }
    let s = (-k).sqrt();
    let b = ((amplitude * amplitude + l) / -k).sqrt();
    let st = s * Expr::coord(0);
    let f = (amplitude / s) * st.sinh() + b * st.cosh();
    Ok(WarpingSolution { k, amplitude, l, f })
}

/// The real line `(t)` with `dt²`, box `[lo, hi]`.
pub fn real_line(lo: f64, hi: f64) -> Result<MetricField> {
    MetricField::euclidean(Chart::new(vec!["t".into()], vec![(lo, hi)])?)
}

/// Flat `ℝ^m` with coordinates `prefix1..prefixm` on `[-1, 1]^m`.
pub fn flat_fiber(prefix: &str, m: usize) -> Result<MetricField> {
    MetricField::euclidean(Chart::cube(prefix, m, -1.0, 1.0)?)
}

/// Complete Einstein fiber of dimension `m` with `Ric = μ⟨,⟩` and
/// coordinates `prefix1..prefixm`: flat for `μ = 0`, a round sphere of
/// radius `√((m−1)/μ)` for `μ > 0`, hyperbolic of curvature `μ/(m−1)` for
/// `μ < 0`.
pub fn einstein_fiber(m: usize, mu: f64, prefix: &str) -> Result<MetricField> {
    if m == 0 || !mu.is_finite() {
        return Err(Error::invalid("fiber needs a positive dimension and finite μ"));
    }
    if mu == 0.0 {
        return flat_fiber(prefix, m);
    }
    if m < 2 {
        return Err(Error::invalid("a one-dimensional fiber is flat, so μ must be 0"));
    }
    let k = mu / (m as f64 - 1.0);
    let space = if k > 0.0 {
        make_sphere(m, 1.0 / k.sqrt())?
    } else {
        make_hyperbolic_with_curvature(m, k)?
    };
    space.metric().with_prefix(prefix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::evaluate;

    #[test]
    fn invalid_parameters() {
        assert!(make_sphere(1, 1.0).is_err());
        assert!(make_sphere(3, 0.0).is_err());
        assert!(make_euclidean(1).is_err());
        assert!(make_hyperbolic_with_curvature(3, 0.5).is_err());
        assert!(warping_solution(1.0, 1.0, 0.0).is_err());
        assert!(warping_solution(-1.0, 0.0, 0.0).is_err());
        assert!(warping_solution(-1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn height_function_at_south_pole() {
        let s = make_sphere(3, 1.0).unwrap();
        let h = height_function(&s, &last_axis(3)).unwrap();
        assert_eq!(evaluate(&h.field, &[0.0; 3], &ParameterBinding::new()), Ok(-1.0));
        assert!(height_function(&make_euclidean(3).unwrap(), &last_axis(3)).is_err());
        assert!(height_function(&s, &[0.0, 0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn warping_profile_reduces_to_exponential() {
        let w = warping_solution(-1.0, 1.0, 0.0).unwrap();
        for t in [-1.0, 0.0, 0.7, 2.0] {
            let v = evaluate(&w.f, &[t], &ParameterBinding::new()).unwrap();
            assert!((v - f64::exp(t)).abs() < 1e-12 * v.max(1.0));
        }
    }

    #[test]
    fn non_positive_warp_rejected() {
        let base = Arc::new(real_line(-1.0, 1.0).unwrap());
        let fiber = Fiber::Explicit(Arc::new(flat_fiber("y", 2).unwrap()));
        assert!(make_warped(base.clone(), fiber.clone(), Expr::coord(0), &ParameterBinding::new()).is_err());
        assert!(make_warped(base, fiber, Expr::coord(1), &ParameterBinding::new()).is_err());
    }
}
