//! Coordinate charts, tensor fields and the curvature calculus.
//!
//! Every derived field (Christoffel symbols, curvature, Hessians, residuals)
//! is itself an array of [`Expr`], so it can be differentiated again.
//! Vector fields are stored contravariantly and one-forms covariantly;
//! index raising and lowering are explicit.

mod calculus;
mod identities;
mod numeric;
pub mod random;
mod sampling;

pub use calculus::*;
pub use identities::*;
pub use numeric::{metric_at, one_form_norm_at, riemann_sectional, sym_norm_at, tensor_norm, SpdCheck};
pub use sampling::{sample_points, MAX_CONDITION};

use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::expr::{Differentiator, Expr};

/// A scalar field is a single expression over the chart coordinates.
pub type ScalarField = Expr;

/// Local coordinate system: names, a domain predicate (every expression
/// must be positive) and a sampling box.
#[derive(Debug, Clone)]
pub struct Chart {
    coords: Vec<String>,
    domain: Vec<Expr>,
    bounds: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(coords: Vec<String>, bounds: Vec<(f64, f64)>) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::invalid("chart needs at least one coordinate"));
        }
        if coords.len() != bounds.len() {
            return Err(Error::invalid(format!(
                "{} coordinates but {} box intervals",
                coords.len(),
                bounds.len()
            )));
        }
        for (name, (lo, hi)) in coords.iter().zip(&bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("degenerate box [{lo}, {hi}] for `{name}`")));
            }
        }
        let mut sorted = coords.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != coords.len() {
            return Err(Error::invalid("duplicate coordinate names"));
        }
        Ok(Chart {
            coords,
            domain: Vec::new(),
            bounds,
        })
    }

    /// Chart with coordinates `prefix1..prefixN` on the cube `[lo, hi]^n`.
    pub fn cube(prefix: &str, n: usize, lo: f64, hi: f64) -> Result<Chart> {
        Chart::new((1..=n).map(|i| format!("{prefix}{i}")).collect(), vec![(lo, hi); n])
    }

    /// Adds domain predicates `e > 0`.
    pub fn with_domain(mut self, predicates: Vec<Expr>) -> Result<Chart> {
        for p in &predicates {
            if let Some(i) = p.max_coord() {
                if i >= self.dim() {
                    return Err(Error::invalid(format!(
                        "domain predicate uses coordinate {i} on a {}-dimensional chart",
                        self.dim()
                    )));
                }
            }
        }
        self.domain.extend(predicates);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain(&self) -> &[Expr] {
        &self.domain
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Same chart with coordinates renamed `prefix1..prefixN`.
    pub fn with_prefix(&self, prefix: &str) -> Result<Chart> {
        Chart::new(
            (1..=self.dim()).map(|i| format!("{prefix}{i}")).collect(),
            self.bounds.clone(),
        )?
        .with_domain(self.domain.clone())
    }

    /// Product chart: coordinates of `other` are renumbered after ours.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        let mut bounds = self.bounds.clone();
        bounds.extend(other.bounds.iter().copied());
        let mut domain = self.domain.clone();
        domain.extend(other.domain.iter().map(|e| e.shift_coords(self.dim())));
        Chart::new(coords, bounds)?.with_domain(domain)
    }
}

/// A sampled chart point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PointSample {
    pub coords: Vec<f64>,
    pub admissible: bool,
}

fn check_dim(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!("{what} has {got} components, expected {want}")));
    }
    Ok(())
}

/// Contravariant components `X^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(pub Vec<Expr>);

/// Covariant components `ω_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormField(pub Vec<Expr>);

impl VectorField {
    pub fn zero(n: usize) -> Self {
        VectorField(vec![Expr::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, s: &Expr) -> VectorField {
        VectorField(self.0.iter().map(|c| s * c).collect())
    }

    /// `X^i` as a coordinate-position field `(x_1, ..., x_n)`.
    pub fn position(n: usize) -> Self {
        VectorField((0..n).map(Expr::coord).collect())
    }
}

impl OneFormField {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, s: &Expr) -> OneFormField {
        OneFormField(self.0.iter().map(|c| s * c).collect())
    }

    pub fn add(&self, other: &OneFormField) -> OneFormField {
        OneFormField(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &OneFormField) -> OneFormField {
        OneFormField(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// Symmetric covariant 2-tensor, stored as a full `n x n` array whose
/// upper triangle is authoritative and mirrored on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    n: usize,
    comps: Vec<Expr>,
}

impl SymTensorField {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut comps = vec![Expr::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                comps[i * n + j] = v.clone();
                comps[j * n + i] = v;
            }
        }
        SymTensorField { n, comps }
    }

    /// From the upper triangle in row-major order: (0,0), (0,1), ..., (n-1,n-1).
    pub fn from_upper(n: usize, upper: Vec<Expr>) -> Result<Self> {
        check_dim("upper triangle", upper.len(), n * (n + 1) / 2)?;
        let mut it = upper.into_iter();
        Ok(SymTensorField::from_fn(n, |_, _| it.next().expect("length checked")))
    }

    pub fn zero(n: usize) -> Self {
        SymTensorField::from_fn(n, |_, _| Expr::zero())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i * self.n + j]
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn upper(&self) -> Vec<Expr> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.get(i, j).clone());
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        SymTensorField::from_fn(self.n, |i, j| f(self.get(i, j)))
    }

    pub fn add(&self, other: &SymTensorField) -> Self {
        SymTensorField::from_fn(self.n, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &SymTensorField) -> Self {
        SymTensorField::from_fn(self.n, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.map(|c| s * c)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }
}

/// Christoffel symbols `Γ^k_ij`, symmetric in `i, j`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    n: usize,
    comps: Vec<Expr>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> &Expr {
        &self.comps[(k * self.n + i) * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }
}

/// Rank-3 array `A[i][j][k]`; for `∇T` the first index is the derivative.
#[derive(Debug, Clone)]
pub struct Tensor3 {
    n: usize,
    comps: Vec<Expr>,
}

impl Tensor3 {
    pub fn get(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.comps[(i * self.n + j) * self.n + k]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }
}

/// `∇_i Z^k` stored as `[i][k]`.
#[derive(Debug, Clone)]
pub struct MixedTensor {
    n: usize,
    comps: Vec<Expr>,
}

impl MixedTensor {
    pub fn get(&self, i: usize, k: usize) -> &Expr {
        &self.comps[i * self.n + k]
    }
}

#[derive(Default)]
struct MetricCache {
    inverse: OnceLock<SymTensorField>,
    christoffel: OnceLock<Christoffel>,
    ricci: OnceLock<SymTensorField>,
    scalar: OnceLock<Expr>,
    riemann: OnceLock<Vec<Expr>>,
    partials: OnceLock<Vec<Mutex<Differentiator>>>,
}

/// Riemannian metric on a chart. Derived quantities are computed lazily
/// and cached; the metric itself is immutable.
pub struct MetricField {
    chart: Chart,
    g: SymTensorField,
    cache: MetricCache,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField")
            .field("chart", &self.chart)
            .field("g", &self.g)
            .finish()
    }
}

impl Clone for MetricField {
    fn clone(&self) -> Self {
        MetricField::new(self.chart.clone(), self.g.clone()).expect("validated on construction")
    }
}

impl MetricField {
    pub fn new(chart: Chart, g: SymTensorField) -> Result<MetricField> {
        check_dim("metric", g.dim(), chart.dim())?;
        for c in g.components() {
            if let Some(i) = c.max_coord() {
                if i >= chart.dim() {
                    return Err(Error::invalid(format!(
                        "metric component uses coordinate {i} on a {}-dimensional chart",
                        chart.dim()
                    )));
                }
            }
        }
        Ok(MetricField {
            chart,
            g,
            cache: MetricCache::default(),
        })
    }

    pub fn from_upper(chart: Chart, upper: Vec<Expr>) -> Result<MetricField> {
        let n = chart.dim();
        MetricField::new(chart, SymTensorField::from_upper(n, upper)?)
    }

    /// Conformally flat metric `factor * δ`.
    pub fn conformally_flat(chart: Chart, factor: Expr) -> Result<MetricField> {
        let n = chart.dim();
        MetricField::new(
            chart,
            SymTensorField::from_fn(n, |i, j| if i == j { factor.clone() } else { Expr::zero() }),
        )
    }

    pub fn euclidean(chart: Chart) -> Result<MetricField> {
        MetricField::conformally_flat(chart, Expr::one())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn components(&self) -> &SymTensorField {
        &self.g
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        self.g.get(i, j)
    }

    /// Same components on a chart with extra domain predicates.
    pub fn with_domain(&self, predicates: Vec<Expr>) -> Result<MetricField> {
        MetricField::new(self.chart.clone().with_domain(predicates)?, self.g.clone())
    }

    /// Same components with coordinates renamed `prefix1..prefixN`.
    pub fn with_prefix(&self, prefix: &str) -> Result<MetricField> {
        MetricField::new(self.chart.with_prefix(prefix)?, self.g.clone())
    }

    /// `∂e/∂x_i`, memoized per metric so repeated derivatives of shared
    /// subexpressions are built once.
    pub fn partial(&self, e: &Expr, i: usize) -> Expr {
        let diffs = self
            .cache
            .partials
            .get_or_init(|| (0..self.dim()).map(|k| Mutex::new(Differentiator::new(k))).collect());
        diffs[i].lock().unwrap_or_else(|p| p.into_inner()).diff(e)
    }

    pub(crate) fn cache_inverse(&self, f: impl FnOnce() -> SymTensorField) -> &SymTensorField {
        self.cache.inverse.get_or_init(f)
    }

    pub(crate) fn cache_christoffel(&self, f: impl FnOnce() -> Christoffel) -> &Christoffel {
        self.cache.christoffel.get_or_init(f)
    }

    pub(crate) fn cache_ricci(&self, f: impl FnOnce() -> SymTensorField) -> &SymTensorField {
        self.cache.ricci.get_or_init(f)
    }

    pub(crate) fn cache_scalar(&self, f: impl FnOnce() -> Expr) -> &Expr {
        self.cache.scalar.get_or_init(f)
    }

    pub(crate) fn cache_riemann(&self, f: impl FnOnce() -> Vec<Expr>) -> &Vec<Expr> {
        self.cache.riemann.get_or_init(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_validation() {
        assert!(Chart::new(vec!["x".into()], vec![(1.0, 1.0)]).is_err());
        assert!(Chart::new(vec!["x".into(), "x".into()], vec![(0.0, 1.0); 2]).is_err());
        assert!(Chart::new(vec![], vec![]).is_err());
        let c = Chart::cube("x", 2, -1.0, 1.0).unwrap();
        assert!(c.clone().with_domain(vec![Expr::coord(2)]).is_err());
        assert_eq!(c.coords(), &["x1".to_string(), "x2".to_string()]);
    }

    #[test]
    fn sym_tensor_mirrors_upper_triangle() {
        let t = SymTensorField::from_upper(2, vec![Expr::coord(0), Expr::constant(2.0), Expr::coord(1)]).unwrap();
        assert_eq!(t.get(0, 1), t.get(1, 0));
        assert_eq!(t.get(1, 0).as_const(), Some(2.0));
        assert!(SymTensorField::from_upper(2, vec![Expr::one()]).is_err());
    }

    #[test]
    fn product_chart_shifts_domain() {
        let a = Chart::cube("t", 1, -1.0, 1.0).unwrap();
        let b = Chart::cube("y", 2, 0.5, 2.0)
            .unwrap()
            .with_domain(vec![Expr::coord(1)])
            .unwrap();
        let p = a.product(&b).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.domain()[0], Expr::coord(2));
    }
}
