use nalgebra::{DMatrix, DVector};

use super::{riemann_lowered, MetricField, SymTensorField};
use crate::error::{Error, Result};
use crate::expr::{ParameterBinding, Tape};

/// Numeric metric matrix at a point.
pub fn metric_at(g: &MetricField, binding: &ParameterBinding, p: &[f64]) -> Result<DMatrix<f64>> {
    let tape = Tape::compile(g.components().components(), binding)?;
    let vals = tape.eval(p).map_err(|source| Error::EvalAt {
        point: p.to_vec(),
        source,
    })?;
    let n = g.dim();
    Ok(DMatrix::from_row_slice(n, n, &vals))
}

/// Spectral summary of a symmetric matrix.
#[derive(Debug, Clone, Copy)]
pub struct SpdCheck {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl SpdCheck {
    pub fn of(m: &DMatrix<f64>) -> SpdCheck {
        let eig = m.clone().symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        SpdCheck {
            min_eigenvalue: min,
            max_eigenvalue: max,
        }
    }

    pub fn condition(&self) -> f64 {
        if self.min_eigenvalue <= 0.0 {
            f64::INFINITY
        } else {
            self.max_eigenvalue / self.min_eigenvalue
        }
    }

    pub fn is_spd(&self) -> bool {
        self.min_eigenvalue > 0.0 && self.max_eigenvalue.is_finite()
    }
}

fn inverse(gm: &DMatrix<f64>, p: &[f64]) -> Result<DMatrix<f64>> {
    gm.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::SingularMetric { point: p.to_vec() })
}

/// `√(g^{ik} g^{jl} T_ij T_kl)` from numeric values (row-major `n x n`).
pub fn sym_norm_at(gm: &DMatrix<f64>, t: &[f64], p: &[f64]) -> Result<f64> {
    let n = gm.nrows();
    let tm = DMatrix::from_row_slice(n, n, t);
    let gi = inverse(gm, p)?;
    let a = &gi * &tm;
    // tr(G⁻¹ T G⁻¹ T) = Σ_ij a_ij a_ji
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * a[(j, i)];
        }
    }
    Ok(s.max(0.0).sqrt())
}

/// `√(g^{ij} ω_i ω_j)` from numeric values.
pub fn one_form_norm_at(gm: &DMatrix<f64>, w: &[f64], p: &[f64]) -> Result<f64> {
    let gi = inverse(gm, p)?;
    let v = DVector::from_column_slice(w);
    Ok((v.transpose() * gi * &v)[(0, 0)].max(0.0).sqrt())
}

/// g-norm of a symmetric tensor field at one point.
pub fn tensor_norm(g: &MetricField, t: &SymTensorField, binding: &ParameterBinding, p: &[f64]) -> Result<f64> {
    let n = g.dim();
    let mut roots = g.components().components().to_vec();
    roots.extend_from_slice(t.components());
    let vals = Tape::compile(&roots, binding)?
        .eval(p)
        .map_err(|source| Error::EvalAt {
            point: p.to_vec(),
            source,
        })?;
    let gm = DMatrix::from_row_slice(n, n, &vals[..n * n]);
    sym_norm_at(&gm, &vals[n * n..], p)
}

/// Sectional curvature of the plane spanned by `u, v` at `p`:
/// `⟨R(u,v)v, u⟩ / (|u|²|v|² − ⟨u,v⟩²)`.
pub fn riemann_sectional(g: &MetricField, binding: &ParameterBinding, p: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    let n = g.dim();
    if u.len() != n || v.len() != n {
        return Err(Error::invalid("plane vectors must match the chart dimension"));
    }
    let riem = riemann_lowered(g);
    let mut roots = g.components().components().to_vec();
    roots.extend_from_slice(riem);
    let vals = Tape::compile(&roots, binding)?
        .eval(p)
        .map_err(|source| Error::EvalAt {
            point: p.to_vec(),
            source,
        })?;
    let gm = DMatrix::from_row_slice(n, n, &vals[..n * n]);
    let r = &vals[n * n..];
    let uu = DVector::from_column_slice(u);
    let vv = DVector::from_column_slice(v);
    let guu = (uu.transpose() * &gm * &uu)[(0, 0)];
    let gvv = (vv.transpose() * &gm * &vv)[(0, 0)];
    let guv = (uu.transpose() * &gm * &vv)[(0, 0)];
    let area = guu * gvv - guv * guv;
    if area <= 1e-14 * guu.abs().max(1.0) * gvv.abs().max(1.0) {
        return Err(Error::DegeneratePlane { point: p.to_vec() });
    }
    // R_{ασμν} u^α v^σ u^μ v^ν = ⟨R(u,v)v, u⟩
    let mut num = 0.0;
    for a in 0..n {
        for s in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    num += r[((a * n + s) * n + mu) * n + nu] * u[a] * v[s] * u[mu] * v[nu];
                }
            }
        }
    }
    Ok(num / area)
}
