//! Sampled residual reports.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, ParameterBinding, Tape};
use crate::geometry::{one_form_norm_at, sym_norm_at, MetricField, OneFormField, PointSample, SymTensorField};

/// Outcome of checking one quantity over a set of sample points.
///
/// `pass` is `sup_residual <= tolerance`; everything here is a pure
/// function of the inputs and point order, so reports are reproducible.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResidualReport {
    pub name: String,
    pub points: usize,
    pub residuals: Vec<f64>,
    pub sup_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_point: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl ResidualReport {
    /// Builds a report from per-point residuals (same order as `points`).
    pub fn from_values(name: &str, points: &[PointSample], residuals: Vec<f64>, tolerance: f64) -> ResidualReport {
        debug_assert_eq!(points.len(), residuals.len());
        let (worst, sup) = residuals
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |(wi, wv), (i, &v)| {
                // NaN counts as worst
                if v.is_nan() || (!wv.is_nan() && v > wv) {
                    (i, v)
                } else {
                    (wi, wv)
                }
            });
        let sup = if residuals.is_empty() { 0.0 } else { sup };
        ResidualReport {
            name: name.to_string(),
            points: points.len(),
            residuals,
            sup_residual: sup,
            tolerance,
            pass: sup <= tolerance,
            worst_point: points.get(worst).map(|p| p.coords.clone()).unwrap_or_default(),
            metadata: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

/// What to measure at each point.
#[derive(Debug, Clone)]
pub enum Residual {
    /// `|φ|`.
    Scalar(Expr),
    /// `√(g^{ij} ω_i ω_j)`.
    OneForm(OneFormField),
    /// `√(g^{ik} g^{jl} T_ij T_kl)`.
    Sym(SymTensorField),
    /// `max_i |c_i|`, for componentwise comparisons.
    Components(Vec<Expr>),
}

impl Residual {
    fn roots(&self) -> Vec<Expr> {
        match self {
            Residual::Scalar(e) => vec![e.clone()],
            Residual::OneForm(w) => w.0.clone(),
            Residual::Sym(t) => t.components().to_vec(),
            Residual::Components(c) => c.clone(),
        }
    }
}

/// Evaluates `residual` at every point and summarizes the magnitudes.
/// Evaluation errors are reported with the first offending point.
pub fn evaluate_residual(
    name: &str,
    g: &MetricField,
    binding: &ParameterBinding,
    points: &[PointSample],
    residual: &Residual,
    tolerance: f64,
) -> Result<ResidualReport> {
    let values = pointwise(g, binding, points, residual)?;
    Ok(ResidualReport::from_values(name, points, values, tolerance))
}

/// Per-point magnitudes of `residual`.
pub fn pointwise(
    g: &MetricField,
    binding: &ParameterBinding,
    points: &[PointSample],
    residual: &Residual,
) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::invalid("no sample points"));
    }
    let n = g.dim();
    let mut roots = g.components().components().to_vec();
    roots.extend(residual.roots());
    let tape = Tape::compile(&roots, binding)?;
    points
        .par_iter()
        .map_init(Vec::new, |scratch, p| {
            let x = &p.coords;
            let vals = tape.eval_with(x, scratch).map_err(|source| Error::EvalAt {
                point: x.clone(),
                source,
            })?;
            let (gv, rv) = vals.split_at(n * n);
            match residual {
                Residual::Scalar(_) => Ok(rv[0].abs()),
                Residual::Components(_) => Ok(rv.iter().fold(0.0f64, |m, v| m.max(v.abs()))),
                Residual::OneForm(_) => one_form_norm_at(&DMatrix::from_row_slice(n, n, gv), rv, x),
                Residual::Sym(_) => sym_norm_at(&DMatrix::from_row_slice(n, n, gv), rv, x),
            }
        })
        .collect()
}

/// Raw values of `exprs` at every point (row per point).
pub fn sample_values(exprs: &[Expr], binding: &ParameterBinding, points: &[PointSample]) -> Result<Vec<Vec<f64>>> {
    let tape = Tape::compile(exprs, binding)?;
    points
        .par_iter()
        .map_init(Vec::new, |scratch, p| {
            tape.eval_with(&p.coords, scratch).map_err(|source| Error::EvalAt {
                point: p.coords.clone(),
                source,
            })
        })
        .collect()
}

/// `(max − min) / max|v|`, or 0 when every value is (numerically) zero.
pub fn relative_spread(values: &[f64]) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale < 1e-14 {
        return 0.0;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / scale
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
