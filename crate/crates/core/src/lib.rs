//! Symbolic-numeric engine for h-almost Ricci solitons.
//!
//! The crate is layered bottom-up:
//!
//! - [`expr`]: a closed expression language with exact differentiation;
//! - [`geometry`]: charts, metrics and the curvature/derivative calculus;
//! - [`spaces`]: model geometries and warped products;
//! - [`soliton`]: soliton structures, residual operators and the structural
//!   identities they satisfy;
//! - [`examples`]: constructors for the explicit soliton families;
//! - [`report`]: sampled residual reports shared by everything above.

pub mod error;
pub mod examples;
pub mod expr;
pub mod geometry;
pub mod report;
pub mod soliton;
pub mod spaces;
pub mod suites;

pub use error::{Error, Result};
pub use expr::{Expr, ParameterBinding};
pub use geometry::{Chart, MetricField, OneFormField, PointSample, ScalarField, SymTensorField, VectorField};
pub use report::ResidualReport;
pub use soliton::{Drift, HForm, SolitonStructure};
