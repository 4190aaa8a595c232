//! The `soliton-manifest/1` JSON format.

use std::collections::BTreeMap;
use std::sync::Arc;

use hsoliton_core::expr::{parse_expression, simplify};
use hsoliton_core::geometry::{Chart, MetricField, VectorField};
use hsoliton_core::{Drift, Expr, HForm, ParameterBinding, SolitonStructure};
use serde::{Deserialize, Serialize};

use crate::error::{CliResult, Failure};

pub const SCHEMA: &str = "soliton-manifest/1";

/// A soliton structure written out as expression strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    /// Upper triangle, row-major.
    pub metric: Vec<String>,
    /// Predicates `p > 0` that restrict the sampled domain.
    #[serde(default)]
    pub domain: Vec<String>,
    /// Sampling box, one `[lo, hi]` per coordinate.
    #[serde(rename = "box")]
    pub sampling_box: Vec<[f64; 2]>,
    pub structure: StructureBlock,
    pub h: String,
    pub lambda: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FormBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureBlock {
    VectorField(Vec<String>),
    Potential(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormBlock {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl Manifest {
    pub fn from_json(text: &str) -> CliResult<Manifest> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Failure::input(format!("manifest: {e}")))?;
        if m.schema != SCHEMA {
            return Err(Failure::input(format!(
                "unsupported schema `{}`, expected `{SCHEMA}`",
                m.schema
            )));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    fn form(&self) -> CliResult<HForm> {
        let Some(block) = &self.form else {
            return Ok(HForm::Free);
        };
        let need_m = || {
            block
                .m
                .ok_or_else(|| Failure::input(format!("form `{}` requires m", block.tag)))
        };
        match block.tag.as_str() {
            "free" => Ok(HForm::Free),
            "m-over-u" => Ok(HForm::MOverU(need_m()?)),
            "neg-m-over-u" => Ok(HForm::NegMOverU(need_m()?)),
            other => Err(Failure::input(format!(
                "unknown form tag `{other}` (expected free, m-over-u or neg-m-over-u)"
            ))),
        }
    }

    /// Parses every expression and assembles the structure.
    pub fn build(&self) -> CliResult<SolitonStructure> {
        let n = self.dimension;
        if n == 0 {
            return Err(Failure::input("dimension must be positive"));
        }
        let expect = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Failure::input(format!("{what} has {got} entries, expected {want}")))
            }
        };
        expect("coordinates", self.coordinates.len(), n)?;
        expect("metric", self.metric.len(), n * (n + 1) / 2)?;
        expect("box", self.sampling_box.len(), n)?;
        for (name, v) in &self.parameters {
            if !v.is_finite() {
                return Err(Failure::input(format!("parameter `{name}` is not finite")));
            }
        }
        let coords: Vec<&str> = self.coordinates.iter().map(String::as_str).collect();
        let params: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
        let parse = |field: &str, text: &str| -> CliResult<Expr> {
            parse_expression(text, &coords, &params)
                .map(|e| simplify(&e))
                .map_err(|e| Failure::input(format!("{field}: {e} in `{text}`")))
        };
        let upper = self
            .metric
            .iter()
            .enumerate()
            .map(|(i, t)| parse(&format!("metric[{i}]"), t))
            .collect::<CliResult<Vec<_>>>()?;
        let domain = self
            .domain
            .iter()
            .enumerate()
            .map(|(i, t)| parse(&format!("domain[{i}]"), t))
            .collect::<CliResult<Vec<_>>>()?;
        let bounds = self.sampling_box.iter().map(|b| (b[0], b[1])).collect();
        let chart = Chart::new(self.coordinates.clone(), bounds)?.with_domain(domain)?;
        let metric = Arc::new(MetricField::from_upper(chart, upper)?);
        let drift = match &self.structure {
            StructureBlock::Potential(t) => Drift::Potential(parse("structure.potential", t)?),
            StructureBlock::VectorField(xs) => {
                expect("structure.vector_field", xs.len(), n)?;
                let comps = xs
                    .iter()
                    .enumerate()
                    .map(|(i, t)| parse(&format!("structure.vector_field[{i}]"), t))
                    .collect::<CliResult<Vec<_>>>()?;
                Drift::Vector(VectorField(comps))
            }
        };
        let h = parse("h", &self.h)?;
        let lambda = parse("lambda", &self.lambda)?;
        let binding = ParameterBinding::from_pairs(self.parameters.iter().map(|(k, v)| (k.as_str(), *v)));
        Ok(SolitonStructure::new(metric, drift, h, lambda, binding)?.with_form(self.form()?)?)
    }

    /// Einstein manifest `X = 0`, `h = 1`, constant λ on `g`.
    pub fn einstein(g: &MetricField, binding: &ParameterBinding, lambda: f64) -> Manifest {
        let names = g.chart().coords();
        let n = g.dim();
        Manifest {
            schema: SCHEMA.to_string(),
            dimension: n,
            coordinates: names.to_vec(),
            parameters: binding.iter().map(|(k, v)| (k.to_string(), v)).collect(),
            metric: g.components().upper().iter().map(|e| e.to_text(names)).collect(),
            domain: g.chart().domain().iter().map(|e| e.to_text(names)).collect(),
            sampling_box: g.chart().bounds().iter().map(|&(lo, hi)| [lo, hi]).collect(),
            structure: StructureBlock::VectorField(vec!["0".to_string(); n]),
            h: "1".to_string(),
            lambda: Expr::constant(lambda).to_text(names),
            form: None,
        }
    }
}
