use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{numeric::SpdCheck, Chart, MetricField, PointSample};
use crate::error::{Error, Result};
use crate::expr::{ParameterBinding, Tape};

/// Points where the metric condition number reaches this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

const PROBE_DRAWS: usize = 100_000;
const MIN_ACCEPTANCE: f64 = 0.01;

/// Seeded rejection sampling of admissible points from the chart box.
///
/// A point is admissible when every domain predicate is positive and, if a
/// metric is given, the metric is SPD there with condition number below
/// [`MAX_CONDITION`]. Fails once `10⁵` draws have been made with less than
/// 1% accepted.
pub fn sample_points(
    chart: &Chart,
    metric: Option<&MetricField>,
    binding: &ParameterBinding,
    count: usize,
    seed: u64,
) -> Result<Vec<PointSample>> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let n = chart.dim();
    let mut roots = chart.domain().to_vec();
    let npred = roots.len();
    if let Some(g) = metric {
        if g.dim() != n {
            return Err(Error::invalid("metric and chart dimensions differ"));
        }
        roots.extend_from_slice(g.components().components());
    }
    let tape = Tape::compile(&roots, binding)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = Vec::new();
    let mut out = Vec::with_capacity(count);
    let mut draws = 0usize;
    while out.len() < count {
        if draws >= PROBE_DRAWS && (out.len() as f64) < MIN_ACCEPTANCE * draws as f64 {
            return Err(Error::SamplingExhausted {
                accepted: out.len(),
                draws,
            });
        }
        draws += 1;
        let p: Vec<f64> = chart.bounds().iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let Ok(vals) = tape.eval_with(&p, &mut scratch) else {
            continue;
        };
        if vals[..npred].iter().any(|&v| v <= 0.0) {
            continue;
        }
        if metric.is_some() {
            let gm = DMatrix::from_row_slice(n, n, &vals[npred..]);
            let spd = SpdCheck::of(&gm);
            if !spd.is_spd() || spd.condition() >= MAX_CONDITION {
                continue;
            }
        }
        out.push(PointSample {
            coords: p,
            admissible: true,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    #[test]
    fn deterministic_for_fixed_seed() {
        let chart = Chart::cube("x", 3, -1.0, 1.0).unwrap();
        let b = ParameterBinding::new();
        let a = sample_points(&chart, None, &b, 5, 7).unwrap();
        let c = sample_points(&chart, None, &b, 5, 7).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, c);
        assert!(a
            .iter()
            .all(|p| p.admissible && p.coords.iter().all(|x| (-1.0..1.0).contains(x))));
        let d = sample_points(&chart, None, &b, 5, 8).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn impossible_predicate_exhausts() {
        let chart = Chart::cube("x", 1, -1.0, 1.0)
            .unwrap()
            .with_domain(vec![Expr::coord(0) - 2.0])
            .unwrap();
        let err = sample_points(&chart, None, &ParameterBinding::new(), 3, 1).unwrap_err();
        assert!(matches!(err, Error::SamplingExhausted { accepted: 0, .. }));
    }

    #[test]
    fn metric_guard_rejects_indefinite_region() {
        // g = diag(x1, 1) is only SPD for x1 > 0
        let chart = Chart::cube("x", 2, -1.0, 1.0).unwrap();
        let g = MetricField::from_upper(chart.clone(), vec![Expr::coord(0), Expr::zero(), Expr::one()]).unwrap();
        let pts = sample_points(&chart, Some(&g), &ParameterBinding::new(), 50, 3).unwrap();
        assert!(pts.iter().all(|p| p.coords[0] > 0.0));
    }

    #[test]
    fn zero_count_rejected() {
        let chart = Chart::cube("x", 2, -1.0, 1.0).unwrap();
        assert!(sample_points(&chart, None, &ParameterBinding::new(), 0, 1).is_err());
    }
}
