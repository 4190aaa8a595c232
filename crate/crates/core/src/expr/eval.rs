use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{postorder, BinaryOp, Expr, Kind, UnaryOp};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("coordinate x[{index}] out of range for a point of dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
    #[error("domain error: {op} of {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("non-finite result from {op}")]
    NonFinite { op: &'static str },
}

/// Parameter name to value map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterBinding(BTreeMap<String, f64>);

impl ParameterBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, f64)>>(pairs: I) -> Self {
        ParameterBinding(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Union; entries of `other` win.
    pub fn merged(&self, other: &ParameterBinding) -> ParameterBinding {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.set(k, v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Coord(usize),
    Unary(UnaryOp, u32),
    Binary(BinaryOp, u32, u32),
    Pow(u32, i32),
}

/// A batch of expressions flattened into one instruction list.
///
/// Shared subexpressions are computed once per point. Parameters are
/// resolved at compile time. A `Tape` is immutable and can be evaluated
/// from many threads at once.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<u32>,
    min_dim: usize,
}

impl Tape {
    pub fn compile(roots: &[Expr], binding: &ParameterBinding) -> Result<Tape, EvalError> {
        let order = postorder(roots);
        let mut slot: HashMap<u64, u32> = HashMap::with_capacity(order.len());
        let mut ops = Vec::with_capacity(order.len());
        let mut min_dim = 0;
        for e in &order {
            let op = match e.kind() {
                Kind::Const(c) => Op::Const(*c),
                Kind::Coord(i) => {
                    min_dim = min_dim.max(i + 1);
                    Op::Coord(*i)
                }
                Kind::Param(p) => Op::Const(
                    binding
                        .get(p)
                        .ok_or_else(|| EvalError::UnboundParameter(p.to_string()))?,
                ),
                Kind::Unary(op, a) => Op::Unary(*op, slot[&a.id()]),
                Kind::Binary(op, a, b) => Op::Binary(*op, slot[&a.id()], slot[&b.id()]),
                Kind::Pow(a, k) => Op::Pow(slot[&a.id()], *k),
            };
            slot.insert(e.id(), ops.len() as u32);
            ops.push(op);
        }
        let outputs = roots.iter().map(|r| slot[&r.id()]).collect();
        Ok(Tape { ops, outputs, min_dim })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut scratch = Vec::new();
        self.eval_with(point, &mut scratch)
    }

    pub fn eval_with(&self, point: &[f64], scratch: &mut Vec<f64>) -> Result<Vec<f64>, EvalError> {
        if point.len() < self.min_dim {
            return Err(EvalError::CoordinateOutOfRange {
                index: self.min_dim - 1,
                dim: point.len(),
            });
        }
        scratch.clear();
        scratch.reserve(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Coord(i) => point[i],
                Op::Unary(u, a) => {
                    let x = scratch[a as usize];
                    match u {
                        UnaryOp::Ln if x <= 0.0 => return Err(EvalError::Domain { op: "ln", arg: x }),
                        UnaryOp::Sqrt if x < 0.0 => return Err(EvalError::Domain { op: "sqrt", arg: x }),
                        _ => {}
                    }
                    let v = u.apply(x);
                    if !v.is_finite() {
                        return Err(EvalError::NonFinite { op: u.name() });
                    }
                    v
                }
                Op::Binary(b, x, y) => {
                    let (x, y) = (scratch[x as usize], scratch[y as usize]);
                    if b == BinaryOp::Div && y == 0.0 {
                        return Err(EvalError::Domain { op: "division", arg: y });
                    }
                    let v = b.apply(x, y);
                    if !v.is_finite() {
                        return Err(EvalError::NonFinite {
                            op: match b {
                                BinaryOp::Add => "add",
                                BinaryOp::Sub => "sub",
                                BinaryOp::Mul => "mul",
                                BinaryOp::Div => "div",
                            },
                        });
                    }
                    v
                }
                Op::Pow(a, k) => {
                    let x = scratch[a as usize];
                    if x == 0.0 && k < 0 {
                        return Err(EvalError::Domain {
                            op: "negative power",
                            arg: x,
                        });
                    }
                    let v = x.powi(k);
                    if !v.is_finite() {
                        return Err(EvalError::NonFinite { op: "pow" });
                    }
                    v
                }
            };
            scratch.push(v);
        }
        Ok(self.outputs.iter().map(|&s| scratch[s as usize]).collect())
    }
}

/// Evaluates a single expression at `point`.
pub fn evaluate(e: &Expr, point: &[f64], binding: &ParameterBinding) -> Result<f64, EvalError> {
    let tape = Tape::compile(std::slice::from_ref(e), binding)?;
    Ok(tape.eval(point)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_at_zero() {
        let t = Expr::coord(0);
        assert_eq!(evaluate(&t.exp(), &[0.0], &ParameterBinding::new()), Ok(1.0));
    }

    #[test]
    fn tau_plus_norm_squared() {
        let tau = Expr::param("tau");
        let e = &tau + Expr::coord(0).powi(2) + Expr::coord(1).powi(2) + Expr::coord(2).powi(2);
        let b = ParameterBinding::from_pairs([("tau", 1.0)]);
        assert_eq!(evaluate(&e, &[1.0, 1.0, 1.0], &b), Ok(4.0));
    }

    #[test]
    fn ln_of_negative_is_domain_error() {
        let e = Expr::coord(0).ln();
        let err = evaluate(&e, &[-1.0], &ParameterBinding::new()).unwrap_err();
        assert!(matches!(err, EvalError::Domain { op: "ln", .. }));
    }

    #[test]
    fn other_domain_errors() {
        let x = Expr::coord(0);
        let b = ParameterBinding::new();
        assert!(evaluate(&(1.0 / &x), &[0.0], &b).is_err());
        assert!(evaluate(&x.sqrt(), &[-0.5], &b).is_err());
        assert!(evaluate(&x.powi(-2), &[0.0], &b).is_err());
        assert!(evaluate(&x.exp(), &[1000.0], &b).is_err());
    }

    #[test]
    fn unbound_parameter_reported() {
        let e = Expr::param("m") * Expr::coord(0);
        assert_eq!(
            evaluate(&e, &[1.0], &ParameterBinding::new()),
            Err(EvalError::UnboundParameter("m".into()))
        );
    }

    #[test]
    fn short_point_rejected() {
        let e = Expr::coord(2);
        assert!(matches!(
            evaluate(&e, &[1.0], &ParameterBinding::new()),
            Err(EvalError::CoordinateOutOfRange { .. })
        ));
    }

    #[test]
    fn tape_shares_work_between_outputs() {
        let x = Expr::coord(0);
        let s = x.sin();
        let tape = Tape::compile(&[s.clone(), &s * &s, &s + 1.0], &ParameterBinding::new()).unwrap();
        assert_eq!(tape.len(), 5);
        let v = tape.eval(&[0.5]).unwrap();
        assert_eq!(v[0], 0.5f64.sin());
        assert_eq!(v[1], 0.5f64.sin() * 0.5f64.sin());
    }
}
