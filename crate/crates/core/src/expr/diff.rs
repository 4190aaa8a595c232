use std::collections::HashMap;

use super::{postorder, BinaryOp, Expr, Kind, UnaryOp};

/// Exact partial derivative with respect to one coordinate.
///
/// Keeps a memo keyed by node id, so differentiating many expressions that
/// share subtrees (all Christoffel symbols of a metric, say) reuses work.
pub struct Differentiator {
    coord: usize,
    memo: HashMap<u64, Expr>,
}

impl Differentiator {
    pub fn new(coord: usize) -> Self {
        Differentiator {
            coord,
            memo: HashMap::new(),
        }
    }

    pub fn coord(&self) -> usize {
        self.coord
    }

    pub fn diff(&mut self, e: &Expr) -> Expr {
        if let Some(d) = self.memo.get(&e.id()) {
            return d.clone();
        }
        let pending: Vec<Expr> = postorder(std::slice::from_ref(e))
            .into_iter()
            .filter(|n| !self.memo.contains_key(&n.id()))
            .collect();
        for node in pending {
            let d = self.rule(&node);
            self.memo.insert(node.id(), d);
        }
        self.memo[&e.id()].clone()
    }

    fn d(&self, e: &Expr) -> Expr {
        self.memo[&e.id()].clone()
    }

    fn rule(&self, e: &Expr) -> Expr {
        match e.kind() {
            Kind::Const(_) | Kind::Param(_) => Expr::zero(),
            Kind::Coord(i) => {
                if *i == self.coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Unary(op, a) => {
                let da = self.d(a);
                if da.is_zero() {
                    return Expr::zero();
                }
                match op {
                    UnaryOp::Neg => -da,
                    UnaryOp::Exp => e * da,
                    UnaryOp::Ln => da / a,
                    UnaryOp::Sqrt => da / (2.0 * e),
                    UnaryOp::Sin => a.cos() * da,
                    UnaryOp::Cos => -(a.sin() * da),
                    UnaryOp::Sinh => a.cosh() * da,
                    UnaryOp::Cosh => a.sinh() * da,
                    UnaryOp::Tanh => (1.0 - e.powi(2)) * da,
                }
            }
            Kind::Binary(op, a, b) => {
                let da = self.d(a);
                let db = self.d(b);
                match op {
                    BinaryOp::Add => da + db,
                    BinaryOp::Sub => da - db,
                    BinaryOp::Mul => da * b + a * db,
                    // d(a/b) = (da - (a/b) db) / b
                    BinaryOp::Div => (da - e * db) / b,
                }
            }
            Kind::Pow(a, k) => {
                let da = self.d(a);
                if da.is_zero() {
                    return Expr::zero();
                }
                f64::from(*k) * a.powi(k - 1) * da
            }
        }
    }
}

/// `∂e/∂x_coord`.
pub fn differentiate(e: &Expr, coord: usize) -> Expr {
    Differentiator::new(coord).diff(e)
}
