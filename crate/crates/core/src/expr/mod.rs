//! Closed expression language over chart coordinates.
//!
//! Every scalar quantity in the crate (metric components, potentials,
//! curvature, residuals) is an [`Expr`]. Nodes are hash-consed: two
//! structurally identical subtrees built anywhere in the process share a
//! single allocation, so an `Expr` is really a DAG and equality is pointer
//! equality. The public constructors and operator impls fold constants and
//! drop neutral elements as they build; [`simplify`] applies the same rules
//! to raw trees such as the ones produced by the parser.
//!
//! Only rewrites that are exact in IEEE arithmetic are applied, so a
//! simplified expression evaluates to the same bits as the original wherever
//! the original is defined.

mod diff;
mod display;
mod eval;
mod parse;
mod simplify;

pub use diff::{differentiate, Differentiator};
pub use eval::{evaluate, EvalError, ParameterBinding, Tape};
pub use parse::{parse_expression, ParseError};
pub use simplify::simplify;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock, Weak};

/// Unary operators of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
        }
    }

    /// Function names accepted by the grammar (everything except `neg`).
    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            _ => return None,
        })
    }

    pub(crate) fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Neg => -x,
            UnaryOp::Exp => x.exp(),
            UnaryOp::Ln => x.ln(),
            UnaryOp::Sqrt => x.sqrt(),
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Sinh => x.sinh(),
            UnaryOp::Cosh => x.cosh(),
            UnaryOp::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub(crate) fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// Node payload.
#[derive(Debug, Clone)]
pub enum Kind {
    Const(f64),
    Coord(usize),
    Param(Arc<str>),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
    /// Integer power; real powers go through `exp(q*ln(x))`.
    Pow(Expr, i32),
}

#[derive(Debug)]
pub struct Node {
    id: u64,
    kind: Kind,
}

/// Immutable, shareable handle to a hash-consed expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Const(c) => write!(f, "{c:?}"),
            Kind::Coord(i) => write!(f, "x[{i}]"),
            Kind::Param(p) => write!(f, "{p}"),
            Kind::Unary(op, a) => write!(f, "{}({a:?})", op.name()),
            Kind::Binary(op, a, b) => write!(f, "{op:?}({a:?}, {b:?})"),
            Kind::Pow(a, k) => write!(f, "Pow({a:?}, {k})"),
        }
    }
}

// ---------------------------------------------------------------------------
// interning

#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Coord(usize),
    Param(Arc<str>),
    Unary(UnaryOp, u64),
    Binary(BinaryOp, u64, u64),
    Pow(u64, i32),
}

const SHARDS: usize = 32;

struct Shard {
    map: HashMap<Key, Weak<Node>>,
    sweep_at: usize,
}

struct Interner {
    shards: Vec<Mutex<Shard>>,
    next_id: AtomicU64,
}

fn interner() -> &'static Interner {
    static INTERNER: OnceLock<Interner> = OnceLock::new();
    INTERNER.get_or_init(|| Interner {
        shards: (0..SHARDS)
            .map(|_| {
                Mutex::new(Shard {
                    map: HashMap::new(),
                    sweep_at: 4096,
                })
            })
            .collect(),
        next_id: AtomicU64::new(0),
    })
}

fn shard_of(key: &Key) -> usize {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    key.hash(&mut h);
    (h.finish() as usize) % SHARDS
}

fn intern(kind: Kind) -> Expr {
    let key = match &kind {
        Kind::Const(c) => Key::Const(c.to_bits()),
        Kind::Coord(i) => Key::Coord(*i),
        Kind::Param(p) => Key::Param(p.clone()),
        Kind::Unary(op, a) => Key::Unary(*op, a.id()),
        Kind::Binary(op, a, b) => Key::Binary(*op, a.id(), b.id()),
        Kind::Pow(a, k) => Key::Pow(a.id(), *k),
    };
    let interner = interner();
    let mut shard = interner.shards[shard_of(&key)]
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    if let Some(node) = shard.map.get(&key).and_then(Weak::upgrade) {
        return Expr(node);
    }
    if shard.map.len() >= shard.sweep_at {
        shard.map.retain(|_, w| w.strong_count() > 0);
        shard.sweep_at = (shard.map.len() * 2).max(4096);
    }
    let node = Arc::new(Node {
        id: interner.next_id.fetch_add(1, Ordering::Relaxed),
        kind,
    });
    shard.map.insert(key, Arc::downgrade(&node));
    Expr(node)
}

// ---------------------------------------------------------------------------
// construction

impl Expr {
    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Process-unique node id; stable for the node's lifetime.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn constant(c: f64) -> Expr {
        intern(Kind::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn coord(index: usize) -> Expr {
        intern(Kind::Coord(index))
    }

    pub fn param(name: &str) -> Expr {
        intern(Kind::Param(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// Raw constructors: no folding. Used by the parser and by tests that
    /// need unsimplified trees.
    pub fn raw_unary(op: UnaryOp, a: Expr) -> Expr {
        intern(Kind::Unary(op, a))
    }

    pub fn raw_binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        intern(Kind::Binary(op, a, b))
    }

    pub fn raw_pow(a: Expr, k: i32) -> Expr {
        intern(Kind::Pow(a, k))
    }

    /// Simplifying unary constructor.
    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            let v = op.apply(c);
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
        if op == UnaryOp::Neg {
            if let Kind::Unary(UnaryOp::Neg, inner) = a.kind() {
                return inner.clone();
            }
        }
        Expr::raw_unary(op, a)
    }

    /// Simplifying binary constructor.
    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            let v = op.apply(x, y);
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
        match op {
            BinaryOp::Add => {
                if a.is_zero() {
                    return b;
                }
                if b.is_zero() {
                    return a;
                }
                if let Kind::Unary(UnaryOp::Neg, nb) = b.kind() {
                    return Expr::binary(BinaryOp::Sub, a, nb.clone());
                }
                if let Kind::Unary(UnaryOp::Neg, na) = a.kind() {
                    return Expr::binary(BinaryOp::Sub, b, na.clone());
                }
                // commutative: order operands so a+b and b+a share a node
                let (a, b) = if a.id() <= b.id() { (a, b) } else { (b, a) };
                Expr::raw_binary(op, a, b)
            }
            BinaryOp::Sub => {
                if b.is_zero() {
                    return a;
                }
                if a.is_zero() {
                    return Expr::unary(UnaryOp::Neg, b);
                }
                if a == b {
                    return Expr::zero();
                }
                if let Kind::Unary(UnaryOp::Neg, nb) = b.kind() {
                    return Expr::binary(BinaryOp::Add, a, nb.clone());
                }
                Expr::raw_binary(op, a, b)
            }
            BinaryOp::Mul => {
                if a.is_zero() || b.is_zero() {
                    return Expr::zero();
                }
                if a.is_one() {
                    return b;
                }
                if b.is_one() {
                    return a;
                }
                if a.as_const() == Some(-1.0) {
                    return Expr::unary(UnaryOp::Neg, b);
                }
                if b.as_const() == Some(-1.0) {
                    return Expr::unary(UnaryOp::Neg, a);
                }
                if let (Kind::Unary(UnaryOp::Neg, na), Kind::Unary(UnaryOp::Neg, nb)) = (a.kind(), b.kind()) {
                    return Expr::binary(BinaryOp::Mul, na.clone(), nb.clone());
                }
                if let Kind::Unary(UnaryOp::Neg, na) = a.kind() {
                    return Expr::unary(UnaryOp::Neg, Expr::binary(BinaryOp::Mul, na.clone(), b));
                }
                if let Kind::Unary(UnaryOp::Neg, nb) = b.kind() {
                    return Expr::unary(UnaryOp::Neg, Expr::binary(BinaryOp::Mul, a, nb.clone()));
                }
                let (a, b) = if a.id() <= b.id() { (a, b) } else { (b, a) };
                Expr::raw_binary(op, a, b)
            }
            BinaryOp::Div => {
                if a.is_zero() {
                    return Expr::zero();
                }
                if b.is_one() {
                    return a;
                }
                if b.as_const() == Some(-1.0) {
                    return Expr::unary(UnaryOp::Neg, a);
                }
                if let Kind::Unary(UnaryOp::Neg, na) = a.kind() {
                    return Expr::unary(UnaryOp::Neg, Expr::binary(BinaryOp::Div, na.clone(), b));
                }
                Expr::raw_binary(op, a, b)
            }
        }
    }

    /// Simplifying integer power.
    pub fn powi(&self, k: i32) -> Expr {
        match k {
            0 => return Expr::one(),
            1 => return self.clone(),
            _ => {}
        }
        if let Some(c) = self.as_const() {
            let v = c.powi(k);
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
        // (a^j)^k is left alone: collapsing it to a^(jk) is not bit-exact.
        Expr::raw_pow(self.clone(), k)
    }

    pub fn neg(&self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Ln, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self.clone())
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self.clone())
    }

    pub fn sinh(&self) -> Expr {
        Expr::unary(UnaryOp::Sinh, self.clone())
    }

    pub fn cosh(&self) -> Expr {
        Expr::unary(UnaryOp::Cosh, self.clone())
    }

    pub fn tanh(&self) -> Expr {
        Expr::unary(UnaryOp::Tanh, self.clone())
    }

    /// Children in evaluation order.
    pub fn children(&self) -> impl Iterator<Item = &Expr> {
        let (a, b) = match self.kind() {
            Kind::Const(_) | Kind::Coord(_) | Kind::Param(_) => (None, None),
            Kind::Unary(_, a) | Kind::Pow(a, _) => (Some(a), None),
            Kind::Binary(_, a, b) => (Some(a), Some(b)),
        };
        a.into_iter().chain(b)
    }

    /// Largest coordinate index used, if any.
    pub fn max_coord(&self) -> Option<usize> {
        postorder(std::slice::from_ref(self))
            .iter()
            .filter_map(|e| match e.kind() {
                Kind::Coord(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    /// Parameter names occurring in the expression, sorted.
    pub fn params(&self) -> Vec<Arc<str>> {
        let mut names: Vec<Arc<str>> = postorder(std::slice::from_ref(self))
            .iter()
            .filter_map(|e| match e.kind() {
                Kind::Param(p) => Some(p.clone()),
                _ => None,
            })
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// Replaces every coordinate `x_i` with `f(i)`. Other nodes are rebuilt
    /// with the simplifying constructors.
    pub fn map_coords(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        rebuild(self, &|e| match e.kind() {
            Kind::Coord(i) => Some(f(*i)),
            _ => None,
        })
    }

    /// Renumbers coordinates `x_i -> x_{i+offset}`.
    pub fn shift_coords(&self, offset: usize) -> Expr {
        self.map_coords(&|i| Expr::coord(i + offset))
    }

    /// Substitutes named parameters by expressions.
    pub fn substitute_params(&self, values: &HashMap<String, Expr>) -> Expr {
        rebuild(self, &|e| match e.kind() {
            Kind::Param(p) => values.get(p.as_ref()).cloned(),
            _ => None,
        })
    }
}

/// Post-order traversal of the unique nodes reachable from `roots`.
/// Iterative, so deep expressions do not overflow the stack.
pub fn postorder(roots: &[Expr]) -> Vec<Expr> {
    let mut seen = std::collections::HashSet::new();
    let mut order = Vec::new();
    let mut stack: Vec<(Expr, bool)> = roots.iter().rev().map(|r| (r.clone(), false)).collect();
    while let Some((e, expanded)) = stack.pop() {
        if expanded {
            order.push(e);
            continue;
        }
        if !seen.insert(e.id()) {
            continue;
        }
        stack.push((e.clone(), true));
        let kids: Vec<Expr> = e.children().cloned().collect();
        for k in kids.into_iter().rev() {
            if !seen.contains(&k.id()) {
                stack.push((k, false));
            }
        }
    }
    order
}

/// Number of distinct nodes reachable from `roots`.
pub fn node_count(roots: &[Expr]) -> usize {
    postorder(roots).len()
}

/// Bottom-up rebuild through the simplifying constructors. `leaf` may
/// override any node; its result is used as-is.
pub(crate) fn rebuild(root: &Expr, leaf: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
    let mut memo: HashMap<u64, Expr> = HashMap::new();
    for e in postorder(std::slice::from_ref(root)) {
        let out = if let Some(r) = leaf(&e) {
            r
        } else {
            match e.kind() {
                Kind::Const(_) | Kind::Coord(_) | Kind::Param(_) => e.clone(),
                Kind::Unary(op, a) => Expr::unary(*op, memo[&a.id()].clone()),
                Kind::Binary(op, a, b) => Expr::binary(*op, memo[&a.id()].clone(), memo[&b.id()].clone()),
                Kind::Pow(a, k) => memo[&a.id()].powi(*k),
            }
        };
        memo.insert(e.id(), out);
    }
    memo.remove(&root.id()).expect("root visited")
}

/// Sum of an iterator of expressions (0 when empty).
pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
    terms.into_iter().fold(Expr::zero(), |acc, t| acc + t)
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

macro_rules! binop_impls {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self, rhs.clone())
            }
        }
        impl std::ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs)
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::constant(rhs))
            }
        }
        impl std::ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self.clone(), Expr::constant(rhs))
            }
        }
        impl std::ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs)
            }
        }
        impl std::ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs.clone())
            }
        }
    };
}

binop_impls!(Add, add, BinaryOp::Add);
binop_impls!(Sub, sub, BinaryOp::Sub);
binop_impls!(Mul, mul, BinaryOp::Mul);
binop_impls!(Div, div, BinaryOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_shares_nodes() {
        let a = Expr::coord(0) * Expr::coord(1);
        let b = Expr::coord(1) * Expr::coord(0);
        assert_eq!(a, b);
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn neutral_elements_vanish() {
        let x = Expr::coord(0);
        assert_eq!(&x + 0.0, x);
        assert_eq!(&x * 1.0, x);
        assert!((&x * 0.0).is_zero());
        assert!((&x - &x).is_zero());
        assert_eq!(-(-x.clone()), x);
        assert_eq!(Expr::constant(2.0) * 3.0, Expr::constant(6.0));
    }

    #[test]
    fn non_finite_constants_are_not_folded() {
        let e = Expr::constant(1.0) / Expr::constant(0.0);
        assert!(e.as_const().is_none());
        let l = Expr::constant(-1.0).ln();
        assert!(l.as_const().is_none());
    }

    #[test]
    fn shift_and_map_coords() {
        let e = Expr::coord(0) * Expr::coord(1).sin();
        let s = e.shift_coords(2);
        assert_eq!(s, Expr::coord(2) * Expr::coord(3).sin());
        assert_eq!(s.max_coord(), Some(3));
    }

    #[test]
    fn node_count_counts_shared_once() {
        let x = Expr::coord(0);
        let s = x.sin();
        let e = &s * &s + &s;
        // x, sin x, sin x * sin x, sum
        assert_eq!(node_count(&[e]), 4);
    }
}
