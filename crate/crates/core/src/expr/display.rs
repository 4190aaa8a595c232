use std::fmt::{self, Write};

use super::{BinaryOp, Expr, Kind, UnaryOp};

/// Formats an expression in the text grammar, using `names` for
/// coordinates. Parsing the output with the same names rebuilds the same
/// tree. Shared subtrees are printed once per use, so this is only meant
/// for small expressions (manifests, diagnostics).
pub struct Display<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl Expr {
    pub fn display<'a>(&'a self, names: &'a [String]) -> Display<'a> {
        Display { expr: self, names }
    }

    pub fn to_text(&self, names: &[String]) -> String {
        self.display(names).to_string()
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_expr(self.expr, self.names, 0, &mut out)?;
        f.write_str(&out)
    }
}

const ADD: u8 = 1;
const MUL: u8 = 2;
const ATOM: u8 = 3;

fn precedence(e: &Expr) -> u8 {
    match e.kind() {
        Kind::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => ADD,
        Kind::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => MUL,
        // `x^k` can sit anywhere a factor can, but not as the base of
        // another power.
        Kind::Pow(..) => MUL,
        _ => ATOM,
    }
}

fn write_expr(e: &Expr, names: &[String], min: u8, out: &mut String) -> fmt::Result {
    if precedence(e) < min {
        out.push('(');
        write_expr(e, names, 0, out)?;
        out.push(')');
        return Ok(());
    }
    match e.kind() {
        Kind::Const(c) => {
            if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                write!(out, "-{:?}", -c)?;
            } else {
                write!(out, "{c:?}")?;
            }
        }
        Kind::Coord(i) => match names.get(*i) {
            Some(n) => out.push_str(n),
            None => write!(out, "x{i}")?,
        },
        Kind::Param(p) => out.push_str(p),
        Kind::Unary(UnaryOp::Neg, a) => {
            out.push('-');
            write_expr(a, names, ATOM, out)?;
        }
        Kind::Unary(op, a) => {
            out.push_str(op.name());
            out.push('(');
            write_expr(a, names, 0, out)?;
            out.push(')');
        }
        Kind::Binary(op, a, b) => {
            let level = precedence(e);
            write_expr(a, names, level, out)?;
            write!(out, " {} ", op.symbol())?;
            write_expr(b, names, level + 1, out)?;
        }
        Kind::Pow(a, k) => {
            write_expr(a, names, ATOM, out)?;
            write!(out, "^{k}")?;
        }
    }
    Ok(())
}
