//! Text rendering compatible with the expression grammar.

use std::fmt;

use num_traits::Signed;

use super::bundle::BundleSpec;
use super::expr::Expr;

pub struct Displayed<'a> {
    pub(super) expr: &'a Expr,
    pub(super) bundle: &'a BundleSpec,
}

impl fmt::Display for Displayed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_expr(self.expr, self.bundle, &mut out);
        f.write_str(&out)
    }
}

const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(xs) if xs.len() == 1 => precedence(&xs[0]),
        Expr::Mul(xs) if xs.len() == 1 => precedence(&xs[0]),
        Expr::Add(_) => ADD,
        Expr::Mul(_) | Expr::Div(..) => MUL,
        Expr::Neg(_) => UNARY,
        Expr::Pow(..) => POW,
        Expr::Sym(_) => ATOM,
        Expr::Const(c) if c.is_negative() => UNARY,
        Expr::Const(c) if c.is_integer() => ATOM,
        Expr::Const(_) => MUL,
    }
}

fn write_wrapped(e: &Expr, b: &BundleSpec, out: &mut String, parens: bool) {
    if parens {
        out.push('(');
        write_expr(e, b, out);
        out.push(')');
    } else {
        write_expr(e, b, out);
    }
}

/// Like `write_wrapped`, but also parenthesize text that would start with a
/// sign, since a leading `-` would bind to the first factor only.
fn write_operand(e: &Expr, b: &BundleSpec, out: &mut String, parens: bool) {
    let mut text = String::new();
    write_expr(e, b, &mut text);
    if parens || text.starts_with('-') {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn write_expr(e: &Expr, b: &BundleSpec, out: &mut String) {
    match e {
        Expr::Const(c) => out.push_str(&c.to_string()),
        Expr::Sym(s) => out.push_str(&b.symbol_name(*s)),
        Expr::Add(xs) if xs.is_empty() => out.push('0'),
        Expr::Mul(xs) if xs.is_empty() => out.push('1'),
        Expr::Add(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i == 0 {
                    write_wrapped(x, b, out, precedence(x) <= ADD);
                    continue;
                }
                match x {
                    Expr::Neg(inner) => {
                        out.push_str(" - ");
                        let p = precedence(inner);
                        write_operand(inner, b, out, p <= ADD || p == UNARY);
                    }
                    Expr::Const(c) if c.is_negative() => {
                        out.push_str(" - ");
                        out.push_str(&(-c).to_string());
                    }
                    _ => {
                        out.push_str(" + ");
                        write_wrapped(x, b, out, precedence(x) <= ADD);
                    }
                }
            }
        }
        Expr::Mul(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                let p = precedence(x);
                if i > 0 {
                    write_operand(x, b, out, p <= UNARY);
                } else {
                    write_wrapped(x, b, out, p <= ADD);
                }
            }
        }
        Expr::Div(n, d) => {
            write_wrapped(n, b, out, precedence(n) <= ADD);
            out.push_str(" / ");
            write_wrapped(d, b, out, precedence(d) < POW);
        }
        Expr::Neg(inner) => {
            out.push('-');
            let p = precedence(inner);
            write_operand(inner, b, out, p <= ADD || p == UNARY);
        }
        Expr::Pow(base, exp) => {
            let bare = matches!(**base, Expr::Sym(_))
                || matches!(&**base, Expr::Const(c) if c.is_integer() && !c.is_negative());
            write_wrapped(base, b, out, !bare);
            if *exp < 0 {
                out.push_str(&format!("^({exp})"));
            } else {
                out.push_str(&format!("^{exp}"));
            }
        }
    }
}
