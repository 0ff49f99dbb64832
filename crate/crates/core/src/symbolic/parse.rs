//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := atom ('^' exponent)?
//! exponent := '-'? INT | '(' '-'? INT ')'
//! atom     := INT | INT '/' INT | IDENT | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::bundle::BundleSpec;
use super::expr::Expr;
use super::SymbolicError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of input".into(),
        Some(Tok::Int(n)) => format!("`{n}`"),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(Tok::Plus) => "`+`".into(),
        Some(Tok::Minus) => "`-`".into(),
        Some(Tok::Star) => "`*`".into(),
        Some(Tok::Slash) => "`/`".into(),
        Some(Tok::Caret) => "`^`".into(),
        Some(Tok::LParen) => "`(`".into(),
        Some(Tok::RParen) => "`)`".into(),
    }
}

fn syntax(position: usize, message: impl Into<String>) -> SymbolicError {
    SymbolicError::Syntax {
        position,
        message: message.into(),
    }
}

/// Tokens with their byte offsets in the source.
fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, SymbolicError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((start, t));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = src[start..i].parse().expect("digits");
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else {
            let ch = src[start..].chars().next().expect("non-empty");
            return Err(syntax(start, format!("unexpected character `{ch}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    bundle: &'a BundleSpec,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), SymbolicError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!("expected {}, found {}", describe(Some(&want)), describe(self.peek())),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, SymbolicError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, SymbolicError> {
        let mut acc = self.unary()?;
        let mut factors: Vec<Expr> = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    if factors.is_empty() {
                        factors.push(acc);
                    }
                    factors.push(rhs);
                    acc = Expr::Mul(factors.clone());
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    factors.clear();
                    acc = Expr::Div(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, SymbolicError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, SymbolicError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let parenthesized = self.peek() == Some(&Tok::LParen);
        if parenthesized {
            self.pos += 1;
        }
        let negative = self.peek() == Some(&Tok::Minus);
        if negative {
            self.pos += 1;
        }
        let at = self.offset();
        let e = match self.bump() {
            Some(Tok::Int(n)) => i64::try_from(n).map_err(|_| syntax(at, "exponent too large"))?,
            other => {
                return Err(syntax(
                    at,
                    format!("expected integer exponent, found {}", describe(other.as_ref())),
                ))
            }
        };
        if parenthesized {
            self.expect(Tok::RParen)?;
        }
        Ok(base.pow(if negative { -e } else { e }))
    }

    fn atom(&mut self) -> Result<Expr, SymbolicError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(n)) => {
                // `p/q` literal, unless q is itself raised to a power
                if let (Some(Tok::Slash), Some(Tok::Int(d))) = (self.peek(), self.peek_at(1)) {
                    if self.peek_at(2) != Some(&Tok::Caret) {
                        let d = d.clone();
                        if d.is_zero() {
                            return Err(syntax(self.offset(), "zero denominator in rational literal"));
                        }
                        self.pos += 2;
                        return Ok(Expr::Const(BigRational::new(n, d)));
                    }
                }
                Ok(Expr::Const(BigRational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => self.bundle.resolve(&name).map(Expr::Sym),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(syntax(
                at,
                format!("expected operand, found {}", describe(other.as_ref())),
            )),
        }
    }
}

/// Parse `src` against the variable names of `bundle`.
pub fn parse(src: &str, bundle: &BundleSpec) -> Result<Expr, SymbolicError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        bundle,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(syntax(
            p.offset(),
            format!("unexpected {}", describe(p.peek())),
        ));
    }
    Ok(e)
}
