//! Pratt parser for the field-expression DSL.
//!
//! ```text
//! expr    := prefix (infix)*
//! prefix  := number | ident | func '(' expr ')' | '(' expr ')' | '-' expr | '+' expr
//! infix   := ('+' | '-') expr      binding power 1, left
//!          | ('*' | '/') expr      binding power 2, left
//!          | '^' exponent          binding power 4, right; exponent must be a constant rational
//! func    := exp | log | sqrt | sin | cos
//! ident   := coordinate name | defined field name | i | pi
//! ```
//! Unary minus binds tighter than `*` but looser than `^`, so `-x^2 = -(x^2)`.

use std::collections::HashMap;

use crate::error::ParseError;
use crate::expr::{Expr, Rational};
use crate::jet::C64;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (p, t) = lx.next()?;
            let end = t == Tok::End;
            out.push((p, t));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut k = end + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = &self.src[self.pos..end];
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::Syntax { pos: start, msg: format!("bad number `{text}`") })?;
                self.pos = end;
                Tok::Num(v)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                let name = self.src[self.pos..end].to_string();
                self.pos = end;
                Tok::Ident(name)
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax { pos: start, msg: format!("unexpected character `{ch}`") });
            }
        };
        Ok((start, tok))
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    coords: &'a [String],
    defs: &'a HashMap<String, Expr>,
}

const UNARY_BP: u8 = 3;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.bump() {
            (_, Tok::RParen) => Ok(()),
            (p, t) => Err(ParseError::Syntax { pos: p, msg: format!("expected `)`, found {}", describe(&t)) }),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek() {
                Tok::Op(c) => *c,
                Tok::End | Tok::RParen => break,
                t => {
                    return Err(ParseError::Syntax { pos: self.pos(), msg: format!("expected operator, found {}", describe(t)) })
                }
            };
            let (lbp, rbp) = match op {
                '+' | '-' => (1, 2),
                '*' | '/' => (2, 3),
                '^' => (4, 4),
                _ => unreachable!(),
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            if op == '^' {
                let pos = self.pos();
                let e = self.expr(rbp)?;
                lhs = lhs.pow(constant_rational(&e, pos)?);
                continue;
            }
            let rhs = self.expr(rbp)?;
            lhs = match op {
                '+' => lhs + rhs,
                '-' => lhs - rhs,
                '*' => lhs * rhs,
                '/' => lhs / rhs,
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (pos, tok) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::real(v)),
            Tok::Op('-') => Ok(-self.expr(UNARY_BP)?),
            Tok::Op('+') => self.expr(UNARY_BP),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen && is_function(&name) {
                    self.bump();
                    let arg = self.expr(0)?;
                    self.expect_rparen()?;
                    return Ok(match name.as_str() {
                        "exp" => arg.exp(),
                        "log" | "ln" => arg.ln(),
                        "sqrt" => arg.sqrt(),
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        _ => unreachable!(),
                    });
                }
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Expr::coord(i));
                }
                if let Some(e) = self.defs.get(&name) {
                    return Ok(e.clone());
                }
                match name.as_str() {
                    "i" => Ok(Expr::imag_unit()),
                    "pi" => Ok(Expr::real(std::f64::consts::PI)),
                    _ => Err(ParseError::UnknownIdent { pos, name }),
                }
            }
            t => Err(ParseError::Syntax { pos, msg: format!("unexpected {}", describe(&t)) }),
        }
    }
}

fn is_function(name: &str) -> bool {
    matches!(name, "exp" | "log" | "ln" | "sqrt" | "sin" | "cos")
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn constant_rational(e: &Expr, pos: usize) -> Result<Rational, ParseError> {
    let err = |msg: &str| ParseError::Syntax { pos, msg: msg.to_string() };
    if e.deps() != 0 {
        return Err(err("exponent must be a constant"));
    }
    let v = e.eval(&[]).map_err(|_| err("exponent must be finite"))?;
    if v.im != 0.0 || !v.re.is_finite() {
        return Err(err("exponent must be real"));
    }
    to_rational(v.re).ok_or_else(|| err("exponent must be rational with denominator ≤ 1000"))
}

fn to_rational(x: f64) -> Option<Rational> {
    for den in 1..=1000i64 {
        let num = (x * den as f64).round();
        if (num / den as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Rational::new(num as i64, den);
        }
    }
    None
}

/// Parse `text` with the given coordinate names.
pub fn parse(text: &str, coords: &[String]) -> Result<Expr, ParseError> {
    parse_with(text, coords, &HashMap::new())
}

/// Parse with extra named definitions that are substituted in place.
pub fn parse_with(text: &str, coords: &[String], defs: &HashMap<String, Expr>) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0, coords, defs };
    if *p.peek() == Tok::End {
        return Err(ParseError::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let e = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(ParseError::Syntax { pos: p.pos(), msg: format!("unexpected {}", describe(t)) }),
    }
}

/// Convenience: complex constant from a parsed constant expression.
pub fn parse_constant(text: &str) -> Result<C64, ParseError> {
    let e = parse(text, &[])?;
    e.eval(&[]).map_err(|err| ParseError::Syntax { pos: 0, msg: err.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precedence_and_associativity() {
        let c = names(&["x"]);
        let e = parse("1 - 2*x + x/2", &c).unwrap();
        assert_eq!(e.eval(&[4.0]).unwrap().re, -5.0);
        let e = parse("2^3^2", &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap().re, 512.0);
        let e = parse("8/4/2", &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap().re, 1.0);
        let e = parse("-x^2", &c).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap().re, -9.0);
    }

    #[test]
    fn irrational_exponent_rejected() {
        let c = names(&["x"]);
        assert!(matches!(parse("x^pi", &c), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x^x", &c), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn errors_carry_positions() {
        let c = names(&["x"]);
        assert_eq!(parse("x + y", &c), Err(ParseError::UnknownIdent { pos: 4, name: "y".into() }));
        assert!(matches!(parse("(x + 1", &c), Err(ParseError::Syntax { pos: 6, .. })));
        assert!(matches!(parse("x $ 1", &c), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("", &c), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn scientific_notation_and_constants() {
        assert_eq!(parse("1.5e2", &[]).unwrap().eval(&[]).unwrap().re, 150.0);
        assert_eq!(parse("2*i", &[]).unwrap().eval(&[]).unwrap(), C64::new(0.0, 2.0));
        assert!((parse("cos(pi)", &[]).unwrap().eval(&[]).unwrap().re + 1.0).abs() < 1e-15);
    }

    #[test]
    fn definitions_substitute() {
        let c = names(&["x"]);
        let mut defs = HashMap::new();
        defs.insert("W".to_string(), parse("x^3 - x", &c).unwrap());
        let e = parse_with("2*W", &c, &defs).unwrap();
        assert_eq!(e.eval(&[2.0]).unwrap().re, 12.0);
    }
}
