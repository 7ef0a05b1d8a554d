//! Scalar expression trees over real coordinates.
//!
//! Expressions evaluate to complex numbers and, through [`Expr::jet`], to
//! truncated Taylor series carrying exact partial derivatives.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::EvalError;
use crate::jet::{JetLayout, ScalarJet, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact rational exponent `num/den`, `den > 0`, in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Option<Rational> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Some(Rational { num: s * num / g.max(1), den: s * den / g.max(1) })
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.den, self.num < 0) {
            (1, false) => write!(f, "{}", self.num),
            (1, true) => write!(f, "({})", self.num),
            _ => write!(f, "({}/{})", self.num, self.den),
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(C64),
    Coord(usize),
    Unary(UnaryOp, Expr),
    Pow(Expr, Rational),
    Binary(BinOp, Expr, Expr),
}

/// An immutable, cheaply clonable expression.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: C64) -> Expr {
        Expr(Arc::new(Node::Const(c)))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(C64::new(x, 0.0))
    }

    pub fn imag_unit() -> Expr {
        Expr::constant(C64::new(0.0, 1.0))
    }

    pub fn coord(i: usize) -> Expr {
        Expr(Arc::new(Node::Coord(i)))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(C64::new(0.0, 0.0))
    }

    fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr(Arc::new(Node::Unary(op, e)))
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Log, self.clone())
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

    pub fn pow(&self, r: Rational) -> Expr {
        Expr(Arc::new(Node::Pow(self.clone(), r)))
    }

    pub fn powi(&self, n: i64) -> Expr {
        self.pow(Rational::integer(n))
    }

    fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            match op {
                BinOp::Add => return Expr::constant(x + y),
                BinOp::Sub => return Expr::constant(x - y),
                BinOp::Mul => return Expr::constant(x * y),
                BinOp::Div if y != C64::new(0.0, 0.0) => return Expr::constant(x / y),
                BinOp::Div => {}
            }
        }
        Expr(Arc::new(Node::Binary(op, a, b)))
    }

    /// Bit mask of coordinates the expression mentions.
    pub fn deps(&self) -> u64 {
        match self.node() {
            Node::Const(_) => 0,
            Node::Coord(i) => 1u64 << i,
            Node::Unary(_, a) | Node::Pow(a, _) => a.deps(),
            Node::Binary(_, a, b) => a.deps() | b.deps(),
        }
    }

    /// Largest coordinate index used, if any.
    pub fn max_coord(&self) -> Option<usize> {
        let d = self.deps();
        (d != 0).then(|| 63 - d.leading_zeros() as usize)
    }

    /// Replace coordinate references through `f`.
    pub fn substitute(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Coord(i) => f(*i),
            Node::Unary(op, a) => Expr::unary(*op, a.substitute(f)),
            Node::Pow(a, r) => a.substitute(f).pow(*r),
            Node::Binary(op, a, b) => Expr::binary(*op, a.substitute(f), b.substitute(f)),
        }
    }

    /// Symbolic partial derivative with respect to coordinate `var`.
    /// Only trivial zero/one pruning is applied.
    pub fn diff(&self, var: usize) -> Expr {
        if self.deps() & (1u64 << var) == 0 {
            return Expr::real(0.0);
        }
        match self.node() {
            Node::Const(_) => Expr::real(0.0),
            Node::Coord(j) => Expr::real(if *j == var { 1.0 } else { 0.0 }),
            Node::Unary(op, a) => {
                let da = a.diff(var);
                let outer = match op {
                    UnaryOp::Neg => return neg_s(da),
                    UnaryOp::Exp => self.clone(),
                    UnaryOp::Log => a.powi(-1),
                    UnaryOp::Sqrt => mul_s(Expr::real(0.5), a.pow(Rational { num: -1, den: 2 })),
                    UnaryOp::Sin => a.cos(),
                    UnaryOp::Cos => -a.sin(),
                };
                mul_s(outer, da)
            }
            Node::Pow(a, r) => {
                let rm1 = Rational::new(r.num - r.den, r.den).expect("nonzero denominator");
                let outer = if rm1.num == 0 { Expr::real(1.0) } else if rm1 == Rational::integer(1) { a.clone() } else { a.pow(rm1) };
                mul_s(mul_s(Expr::real(r.as_f64()), outer), a.diff(var))
            }
            Node::Binary(op, a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                match op {
                    BinOp::Add => add_s(da, db),
                    BinOp::Sub => add_s(da, neg_s(db)),
                    BinOp::Mul => add_s(mul_s(da, b.clone()), mul_s(a.clone(), db)),
                    BinOp::Div => {
                        let num = add_s(mul_s(da, b.clone()), neg_s(mul_s(a.clone(), db)));
                        if num.is_zero() {
                            num
                        } else {
                            num / b.powi(2)
                        }
                    }
                }
            }
        }
    }

    /// Value at a point.
    pub fn eval(&self, point: &[f64]) -> Result<C64, EvalError> {
        Ok(self.jet(point, &JetLayout::get(point.len(), 0))?.value_or_zero())
    }

    /// Taylor series at `point` with the given layout.
    pub fn jet(&self, point: &[f64], layout: &Arc<JetLayout>) -> Result<ScalarJet, EvalError> {
        Ok(match self.node() {
            Node::Const(c) => ScalarJet::constant(layout.clone(), *c),
            Node::Coord(i) => {
                let x = *point.get(*i).ok_or_else(|| EvalError::Shape(format!("coordinate {i} out of range")))?;
                ScalarJet::variable(layout.clone(), *i, x)
            }
            Node::Unary(op, a) => {
                let a = a.jet(point, layout)?;
                match op {
                    UnaryOp::Neg => a.scale(C64::new(-1.0, 0.0)),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Log => a.ln()?,
                    UnaryOp::Sqrt => a.powf(0.5)?,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                }
            }
            Node::Pow(a, r) => {
                let a = a.jet(point, layout)?;
                if r.is_integer() && r.num >= 0 {
                    a.powi(r.num as u32)
                } else if r.is_integer() {
                    a.recip()?.powi(r.num.unsigned_abs() as u32)
                } else {
                    a.powf(r.as_f64())?
                }
            }
            Node::Binary(op, a, b) => {
                let a = a.jet(point, layout)?;
                let b = b.jet(point, layout)?;
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.add(&b.scale(C64::new(-1.0, 0.0))),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => a.mul(&b.recip()?),
                }
            }
        })
    }

    /// Printable form using the given coordinate names. The output is
    /// accepted by [`crate::parse::parse`].
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

fn is_one(e: &Expr) -> bool {
    e.as_const() == Some(C64::new(1.0, 0.0))
}

fn add_s(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        b
    } else if b.is_zero() {
        a
    } else {
        a + b
    }
}

fn neg_s(a: Expr) -> Expr {
    if a.is_zero() {
        a
    } else {
        -a
    }
}

fn mul_s(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        Expr::real(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        a * b
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

// precedence levels: 1 sum, 2 product, 3 unary minus, 4 power, 5 atom
fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) => {
            if c.im != 0.0 || c.re < 0.0 || c.re.is_sign_negative() {
                1
            } else {
                5
            }
        }
        Node::Coord(_) => 5,
        Node::Unary(UnaryOp::Neg, _) => 3,
        Node::Unary(..) => 5,
        Node::Pow(..) => 4,
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
    }
}

fn write_float(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_finite() && x == x.trunc() && x.abs() < 1e15 {
        write!(f, "{}", x as i64)
    } else {
        write!(f, "{x:?}")
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    match (c.re == 0.0 && !c.re.is_sign_negative(), c.im == 0.0) {
        (_, true) => {
            if c.re.is_sign_negative() {
                write!(f, "-")?;
                write_float(f, -c.re)
            } else {
                write_float(f, c.re)
            }
        }
        (true, false) => {
            if c.im == 1.0 {
                write!(f, "i")
            } else if c.im.is_sign_negative() {
                write!(f, "-")?;
                write_float(f, -c.im)?;
                write!(f, "*i")
            } else {
                write_float(f, c.im)?;
                write!(f, "*i")
            }
        }
        (false, false) => {
            if c.re.is_sign_negative() {
                write!(f, "-")?;
                write_float(f, -c.re)?;
            } else {
                write_float(f, c.re)?;
            }
            if c.im.is_sign_negative() {
                write!(f, " - ")?;
                write_float(f, -c.im)?;
            } else {
                write!(f, " + ")?;
                write_float(f, c.im)?;
            }
            write!(f, "*i")
        }
    }
}

impl ExprDisplay<'_> {
    fn child(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if prec(e) < min_prec {
            write!(f, "(")?;
            self.write(f, e)?;
            write!(f, ")")
        } else {
            self.write(f, e)
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
        match e.node() {
            Node::Const(c) => write_const(f, *c),
            Node::Coord(i) => match self.names.get(*i) {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "x{i}"),
            },
            Node::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                self.child(f, a, 3)
            }
            Node::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                self.write(f, a)?;
                write!(f, ")")
            }
            Node::Pow(a, r) => {
                self.child(f, a, 5)?;
                write!(f, "^{r}")
            }
            Node::Binary(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                };
                self.child(f, a, lp)?;
                write!(f, "{sym}")?;
                self.child(f, b, rp)
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr)
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $op:expr) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::real(rhs))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::real(self), rhs)
            }
        }
    };
}

expr_binop!(Add, add, BinOp::Add);
expr_binop!(Sub, sub, BinOp::Sub);
expr_binop!(Mul, mul, BinOp::Mul);
expr_binop!(Div, div, BinOp::Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(-c),
            None => Expr::unary(UnaryOp::Neg, self),
        }
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::MultiIndex;

    #[test]
    fn cubic_evaluates() {
        let x = Expr::coord(0);
        let e = x.powi(3) - x.clone();
        assert_eq!(e.eval(&[2.0]).unwrap(), C64::new(6.0, 0.0));
    }

    #[test]
    fn jets_of_exp_product() {
        let (x, y) = (Expr::coord(0), Expr::coord(1));
        let e = (x * y).exp();
        let j = e.jet(&[1.0, 0.0], &JetLayout::get(2, 2)).unwrap();
        assert_eq!(j.value_or_zero(), C64::new(1.0, 0.0));
        // ∂y exp(xy) = x exp(xy) = 1 at (1,0)
        assert!((j.partial(&MultiIndex::from_slice(&[0, 1])).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn display_respects_precedence() {
        let names = vec!["x".to_string(), "y".to_string()];
        let (x, y) = (Expr::coord(0), Expr::coord(1));
        let e = (x.clone() - y.clone()) * (x.clone() + y).powi(2) / x.clone();
        assert_eq!(e.display(&names).to_string(), "(x - y)*(x + y)^2/x");
        let n = -(x.powi(2));
        assert_eq!(n.display(&names).to_string(), "-x^2");
    }

    #[test]
    fn symbolic_diff_agrees_with_jet() {
        let (x, y) = (Expr::coord(0), Expr::coord(1));
        let e = (x.clone() * y.clone()).sin() / (x.powi(2) + 1.0).sqrt() + y.ln() * x.exp();
        let p = [0.7, 1.3];
        let j = e.jet(&p, &JetLayout::get(2, 1)).unwrap();
        for v in 0..2 {
            let d = e.diff(v).eval(&p).unwrap();
            let a = j.partial(&MultiIndex::unit(2, v)).unwrap();
            assert!((d - a).norm() < 1e-13, "{d} vs {a}");
        }
        assert!(Expr::real(3.0).diff(0).is_zero());
    }

    #[test]
    fn negative_integer_power_is_reciprocal() {
        let x = Expr::coord(0);
        let e = x.powi(-2);
        assert!((e.eval(&[2.0]).unwrap() - 0.25).norm() < 1e-16);
        assert!(e.eval(&[0.0]).is_err());
    }
}
