//! A small expression language for nonlinearities `f(r, u, v, gu, gv)`.
//!
//! `gu` and `gv` stand for the gradient magnitudes `|grad u|` and `|grad v|`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?            right associative
//! atom    := number | constant | variable | func '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//!
//! Constants are `e` and `pi`; functions are `exp log sin cos atan sqrt abs`
//! (one argument) and `min max` (one or more arguments).

use std::fmt;
use thiserror::Error;

/// A point `(r, u, v, gu, gv)` at which a nonlinearity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub r: f64,
    pub u: f64,
    pub v: f64,
    pub gu: f64,
    pub gv: f64,
}

impl Point {
    pub fn new(r: f64, u: f64, v: f64, gu: f64, gv: f64) -> Self {
        Self { r, u, v, gu, gv }
    }

    pub fn from_array(x: [f64; 5]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.r, self.u, self.v, self.gu, self.gv]
    }

    fn get(&self, var: Var) -> f64 {
        match var {
            Var::R => self.r,
            Var::U => self.u,
            Var::V => self.v,
            Var::Gu => self.gu,
            Var::Gv => self.gv,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::format::sig9;
        write!(
            f,
            "(r={}, u={}, v={}, gu={}, gv={})",
            sig9(self.r),
            sig9(self.u),
            sig9(self.v),
            sig9(self.gu),
            sig9(self.gv)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    R,
    U,
    V,
    Gu,
    Gv,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::R, Var::U, Var::V, Var::Gu, Var::Gv];

    /// Position in `(r, u, v, gu, gv)`.
    pub fn axis(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::R => "r",
            Var::U => "u",
            Var::V => "v",
            Var::Gu => "gu",
            Var::Gv => "gv",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Var::ALL.into_iter().find(|v| v.name() == s)
    }
}

/// Set of variables an expression depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VarSet(u8);

impl VarSet {
    pub fn contains(self, v: Var) -> bool {
        self.0 & (1 << v.axis()) != 0
    }

    pub fn insert(&mut self, v: Var) {
        self.0 |= 1 << v.axis();
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    E,
    Pi,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::E => std::f64::consts::E,
            Constant::Pi => std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Atan,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    const ALL: [Func; 9] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Atan,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
    ];

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

/// Immutable expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character '{ch}' at position {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("invalid number '{text}' at position {pos}")]
    BadNumber { text: String, pos: usize },
    #[error("expected {expected} at position {pos}, found {found}")]
    Expected {
        expected: &'static str,
        found: String,
        pos: usize,
    },
    #[error("function '{name}' at position {pos} takes {expected} argument(s), got {got}")]
    Arity {
        name: &'static str,
        expected: &'static str,
        got: usize,
        pos: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("negative base {base} raised to non-integer power {exponent}")]
    NegativeBase { base: f64, exponent: f64 },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("overflow or undefined result")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{kind} at {point}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub point: Point,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let tokens = lex(src)?;
        if tokens.is_empty() {
            return Err(ParseError::Empty);
        }
        let mut p = Parser {
            tokens,
            pos: 0,
            end: src.len(),
        };
        let e = p.sum()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(ParseError::Expected {
                expected: "end of input",
                found: t.tok.describe(),
                pos: t.pos,
            }),
        }
    }

    pub fn eval(&self, x: &Point) -> Result<f64, EvalError> {
        if !x.to_array().iter().all(|c| c.is_finite()) {
            return Err(EvalError {
                kind: EvalErrorKind::NonFiniteInput,
                point: *x,
            });
        }
        self.eval_inner(x)
            .map_err(|kind| EvalError { kind, point: *x })
    }

    /// Variables referenced anywhere in the tree.
    pub fn variables(&self) -> VarSet {
        let mut set = VarSet::default();
        self.collect(&mut set);
        set
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.variables().contains(v)
    }

    fn collect(&self, set: &mut VarSet) {
        match self {
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Var(v) => set.insert(*v),
            Expr::Neg(a) => a.collect(set),
            Expr::Binary(_, a, b) => {
                a.collect(set);
                b.collect(set);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect(set)),
        }
    }

    fn eval_inner(&self, x: &Point) -> Result<f64, EvalErrorKind> {
        let out = match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Var(v) => x.get(*v),
            Expr::Neg(a) => -a.eval_inner(x)?,
            Expr::Binary(op, a, b) => {
                let (l, r) = (a.eval_inner(x)?, b.eval_inner(x)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalErrorKind::DivisionByZero);
                        }
                        l / r
                    }
                    BinOp::Pow => power(l, r)?,
                }
            }
            Expr::Call(func, args) => {
                let first = args[0].eval_inner(x)?;
                match func {
                    Func::Exp => first.exp(),
                    Func::Log => {
                        if first <= 0.0 {
                            return Err(EvalErrorKind::LogDomain(first));
                        }
                        first.ln()
                    }
                    Func::Sin => first.sin(),
                    Func::Cos => first.cos(),
                    Func::Atan => first.atan(),
                    Func::Sqrt => {
                        if first < 0.0 {
                            return Err(EvalErrorKind::SqrtDomain(first));
                        }
                        first.sqrt()
                    }
                    Func::Abs => first.abs(),
                    Func::Min | Func::Max => {
                        let mut acc = first;
                        for a in &args[1..] {
                            let v = a.eval_inner(x)?;
                            acc = if *func == Func::Min {
                                acc.min(v)
                            } else {
                                acc.max(v)
                            };
                        }
                        acc
                    }
                }
            }
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(EvalErrorKind::NonFinite)
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalErrorKind> {
    let integral = exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64;
    if base < 0.0 && !integral {
        return Err(EvalErrorKind::NegativeBase { base, exponent });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalErrorKind::DivisionByZero);
    }
    Ok(if integral {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                let (left_paren, right_paren) = match op {
                    // right associative: a ^ (b ^ c) prints bare, (a ^ b) ^ c needs parens
                    BinOp::Pow => (a.precedence() <= p, b.precedence() < 3),
                    BinOp::Sub | BinOp::Div => (a.precedence() < p, b.precedence() <= p),
                    BinOp::Add | BinOp::Mul => (a.precedence() < p, b.precedence() <= p),
                };
                write_operand(f, a, left_paren)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, right_paren)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Tok::Num(v),
                _ => {
                    return Err(ParseError::BadNumber {
                        text: text.to_string(),
                        pos: start,
                    })
                }
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            i += c.len_utf8();
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or(c);
                    return Err(ParseError::UnexpectedChar { ch, pos: start });
                }
            }
        };
        out.push(Spanned { tok, pos: start });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Op(c), ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if t.tok == want => Ok(()),
            Some(t) => Err(ParseError::Expected {
                expected,
                found: t.tok.describe(),
                pos: t.pos,
            }),
            None => Err(ParseError::Expected {
                expected,
                found: "end of input".into(),
                pos: self.end,
            }),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.here();
        let Some(t) = self.next() else {
            return Err(ParseError::Expected {
                expected: "operand",
                found: "end of input".into(),
                pos,
            });
        };
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                match name.as_str() {
                    "e" => return Ok(Expr::Const(Constant::E)),
                    "pi" => return Ok(Expr::Const(Constant::Pi)),
                    _ => {}
                }
                let Some(func) = Func::ALL.into_iter().find(|f| f.name() == name) else {
                    return Err(ParseError::UnknownIdentifier { name, pos: t.pos });
                };
                self.expect(Tok::LParen, "'(' after function name")?;
                let mut args = vec![self.sum()?];
                while matches!(
                    self.peek(),
                    Some(Spanned {
                        tok: Tok::Comma,
                        ..
                    })
                ) {
                    self.pos += 1;
                    args.push(self.sum()?);
                }
                self.expect(Tok::RParen, "')'")?;
                if !func.variadic() && args.len() != 1 {
                    return Err(ParseError::Arity {
                        name: func.name(),
                        expected: "1",
                        got: args.len(),
                        pos: t.pos,
                    });
                }
                Ok(Expr::Call(func, args))
            }
            other => Err(ParseError::Expected {
                expected: "operand",
                found: other.describe(),
                pos: t.pos,
            }),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn eval(src: &str, x: Point) -> f64 {
        Expr::parse(src).unwrap().eval(&x).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        let o = Point::default();
        assert_eq!(eval("2+3*4", o), 14.0);
        assert_eq!(eval("2^3^2", o), 512.0);
        assert_eq!(eval("-2^2", o), -4.0);
        assert_eq!(eval("2^-1", o), 0.5);
        assert_eq!(eval("8 / 4 / 2", o), 1.0);
        assert_eq!(eval("8 - 4 - 2", o), 2.0);
        assert_eq!(eval(" ( 1 + 2 ) * 3 ", o), 9.0);
        assert_eq!(eval("1.5e2 + 2E-1", o), 150.2);
        assert_eq!(eval("max(1, 4, 2) - min(3, -1)", o), 5.0);
    }

    #[test]
    fn sample_nonlinearities() {
        assert_eq!(eval("r*u + gv", Point::new(2.0, 3.0, 0.0, 0.0, 5.0)), 11.0);
        let f2 = "atan(1 + gu^2 + gv^2) * exp(-r^2) * v^5 / pi";
        assert!((eval(f2, Point::new(0.0, 0.0, 1.0, 0.0, 0.0)) - 0.25).abs() < 1e-15);
        let f1 = "exp(-r^2)/6 * (2 - sin(gu^2+gv^2)) * u^5";
        let got = eval(f1, Point::new(1.0, 1.0, 0.0, 0.0, 0.0));
        assert!((got - 2.0 * (-1f64).exp() / 6.0).abs() < 1e-15);
        assert!((got - 0.122626).abs() < 1e-6);
        assert_eq!(eval("e", Point::default()), E);
        assert_eq!(eval("pi", Point::default()), PI);
    }

    #[test]
    fn example_style_tree_shape() {
        let e = Expr::parse("u^5 * exp(-r^2) * (2 - sin(gu^2 + gv^2)) / 6").unwrap();
        let Expr::Binary(BinOp::Div, num, den) = &e else {
            panic!("{e:?}")
        };
        assert_eq!(**den, Expr::Num(6.0));
        assert!(matches!(**num, Expr::Binary(BinOp::Mul, ..)));
        let vars = e.variables();
        assert!(vars.contains(Var::R) && vars.contains(Var::U) && vars.contains(Var::Gu));
        assert!(!vars.contains(Var::V));
        let sum = Expr::parse("r*u + gv").unwrap();
        assert!(matches!(&sum, Expr::Binary(BinOp::Add, a, b)
            if matches!(**a, Expr::Binary(BinOp::Mul, ..)) && **b == Expr::Var(Var::Gv)));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            Expr::parse("u + w"),
            Err(ParseError::UnknownIdentifier {
                name: "w".into(),
                pos: 4
            })
        );
        assert_eq!(Expr::parse("   "), Err(ParseError::Empty));
        assert!(matches!(
            Expr::parse("u +"),
            Err(ParseError::Expected { pos: 3, .. })
        ));
        assert!(matches!(
            Expr::parse("(u"),
            Err(ParseError::Expected { .. })
        ));
        assert!(matches!(
            Expr::parse("u $ v"),
            Err(ParseError::UnexpectedChar { ch: '$', pos: 2 })
        ));
        assert!(matches!(
            Expr::parse("sin(u, v)"),
            Err(ParseError::Arity { .. })
        ));
        assert!(matches!(
            Expr::parse("1..2"),
            Err(ParseError::BadNumber { .. })
        ));
        assert!(matches!(
            Expr::parse("1e999"),
            Err(ParseError::BadNumber { .. })
        ));
        assert!(matches!(
            Expr::parse("u v"),
            Err(ParseError::Expected { .. })
        ));
    }

    #[test]
    fn eval_errors_carry_point() {
        let p = Point::new(1.0, 0.0, -2.0, 0.0, 0.0);
        let err = |s: &str| Expr::parse(s).unwrap().eval(&p).unwrap_err();
        assert_eq!(err("1/u").kind, EvalErrorKind::DivisionByZero);
        assert_eq!(err("1/u").point, p);
        assert_eq!(err("log(u)").kind, EvalErrorKind::LogDomain(0.0));
        assert_eq!(err("sqrt(v)").kind, EvalErrorKind::SqrtDomain(-2.0));
        assert!(matches!(
            err("v^0.5").kind,
            EvalErrorKind::NegativeBase { .. }
        ));
        assert_eq!(err("exp(1000)").kind, EvalErrorKind::NonFinite);
        assert_eq!(err("u^-1").kind, EvalErrorKind::DivisionByZero);
        assert_eq!(Expr::parse("v^3").unwrap().eval(&p).unwrap(), -8.0);
        let bad = Point::new(f64::NAN, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            Expr::parse("1").unwrap().eval(&bad).unwrap_err().kind,
            EvalErrorKind::NonFiniteInput
        );
    }

    #[test]
    fn display_reparses() {
        for src in [
            "-(u + v)",
            "(-u)^2",
            "-u^2",
            "2^3^2",
            "(2^3)^2",
            "a",
            "u - (v - gu)",
            "u / (v / 2)",
            "(u - v) - gu",
            "exp(-r^2)/6 * (2 - sin(gu^2+gv^2)) * u^5",
            "max(u, v, 1e-7) + min(r)",
            "2^-u",
            "--u",
        ] {
            let Ok(e) = Expr::parse(src) else { continue };
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::Const(Constant::E)),
            Just(Expr::Const(Constant::Pi)),
            prop::sample::select(Var::ALL.to_vec()).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 48, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop::sample::select(vec![
                        BinOp::Add,
                        BinOp::Sub,
                        BinOp::Mul,
                        BinOp::Div,
                        BinOp::Pow
                    ]),
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Binary(
                        op,
                        Box::new(a),
                        Box::new(b)
                    )),
                (prop::sample::select(Func::ALL[..7].to_vec()), inner.clone())
                    .prop_map(|(f, a)| Expr::Call(f, vec![a])),
                (
                    prop::sample::select(vec![Func::Min, Func::Max]),
                    prop::collection::vec(inner, 1..4)
                )
                    .prop_map(|(f, args)| Expr::Call(f, args)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn printed_trees_reparse_identically(e in arb_expr()) {
            let printed = e.to_string();
            let back = Expr::parse(&printed).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn eval_never_returns_nan(e in arb_expr(), x in prop::array::uniform5(0.0f64..10.0)) {
            if let Ok(v) = e.eval(&Point::from_array(x)) {
                prop_assert!(v.is_finite());
            }
        }
    }
}
