//! Arithmetic expressions over coordinates `x1..xm`, compiled to analytic jets.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' digits | func '(' expr ')' | '(' expr ')'
//! func  := exp | log | sqrt
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)`. Constant integer exponents use repeated multiplication; any
//! other exponent goes through `exp(b log a)`.

use std::fmt;
use std::sync::Arc;

use statvar_core::jets::{Jet, JetFn, MAX_VARS};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Exp,
    Log,
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn constant(&self) -> Option<f64> {
        match self {
            Node::Num(v) => Some(*v),
            Node::Var(_) => None,
            Node::Neg(a) => a.constant().map(|v| -v),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.constant()?, b.constant()?);
                Some(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                })
            }
            Node::Pow(a, b) => Some(a.constant()?.powf(b.constant()?)),
            Node::Call(f, a) => {
                let a = a.constant()?;
                Some(match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                })
            }
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Num(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Bin(_, a, b) | Node::Pow(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn eval(&self, x: &[Jet]) -> Jet {
        match self {
            Node::Num(v) => x[0].lift(*v),
            Node::Var(i) => x[*i].clone(),
            Node::Neg(a) => -a.eval(x),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => &a + &b,
                    BinOp::Sub => &a - &b,
                    BinOp::Mul => &a * &b,
                    BinOp::Div => &a / &b,
                }
            }
            Node::Pow(a, b) => {
                let base = a.eval(x);
                match b.constant() {
                    Some(p) if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 => base.powi(p as i32),
                    Some(p) => base.powf(p),
                    None => (&b.eval(x) * &base.ln()).exp(),
                }
            }
            Node::Call(f, a) => {
                let a = a.eval(x);
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sqrt => a.sqrt(),
                }
            }
        }
    }
}

/// A parsed expression. Cheap to clone.
#[derive(Clone)]
pub struct Expr {
    source: Arc<str>,
    root: Arc<Node>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Expr").field(&self.source).finish()
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return err(p.pos, format!("unexpected `{}`", p.src[p.pos] as char));
        }
        Ok(Expr {
            source: source.into(),
            root: Arc::new(root),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Smallest arity that covers every coordinate in the expression.
    pub fn min_arity(&self) -> usize {
        self.root.max_var().map_or(0, |i| i + 1)
    }

    /// Compiles to a function of `arity` coordinates. Domain problems such as
    /// `log` of a non-positive number surface when the function is evaluated.
    pub fn to_jet_fn(&self, arity: usize) -> Result<JetFn, ParseError> {
        if arity == 0 || arity > MAX_VARS {
            return err(0, format!("arity must be in 1..={MAX_VARS}, got {arity}"));
        }
        if self.min_arity() > arity {
            return err(
                0,
                format!("uses x{} but only {arity} coordinates exist", self.min_arity()),
            );
        }
        let root = self.root.clone();
        Ok(JetFn::analytic(arity, move |x| root.eval(x)))
    }
}

/// Parses `source` into a function of `arity` coordinates.
pub fn parse_expr(source: &str, arity: usize) -> Result<JetFn, ParseError> {
    Expr::parse(source)?.to_jet_fn(arity)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let start = match self.peek() {
            None => return err(self.pos, "unexpected end of input"),
            Some(_) => self.pos,
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return err(self.pos, "expected `)`");
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let func = match word {
                "exp" => Some(Func::Exp),
                "log" => Some(Func::Log),
                "sqrt" => Some(Func::Sqrt),
                _ => None,
            };
            if let Some(f) = func {
                if !self.eat(b'(') {
                    return err(self.pos, format!("expected `(` after `{word}`"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return err(self.pos, "expected `)`");
                }
                return Ok(Node::Call(f, Box::new(arg)));
            }
            if let Some(digits) = word.strip_prefix('x') {
                if let Ok(i) = digits.parse::<usize>() {
                    if i >= 1 && !digits.starts_with('0') {
                        return Ok(Node::Var(i - 1));
                    }
                }
            }
            return err(start, format!("unknown identifier `{word}`"));
        }
        err(start, format!("unexpected `{}`", c as char))
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut q = self.pos + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                digits(&mut q);
                self.pos = q;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => err(start, format!("malformed number `{text}`")),
        }
    }
}
