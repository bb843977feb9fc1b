//! Arithmetic expressions for problem files.
//!
//! Grammar (usual precedence, `^` binds tighter than unary minus and is
//! right associative):
//!
//! ```text
//! sum     = product (("+" | "-") product)*
//! product = unary (("*" | "/") unary)*
//! unary   = "-" unary | "+" unary | power
//! power   = atom ("^" unary)?
//! atom    = number | name | name "(" sum ("," sum)* ")" | "(" sum ")"
//! ```

use std::fmt;

use num_dual::DualNum;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at column {column}")]
pub struct ExprError {
    pub message: String,
    /// 1-based.
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
    Atan,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "exp" => (Func::Exp, 1),
            "ln" | "log" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "sinh" => (Func::Sinh, 1),
            "cosh" => (Func::Cosh, 1),
            "tanh" => (Func::Tanh, 1),
            "atan" => (Func::Atan, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression over a fixed list of variable names.
#[derive(Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
    vars: Vec<String>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            message: message.into(),
            column: self.pos + 1,
        })
    }

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

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(b'-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of expression"),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("malformed number '{text}'"))
            }
        }
    }

    fn name(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if self.peek() == Some(b'(') {
            let Some((func, arity)) = Func::lookup(name) else {
                self.pos = start;
                return self.err(format!("unknown function '{name}'"));
            };
            self.pos += 1;
            let mut args = vec![self.sum()?];
            while self.eat(b',') {
                args.push(self.sum()?);
            }
            if !self.eat(b')') {
                return self.err("expected ')' or ','");
            }
            if args.len() != arity {
                self.pos = start;
                return self.err(format!(
                    "{name} takes {arity} argument(s), got {}",
                    args.len()
                ));
            }
            return Ok(Node::Call(func, args));
        }
        if let Some(k) = self.vars.iter().position(|v| *v == name) {
            return Ok(Node::Var(k));
        }
        match name {
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            _ => {
                self.pos = start;
                let allowed = if self.vars.is_empty() {
                    "none".to_string()
                } else {
                    self.vars.join(", ")
                };
                self.err(format!("unknown variable '{name}' (allowed: {allowed})"))
            }
        }
    }
}

impl Expr {
    /// Parses `source`; only the names in `vars` (plus `pi` and `e`) may
    /// appear as variables.
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ExprError> {
        if !source.is_ascii() {
            let column = source
                .char_indices()
                .find(|(_, c)| !c.is_ascii())
                .map_or(0, |(i, _)| i)
                + 1;
            return Err(ExprError {
                message: "non-ASCII character".into(),
                column,
            });
        }
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            vars,
        };
        let root = p.sum()?;
        if p.peek().is_some() {
            return p.err("unexpected trailing input");
        }
        Ok(Self {
            root,
            source: source.trim().to_string(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
        })
    }

    /// Whether any variable appears.
    pub fn is_constant(&self) -> bool {
        node_constant(&self.root)
    }

    /// Whether variable `name` appears.
    pub fn uses(&self, name: &str) -> bool {
        fn walk(n: &Node, k: usize) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(v) => *v == k,
                Node::Neg(a) => walk(a, k),
                Node::Add(a, b)
                | Node::Sub(a, b)
                | Node::Mul(a, b)
                | Node::Div(a, b)
                | Node::Pow(a, b) => walk(a, k) || walk(b, k),
                Node::Call(_, args) => args.iter().any(|a| walk(a, k)),
            }
        }
        self.vars
            .iter()
            .position(|v| v == name)
            .is_some_and(|k| walk(&self.root, k))
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// Evaluates with `values[k]` bound to the `k`-th variable.
    pub fn eval<D: DualNum<Primitive = f64> + Copy>(&self, values: &[D]) -> D {
        eval_node(&self.root, values)
    }

    pub fn eval_f64(&self, values: &[f64]) -> f64 {
        self.eval(values)
    }
}

fn node_constant(n: &Node) -> bool {
    match n {
        Node::Num(_) => true,
        Node::Var(_) => false,
        Node::Neg(a) => node_constant(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            node_constant(a) && node_constant(b)
        }
        Node::Call(_, args) => args.iter().all(node_constant),
    }
}

fn eval_node<D: DualNum<Primitive = f64> + Copy>(n: &Node, v: &[D]) -> D {
    match n {
        Node::Num(c) => D::from(*c),
        Node::Var(k) => v[*k],
        Node::Neg(a) => -eval_node(a, v),
        Node::Add(a, b) => eval_node(a, v) + eval_node(b, v),
        Node::Sub(a, b) => eval_node(a, v) - eval_node(b, v),
        Node::Mul(a, b) => eval_node(a, v) * eval_node(b, v),
        Node::Div(a, b) => eval_node(a, v) / eval_node(b, v),
        Node::Pow(a, b) => {
            let base = eval_node(a, v);
            match **b {
                // small integer exponents keep negative bases and exact derivatives
                Node::Num(e) if e.fract() == 0.0 && e.abs() <= 64.0 => base.powi(e as i32),
                _ if node_constant(b) => base.powf(eval_node::<f64>(b, &[])),
                _ => (base.ln() * eval_node(b, v)).exp(),
            }
        }
        Node::Call(f, args) => {
            let a = eval_node(&args[0], v);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Sinh => a.sinh(),
                Func::Cosh => a.cosh(),
                Func::Tanh => a.tanh(),
                Func::Atan => a.atan(),
                Func::Min | Func::Max => {
                    let b = eval_node(&args[1], v);
                    let pick_a = if *f == Func::Min {
                        a.re() <= b.re()
                    } else {
                        a.re() >= b.re()
                    };
                    if pick_a {
                        a
                    } else {
                        b
                    }
                }
            }
        }
    }
}
