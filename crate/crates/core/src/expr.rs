//! A small arithmetic-expression parser for user-supplied potentials
//! (`custom:<expression>` in experiment configs).
//!
//! Grammar: `+ - * / ^`, parentheses, the variable `x`, numeric literals,
//! and the functions `exp`, `ln`/`log`, `sqrt`, `abs`, `sin`, `cos`,
//! `sinh`, `cosh`. `^` is right-associative and binds tighter than unary
//! minus.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy)]
enum Func {
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

/// A parsed expression in one variable.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Node,
    source: String,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser {
            chars: source.chars().collect(),
            pos: 0,
            src: source,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.error("trailing input"));
        }
        Ok(Self {
            root,
            source: source.to_string(),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_node(&self.root, x)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

fn eval_node(n: &Node, x: f64) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var => x,
        Node::Neg(a) => -eval_node(a, x),
        Node::Add(a, b) => eval_node(a, x) + eval_node(b, x),
        Node::Sub(a, b) => eval_node(a, x) - eval_node(b, x),
        Node::Mul(a, b) => eval_node(a, x) * eval_node(b, x),
        Node::Div(a, b) => eval_node(a, x) / eval_node(b, x),
        Node::Pow(a, b) => {
            let base = eval_node(a, x);
            let e = eval_node(b, x);
            if e.fract() == 0.0 && e.abs() < 1e9 {
                base.powi(e as i32)
            } else {
                base.powf(e)
            }
        }
        Node::Call(f, a) => {
            let v = eval_node(a, x);
            match f {
                Func::Exp => v.exp(),
                Func::Ln => v.ln(),
                Func::Sqrt => v.sqrt(),
                Func::Abs => v.abs(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Sinh => v.sinh(),
                Func::Cosh => v.cosh(),
            }
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> CoreError {
        CoreError::InvalidParameter(format!(
            "expression parse error at byte {} of {:?}: {what}",
            self.pos, self.src
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat('^') {
            // right-associative; exponent may carry unary minus
            let e = self.unary()?;
            Ok(Node::Pow(Box::new(base), Box::new(e)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Node> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.error("expected a number, 'x', function, or '('")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_digit() || c == '.' {
                self.pos += 1;
            } else if (c == 'e' || c == 'E')
                && self.pos > start
                && self
                    .chars
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == '+' || n == '-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| self.error("malformed number"))
    }

    fn ident(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if name == "x" {
            return Ok(Node::Var);
        }
        let f = match name.as_str() {
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return Err(self.error(&format!("unknown identifier {name:?}"))),
        };
        if !self.eat('(') {
            return Err(self.error("expected '(' after function name"));
        }
        let arg = self.expr()?;
        if !self.eat(')') {
            return Err(self.error("expected ')'"));
        }
        Ok(Node::Call(f, Box::new(arg)))
    }
}
