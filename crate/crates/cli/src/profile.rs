//! Arithmetic expressions for initial density profiles `ρ₀(x1, …, xd)`.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary `-`, right-associative
//! `^`. So `-2^2 = -4` and `2^-1 = 0.5`. Functions: `cos sin exp abs`
//! (one argument) and `min max` (two). `pi` is a constant; `x1 … xd` are the
//! physical coordinates of the point.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    /// Character offset into the input.
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Cos,
    Sin,
    Exp,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
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

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileExpr {
    Number(f64),
    /// Zero-based coordinate index (`x1` is 0).
    Var(usize),
    Neg(Box<ProfileExpr>),
    Binary(BinOp, Box<ProfileExpr>, Box<ProfileExpr>),
    Call(Func, Vec<ProfileExpr>),
}

impl ProfileExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ProfileExpr::Number(v) => *v,
            ProfileExpr::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            ProfileExpr::Neg(e) => -e.eval(x),
            ProfileExpr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            ProfileExpr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Cos => a.cos(),
                    Func::Sin => a.sin(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval(x)),
                    Func::Max => a.max(args[1].eval(x)),
                }
            }
        }
    }

    /// Highest coordinate index used, plus one.
    pub fn dimension_used(&self) -> usize {
        match self {
            ProfileExpr::Number(_) => 0,
            ProfileExpr::Var(i) => i + 1,
            ProfileExpr::Neg(e) => e.dimension_used(),
            ProfileExpr::Binary(_, a, b) => a.dimension_used().max(b.dimension_used()),
            ProfileExpr::Call(_, args) => args.iter().map(Self::dimension_used).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for ProfileExpr {
    /// Fully parenthesised; reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileExpr::Number(v) => write!(f, "{v:?}"),
            ProfileExpr::Var(i) => write!(f, "x{}", i + 1),
            ProfileExpr::Neg(e) => write!(f, "(-{e})"),
            ProfileExpr::Binary(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            ProfileExpr::Call(func, args) => {
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

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| ParseError { offset: start, message: format!("invalid number {s:?}") })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else {
            let tok = match c {
                '+' | '*' | '/' | '^' => Tok::Op(c),
                '-' | '−' => Tok::Op('-'),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => return Err(ParseError { offset: i, message: format!("unexpected character {c:?}") }),
            };
            out.push((tok, i));
            i += 1;
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<ProfileExpr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = ProfileExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ProfileExpr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = ProfileExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ProfileExpr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(ProfileExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ProfileExpr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            // right-associative; the exponent may carry its own sign
            let exponent = self.unary()?;
            return Ok(ProfileExpr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ProfileExpr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(ProfileExpr::Number(v)),
            Tok::LParen => {
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.error("expected ')'");
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let Some(func) = Func::lookup(&name) else {
                        return Err(ParseError { offset: at, message: format!("unknown function {name:?}") });
                    };
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if *self.peek() != Tok::RParen {
                        return self.error("expected ',' or ')'");
                    }
                    self.bump();
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            offset: at,
                            message: format!("{name} takes {} argument(s), got {}", func.arity(), args.len()),
                        });
                    }
                    return Ok(ProfileExpr::Call(func, args));
                }
                if name == "pi" {
                    return Ok(ProfileExpr::Number(std::f64::consts::PI));
                }
                if let Some(i) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()).filter(|&i| i >= 1) {
                    return Ok(ProfileExpr::Var(i - 1));
                }
                Err(ParseError { offset: at, message: format!("unknown identifier {name:?}") })
            }
            Tok::End => Err(ParseError { offset: at, message: "unexpected end of input".into() }),
            other => Err(ParseError { offset: at, message: format!("unexpected {other:?}") }),
        }
    }
}

pub fn parse_profile(text: &str) -> Result<ProfileExpr, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}
