//! Arithmetic expressions over named parameters, used for coefficients in
//! model files (`"-2*d*alpha"`, `"exp(alpha*c)"`).
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, decimal literals,
//! identifiers, and the functions `exp ln sqrt sin cos abs`. `^` is right
//! associative and binds tighter than unary minus, so `-a^2 = -(a^2)`.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error in {expr:?} at offset {pos}: {msg}")]
    Syntax { expr: String, pos: usize, msg: String },
    #[error("unknown parameter {0:?}")]
    UnknownName(String),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("expression {0:?} does not evaluate to a finite number")]
    NotFinite(String),
}

pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let err = |pos: usize, msg: &str| ExprError::Syntax { expr: src.to_string(), pos, msg: msg.to_string() };
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let v: f64 = src[start..i].parse().map_err(|_| err(start, "bad number"))?;
            out.push((start, Token::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(err(i, &format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(usize, Token)>,
    pos: usize,
    env: &'a Bindings,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.src.len(), |(p, _)| *p)
    }

    fn syntax(&self, msg: &str) -> ExprError {
        ExprError::Syntax { expr: self.src.to_string(), pos: self.offset(), msg: msg.to_string() }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<f64, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc += self.term()?;
            } else if self.eat('-') {
                acc -= self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<f64, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc *= self.unary()?;
            } else if self.eat('/') {
                acc /= self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, ExprError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<f64, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            Ok(base.powf(exp))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<f64, ExprError> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(v)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.syntax("expected ')'"));
                    }
                    apply(&name, arg)
                } else if let Some(v) = self.env.get(&name) {
                    Ok(*v)
                } else if name == "pi" {
                    Ok(std::f64::consts::PI)
                } else {
                    Err(ExprError::UnknownName(name))
                }
            }
            _ => Err(self.syntax("expected a number, name or '('")),
        }
    }
}

fn apply(name: &str, arg: f64) -> Result<f64, ExprError> {
    Ok(match name {
        "exp" => arg.exp(),
        "ln" => arg.ln(),
        "sqrt" => arg.sqrt(),
        "sin" => arg.sin(),
        "cos" => arg.cos(),
        "abs" => arg.abs(),
        _ => return Err(ExprError::UnknownFunction(name.to_string())),
    })
}

/// Evaluates `src` with the given parameter values.
pub fn eval(src: &str, env: &Bindings) -> Result<f64, ExprError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser { src, tokens, pos: 0, env };
    let v = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    if !v.is_finite() {
        return Err(ExprError::NotFinite(src.to_string()));
    }
    Ok(v)
}
