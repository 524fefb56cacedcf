//! Expression language for prescriptions.
//!
//! ```text
//! expr  = term { ("+" | "-") term }
//! term  = unary { ("*" | "/") unary }
//! unary = "-" unary | power
//! power = atom [ "^" unary ]
//! atom  = number | "t" | "pi" | func "(" expr ")" | "(" expr ")"
//! func  = "sin" | "cos" | "exp" | "sqrt" | "log"
//! ```
//!
//! `^` is right-associative and its exponent may carry a sign, so `2^-1` is
//! `0.5`. Unary minus applies to the whole power: `-t^2` is `-(t^2)`.

use std::fmt;

use super::dual::Dual;
use super::PrescriptionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }

    fn apply(self, d: Dual) -> Dual {
        match self {
            Func::Sin => d.sin(),
            Func::Cos => d.cos(),
            Func::Exp => d.exp(),
            Func::Sqrt => d.sqrt(),
            Func::Log => d.ln(),
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

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Value and derivative at `t`.
    pub fn eval_dual(&self, t: Dual) -> Dual {
        match self {
            Expr::Num(c) => Dual::constant(*c),
            Expr::Var => t,
            Expr::Pi => Dual::constant(std::f64::consts::PI),
            Expr::Neg(a) => -a.eval_dual(t),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval_dual(t), b.eval_dual(t));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.pow(b),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval_dual(t)),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_dual(Dual::variable(t)).re
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.eval_dual(Dual::variable(t)).du
    }
}

/// Fully parenthesized rendering; parsing it back gives the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if c.is_sign_negative() => write!(f, "(-{})", -c),
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("t"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
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
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, PrescriptionError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| PrescriptionError::Syntax {
                position: start,
                expected: vec!["decimal literal".into()],
                found: format!("'{lit}'"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    let found = text[start..].chars().next().unwrap_or(c);
                    return Err(PrescriptionError::Syntax {
                        position: start,
                        expected: operand_tokens(),
                        found: format!("'{found}'"),
                    });
                }
            };
            out.push((start, tok));
            i += 1;
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

fn operand_tokens() -> Vec<String> {
    ["number", "'t'", "'pi'", "function", "'('", "'-'"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: Vec<String>) -> Result<T, PrescriptionError> {
        Err(PrescriptionError::Syntax {
            position: self.offset(),
            expected,
            found: self.peek().describe(),
        })
    }

    fn expr(&mut self) -> Result<Expr, PrescriptionError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, PrescriptionError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, PrescriptionError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(match self.unary()? {
                // keeps negative literals a single node so printing round-trips
                Expr::Num(c) => Expr::Num(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, PrescriptionError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, PrescriptionError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => {
                    self.bump();
                    Ok(Expr::Var)
                }
                "pi" => {
                    self.bump();
                    Ok(Expr::Pi)
                }
                other => match Func::from_name(other) {
                    Some(func) => {
                        self.bump();
                        if *self.peek() != Tok::LParen {
                            return self.fail(vec!["'('".into()]);
                        }
                        self.bump();
                        let arg = self.expr()?;
                        self.close()?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => self.fail(operand_tokens()),
                },
            },
            _ => self.fail(operand_tokens()),
        }
    }

    fn close(&mut self) -> Result<(), PrescriptionError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.fail(vec![
                "')'".into(),
                "'+'".into(),
                "'-'".into(),
                "'*'".into(),
                "'/'".into(),
                "'^'".into(),
            ])
        }
    }
}

/// Parses `text` into an expression tree without any domain check.
pub fn parse_expr(text: &str) -> Result<Expr, PrescriptionError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(vec!["operator".into(), "end of input".into()]);
    }
    Ok(e)
}
