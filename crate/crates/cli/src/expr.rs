//! Set and field expressions used in scene files.
//!
//! ```text
//! set   := term (('+' | '-') term)*
//! term  := 'ball' point num | 'closed_ball' point num | 'box' point point
//!        | 'point' point | 'all' | name | '(' set ')'
//! field := 'constant' num | 'kernel' int point | 'affine' point num
//!        | 'quadratic' num point | 'file' string
//!        | 'max' '(' field ',' field ')' | 'scale' '(' num ',' field ')'
//!        | 'offset' '(' num ',' field ')' | name
//! point := '(' num (',' num)* ')'
//! ```
//!
//! `kernel d o` is `K_{d-2}(x, o)`, `affine a b` is `a·x + b` and
//! `quadratic k c` is `k |x - c|²`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("column {col}: {msg}")]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            _ if c.is_whitespace() => i += 1,
            '(' | ')' | ',' | '+' | '-' => {
                out.push((
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '+' => Tok::Plus,
                        _ => Tok::Minus,
                    },
                    col,
                ));
                i += 1;
            }
            '"' | '\'' => {
                let end = chars[i + 1..]
                    .iter()
                    .position(|&q| q == c)
                    .ok_or(ExprError {
                        col,
                        msg: "unterminated string".into(),
                    })?;
                out.push((Tok::Str(chars[i + 1..i + 1 + end].iter().collect()), col));
                i += end + 2;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let x = text.parse::<f64>().map_err(|_| ExprError {
                    col,
                    msg: format!("bad number `{text}`"),
                })?;
                out.push((Tok::Num(x), col));
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            _ => {
                return Err(ExprError {
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ExprError> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            end_col: src.chars().count() + 1,
        })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let msg = format!("expected {want}, found {t}");
                self.err(msg)
            }
            None => self.err(format!("expected {want}, found end of input")),
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            if self.peek() == Some(&Tok::Plus) {
                self.pos += 1;
            }
            false
        };
        match self.peek().cloned() {
            Some(Tok::Num(x)) => {
                self.pos += 1;
                Ok(if neg { -x } else { x })
            }
            Some(Tok::Ident(s)) if s == "inf" => {
                self.pos += 1;
                Ok(if neg { f64::NEG_INFINITY } else { f64::INFINITY })
            }
            Some(t) => self.err(format!("expected a number, found {t}")),
            None => self.err("expected a number, found end of input"),
        }
    }

    fn point(&mut self) -> Result<Vec<f64>, ExprError> {
        self.expect(Tok::LParen)?;
        let mut v = vec![self.number()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            v.push(self.number()?);
        }
        self.expect(Tok::RParen)?;
        Ok(v)
    }

    fn finish(&self) -> Result<(), ExprError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("unexpected {t} after the expression")),
        }
    }
}

/// Parsed set expression.
#[derive(Clone, Debug, PartialEq)]
pub enum SetExpr {
    Ball { center: Vec<f64>, radius: f64 },
    ClosedBall { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    All,
    Ref(String),
    Union(Box<SetExpr>, Box<SetExpr>),
    Difference(Box<SetExpr>, Box<SetExpr>),
}

impl SetExpr {
    pub fn parse(src: &str) -> Result<SetExpr, ExprError> {
        let mut p = Parser::new(src)?;
        let e = set_expr(&mut p)?;
        p.finish()?;
        Ok(e)
    }

    /// Names of other sets this expression refers to.
    pub fn references(&self) -> Vec<&str> {
        match self {
            SetExpr::Ref(n) => vec![n.as_str()],
            SetExpr::Union(a, b) | SetExpr::Difference(a, b) => {
                let mut v = a.references();
                v.extend(b.references());
                v
            }
            _ => Vec::new(),
        }
    }
}

fn set_expr(p: &mut Parser) -> Result<SetExpr, ExprError> {
    let mut acc = set_term(p)?;
    loop {
        match p.peek() {
            Some(Tok::Plus) => {
                p.pos += 1;
                acc = SetExpr::Union(Box::new(acc), Box::new(set_term(p)?));
            }
            Some(Tok::Minus) => {
                p.pos += 1;
                acc = SetExpr::Difference(Box::new(acc), Box::new(set_term(p)?));
            }
            _ => return Ok(acc),
        }
    }
}

fn set_term(p: &mut Parser) -> Result<SetExpr, ExprError> {
    let col = p.col();
    match p.next() {
        Some(Tok::LParen) => {
            let e = set_expr(p)?;
            p.expect(Tok::RParen)?;
            Ok(e)
        }
        Some(Tok::Ident(word)) => match word.as_str() {
            "ball" => Ok(SetExpr::Ball {
                center: p.point()?,
                radius: p.number()?,
            }),
            "closed_ball" => Ok(SetExpr::ClosedBall {
                center: p.point()?,
                radius: p.number()?,
            }),
            "point" => Ok(SetExpr::ClosedBall {
                center: p.point()?,
                radius: 0.0,
            }),
            "box" => Ok(SetExpr::Box {
                lo: p.point()?,
                hi: p.point()?,
            }),
            "all" => Ok(SetExpr::All),
            _ => Ok(SetExpr::Ref(word)),
        },
        Some(t) => Err(ExprError {
            col,
            msg: format!("expected a set, found {t}"),
        }),
        None => Err(ExprError {
            col,
            msg: "expected a set, found end of input".into(),
        }),
    }
}

/// Parsed field expression.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldExpr {
    Constant(f64),
    Kernel { d: usize, pole: Vec<f64> },
    Affine { a: Vec<f64>, b: f64 },
    Quadratic { k: f64, center: Vec<f64> },
    File(String),
    Max(Box<FieldExpr>, Box<FieldExpr>),
    Scale(f64, Box<FieldExpr>),
    Offset(f64, Box<FieldExpr>),
    Ref(String),
}

impl FieldExpr {
    pub fn parse(src: &str) -> Result<FieldExpr, ExprError> {
        let mut p = Parser::new(src)?;
        let e = field_expr(&mut p)?;
        p.finish()?;
        Ok(e)
    }

    pub fn references(&self) -> Vec<&str> {
        match self {
            FieldExpr::Ref(n) => vec![n.as_str()],
            FieldExpr::Max(a, b) => {
                let mut v = a.references();
                v.extend(b.references());
                v
            }
            FieldExpr::Scale(_, e) | FieldExpr::Offset(_, e) => e.references(),
            _ => Vec::new(),
        }
    }

    /// Points whose dimension must match the grid.
    pub fn points(&self) -> Vec<&[f64]> {
        match self {
            FieldExpr::Kernel { pole, .. } => vec![pole.as_slice()],
            FieldExpr::Affine { a, .. } => vec![a.as_slice()],
            FieldExpr::Quadratic { center, .. } => vec![center.as_slice()],
            FieldExpr::Max(a, b) => {
                let mut v = a.points();
                v.extend(b.points());
                v
            }
            FieldExpr::Scale(_, e) | FieldExpr::Offset(_, e) => e.points(),
            _ => Vec::new(),
        }
    }
}

const PRIMITIVES: &str = "constant, kernel, affine, quadratic, file, max, scale, offset";

fn field_expr(p: &mut Parser) -> Result<FieldExpr, ExprError> {
    let col = p.col();
    let word = match p.next() {
        Some(Tok::Ident(w)) => w,
        Some(t) => {
            return Err(ExprError {
                col,
                msg: format!("expected a field, found {t}"),
            })
        }
        None => {
            return Err(ExprError {
                col,
                msg: "expected a field, found end of input".into(),
            })
        }
    };
    let call = p.peek() == Some(&Tok::LParen);
    let applied = matches!(p.peek(), Some(Tok::LParen | Tok::Num(_) | Tok::Str(_)));
    match word.as_str() {
        "constant" => Ok(FieldExpr::Constant(p.number()?)),
        "kernel" => {
            let dcol = p.col();
            let d = p.number()?;
            if !(d.fract() == 0.0 && (1.0..=3.0).contains(&d)) {
                return Err(ExprError {
                    col: dcol,
                    msg: format!("kernel dimension must be 1, 2 or 3, got {d}"),
                });
            }
            Ok(FieldExpr::Kernel {
                d: d as usize,
                pole: p.point()?,
            })
        }
        "affine" => Ok(FieldExpr::Affine {
            a: p.point()?,
            b: p.number()?,
        }),
        "quadratic" => Ok(FieldExpr::Quadratic {
            k: p.number()?,
            center: p.point()?,
        }),
        "file" => match p.next() {
            Some(Tok::Str(s)) => Ok(FieldExpr::File(s)),
            _ => Err(ExprError {
                col,
                msg: "`file` needs a quoted path".into(),
            }),
        },
        "max" if call => {
            p.expect(Tok::LParen)?;
            let a = field_expr(p)?;
            p.expect(Tok::Comma)?;
            let b = field_expr(p)?;
            p.expect(Tok::RParen)?;
            Ok(FieldExpr::Max(Box::new(a), Box::new(b)))
        }
        "scale" | "offset" if call => {
            p.expect(Tok::LParen)?;
            let c = p.number()?;
            p.expect(Tok::Comma)?;
            let e = Box::new(field_expr(p)?);
            p.expect(Tok::RParen)?;
            Ok(if word == "scale" {
                FieldExpr::Scale(c, e)
            } else {
                FieldExpr::Offset(c, e)
            })
        }
        _ if applied => Err(ExprError {
            col,
            msg: format!("unknown field primitive `{word}` (known: {PRIMITIVES})"),
        }),
        _ => Ok(FieldExpr::Ref(word)),
    }
}
