//! Expression grammar and system-file ingestion.
//!
//! The grammar is infix `+ - * / ^` with the usual precedence (`^` binds
//! tightest and is right-associative, unary minus binds below `^`),
//! parentheses, the five kernel calls `exp sin cos ln sqrt`, and numeric
//! literals as exact rationals. Derivatives use prime suffixes on coordinate
//! identifiers: `x1'` is the velocity, `x1''` the acceleration; third and
//! higher orders are rejected in input. Division `a/b` parses as `a*b^(-1)`,
//! so `1/2` is the exact rational one half.
//!
//! System files are UTF-8 JSON documents with fields `n`, `coordinates`,
//! optional `parameters`, and exactly one of `equations` or `lagrangian`.
//! Unknown fields are schema errors.

use crate::expr::{Expr, KernelFn, Variable};
use crate::helmholtz::OdeSystem;
use num::{BigInt, BigRational, One};
use serde::Deserialize;
use thiserror::Error;

/// Parse and schema errors, positioned where that makes sense.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("`{name}` at byte {position} carries more than two primes; input is limited to second order")]
    TooManyPrimes { position: usize, name: String },
    #[error("kernel `{function}` at byte {position} expects exactly one argument, found {found}")]
    Arity {
        position: usize,
        function: String,
        found: usize,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("equation {index}: {source}")]
    Equation {
        index: usize,
        #[source]
        source: Box<ParseError>,
    },
    #[error("lagrangian: {source}")]
    Lagrangian {
        #[source]
        source: Box<ParseError>,
    },
}

/// Identifier context a textual expression is parsed against.
#[derive(Debug, Clone)]
pub struct ParseContext {
    coordinates: Vec<String>,
    parameters: Vec<String>,
}

const RESERVED: &[&str] = &["t", "exp", "sin", "cos", "ln", "sqrt"];

fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ParseContext {
    /// Validates identifier syntax, uniqueness, disjointness and the
    /// reserved names (`t` and the kernel names).
    pub fn new(coordinates: Vec<String>, parameters: Vec<String>) -> Result<Self, ParseError> {
        let mut seen = std::collections::BTreeSet::new();
        for (role, list) in [("coordinate", &coordinates), ("parameter", &parameters)] {
            for name in list {
                if !valid_identifier(name) {
                    return Err(ParseError::Schema(format!(
                        "{role} `{name}` is not a valid identifier"
                    )));
                }
                if RESERVED.contains(&name.as_str()) {
                    return Err(ParseError::Schema(format!(
                        "{role} `{name}` shadows a reserved name"
                    )));
                }
                if !seen.insert(name.clone()) {
                    return Err(ParseError::Schema(format!(
                        "identifier `{name}` declared more than once"
                    )));
                }
            }
        }
        Ok(ParseContext {
            coordinates,
            parameters,
        })
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    fn resolve(&self, name: &str, primes: u32, position: usize) -> Result<Variable, ParseError> {
        if name == "t" {
            if primes > 0 {
                return Err(ParseError::Syntax {
                    position,
                    message: "the time variable has no prime form".into(),
                });
            }
            return Ok(Variable::Time);
        }
        if let Some(idx) = self.coordinates.iter().position(|c| c == name) {
            let i = (idx + 1) as u32;
            return match primes {
                0 => Ok(Variable::Coord(i)),
                1 => Ok(Variable::Vel(i)),
                2 => Ok(Variable::Accel(i)),
                _ => Err(ParseError::TooManyPrimes {
                    position,
                    name: name.to_string(),
                }),
            };
        }
        if self.parameters.iter().any(|p| p == name) {
            if primes > 0 {
                return Err(ParseError::Syntax {
                    position,
                    message: format!("parameter `{name}` cannot carry a prime"),
                });
            }
            return Ok(Variable::param(name));
        }
        Err(ParseError::UnknownIdentifier {
            position,
            name: name.to_string(),
        })
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident { name: String, primes: u32 },
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                out.push(Spanned { tok: Tok::Plus, pos });
                i += 1;
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, pos });
                i += 1;
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, pos });
                i += 1;
            }
            '/' => {
                out.push(Spanned { tok: Tok::Slash, pos });
                i += 1;
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, pos });
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, pos });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, pos });
                i += 1;
            }
            ',' => {
                out.push(Spanned { tok: Tok::Comma, pos });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut denom = BigInt::one();
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == frac_start {
                        return Err(ParseError::Syntax {
                            position: i,
                            message: "expected digits after decimal point".into(),
                        });
                    }
                    denom = BigInt::from(10u32).pow((i - frac_start) as u32);
                }
                let digits: String = text[start..i].chars().filter(|c| *c != '.').collect();
                let numer: BigInt = digits.parse().expect("digit string");
                out.push(Spanned {
                    tok: Tok::Num(BigRational::new(numer, denom)),
                    pos,
                });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = text[start..i].to_string();
                let mut primes = 0;
                while i < bytes.len() && bytes[i] == b'\'' {
                    primes += 1;
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident { name, primes },
                    pos,
                });
            }
            other => {
                return Err(ParseError::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        pos: bytes.len(),
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Recursive descent parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: Vec<Spanned>,
    cursor: usize,
    ctx: &'a ParseContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.cursor]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.cursor].clone();
        if self.cursor < self.toks.len() - 1 {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let next = self.peek();
        if next.tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                position: next.pos,
                message: format!("expected {what}"),
            })
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    acc = acc / self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            let caret_pos = self.peek().pos;
            self.bump();
            // right-associative; the exponent may be a signed parenthesized
            // expression but must reduce to a rational constant
            let exp_expr = self.unary()?;
            let exp = match exp_expr.normalize() {
                Expr::Const(c) => c,
                _ => {
                    return Err(ParseError::Syntax {
                        position: caret_pos,
                        message: "exponent must be a rational constant".into(),
                    })
                }
            };
            return Ok(Expr::Power(Box::new(base), exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let spanned = self.bump();
        match spanned.tok {
            Tok::Num(c) => Ok(Expr::Const(c)),
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident { name, primes } => {
                if let Some(kernel) = KernelFn::from_name(&name) {
                    if primes > 0 {
                        return Err(ParseError::Syntax {
                            position: spanned.pos,
                            message: format!("function `{name}` cannot carry a prime"),
                        });
                    }
                    return self.kernel_call(kernel, &name, spanned.pos);
                }
                let var = self.ctx.resolve(&name, primes, spanned.pos)?;
                Ok(Expr::Var(var))
            }
            Tok::Eof => Err(ParseError::Syntax {
                position: spanned.pos,
                message: "unexpected end of input".into(),
            }),
            _ => Err(ParseError::Syntax {
                position: spanned.pos,
                message: "expected a number, identifier or `(`".into(),
            }),
        }
    }

    fn kernel_call(
        &mut self,
        kernel: KernelFn,
        name: &str,
        pos: usize,
    ) -> Result<Expr, ParseError> {
        if self.peek().tok != Tok::LParen {
            return Err(ParseError::Arity {
                position: pos,
                function: name.to_string(),
                found: 0,
            });
        }
        self.bump();
        if self.peek().tok == Tok::RParen {
            return Err(ParseError::Arity {
                position: pos,
                function: name.to_string(),
                found: 0,
            });
        }
        let mut args = vec![self.sum()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            args.push(self.sum()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        if args.len() != 1 {
            return Err(ParseError::Arity {
                position: pos,
                function: name.to_string(),
                found: args.len(),
            });
        }
        Ok(Expr::Kernel(kernel, Box::new(args.pop().expect("one arg"))))
    }
}

/// Parse a single expression against a declared identifier context.
/// The result is normalized.
pub fn parse_expression(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        cursor: 0,
        ctx,
    };
    let expr = parser.sum()?;
    let trailing = parser.peek();
    if trailing.tok != Tok::Eof {
        return Err(ParseError::Syntax {
            position: trailing.pos,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr.normalize())
}

// ---------------------------------------------------------------------------
// System files
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFileRaw {
    n: usize,
    coordinates: Vec<String>,
    #[serde(default)]
    parameters: Vec<String>,
    #[serde(default)]
    equations: Option<Vec<String>>,
    #[serde(default)]
    lagrangian: Option<String>,
}

/// A loaded system file: either `n` equations of motion, or a Lagrangian to
/// be round-tripped through the Euler–Lagrange operator.
#[derive(Debug, Clone)]
pub enum SystemDocument {
    Equations(OdeSystem),
    Lagrangian {
        context: ParseContext,
        lagrangian: Expr,
    },
}

/// Parse and validate a JSON system document.
pub fn load_system(text: &str) -> Result<SystemDocument, ParseError> {
    let raw: SystemFileRaw =
        serde_json::from_str(text).map_err(|e| ParseError::Schema(e.to_string()))?;
    if raw.n == 0 {
        return Err(ParseError::Schema("`n` must be at least 1".into()));
    }
    if raw.coordinates.len() != raw.n {
        return Err(ParseError::Schema(format!(
            "`coordinates` has {} entries but n = {}",
            raw.coordinates.len(),
            raw.n
        )));
    }
    let ctx = ParseContext::new(raw.coordinates, raw.parameters)?;
    match (raw.equations, raw.lagrangian) {
        (Some(equations), None) => {
            if equations.len() != raw.n {
                return Err(ParseError::Schema(format!(
                    "`equations` has {} entries but n = {}",
                    equations.len(),
                    raw.n
                )));
            }
            let mut parsed = Vec::with_capacity(equations.len());
            for (idx, eq) in equations.iter().enumerate() {
                let expr = parse_expression(eq, &ctx).map_err(|e| ParseError::Equation {
                    index: idx + 1,
                    source: Box::new(e),
                })?;
                parsed.push(expr);
            }
            let system = OdeSystem::new(
                ctx.coordinates.clone(),
                ctx.parameters.clone(),
                parsed,
            )
            .map_err(|e| ParseError::Schema(e.to_string()))?;
            Ok(SystemDocument::Equations(system))
        }
        (None, Some(lagrangian)) => {
            let expr = parse_expression(&lagrangian, &ctx).map_err(|e| ParseError::Lagrangian {
                source: Box::new(e),
            })?;
            Ok(SystemDocument::Lagrangian {
                context: ctx,
                lagrangian: expr,
            })
        }
        (Some(_), Some(_)) => Err(ParseError::Schema(
            "provide exactly one of `equations` or `lagrangian`, not both".into(),
        )),
        (None, None) => Err(ParseError::Schema(
            "one of `equations` or `lagrangian` is required".into(),
        )),
    }
}
