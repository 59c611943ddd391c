//! Text format for polynomial ODE systems.
//!
//! ```text
//! vars: x1 x2
//! x1' = x2          # comment
//! x2' = -x1 + 1/2*x1^2
//! ```
//!
//! Expressions admit integer and rational literals, unary minus, `+ - * / ^`
//! and parentheses. `^` binds tighter than `*` and takes a nonnegative integer
//! literal. Division is only allowed by a nonzero constant. Multiplication must
//! be written out.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::poly::{PolyError, Polynomial, Rational, VariableSpace};

/// `x' = f(x)`: one right-hand side per declared variable, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolySystem {
    vars: VariableSpace,
    rhs: Vec<Polynomial>,
}

impl PolySystem {
    pub fn new(vars: VariableSpace, rhs: Vec<Polynomial>) -> Result<Self, PolyError> {
        if rhs.len() != vars.len() {
            return Err(PolyError::LengthMismatch {
                expected: vars.len(),
                found: rhs.len(),
            });
        }
        if rhs.iter().any(|p| p.space() != &vars) {
            return Err(PolyError::SpaceMismatch);
        }
        Ok(Self { vars, rhs })
    }

    pub fn vars(&self) -> &VariableSpace {
        &self.vars
    }

    pub fn rhs(&self) -> &[Polynomial] {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredVariable(String),
    DuplicateEquation(String),
    MissingEquation(String),
    NonPolynomial(String),
    Declaration(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self {
            position: Position { line, column },
            kind,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.position)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UndeclaredVariable(v) => write!(f, "undeclared variable `{v}`"),
            ParseErrorKind::DuplicateEquation(v) => write!(f, "duplicate equation for `{v}`"),
            ParseErrorKind::MissingEquation(v) => write!(f, "missing equation for `{v}`"),
            ParseErrorKind::NonPolynomial(msg) => write!(f, "not a polynomial: {msg}"),
            ParseErrorKind::Declaration(msg) => write!(f, "bad declaration: {msg}"),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Prime,
    Equals,
    Colon,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Prime => "`'`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Colon => "`:`".into(),
            Tok::End => "end of line".into(),
        }
    }
}

/// Tokens of one line with their 1-based columns. Comments are stripped.
fn lex_line(line: &str, lineno: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i < chars.len() && chars[i].is_alphanumeric() {
                return Err(ParseError::new(
                    lineno,
                    i + 1,
                    ParseErrorKind::Syntax(format!("non-ASCII character `{}` in identifier", chars[i])),
                ));
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(ParseError::new(
                    lineno,
                    i + 1,
                    ParseErrorKind::Syntax("decimal literals are not supported; write a fraction".into()),
                ));
            }
            let s: String = chars[start..i].iter().collect();
            let n = BigInt::parse_bytes(s.as_bytes(), 10).expect("digits");
            out.push((Tok::Int(n), col));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '\'' => Tok::Prime,
            '=' => Tok::Equals,
            ':' => Tok::Colon,
            _ => {
                return Err(ParseError::new(
                    lineno,
                    col,
                    ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                ))
            }
        };
        out.push((tok, col));
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    space: &'a VariableSpace,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, col: usize, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.line, col, kind)
    }

    fn unexpected(&self) -> ParseError {
        self.err(
            self.col(),
            ParseErrorKind::Syntax(format!("unexpected {}", self.peek().describe())),
        )
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc.add(&rhs).expect("same space");
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = acc.sub(&rhs).expect("same space");
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = acc.mul(&rhs).expect("same space");
                }
                Tok::Slash => {
                    let (_, col) = self.bump();
                    let rhs = self.unary()?;
                    if !rhs.is_constant() {
                        return Err(self.err(
                            col,
                            ParseErrorKind::NonPolynomial("division by a non-constant expression".into()),
                        ));
                    }
                    let c = rhs.constant_term();
                    if c.is_zero() {
                        return Err(self.err(col, ParseErrorKind::Syntax("division by zero".into())));
                    }
                    acc = acc.scale(&(Rational::from_integer(1.into()) / c));
                }
                Tok::Ident(_) | Tok::Int(_) | Tok::LParen => {
                    return Err(self.err(
                        self.col(),
                        ParseErrorKind::Syntax("implicit multiplication; write `*`".into()),
                    ))
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (_, caret_col) = self.bump();
        let (tok, col) = self.bump();
        let e = match tok {
            Tok::Int(n) => n,
            Tok::Minus => {
                return Err(self.err(col, ParseErrorKind::NonPolynomial("negative exponent".into())))
            }
            Tok::End => {
                return Err(self.err(col, ParseErrorKind::Syntax("missing exponent after `^`".into())))
            }
            _ => {
                return Err(self.err(
                    col,
                    ParseErrorKind::NonPolynomial("exponent must be a nonnegative integer literal".into()),
                ))
            }
        };
        if *self.peek() == Tok::Caret {
            return Err(self.err(
                self.col(),
                ParseErrorKind::Syntax("chained `^`; use parentheses".into()),
            ));
        }
        let e = e
            .to_u32()
            .filter(|&e| e <= 1024)
            .ok_or_else(|| self.err(caret_col, ParseErrorKind::Syntax("exponent too large".into())))?;
        Ok(base.pow(e))
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Int(n) => Ok(Polynomial::constant(self.space, Rational::from_integer(n))),
            Tok::Ident(name) => {
                if *self.peek() == Tok::Prime {
                    return Err(self.err(
                        self.col(),
                        ParseErrorKind::Syntax("`'` is only allowed on the equation head".into()),
                    ));
                }
                match self.space.index_of(&name) {
                    Some(i) => Ok(Polynomial::var(self.space, i).expect("index from space")),
                    None => Err(self.err(col, ParseErrorKind::UndeclaredVariable(name))),
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (t, c) => Err(self.err(c, ParseErrorKind::Syntax(format!("expected `)`, found {}", t.describe())))),
                }
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                if let Tok::End = tok {
                    return Err(self.err(col, ParseErrorKind::Syntax("expected an expression".into())));
                }
                Err(self.unexpected())
            }
        }
    }
}

fn parse_expr_tokens(
    toks: &[(Tok, usize)],
    line: usize,
    space: &VariableSpace,
) -> Result<Polynomial, ParseError> {
    let mut p = ExprParser {
        toks,
        pos: 0,
        line,
        space,
    };
    let poly = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(poly)
}

/// Parses a single polynomial expression over `space`.
pub fn parse_polynomial(text: &str, space: &VariableSpace) -> Result<Polynomial, ParseError> {
    if text.contains('\n') {
        return Err(ParseError::new(1, 1, ParseErrorKind::Syntax("expression spans several lines".into())));
    }
    let toks = lex_line(text, 1)?;
    parse_expr_tokens(&toks, 1, space)
}

pub fn parse_system(text: &str) -> Result<PolySystem, ParseError> {
    let mut space: Option<VariableSpace> = None;
    let mut decl_line = 0;
    let mut rhs: Vec<Option<Polynomial>> = Vec::new();

    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        let toks = lex_line(line, lineno)?;
        if toks.len() == 1 {
            continue;
        }
        match (&toks[0].0, &toks[1].0) {
            (Tok::Ident(kw), Tok::Colon) if kw == "vars" => {
                if space.is_some() {
                    return Err(ParseError::new(
                        lineno,
                        toks[0].1,
                        ParseErrorKind::Declaration("`vars:` declared twice".into()),
                    ));
                }
                let mut names: Vec<String> = Vec::new();
                for (tok, col) in &toks[2..] {
                    match tok {
                        Tok::Ident(name) => {
                            if names.contains(name) {
                                return Err(ParseError::new(
                                    lineno,
                                    *col,
                                    ParseErrorKind::Declaration(format!("variable `{name}` declared twice")),
                                ));
                            }
                            names.push(name.clone());
                        }
                        Tok::End => {}
                        other => {
                            return Err(ParseError::new(
                                lineno,
                                *col,
                                ParseErrorKind::Syntax(format!("expected a variable name, found {}", other.describe())),
                            ))
                        }
                    }
                }
                if names.is_empty() {
                    return Err(ParseError::new(
                        lineno,
                        toks[0].1,
                        ParseErrorKind::Declaration("no variables declared".into()),
                    ));
                }
                rhs = alloc::vec![None; names.len()];
                space = Some(VariableSpace::new(names).expect("names checked unique"));
                decl_line = lineno;
            }
            (Tok::Ident(name), Tok::Prime) => {
                let Some(space) = space.as_ref() else {
                    return Err(ParseError::new(
                        lineno,
                        toks[0].1,
                        ParseErrorKind::Declaration("equation before the `vars:` line".into()),
                    ));
                };
                let Some(index) = space.index_of(name) else {
                    return Err(ParseError::new(
                        lineno,
                        toks[0].1,
                        ParseErrorKind::UndeclaredVariable(name.clone()),
                    ));
                };
                if toks[2].0 != Tok::Equals {
                    return Err(ParseError::new(
                        lineno,
                        toks[2].1,
                        ParseErrorKind::Syntax(format!("expected `=`, found {}", toks[2].0.describe())),
                    ));
                }
                if rhs[index].is_some() {
                    return Err(ParseError::new(
                        lineno,
                        toks[0].1,
                        ParseErrorKind::DuplicateEquation(name.clone()),
                    ));
                }
                rhs[index] = Some(parse_expr_tokens(&toks[3..], lineno, space)?);
            }
            _ => {
                return Err(ParseError::new(
                    lineno,
                    toks[0].1,
                    ParseErrorKind::Syntax("expected `vars:` or an equation `name' = ...`".into()),
                ))
            }
        }
    }

    let Some(space) = space else {
        let line = text.lines().count().max(1);
        return Err(ParseError::new(
            line,
            1,
            ParseErrorKind::Declaration("missing `vars:` line".into()),
        ));
    };
    let mut out = Vec::with_capacity(rhs.len());
    for (i, r) in rhs.into_iter().enumerate() {
        match r {
            Some(p) => out.push(p),
            None => {
                return Err(ParseError::new(
                    decl_line,
                    1,
                    ParseErrorKind::MissingEquation(space.name(i).unwrap_or_default().to_string()),
                ))
            }
        }
    }
    Ok(PolySystem::new(space, out).expect("built over one space"))
}

pub fn render_system(sys: &PolySystem) -> String {
    let mut s = String::from("vars:");
    for name in sys.vars().names() {
        s.push(' ');
        s.push_str(name);
    }
    s.push('\n');
    for (name, f) in sys.vars().names().iter().zip(sys.rhs()) {
        s.push_str(&format!("{name}' = {f}\n"));
    }
    s
}
