use super::{Behavior, Formula, PredDef, Sid, SidError};
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

/// Errors reported by [`parse_sid`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    Invalid(SidError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, col, message } => {
                write!(f, "syntax error at {line}:{col}: {message}")
            }
            ParseError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ParseError {}

impl From<SidError> for ParseError {
    fn from(e: SidError) -> Self {
        ParseError::Invalid(e)
    }
}

const KEYWORDS: &[&str] = &[
    "behavior", "ports", "states", "trans", "pred", "rule", "exists", "emp", "comp", "state",
    "compstate", "inter",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Star,
    Eq,
    Neq,
    Minus,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Dot => "`.`",
            Tok::Star => "`*`",
            Tok::Eq => "`=`",
            Tok::Neq => "`!=`",
            Tok::Minus => "`-`",
            Tok::Arrow => "`->`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => adv(1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '{' | '}' | '(' | ')' | ',' | ';' | '.' | '*' | '=' => {
                let t = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '.' => Tok::Dot,
                    '*' => Tok::Star,
                    _ => Tok::Eq,
                };
                out.push((t, l0, c0));
                adv(1, &mut i, &mut col);
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                out.push((Tok::Neq, l0, c0));
                adv(2, &mut i, &mut col);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, l0, c0));
                adv(2, &mut i, &mut col);
            }
            '-' => {
                out.push((Tok::Minus, l0, c0));
                adv(1, &mut i, &mut col);
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                col += i - start;
                out.push((Tok::Ident(chars[start..i].iter().collect()), l0, c0));
            }
            other => {
                return Err(ParseError::Syntax {
                    line: l0,
                    col: c0,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (_, line, col) = self.toks[self.at];
        Err(ParseError::Syntax {
            line,
            col,
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::Ident(s) => self.err(format!("keyword `{s}` cannot be used as a name")),
            t => self.err(format!("expected a name, found {t}")),
        }
    }

    /// `name ("," name)*`, possibly empty, up to `close`.
    fn name_list(&mut self, close: Tok) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        if *self.peek() == close {
            return Ok(out);
        }
        out.push(self.name()?);
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn file(&mut self) -> Result<Sid, ParseError> {
        let mut sid = Sid::default();
        if self.is_kw("behavior") {
            sid.behavior = self.behavior()?;
        }
        while self.is_kw("pred") {
            sid.preds.push(self.pred()?);
        }
        if *self.peek() != Tok::Eof {
            return self.err(format!("expected `pred` or end of input, found {}", self.peek()));
        }
        Ok(sid)
    }

    fn behavior(&mut self) -> Result<Behavior, ParseError> {
        self.keyword("behavior")?;
        self.expect(Tok::LBrace)?;
        let mut b = Behavior::default();
        self.keyword("ports")?;
        self.expect(Tok::LBrace)?;
        b.ports = self.name_list(Tok::RBrace)?;
        self.expect(Tok::RBrace)?;
        self.keyword("states")?;
        self.expect(Tok::LBrace)?;
        b.states = self.name_list(Tok::RBrace)?;
        self.expect(Tok::RBrace)?;
        if self.is_kw("trans") {
            self.bump();
            self.expect(Tok::LBrace)?;
            while *self.peek() != Tok::RBrace {
                let from = self.name()?;
                self.expect(Tok::Minus)?;
                let port = self.name()?;
                self.expect(Tok::Arrow)?;
                let to = self.name()?;
                self.expect(Tok::Semi)?;
                b.transitions.push((from, port, to));
            }
            self.expect(Tok::RBrace)?;
        }
        self.expect(Tok::RBrace)?;
        Ok(b)
    }

    fn pred(&mut self) -> Result<PredDef, ParseError> {
        self.keyword("pred")?;
        let name = self.name()?;
        self.expect(Tok::LParen)?;
        let params = self.name_list(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut rules = Vec::new();
        while self.is_kw("rule") {
            self.bump();
            rules.push(self.formula()?);
            self.expect(Tok::Semi)?;
        }
        self.expect(Tok::RBrace)?;
        Ok(PredDef { name, params, rules })
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.is_kw("exists") {
            self.bump();
            let mut vars = vec![self.name()?];
            while *self.peek() != Tok::Dot {
                vars.push(self.name()?);
            }
            self.expect(Tok::Dot)?;
            let body = self.formula()?;
            return Ok(Formula::exists(vars, body));
        }
        let mut items = vec![self.term()?];
        while *self.peek() == Tok::Star {
            self.bump();
            if self.is_kw("exists") {
                // A binder in operand position scopes over the remaining operands.
                items.push(self.formula()?);
                break;
            }
            items.push(self.term()?);
        }
        Ok(Formula::sep(items))
    }

    fn term(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) => match s.as_str() {
                "emp" => {
                    self.bump();
                    Ok(Formula::Emp)
                }
                "comp" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let x = self.name()?;
                    self.expect(Tok::RParen)?;
                    Ok(Formula::Comp(x))
                }
                "state" | "compstate" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let x = self.name()?;
                    self.expect(Tok::Comma)?;
                    let q = self.name()?;
                    self.expect(Tok::RParen)?;
                    Ok(if s == "state" {
                        Formula::State(x, q)
                    } else {
                        Formula::Sep(vec![Formula::Comp(x.clone()), Formula::State(x, q)])
                    })
                }
                "inter" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let mut pairs = Vec::new();
                    loop {
                        let x = self.name()?;
                        self.expect(Tok::Dot)?;
                        let p = self.name()?;
                        pairs.push((x, p));
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Formula::Inter(pairs))
                }
                "exists" => self.formula(),
                _ => {
                    let x = self.name()?;
                    match self.peek() {
                        Tok::Eq => {
                            self.bump();
                            Ok(Formula::Eq(x, self.name()?))
                        }
                        Tok::Neq => {
                            self.bump();
                            Ok(Formula::Neq(x, self.name()?))
                        }
                        Tok::LParen => {
                            self.bump();
                            let args = self.name_list(Tok::RParen)?;
                            self.expect(Tok::RParen)?;
                            Ok(Formula::Pred(x, args))
                        }
                        t => self.err(format!("expected `=`, `!=` or `(` after `{x}`, found {t}")),
                    }
                }
            },
            t => self.err(format!("expected a formula, found {t}")),
        }
    }
}

/// Parses and validates a SID file.
///
/// Besides the documented grammar, the parser accepts empty port/state
/// lists, predicates with no rule and unary interaction atoms
/// `inter(x.p)`, so that every SID the printer emits parses back.
pub fn parse_sid(text: &str) -> Result<Sid, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let sid = p.file()?;
    sid.validate()?;
    Ok(sid)
}

/// Parses a single formula (no validation against a SID).
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("trailing input at {}", p.peek()));
    }
    Ok(f)
}
