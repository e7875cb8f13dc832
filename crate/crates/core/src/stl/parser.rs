//! Recursive-descent parser for the formula DSL.
//!
//! ```text
//! formula  := or
//! or       := and { "|" and }
//! and      := until { "&" until }
//! until    := unary { "U" interval? unary }
//! unary    := "!" ident | ("G"|"F") interval? unary | ident | "(" formula ")"
//! interval := "[" number "," number "]"
//! ```

use super::{Formula, Interval};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("negation at byte {pos} is applied to a non-atom (formulas must be in negation normal form)")]
    NnfViolation { pos: usize },
    #[error("invalid interval [{a}, {b}] at byte {pos}: need 0 <= a <= b")]
    NegativeInterval { pos: usize, a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bang,
    Amp,
    Pipe,
    Globally,
    Finally,
    Until,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Globally => "`G`".into(),
            Tok::Finally => "`F`".into(),
            Tok::Until => "`U`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBracket),
            b']' => Some(Tok::RBracket),
            b',' => Some(Tok::Comma),
            b'!' => Some(Tok::Bang),
            b'&' => Some(Tok::Amp),
            b'|' => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(t) = single {
            out.push((start, t));
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let tok = match word {
                "G" => Tok::Globally,
                "F" => Tok::Finally,
                "U" => Tok::Until,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((start, tok));
        } else if c.is_ascii_digit() || c == b'-' || c == b'.' {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let lit = &text[start..i];
            let value = lit.parse::<f64>().map_err(|_| ParseError::Syntax {
                pos: start,
                expected: vec!["number"],
                found: format!("`{lit}`"),
            })?;
            out.push((start, Tok::Num(value)));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax {
                pos: start,
                expected: vec!["token"],
                found: format!("character `{ch}`"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec![name]))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.conjunction()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::Or(items)
        })
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.until()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            items.push(self.until()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::And(items)
        })
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Until {
            self.bump();
            let interval = self.interval_opt()?;
            let rhs = self.unary()?;
            lhs = Formula::Until(interval, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(name) => {
                        self.bump();
                        Ok(Formula::NegAtom(name))
                    }
                    Tok::LParen | Tok::Bang | Tok::Globally | Tok::Finally => {
                        Err(ParseError::NnfViolation { pos })
                    }
                    _ => Err(self.error(vec!["identifier"])),
                }
            }
            Tok::Globally | Tok::Finally => {
                let always = matches!(self.bump(), Tok::Globally);
                let interval = self.interval_opt()?;
                let child = Box::new(self.unary()?);
                Ok(if always {
                    Formula::Always(interval, child)
                } else {
                    Formula::Eventually(interval, child)
                })
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error(vec!["`!`", "`G`", "`F`", "identifier", "`(`"])),
        }
    }

    fn interval_opt(&mut self) -> Result<Option<Interval>, ParseError> {
        if *self.peek() != Tok::LBracket {
            return Ok(None);
        }
        let pos = self.pos();
        self.bump();
        let a = self.number()?;
        self.expect(Tok::Comma, "`,`")?;
        let b = self.number()?;
        self.expect(Tok::RBracket, "`]`")?;
        Interval::new(a, b)
            .map(Some)
            .map_err(|_| ParseError::NegativeInterval { pos, a, b })
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.error(vec!["number"])),
        }
    }
}

/// Parse a formula from the DSL.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error(vec!["`&`", "`|`", "`U`", "end of input"]));
    }
    Ok(f)
}
