use super::{Coalition, Formula};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
    LAngle,
    RAngle,
    LBrack,
    RBrack,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LAngle => "`<<`".into(),
            Tok::RAngle => "`>>`".into(),
            Tok::LBrack => "`[[`".into(),
            Tok::RBrack => "`]]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax { position, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = |t: u8| bytes.get(i + 1) == Some(&t);
        let (tok, len) = match c {
            b'!' | b'~' => (Tok::Not, 1),
            b'&' if two(b'&') => (Tok::And, 2),
            b'&' => (Tok::And, 1),
            b'|' if two(b'|') => (Tok::Or, 2),
            b'|' => (Tok::Or, 1),
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b',' => (Tok::Comma, 1),
            b'<' if two(b'<') => (Tok::LAngle, 2),
            b'>' if two(b'>') => (Tok::RAngle, 2),
            b'[' if two(b'[') => (Tok::LBrack, 2),
            b']' if two(b']') => (Tok::RBrack, 2),
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = i;
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                (Tok::Ident(src[start..j].to_string()), j - start)
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((i, tok));
        i += len;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
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

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.temporal()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.temporal()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn temporal(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        if self.at_keyword("U") {
            self.bump();
            let rhs = self.temporal()?;
            Ok(Formula::until(lhs, rhs))
        } else if self.at_keyword("R") {
            self.bump();
            let rhs = self.temporal()?;
            Ok(Formula::release(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn coalition(&mut self, close: Tok) -> Result<Coalition> {
        let mut agents = Vec::new();
        if *self.peek() != close {
            loop {
                let at = self.offset();
                match self.bump() {
                    Tok::Ident(a) => agents.push(a),
                    t => return Err(syntax(at, format!("expected agent name, found {}", t.describe()))),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(close)?;
        Ok(Coalition::new(agents))
    }

    fn unary(&mut self) -> Result<Formula> {
        let at = self.offset();
        match self.bump() {
            Tok::Not => Ok(Formula::not(self.unary()?)),
            Tok::LAngle => {
                let c = self.coalition(Tok::RAngle)?;
                Ok(Formula::exists(c, self.unary()?))
            }
            Tok::LBrack => {
                let c = self.coalition(Tok::RBrack)?;
                Ok(Formula::forall(c, self.unary()?))
            }
            Tok::LParen => {
                let inner = self.or()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(s) => match s.as_str() {
                "X" => Ok(Formula::next(self.unary()?)),
                "F" => Ok(Formula::eventually(self.unary()?)),
                "G" => Ok(Formula::globally(self.unary()?)),
                "U" | "R" => Err(syntax(at, format!("`{s}` needs a left operand"))),
                _ => Ok(Formula::Atom(s)),
            },
            t => Err(syntax(at, format!("expected a formula, found {}", t.describe()))),
        }
    }
}

/// Parses the concrete syntax described in `docs/grammar.md`.
pub fn parse(src: &str) -> Result<Formula> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.or()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}
