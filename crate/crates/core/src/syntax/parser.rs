use thiserror::Error;

use super::lexer::{tokenize, Spanned, Tok};
use super::Term;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: duplicate label `{label}` in record literal")]
    DuplicateLabel {
        line: usize,
        col: usize,
        label: String,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. } | ParseError::DuplicateLabel { line, col, .. } => {
                (*line, *col)
            }
        }
    }
}

/// Parses one complete term.
pub fn parse(source: &str) -> Result<Term, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0 };
    let term = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(term)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let here = &self.toks[self.pos];
        ParseError::Syntax {
            line: here.line,
            col: here.col,
            message: format!("expected {expected}, found {}", here.tok.describe()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(_) => match self.bump().tok {
                Tok::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.error_here("an identifier")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Let => {
                self.bump();
                self.expect(Tok::Rec)?;
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                let bound = self.term()?;
                self.expect(Tok::In)?;
                let body = self.term()?;
                Ok(Term::LetRec(name, Box::new(bound), Box::new(body)))
            }
            Tok::Fun => {
                self.bump();
                let param = self.ident()?;
                self.expect(Tok::Arrow)?;
                let body = self.term()?;
                Ok(Term::Lam(param, Box::new(body)))
            }
            _ => self.ext(),
        }
    }

    fn ext(&mut self) -> Result<Term, ParseError> {
        let mut t = self.app()?;
        while *self.peek() == Tok::With {
            self.bump();
            self.expect(Tok::LBrace)?;
            let label = self.ident()?;
            self.expect(Tok::Eq)?;
            let value = self.term()?;
            self.expect(Tok::RBrace)?;
            t = Term::Extend(Box::new(t), label, Box::new(value));
        }
        Ok(t)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Int(_) | Tok::Ident(_) | Tok::LBrace | Tok::LParen
        )
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            t = Term::App(Box::new(t), Box::new(arg));
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let mut t = self.prim()?;
        while *self.peek() == Tok::Dot {
            self.bump();
            let label = self.ident()?;
            t = Term::Proj(Box::new(t), label);
        }
        Ok(t)
    }

    fn prim(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Int(_) => match self.bump().tok {
                Tok::Int(n) => Ok(Term::IntLit(n)),
                _ => unreachable!(),
            },
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => self.record(),
            _ => Err(self.error_here("a term")),
        }
    }

    fn record(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut fields: Vec<(String, Term)> = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let at = &self.toks[self.pos];
                let (line, col) = (at.line, at.col);
                let label = self.ident()?;
                if fields.iter().any(|(l, _)| *l == label) {
                    return Err(ParseError::DuplicateLabel { line, col, label });
                }
                self.expect(Tok::Eq)?;
                let value = self.term()?;
                fields.push((label, value));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(Term::Record(fields))
    }
}
