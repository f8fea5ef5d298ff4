//! Term language: abstract syntax, parser and canonical printer.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use num_bigint::BigUint;

pub use parser::{parse, ParseError};
pub use printer::print_term;

/// Words that cannot be used as identifiers or labels.
pub const RESERVED: [&str; 5] = ["fun", "let", "rec", "in", "with"];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    IntLit(BigUint),
    Var(String),
    Lam(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// Record literal; labels are pairwise distinct and kept in source order.
    Record(Vec<(String, Term)>),
    Proj(Box<Term>, String),
    LetRec(String, Box<Term>, Box<Term>),
    /// `subject with {label = value}`
    Extend(Box<Term>, String, Box<Term>),
}

impl Term {
    pub fn int(n: u64) -> Term {
        Term::IntLit(BigUint::from(n))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_owned())
    }

    pub fn lam(param: &str, body: Term) -> Term {
        Term::Lam(param.to_owned(), Box::new(body))
    }

    pub fn app(f: Term, arg: Term) -> Term {
        Term::App(Box::new(f), Box::new(arg))
    }

    pub fn record<'a>(fields: impl IntoIterator<Item = (&'a str, Term)>) -> Term {
        Term::Record(fields.into_iter().map(|(l, t)| (l.to_owned(), t)).collect())
    }

    pub fn proj(subject: Term, label: &str) -> Term {
        Term::Proj(Box::new(subject), label.to_owned())
    }

    pub fn let_rec(name: &str, bound: Term, body: Term) -> Term {
        Term::LetRec(name.to_owned(), Box::new(bound), Box::new(body))
    }

    pub fn extend(subject: Term, label: &str, value: Term) -> Term {
        Term::Extend(Box::new(subject), label.to_owned(), Box::new(value))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

/// Whether `s` is a valid identifier: a letter followed by letters, digits or
/// underscores, and not a reserved word.
pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED.contains(&s)
}
