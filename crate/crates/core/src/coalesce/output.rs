//! User-facing types and their surface syntax.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::types::Label;

/// Coalesced type. Variables are identified by the id of the inference
/// variable they came from, or by a fresh id for recursive binders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputType {
    Int,
    Fun(Box<OutputType>, Box<OutputType>),
    Rec(ORecord),
    Var(u32),
    Top,
    Bot,
    Union(Vec<OutputType>),
    Inter(Vec<OutputType>),
    Mu(u32, Box<OutputType>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ORecord {
    pub fields: BTreeMap<Label, OutputField>,
    pub tail: OTail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OTail {
    Closed,
    Var(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputField {
    Pre(OutputType),
    Abs,
    Var(u32),
}

impl OutputType {
    pub fn fun(domain: OutputType, codomain: OutputType) -> OutputType {
        OutputType::Fun(Box::new(domain), Box::new(codomain))
    }

    /// Whether type variable (or binder) `id` occurs anywhere in `self`.
    pub fn mentions(&self, id: u32) -> bool {
        match self {
            OutputType::Int | OutputType::Top | OutputType::Bot => false,
            OutputType::Var(v) => *v == id,
            OutputType::Fun(a, b) => a.mentions(id) || b.mentions(id),
            OutputType::Rec(r) => r.fields.values().any(|f| match f {
                OutputField::Pre(t) => t.mentions(id),
                OutputField::Abs | OutputField::Var(_) => false,
            }),
            OutputType::Union(ts) | OutputType::Inter(ts) => ts.iter().any(|t| t.mentions(id)),
            OutputType::Mu(_, body) => body.mentions(id),
        }
    }
}

/// Assigns display names to variables in order of first appearance.
///
/// Type variables and recursive binders print as `'a`, `'b`, ..., `'z`,
/// `'aa`, ...; row variables as `'r0`, `'r1`, ...; field variables as `'f0`,
/// `'f1`, .... A namer can be shared across several printed types so that the
/// same variable keeps one name.
#[derive(Clone, Debug, Default)]
pub struct Namer {
    types: HashMap<u32, String>,
    rows: HashMap<u32, String>,
    fields: HashMap<u32, String>,
}

impl Namer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn type_name(&mut self, id: u32) -> String {
        let n = self.types.len();
        self.types
            .entry(id)
            .or_insert_with(|| format!("'{}", letters(n)))
            .clone()
    }

    pub fn row_name(&mut self, id: u32) -> String {
        let n = self.rows.len();
        self.rows
            .entry(id)
            .or_insert_with(|| format!("'r{n}"))
            .clone()
    }

    pub fn field_name(&mut self, id: u32) -> String {
        let n = self.fields.len();
        self.fields
            .entry(id)
            .or_insert_with(|| format!("'f{n}"))
            .clone()
    }
}

// a, b, ..., z, aa, ab, ...
fn letters(mut n: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (n % 26) as u8);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

const MU: u8 = 0;
const ARROW: u8 = 1;
const UNION: u8 = 2;
const INTER: u8 = 3;
const ATOM: u8 = 4;

/// Renders `t` with fresh variable names.
pub fn print_type(t: &OutputType) -> String {
    print_type_with(t, &mut Namer::new())
}

/// Renders `t`, reusing and extending the names in `namer`.
pub fn print_type_with(t: &OutputType, namer: &mut Namer) -> String {
    let mut out = String::new();
    write_type(&mut out, t, MU, namer);
    out
}

/// Renders a bare row as a record type, e.g. `{x: int ; 'r0}`.
pub fn print_record_with(r: &ORecord, namer: &mut Namer) -> String {
    let mut out = String::new();
    write_record(&mut out, r, namer);
    out
}

fn level(t: &OutputType) -> u8 {
    match t {
        OutputType::Mu(..) => MU,
        OutputType::Fun(..) => ARROW,
        OutputType::Union(ts) if ts.len() > 1 => UNION,
        OutputType::Inter(ts) if ts.len() > 1 => INTER,
        _ => ATOM,
    }
}

fn write_type(out: &mut String, t: &OutputType, ctx: u8, namer: &mut Namer) {
    let parens = level(t) < ctx;
    if parens {
        out.push('(');
    }
    match t {
        OutputType::Int => out.push_str("int"),
        OutputType::Top => out.push_str("top"),
        OutputType::Bot => out.push_str("bot"),
        OutputType::Var(v) => out.push_str(&namer.type_name(*v)),
        OutputType::Fun(a, b) => {
            write_type(out, a, UNION, namer);
            out.push_str(" -> ");
            write_type(out, b, ARROW, namer);
        }
        OutputType::Rec(r) => write_record(out, r, namer),
        OutputType::Union(ts) => write_joined(out, ts, " \\/ ", "bot", INTER, namer),
        OutputType::Inter(ts) => write_joined(out, ts, " /\\ ", "top", ATOM, namer),
        OutputType::Mu(v, body) => {
            let name = namer.type_name(*v);
            let _ = write!(out, "mu {name}. ");
            write_type(out, body, MU, namer);
        }
    }
    if parens {
        out.push(')');
    }
}

fn write_joined(
    out: &mut String,
    ts: &[OutputType],
    sep: &str,
    empty: &str,
    ctx: u8,
    namer: &mut Namer,
) {
    match ts {
        [] => out.push_str(empty),
        [t] => write_type(out, t, ATOM, namer),
        _ => {
            for (i, t) in ts.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_type(out, t, ctx, namer);
            }
        }
    }
}

fn write_record(out: &mut String, r: &ORecord, namer: &mut Namer) {
    out.push('{');
    for (i, (l, f)) in r.fields.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(l);
        out.push_str(": ");
        match f {
            OutputField::Pre(t) => write_type(out, t, MU, namer),
            OutputField::Abs => out.push_str("abs"),
            OutputField::Var(v) => out.push_str(&namer.field_name(*v)),
        }
    }
    if let OTail::Var(v) = r.tail {
        if !r.fields.is_empty() {
            out.push(' ');
        }
        out.push_str("; ");
        out.push_str(&namer.row_name(v));
    }
    out.push('}');
}

/// Renames every variable token (`'a`, `'r3`, `'f12`, ...) in `text` by order
/// of first appearance, per variable class. Two texts that differ only in
/// variable numbering normalize to the same string.
pub fn normalize_var_names(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut namer = Namer::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '\'' && chars.get(i + 1).is_some_and(|c| c.is_ascii_lowercase()) {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                j += 1;
            }
            let token: String = chars[start..j].iter().collect();
            let next = ids.len() as u32;
            let id = *ids.entry(token.clone()).or_insert(next);
            let is_numbered = |prefix: char| {
                token.starts_with(prefix)
                    && token.len() > 1
                    && token[1..].chars().all(|c| c.is_ascii_digit())
            };
            let name = if is_numbered('r') {
                namer.row_name(id)
            } else if is_numbered('f') {
                namer.field_name(id)
            } else {
                namer.type_name(id)
            };
            out.push_str(&name);
            i = j;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}
