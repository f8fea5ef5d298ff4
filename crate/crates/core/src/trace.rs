//! Derivation traces: one event per `typeTerm` / `constrain` call, expansion
//! and result, rendered as an indented log.

use crate::coalesce::{
    print_record_with, print_type_with, raw_field, raw_row, raw_type, Namer, OutputField,
};
use crate::syntax::{print_term, Term};
use crate::types::{Field, FieldVar, Row, RowVar, SimpleType, Tail, VarStore};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub depth: usize,
    pub kind: TraceKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceKind {
    TypeTerm(String),
    Constrain(String, String),
    Expand {
        row: String,
        label: String,
        field: String,
        rest: String,
    },
    Result(String),
}

/// One line per event, each prefixed by `depth` copies of `| `.
pub fn format_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        for _ in 0..e.depth {
            out.push_str("| ");
        }
        match &e.kind {
            TraceKind::TypeTerm(t) => {
                out.push_str("typeTerm ");
                out.push_str(t);
            }
            TraceKind::Constrain(l, r) => {
                out.push_str("constrain ");
                out.push_str(l);
                out.push_str(" <= ");
                out.push_str(r);
            }
            TraceKind::Expand {
                row,
                label,
                field,
                rest,
            } => {
                out.push_str(&format!(
                    "expand {row} +{label} ~> {{{label}: {field} ; {rest}}}"
                ));
            }
            TraceKind::Result(t) => {
                out.push_str("= ");
                out.push_str(t);
            }
        }
        out.push('\n');
    }
    out
}

/// Collects events during one inference run. Variables are named on first
/// appearance and keep their names for the rest of the trace.
#[derive(Debug, Default)]
pub(crate) struct Tracer {
    events: Vec<TraceEvent>,
    namer: Namer,
}

impl Tracer {
    fn push(&mut self, depth: usize, kind: TraceKind) {
        self.events.push(TraceEvent { depth, kind });
    }

    pub(crate) fn take(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.events)
    }

    pub(crate) fn term(&mut self, depth: usize, t: &Term) {
        self.push(depth, TraceKind::TypeTerm(print_term(t)));
    }

    fn ty(&mut self, store: &VarStore, t: &SimpleType) -> String {
        print_type_with(&raw_type(store, t), &mut self.namer)
    }

    fn field(&mut self, store: &VarStore, f: &Field) -> String {
        match raw_field(store, f) {
            OutputField::Pre(t) => print_type_with(&t, &mut self.namer),
            OutputField::Abs => "abs".to_owned(),
            OutputField::Var(v) => self.namer.field_name(v),
        }
    }

    fn tail(&mut self, t: Tail) -> String {
        match t {
            Tail::Closed => "abs".to_owned(),
            Tail::Var(v) => self.namer.row_name(v.id()),
        }
    }

    pub(crate) fn constrain(
        &mut self,
        depth: usize,
        store: &VarStore,
        l: &SimpleType,
        r: &SimpleType,
    ) {
        let (l, r) = (self.ty(store, l), self.ty(store, r));
        self.push(depth, TraceKind::Constrain(l, r));
    }

    pub(crate) fn constrain_fields(
        &mut self,
        depth: usize,
        store: &VarStore,
        l: &Field,
        r: &Field,
    ) {
        let (l, r) = (self.field(store, l), self.field(store, r));
        self.push(depth, TraceKind::Constrain(l, r));
    }

    pub(crate) fn constrain_tails(&mut self, depth: usize, l: Tail, r: Tail) {
        let (l, r) = (self.tail(l), self.tail(r));
        self.push(depth, TraceKind::Constrain(l, r));
    }

    /// Bare rows, e.g. bound propagation between row variables.
    pub(crate) fn constrain_rows(&mut self, depth: usize, store: &VarStore, l: &Row, r: &Row) {
        let l = print_record_with(&raw_row(store, l), &mut self.namer);
        let r = print_record_with(&raw_row(store, r), &mut self.namer);
        self.push(depth, TraceKind::Constrain(l, r));
    }

    pub(crate) fn expand(
        &mut self,
        depth: usize,
        row: RowVar,
        label: &str,
        field: FieldVar,
        rest: RowVar,
    ) {
        let kind = TraceKind::Expand {
            row: self.namer.row_name(row.id()),
            label: label.to_owned(),
            field: self.namer.field_name(field.id()),
            rest: self.namer.row_name(rest.id()),
        };
        self.push(depth, kind);
    }

    pub(crate) fn result(&mut self, depth: usize, store: &VarStore, t: &SimpleType) {
        let text = self.ty(store, t);
        self.push(depth, TraceKind::Result(text));
    }

    pub(crate) fn result_text(&mut self, depth: usize, text: String) {
        self.push(depth, TraceKind::Result(text));
    }
}
