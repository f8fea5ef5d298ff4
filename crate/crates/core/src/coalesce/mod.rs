//! Coalescing: turning bounded inference variables into compact output types.
//!
//! A type variable at positive polarity becomes the union of itself and its
//! lower bounds; at negative polarity, the intersection of itself and its
//! upper bounds. Cycles through bounds produce `mu` binders. Afterwards, type
//! variables that occur with only one polarity are dropped. Row and field
//! variables are kept.

mod output;

use std::collections::{BTreeMap, HashMap, HashSet};

pub use output::{
    normalize_var_names, print_record_with, print_type, print_type_with, Namer, ORecord, OTail,
    OutputField, OutputType,
};

use crate::types::{Field, FieldVar, Label, Row, RowVar, SimpleType, Tail, TyVar, VarStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CoalesceOptions {
    /// Drop type variables that occur with a single polarity.
    pub eliminate_polar_vars: bool,
}

impl Default for CoalesceOptions {
    fn default() -> Self {
        Self {
            eliminate_polar_vars: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Coalesced {
    pub ty: OutputType,
    /// Non-fatal notes, e.g. two distinct row tails merged into one.
    pub diagnostics: Vec<String>,
}

/// Coalesces `t` at `polarity` with default options.
pub fn coalesce(store: &VarStore, t: &SimpleType, polarity: Polarity) -> OutputType {
    coalesce_with(store, t, polarity, CoalesceOptions::default()).ty
}

pub fn coalesce_with(
    store: &VarStore,
    t: &SimpleType,
    polarity: Polarity,
    options: CoalesceOptions,
) -> Coalesced {
    let mut c = Coalescer::new(store);
    let raw = c.go(t, polarity);
    let mut diagnostics = Vec::new();
    let ty = if options.eliminate_polar_vars {
        let eliminated = eliminate_polar_vars(&raw, &c.binders);
        normalize(&eliminated, &mut diagnostics)
    } else {
        normalize(&raw, &mut diagnostics)
    };
    Coalesced { ty, diagnostics }
}

/// Converts `t` to an output type without consulting any bounds, for display
/// of intermediate constraints. Rows are shown with expansions substituted.
pub fn raw_type(store: &VarStore, t: &SimpleType) -> OutputType {
    match t {
        SimpleType::Int => OutputType::Int,
        SimpleType::Fun(a, b) => OutputType::fun(raw_type(store, a), raw_type(store, b)),
        SimpleType::Rec(r) => OutputType::Rec(raw_row(store, r)),
        SimpleType::Var(v) => OutputType::Var(v.id()),
    }
}

pub fn raw_row(store: &VarStore, r: &Row) -> ORecord {
    let n = store.normalize_row(r);
    ORecord {
        fields: n
            .fields
            .iter()
            .map(|(l, f)| (l.clone(), raw_field(store, f)))
            .collect(),
        tail: match n.tail {
            Tail::Closed => OTail::Closed,
            Tail::Var(v) => OTail::Var(v.id()),
        },
    }
}

pub fn raw_field(store: &VarStore, f: &Field) -> OutputField {
    match f {
        Field::Pre(t) => OutputField::Pre(raw_type(store, t)),
        Field::Abs => OutputField::Abs,
        Field::Var(v) => OutputField::Var(v.id()),
    }
}

struct Coalescer<'s> {
    store: &'s VarStore,
    next_binder: u32,
    /// Ids introduced for `mu` binders.
    binders: HashSet<u32>,
    types_in_progress: HashSet<(TyVar, Polarity)>,
    recursive: HashMap<(TyVar, Polarity), u32>,
    rows_in_progress: HashSet<(RowVar, Polarity)>,
    fields_in_progress: HashSet<(FieldVar, Polarity)>,
}

impl<'s> Coalescer<'s> {
    fn new(store: &'s VarStore) -> Self {
        Self {
            store,
            next_binder: u32::try_from(store.len()).expect("variable id space exhausted"),
            binders: HashSet::new(),
            types_in_progress: HashSet::new(),
            recursive: HashMap::new(),
            rows_in_progress: HashSet::new(),
            fields_in_progress: HashSet::new(),
        }
    }

    fn go(&mut self, t: &SimpleType, pol: Polarity) -> OutputType {
        match t {
            SimpleType::Int => OutputType::Int,
            SimpleType::Fun(a, b) => OutputType::fun(self.go(a, pol.flip()), self.go(b, pol)),
            SimpleType::Rec(r) => OutputType::Rec(self.row(r, pol)),
            SimpleType::Var(v) => self.type_var(*v, pol),
        }
    }

    fn type_var(&mut self, v: TyVar, pol: Polarity) -> OutputType {
        let key = (v, pol);
        if self.types_in_progress.contains(&key) {
            let id = match self.recursive.get(&key) {
                Some(id) => *id,
                None => {
                    let id = self.next_binder;
                    self.next_binder += 1;
                    self.binders.insert(id);
                    self.recursive.insert(key, id);
                    id
                }
            };
            return OutputType::Var(id);
        }

        let state = self.store.ty(v);
        let bounds = match pol {
            Polarity::Positive => &state.lower_bounds,
            Polarity::Negative => &state.upper_bounds,
        };
        self.types_in_progress.insert(key);
        let mut parts = vec![OutputType::Var(v.id())];
        parts.extend(bounds.iter().map(|b| self.go(b, pol)));
        self.types_in_progress.remove(&key);

        let body = match pol {
            Polarity::Positive => OutputType::Union(parts),
            Polarity::Negative => OutputType::Inter(parts),
        };
        match self.recursive.remove(&key) {
            Some(id) => OutputType::Mu(id, Box::new(body)),
            None => body,
        }
    }

    fn field(&mut self, f: &Field, pol: Polarity) -> OutputField {
        let v = match f {
            Field::Pre(t) => return OutputField::Pre(self.go(t, pol)),
            Field::Abs => return OutputField::Abs,
            Field::Var(v) => *v,
        };
        let state = self.store.field(v);
        let bounds = match pol {
            Polarity::Positive => &state.lower_bounds,
            Polarity::Negative => &state.upper_bounds,
        };
        if bounds.is_empty() || !self.fields_in_progress.insert((v, pol)) {
            return OutputField::Var(v.id());
        }
        let coalesced: Vec<OutputField> = bounds.iter().map(|b| self.field(b, pol)).collect();
        self.fields_in_progress.remove(&(v, pol));
        coalesced
            .into_iter()
            .reduce(|a, b| combine_fields(a, b, pol))
            .expect("bounds are nonempty")
    }

    fn row(&mut self, r: &Row, pol: Polarity) -> ORecord {
        let n = self.store.normalize_row(r);
        let mut fields: BTreeMap<Label, OutputField> = n
            .fields
            .iter()
            .map(|(l, f)| (l.clone(), self.field(f, pol)))
            .collect();
        let tail = match n.tail {
            Tail::Closed => OTail::Closed,
            Tail::Var(v) => self.row_tail(v, pol, &mut fields),
        };
        ORecord { fields, tail }
    }

    /// Output tail for row variable `v`. Fields that `v`'s bounds list
    /// explicitly and `fields` lacks are merged into `fields`.
    fn row_tail(
        &mut self,
        v: RowVar,
        pol: Polarity,
        fields: &mut BTreeMap<Label, OutputField>,
    ) -> OTail {
        if !self.rows_in_progress.insert((v, pol)) {
            return OTail::Var(v.id());
        }
        let state = self.store.row(v);
        let bounds = match pol {
            Polarity::Positive => &state.lower_bounds,
            Polarity::Negative => &state.upper_bounds,
        };
        let bounds: Vec<_> = bounds.iter().map(|b| self.store.normalize_row(b)).collect();

        let tail = if pol == Polarity::Positive && bounds.iter().any(|b| b.is_all_absent()) {
            // the all-absent row is the greatest row, so the join is closed
            OTail::Closed
        } else {
            let mut extra: BTreeMap<Label, OutputField> = BTreeMap::new();
            for b in &bounds {
                for (l, f) in &b.fields {
                    if fields.contains_key(l) {
                        continue;
                    }
                    let f = self.field(f, pol);
                    let merged = match extra.remove(l) {
                        Some(prev) => combine_fields(prev, f, pol),
                        None => f,
                    };
                    extra.insert(l.clone(), merged);
                }
            }
            if pol == Polarity::Positive {
                // a label some lower bound lacks joins with an unknown field
                for (l, f) in extra.iter_mut() {
                    if bounds.iter().any(|b| !b.fields.contains_key(l)) {
                        *f = OutputField::Abs;
                    }
                }
            }
            fields.extend(extra);
            OTail::Var(v.id())
        };
        self.rows_in_progress.remove(&(v, pol));
        tail
    }
}

fn combine_fields(a: OutputField, b: OutputField, pol: Polarity) -> OutputField {
    match pol {
        Polarity::Positive => join_fields(a, b),
        Polarity::Negative => meet_fields(a, b),
    }
}

/// Least upper bound of two fields; `abs` is the top of the field order.
///
/// A field variable joined with anything other than itself has no exact
/// representation and is approximated by `abs`.
pub fn join_fields(a: OutputField, b: OutputField) -> OutputField {
    match (a, b) {
        (OutputField::Abs, _) | (_, OutputField::Abs) => OutputField::Abs,
        (OutputField::Pre(x), OutputField::Pre(y)) => {
            OutputField::Pre(OutputType::Union(vec![x, y]))
        }
        (OutputField::Var(x), OutputField::Var(y)) if x == y => OutputField::Var(x),
        _ => OutputField::Abs,
    }
}

/// Greatest lower bound of two fields. A field variable met with a present
/// field yields the present field; two distinct variables keep the left one.
pub fn meet_fields(a: OutputField, b: OutputField) -> OutputField {
    match (a, b) {
        (OutputField::Abs, f) | (f, OutputField::Abs) => f,
        (OutputField::Pre(x), OutputField::Pre(y)) => {
            OutputField::Pre(OutputType::Inter(vec![x, y]))
        }
        (OutputField::Var(_), OutputField::Pre(t)) | (OutputField::Pre(t), OutputField::Var(_)) => {
            OutputField::Pre(t)
        }
        (OutputField::Var(x), OutputField::Var(_)) => OutputField::Var(x),
    }
}

/// Type variables of `t` (excluding `binders`) seen at each polarity.
fn polar_occurrences(
    t: &OutputType,
    pol: Polarity,
    binders: &HashSet<u32>,
    seen: &mut HashSet<(u32, Polarity)>,
) {
    match t {
        OutputType::Int | OutputType::Top | OutputType::Bot => {}
        OutputType::Var(v) => {
            if !binders.contains(v) {
                seen.insert((*v, pol));
            }
        }
        OutputType::Fun(a, b) => {
            polar_occurrences(a, pol.flip(), binders, seen);
            polar_occurrences(b, pol, binders, seen);
        }
        OutputType::Rec(r) => {
            for f in r.fields.values() {
                if let OutputField::Pre(t) = f {
                    polar_occurrences(t, pol, binders, seen);
                }
            }
        }
        OutputType::Union(ts) | OutputType::Inter(ts) => {
            for t in ts {
                polar_occurrences(t, pol, binders, seen);
            }
        }
        OutputType::Mu(_, body) => polar_occurrences(body, pol, binders, seen),
    }
}

/// Replaces each type variable occurring at a single polarity by the unit of
/// the surrounding union (`bot`) or intersection (`top`).
fn eliminate_polar_vars(t: &OutputType, binders: &HashSet<u32>) -> OutputType {
    let mut seen = HashSet::new();
    polar_occurrences(t, Polarity::Positive, binders, &mut seen);
    let replace = |v: u32| -> Option<OutputType> {
        let pos = seen.contains(&(v, Polarity::Positive));
        let neg = seen.contains(&(v, Polarity::Negative));
        match (pos, neg) {
            (true, false) => Some(OutputType::Bot),
            (false, true) => Some(OutputType::Top),
            _ => None,
        }
    };
    substitute_vars(t, &replace)
}

fn substitute_vars(t: &OutputType, replace: &dyn Fn(u32) -> Option<OutputType>) -> OutputType {
    match t {
        OutputType::Int | OutputType::Top | OutputType::Bot => t.clone(),
        OutputType::Var(v) => replace(*v).unwrap_or_else(|| t.clone()),
        OutputType::Fun(a, b) => {
            OutputType::fun(substitute_vars(a, replace), substitute_vars(b, replace))
        }
        OutputType::Rec(r) => OutputType::Rec(ORecord {
            fields: r
                .fields
                .iter()
                .map(|(l, f)| {
                    let f = match f {
                        OutputField::Pre(t) => OutputField::Pre(substitute_vars(t, replace)),
                        other => other.clone(),
                    };
                    (l.clone(), f)
                })
                .collect(),
            tail: r.tail,
        }),
        OutputType::Union(ts) => {
            OutputType::Union(ts.iter().map(|t| substitute_vars(t, replace)).collect())
        }
        OutputType::Inter(ts) => {
            OutputType::Inter(ts.iter().map(|t| substitute_vars(t, replace)).collect())
        }
        OutputType::Mu(v, body) => OutputType::Mu(*v, Box::new(substitute_vars(body, replace))),
    }
}

/// Flattens and deduplicates unions and intersections, absorbs `top`/`bot`,
/// merges record members, unwraps singletons, drops `abs` fields from closed
/// records, and removes binders whose body no longer mentions them.
pub fn normalize(t: &OutputType, diagnostics: &mut Vec<String>) -> OutputType {
    match t {
        OutputType::Int | OutputType::Top | OutputType::Bot | OutputType::Var(_) => t.clone(),
        OutputType::Fun(a, b) => {
            OutputType::fun(normalize(a, diagnostics), normalize(b, diagnostics))
        }
        OutputType::Rec(r) => OutputType::Rec(normalize_record(r, diagnostics)),
        OutputType::Union(ts) => normalize_lattice(ts, Polarity::Positive, diagnostics),
        OutputType::Inter(ts) => normalize_lattice(ts, Polarity::Negative, diagnostics),
        OutputType::Mu(v, body) => {
            let body = normalize(body, diagnostics);
            if body.mentions(*v) {
                OutputType::Mu(*v, Box::new(body))
            } else {
                body
            }
        }
    }
}

fn normalize_field(f: &OutputField, diagnostics: &mut Vec<String>) -> OutputField {
    match f {
        OutputField::Pre(t) => OutputField::Pre(normalize(t, diagnostics)),
        other => other.clone(),
    }
}

fn normalize_record(r: &ORecord, diagnostics: &mut Vec<String>) -> ORecord {
    let fields = r
        .fields
        .iter()
        .filter(|(_, f)| !(r.tail == OTail::Closed && **f == OutputField::Abs))
        .map(|(l, f)| (l.clone(), normalize_field(f, diagnostics)))
        .collect();
    ORecord {
        fields,
        tail: r.tail,
    }
}

// `pol` is Positive for unions and Negative for intersections.
fn normalize_lattice(
    members: &[OutputType],
    pol: Polarity,
    diagnostics: &mut Vec<String>,
) -> OutputType {
    let (unit, absorbing) = match pol {
        Polarity::Positive => (OutputType::Bot, OutputType::Top),
        Polarity::Negative => (OutputType::Top, OutputType::Bot),
    };

    let mut flat: Vec<OutputType> = Vec::new();
    let mut stack: Vec<OutputType> = members
        .iter()
        .rev()
        .map(|m| normalize(m, diagnostics))
        .collect();
    while let Some(m) = stack.pop() {
        match (m, pol) {
            (OutputType::Union(inner), Polarity::Positive)
            | (OutputType::Inter(inner), Polarity::Negative) => {
                stack.extend(inner.into_iter().rev());
            }
            (m, _) => flat.push(m),
        }
    }

    if flat.contains(&absorbing) {
        return absorbing;
    }

    let mut out: Vec<OutputType> = Vec::new();
    let mut record_slot: Option<usize> = None;
    for m in flat {
        if m == unit || out.contains(&m) {
            continue;
        }
        if let OutputType::Rec(r) = m {
            match record_slot {
                Some(i) => {
                    let OutputType::Rec(prev) = &out[i] else {
                        unreachable!()
                    };
                    let merged = merge_records(prev, &r, pol, diagnostics);
                    out[i] = OutputType::Rec(normalize_record(&merged, diagnostics));
                }
                None => {
                    record_slot = Some(out.len());
                    out.push(OutputType::Rec(r));
                }
            }
            continue;
        }
        out.push(m);
    }

    match out.len() {
        0 => unit,
        1 => out.pop().expect("one member"),
        _ => match pol {
            Polarity::Positive => OutputType::Union(out),
            Polarity::Negative => OutputType::Inter(out),
        },
    }
}

/// Fieldwise join (positive) or meet (negative) of two record types.
fn merge_records(
    a: &ORecord,
    b: &ORecord,
    pol: Polarity,
    diagnostics: &mut Vec<String>,
) -> ORecord {
    let labels: std::collections::BTreeSet<&Label> =
        a.fields.keys().chain(b.fields.keys()).collect();
    let mut fields = BTreeMap::new();
    for l in labels {
        let merged = match (a.fields.get(l), b.fields.get(l), pol) {
            (Some(x), Some(y), _) => combine_fields(x.clone(), y.clone(), pol),
            // a missing label is absent or unknown; either way the join is abs
            (Some(_), None, Polarity::Positive) | (None, Some(_), Polarity::Positive) => {
                OutputField::Abs
            }
            (Some(x), None, Polarity::Negative) | (None, Some(x), Polarity::Negative) => x.clone(),
            (None, None, _) => unreachable!(),
        };
        fields.insert(l.clone(), normalize_field(&merged, diagnostics));
    }
    let tail = match (a.tail, b.tail, pol) {
        (OTail::Closed, _, Polarity::Positive) | (_, OTail::Closed, Polarity::Positive) => {
            OTail::Closed
        }
        (OTail::Closed, t, Polarity::Negative) | (t, OTail::Closed, Polarity::Negative) => t,
        (OTail::Var(x), OTail::Var(y), _) => {
            if x != y {
                diagnostics.push(format!(
                    "merged records with distinct row tails #{x} and #{y}; keeping #{x}"
                ));
            }
            OTail::Var(x)
        }
    };
    ORecord { fields, tail }
}
