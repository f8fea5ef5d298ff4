//! Inference-time types.
//!
//! Structural types are immutable values; all mutable state (bounds, levels,
//! row expansions) lives in a [`VarStore`] owned by one inference engine.
//! Variables are plain indices into that store. Type, row and field variables
//! draw their ids from a single counter, so an id identifies a variable
//! uniquely regardless of its kind.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

pub type Label = Rc<str>;

macro_rules! var_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(u32);

        impl $name {
            pub fn id(self) -> u32 {
                self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}#{}", stringify!($name), self.0)
            }
        }
    };
}

var_id!(
    /// Type variable.
    TyVar
);
var_id!(
    /// Row variable: stands for the unnamed remainder of a record.
    RowVar
);
var_id!(
    /// Field variable: stands for either a present or an absent field.
    FieldVar
);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SimpleType {
    Int,
    Fun(Rc<SimpleType>, Rc<SimpleType>),
    Rec(Row),
    Var(TyVar),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Row {
    Cons(Label, Field, Rc<Row>),
    /// Closed tail: every label not listed is absent.
    Empty,
    Var(RowVar),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Pre(Rc<SimpleType>),
    Abs,
    Var(FieldVar),
}

impl SimpleType {
    pub fn fun(domain: SimpleType, codomain: SimpleType) -> SimpleType {
        SimpleType::Fun(Rc::new(domain), Rc::new(codomain))
    }

    /// A closed record type with the given present fields.
    pub fn closed_record<'a>(
        fields: impl IntoIterator<Item = (&'a str, SimpleType)>,
    ) -> SimpleType {
        let fields: Vec<_> = fields
            .into_iter()
            .map(|(l, t)| (Label::from(l), Field::pre(t)))
            .collect();
        SimpleType::Rec(Row::from_fields(fields, Row::Empty))
    }
}

impl Field {
    pub fn pre(t: SimpleType) -> Field {
        Field::Pre(Rc::new(t))
    }
}

impl Row {
    pub fn cons(label: impl Into<Label>, field: Field, rest: Row) -> Row {
        Row::Cons(label.into(), field, Rc::new(rest))
    }

    /// Builds a spine from `fields` (outermost first) ending in `tail`.
    pub fn from_fields(fields: impl IntoIterator<Item = (Label, Field)>, tail: Row) -> Row {
        let fields: Vec<_> = fields.into_iter().collect();
        fields
            .into_iter()
            .rev()
            .fold(tail, |rest, (l, f)| Row::Cons(l, f, Rc::new(rest)))
    }
}

/// Terminator of a normalized row. Never an expanded variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    Closed,
    Var(RowVar),
}

impl Tail {
    pub fn to_row(self) -> Row {
        match self {
            Tail::Closed => Row::Empty,
            Tail::Var(v) => Row::Var(v),
        }
    }
}

/// A row with expansions substituted and labels collected into a map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedRow {
    pub fields: BTreeMap<Label, Field>,
    pub tail: Tail,
}

impl NormalizedRow {
    /// Rebuilds a spine with labels in sorted order.
    pub fn to_row(&self) -> Row {
        Row::from_fields(
            self.fields.iter().map(|(l, f)| (l.clone(), f.clone())),
            self.tail.to_row(),
        )
    }

    /// The field at `label` when the row is closed or lists it explicitly.
    pub fn field(&self, label: &str) -> Option<Field> {
        match (self.fields.get(label), self.tail) {
            (Some(f), _) => Some(f.clone()),
            (None, Tail::Closed) => Some(Field::Abs),
            (None, Tail::Var(_)) => None,
        }
    }

    pub fn is_all_absent(&self) -> bool {
        self.tail == Tail::Closed && self.fields.values().all(|f| *f == Field::Abs)
    }
}

#[derive(Clone, Debug, Default)]
pub struct TypeVarState {
    pub level: u32,
    pub lower_bounds: Vec<SimpleType>,
    pub upper_bounds: Vec<SimpleType>,
}

/// A row variable rewritten as `label: field ; rest`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub label: Label,
    pub field: FieldVar,
    pub rest: RowVar,
}

#[derive(Clone, Debug, Default)]
pub struct RowVarState {
    pub level: u32,
    pub lower_bounds: Vec<Row>,
    pub upper_bounds: Vec<Row>,
    pub expansion: Option<Expansion>,
}

#[derive(Clone, Debug, Default)]
pub struct FieldVarState {
    pub level: u32,
    pub lower_bounds: Vec<Field>,
    pub upper_bounds: Vec<Field>,
}

#[derive(Clone, Debug)]
enum Slot {
    Type(TypeVarState),
    Row(RowVarState),
    Field(FieldVarState),
}

#[derive(Clone, Debug, Default)]
pub struct VarStore {
    slots: Vec<Slot>,
}

impl VarStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of variables allocated so far, of all kinds.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn type_vars(&self) -> impl Iterator<Item = TyVar> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, s)| match s {
            Slot::Type(_) => Some(TyVar(i as u32)),
            _ => None,
        })
    }

    pub fn row_vars(&self) -> impl Iterator<Item = RowVar> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, s)| match s {
            Slot::Row(_) => Some(RowVar(i as u32)),
            _ => None,
        })
    }

    pub fn field_vars(&self) -> impl Iterator<Item = FieldVar> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, s)| match s {
            Slot::Field(_) => Some(FieldVar(i as u32)),
            _ => None,
        })
    }

    fn next_id(&self) -> u32 {
        u32::try_from(self.slots.len()).expect("variable id space exhausted")
    }

    pub fn fresh_type(&mut self, level: u32) -> TyVar {
        let id = self.next_id();
        self.slots.push(Slot::Type(TypeVarState {
            level,
            ..Default::default()
        }));
        TyVar(id)
    }

    pub fn fresh_row(&mut self, level: u32) -> RowVar {
        let id = self.next_id();
        self.slots.push(Slot::Row(RowVarState {
            level,
            ..Default::default()
        }));
        RowVar(id)
    }

    pub fn fresh_field(&mut self, level: u32) -> FieldVar {
        let id = self.next_id();
        self.slots.push(Slot::Field(FieldVarState {
            level,
            ..Default::default()
        }));
        FieldVar(id)
    }

    pub fn ty(&self, v: TyVar) -> &TypeVarState {
        match &self.slots[v.0 as usize] {
            Slot::Type(s) => s,
            _ => unreachable!("{v:?} is not a type variable"),
        }
    }

    pub fn ty_mut(&mut self, v: TyVar) -> &mut TypeVarState {
        match &mut self.slots[v.0 as usize] {
            Slot::Type(s) => s,
            _ => unreachable!("{v:?} is not a type variable"),
        }
    }

    pub fn row(&self, v: RowVar) -> &RowVarState {
        match &self.slots[v.0 as usize] {
            Slot::Row(s) => s,
            _ => unreachable!("{v:?} is not a row variable"),
        }
    }

    pub fn row_mut(&mut self, v: RowVar) -> &mut RowVarState {
        match &mut self.slots[v.0 as usize] {
            Slot::Row(s) => s,
            _ => unreachable!("{v:?} is not a row variable"),
        }
    }

    pub fn field(&self, v: FieldVar) -> &FieldVarState {
        match &self.slots[v.0 as usize] {
            Slot::Field(s) => s,
            _ => unreachable!("{v:?} is not a field variable"),
        }
    }

    pub fn field_mut(&mut self, v: FieldVar) -> &mut FieldVarState {
        match &mut self.slots[v.0 as usize] {
            Slot::Field(s) => s,
            _ => unreachable!("{v:?} is not a field variable"),
        }
    }

    /// Records the expansion of `v`.
    ///
    /// Panics if `v` already has one: expansions are single-assignment.
    pub fn set_expansion(&mut self, v: RowVar, expansion: Expansion) {
        let state = self.row_mut(v);
        assert!(state.expansion.is_none(), "{v:?} expanded twice");
        state.expansion = Some(expansion);
    }

    /// Collects the labels along `row`, following expansions, into a map.
    ///
    /// When a label occurs more than once the outermost occurrence wins.
    pub fn normalize_row(&self, row: &Row) -> NormalizedRow {
        let mut fields = BTreeMap::new();
        let mut cur = row.clone();
        let tail = loop {
            match cur {
                Row::Cons(l, f, rest) => {
                    fields.entry(l).or_insert(f);
                    cur = (*rest).clone();
                }
                Row::Empty => break Tail::Closed,
                Row::Var(v) => match &self.row(v).expansion {
                    Some(e) => {
                        fields.entry(e.label.clone()).or_insert(Field::Var(e.field));
                        cur = Row::Var(e.rest);
                    }
                    None => break Tail::Var(v),
                },
            }
        };
        NormalizedRow { fields, tail }
    }

    /// Highest binding level of any variable occurring in `t`.
    pub fn level_of(&self, t: &SimpleType) -> u32 {
        match t {
            SimpleType::Int => 0,
            SimpleType::Fun(a, b) => self.level_of(a).max(self.level_of(b)),
            SimpleType::Rec(r) => self.row_level(r),
            SimpleType::Var(v) => self.ty(*v).level,
        }
    }

    // Expansion variables share the level of the variable they expand, so the
    // raw spine is enough here.
    pub fn row_level(&self, r: &Row) -> u32 {
        match r {
            Row::Cons(_, f, rest) => self.field_level(f).max(self.row_level(rest)),
            Row::Empty => 0,
            Row::Var(v) => self.row(*v).level,
        }
    }

    pub fn field_level(&self, f: &Field) -> u32 {
        match f {
            Field::Pre(t) => self.level_of(t),
            Field::Abs => 0,
            Field::Var(v) => self.field(*v).level,
        }
    }
}

/// A type generalized at `level`: variables above it are copied on each use.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub level: u32,
    pub body: SimpleType,
}

#[derive(Clone, Debug)]
pub enum EnvEntry {
    Mono(SimpleType),
    Poly(Scheme),
}

/// Persistent typing context; later bindings shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv(Option<Rc<EnvNode>>);

#[derive(Debug)]
struct EnvNode {
    name: String,
    entry: EnvEntry,
    parent: TypeEnv,
}

impl TypeEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&self, name: impl Into<String>, entry: EnvEntry) -> TypeEnv {
        TypeEnv(Some(Rc::new(EnvNode {
            name: name.into(),
            entry,
            parent: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&EnvEntry> {
        let mut cur = self.0.as_deref();
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.entry);
            }
            cur = node.parent.0.as_deref();
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int() -> Field {
        Field::pre(SimpleType::Int)
    }

    #[test]
    fn fresh_variables_have_distinct_ids_across_kinds() {
        let mut s = VarStore::new();
        let a = s.fresh_type(0);
        let r = s.fresh_row(1);
        let f = s.fresh_field(0);
        let b = s.fresh_type(0);
        let ids = [a.id(), r.id(), f.id(), b.id()];
        for (i, x) in ids.iter().enumerate() {
            for y in &ids[i + 1..] {
                assert_ne!(x, y);
            }
        }
        assert!(s.ty(a).lower_bounds.is_empty() && s.ty(a).upper_bounds.is_empty());
        assert_eq!(s.row(r).level, 1);
        assert!(s.row(r).expansion.is_none());
    }

    #[test]
    fn normalization_ignores_field_order() {
        let s = VarStore::new();
        let r = Row::cons("y", int(), Row::cons("x", int(), Row::Empty));
        let n = s.normalize_row(&r);
        assert_eq!(n.tail, Tail::Closed);
        assert_eq!(n.fields.len(), 2);
        assert_eq!(n.fields["x"], int());
        assert_eq!(n.fields["y"], int());
        let swapped = Row::cons("x", int(), Row::cons("y", int(), Row::Empty));
        assert_eq!(s.normalize_row(&swapped), n);
    }

    #[test]
    fn normalization_follows_expansions() {
        let mut s = VarStore::new();
        let rho = s.fresh_row(0);
        let gamma = s.fresh_field(0);
        let rho2 = s.fresh_row(0);
        s.set_expansion(
            rho,
            Expansion {
                label: "x".into(),
                field: gamma,
                rest: rho2,
            },
        );
        let n = s.normalize_row(&Row::Var(rho));
        assert_eq!(n.fields["x"], Field::Var(gamma));
        assert_eq!(n.fields.len(), 1);
        assert_eq!(n.tail, Tail::Var(rho2));
    }

    #[test]
    fn normalization_of_empty_row() {
        let s = VarStore::new();
        let n = s.normalize_row(&Row::Empty);
        assert!(n.fields.is_empty());
        assert_eq!(n.tail, Tail::Closed);
    }

    #[test]
    fn outermost_duplicate_wins() {
        let mut s = VarStore::new();
        let rho = s.fresh_row(0);
        let gamma = s.fresh_field(0);
        let rest = s.fresh_row(0);
        s.set_expansion(
            rho,
            Expansion {
                label: "x".into(),
                field: gamma,
                rest,
            },
        );
        let n = s.normalize_row(&Row::cons("x", int(), Row::Var(rho)));
        assert_eq!(n.fields["x"], int());
        assert_eq!(n.tail, Tail::Var(rest));
    }

    #[test]
    fn normalization_is_idempotent() {
        let mut s = VarStore::new();
        let rho = s.fresh_row(0);
        let f = s.fresh_field(0);
        let rest = s.fresh_row(0);
        s.set_expansion(
            rho,
            Expansion {
                label: "a".into(),
                field: f,
                rest,
            },
        );
        let row = Row::cons("z", Field::Abs, Row::cons("b", int(), Row::Var(rho)));
        let once = s.normalize_row(&row);
        let twice = s.normalize_row(&once.to_row());
        assert_eq!(once, twice);
        assert!(matches!(once.tail, Tail::Var(v) if s.row(v).expansion.is_none()));
    }

    #[test]
    #[should_panic(expected = "expanded twice")]
    fn expansion_is_single_assignment() {
        let mut s = VarStore::new();
        let rho = s.fresh_row(0);
        let f = s.fresh_field(0);
        let rest = s.fresh_row(0);
        let e = Expansion {
            label: "x".into(),
            field: f,
            rest,
        };
        s.set_expansion(rho, e.clone());
        s.set_expansion(rho, e);
    }

    #[test]
    fn env_shadowing_and_unbound() {
        let env = TypeEnv::new()
            .extend("x", EnvEntry::Mono(SimpleType::Int))
            .extend("x", EnvEntry::Mono(SimpleType::closed_record([])));
        assert!(matches!(
            env.lookup("x"),
            Some(EnvEntry::Mono(SimpleType::Rec(Row::Empty)))
        ));
        assert!(env.lookup("y").is_none());
    }
}
