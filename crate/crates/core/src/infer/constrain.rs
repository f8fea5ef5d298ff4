//! The subtype constraint solver.
//!
//! Constraints are recorded as bounds on variables; every new bound is
//! immediately checked against the opposite bounds already present. Rows are
//! compared label by label after normalization, expanding open tails on
//! demand. Bounds never point from a variable to a type of a higher level:
//! such types are first extruded (copied down) to the variable's level.

use std::collections::{HashMap, HashSet};

use super::{Engine, TypeError};
use crate::coalesce::{print_record_with, print_type_with, raw_row, raw_type, Namer, Polarity};
use crate::types::{
    Expansion, Field, FieldVar, Label, NormalizedRow, Row, RowVar, SimpleType, Tail, TyVar,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Type(SimpleType, SimpleType),
    Row(Row, Row),
    Field(Field, Field),
}

/// Pairs already submitted during one top-level constraint. A repeated pair
/// succeeds immediately, which is what stops cyclic bounds from looping.
#[derive(Debug, Default)]
pub struct ConstraintCache {
    seen: HashSet<Key>,
}

impl ConstraintCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    // true if the pair is new
    fn insert(&mut self, key: Key) -> bool {
        self.seen.insert(key)
    }
}

#[derive(Default)]
struct Extruded {
    types: HashMap<(TyVar, Polarity), TyVar>,
    rows: HashMap<(RowVar, Polarity), RowVar>,
    fields: HashMap<(FieldVar, Polarity), FieldVar>,
}

impl Engine {
    /// Records `lhs <= rhs`.
    pub fn constrain(&mut self, lhs: &SimpleType, rhs: &SimpleType) -> Result<(), TypeError> {
        self.constrain_at(lhs, rhs, 0)
    }

    pub fn constrain_row(&mut self, lhs: &Row, rhs: &Row) -> Result<(), TypeError> {
        self.constrain_rows(lhs, rhs, &mut ConstraintCache::new(), 0, true)
    }

    pub fn constrain_field(&mut self, lhs: &Field, rhs: &Field) -> Result<(), TypeError> {
        self.constrain_fields(lhs, rhs, "?", None, &mut ConstraintCache::new(), 0)
    }

    /// Makes `label` explicit in `v`, returning its field variable and the
    /// remaining row. Repeated calls return the same pair.
    pub fn expand(&mut self, v: RowVar, label: &str) -> Result<(FieldVar, RowVar), TypeError> {
        self.expand_at(v, label, &mut ConstraintCache::new(), 0)
    }

    pub(super) fn constrain_at(
        &mut self,
        lhs: &SimpleType,
        rhs: &SimpleType,
        depth: usize,
    ) -> Result<(), TypeError> {
        self.constrain_types(lhs, rhs, &mut ConstraintCache::new(), depth)
    }

    fn constrain_types(
        &mut self,
        lhs: &SimpleType,
        rhs: &SimpleType,
        cache: &mut ConstraintCache,
        depth: usize,
    ) -> Result<(), TypeError> {
        if lhs == rhs || !cache.insert(Key::Type(lhs.clone(), rhs.clone())) {
            return Ok(());
        }
        if let Some(tr) = &mut self.tracer {
            tr.constrain(depth, &self.store, lhs, rhs);
        }
        let inner = depth + 1;
        match (lhs, rhs) {
            (SimpleType::Int, SimpleType::Int) => Ok(()),
            (SimpleType::Fun(d1, c1), SimpleType::Fun(d2, c2)) => {
                self.constrain_types(d2, d1, cache, inner)?;
                self.constrain_types(c1, c2, cache, inner)
            }
            (SimpleType::Rec(r1), SimpleType::Rec(r2)) => self.solve_rows(r1, r2, cache, inner),
            (SimpleType::Var(v), _) if self.store.level_of(rhs) <= self.store.ty(*v).level => {
                self.store.ty_mut(*v).upper_bounds.push(rhs.clone());
                for lower in self.store.ty(*v).lower_bounds.clone() {
                    self.constrain_types(&lower, rhs, cache, inner)?;
                }
                Ok(())
            }
            (_, SimpleType::Var(v)) if self.store.level_of(lhs) <= self.store.ty(*v).level => {
                self.store.ty_mut(*v).lower_bounds.push(lhs.clone());
                for upper in self.store.ty(*v).upper_bounds.clone() {
                    self.constrain_types(lhs, &upper, cache, inner)?;
                }
                Ok(())
            }
            (SimpleType::Var(v), _) => {
                let level = self.store.ty(*v).level;
                let rhs = self.extrude(rhs, Polarity::Negative, level, &mut Extruded::default());
                self.constrain_types(lhs, &rhs, cache, inner)
            }
            (_, SimpleType::Var(v)) => {
                let level = self.store.ty(*v).level;
                let lhs = self.extrude(lhs, Polarity::Positive, level, &mut Extruded::default());
                self.constrain_types(&lhs, rhs, cache, inner)
            }
            _ => Err(self.mismatch(lhs, rhs)),
        }
    }

    fn mismatch(&self, lhs: &SimpleType, rhs: &SimpleType) -> TypeError {
        let mut namer = Namer::new();
        let l = print_type_with(&raw_type(&self.store, lhs), &mut namer);
        let r = print_type_with(&raw_type(&self.store, rhs), &mut namer);
        TypeError::not_a_subtype(&l, &r)
    }

    pub(super) fn constrain_rows(
        &mut self,
        lhs: &Row,
        rhs: &Row,
        cache: &mut ConstraintCache,
        depth: usize,
        announce: bool,
    ) -> Result<(), TypeError> {
        if lhs == rhs || !cache.insert(Key::Row(lhs.clone(), rhs.clone())) {
            return Ok(());
        }
        if announce {
            if let Some(tr) = &mut self.tracer {
                tr.constrain_rows(depth, &self.store, lhs, rhs);
            }
        }
        self.solve_rows(lhs, rhs, cache, depth + 1)
    }

    // The body of a row constraint; `depth` is that of the nested steps.
    fn solve_rows(
        &mut self,
        lhs: &Row,
        rhs: &Row,
        cache: &mut ConstraintCache,
        depth: usize,
    ) -> Result<(), TypeError> {
        loop {
            let mut expanded = false;
            let (n1, n2) = loop {
                let n1 = self.store.normalize_row(lhs);
                let n2 = self.store.normalize_row(rhs);
                match first_missing(&n1, &n2) {
                    Some((v, label)) => {
                        self.expand_at(v, &label, cache, depth)?;
                        expanded = true;
                    }
                    None => break (n1, n2),
                }
            };
            if expanded {
                return self.constrain_rows(&n1.to_row(), &n2.to_row(), cache, depth, true);
            }

            let labels: Vec<Label> = union_labels(&n1, &n2);
            for label in &labels {
                let f1 = n1.field(label).expect("open tails were expanded");
                let f2 = n2.field(label).expect("open tails were expanded");
                self.constrain_fields(&f1, &f2, label, Some((lhs, rhs)), cache, depth)?;
            }

            // The field constraints may have expanded a tail in the meantime;
            // go round again so the new labels are compared as well.
            let stale = |t: Tail, e: &Engine| match t {
                Tail::Var(v) => e.store.row(v).expansion.is_some(),
                Tail::Closed => false,
            };
            if stale(n1.tail, self) || stale(n2.tail, self) {
                continue;
            }
            return self.constrain_tails(n1.tail, n2.tail, cache, depth);
        }
    }

    fn constrain_tails(
        &mut self,
        lhs: Tail,
        rhs: Tail,
        cache: &mut ConstraintCache,
        depth: usize,
    ) -> Result<(), TypeError> {
        if lhs == rhs {
            return Ok(());
        }
        if let Some(tr) = &mut self.tracer {
            tr.constrain_tails(depth, lhs, rhs);
        }
        let inner = depth + 1;
        match (lhs, rhs) {
            (Tail::Closed, Tail::Closed) => Ok(()),
            (Tail::Closed, Tail::Var(w)) => self.add_row_lower(w, Row::Empty, cache, inner),
            (Tail::Var(v), Tail::Closed) => self.add_row_upper(v, Row::Empty, cache, inner),
            (Tail::Var(v), Tail::Var(w)) => {
                let (lv, lw) = (self.store.row(v).level, self.store.row(w).level);
                if lw <= lv {
                    self.add_row_upper(v, Row::Var(w), cache, inner)?;
                }
                if lv <= lw {
                    self.add_row_lower(w, Row::Var(v), cache, inner)?;
                }
                Ok(())
            }
        }
    }

    fn add_row_lower(
        &mut self,
        v: RowVar,
        bound: Row,
        cache: &mut ConstraintCache,
        depth: usize,
    ) -> Result<(), TypeError> {
        self.store.row_mut(v).lower_bounds.push(bound.clone());
        for upper in self.store.row(v).upper_bounds.clone() {
            self.constrain_rows(&bound, &upper, cache, depth, true)?;
        }
        Ok(())
    }

    fn add_row_upper(
        &mut self,
        v: RowVar,
        bound: Row,
        cache: &mut ConstraintCache,
        depth: usize,
    ) -> Result<(), TypeError> {
        self.store.row_mut(v).upper_bounds.push(bound.clone());
        for lower in self.store.row(v).lower_bounds.clone() {
            self.constrain_rows(&lower, &bound, cache, depth, true)?;
        }
        Ok(())
    }

    fn constrain_fields(
        &mut self,
        lhs: &Field,
        rhs: &Field,
        label: &str,
        rows: Option<(&Row, &Row)>,
        cache: &mut ConstraintCache,
        depth: usize,
    ) -> Result<(), TypeError> {
        if lhs == rhs {
            return Ok(());
        }
        if let (Field::Pre(a), Field::Pre(b)) = (lhs, rhs) {
            return self.constrain_types(a, b, cache, depth);
        }
        if !cache.insert(Key::Field(lhs.clone(), rhs.clone())) {
            return Ok(());
        }
        if let Some(tr) = &mut self.tracer {
            tr.constrain_fields(depth, &self.store, lhs, rhs);
        }
        let inner = depth + 1;
        match (lhs, rhs) {
            (_, Field::Abs) => Ok(()),
            (Field::Abs, Field::Pre(_)) => Err(self.missing(label, rows)),
            (Field::Var(v), _) if self.store.field_level(rhs) <= self.store.field(*v).level => {
                self.store.field_mut(*v).upper_bounds.push(rhs.clone());
                for lower in self.store.field(*v).lower_bounds.clone() {
                    self.constrain_fields(&lower, rhs, label, rows, cache, inner)?;
                }
                Ok(())
            }
            (_, Field::Var(v)) if self.store.field_level(lhs) <= self.store.field(*v).level => {
                self.store.field_mut(*v).lower_bounds.push(lhs.clone());
                for upper in self.store.field(*v).upper_bounds.clone() {
                    self.constrain_fields(lhs, &upper, label, rows, cache, inner)?;
                }
                Ok(())
            }
            (Field::Var(v), _) => {
                let level = self.store.field(*v).level;
                let rhs =
                    self.extrude_field(rhs, Polarity::Negative, level, &mut Extruded::default());
                self.constrain_fields(lhs, &rhs, label, rows, cache, inner)
            }
            (_, Field::Var(v)) => {
                let level = self.store.field(*v).level;
                let lhs =
                    self.extrude_field(lhs, Polarity::Positive, level, &mut Extruded::default());
                self.constrain_fields(&lhs, rhs, label, rows, cache, inner)
            }
            (Field::Pre(_), Field::Pre(_)) => unreachable!("handled above"),
        }
    }

    fn missing(&self, label: &str, rows: Option<(&Row, &Row)>) -> TypeError {
        let rows = rows.map(|(l, r)| {
            let mut namer = Namer::new();
            (
                print_record_with(&raw_row(&self.store, l), &mut namer),
                print_record_with(&raw_row(&self.store, r), &mut namer),
            )
        });
        TypeError::missing_field(label, rows)
    }

    pub(super) fn expand_at(
        &mut self,
        v: RowVar,
        label: &str,
        cache: &mut ConstraintCache,
        depth: usize,
    ) -> Result<(FieldVar, RowVar), TypeError> {
        let mut cur = v;
        while let Some(e) = &self.store.row(cur).expansion {
            if &*e.label == label {
                return Ok((e.field, e.rest));
            }
            cur = e.rest;
        }
        let level = self.store.row(cur).level;
        let field = self.store.fresh_field(level);
        let rest = self.store.fresh_row(level);
        self.store.set_expansion(
            cur,
            Expansion {
                label: label.into(),
                field,
                rest,
            },
        );
        if let Some(tr) = &mut self.tracer {
            tr.expand(depth, cur, label, field, rest);
        }
        // Bounds recorded before the expansion must now see the label.
        let view = Row::cons(label, Field::Var(field), Row::Var(rest));
        let state = self.store.row(cur).clone();
        for lower in &state.lower_bounds {
            self.constrain_rows(lower, &view, cache, depth + 1, true)?;
        }
        for upper in &state.upper_bounds {
            self.constrain_rows(&view, upper, cache, depth + 1, true)?;
        }
        Ok((field, rest))
    }

    // Copies the parts of `t` above `level` into fresh variables at `level`,
    // linked to the originals so that `t <= copy` (positive) or `copy <= t`
    // (negative).
    fn extrude(
        &mut self,
        t: &SimpleType,
        pol: Polarity,
        level: u32,
        seen: &mut Extruded,
    ) -> SimpleType {
        if self.store.level_of(t) <= level {
            return t.clone();
        }
        match t {
            SimpleType::Int => SimpleType::Int,
            SimpleType::Fun(d, c) => SimpleType::fun(
                self.extrude(d, pol.flip(), level, seen),
                self.extrude(c, pol, level, seen),
            ),
            SimpleType::Rec(r) => SimpleType::Rec(self.extrude_row(r, pol, level, seen)),
            SimpleType::Var(v) => {
                if let Some(nv) = seen.types.get(&(*v, pol)) {
                    return SimpleType::Var(*nv);
                }
                let nv = self.store.fresh_type(level);
                seen.types.insert((*v, pol), nv);
                let copy = SimpleType::Var(nv);
                match pol {
                    Polarity::Positive => {
                        self.store.ty_mut(*v).upper_bounds.push(copy.clone());
                        let bounds = self.store.ty(*v).lower_bounds.clone();
                        let bounds = bounds
                            .iter()
                            .map(|b| self.extrude(b, pol, level, seen))
                            .collect();
                        self.store.ty_mut(nv).lower_bounds = bounds;
                    }
                    Polarity::Negative => {
                        self.store.ty_mut(*v).lower_bounds.push(copy.clone());
                        let bounds = self.store.ty(*v).upper_bounds.clone();
                        let bounds = bounds
                            .iter()
                            .map(|b| self.extrude(b, pol, level, seen))
                            .collect();
                        self.store.ty_mut(nv).upper_bounds = bounds;
                    }
                }
                copy
            }
        }
    }

    fn extrude_row(&mut self, r: &Row, pol: Polarity, level: u32, seen: &mut Extruded) -> Row {
        if self.store.row_level(r) <= level {
            return r.clone();
        }
        match r {
            Row::Cons(l, f, rest) => Row::Cons(
                l.clone(),
                self.extrude_field(f, pol, level, seen),
                self.extrude_row(rest, pol, level, seen).into(),
            ),
            Row::Empty => Row::Empty,
            Row::Var(v) => {
                if let Some(e) = self.store.row(*v).expansion.clone() {
                    let view = Row::cons(e.label, Field::Var(e.field), Row::Var(e.rest));
                    return self.extrude_row(&view, pol, level, seen);
                }
                if let Some(nv) = seen.rows.get(&(*v, pol)) {
                    return Row::Var(*nv);
                }
                let nv = self.store.fresh_row(level);
                seen.rows.insert((*v, pol), nv);
                let copy = Row::Var(nv);
                match pol {
                    Polarity::Positive => {
                        self.store.row_mut(*v).upper_bounds.push(copy.clone());
                        let bounds = self.store.row(*v).lower_bounds.clone();
                        let bounds = bounds
                            .iter()
                            .map(|b| self.extrude_row(b, pol, level, seen))
                            .collect();
                        self.store.row_mut(nv).lower_bounds = bounds;
                    }
                    Polarity::Negative => {
                        self.store.row_mut(*v).lower_bounds.push(copy.clone());
                        let bounds = self.store.row(*v).upper_bounds.clone();
                        let bounds = bounds
                            .iter()
                            .map(|b| self.extrude_row(b, pol, level, seen))
                            .collect();
                        self.store.row_mut(nv).upper_bounds = bounds;
                    }
                }
                copy
            }
        }
    }

    fn extrude_field(
        &mut self,
        f: &Field,
        pol: Polarity,
        level: u32,
        seen: &mut Extruded,
    ) -> Field {
        if self.store.field_level(f) <= level {
            return f.clone();
        }
        match f {
            Field::Pre(t) => Field::pre(self.extrude(t, pol, level, seen)),
            Field::Abs => Field::Abs,
            Field::Var(v) => {
                if let Some(nv) = seen.fields.get(&(*v, pol)) {
                    return Field::Var(*nv);
                }
                let nv = self.store.fresh_field(level);
                seen.fields.insert((*v, pol), nv);
                let copy = Field::Var(nv);
                match pol {
                    Polarity::Positive => {
                        self.store.field_mut(*v).upper_bounds.push(copy.clone());
                        let bounds = self.store.field(*v).lower_bounds.clone();
                        let bounds = bounds
                            .iter()
                            .map(|b| self.extrude_field(b, pol, level, seen))
                            .collect();
                        self.store.field_mut(nv).lower_bounds = bounds;
                    }
                    Polarity::Negative => {
                        self.store.field_mut(*v).lower_bounds.push(copy.clone());
                        let bounds = self.store.field(*v).upper_bounds.clone();
                        let bounds = bounds
                            .iter()
                            .map(|b| self.extrude_field(b, pol, level, seen))
                            .collect();
                        self.store.field_mut(nv).upper_bounds = bounds;
                    }
                }
                copy
            }
        }
    }
}

fn union_labels(a: &NormalizedRow, b: &NormalizedRow) -> Vec<Label> {
    let mut labels: Vec<Label> = a.fields.keys().chain(b.fields.keys()).cloned().collect();
    labels.sort();
    labels.dedup();
    labels
}

// First label (in sorted order) that one side lacks while its tail is open.
fn first_missing(a: &NormalizedRow, b: &NormalizedRow) -> Option<(RowVar, Label)> {
    for label in union_labels(a, b) {
        for (side, other) in [(a, b), (b, a)] {
            if let Tail::Var(v) = side.tail {
                if !side.fields.contains_key(&label) && other.fields.contains_key(&label) {
                    return Some((v, label));
                }
            }
        }
    }
    None
}
