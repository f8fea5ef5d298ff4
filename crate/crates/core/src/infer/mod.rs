//! Type inference: the term walk, let-polymorphism, and the entry point that
//! ties typing to coalescing.

mod constrain;
mod error;

use std::collections::HashMap;

pub use constrain::ConstraintCache;
pub use error::{TypeError, TypeErrorKind};

use crate::coalesce::{coalesce, print_type, OutputType, Polarity};
use crate::syntax::Term;
use crate::trace::{TraceEvent, Tracer};
use crate::types::{
    EnvEntry, Field, FieldVar, Label, Row, RowVar, Scheme, SimpleType, TyVar, TypeEnv, VarStore,
};

/// One inference session. Owns every variable it creates; not shareable
/// across threads, but independent engines share nothing.
#[derive(Debug, Default)]
pub struct Engine {
    store: VarStore,
    tracer: Option<Tracer>,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    /// An engine that records a derivation trace.
    pub fn with_trace() -> Self {
        Self {
            store: VarStore::new(),
            tracer: Some(Tracer::default()),
        }
    }

    pub fn store(&self) -> &VarStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut VarStore {
        &mut self.store
    }

    /// Events recorded so far; clears the buffer.
    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.tracer.as_mut().map(Tracer::take).unwrap_or_default()
    }

    pub fn fresh_type_var(&mut self, level: u32) -> SimpleType {
        SimpleType::Var(self.store.fresh_type(level))
    }

    pub fn fresh_row_var(&mut self, level: u32) -> Row {
        Row::Var(self.store.fresh_row(level))
    }

    pub fn fresh_field_var(&mut self, level: u32) -> Field {
        Field::Var(self.store.fresh_field(level))
    }

    /// Types a closed term and coalesces the result.
    pub fn infer(&mut self, t: &Term) -> Result<OutputType, TypeError> {
        let ty = self.type_term_at(t, &TypeEnv::new(), 0, 0)?;
        let out = coalesce(&self.store, &ty, Polarity::Positive);
        if let Some(tr) = &mut self.tracer {
            tr.result_text(0, print_type(&out));
        }
        Ok(out)
    }

    pub fn type_term(
        &mut self,
        t: &Term,
        env: &TypeEnv,
        level: u32,
    ) -> Result<SimpleType, TypeError> {
        let ty = self.type_term_at(t, env, level, 0)?;
        if let Some(tr) = &mut self.tracer {
            tr.result(0, &self.store, &ty);
        }
        Ok(ty)
    }

    fn type_term_at(
        &mut self,
        t: &Term,
        env: &TypeEnv,
        level: u32,
        depth: usize,
    ) -> Result<SimpleType, TypeError> {
        if let Some(tr) = &mut self.tracer {
            tr.term(depth, t);
        }
        let inner = depth + 1;
        let ty = match t {
            Term::IntLit(_) => SimpleType::Int,
            Term::Var(x) => match env.lookup(x) {
                Some(EnvEntry::Mono(ty)) => ty.clone(),
                Some(EnvEntry::Poly(scheme)) => {
                    let scheme = scheme.clone();
                    self.instantiate(&scheme, level)
                }
                None => return Err(TypeError::unbound(x)),
            },
            Term::Lam(x, body) => {
                let param = self.fresh_type_var(level);
                let env = env.extend(x.clone(), EnvEntry::Mono(param.clone()));
                let body = self.type_term_at(body, &env, level, inner)?;
                SimpleType::fun(param, body)
            }
            Term::App(f, a) => {
                let f = self.type_term_at(f, env, level, inner)?;
                let a = self.type_term_at(a, env, level, inner)?;
                let res = self.fresh_type_var(level);
                self.constrain_at(&f, &SimpleType::fun(a, res.clone()), inner)?;
                res
            }
            Term::Record(fields) => {
                let mut typed = Vec::with_capacity(fields.len());
                for (l, v) in fields {
                    let ty = self.type_term_at(v, env, level, inner)?;
                    typed.push((Label::from(l.as_str()), Field::pre(ty)));
                }
                SimpleType::Rec(Row::from_fields(typed, Row::Empty))
            }
            Term::Proj(s, l) => {
                let s = self.type_term_at(s, env, level, inner)?;
                let res = self.fresh_type_var(level);
                let rest = self.fresh_row_var(level);
                let expected =
                    SimpleType::Rec(Row::cons(l.as_str(), Field::Pre(res.clone().into()), rest));
                self.constrain_at(&s, &expected, inner)?;
                res
            }
            Term::Extend(s, l, v) => {
                let s = self.type_term_at(s, env, level, inner)?;
                let old = self.fresh_field_var(level);
                let rest = self.fresh_row_var(level);
                let expected = SimpleType::Rec(Row::cons(l.as_str(), old, rest.clone()));
                self.constrain_at(&s, &expected, inner)?;
                let v = self.type_term_at(v, env, level, inner)?;
                SimpleType::Rec(Row::cons(l.as_str(), Field::pre(v), rest))
            }
            Term::LetRec(x, bound, body) => {
                let rec_var = self.fresh_type_var(level + 1);
                let inner_env = env.extend(x.clone(), EnvEntry::Mono(rec_var.clone()));
                let bound_ty = self.type_term_at(bound, &inner_env, level + 1, inner)?;
                self.constrain_at(&bound_ty, &rec_var, inner)?;
                let scheme = generalize(rec_var, level);
                let env = env.extend(x.clone(), EnvEntry::Poly(scheme));
                self.type_term_at(body, &env, level, inner)?
            }
        };
        if depth > 0 {
            if let Some(tr) = &mut self.tracer {
                tr.result(depth, &self.store, &ty);
            }
        }
        Ok(ty)
    }

    /// Copies every variable above the scheme's level into a fresh variable
    /// at `level`, with bounds copied the same way. Expanded row variables are
    /// copied through their expansion.
    pub fn instantiate(&mut self, scheme: &Scheme, level: u32) -> SimpleType {
        let mut copies = Copies::default();
        self.freshen(&scheme.body, scheme.level, level, &mut copies)
    }

    fn freshen(
        &mut self,
        t: &SimpleType,
        limit: u32,
        level: u32,
        copies: &mut Copies,
    ) -> SimpleType {
        if self.store.level_of(t) <= limit {
            return t.clone();
        }
        match t {
            SimpleType::Int => SimpleType::Int,
            SimpleType::Fun(a, b) => SimpleType::fun(
                self.freshen(a, limit, level, copies),
                self.freshen(b, limit, level, copies),
            ),
            SimpleType::Rec(r) => SimpleType::Rec(self.freshen_row(r, limit, level, copies)),
            SimpleType::Var(v) => {
                if let Some(nv) = copies.types.get(v) {
                    return SimpleType::Var(*nv);
                }
                let nv = self.store.fresh_type(level);
                copies.types.insert(*v, nv);
                let state = self.store.ty(*v).clone();
                let lower = state
                    .lower_bounds
                    .iter()
                    .map(|b| self.freshen(b, limit, level, copies))
                    .collect();
                let upper = state
                    .upper_bounds
                    .iter()
                    .map(|b| self.freshen(b, limit, level, copies))
                    .collect();
                let new = self.store.ty_mut(nv);
                new.lower_bounds = lower;
                new.upper_bounds = upper;
                SimpleType::Var(nv)
            }
        }
    }

    fn freshen_row(&mut self, r: &Row, limit: u32, level: u32, copies: &mut Copies) -> Row {
        if self.store.row_level(r) <= limit {
            return r.clone();
        }
        match r {
            Row::Cons(l, f, rest) => Row::Cons(
                l.clone(),
                self.freshen_field(f, limit, level, copies),
                self.freshen_row(rest, limit, level, copies).into(),
            ),
            Row::Empty => Row::Empty,
            Row::Var(v) => {
                if let Some(e) = self.store.row(*v).expansion.clone() {
                    let view = Row::cons(e.label, Field::Var(e.field), Row::Var(e.rest));
                    return self.freshen_row(&view, limit, level, copies);
                }
                if let Some(nv) = copies.rows.get(v) {
                    return Row::Var(*nv);
                }
                let nv = self.store.fresh_row(level);
                copies.rows.insert(*v, nv);
                let state = self.store.row(*v).clone();
                let lower = state
                    .lower_bounds
                    .iter()
                    .map(|b| self.freshen_row(b, limit, level, copies))
                    .collect();
                let upper = state
                    .upper_bounds
                    .iter()
                    .map(|b| self.freshen_row(b, limit, level, copies))
                    .collect();
                let new = self.store.row_mut(nv);
                new.lower_bounds = lower;
                new.upper_bounds = upper;
                Row::Var(nv)
            }
        }
    }

    fn freshen_field(&mut self, f: &Field, limit: u32, level: u32, copies: &mut Copies) -> Field {
        if self.store.field_level(f) <= limit {
            return f.clone();
        }
        match f {
            Field::Pre(t) => Field::pre(self.freshen(t, limit, level, copies)),
            Field::Abs => Field::Abs,
            Field::Var(v) => {
                if let Some(nv) = copies.fields.get(v) {
                    return Field::Var(*nv);
                }
                let nv = self.store.fresh_field(level);
                copies.fields.insert(*v, nv);
                let state = self.store.field(*v).clone();
                let lower = state
                    .lower_bounds
                    .iter()
                    .map(|b| self.freshen_field(b, limit, level, copies))
                    .collect();
                let upper = state
                    .upper_bounds
                    .iter()
                    .map(|b| self.freshen_field(b, limit, level, copies))
                    .collect();
                let new = self.store.field_mut(nv);
                new.lower_bounds = lower;
                new.upper_bounds = upper;
                Field::Var(nv)
            }
        }
    }
}

/// Marks `t` as polymorphic in every variable above `level`.
pub fn generalize(t: SimpleType, level: u32) -> Scheme {
    Scheme { level, body: t }
}

/// Variable copies made during one instantiation or extrusion.
#[derive(Default)]
pub(crate) struct Copies {
    pub types: HashMap<TyVar, TyVar>,
    pub rows: HashMap<RowVar, RowVar>,
    pub fields: HashMap<FieldVar, FieldVar>,
}

/// Parses nothing; types and coalesces `t` in a fresh engine.
pub fn infer_type(t: &Term) -> Result<OutputType, TypeError> {
    Engine::new().infer(t)
}
