//! Variable-free types and a direct, brute-force subtyping check.
//!
//! This is deliberately written without reference to the solver: it reads the
//! subtyping rules off structurally and is used as an oracle against
//! [`crate::infer::Engine::constrain`].

use std::collections::BTreeMap;
use std::fmt;

use crate::types::{Field, Row, SimpleType};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundType {
    Int,
    Fun(Box<GroundType>, Box<GroundType>),
    /// Closed record: labels not listed are absent.
    Rec(BTreeMap<String, GroundField>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundField {
    Pre(GroundType),
    Abs,
}

impl GroundType {
    pub fn fun(a: GroundType, b: GroundType) -> Self {
        GroundType::Fun(Box::new(a), Box::new(b))
    }

    pub fn rec<'a>(fields: impl IntoIterator<Item = (&'a str, GroundField)>) -> Self {
        GroundType::Rec(fields.into_iter().map(|(l, f)| (l.to_owned(), f)).collect())
    }

    pub fn is_record(&self) -> bool {
        matches!(self, GroundType::Rec(_))
    }

    /// Constructor nesting depth. `int` and `{}` have depth 0; any other
    /// record is one deeper than its deepest present field.
    pub fn depth(&self) -> usize {
        match self {
            GroundType::Int => 0,
            GroundType::Fun(a, b) => 1 + a.depth().max(b.depth()),
            GroundType::Rec(fs) if fs.is_empty() => 0,
            GroundType::Rec(fs) => {
                1 + fs
                    .values()
                    .map(|f| match f {
                        GroundField::Pre(t) => t.depth(),
                        GroundField::Abs => 0,
                    })
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    /// The same type as an inference-time type, with an explicit closed tail.
    pub fn embed(&self) -> SimpleType {
        match self {
            GroundType::Int => SimpleType::Int,
            GroundType::Fun(a, b) => SimpleType::fun(a.embed(), b.embed()),
            GroundType::Rec(fs) => SimpleType::Rec(Row::from_fields(
                fs.iter().map(|(l, f)| {
                    let f = match f {
                        GroundField::Pre(t) => Field::pre(t.embed()),
                        GroundField::Abs => Field::Abs,
                    };
                    (l.as_str().into(), f)
                }),
                Row::Empty,
            )),
        }
    }
}

impl fmt::Display for GroundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundType::Int => f.write_str("int"),
            GroundType::Fun(a, b) => write!(f, "({a} -> {b})"),
            GroundType::Rec(fs) => {
                f.write_str("{")?;
                for (i, (l, fld)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match fld {
                        GroundField::Pre(t) => write!(f, "{l}: {t}")?,
                        GroundField::Abs => write!(f, "{l}: abs")?,
                    }
                }
                f.write_str("}")
            }
        }
    }
}

/// Decides `a <= b`.
pub fn ground_subtype(a: &GroundType, b: &GroundType) -> bool {
    match (a, b) {
        (GroundType::Int, GroundType::Int) => true,
        (GroundType::Fun(a1, r1), GroundType::Fun(a2, r2)) => {
            ground_subtype(a2, a1) && ground_subtype(r1, r2)
        }
        (GroundType::Rec(fa), GroundType::Rec(fb)) => fb.iter().all(|(l, want)| {
            let have = fa.get(l).unwrap_or(&GroundField::Abs);
            field_subtype(have, want)
        }),
        _ => false,
    }
}

fn field_subtype(a: &GroundField, b: &GroundField) -> bool {
    match (a, b) {
        (_, GroundField::Abs) => true,
        (GroundField::Abs, GroundField::Pre(_)) => false,
        (GroundField::Pre(x), GroundField::Pre(y)) => ground_subtype(x, y),
    }
}

/// Every ground type of depth at most `max_depth` whose records use only
/// `labels`. A label may be missing, explicitly absent, or present, so `{}`
/// and `{x: abs}` are both produced. Order is deterministic.
pub fn enumerate_ground_types(max_depth: usize, labels: &[&str]) -> Vec<GroundType> {
    let mut labels: Vec<&str> = labels.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let mut all = vec![GroundType::Int, GroundType::Rec(BTreeMap::new())];
    for _ in 0..max_depth {
        let prev = all;
        all = vec![GroundType::Int];
        for a in &prev {
            for b in &prev {
                all.push(GroundType::fun(a.clone(), b.clone()));
            }
        }
        let mut choices = vec![None, Some(GroundField::Abs)];
        choices.extend(prev.iter().cloned().map(|t| Some(GroundField::Pre(t))));
        let mut records = vec![BTreeMap::new()];
        for l in &labels {
            let mut next = Vec::with_capacity(records.len() * choices.len());
            for r in &records {
                for c in &choices {
                    let mut r: BTreeMap<String, GroundField> = r.clone();
                    if let Some(f) = c {
                        r.insert((*l).to_owned(), f.clone());
                    }
                    next.push(r);
                }
            }
            records = next;
        }
        all.extend(records.into_iter().map(GroundType::Rec));
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn pre_int() -> GroundField {
        GroundField::Pre(GroundType::Int)
    }

    // Independent count: one int, every pair of smaller types as a function,
    // and per label three kinds of choice (missing, abs, pre of a smaller type).
    fn count(depth: usize, labels: u32) -> usize {
        if depth == 0 {
            return 2;
        }
        let n = count(depth - 1, labels);
        1 + n * n + (2 + n).pow(labels)
    }

    #[test]
    fn depth_zero() {
        assert_eq!(
            enumerate_ground_types(0, &["x"]),
            vec![GroundType::Int, GroundType::rec([])]
        );
    }

    #[test]
    fn counts_match_recurrence() {
        assert_eq!(count(1, 1), 9);
        assert_eq!(count(1, 2), 21);
        assert_eq!(count(2, 2), 971);
        for (d, ls) in [
            (1, vec!["x"]),
            (1, vec!["x", "y"]),
            (2, vec!["x"]),
            (2, vec!["x", "y"]),
        ] {
            let all = enumerate_ground_types(d, &ls);
            assert_eq!(
                all.len(),
                count(d, ls.len() as u32),
                "depth {d}, labels {ls:?}"
            );
            let distinct: HashSet<_> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
            assert!(all.iter().all(|t| t.depth() <= d));
        }
    }

    #[test]
    fn depth_one_members() {
        let all = enumerate_ground_types(1, &["x"]);
        assert!(all.contains(&GroundType::rec([("x", pre_int())])));
        assert!(all.contains(&GroundType::rec([("x", GroundField::Abs)])));
        assert!(all.contains(&GroundType::fun(GroundType::Int, GroundType::Int)));
    }

    #[test]
    fn enumeration_is_deterministic() {
        assert_eq!(
            enumerate_ground_types(2, &["y", "x"]),
            enumerate_ground_types(2, &["x", "y"])
        );
    }

    #[test]
    fn rules() {
        let x_int = GroundType::rec([("x", pre_int())]);
        let x_abs = GroundType::rec([("x", GroundField::Abs)]);
        let xy = GroundType::rec([("x", pre_int()), ("y", pre_int())]);
        assert!(ground_subtype(&GroundType::Int, &GroundType::Int));
        assert!(ground_subtype(&x_int, &x_abs));
        assert!(!ground_subtype(&x_abs, &x_int));
        assert!(ground_subtype(&xy, &x_int));
        assert!(!ground_subtype(&x_int, &xy));
        assert!(ground_subtype(&x_abs, &GroundType::rec([])));
        assert!(ground_subtype(&GroundType::rec([]), &x_abs));
        assert!(!ground_subtype(&GroundType::Int, &x_int));
        let f = |a: &GroundType, b: &GroundType| GroundType::fun(a.clone(), b.clone());
        assert!(ground_subtype(&f(&x_int, &xy), &f(&xy, &x_int)));
        assert!(!ground_subtype(&f(&xy, &x_int), &f(&x_int, &xy)));
    }

    #[test]
    fn embed_shape() {
        let t = GroundType::rec([("x", pre_int()), ("y", GroundField::Abs)]);
        assert_eq!(
            t.embed(),
            SimpleType::Rec(Row::cons(
                "x",
                Field::pre(SimpleType::Int),
                Row::cons("y", Field::Abs, Row::Empty)
            ))
        );
    }

    #[test]
    fn display() {
        let t = GroundType::fun(
            GroundType::rec([("x", pre_int()), ("y", GroundField::Abs)]),
            GroundType::Int,
        );
        assert_eq!(t.to_string(), "({x: int, y: abs} -> int)");
    }
}
