//! Property tests for the invariants of the solver, coalescer and evaluator.

mod common;

use std::collections::{BTreeMap, HashSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{gen_term, with_big_stack, CORPUS};
use rowsub::cli::infer_source;
use rowsub::coalesce::{
    coalesce_with, normalize, normalize_var_names, print_type, CoalesceOptions, OTail, OutputField,
    OutputType, Polarity,
};
use rowsub::eval::{eval, EvalError, Value};
use rowsub::ground::{ground_subtype, GroundField, GroundType};
use rowsub::infer::Engine;
use rowsub::syntax::{parse, Term};
use rowsub::types::{Field, Row, SimpleType, Tail, TypeEnv};

fn term_strategy() -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(|seed| gen_term(&mut ChaCha8Rng::seed_from_u64(seed), 5))
}

fn ground_strategy() -> impl Strategy<Value = GroundType> {
    let leaf = prop_oneof![Just(GroundType::Int), Just(GroundType::rec([]))];
    leaf.prop_recursive(3, 24, 3, |inner| {
        let field = prop_oneof![
            1 => Just(None),
            1 => Just(Some(GroundField::Abs)),
            3 => inner.clone().prop_map(|t| Some(GroundField::Pre(t))),
        ];
        prop_oneof![
            (inner.clone(), inner).prop_map(|(a, b)| GroundType::fun(a, b)),
            (field.clone(), field.clone(), field).prop_map(|(x, y, z)| {
                GroundType::Rec(
                    [("x", x), ("y", y), ("z", z)]
                        .into_iter()
                        .filter_map(|(l, f)| f.map(|f| (l.to_owned(), f)))
                        .collect(),
                )
            }),
        ]
    })
}

// Consistently renames every binder, so the result is alpha-equivalent.
fn rename(t: &Term, scope: &mut Vec<(String, String)>, next: &mut usize) -> Term {
    let fresh = |next: &mut usize| {
        *next += 1;
        format!("v{next}")
    };
    let lookup = |scope: &[(String, String)], x: &str| {
        scope
            .iter()
            .rev()
            .find(|(old, _)| old == x)
            .map(|(_, new)| new.clone())
            .unwrap_or_else(|| x.to_owned())
    };
    match t {
        Term::IntLit(_) => t.clone(),
        Term::Var(x) => Term::Var(lookup(scope, x)),
        Term::Lam(x, b) => {
            let nx = fresh(next);
            scope.push((x.clone(), nx.clone()));
            let b = rename(b, scope, next);
            scope.pop();
            Term::Lam(nx, Box::new(b))
        }
        Term::App(f, a) => Term::app(rename(f, scope, next), rename(a, scope, next)),
        Term::Record(fs) => Term::Record(
            fs.iter()
                .map(|(l, v)| (l.clone(), rename(v, scope, next)))
                .collect(),
        ),
        Term::Proj(s, l) => Term::Proj(Box::new(rename(s, scope, next)), l.clone()),
        Term::Extend(s, l, v) => Term::Extend(
            Box::new(rename(s, scope, next)),
            l.clone(),
            Box::new(rename(v, scope, next)),
        ),
        Term::LetRec(x, bound, body) => {
            let nx = fresh(next);
            scope.push((x.clone(), nx.clone()));
            let bound = rename(bound, scope, next);
            let body = rename(body, scope, next);
            scope.pop();
            Term::LetRec(nx, Box::new(bound), Box::new(body))
        }
    }
}

fn infer_printed(t: &Term) -> Option<String> {
    Engine::new().infer(t).ok().map(|t| print_type(&t))
}

// Records, for each type variable, the polarities it occurs at.
fn occurrences(t: &OutputType, pol: Polarity, out: &mut HashSet<(u32, Polarity)>) {
    match t {
        OutputType::Int | OutputType::Top | OutputType::Bot => {}
        OutputType::Var(v) => {
            out.insert((*v, pol));
        }
        OutputType::Fun(a, b) => {
            occurrences(a, pol.flip(), out);
            occurrences(b, pol, out);
        }
        OutputType::Rec(r) => {
            for f in r.fields.values() {
                if let OutputField::Pre(t) = f {
                    occurrences(t, pol, out);
                }
            }
        }
        OutputType::Union(ts) | OutputType::Inter(ts) => {
            for t in ts {
                occurrences(t, pol, out);
            }
        }
        OutputType::Mu(_, body) => occurrences(body, pol, out),
    }
}

fn binders(t: &OutputType, out: &mut HashSet<u32>) {
    match t {
        OutputType::Mu(v, body) => {
            out.insert(*v);
            binders(body, out);
        }
        OutputType::Fun(a, b) => {
            binders(a, out);
            binders(b, out);
        }
        OutputType::Rec(r) => {
            for f in r.fields.values() {
                if let OutputField::Pre(t) = f {
                    binders(t, out);
                }
            }
        }
        OutputType::Union(ts) | OutputType::Inter(ts) => ts.iter().for_each(|t| binders(t, out)),
        _ => {}
    }
}

// Replaces single-polarity, non-binder type variables by bot/top.
fn drop_polar(t: &OutputType, single: &BTreeMap<u32, OutputType>) -> OutputType {
    let go = |t: &OutputType| drop_polar(t, single);
    match t {
        OutputType::Var(v) => single.get(v).cloned().unwrap_or_else(|| t.clone()),
        OutputType::Int | OutputType::Top | OutputType::Bot => t.clone(),
        OutputType::Fun(a, b) => OutputType::fun(go(a), go(b)),
        OutputType::Rec(r) => {
            let mut r = r.clone();
            for f in r.fields.values_mut() {
                if let OutputField::Pre(t) = f {
                    *t = go(t);
                }
            }
            OutputType::Rec(r)
        }
        OutputType::Union(ts) => OutputType::Union(ts.iter().map(go).collect()),
        OutputType::Inter(ts) => OutputType::Inter(ts.iter().map(go).collect()),
        OutputType::Mu(v, body) => OutputType::Mu(*v, Box::new(go(body))),
    }
}

// Elimination only removes single-polarity type variables: dropping those
// from the uneliminated form by hand gives the same printed type.
fn elimination_is_safe(t: &Term) -> Result<(), String> {
    let mut e = Engine::new();
    let Ok(ty) = e.type_term(t, &TypeEnv::new(), 0) else {
        return Ok(());
    };
    let off = CoalesceOptions {
        eliminate_polar_vars: false,
    };
    let full = coalesce_with(e.store(), &ty, Polarity::Positive, off).ty;
    let eliminated = coalesce_with(
        e.store(),
        &ty,
        Polarity::Positive,
        CoalesceOptions::default(),
    )
    .ty;
    let mut seen = HashSet::new();
    occurrences(&full, Polarity::Positive, &mut seen);
    let mut mus = HashSet::new();
    binders(&full, &mut mus);
    let single: BTreeMap<u32, OutputType> = seen
        .iter()
        .filter(|(v, _)| !mus.contains(v))
        .filter_map(|&(v, pol)| {
            let other = seen.contains(&(v, pol.flip()));
            match (other, pol) {
                (true, _) => None,
                (false, Polarity::Positive) => Some((v, OutputType::Bot)),
                (false, Polarity::Negative) => Some((v, OutputType::Top)),
            }
        })
        .collect();
    let by_hand = normalize(&drop_polar(&full, &single), &mut Vec::new());
    let (a, b) = (print_type(&by_hand), print_type(&eliminated));
    if a == b {
        Ok(())
    } else {
        Err(format!(
            "`{t}`: by hand {a}, eliminated {b}, full {}",
            print_type(&full)
        ))
    }
}

// Every mu binder is used in its body and no binder escapes.
fn mu_well_scoped(t: &OutputType, first_binder: u32, scope: &mut Vec<u32>) -> bool {
    match t {
        OutputType::Var(v) => *v < first_binder || scope.contains(v),
        OutputType::Int | OutputType::Top | OutputType::Bot => true,
        OutputType::Fun(a, b) => {
            mu_well_scoped(a, first_binder, scope) && mu_well_scoped(b, first_binder, scope)
        }
        OutputType::Rec(r) => r.fields.values().all(|f| match f {
            OutputField::Pre(t) => mu_well_scoped(t, first_binder, scope),
            _ => true,
        }),
        OutputType::Union(ts) | OutputType::Inter(ts) => {
            ts.iter().all(|t| mu_well_scoped(t, first_binder, scope))
        }
        OutputType::Mu(v, body) => {
            if !body.mentions(*v) {
                return false;
            }
            scope.push(*v);
            let ok = mu_well_scoped(body, first_binder, scope);
            scope.pop();
            ok
        }
    }
}

#[test]
fn elimination_safety_on_corpus() {
    for src in CORPUS {
        elimination_is_safe(&parse(src).unwrap()).unwrap();
    }
}

#[test]
fn corpus_types() {
    // Spot values for the corpus, so regressions in printing show up as a
    // readable diff.
    let expected = [
        ("fun r -> r.x", "{x: 'a ; 'r0} -> 'a"),
        (
            "fun r -> {a = r.x, b = r.y}",
            "{x: 'a, y: 'b ; 'r0} -> {a: 'a, b: 'b}",
        ),
        ("fun x -> fun y -> x", "'a -> top -> 'a"),
        // no co-occurrence simplification, so the two uses of f stay separate
        (
            "fun f -> fun x -> f (f x)",
            "('a -> 'b) /\\ ('b -> 'c) -> 'a -> 'c",
        ),
        ("let rec r = {self = r} in r", "mu 'a. {self: 'a}"),
        ("(fun p -> p.x) ({x = 1, y = 2} with {z = 3})", "int"),
        ("fun r -> (r with {x = 1}).x", "{x: 'f0 ; 'r0} -> int"),
    ];
    for (src, want) in expected {
        let got = common::infer_str(src).unwrap();
        assert_eq!(
            normalize_var_names(&got),
            normalize_var_names(want),
            "{src}"
        );
    }
    for src in CORPUS {
        assert!(common::infer_str(src).is_ok(), "{src}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn well_typed_terms_do_not_get_stuck(t in term_strategy()) {
        if infer_printed(&t).is_some() {
            let t2 = t.clone();
            let r = with_big_stack(move || eval(&t2, 10_000).map(|_| ()));
            prop_assert!(!matches!(r, Err(EvalError::Stuck(_))), "{} went wrong: {:?}", t, r);
        }
    }

    #[test]
    fn alpha_equivalent_terms_get_equal_types(t in term_strategy()) {
        let renamed = rename(&t, &mut Vec::new(), &mut 0);
        let a = infer_printed(&t).map(|s| normalize_var_names(&s));
        let b = infer_printed(&renamed).map(|s| normalize_var_names(&s));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn elimination_safety(t in term_strategy()) {
        prop_assert_eq!(elimination_is_safe(&t), Ok(()));
    }

    #[test]
    fn bounds_are_consistent(t in term_strategy()) {
        // every lower bound of a variable is below each of its upper bounds
        let mut e = Engine::new();
        if e.type_term(&t, &TypeEnv::new(), 0).is_ok() {
            let store = e.store().clone();
            for v in store.type_vars() {
                let s = store.ty(v);
                for (l, u) in s.lower_bounds.iter().flat_map(|l| s.upper_bounds.iter().map(move |u| (l, u))) {
                    prop_assert!(e.constrain(l, u).is_ok());
                }
            }
            for v in store.row_vars() {
                let s = store.row(v);
                for (l, u) in s.lower_bounds.iter().flat_map(|l| s.upper_bounds.iter().map(move |u| (l, u))) {
                    prop_assert!(e.constrain_row(l, u).is_ok());
                }
                if let Some(x) = &s.expansion {
                    let n = store.normalize_row(&Row::Var(v));
                    prop_assert!(n.fields.contains_key(&x.label));
                }
            }
            for v in store.field_vars() {
                let s = store.field(v);
                for (l, u) in s.lower_bounds.iter().flat_map(|l| s.upper_bounds.iter().map(move |u| (l, u))) {
                    prop_assert!(e.constrain_field(l, u).is_ok());
                }
            }
        }
    }

    #[test]
    fn mu_binders_are_well_scoped(t in term_strategy()) {
        let mut e = Engine::new();
        if let Ok(ty) = e.infer(&t) {
            let first = e.store().len() as u32;
            prop_assert!(mu_well_scoped(&ty, first, &mut Vec::new()), "{}", print_type(&ty));
        }
    }

    #[test]
    fn record_types_agree_with_values(t in term_strategy()) {
        let Ok(ty) = Engine::new().infer(&t) else { return Ok(()); };
        let OutputType::Rec(r) = &ty else { return Ok(()); };
        if r.tail != OTail::Closed {
            return Ok(());
        }
        let int_labels: Vec<String> = r
            .fields
            .iter()
            .filter(|(_, f)| **f == OutputField::Pre(OutputType::Int))
            .map(|(l, _)| l.to_string())
            .collect();
        let t2 = t.clone();
        let checked = with_big_stack(move || {
            let Ok(v) = eval(&t2, 10_000) else {
                return Ok(());
            };
            let Value::Record(fs) = &v else {
                return Err(format!("{v} is not a record"));
            };
            match int_labels.iter().find(|l| !fs.get(*l).is_some_and(Value::is_int)) {
                Some(l) => Err(format!("field {l} of {v} is not an int")),
                None => Ok(()),
            }
        });
        prop_assert!(checked.is_ok(), "{}: {:?}", t, checked);
    }

    #[test]
    fn trace_is_deterministic_and_ends_in_result(t in term_strategy()) {
        let src = t.to_string();
        let run = || {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = infer_source(&src, true, &mut out, &mut err);
            (code, String::from_utf8(out).unwrap(), err)
        };
        let first = run();
        prop_assert_eq!(&first, &run());
        let (code, out, _) = first;
        if code == 0 {
            let lines: Vec<&str> = out.lines().collect();
            let inferred = lines[lines.len() - 1].strip_prefix("inferred: ").unwrap();
            prop_assert_eq!(lines[lines.len() - 2], format!("= {inferred}"));
        }
    }

    #[test]
    fn ground_oracle_agrees_at_depth_three(a in ground_strategy(), b in ground_strategy()) {
        let solver = Engine::new().constrain(&a.embed(), &b.embed()).is_ok();
        prop_assert_eq!(solver, ground_subtype(&a, &b), "{} <= {}", a, b);
    }

    #[test]
    fn ground_subtyping_is_transitive(a in ground_strategy(), b in ground_strategy(), c in ground_strategy()) {
        if ground_subtype(&a, &b) && ground_subtype(&b, &c) {
            prop_assert!(ground_subtype(&a, &c));
        }
        prop_assert!(ground_subtype(&a, &a));
    }

    #[test]
    fn expansion_is_a_function_of_var_and_label(labels in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 1..8)) {
        let mut e = Engine::new();
        let rho = e.store_mut().fresh_row(0);
        let first: Vec<_> = labels.iter().map(|l| e.expand(rho, l).unwrap()).collect();
        let again: Vec<_> = labels.iter().map(|l| e.expand(rho, l).unwrap()).collect();
        prop_assert_eq!(&first, &again);
        let n = e.store().normalize_row(&Row::Var(rho));
        let distinct: HashSet<_> = labels.iter().collect();
        prop_assert_eq!(n.fields.len(), distinct.len());
        let Tail::Var(tail) = n.tail else { unreachable!() };
        prop_assert!(e.store().row(tail).expansion.is_none());
    }

    #[test]
    fn normalize_row_is_idempotent(
        spine in prop::collection::vec((prop::sample::select(vec!["a", "b", "c"]), any::<bool>()), 0..5),
        expansions in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..4),
        closed in any::<bool>(),
    ) {
        let mut e = Engine::new();
        let rho = e.store_mut().fresh_row(0);
        for l in &expansions {
            e.expand(rho, l).unwrap();
        }
        let tail = if closed { Row::Empty } else { Row::Var(rho) };
        let row = spine.iter().rev().fold(tail, |rest, (l, present)| {
            let f = if *present { Field::pre(SimpleType::Int) } else { Field::Abs };
            Row::cons(*l, f, rest)
        });
        let n = e.store().normalize_row(&row);
        let again = e.store().normalize_row(&n.to_row());
        prop_assert_eq!(&n, &again);
        if let Tail::Var(v) = n.tail {
            prop_assert!(e.store().row(v).expansion.is_none());
        }
    }
}
