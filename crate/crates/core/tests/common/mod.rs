#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rowsub::coalesce::{normalize_var_names, print_type};
use rowsub::infer::{infer_type, TypeError};
use rowsub::syntax::{parse, Term};

pub const LABELS: [&str; 3] = ["x", "y", "z"];
const NAMES: [&str; 4] = ["a", "b", "f", "g"];

/// Terms exercised by the coalescing checks: everything named in the docs
/// plus a spread of record, polymorphism and recursion cases.
pub const CORPUS: &[&str] = &[
    "42",
    "fun x -> x",
    "fun r -> r with {y = 1}",
    "((fun r -> r with {y = 1}) {x = 1}).x",
    "(fun r -> r with {y = 1}) {x = 1}",
    "fun r -> r.x",
    "fun r -> {a = r.x, b = r.y}",
    "fun f -> fun x -> f (f x)",
    "fun x -> fun y -> x",
    "let rec id = fun x -> x in {a = id 1, b = id {x = 2}}",
    "let rec r = {self = r} in r",
    "let rec f = fun x -> f x in f",
    "{x = 1} with {x = {}}",
    "fun r -> (r with {x = 1}).x",
    "fun r -> (r with {x = 1}) with {y = r.z}",
    "fun r -> {inner = r with {a = 1}}",
    "(fun p -> p.x) ({x = 1, y = 2} with {z = 3})",
    "fun f -> {a = f 1, b = f 2}",
    "fun r -> fun s -> {left = r.x, right = s.x}",
    "let rec len = fun l -> len l.next in len",
    "fun x -> {a = x, b = x}",
    "fun g -> g {x = 1} with {y = 2}",
];

pub fn infer_str(src: &str) -> Result<String, TypeError> {
    infer_type(&parse(src).expect("test input parses")).map(|t| print_type(&t))
}

pub fn infer_norm(t: &Term) -> Result<String, TypeError> {
    infer_type(t).map(|t| normalize_var_names(&print_type(&t)))
}

/// Random closed term of depth at most `depth`.
pub fn gen_term<R: Rng>(rng: &mut R, depth: u32) -> Term {
    gen_in(rng, depth, &mut Vec::new())
}

fn gen_in<R: Rng>(rng: &mut R, depth: u32, scope: &mut Vec<String>) -> Term {
    let leaf = |rng: &mut R, scope: &Vec<String>| {
        if !scope.is_empty() && rng.gen_bool(0.6) {
            Term::Var(scope.choose(rng).unwrap().clone())
        } else if rng.gen_bool(0.3) {
            Term::Record(Vec::new())
        } else {
            Term::int(rng.gen_range(0..10))
        }
    };
    if depth == 0 {
        return leaf(rng, scope);
    }
    let d = depth - 1;
    match rng.gen_range(0..12) {
        0 => leaf(rng, scope),
        1 | 2 => {
            let x = NAMES.choose(rng).unwrap().to_string();
            scope.push(x.clone());
            let body = gen_in(rng, d, scope);
            scope.pop();
            Term::Lam(x, Box::new(body))
        }
        3 | 4 => Term::app(gen_in(rng, d, scope), gen_in(rng, d, scope)),
        5 | 6 => {
            let n = rng.gen_range(1..=3);
            let mut labels = LABELS.to_vec();
            labels.shuffle(rng);
            let fields = labels[..n]
                .iter()
                .map(|l| (l.to_string(), gen_in(rng, d, scope)))
                .collect();
            Term::Record(fields)
        }
        7 | 8 => Term::proj(gen_in(rng, d, scope), LABELS.choose(rng).unwrap()),
        9 | 10 => Term::extend(
            gen_in(rng, d, scope),
            LABELS.choose(rng).unwrap(),
            gen_in(rng, d, scope),
        ),
        _ if d == 0 => leaf(rng, scope),
        _ => {
            let f = NAMES.choose(rng).unwrap().to_string();
            let x = NAMES.choose(rng).unwrap().to_string();
            scope.push(f.clone());
            scope.push(x.clone());
            let fn_body = gen_in(rng, d - 1, scope);
            scope.pop();
            let body = gen_in(rng, d, scope);
            scope.pop();
            Term::LetRec(f, Box::new(Term::Lam(x, Box::new(fn_body))), Box::new(body))
        }
    }
}

pub fn term_depth(t: &Term) -> u32 {
    match t {
        Term::IntLit(_) | Term::Var(_) => 0,
        Term::Record(fs) if fs.is_empty() => 0,
        Term::Lam(_, b) | Term::Proj(b, _) => 1 + term_depth(b),
        Term::App(a, b) | Term::Extend(a, _, b) | Term::LetRec(_, a, b) => {
            1 + term_depth(a).max(term_depth(b))
        }
        Term::Record(fs) => 1 + fs.iter().map(|(_, v)| term_depth(v)).max().unwrap_or(0),
    }
}

/// All orderings of `items`.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

/// Runs `f` on a thread with a large stack; deep evaluation recurses.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(f)
        .expect("spawn")
        .join()
        .expect("worker thread")
}
