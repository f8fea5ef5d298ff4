//! Call-by-value big-step evaluator, used to check that well-typed programs
//! do not go wrong.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::syntax::Term;

#[derive(Clone, Debug)]
pub enum Value {
    Int(BigUint),
    Closure(Closure),
    /// Shared so that passing records around does not copy them.
    Record(Rc<BTreeMap<String, Value>>),
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub param: String,
    pub body: Rc<Term>,
    pub env: ValueEnv,
}

impl Value {
    pub fn as_record(&self) -> Option<&BTreeMap<String, Value>> {
        match self {
            Value::Record(fs) => Some(&**fs),
            _ => None,
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, Value::Int(_))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Closure(_) => f.write_str("<fun>"),
            Value::Record(fs) => {
                f.write_str("{")?;
                for (i, (l, v)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l} = {v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Clone, Debug, Error)]
pub enum EvalError {
    #[error("evaluation stuck at `{0}`")]
    Stuck(Term),
    #[error("out of fuel")]
    OutOfFuel,
}

/// Persistent environment. A recursive binding stores the lambda itself and
/// builds its closure on lookup, with the binding node as the environment.
#[derive(Clone, Debug, Default)]
pub struct ValueEnv(Option<Rc<EnvNode>>);

#[derive(Debug)]
enum EnvNode {
    Bind {
        name: String,
        value: Value,
        parent: ValueEnv,
    },
    Rec {
        name: String,
        param: String,
        body: Rc<Term>,
        parent: ValueEnv,
    },
}

impl ValueEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&self, name: impl Into<String>, value: Value) -> Self {
        ValueEnv(Some(Rc::new(EnvNode::Bind {
            name: name.into(),
            value,
            parent: self.clone(),
        })))
    }

    fn bind_rec(&self, name: &str, param: &str, body: Rc<Term>) -> Self {
        ValueEnv(Some(Rc::new(EnvNode::Rec {
            name: name.to_owned(),
            param: param.to_owned(),
            body,
            parent: self.clone(),
        })))
    }

    pub fn lookup(&self, x: &str) -> Option<Value> {
        let mut cur = self.0.as_ref();
        while let Some(node) = cur {
            match &**node {
                EnvNode::Bind {
                    name,
                    value,
                    parent,
                } => {
                    if name == x {
                        return Some(value.clone());
                    }
                    cur = parent.0.as_ref();
                }
                EnvNode::Rec {
                    name,
                    param,
                    body,
                    parent,
                } => {
                    if name == x {
                        return Some(Value::Closure(Closure {
                            param: param.clone(),
                            body: body.clone(),
                            env: ValueEnv(Some(node.clone())),
                        }));
                    }
                    cur = parent.0.as_ref();
                }
            }
        }
        None
    }
}

/// Evaluates a closed term, allowing at most `fuel` applications.
pub fn eval(t: &Term, fuel: u64) -> Result<Value, EvalError> {
    let mut fuel = fuel;
    eval_in(t, &ValueEnv::new(), &mut fuel)
}

/// Evaluates `t` under `env`, decrementing `fuel` once per application.
pub fn eval_in(t: &Term, env: &ValueEnv, fuel: &mut u64) -> Result<Value, EvalError> {
    // Function bodies are entered by looping rather than recursing, so
    // tail-recursive programs run in constant stack.
    let mut body: Option<Rc<Term>> = None;
    let mut env = env.clone();
    loop {
        let term: &Term = body.as_deref().unwrap_or(t);
        let stuck = || EvalError::Stuck(term.clone());
        let (next, next_env) = match term {
            Term::IntLit(n) => return Ok(Value::Int(n.clone())),
            Term::Var(x) => return env.lookup(x).ok_or_else(stuck),
            Term::Lam(x, b) => {
                return Ok(Value::Closure(Closure {
                    param: x.clone(),
                    body: Rc::new((**b).clone()),
                    env,
                }))
            }
            Term::App(f, a) => {
                let fv = eval_in(f, &env, fuel)?;
                let av = eval_in(a, &env, fuel)?;
                let Value::Closure(c) = fv else {
                    return Err(stuck());
                };
                if *fuel == 0 {
                    return Err(EvalError::OutOfFuel);
                }
                *fuel -= 1;
                (c.body, c.env.bind(c.param, av))
            }
            Term::Record(fields) => {
                let mut out = BTreeMap::new();
                for (l, v) in fields {
                    out.insert(l.clone(), eval_in(v, &env, fuel)?);
                }
                return Ok(Value::Record(Rc::new(out)));
            }
            Term::Proj(s, l) => {
                return match eval_in(s, &env, fuel)? {
                    Value::Record(fs) => fs.get(l).cloned().ok_or_else(stuck),
                    _ => Err(stuck()),
                };
            }
            Term::Extend(s, l, v) => {
                let Value::Record(mut fs) = eval_in(s, &env, fuel)? else {
                    return Err(stuck());
                };
                Rc::make_mut(&mut fs).insert(l.clone(), eval_in(v, &env, fuel)?);
                return Ok(Value::Record(fs));
            }
            Term::LetRec(x, bound, rest) => {
                let Term::Lam(param, fn_body) = &**bound else {
                    return Err(stuck());
                };
                let rec_env = env.bind_rec(x, param, Rc::new((**fn_body).clone()));
                return eval_in(rest, &rec_env, fuel);
            }
        };
        body = Some(next);
        env = next_env;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn run(src: &str) -> Result<Value, EvalError> {
        eval(&parse(src).unwrap(), 10_000)
    }

    #[test]
    fn worked_example() {
        assert_eq!(
            run("((fun r -> r with {y = 1}) {x = 1}).x")
                .unwrap()
                .to_string(),
            "1"
        );
    }

    #[test]
    fn extension_overwrites() {
        assert_eq!(run("{x = 1} with {x = 2}").unwrap().to_string(), "{x = 2}");
        assert_eq!(
            run("{x = 1} with {y = 2}").unwrap().to_string(),
            "{x = 1, y = 2}"
        );
    }

    #[test]
    fn missing_label_is_stuck() {
        let err = run("{x = 1}.y").unwrap_err();
        assert!(matches!(err, EvalError::Stuck(Term::Proj(..))), "{err:?}");
    }

    #[test]
    fn divergence_runs_out_of_fuel() {
        assert!(matches!(
            run("let rec f = fun x -> f x in f 0"),
            Err(EvalError::OutOfFuel)
        ));
    }

    #[test]
    fn stuck_cases() {
        assert!(matches!(run("1 2"), Err(EvalError::Stuck(_))));
        assert!(matches!(run("1.x"), Err(EvalError::Stuck(_))));
        assert!(matches!(run("1 with {x = 1}"), Err(EvalError::Stuck(_))));
        assert!(matches!(run("y"), Err(EvalError::Stuck(Term::Var(_)))));
        assert!(matches!(
            run("let rec r = {self = r} in r"),
            Err(EvalError::Stuck(_))
        ));
    }

    #[test]
    fn polymorphic_identity() {
        assert_eq!(
            run("let rec id = fun x -> x in {a = id 1, b = id {x = 2}}")
                .unwrap()
                .to_string(),
            "{a = 1, b = {x = 2}}"
        );
    }

    #[test]
    fn recursion_sees_itself() {
        // counts down through nested records until the innermost field
        let src = "let rec f = fun r -> r.next in f (f {next = {next = 3}})";
        assert_eq!(run(src).unwrap().to_string(), "3");
        let src = "let rec k = fun x -> fun y -> x in (k 1) (k 2)";
        assert_eq!(run(src).unwrap().to_string(), "1");
    }

    #[test]
    fn closures_capture() {
        let src = "(fun x -> fun y -> x) 7 {}";
        assert_eq!(run(src).unwrap().to_string(), "7");
        assert_eq!(run("fun x -> x").unwrap().to_string(), "<fun>");
    }

    #[test]
    fn fuel_counts_applications() {
        let t = parse("(fun x -> x) ((fun x -> x) 1)").unwrap();
        assert!(eval(&t, 2).is_ok());
        assert!(matches!(eval(&t, 1), Err(EvalError::OutOfFuel)));
    }
}
