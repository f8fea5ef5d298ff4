use super::Term;

// Binding strength of each syntactic layer, loosest first.
const TERM: u8 = 0;
const EXT: u8 = 1;
const APP: u8 = 2;
const ATOM: u8 = 3;
const PRIM: u8 = 4;

/// Renders `t` in canonical concrete syntax with the fewest parentheses that
/// still parse back to the same tree.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, TERM);
    out
}

fn level(t: &Term) -> u8 {
    match t {
        Term::LetRec(..) | Term::Lam(..) => TERM,
        Term::Extend(..) => EXT,
        Term::App(..) => APP,
        Term::Proj(..) => ATOM,
        Term::IntLit(_) | Term::Var(_) | Term::Record(_) => PRIM,
    }
}

fn write_term(out: &mut String, t: &Term, ctx: u8) {
    let parens = level(t) < ctx;
    if parens {
        out.push('(');
    }
    match t {
        Term::IntLit(n) => out.push_str(&n.to_string()),
        Term::Var(x) => out.push_str(x),
        Term::Lam(x, body) => {
            out.push_str("fun ");
            out.push_str(x);
            out.push_str(" -> ");
            write_term(out, body, TERM);
        }
        Term::App(f, a) => {
            write_term(out, f, APP);
            out.push(' ');
            write_term(out, a, ATOM);
        }
        Term::Record(fields) => {
            out.push('{');
            for (i, (l, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(l);
                out.push_str(" = ");
                write_term(out, v, TERM);
            }
            out.push('}');
        }
        Term::Proj(s, l) => {
            write_term(out, s, ATOM);
            out.push('.');
            out.push_str(l);
        }
        Term::LetRec(x, bound, body) => {
            out.push_str("let rec ");
            out.push_str(x);
            out.push_str(" = ");
            write_term(out, bound, TERM);
            out.push_str(" in ");
            write_term(out, body, TERM);
        }
        Term::Extend(s, l, v) => {
            write_term(out, s, EXT);
            out.push_str(" with {");
            out.push_str(l);
            out.push_str(" = ");
            write_term(out, v, TERM);
            out.push('}');
        }
    }
    if parens {
        out.push(')');
    }
}
