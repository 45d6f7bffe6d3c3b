//! Reading solver output (formulas produced by `apply qe`) back into the
//! AST.

use std::collections::HashMap;

use num_traits::Zero;

use super::sexpr::SExpr;
use crate::semantics::parse_numeral;
use crate::syntax::{
    to_nnf, Atom, Binder, Extended, Formula, Func, Pred, Signature, Sort, Term, Var, LAST_FLAG,
};

type R<T> = Result<T, String>;

struct Ctx<'a> {
    sig: &'a Signature,
    /// Bound variables, innermost last.
    bound: Vec<(String, Var, Sort)>,
}

pub fn formula_from_sexpr(sig: &Signature, e: &SExpr) -> R<Formula> {
    let e = expand_lets(e, &HashMap::new())?;
    let mut cx = Ctx { sig, bound: Vec::new() };
    Ok(to_nnf(&cx.formula(&e)?))
}

pub fn term_from_sexpr(sig: &Signature, e: &SExpr) -> R<Term> {
    let e = expand_lets(e, &HashMap::new())?;
    let cx = Ctx { sig, bound: Vec::new() };
    cx.term(&e)
}

fn expand_lets(e: &SExpr, env: &HashMap<String, SExpr>) -> R<SExpr> {
    match e {
        SExpr::Atom(a) => Ok(env.get(a).cloned().unwrap_or_else(|| e.clone())),
        SExpr::List(items) if e.head() == Some("let") && items.len() == 3 => {
            let binds = items[1].as_list().ok_or("malformed let")?;
            let mut inner = env.clone();
            for b in binds {
                let pair = b.as_list().filter(|p| p.len() == 2).ok_or("malformed let")?;
                let name = pair[0].as_atom().ok_or("malformed let")?;
                inner.insert(name.to_string(), expand_lets(&pair[1], env)?);
            }
            expand_lets(&items[2], &inner)
        }
        SExpr::List(items) if matches!(e.head(), Some("exists" | "forall")) && items.len() == 3 => {
            let mut inner = env.clone();
            for b in items[1].as_list().ok_or("malformed binder")? {
                if let Some(n) = b.as_list().and_then(|p| p.first()).and_then(SExpr::as_atom) {
                    inner.remove(n);
                }
            }
            Ok(SExpr::List(vec![items[0].clone(), items[1].clone(), expand_lets(&items[2], &inner)?]))
        }
        SExpr::List(items) => Ok(SExpr::List(
            items.iter().map(|x| expand_lets(x, env)).collect::<R<Vec<_>>>()?,
        )),
    }
}

fn split_indexed(s: &str) -> Option<(&str, u32)> {
    let (base, idx) = s.rsplit_once('@')?;
    Some((base, idx.parse().ok()?))
}

impl<'a> Ctx<'a> {
    fn parse_sort(&self, e: &SExpr) -> R<Sort> {
        match e.as_atom() {
            Some("Real") => Ok(Sort::Real),
            Some("Int") => Ok(Sort::Int),
            Some("Bool") => Ok(Sort::Bool),
            Some(s) if self.sig.sorts.contains(s) => Ok(Sort::User(s.into())),
            _ => Err(format!("unknown sort {e}")),
        }
    }

    fn is_bool(&self, e: &SExpr) -> bool {
        match e {
            SExpr::Atom(a) => {
                matches!(a.as_str(), "true" | "false" | LAST_FLAG)
                    || self.sig.predicates.get(a.as_str()).is_some_and(|p| p.is_empty())
                    || self.bound.iter().rev().any(|(n, _, s)| n == a && *s == Sort::Bool)
            }
            SExpr::List(items) => match e.head() {
                Some(
                    "and" | "or" | "not" | "=>" | "=" | "distinct" | "<" | "<=" | ">" | ">="
                    | "exists" | "forall" | "xor",
                ) => true,
                Some("ite") => items.get(2).is_some_and(|x| self.is_bool(x)),
                Some(h) => self.sig.predicates.contains_key(h),
                None => false,
            },
        }
    }

    fn formula(&mut self, e: &SExpr) -> R<Extended> {
        match e {
            SExpr::Atom(a) => match a.as_str() {
                "true" => Ok(Extended::True),
                "false" => Ok(Extended::False),
                LAST_FLAG => Ok(Extended::Atom(Atom::last())),
                p if self.sig.predicates.contains_key(p) => {
                    Ok(Extended::Atom(Atom::new(Pred::Uf(p.into()), vec![])))
                }
                _ => Err(format!("not a formula: {a}")),
            },
            SExpr::List(items) => {
                let head = e.head().ok_or_else(|| format!("not a formula: {e}"))?;
                let args = &items[1..];
                let fs = |cx: &mut Self| args.iter().map(|x| cx.formula(x)).collect::<R<Vec<_>>>();
                match head {
                    "and" => Ok(fold(fs(self)?, Extended::True, Extended::and)),
                    "or" => Ok(fold(fs(self)?, Extended::False, Extended::or)),
                    "not" if args.len() == 1 => Ok(Extended::not(self.formula(&args[0])?)),
                    "=>" if args.len() == 2 => {
                        Ok(Extended::Implies(Box::new(self.formula(&args[0])?), Box::new(self.formula(&args[1])?)))
                    }
                    "ite" if args.len() == 3 => {
                        let c = self.formula(&args[0])?;
                        let a = self.formula(&args[1])?;
                        let b = self.formula(&args[2])?;
                        Ok(Extended::or(
                            Extended::and(c.clone(), a),
                            Extended::and(Extended::not(c), b),
                        ))
                    }
                    "=" if args.len() == 2 && self.is_bool(&args[0]) => {
                        let a = self.formula(&args[0])?;
                        let b = self.formula(&args[1])?;
                        Ok(Extended::or(
                            Extended::and(a.clone(), b.clone()),
                            Extended::and(Extended::not(a), Extended::not(b)),
                        ))
                    }
                    "=" | "distinct" | "<" | "<=" | ">" | ">=" => {
                        let ts = args.iter().map(|x| self.term(x)).collect::<R<Vec<_>>>()?;
                        if ts.len() < 2 {
                            return Err(format!("bad arity: {e}"));
                        }
                        let pred = match head {
                            "=" | "distinct" => Pred::Eq,
                            "<" => Pred::Lt,
                            "<=" => Pred::Le,
                            ">" => Pred::Gt,
                            _ => Pred::Ge,
                        };
                        let mut parts = Vec::new();
                        if head == "distinct" {
                            for i in 0..ts.len() {
                                for j in i + 1..ts.len() {
                                    let a = Atom::binary(Pred::Eq, ts[i].clone(), ts[j].clone());
                                    parts.push(Extended::not(Extended::Atom(a)));
                                }
                            }
                        } else {
                            for w in ts.windows(2) {
                                parts.push(Extended::Atom(Atom::binary(pred.clone(), w[0].clone(), w[1].clone())));
                            }
                        }
                        Ok(fold(parts, Extended::True, Extended::and))
                    }
                    "exists" | "forall" if args.len() == 2 => {
                        let mut binders = Vec::new();
                        for b in args[0].as_list().ok_or("malformed binder")? {
                            let p = b.as_list().filter(|p| p.len() == 2).ok_or("malformed binder")?;
                            let name = p[0].as_atom().ok_or("malformed binder")?;
                            let sort = self.parse_sort(&p[1])?;
                            let var = match split_indexed(name) {
                                Some((base, i)) => Var::indexed(base, i),
                                None => Var::quant(name),
                            };
                            binders.push(Binder::new(var, sort));
                        }
                        let n = self.bound.len();
                        for b in &binders {
                            self.bound.push((b.var.smt_name(), b.var.clone(), b.sort.clone()));
                        }
                        let body = self.formula(&args[1]);
                        self.bound.truncate(n);
                        let body = Box::new(body?);
                        Ok(if head == "exists" {
                            Extended::Exists(binders, body)
                        } else {
                            Extended::Forall(binders, body)
                        })
                    }
                    p if self.sig.predicates.contains_key(p) => {
                        let ts = args.iter().map(|x| self.term(x)).collect::<R<Vec<_>>>()?;
                        Ok(Extended::Atom(Atom::new(Pred::Uf(p.into()), ts)))
                    }
                    _ => Err(format!("unsupported formula: {e}")),
                }
            }
        }
    }

    fn term(&self, e: &SExpr) -> R<Term> {
        match e {
            SExpr::Atom(a) => {
                if let Some(q) = parse_numeral(a) {
                    return Ok(Term::Num(q));
                }
                if let Some((_, v, _)) = self.bound.iter().rev().find(|(n, _, _)| n == a) {
                    return Ok(Term::Var(v.clone()));
                }
                if let Some((base, i)) = split_indexed(a) {
                    if self.sig.state_sort(base).is_some() {
                        return Ok(Term::indexed(base, i));
                    }
                }
                if self.sig.state_sort(a).is_some() {
                    return Ok(Term::state(a));
                }
                if self.sig.functions.get(a.as_str()).is_some_and(|f| f.args.is_empty()) {
                    return Ok(Term::App(Func::Uf(a.as_str().into()), vec![]));
                }
                Err(format!("unknown symbol `{a}`"))
            }
            SExpr::List(items) => {
                let head = e.head().ok_or_else(|| format!("not a term: {e}"))?;
                let ts = items[1..].iter().map(|x| self.term(x)).collect::<R<Vec<_>>>()?;
                match (head, ts.len()) {
                    ("-", 1) => Ok(match &ts[0] {
                        Term::Num(q) => Term::Num(-q.clone()),
                        t => Term::App(Func::Neg, vec![t.clone()]),
                    }),
                    ("-", n) if n >= 2 => Ok(ts.into_iter().reduce(Term::sub).expect("n >= 2")),
                    ("+", n) if n >= 1 => Ok(ts.into_iter().reduce(Term::add).expect("n >= 1")),
                    ("*", n) if n >= 1 => Ok(ts.into_iter().reduce(Term::mul).expect("n >= 1")),
                    ("/", 2) => match (&ts[0], &ts[1]) {
                        (Term::Num(a), Term::Num(b)) if !b.is_zero() => Ok(Term::Num(a / b)),
                        _ => Err(format!("non-constant division: {e}")),
                    },
                    ("div", 2) => Ok(Term::App(Func::IntDiv, ts)),
                    ("mod", 2) => Ok(Term::App(Func::Mod, ts)),
                    ("to_real", 1) => Ok(ts.into_iter().next().expect("len 1")),
                    (f, _) if self.sig.functions.contains_key(f) => {
                        Ok(Term::App(Func::Uf(f.into()), ts))
                    }
                    _ => Err(format!("unsupported term: {e}")),
                }
            }
        }
    }
}

fn fold(items: Vec<Extended>, unit: Extended, op: fn(Extended, Extended) -> Extended) -> Extended {
    items.into_iter().reduce(op).unwrap_or(unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::signature_from_vars;
    use crate::smt::parse_one;
    use crate::syntax::Theory;

    #[test]
    fn reads_let_and_negative_coefficients() {
        let sig = signature_from_vars(Theory::Lia, &[("x", Sort::Int), ("y", Sort::Int)]);
        let e = parse_one("(let ((a!1 (<= (+ x (* (- 1) y)) (- 2)))) (or a!1 (= 0 (mod x 3))))")
            .unwrap();
        let f = formula_from_sexpr(&sig, &e).unwrap();
        let le = Formula::cmp(
            Pred::Le,
            Term::add(Term::state("x"), Term::mul(Term::int(-1), Term::state("y"))),
            Term::int(-2),
        );
        let m = Formula::cmp(
            Pred::Eq,
            Term::int(0),
            Term::App(Func::Mod, vec![Term::state("x"), Term::int(3)]),
        );
        assert_eq!(f, Formula::or(le, m));
    }

    #[test]
    fn reads_indexed_names_and_flag() {
        let sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real)]);
        let e = parse_one("(and __last_succ (not (<= x@2 1.5)))").unwrap();
        let f = formula_from_sexpr(&sig, &e).unwrap();
        let expected = Formula::and(
            Formula::last(),
            Formula::neg_atom(Atom::binary(Pred::Le, Term::indexed("x", 2), Term::rat(3, 2))),
        );
        assert_eq!(f, expected);
    }
}
