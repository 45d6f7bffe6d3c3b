use std::collections::HashMap;
use std::sync::Arc;

use super::{run_from_model, Run};
use crate::smt::{Session, SmtError, SolverConfig, Verdict};
use crate::syntax::{stepped, Formula, FormulaNode, Signature, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bounded {
    Sat(Run),
    UnsatAtLength,
    Inconclusive(String),
}

/// Satisfiability of `phi` on runs of length exactly `n`, decided by one
/// first-order query over `v@0 … v@n` obtained by unrolling the temporal
/// operators by their finite-trace definitions.
pub fn bounded_sat(
    sig: &Arc<Signature>,
    phi: &Formula,
    n: usize,
    cfg: &SolverConfig,
) -> Result<Bounded, SmtError> {
    let mut session = Session::new(cfg, sig.clone())?;
    bounded_sat_with(&mut session, phi, n)
}

pub fn bounded_sat_with(session: &mut Session, phi: &Formula, n: usize) -> Result<Bounded, SmtError> {
    assert!(n >= 1, "runs have at least one state");
    let sig = session.signature().clone();
    let enc = encode_bounded(phi, n);
    let vars: Vec<Var> = (0..n as u32)
        .flat_map(|i| sig.state_names().map(move |v| Var::indexed(v.clone(), i)))
        .collect();
    session.declare_indexed(&vars)?;
    match session.check_with_model(&[&enc])? {
        (Verdict::Sat, Some(m)) => Ok(Bounded::Sat(run_from_model(&sig, &m, n))),
        (Verdict::Sat, None) => Err(SmtError::Protocol("sat without model".into())),
        (Verdict::Unsat, _) => Ok(Bounded::UnsatAtLength),
        (Verdict::Unknown(r), _) => Ok(Bounded::Inconclusive(r)),
    }
}

/// The unrolled first-order encoding of `phi` at instant 0 of a run of
/// length `n`.
pub fn encode_bounded(phi: &Formula, n: usize) -> Formula {
    let mut memo = HashMap::new();
    enc(phi, 0, n, &mut memo)
}

fn last_instant(f: &Formula) -> Formula {
    f.map_literals_simplify(&mut |a, neg| {
        if a.has_next() || a.has_weak_next() {
            let v = a.has_weak_next() && !a.has_next();
            if v != neg {
                Formula::tt()
            } else {
                Formula::ff()
            }
        } else if neg {
            Formula::neg_atom(a.clone())
        } else {
            Formula::atom(a.clone())
        }
    })
}

fn enc(f: &Formula, i: usize, n: usize, memo: &mut HashMap<(Formula, usize), Formula>) -> Formula {
    if let Some(r) = memo.get(&(f.clone(), i)) {
        return r.clone();
    }
    let last = i + 1 == n;
    let r = match f.node() {
        _ if f.is_first_order() => {
            let g = if last { last_instant(f) } else { f.clone() };
            stepped(&g, i as u32)
        }
        FormulaNode::And(a, b) => Formula::mk_and(enc(a, i, n, memo), enc(b, i, n, memo)),
        FormulaNode::Or(a, b) => Formula::mk_or(enc(a, i, n, memo), enc(b, i, n, memo)),
        FormulaNode::Next(a) => {
            if last {
                Formula::ff()
            } else {
                enc(a, i + 1, n, memo)
            }
        }
        FormulaNode::WeakNext(a) => {
            if last {
                Formula::tt()
            } else {
                enc(a, i + 1, n, memo)
            }
        }
        FormulaNode::Until(a, b) => {
            let now = enc(b, i, n, memo);
            if last {
                now
            } else {
                let later = Formula::mk_and(enc(a, i, n, memo), enc(f, i + 1, n, memo));
                Formula::mk_or(now, later)
            }
        }
        FormulaNode::Release(a, b) => {
            let now = enc(b, i, n, memo);
            if last {
                now
            } else {
                let rest = Formula::mk_or(enc(a, i, n, memo), enc(f, i + 1, n, memo));
                Formula::mk_and(now, rest)
            }
        }
        _ => unreachable!("first-order formulas handled above"),
    };
    memo.insert((f.clone(), i), r.clone());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, signature_from_vars};
    use crate::syntax::{Pred, Sort, Term, Theory};

    #[test]
    fn encoding_of_until() {
        let sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real)]);
        let f = parse_formula(&sig, "(x > 0) U (x = 1)").unwrap();
        let e = encode_bounded(&f, 2);
        let at = |i| Term::indexed("x", i);
        let expected = Formula::or(
            Formula::cmp(Pred::Eq, at(0), Term::int(1)),
            Formula::and(
                Formula::cmp(Pred::Gt, at(0), Term::int(0)),
                Formula::cmp(Pred::Eq, at(1), Term::int(1)),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn strong_next_is_false_at_the_end() {
        let sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real)]);
        let f = parse_formula(&sig, "G (next(x) > x)").unwrap();
        assert_eq!(encode_bounded(&f, 1), Formula::ff());
        let g = parse_formula(&sig, "G (wnext(x) > x)").unwrap();
        assert_eq!(encode_bounded(&g, 1), Formula::tt());
    }
}
