use std::collections::BTreeSet;

use super::formula::{Atom, Formula, FormulaNode};
use super::term::{Term, Var, VarKind};

/// Smallest set containing every subformula of `phi`, plus `X(a U b)` for
/// each `a U b` and `wX(a R b)` for each `a R b` in it. Bodies of
/// quantifiers are not split further: a quantified formula is a unit for
/// the tableau.
pub fn closure(phi: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    close(phi, &mut out);
    out
}

fn close(phi: &Formula, out: &mut BTreeSet<Formula>) {
    if !out.insert(phi.clone()) {
        return;
    }
    match phi.node() {
        FormulaNode::And(a, b) | FormulaNode::Or(a, b) => {
            close(a, out);
            close(b, out);
        }
        FormulaNode::Until(a, b) => {
            out.insert(Formula::next(phi.clone()));
            close(a, out);
            close(b, out);
        }
        FormulaNode::Release(a, b) => {
            out.insert(Formula::weak_next(phi.clone()));
            close(a, out);
            close(b, out);
        }
        FormulaNode::Next(a) | FormulaNode::WeakNext(a) => close(a, out),
        _ => {}
    }
}

/// Distinct subformulas in the sense used by [`closure`].
pub fn subformulas(phi: &Formula) -> BTreeSet<Formula> {
    fn go(phi: &Formula, out: &mut BTreeSet<Formula>) {
        if !out.insert(phi.clone()) {
            return;
        }
        match phi.node() {
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Until(a, b)
            | FormulaNode::Release(a, b) => {
                go(a, out);
                go(b, out);
            }
            FormulaNode::Next(a) | FormulaNode::WeakNext(a) => go(a, out),
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    go(phi, &mut out);
    out
}

/// `t^(i)`: state variables move to step `i`, next and weak-next references
/// to step `i + 1`; quantified variables are unchanged.
pub fn stepped_term(t: &Term, i: u32) -> Term {
    t.map_vars(&mut |v| match v.kind {
        VarKind::State => Some(Term::Var(Var::indexed(v.name.clone(), i))),
        VarKind::Next | VarKind::WeakNext => {
            Some(Term::Var(Var::indexed(v.name.clone(), i + 1)))
        }
        VarKind::Quant | VarKind::Indexed(_) => None,
    })
}

/// `φ^(i)`, the pointwise extension of [`stepped_term`]. `ℓ` is untouched.
pub fn stepped(phi: &Formula, i: u32) -> Formula {
    phi.map_literals(&mut |a, neg| {
        let a = a.map_terms(&mut |t| stepped_term(t, i));
        if neg {
            Formula::neg_atom(a)
        } else {
            Formula::atom(a)
        }
    })
}

/// `L(φ)`: atoms with a strong-next term become `ℓ ∧ A`, atoms with only
/// weak-next terms become `ℓ → B` (written `¬ℓ ∨ B`). Negations stay on the
/// outside of the rewritten atom, then get pushed back to the literals.
pub fn l_rewrite(phi: &Formula) -> Formula {
    phi.map_literals(&mut |a, neg| rewrite_atom(a, neg))
}

fn rewrite_atom(a: &Atom, neg: bool) -> Formula {
    let lit = |a: &Atom| {
        if neg {
            Formula::neg_atom(a.clone())
        } else {
            Formula::atom(a.clone())
        }
    };
    if a.has_next() {
        if neg {
            Formula::or(Formula::neg_atom(Atom::last()), lit(a))
        } else {
            Formula::and(Formula::last(), lit(a))
        }
    } else if a.has_weak_next() {
        if neg {
            Formula::and(Formula::last(), lit(a))
        } else {
            Formula::or(Formula::neg_atom(Atom::last()), lit(a))
        }
    } else {
        lit(a)
    }
}

/// Literals occurring in the left argument of an until or the right
/// argument of a release, anywhere in `phi`.
pub fn iteration_conditions(phi: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    collect_iteration(phi, &mut out);
    out
}

fn collect_iteration(phi: &Formula, out: &mut BTreeSet<Formula>) {
    match phi.node() {
        FormulaNode::Until(a, b) => {
            out.extend(a.literals());
            collect_iteration(a, out);
            collect_iteration(b, out);
        }
        FormulaNode::Release(a, b) => {
            out.extend(b.literals());
            collect_iteration(a, out);
            collect_iteration(b, out);
        }
        FormulaNode::And(a, b) | FormulaNode::Or(a, b) => {
            collect_iteration(a, out);
            collect_iteration(b, out);
        }
        FormulaNode::Next(a) | FormulaNode::WeakNext(a) => collect_iteration(a, out),
        _ => {}
    }
}
