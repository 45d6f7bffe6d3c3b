//! Syntactic classification into decidable fragments, dependency graphs and
//! bounded lookback checking.

mod bl;
mod dg;

use std::collections::BTreeMap;
use std::fmt;

pub use bl::{check_k_bl, BlDecision, MAX_PREFIXES};
pub use dg::{build_dg, CollapsedGraph, DependencyGraph, DgNode, PathSearch};

use crate::parser::print_formula;
use crate::smt::is_mc_atom;
use crate::syntax::{iteration_conditions, Atom, Formula, FormulaNode, Func, Pred, Signature, Term, Theory, VarKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentReport {
    pub ncs: bool,
    pub fx: bool,
    pub quasi_mc: bool,
    pub quasi_ipc: bool,
    /// Every literal, not only iteration conditions, is a monotonicity
    /// constraint.
    pub mc: bool,
    pub bl: Option<BlDecision>,
    /// A witnessing subformula for each flag that is false.
    pub evidence: BTreeMap<&'static str, String>,
}

fn atom_of(lit: &Formula) -> Option<&Atom> {
    match lit.node() {
        FormulaNode::Atom(a) | FormulaNode::NegAtom(a) => Some(a),
        _ => None,
    }
}

fn no_bound_vars(a: &Atom) -> bool {
    let mut ok = true;
    a.for_each_var(&mut |v| ok &= matches!(v.kind, VarKind::State | VarKind::Next | VarKind::WeakNext));
    ok
}

/// A comparison between variables (current, next or weak next) and
/// rational constants with `=`, `≠`, `<`, `≤` or their mirror images.
pub fn is_mc_literal(lit: &Formula) -> bool {
    atom_of(lit).is_some_and(|a| is_mc_atom(a) && no_bound_vars(a))
}

fn var_term(t: &Term) -> bool {
    matches!(t, Term::Var(v) if matches!(v.kind, VarKind::State | VarKind::Next | VarKind::WeakNext))
}

fn int_const(t: &Term) -> bool {
    match t {
        Term::Num(q) => q.is_integer(),
        Term::App(Func::Neg, a) => matches!(a.as_slice(), [Term::Num(q)] if q.is_integer()),
        _ => false,
    }
}

/// `y + d`, `d + y` or `y - d`.
fn var_offset(t: &Term) -> bool {
    match t {
        Term::App(Func::Add, a) => {
            matches!(a.as_slice(), [x, d] | [d, x] if var_term(x) && int_const(d))
        }
        Term::App(Func::Sub, a) => matches!(a.as_slice(), [x, d] if var_term(x) && int_const(d)),
        _ => false,
    }
}

/// `x = y`, `x ⊙ d` for a comparison or congruence `⊙`, or
/// `x ≡_k y + d`, possibly negated or mirrored.
pub fn is_ipc_literal(lit: &Formula) -> bool {
    let Some(a) = atom_of(lit) else { return false };
    let [l, r] = a.args.as_slice() else { return false };
    let var_const = (var_term(l) && int_const(r)) || (int_const(l) && var_term(r));
    match a.pred {
        Pred::Eq => (var_term(l) && var_term(r)) || var_const,
        Pred::Lt | Pred::Le | Pred::Gt | Pred::Ge => var_const,
        Pred::Cong(_) => {
            var_const
                || (var_term(l) && var_term(r))
                || (var_term(l) && var_offset(r))
                || (var_offset(l) && var_term(r))
        }
        Pred::Uf(_) | Pred::Last => false,
    }
}

fn find_subformula(phi: &Formula, pred: &mut impl FnMut(&Formula) -> bool) -> Option<Formula> {
    if pred(phi) {
        return Some(phi.clone());
    }
    match phi.node() {
        FormulaNode::And(a, b) | FormulaNode::Or(a, b) | FormulaNode::Until(a, b) | FormulaNode::Release(a, b) => {
            find_subformula(a, pred).or_else(|| find_subformula(b, pred))
        }
        FormulaNode::Next(a) | FormulaNode::WeakNext(a) | FormulaNode::Exists(_, a) | FormulaNode::Forall(_, a) => {
            find_subformula(a, pred)
        }
        _ => None,
    }
}

/// Decides the syntactic fragment flags. Bounded lookback is left
/// unchecked; see [`check_k_bl`].
pub fn classify(sig: &Signature, phi: &Formula) -> FragmentReport {
    let mut evidence = BTreeMap::new();

    let cross = phi.literals().into_iter().find(|l| l.has_next_terms());
    if let Some(l) = &cross {
        evidence.insert("ncs", format!("cross-state comparison {}", print_formula(l)));
    }

    let non_fx = find_subformula(phi, &mut |f| match f.node() {
        FormulaNode::Until(a, _) => !a.is_true(),
        FormulaNode::Release(..) => true,
        _ => false,
    });
    if let Some(f) = &non_fx {
        evidence.insert("fx", format!("temporal operator other than F, X, wX: {}", print_formula(f)));
    }

    let iters = iteration_conditions(phi);
    let quasi_mc = match sig.theory {
        Theory::Lra => match iters.iter().find(|l| !is_mc_literal(l)) {
            Some(l) => {
                evidence.insert("quasi_mc", format!("iteration condition {} is not an MC", print_formula(l)));
                false
            }
            None => true,
        },
        t => {
            evidence.insert("quasi_mc", format!("theory is {t}, not LRA"));
            false
        }
    };
    let quasi_ipc = match sig.theory {
        Theory::Lia => match iters.iter().find(|l| !is_ipc_literal(l)) {
            Some(l) => {
                evidence.insert("quasi_ipc", format!("iteration condition {} is not an IPC", print_formula(l)));
                false
            }
            None => true,
        },
        t => {
            evidence.insert("quasi_ipc", format!("theory is {t}, not LIA"));
            false
        }
    };
    let mc = sig.theory == Theory::Lra && phi.literals().iter().all(is_mc_literal);

    FragmentReport {
        ncs: cross.is_none(),
        fx: non_fx.is_none(),
        quasi_mc,
        quasi_ipc,
        mc,
        bl: None,
        evidence,
    }
}

impl FragmentReport {
    pub fn to_json(&self) -> serde_json::Value {
        let bl = match &self.bl {
            None => serde_json::Value::Null,
            Some(BlDecision::HasKbl(k)) => serde_json::json!({ "k": k, "holds": true }),
            Some(BlDecision::Counterexample { k, path, .. }) => {
                serde_json::json!({ "k": k, "holds": false, "path": path })
            }
            Some(BlDecision::NotChecked(why)) => serde_json::json!({ "holds": null, "reason": why }),
        };
        serde_json::json!({
            "ncs": self.ncs,
            "fx": self.fx,
            "quasi_mc": self.quasi_mc,
            "quasi_ipc": self.quasi_ipc,
            "mc": self.mc,
            "bl": bl,
            "evidence": self.evidence,
        })
    }
}

impl fmt::Display for FragmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, flag) in [
            ("ncs", self.ncs),
            ("fx", self.fx),
            ("quasi_mc", self.quasi_mc),
            ("quasi_ipc", self.quasi_ipc),
            ("mc", self.mc),
        ] {
            write!(f, "{name}: {flag}")?;
            match self.evidence.get(name) {
                Some(e) if !flag => writeln!(f, "  ({e})")?,
                _ => writeln!(f)?,
            }
        }
        match &self.bl {
            None => writeln!(f, "bl: not checked"),
            Some(d) => writeln!(f, "bl: {d}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, signature_from_vars};
    use crate::syntax::Sort;

    fn lra() -> Signature {
        signature_from_vars(Theory::Lra, &[("x", Sort::Real), ("y", Sort::Real), ("z", Sort::Real)])
    }

    #[test]
    fn mc_literals() {
        let sig = lra();
        let f = |s| parse_formula(&sig, s).unwrap();
        assert!(is_mc_literal(&f("next(y) > y")));
        assert!(is_mc_literal(&f("x != 3")));
        assert!(is_mc_literal(&f("wnext(x) <= -1/2")));
        assert!(!is_mc_literal(&f("x + y > 10")));
    }

    #[test]
    fn ipc_literals() {
        let sig = signature_from_vars(Theory::Lia, &[("x", Sort::Int), ("y", Sort::Int)]);
        let f = |s| parse_formula(&sig, s).unwrap();
        assert!(is_ipc_literal(&f("y =[3] x")));
        assert!(is_ipc_literal(&f("x =[5] y + 2")));
        assert!(is_ipc_literal(&f("x > 42")));
        assert!(is_ipc_literal(&f("!(x = y)")));
        assert!(!is_ipc_literal(&f("x < y")));
        assert!(!is_ipc_literal(&f("x + y = 3")));
    }

    #[test]
    fn ncs_and_fx_flags() {
        let sig = lra();
        let r = classify(&sig, &parse_formula(&sig, "(x > y U x + y = 2*z) & G (x + y > 0)").unwrap());
        assert!(r.ncs);
        assert!(!r.fx);
        let r = classify(&sig, &parse_formula(&sig, "F (next(x) > x)").unwrap());
        assert!(!r.ncs);
        assert!(r.fx);
    }

    fn named(pairs: &[(&str, &str)]) -> std::collections::BTreeSet<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn lookback_graph_without_equalities() {
        let mut sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real), ("y", Sort::Real)]);
        sig.declare_pred("p", vec![Sort::Real, Sort::Real]).unwrap();
        let f = |s| parse_formula(&sig, s).unwrap();
        let d0 = f("p(x, next(y))");
        let d1 = f("next(x) = x + y");
        let g = build_dg(&sig, &[d0.clone(), d0.clone(), d0, d1]);
        assert!(g.eq_edges.is_empty());
        assert_eq!(
            g.named_edges(false),
            named(&[("x0", "y1"), ("x1", "y2"), ("x2", "y3"), ("x3", "x4"), ("y3", "x4"), ("x3", "y3")])
        );
        assert_eq!(g.collapse().longest_path(10_000).length(), 3);
    }

    #[test]
    fn lookback_graph_with_equality() {
        let sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real), ("y", Sort::Real)]);
        let f = |s| parse_formula(&sig, s).unwrap();
        let d0 = f("x < 0 & y = 1 & next(y) > y & next(x) <= x");
        let d1 = f("next(y) > y & next(x) <= x");
        let d2 = f("next(y) > y & next(x) <= x & x = y");
        let g = build_dg(&sig, &[d0, d1, d2]);
        assert_eq!(g.named_edges(true), named(&[("x2", "y2")]));
        assert_eq!(
            g.named_edges(false),
            named(&[("y0", "y1"), ("x0", "x1"), ("y1", "y2"), ("x1", "x2"), ("y2", "y3"), ("x2", "x3")])
        );
        let c = g.collapse();
        assert_eq!(
            c.named_edges(),
            named(&[("y0", "y1"), ("x0", "x1"), ("y1", "x2"), ("x1", "x2"), ("x2", "y3"), ("x2", "x3")])
        );
        assert_eq!(c.longest_path(10_000).length(), 4);
    }

    #[test]
    fn chains_through_bound_variables() {
        let sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real), ("y", Sort::Real)]);
        let f = parse_formula(&sig, "exists w:Real. (x < w & w < next(y))").unwrap();
        let g = build_dg(&sig, &[f]);
        assert_eq!(g.named_edges(false), named(&[("x0", "y1")]));
        let e = parse_formula(&sig, "exists w:Real. (x = w & w = y)").unwrap();
        assert_eq!(build_dg(&sig, &[e]).named_edges(true), named(&[("x0", "y0")]));
    }
}
