use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::term::{Name, Sort, Term, Var};

/// Reserved name of the distinguished nullary predicate that is true iff the
/// current instant has a successor.
pub const LAST_FLAG: &str = "__last_succ";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    /// `a =[k] b`, i.e. `a` and `b` are congruent modulo `k`.
    Cong(u64),
    Uf(Name),
    /// The flag `ℓ`.
    Last,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: Pred, args: Vec<Term>) -> Self {
        Atom { pred, args }
    }

    pub fn binary(pred: Pred, a: Term, b: Term) -> Self {
        Atom { pred, args: vec![a, b] }
    }

    pub fn last() -> Self {
        Atom { pred: Pred::Last, args: vec![] }
    }

    pub fn has_next(&self) -> bool {
        self.args.iter().any(Term::has_next)
    }

    pub fn has_weak_next(&self) -> bool {
        self.args.iter().any(Term::has_weak_next)
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        self.args.iter().for_each(|t| t.for_each_var(f));
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(f).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binder {
    pub var: Var,
    pub sort: Sort,
}

impl Binder {
    pub fn new(var: Var, sort: Sort) -> Self {
        Binder { var, sort }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormulaNode {
    True,
    False,
    Atom(Atom),
    NegAtom(Atom),
    And(Formula, Formula),
    Or(Formula, Formula),
    Exists(Vec<Binder>, Formula),
    Forall(Vec<Binder>, Formula),
    Next(Formula),
    WeakNext(Formula),
    Until(Formula, Formula),
    Release(Formula, Formula),
}

/// An immutable, structurally shared formula in negation normal form.
///
/// First-order formulas are the formulas without temporal connectives; they
/// share this type with temporal formulas so that the tableau can treat the
/// boolean structure uniformly. The derived ordering is the canonical order
/// used to pick which formula of a label gets expanded first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Formula(Arc<FormulaNode>);

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_formula(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::print_formula(self))
    }
}

impl Formula {
    pub fn new(node: FormulaNode) -> Self {
        Formula(Arc::new(node))
    }

    pub fn node(&self) -> &FormulaNode {
        &self.0
    }

    pub fn tt() -> Self {
        Formula::new(FormulaNode::True)
    }

    pub fn ff() -> Self {
        Formula::new(FormulaNode::False)
    }

    pub fn atom(a: Atom) -> Self {
        Formula::new(FormulaNode::Atom(a))
    }

    pub fn neg_atom(a: Atom) -> Self {
        Formula::new(FormulaNode::NegAtom(a))
    }

    pub fn last() -> Self {
        Formula::atom(Atom::last())
    }

    pub fn cmp(pred: Pred, a: Term, b: Term) -> Self {
        Formula::atom(Atom::binary(pred, a, b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::new(FormulaNode::And(a, b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::new(FormulaNode::Or(a, b))
    }

    pub fn exists(binders: Vec<Binder>, body: Formula) -> Self {
        Formula::new(FormulaNode::Exists(binders, body))
    }

    pub fn forall(binders: Vec<Binder>, body: Formula) -> Self {
        Formula::new(FormulaNode::Forall(binders, body))
    }

    pub fn next(a: Formula) -> Self {
        Formula::new(FormulaNode::Next(a))
    }

    pub fn weak_next(a: Formula) -> Self {
        Formula::new(FormulaNode::WeakNext(a))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::new(FormulaNode::Until(a, b))
    }

    pub fn release(a: Formula, b: Formula) -> Self {
        Formula::new(FormulaNode::Release(a, b))
    }

    /// `F φ`, stored as `⊤ U φ`.
    pub fn finally(a: Formula) -> Self {
        Formula::until(Formula::tt(), a)
    }

    /// `G φ`, stored as `⊥ R φ`.
    pub fn globally(a: Formula) -> Self {
        Formula::release(Formula::ff(), a)
    }

    /// Conjunction that folds away `⊤` and short-circuits on `⊥`.
    pub fn mk_and(a: Formula, b: Formula) -> Self {
        match (a.node(), b.node()) {
            (FormulaNode::True, _) => b,
            (_, FormulaNode::True) => a,
            (FormulaNode::False, _) | (_, FormulaNode::False) => Formula::ff(),
            _ => Formula::and(a, b),
        }
    }

    pub fn mk_or(a: Formula, b: Formula) -> Self {
        match (a.node(), b.node()) {
            (FormulaNode::False, _) => b,
            (_, FormulaNode::False) => a,
            (FormulaNode::True, _) | (_, FormulaNode::True) => Formula::tt(),
            _ => Formula::or(a, b),
        }
    }

    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut acc: Option<Formula> = None;
        for f in items {
            acc = Some(match acc {
                None => f,
                Some(a) => Formula::mk_and(a, f),
            });
        }
        acc.unwrap_or_else(Formula::tt)
    }

    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut acc: Option<Formula> = None;
        for f in items {
            acc = Some(match acc {
                None => f,
                Some(a) => Formula::mk_or(a, f),
            });
        }
        acc.unwrap_or_else(Formula::ff)
    }

    /// Existential closure that drops binders not occurring in the body.
    pub fn mk_exists(binders: Vec<Binder>, body: Formula) -> Self {
        let free = body.free_vars();
        let binders: Vec<Binder> =
            binders.into_iter().filter(|b| free.contains(&b.var)).collect();
        if binders.is_empty() {
            body
        } else {
            match body.node() {
                FormulaNode::True | FormulaNode::False => body,
                _ => Formula::exists(binders, body),
            }
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self.node(), FormulaNode::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self.node(), FormulaNode::False)
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.node(), FormulaNode::Atom(_) | FormulaNode::NegAtom(_))
    }

    /// True if the formula contains no temporal connective.
    pub fn is_first_order(&self) -> bool {
        match self.node() {
            FormulaNode::True
            | FormulaNode::False
            | FormulaNode::Atom(_)
            | FormulaNode::NegAtom(_) => true,
            FormulaNode::And(a, b) | FormulaNode::Or(a, b) => {
                a.is_first_order() && b.is_first_order()
            }
            FormulaNode::Exists(_, b) | FormulaNode::Forall(_, b) => b.is_first_order(),
            _ => false,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self.node() {
            FormulaNode::Exists(..) | FormulaNode::Forall(..) => false,
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Until(a, b)
            | FormulaNode::Release(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            FormulaNode::Next(a) | FormulaNode::WeakNext(a) => a.is_quantifier_free(),
            _ => true,
        }
    }

    /// Calls `f` on every atom together with its polarity (`true` when it
    /// occurs negated).
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom, bool)) {
        match self.node() {
            FormulaNode::True | FormulaNode::False => {}
            FormulaNode::Atom(a) => f(a, false),
            FormulaNode::NegAtom(a) => f(a, true),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Until(a, b)
            | FormulaNode::Release(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
            FormulaNode::Exists(_, b)
            | FormulaNode::Forall(_, b)
            | FormulaNode::Next(b)
            | FormulaNode::WeakNext(b) => b.for_each_atom(f),
        }
    }

    /// Literal subformulas (`Atom`/`NegAtom` nodes), in occurrence order.
    pub fn literals(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.collect_literals(&mut out);
        out
    }

    fn collect_literals(&self, out: &mut Vec<Formula>) {
        match self.node() {
            FormulaNode::Atom(_) | FormulaNode::NegAtom(_) => out.push(self.clone()),
            FormulaNode::True | FormulaNode::False => {}
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Until(a, b)
            | FormulaNode::Release(a, b) => {
                a.collect_literals(out);
                b.collect_literals(out);
            }
            FormulaNode::Exists(_, b)
            | FormulaNode::Forall(_, b)
            | FormulaNode::Next(b)
            | FormulaNode::WeakNext(b) => b.collect_literals(out),
        }
    }

    pub fn any_atom(&self, pred: &mut impl FnMut(&Atom) -> bool) -> bool {
        let mut found = false;
        self.for_each_atom(&mut |a, _| {
            if !found && pred(a) {
                found = true;
            }
        });
        found
    }

    pub fn has_next_terms(&self) -> bool {
        self.any_atom(&mut |a| a.has_next() || a.has_weak_next())
    }

    /// Free variables (binders remove their variable from the set).
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a Var>, out: &mut BTreeSet<Var>) {
        match self.node() {
            FormulaNode::True | FormulaNode::False => {}
            FormulaNode::Atom(a) | FormulaNode::NegAtom(a) => a.for_each_var(&mut |v| {
                if !bound.contains(&v) {
                    out.insert(v.clone());
                }
            }),
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Until(a, b)
            | FormulaNode::Release(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FormulaNode::Next(a) | FormulaNode::WeakNext(a) => a.collect_free(bound, out),
            FormulaNode::Exists(bs, body) | FormulaNode::Forall(bs, body) => {
                let n = bound.len();
                bound.extend(bs.iter().map(|b| &b.var));
                body.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Rebuilds the formula bottom-up, replacing each literal by `f(atom,
    /// negated)`. Quantifier binders are passed through untouched.
    pub fn map_literals(&self, f: &mut impl FnMut(&Atom, bool) -> Formula) -> Formula {
        match self.node() {
            FormulaNode::True | FormulaNode::False => self.clone(),
            FormulaNode::Atom(a) => f(a, false),
            FormulaNode::NegAtom(a) => f(a, true),
            FormulaNode::And(a, b) => Formula::and(a.map_literals(f), b.map_literals(f)),
            FormulaNode::Or(a, b) => Formula::or(a.map_literals(f), b.map_literals(f)),
            FormulaNode::Until(a, b) => Formula::until(a.map_literals(f), b.map_literals(f)),
            FormulaNode::Release(a, b) => {
                Formula::release(a.map_literals(f), b.map_literals(f))
            }
            FormulaNode::Next(a) => Formula::next(a.map_literals(f)),
            FormulaNode::WeakNext(a) => Formula::weak_next(a.map_literals(f)),
            FormulaNode::Exists(bs, body) => Formula::exists(bs.clone(), body.map_literals(f)),
            FormulaNode::Forall(bs, body) => Formula::forall(bs.clone(), body.map_literals(f)),
        }
    }

    /// Same as [`Formula::map_literals`] but rebuilds with the simplifying
    /// constructors, so constant literals fold away.
    pub fn map_literals_simplify(
        &self,
        f: &mut impl FnMut(&Atom, bool) -> Formula,
    ) -> Formula {
        match self.node() {
            FormulaNode::True | FormulaNode::False => self.clone(),
            FormulaNode::Atom(a) => f(a, false),
            FormulaNode::NegAtom(a) => f(a, true),
            FormulaNode::And(a, b) => {
                Formula::mk_and(a.map_literals_simplify(f), b.map_literals_simplify(f))
            }
            FormulaNode::Or(a, b) => {
                Formula::mk_or(a.map_literals_simplify(f), b.map_literals_simplify(f))
            }
            FormulaNode::Exists(bs, body) => {
                Formula::mk_exists(bs.clone(), body.map_literals_simplify(f))
            }
            FormulaNode::Forall(bs, body) => {
                let body = body.map_literals_simplify(f);
                let free = body.free_vars();
                let bs: Vec<Binder> =
                    bs.iter().filter(|b| free.contains(&b.var)).cloned().collect();
                if bs.is_empty() || body.is_true() || body.is_false() {
                    body
                } else {
                    Formula::forall(bs, body)
                }
            }
            _ => self.map_literals(f),
        }
    }

    /// Substitutes terms for free variable occurrences. Variables bound by an
    /// enclosing quantifier are left alone.
    pub fn substitute(&self, f: &mut impl FnMut(&Var) -> Option<Term>) -> Formula {
        self.subst_inner(&mut Vec::new(), f)
    }

    fn subst_inner(
        &self,
        bound: &mut Vec<Var>,
        f: &mut impl FnMut(&Var) -> Option<Term>,
    ) -> Formula {
        let on_atom = |a: &Atom, bound: &Vec<Var>, f: &mut dyn FnMut(&Var) -> Option<Term>| {
            a.map_terms(&mut |t| {
                t.map_vars(&mut |v| if bound.contains(v) { None } else { f(v) })
            })
        };
        match self.node() {
            FormulaNode::True | FormulaNode::False => self.clone(),
            FormulaNode::Atom(a) => Formula::atom(on_atom(a, bound, f)),
            FormulaNode::NegAtom(a) => Formula::neg_atom(on_atom(a, bound, f)),
            FormulaNode::And(a, b) => {
                Formula::and(a.subst_inner(bound, f), b.subst_inner(bound, f))
            }
            FormulaNode::Or(a, b) => Formula::or(a.subst_inner(bound, f), b.subst_inner(bound, f)),
            FormulaNode::Until(a, b) => {
                Formula::until(a.subst_inner(bound, f), b.subst_inner(bound, f))
            }
            FormulaNode::Release(a, b) => {
                Formula::release(a.subst_inner(bound, f), b.subst_inner(bound, f))
            }
            FormulaNode::Next(a) => Formula::next(a.subst_inner(bound, f)),
            FormulaNode::WeakNext(a) => Formula::weak_next(a.subst_inner(bound, f)),
            FormulaNode::Exists(bs, body) | FormulaNode::Forall(bs, body) => {
                let n = bound.len();
                bound.extend(bs.iter().map(|b| b.var.clone()));
                let body = body.subst_inner(bound, f);
                bound.truncate(n);
                match self.node() {
                    FormulaNode::Exists(..) => Formula::exists(bs.clone(), body),
                    _ => Formula::forall(bs.clone(), body),
                }
            }
        }
    }

    /// Replaces the flag `ℓ` by a boolean constant and simplifies.
    pub fn assign_last(&self, value: bool) -> Formula {
        self.map_literals_simplify(&mut |a, neg| {
            if a.pred == Pred::Last {
                if value != neg {
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

    /// Number of nodes in the formula tree.
    pub fn size(&self) -> usize {
        match self.node() {
            FormulaNode::True
            | FormulaNode::False
            | FormulaNode::Atom(_)
            | FormulaNode::NegAtom(_) => 1,
            FormulaNode::And(a, b)
            | FormulaNode::Or(a, b)
            | FormulaNode::Until(a, b)
            | FormulaNode::Release(a, b) => 1 + a.size() + b.size(),
            FormulaNode::Exists(_, a)
            | FormulaNode::Forall(_, a)
            | FormulaNode::Next(a)
            | FormulaNode::WeakNext(a) => 1 + a.size(),
        }
    }

    /// Nesting depth of temporal connectives.
    pub fn temporal_depth(&self) -> usize {
        match self.node() {
            FormulaNode::And(a, b) | FormulaNode::Or(a, b) => {
                a.temporal_depth().max(b.temporal_depth())
            }
            FormulaNode::Until(a, b) | FormulaNode::Release(a, b) => {
                1 + a.temporal_depth().max(b.temporal_depth())
            }
            FormulaNode::Next(a) | FormulaNode::WeakNext(a) => 1 + a.temporal_depth(),
            _ => 0,
        }
    }
}
