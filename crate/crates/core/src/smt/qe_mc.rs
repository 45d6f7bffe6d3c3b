//! Fourier-Motzkin elimination for monotonicity constraints.
//!
//! A monotonicity constraint compares two operands, each a variable or a
//! rational constant, with `=`, `≠`, `≤` or `<` (and their mirror images).
//! Eliminating a variable from a conjunction of such constraints yields
//! again such constraints over the remaining operands, so the procedure
//! never introduces new constants.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::syntax::{negate, Atom, Formula, FormulaNode, Func, Pred, Term, Var};

/// Disjunct count above which elimination gives up.
pub const MAX_DISJUNCTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QeError {
    #[error("literal `{0}` is not a monotonicity constraint")]
    NotMc(String),
    #[error("more than {MAX_DISJUNCTS} disjuncts")]
    TooLarge,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Operand {
    Const(BigRational),
    Var(Var),
}

impl Operand {
    fn from_term(t: &Term) -> Option<Operand> {
        match t {
            Term::Num(q) => Some(Operand::Const(q.clone())),
            Term::Var(v) => Some(Operand::Var(v.clone())),
            Term::App(Func::Neg, a) => match a.as_slice() {
                [Term::Num(q)] => Some(Operand::Const(-q.clone())),
                _ => None,
            },
            _ => None,
        }
    }

    fn to_term(&self) -> Term {
        match self {
            Operand::Const(q) => Term::Num(q.clone()),
            Operand::Var(v) => Term::Var(v.clone()),
        }
    }

    fn is(&self, v: &Var) -> bool {
        matches!(self, Operand::Var(w) if w == v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Rel {
    Eq,
    Ne,
    Le,
    Lt,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Lit {
    Mc(Operand, Rel, Operand),
    Other(Formula),
}

impl Lit {
    fn mentions(&self, v: &Var) -> bool {
        match self {
            Lit::Mc(a, _, b) => a.is(v) || b.is(v),
            Lit::Other(f) => f.free_vars().contains(v),
        }
    }

    fn to_formula(&self) -> Formula {
        match self {
            Lit::Mc(a, r, b) => {
                let (a, b) = (a.to_term(), b.to_term());
                match r {
                    Rel::Eq => Formula::cmp(Pred::Eq, a, b),
                    Rel::Ne => Formula::neg_atom(Atom::binary(Pred::Eq, a, b)),
                    Rel::Le => Formula::cmp(Pred::Le, a, b),
                    Rel::Lt => Formula::cmp(Pred::Lt, a, b),
                }
            }
            Lit::Other(f) => f.clone(),
        }
    }

    /// Truth value if decided without knowing any variable.
    fn decide(&self) -> Option<bool> {
        let Lit::Mc(a, r, b) = self else { return None };
        if a == b {
            return Some(matches!(r, Rel::Eq | Rel::Le));
        }
        match (a, b) {
            (Operand::Const(x), Operand::Const(y)) => Some(match r {
                Rel::Eq => x == y,
                Rel::Ne => x != y,
                Rel::Le => x <= y,
                Rel::Lt => x < y,
            }),
            _ => None,
        }
    }

    /// Orders the operands of symmetric relations so that equal literals
    /// compare equal.
    fn canonical(self) -> Lit {
        match self {
            Lit::Mc(a, r @ (Rel::Eq | Rel::Ne), b) if b < a => Lit::Mc(b, r, a),
            l => l,
        }
    }
}

/// Whether an atom is a monotonicity constraint.
pub fn is_mc_atom(a: &Atom) -> bool {
    matches!(a.pred, Pred::Eq | Pred::Lt | Pred::Le | Pred::Gt | Pred::Ge)
        && a.args.len() == 2
        && a.args.iter().all(|t| Operand::from_term(t).is_some())
}

fn mc_literal(a: &Atom, negated: bool) -> Option<Lit> {
    if !is_mc_atom(a) {
        return None;
    }
    let x = Operand::from_term(&a.args[0])?;
    let y = Operand::from_term(&a.args[1])?;
    let lit = match (&a.pred, negated) {
        (Pred::Eq, false) => Lit::Mc(x, Rel::Eq, y),
        (Pred::Eq, true) => Lit::Mc(x, Rel::Ne, y),
        (Pred::Lt, false) | (Pred::Ge, true) => Lit::Mc(x, Rel::Lt, y),
        (Pred::Le, false) | (Pred::Gt, true) => Lit::Mc(x, Rel::Le, y),
        (Pred::Gt, false) | (Pred::Le, true) => Lit::Mc(y, Rel::Lt, x),
        (Pred::Ge, false) | (Pred::Lt, true) => Lit::Mc(y, Rel::Le, x),
        _ => return None,
    };
    Some(lit.canonical())
}

type Cube = BTreeSet<Lit>;

/// Conjunction of literals with constant-decided ones removed; `None` if
/// some literal is false.
fn simplify(lits: impl IntoIterator<Item = Lit>) -> Option<Cube> {
    let mut out = Cube::new();
    for l in lits {
        match l.decide() {
            Some(true) => {}
            Some(false) => return None,
            None => {
                out.insert(l.canonical());
            }
        }
    }
    Some(out)
}

fn dnf(f: &Formula, elim: &[Var]) -> Result<Vec<Cube>, QeError> {
    match f.node() {
        FormulaNode::True => Ok(vec![Cube::new()]),
        FormulaNode::False => Ok(vec![]),
        FormulaNode::Atom(a) | FormulaNode::NegAtom(a) => {
            let neg = matches!(f.node(), FormulaNode::NegAtom(_));
            let lit = match mc_literal(a, neg) {
                Some(l) => l,
                None => {
                    let l = Lit::Other(f.clone());
                    if elim.iter().any(|v| l.mentions(v)) {
                        return Err(QeError::NotMc(f.to_string()));
                    }
                    l
                }
            };
            Ok(simplify([lit]).into_iter().collect())
        }
        FormulaNode::Or(a, b) => {
            let mut x = dnf(a, elim)?;
            x.extend(dnf(b, elim)?);
            guard(x.len())?;
            Ok(x)
        }
        FormulaNode::And(a, b) => {
            let x = dnf(a, elim)?;
            let y = dnf(b, elim)?;
            guard(x.len().saturating_mul(y.len()))?;
            let mut out = Vec::new();
            for c in &x {
                for d in &y {
                    if let Some(s) = simplify(c.iter().chain(d).cloned()) {
                        out.push(s);
                    }
                }
            }
            Ok(out)
        }
        FormulaNode::Exists(..) | FormulaNode::Forall(..) => {
            let g = qe_mc_formula(f)?;
            dnf(&g, elim)
        }
        _ => Err(QeError::NotMc(f.to_string())),
    }
}

fn guard(n: usize) -> Result<(), QeError> {
    if n > MAX_DISJUNCTS {
        Err(QeError::TooLarge)
    } else {
        Ok(())
    }
}

fn substitute(l: &Lit, v: &Var, by: &Operand) -> Lit {
    match l {
        Lit::Mc(a, r, b) => {
            let s = |o: &Operand| if o.is(v) { by.clone() } else { o.clone() };
            Lit::Mc(s(a), *r, s(b))
        }
        Lit::Other(f) => Lit::Other(f.clone()),
    }
}

/// Eliminates `v` from one cube, producing zero or more cubes.
fn eliminate_in_cube(cube: Cube, v: &Var, out: &mut Vec<Cube>) -> Result<(), QeError> {
    // Equality with another operand: substitute.
    let eq = cube.iter().find_map(|l| match l {
        Lit::Mc(a, Rel::Eq, b) if a.is(v) && !b.is(v) => Some(b.clone()),
        Lit::Mc(a, Rel::Eq, b) if b.is(v) && !a.is(v) => Some(a.clone()),
        _ => None,
    });
    if let Some(t) = eq {
        if let Some(c) = simplify(cube.iter().map(|l| substitute(l, v, &t))) {
            out.push(c);
        }
        return Ok(());
    }
    // Disequality: split into the two strict orders.
    let ne = cube.iter().find(|l| matches!(l, Lit::Mc(a, Rel::Ne, b) if a.is(v) || b.is(v)));
    if let Some(ne) = ne.cloned() {
        let Lit::Mc(a, _, b) = &ne else { unreachable!() };
        let mut rest = cube.clone();
        rest.remove(&ne);
        for lit in [Lit::Mc(a.clone(), Rel::Lt, b.clone()), Lit::Mc(b.clone(), Rel::Lt, a.clone())] {
            if let Some(c) = simplify(rest.iter().cloned().chain([lit])) {
                eliminate_in_cube(c, v, out)?;
                guard(out.len())?;
            }
        }
        return Ok(());
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut keep = Vec::new();
    for l in cube {
        match &l {
            Lit::Mc(a, r @ (Rel::Le | Rel::Lt), b) if b.is(v) && !a.is(v) => {
                lower.push((a.clone(), *r == Rel::Lt))
            }
            Lit::Mc(a, r @ (Rel::Le | Rel::Lt), b) if a.is(v) && !b.is(v) => {
                upper.push((b.clone(), *r == Rel::Lt))
            }
            _ => keep.push(l),
        }
    }
    for (lo, s1) in &lower {
        for (hi, s2) in &upper {
            let r = if *s1 || *s2 { Rel::Lt } else { Rel::Le };
            keep.push(Lit::Mc(lo.clone(), r, hi.clone()));
        }
    }
    if let Some(c) = simplify(keep) {
        out.push(c);
    }
    Ok(())
}

/// `∃ vars. f` as a quantifier-free formula whose literals are
/// monotonicity constraints over the remaining variables and the constants
/// of `f` (plus any non-MC literals of `f` that do not mention `vars`).
pub fn qe_mc(f: &Formula, vars: &[Var]) -> Result<Formula, QeError> {
    let mut cubes = dnf(f, vars)?;
    for v in vars {
        let mut next = Vec::new();
        for c in cubes {
            if c.iter().any(|l| l.mentions(v)) {
                eliminate_in_cube(c, v, &mut next)?;
            } else {
                next.push(c);
            }
            guard(next.len())?;
        }
        next.sort();
        next.dedup();
        cubes = next;
    }
    Ok(to_formula(cubes))
}

fn to_formula(mut cubes: Vec<Cube>) -> Formula {
    if cubes.iter().any(|c| c.is_empty()) {
        return Formula::tt();
    }
    // Drop cubes that contain another cube (they are implied by it).
    cubes.sort_by_key(|c| c.len());
    let mut kept: Vec<Cube> = Vec::new();
    for c in cubes {
        if !kept.iter().any(|k| k.is_subset(&c)) {
            kept.push(c);
        }
    }
    Formula::or_all(kept.into_iter().map(|c| Formula::and_all(c.iter().map(Lit::to_formula))))
}

/// Eliminates every quantifier of `f`, innermost first.
pub fn qe_mc_formula(f: &Formula) -> Result<Formula, QeError> {
    match f.node() {
        FormulaNode::Exists(bs, body) => {
            let body = qe_mc_formula(body)?;
            let vars: Vec<Var> = bs.iter().map(|b| b.var.clone()).collect();
            qe_mc(&body, &vars)
        }
        FormulaNode::Forall(bs, body) => {
            let neg = qe_mc_formula(&negate(body))?;
            let vars: Vec<Var> = bs.iter().map(|b| b.var.clone()).collect();
            let e = qe_mc(&neg, &vars)?;
            qe_mc(&negate(&e), &[])
        }
        FormulaNode::And(a, b) => Ok(Formula::mk_and(qe_mc_formula(a)?, qe_mc_formula(b)?)),
        FormulaNode::Or(a, b) => Ok(Formula::mk_or(qe_mc_formula(a)?, qe_mc_formula(b)?)),
        _ => Ok(f.clone()),
    }
}

/// Whether every literal of `f` is a monotonicity constraint or the flag.
pub fn is_mc_formula(f: &Formula) -> bool {
    !f.any_atom(&mut |a| a.pred != Pred::Last && !is_mc_atom(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt(a: Term, b: Term) -> Formula {
        Formula::cmp(Pred::Lt, a, b)
    }

    fn le(a: Term, b: Term) -> Formula {
        Formula::cmp(Pred::Le, a, b)
    }

    #[test]
    fn interval_collapses() {
        let f = Formula::and(le(Term::state("x"), Term::quant("z")), lt(Term::quant("z"), Term::state("y")));
        let g = qe_mc(&f, &[Var::quant("z")]).unwrap();
        assert_eq!(g, lt(Term::state("x"), Term::state("y")));
    }

    #[test]
    fn equality_is_substituted() {
        let f = Formula::and(
            Formula::cmp(Pred::Eq, Term::quant("z"), Term::state("x")),
            le(Term::quant("z"), Term::state("y")),
        );
        let g = qe_mc(&f, &[Var::quant("z")]).unwrap();
        assert_eq!(g, le(Term::state("x"), Term::state("y")));
    }

    #[test]
    fn unbounded_side_gives_true() {
        let f = lt(Term::state("x"), Term::quant("z"));
        assert_eq!(qe_mc(&f, &[Var::quant("z")]).unwrap(), Formula::tt());
    }

    #[test]
    fn disequality_splits() {
        // ∃z. 0 ≤ z ≤ 0 ∧ z ≠ x  ≡  x ≠ 0 (as 0 < x ∨ x < 0)
        let f = Formula::and_all([
            le(Term::int(0), Term::quant("z")),
            le(Term::quant("z"), Term::int(0)),
            Formula::neg_atom(Atom::binary(Pred::Eq, Term::quant("z"), Term::state("x"))),
        ]);
        let g = qe_mc(&f, &[Var::quant("z")]).unwrap();
        let a = lt(Term::int(0), Term::state("x"));
        let b = lt(Term::state("x"), Term::int(0));
        assert!(g == Formula::or(a.clone(), b.clone()) || g == Formula::or(b, a), "{g}");
    }

    #[test]
    fn rejects_non_mc_on_eliminated_var() {
        let f = Formula::cmp(Pred::Lt, Term::add(Term::quant("z"), Term::state("x")), Term::int(1));
        assert!(matches!(qe_mc(&f, &[Var::quant("z")]), Err(QeError::NotMc(_))));
        // Untouched non-MC literals pass through.
        let g = Formula::and(f.clone(), le(Term::state("y"), Term::quant("w")));
        assert_eq!(qe_mc(&g, &[Var::quant("w")]).unwrap(), f);
    }
}
