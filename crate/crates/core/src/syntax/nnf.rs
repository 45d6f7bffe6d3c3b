//! Surface formulas with unrestricted negation and their normalisation.

use super::formula::{Atom, Binder, Formula, FormulaNode};

/// Formula as written by a user: negation may appear anywhere and `F`/`G`
/// are still present. [`to_nnf`] turns it into a [`Formula`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extended {
    True,
    False,
    Atom(Atom),
    Not(Box<Extended>),
    And(Box<Extended>, Box<Extended>),
    Or(Box<Extended>, Box<Extended>),
    Implies(Box<Extended>, Box<Extended>),
    Exists(Vec<Binder>, Box<Extended>),
    Forall(Vec<Binder>, Box<Extended>),
    Next(Box<Extended>),
    WeakNext(Box<Extended>),
    Until(Box<Extended>, Box<Extended>),
    Release(Box<Extended>, Box<Extended>),
    Finally(Box<Extended>),
    Globally(Box<Extended>),
}

impl Extended {
    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Extended) -> Self {
        Extended::Not(Box::new(e))
    }

    pub fn and(a: Extended, b: Extended) -> Self {
        Extended::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Extended, b: Extended) -> Self {
        Extended::Or(Box::new(a), Box::new(b))
    }

    pub fn until(a: Extended, b: Extended) -> Self {
        Extended::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Extended, b: Extended) -> Self {
        Extended::Release(Box::new(a), Box::new(b))
    }
}

impl From<&Formula> for Extended {
    fn from(f: &Formula) -> Self {
        let b = |f: &Formula| Box::new(Extended::from(f));
        match f.node() {
            FormulaNode::True => Extended::True,
            FormulaNode::False => Extended::False,
            FormulaNode::Atom(a) => Extended::Atom(a.clone()),
            FormulaNode::NegAtom(a) => Extended::not(Extended::Atom(a.clone())),
            FormulaNode::And(x, y) => Extended::And(b(x), b(y)),
            FormulaNode::Or(x, y) => Extended::Or(b(x), b(y)),
            FormulaNode::Exists(bs, x) => Extended::Exists(bs.clone(), b(x)),
            FormulaNode::Forall(bs, x) => Extended::Forall(bs.clone(), b(x)),
            FormulaNode::Next(x) => Extended::Next(b(x)),
            FormulaNode::WeakNext(x) => Extended::WeakNext(b(x)),
            FormulaNode::Until(x, y) => Extended::Until(b(x), b(y)),
            FormulaNode::Release(x, y) => Extended::Release(b(x), b(y)),
        }
    }
}

/// Pushes negations down to atoms using the finite-trace dualities
/// `¬X φ ≡ wX ¬φ`, `¬(φ U ψ) ≡ ¬φ R ¬ψ` and friends, and desugars
/// `F φ = ⊤ U φ`, `G φ = ⊥ R φ`.
pub fn to_nnf(e: &Extended) -> Formula {
    nnf(e, false)
}

fn nnf(e: &Extended, neg: bool) -> Formula {
    match e {
        Extended::True => {
            if neg {
                Formula::ff()
            } else {
                Formula::tt()
            }
        }
        Extended::False => {
            if neg {
                Formula::tt()
            } else {
                Formula::ff()
            }
        }
        Extended::Atom(a) => {
            if neg {
                Formula::neg_atom(a.clone())
            } else {
                Formula::atom(a.clone())
            }
        }
        Extended::Not(x) => nnf(x, !neg),
        Extended::And(a, b) => {
            if neg {
                Formula::or(nnf(a, true), nnf(b, true))
            } else {
                Formula::and(nnf(a, false), nnf(b, false))
            }
        }
        Extended::Or(a, b) => {
            if neg {
                Formula::and(nnf(a, true), nnf(b, true))
            } else {
                Formula::or(nnf(a, false), nnf(b, false))
            }
        }
        Extended::Implies(a, b) => {
            if neg {
                Formula::and(nnf(a, false), nnf(b, true))
            } else {
                Formula::or(nnf(a, true), nnf(b, false))
            }
        }
        Extended::Exists(bs, x) => {
            if neg {
                Formula::forall(bs.clone(), nnf(x, true))
            } else {
                Formula::exists(bs.clone(), nnf(x, false))
            }
        }
        Extended::Forall(bs, x) => {
            if neg {
                Formula::exists(bs.clone(), nnf(x, true))
            } else {
                Formula::forall(bs.clone(), nnf(x, false))
            }
        }
        Extended::Next(x) => {
            if neg {
                Formula::weak_next(nnf(x, true))
            } else {
                Formula::next(nnf(x, false))
            }
        }
        Extended::WeakNext(x) => {
            if neg {
                Formula::next(nnf(x, true))
            } else {
                Formula::weak_next(nnf(x, false))
            }
        }
        Extended::Until(a, b) => {
            if neg {
                Formula::release(nnf(a, true), nnf(b, true))
            } else {
                Formula::until(nnf(a, false), nnf(b, false))
            }
        }
        Extended::Release(a, b) => {
            if neg {
                Formula::until(nnf(a, true), nnf(b, true))
            } else {
                Formula::release(nnf(a, false), nnf(b, false))
            }
        }
        Extended::Finally(x) => {
            if neg {
                Formula::globally(nnf(x, true))
            } else {
                Formula::finally(nnf(x, false))
            }
        }
        Extended::Globally(x) => {
            if neg {
                Formula::finally(nnf(x, true))
            } else {
                Formula::globally(nnf(x, false))
            }
        }
    }
}

/// Negation of an NNF formula, again in NNF.
pub fn negate(f: &Formula) -> Formula {
    nnf(&Extended::from(f), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Pred, Term};

    fn p(x: &str) -> Atom {
        Atom::new(Pred::Uf("p".into()), vec![Term::state(x)])
    }

    fn q(x: &str) -> Atom {
        Atom::new(Pred::Uf("q".into()), vec![Term::state(x)])
    }

    #[test]
    fn negation_already_at_atom() {
        let e = Extended::not(Extended::Atom(p("x")));
        assert_eq!(to_nnf(&e), Formula::neg_atom(p("x")));
    }

    #[test]
    fn negated_tomorrow_becomes_weak_tomorrow() {
        let e = Extended::not(Extended::Next(Box::new(Extended::Atom(p("x")))));
        assert_eq!(to_nnf(&e), Formula::weak_next(Formula::neg_atom(p("x"))));
    }

    #[test]
    fn negated_until_becomes_release() {
        let e = Extended::not(Extended::until(Extended::Atom(p("x")), Extended::Atom(q("y"))));
        assert_eq!(
            to_nnf(&e),
            Formula::release(Formula::neg_atom(p("x")), Formula::neg_atom(q("y")))
        );
    }

    #[test]
    fn finally_and_globally_desugar() {
        let f = to_nnf(&Extended::Finally(Box::new(Extended::Atom(p("x")))));
        assert_eq!(f, Formula::until(Formula::tt(), Formula::atom(p("x"))));
        let g = to_nnf(&Extended::not(Extended::Globally(Box::new(Extended::Atom(p("x"))))));
        assert_eq!(g, Formula::until(Formula::tt(), Formula::neg_atom(p("x"))));
    }

    #[test]
    fn nnf_is_idempotent_on_examples() {
        let e = Extended::not(Extended::and(
            Extended::Globally(Box::new(Extended::Atom(p("x")))),
            Extended::WeakNext(Box::new(Extended::not(Extended::Atom(q("x"))))),
        ));
        let once = to_nnf(&e);
        assert_eq!(to_nnf(&Extended::from(&once)), once);
        assert_eq!(negate(&negate(&once)), once);
    }
}
