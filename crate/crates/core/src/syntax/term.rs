use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Interned-ish identifier. Cheap to clone and shareable across threads.
pub type Name = Arc<str>;

/// Sorts available to terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Real,
    Int,
    Bool,
    /// An uninterpreted sort declared with `sort S`.
    User(Name),
}

impl Sort {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Sort::Real | Sort::Int)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Real => f.write_str("Real"),
            Sort::Int => f.write_str("Int"),
            Sort::Bool => f.write_str("Bool"),
            Sort::User(n) => f.write_str(n),
        }
    }
}

/// How a variable occurrence refers to the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// `v`, the value at the current instant.
    State,
    /// `next(v)`: value at the following instant, required to exist.
    Next,
    /// `wnext(v)`: value at the following instant, if there is one.
    WeakNext,
    /// A quantified variable from W.
    Quant,
    /// `v@i`, the stepped copy of `v` at time step `i`.
    Indexed(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Name,
    pub kind: VarKind,
}

impl Var {
    pub fn new(name: impl Into<Name>, kind: VarKind) -> Self {
        Var { name: name.into(), kind }
    }

    pub fn state(name: impl Into<Name>) -> Self {
        Var::new(name, VarKind::State)
    }

    pub fn quant(name: impl Into<Name>) -> Self {
        Var::new(name, VarKind::Quant)
    }

    pub fn indexed(name: impl Into<Name>, i: u32) -> Self {
        Var::new(name, VarKind::Indexed(i))
    }

    pub fn is_next_like(&self) -> bool {
        matches!(self.kind, VarKind::Next | VarKind::WeakNext)
    }

    /// Rendering used in SMT-LIB output and solver models. `@` is banned from
    /// user identifiers, so indexed names never collide with declared ones.
    pub fn smt_name(&self) -> String {
        match self.kind {
            VarKind::Indexed(i) => format!("{}@{}", self.name, i),
            _ => self.name.to_string(),
        }
    }
}

/// Built-in and uninterpreted function symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Add,
    Sub,
    Neg,
    Mul,
    /// Integer division; only produced when reading solver output.
    IntDiv,
    /// Integer remainder; only produced when reading solver output.
    Mod,
    Uf(Name),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Num(BigRational),
    App(Func, Vec<Term>),
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }

    pub fn state(name: &str) -> Self {
        Term::Var(Var::state(name))
    }

    pub fn next(name: &str) -> Self {
        Term::Var(Var::new(name, VarKind::Next))
    }

    pub fn wnext(name: &str) -> Self {
        Term::Var(Var::new(name, VarKind::WeakNext))
    }

    pub fn quant(name: &str) -> Self {
        Term::Var(Var::quant(name))
    }

    pub fn indexed(name: &str, i: u32) -> Self {
        Term::Var(Var::indexed(name, i))
    }

    pub fn int(n: i64) -> Self {
        Term::Num(BigRational::from_integer(n.into()))
    }

    pub fn rat(p: i64, q: i64) -> Self {
        Term::Num(BigRational::new(p.into(), q.into()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Term, b: Term) -> Self {
        Term::App(Func::Add, vec![a, b])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Term, b: Term) -> Self {
        Term::App(Func::Sub, vec![a, b])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Term, b: Term) -> Self {
        Term::App(Func::Mul, vec![a, b])
    }

    pub fn app(f: &str, args: Vec<Term>) -> Self {
        Term::App(Func::Uf(f.into()), args)
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Calls `f` on every variable occurrence.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::Num(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    pub fn any_var(&self, pred: &mut impl FnMut(&Var) -> bool) -> bool {
        match self {
            Term::Var(v) => pred(v),
            Term::Num(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.any_var(pred)),
        }
    }

    pub fn has_next(&self) -> bool {
        self.any_var(&mut |v| v.kind == VarKind::Next)
    }

    pub fn has_weak_next(&self) -> bool {
        self.any_var(&mut |v| v.kind == VarKind::WeakNext)
    }

    /// Rebuilds the term, replacing each variable by `f(var)` when it
    /// returns `Some`.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Term::Num(_) => self.clone(),
            Term::App(func, args) => {
                Term::App(func.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        !self.any_var(&mut |_| true)
    }
}

pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn smt_rational(q: &BigRational) -> String {
    let abs = q.abs();
    let body = if abs.is_integer() {
        abs.numer().to_string()
    } else {
        format!("(/ {} {})", abs.numer(), abs.denom())
    };
    if q < &BigRational::zero() {
        format!("(- {body})")
    } else {
        body
    }
}
