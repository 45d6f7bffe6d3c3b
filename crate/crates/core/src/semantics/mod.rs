//! Finite-trace semantics: term evaluation and satisfaction on concrete
//! runs, a bounded-length satisfiability oracle that unrolls formulas
//! directly, and the textual trace format.

mod bmc;
mod structure;
mod trace;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

pub use bmc::{bounded_sat, encode_bounded, Bounded};
pub use structure::{parse_numeral, parse_rational_text, parse_value, EvalError, FunDef, Structure, Value};
pub use trace::{parse_trace, print_trace, TraceError};

use crate::smt::{Model, SExpr, Session, SmtError, SolverConfig, Verdict};
use crate::syntax::{
    Atom, Binder, Formula, FormulaNode, Func, Name, Pred, Signature, Sort, Term, Theory, VarKind,
};

/// A run: an interpretation of the uninterpreted symbols plus a non-empty
/// sequence of state variable assignments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Run {
    pub structure: Structure,
    pub states: Vec<BTreeMap<Name, Value>>,
}

impl Run {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Values of quantified variables.
pub type Environment = BTreeMap<Name, Value>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermValue {
    Value(Value),
    NotWellDefined,
}

#[derive(Debug, thiserror::Error)]
pub enum SemanticsError {
    #[error("instant {0} is outside a run of length {1}")]
    OutOfRange(usize, usize),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("ill-typed evaluation: {0}")]
    Type(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error("solver could not decide a quantified subformula: {0}")]
    Inconclusive(String),
}

fn default_value(sort: &Sort, s: &Structure) -> Value {
    match sort {
        Sort::Real | Sort::Int => Value::Num(BigRational::zero()),
        Sort::Bool => Value::Bool(false),
        Sort::User(n) => Value::Elem(
            s.elements(n).first().cloned().unwrap_or_else(|| format!("{n}!val!0").into()),
        ),
    }
}

/// Makes a structure total for `sig`: every user sort gets a non-empty
/// universe and every symbol a definition (a constant one if the model left
/// it unconstrained).
pub fn complete_structure(sig: &Signature, s: &mut Structure) {
    s.defs.retain(|n, _| {
        sig.predicates.contains_key(n) || sig.functions.contains_key(n) || n.contains('!')
    });
    for sort in &sig.sorts {
        let u = s.universes.entry(sort.clone()).or_default();
        if u.is_empty() {
            u.push(format!("{sort}!val!0").into());
        }
    }
    let mut missing = Vec::new();
    for (p, args) in &sig.predicates {
        if !s.defs.contains_key(p) {
            missing.push((p.clone(), args.clone(), Sort::Bool));
        }
    }
    for (f, fs) in &sig.functions {
        if !s.defs.contains_key(f) {
            missing.push((f.clone(), fs.args.clone(), fs.result.clone()));
        }
    }
    for (name, args, ret) in missing {
        let body = SExpr::atom(default_value(&ret, s).to_smt());
        let params = args
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("x!{i}"), SExpr::atom(a.to_string())))
            .collect();
        s.defs.insert(name, FunDef { params, ret: SExpr::atom(ret.to_string()), body });
    }
}

/// Reads a run of length `n` off a model of a formula over `v@0 … v@(n-1)`.
/// Variables the model does not mention get default values.
pub fn run_from_model(sig: &Signature, model: &Model, n: usize) -> Run {
    let mut structure = model.structure.clone();
    complete_structure(sig, &mut structure);
    let states = (0..n)
        .map(|i| {
            sig.state_vars
                .iter()
                .map(|(v, sort)| {
                    let key = format!("{v}@{i}");
                    let val = model.consts.get(&key).cloned().unwrap_or_else(|| default_value(sort, &structure));
                    (v.clone(), val)
                })
                .collect()
        })
        .collect();
    Run { structure, states }
}

/// `⟦t⟧` at instant `i` under `gamma`.
pub fn eval_term(run: &Run, i: usize, gamma: &Environment, t: &Term) -> Result<TermValue, SemanticsError> {
    let n = run.len();
    if i >= n {
        return Err(SemanticsError::OutOfRange(i, n));
    }
    if i + 1 == n && (t.has_next() || t.has_weak_next()) {
        return Ok(TermValue::NotWellDefined);
    }
    eval_defined(run, i, gamma, t).map(TermValue::Value)
}

fn eval_defined(run: &Run, i: usize, gamma: &Environment, t: &Term) -> Result<Value, SemanticsError> {
    match t {
        Term::Num(q) => Ok(Value::Num(q.clone())),
        Term::Var(v) => {
            let at = match v.kind {
                VarKind::State => i,
                VarKind::Next | VarKind::WeakNext => i + 1,
                VarKind::Quant => {
                    return gamma.get(&v.name).cloned().ok_or_else(|| SemanticsError::Unbound(v.name.to_string()))
                }
                VarKind::Indexed(_) => return Err(SemanticsError::Unbound(v.smt_name())),
            };
            run.states
                .get(at)
                .and_then(|s| s.get(&v.name))
                .cloned()
                .ok_or_else(|| SemanticsError::Unbound(v.name.to_string()))
        }
        Term::App(f, args) => {
            let vals = args.iter().map(|a| eval_defined(run, i, gamma, a)).collect::<Result<Vec<_>, _>>()?;
            if let Func::Uf(name) = f {
                return run
                    .structure
                    .apply(name, &vals)?
                    .ok_or_else(|| SemanticsError::Unbound(name.to_string()));
            }
            let nums = vals
                .iter()
                .map(|v| v.as_num().cloned().ok_or_else(|| SemanticsError::Type(format!("{t:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let ty = || SemanticsError::Type(format!("{t:?}"));
            let q = match (f, nums.as_slice()) {
                (Func::Add, [a, b]) => a + b,
                (Func::Sub, [a, b]) => a - b,
                (Func::Mul, [a, b]) => a * b,
                (Func::Neg, [a]) => -a.clone(),
                (Func::IntDiv | Func::Mod, [a, b]) if a.is_integer() && b.is_integer() && !b.is_zero() => {
                    let (a, b) = (a.to_integer(), b.to_integer());
                    let r = a.mod_floor(&num_traits::Signed::abs(&b));
                    let v = if matches!(f, Func::Mod) { r } else { (&a - &r) / &b };
                    BigRational::from_integer(v)
                }
                _ => return Err(ty()),
            };
            Ok(Value::Num(q))
        }
    }
}

/// Truth of an atom at instant `i`, including the last-instant convention:
/// an atom with an undefined argument holds iff it mentions weak-next terms
/// and no strong-next term.
pub fn atom_holds(run: &Run, i: usize, gamma: &Environment, a: &Atom) -> Result<bool, SemanticsError> {
    let mut vals = Vec::with_capacity(a.args.len());
    for t in &a.args {
        match eval_term(run, i, gamma, t)? {
            TermValue::Value(v) => vals.push(v),
            TermValue::NotWellDefined => return Ok(a.has_weak_next() && !a.has_next()),
        }
    }
    let ty = || SemanticsError::Type(format!("{a:?}"));
    let num = |v: &Value| v.as_num().cloned().ok_or_else(ty);
    Ok(match &a.pred {
        Pred::Eq => vals[0] == vals[1],
        Pred::Lt => num(&vals[0])? < num(&vals[1])?,
        Pred::Le => num(&vals[0])? <= num(&vals[1])?,
        Pred::Gt => num(&vals[0])? > num(&vals[1])?,
        Pred::Ge => num(&vals[0])? >= num(&vals[1])?,
        Pred::Cong(k) => {
            let d = num(&vals[0])? - num(&vals[1])?;
            if !d.is_integer() {
                return Err(ty());
            }
            d.to_integer().mod_floor(&BigInt::from(*k)).is_zero()
        }
        Pred::Uf(p) => run
            .structure
            .apply(p, &vals)?
            .and_then(|v| v.as_bool())
            .ok_or_else(|| SemanticsError::Unbound(p.to_string()))?,
        Pred::Last => return Err(SemanticsError::Type("the successor flag has no meaning on runs".into())),
    })
}

/// Evaluates formulas on runs. Quantifiers over uninterpreted sorts are
/// enumerated over the run's finite universes; quantifiers over numbers are
/// decided by a closed solver query after substituting the run's values.
pub struct TraceChecker {
    sig: Arc<Signature>,
    cfg: SolverConfig,
    session: Option<Session>,
}

impl TraceChecker {
    pub fn new(sig: Arc<Signature>, cfg: SolverConfig) -> Self {
        TraceChecker { sig, cfg, session: None }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    /// `σ ⊨^i φ`.
    pub fn holds(&mut self, run: &Run, i: usize, phi: &Formula) -> Result<bool, SemanticsError> {
        let n = run.len();
        if i >= n {
            return Err(SemanticsError::OutOfRange(i, n));
        }
        match phi.node() {
            FormulaNode::Next(a) => Ok(i + 1 < n && self.holds(run, i + 1, a)?),
            FormulaNode::WeakNext(a) => Ok(i + 1 == n || self.holds(run, i + 1, a)?),
            FormulaNode::And(a, b) if !phi.is_first_order() => {
                Ok(self.holds(run, i, a)? && self.holds(run, i, b)?)
            }
            FormulaNode::Or(a, b) if !phi.is_first_order() => {
                Ok(self.holds(run, i, a)? || self.holds(run, i, b)?)
            }
            FormulaNode::Until(a, b) => {
                for j in i..n {
                    if self.holds(run, j, b)? {
                        return Ok(true);
                    }
                    if !self.holds(run, j, a)? {
                        return Ok(false);
                    }
                }
                Ok(false)
            }
            FormulaNode::Release(a, b) => {
                for j in i..n {
                    if !self.holds(run, j, b)? {
                        return Ok(false);
                    }
                    if self.holds(run, j, a)? {
                        return Ok(true);
                    }
                }
                Ok(true)
            }
            _ => self.fo_holds(run, i, &Environment::new(), phi),
        }
    }

    /// `σ ⊨^i_γ λ` for a first-order formula.
    pub fn fo_holds(
        &mut self,
        run: &Run,
        i: usize,
        gamma: &Environment,
        phi: &Formula,
    ) -> Result<bool, SemanticsError> {
        match phi.node() {
            FormulaNode::True => Ok(true),
            FormulaNode::False => Ok(false),
            FormulaNode::Atom(a) => atom_holds(run, i, gamma, a),
            FormulaNode::NegAtom(a) => Ok(!atom_holds(run, i, gamma, a)?),
            FormulaNode::And(a, b) => Ok(self.fo_holds(run, i, gamma, a)? && self.fo_holds(run, i, gamma, b)?),
            FormulaNode::Or(a, b) => Ok(self.fo_holds(run, i, gamma, a)? || self.fo_holds(run, i, gamma, b)?),
            FormulaNode::Exists(bs, body) | FormulaNode::Forall(bs, body) => {
                let universal = matches!(phi.node(), FormulaNode::Forall(..));
                if bs.iter().all(|b| matches!(b.sort, Sort::User(_))) {
                    self.enumerate(run, i, gamma, bs, body, universal)
                } else {
                    self.closed_query(run, i, gamma, phi)
                }
            }
            _ => Err(SemanticsError::Type(format!("temporal formula in first-order position: {phi}"))),
        }
    }

    fn enumerate(
        &mut self,
        run: &Run,
        i: usize,
        gamma: &Environment,
        bs: &[Binder],
        body: &Formula,
        universal: bool,
    ) -> Result<bool, SemanticsError> {
        let Some((first, rest)) = bs.split_first() else {
            return self.fo_holds(run, i, gamma, body);
        };
        let Sort::User(sort) = &first.sort else { unreachable!("checked by caller") };
        let elems = run.structure.elements(sort).to_vec();
        for e in elems {
            let mut g = gamma.clone();
            g.insert(first.var.name.clone(), Value::Elem(e));
            let r = self.enumerate(run, i, &g, rest, body, universal)?;
            if r != universal {
                return Ok(r);
            }
        }
        Ok(universal)
    }

    fn closed_query(
        &mut self,
        run: &Run,
        i: usize,
        gamma: &Environment,
        phi: &Formula,
    ) -> Result<bool, SemanticsError> {
        let last = i + 1 == run.len();
        // Atoms with undefined next-terms get their fixed truth value first.
        let fixed = if last {
            phi.map_literals_simplify(&mut |a, neg| {
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
        } else {
            phi.clone()
        };
        let mut err = None;
        let closed = fixed.substitute(&mut |v| {
            let val = match v.kind {
                VarKind::State => run.states[i].get(&v.name).cloned(),
                VarKind::Next | VarKind::WeakNext => run.states.get(i + 1).and_then(|s| s.get(&v.name)).cloned(),
                VarKind::Quant => gamma.get(&v.name).cloned(),
                VarKind::Indexed(_) => None,
            };
            match val {
                Some(Value::Num(q)) => Some(Term::Num(q)),
                Some(other) => {
                    err.get_or_insert_with(|| format!("non-numeric value {other} in arithmetic quantifier"));
                    None
                }
                None => {
                    if v.kind != VarKind::Quant {
                        err.get_or_insert_with(|| format!("no value for `{}`", v.name));
                    }
                    None
                }
            }
        });
        if let Some(e) = err {
            return Err(SemanticsError::Type(e));
        }
        if closed.is_true() || closed.is_false() {
            return Ok(closed.is_true());
        }
        let mut script = definitions_script(&run.structure);
        script.push_str(&format!("(assert {})\n", crate::parser::print_smt(&closed)));
        let session = self.session()?;
        match session.check_script(&script)? {
            Verdict::Sat => Ok(true),
            Verdict::Unsat => Ok(false),
            Verdict::Unknown(r) => Err(SemanticsError::Inconclusive(r)),
        }
    }

    fn session(&mut self) -> Result<&mut Session, SmtError> {
        if self.session.is_none() {
            // Symbols are defined per query from the run's structure, so
            // the session only knows the theory.
            let bare = Signature::new(self.sig.theory);
            self.session = Some(Session::new(&self.cfg, Arc::new(bare))?);
        }
        Ok(self.session.as_mut().expect("just created"))
    }
}

/// `define-fun` commands for the symbols of a structure, dependencies
/// first.
fn definitions_script(s: &Structure) -> String {
    let mut out = String::new();
    let mut done: Vec<&str> = Vec::new();
    let names: Vec<&str> = s.defs.keys().map(|k| &**k).collect();
    let mentions = |e: &SExpr, n: &str| -> bool {
        fn go(e: &SExpr, n: &str) -> bool {
            match e {
                SExpr::Atom(a) => a == n,
                SExpr::List(v) => v.iter().any(|x| go(x, n)),
            }
        }
        go(e, n)
    };
    while done.len() < names.len() {
        let before = done.len();
        for n in &names {
            if done.contains(n) {
                continue;
            }
            let d = &s.defs[*n];
            let ready = names.iter().all(|m| m == n || done.contains(m) || !mentions(&d.body, m));
            if ready || before == done.len() && n == names.iter().find(|x| !done.contains(x)).unwrap_or(n) {
                let params: Vec<String> = d.params.iter().map(|(p, s)| format!("({p} {s})")).collect();
                out.push_str(&format!("(define-fun {n} ({}) {} {})\n", params.join(" "), d.ret, d.body));
                done.push(n);
            }
        }
    }
    out
}

/// Whether arithmetic in `theory` is over the integers.
pub fn is_integer_theory(theory: Theory) -> bool {
    theory == Theory::Lia
}
