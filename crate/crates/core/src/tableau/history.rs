use crate::smt::{qe_mc, Entailment, Session, SmtError};
use crate::syntax::{l_rewrite, stepped, Binder, Formula, Signature, Term, Theory, Var, VarKind};

/// `Ω(C⃗)`: every constraint stepped to its instant, with `L` applied to the
/// last one only.
pub fn omega(cs: &[Formula]) -> Formula {
    let Some((last, init)) = cs.split_last() else {
        return Formula::tt();
    };
    let mut out = omega_prefix(init);
    out = Formula::mk_and(out, stepped(&l_rewrite(last), init.len() as u32));
    out
}

/// `⋀ C_i^(i)` without `L`.
pub fn omega_prefix(cs: &[Formula]) -> Formula {
    Formula::and_all(cs.iter().enumerate().map(|(i, c)| stepped(c, i as u32)))
}

fn binders_at(sig: &Signature, k: u32) -> Vec<Binder> {
    sig.state_vars
        .iter()
        .map(|(v, sort)| Binder::new(Var::indexed(v.clone(), k), sort.clone()))
        .collect()
}

/// `h(C⃗≤k)` from `h(C⃗≤k-1)` (`⊤` for `k = 0`) and `C_k`, before
/// quantifier elimination:
/// `∃V^k. h_{k-1}[ℓ:=⊤][V:=V^k] ∧ L(C_k)^(k)[V^{k+1}:=V]`.
pub fn extend_history_raw(sig: &Signature, prev: &Formula, c: &Formula, k: u32) -> Formula {
    let old = prev.assign_last(true).substitute(&mut |v| match v.kind {
        VarKind::State => Some(Term::Var(Var::indexed(v.name.clone(), k))),
        _ => None,
    });
    let new = stepped(&l_rewrite(c), k).substitute(&mut |v| match v.kind {
        VarKind::Indexed(j) if j == k + 1 => Some(Term::Var(Var::state(v.name.clone()))),
        _ => None,
    });
    Formula::mk_exists(binders_at(sig, k), Formula::mk_and(old, new))
}

/// How history constraints are simplified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QeMode {
    /// Monotonicity-constraint elimination, falling back to the solver.
    Mc,
    /// The solver's `qe` tactic.
    Solver,
    /// Keep the quantifiers.
    None,
}

pub fn qe_mode(sig: &Signature) -> QeMode {
    if sig.has_uninterpreted() {
        return QeMode::None;
    }
    match sig.theory {
        Theory::Lra => QeMode::Mc,
        Theory::Lia => QeMode::Solver,
        Theory::Euf => QeMode::None,
    }
}

/// Eliminates the outermost quantifier block of `h` when the theory allows
/// it. Falls back to the quantified form when elimination fails.
pub fn eliminate(session: &mut Session, h: &Formula) -> Result<Formula, SmtError> {
    let sig = session.signature().clone();
    let mode = qe_mode(&sig);
    if mode == QeMode::None || h.is_quantifier_free() {
        return Ok(h.clone());
    }
    if mode == QeMode::Mc {
        if let crate::syntax::FormulaNode::Exists(bs, body) = h.node() {
            if body.is_quantifier_free() {
                let vars: Vec<Var> = bs.iter().map(|b| b.var.clone()).collect();
                crate::smt::stats::record_qe();
                if let Ok(r) = qe_mc(body, &vars) {
                    return Ok(r);
                }
            }
        }
    }
    match session.qe(h) {
        Ok(r) => Ok(r),
        Err(SmtError::Solver(_) | SmtError::Protocol(_)) => Ok(h.clone()),
        Err(e) => Err(e),
    }
}

/// `h(C⃗≤k)` for every `k`, quantifier-eliminated where possible.
pub fn history_constraints(session: &mut Session, cs: &[Formula]) -> Result<Vec<Formula>, SmtError> {
    let sig = session.signature().clone();
    let mut out: Vec<Formula> = Vec::with_capacity(cs.len());
    let mut prev = Formula::tt();
    for (k, c) in cs.iter().enumerate() {
        let raw = extend_history_raw(&sig, &prev, c, k as u32);
        prev = eliminate(session, &raw)?;
        out.push(prev.clone());
    }
    Ok(out)
}

/// `a ⊨ b`, answering trivial cases without the solver.
pub fn entails(session: &mut Session, a: &Formula, b: &Formula) -> Result<Entailment, SmtError> {
    if a == b || b.is_true() || a.is_false() {
        return Ok(Entailment::Yes);
    }
    session.entails(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, signature_from_vars};
    use crate::syntax::{Pred, Sort};

    #[test]
    fn omega_applies_l_at_the_end_only() {
        let sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real)]);
        let c = parse_formula(&sig, "next(x) > x").unwrap();
        let o = omega(&[c.clone(), c.clone()]);
        let gt = |a, b| Formula::cmp(Pred::Gt, Term::indexed("x", a), Term::indexed("x", b));
        assert_eq!(o, Formula::and(gt(1, 0), Formula::and(Formula::last(), gt(2, 1))));
    }

    #[test]
    fn raw_history_renames_last_instant() {
        let sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real)]);
        let c = parse_formula(&sig, "next(x) > x").unwrap();
        let h0 = extend_history_raw(&sig, &Formula::tt(), &c, 0);
        let body = Formula::and(
            Formula::last(),
            Formula::cmp(Pred::Gt, Term::state("x"), Term::indexed("x", 0)),
        );
        assert_eq!(h0, Formula::exists(binders_at(&sig, 0), body));
        let h1 = extend_history_raw(&sig, &h0, &c, 1);
        assert!(h1.free_vars().iter().all(|v| !matches!(v.kind, VarKind::Indexed(_))));
    }
}
