use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::dg::build_dg;
use crate::smt::{Session, SmtError, SolverConfig, Verdict};
use crate::syntax::{stepped, Formula, Signature};
use crate::tableau::{poised_descendants, step, Label};

/// Prefixes enumerated before giving up.
pub const MAX_PREFIXES: usize = 100_000;
const PATH_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlDecision {
    HasKbl(usize),
    /// A prefix whose collapsed dependency graph has a path longer than
    /// `k`; the longest such path over all enumerated prefixes.
    Counterexample { k: usize, path: Vec<String>, prefix: Vec<Label> },
    NotChecked(String),
}

impl fmt::Display for BlDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlDecision::HasKbl(k) => write!(f, "{k}-bounded lookback holds"),
            BlDecision::Counterexample { k, path, .. } => write!(
                f,
                "no {k}-bounded lookback: path of length {} ({})",
                path.len().saturating_sub(1),
                path.join(" - ")
            ),
            BlDecision::NotChecked(why) => write!(f, "not checked: {why}"),
        }
    }
}

struct Enumerator<'a> {
    session: &'a mut Session,
    sat: HashMap<Label, bool>,
    succ: HashMap<Label, Vec<Label>>,
}

impl Enumerator<'_> {
    fn satisfiable(&mut self, l: &Label) -> Result<bool, SmtError> {
        if let Some(&b) = self.sat.get(l) {
            return Ok(b);
        }
        let f = stepped(&l.first_order_part(), 0);
        let b = f.is_true() || self.session.check(&[&f])? != Verdict::Unsat;
        self.sat.insert(l.clone(), b);
        Ok(b)
    }

    fn poised_from(&mut self, l: &Label) -> Result<Vec<Label>, SmtError> {
        let mut out = Vec::new();
        for p in poised_descendants(l) {
            if self.satisfiable(&p)? {
                out.push(p);
            }
        }
        Ok(out)
    }

    fn successors(&mut self, l: &Label) -> Result<Vec<Label>, SmtError> {
        if let Some(s) = self.succ.get(l) {
            return Ok(s.clone());
        }
        let s = if l.has_tomorrow() { self.poised_from(&step(l))? } else { Vec::new() };
        self.succ.insert(l.clone(), s.clone());
        Ok(s)
    }
}

/// Checks `k`-bounded lookback over all tableau prefixes with `k + 1`
/// poised nodes, and over shorter prefixes that cannot be extended. Each
/// poised node must be satisfiable on its own.
pub fn check_k_bl(
    sig: &Arc<Signature>,
    phi: &Formula,
    k: usize,
    cfg: &SolverConfig,
) -> Result<BlDecision, SmtError> {
    let mut session = Session::new(cfg, sig.clone())?;
    let mut en = Enumerator { session: &mut session, sat: HashMap::new(), succ: HashMap::new() };
    let roots = en.poised_from(&Label::singleton(phi.clone()))?;

    let mut best: Option<(Vec<String>, Vec<Label>)> = None;
    let mut inexact = false;
    let mut seen = 0usize;
    let mut stack: Vec<Vec<Label>> = roots.into_iter().rev().map(|r| vec![r]).collect();
    while let Some(prefix) = stack.pop() {
        let last = prefix.last().expect("non-empty prefix");
        let succ = if prefix.len() <= k { en.successors(last)? } else { Vec::new() };
        if !succ.is_empty() {
            for s in succ.into_iter().rev() {
                let mut p = prefix.clone();
                p.push(s);
                stack.push(p);
            }
            continue;
        }
        seen += 1;
        if seen > MAX_PREFIXES {
            return Ok(BlDecision::NotChecked(format!("more than {MAX_PREFIXES} prefixes")));
        }
        let fos: Vec<Formula> = prefix.iter().map(Label::first_order_part).collect();
        let g = build_dg(sig, &fos).collapse();
        let search = g.longest_path(PATH_BUDGET);
        inexact |= !search.exact;
        if search.length() > k && best.as_ref().is_none_or(|(p, _)| p.len() < search.path.len()) {
            let path = search.path.iter().map(|&v| g.nodes[v].to_string()).collect();
            best = Some((path, prefix));
        }
    }
    Ok(match best {
        Some((path, prefix)) => BlDecision::Counterexample { k, path, prefix },
        None if inexact => BlDecision::NotChecked("path search budget exhausted".into()),
        None => BlDecision::HasKbl(k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, signature_from_vars};
    use crate::syntax::{Sort, Theory};

    fn lra() -> Arc<Signature> {
        Arc::new(signature_from_vars(Theory::Lra, &[("x", Sort::Real), ("y", Sort::Real)]))
    }

    #[test]
    fn running_example_has_no_bounded_lookback() {
        let sig = lra();
        let psi = parse_formula(&sig, "(x < 0 & y = 1) & ((next(y) > y & next(x) <= x) U x = y)").unwrap();
        for k in 1..=4 {
            match check_k_bl(&sig, &psi, k, &SolverConfig::default()).unwrap() {
                BlDecision::Counterexample { path, prefix, .. } => {
                    assert_eq!(path.len() - 1, 2 * k, "k = {k}: {path:?}");
                    assert_eq!(prefix.len(), k + 1);
                }
                d => panic!("k = {k}: {d}"),
            }
        }
    }

    #[test]
    fn state_local_formula_has_bounded_lookback() {
        let sig = lra();
        let f = parse_formula(&sig, "G (x > 0 | y < x) & F (x = y)").unwrap();
        assert_eq!(check_k_bl(&sig, &f, 1, &SolverConfig::default()).unwrap(), BlDecision::HasKbl(1));
    }

    #[test]
    fn unsatisfiable_first_node_gives_trivial_lookback() {
        let sig = lra();
        let f = parse_formula(&sig, "x < 0 & x > 0 & G (next(x) > x)").unwrap();
        assert_eq!(check_k_bl(&sig, &f, 0, &SolverConfig::default()).unwrap(), BlDecision::HasKbl(0));
    }

    #[test]
    fn uninterpreted_chain_has_three_bounded_lookback() {
        let mut sig = signature_from_vars(Theory::Lra, &[("x", Sort::Real), ("y", Sort::Real)]);
        sig.declare_pred("p", vec![Sort::Real, Sort::Real]).unwrap();
        let sig = Arc::new(sig);
        let f = parse_formula(&sig, "p(x, next(y)) U next(x) = x + y").unwrap();
        assert_eq!(check_k_bl(&sig, &f, 3, &SolverConfig::default()).unwrap(), BlDecision::HasKbl(3));
    }
}
