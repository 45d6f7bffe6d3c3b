//! The one-pass tree-shaped tableau.
//!
//! The tree is built breadth-first over the number of STEP rules taken:
//! layer `k` holds every branch that has advanced time `k` times, and each
//! layer is expanded depth-first in tree order. The first accepted branch in
//! that order decides satisfiability.

mod dot;
mod history;
mod label;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use rayon::prelude::*;

pub use dot::to_dot;
pub use history::{
    eliminate, entails, extend_history_raw, history_constraints, omega, omega_prefix, qe_mode, QeMode,
};
pub use label::{expand, poised_descendants, step, Label};

use crate::semantics::{run_from_model, Run};
use crate::smt::{Entailment, Session, SmtError, SolverConfig, Verdict};
use crate::syntax::{l_rewrite, negate, stepped, Formula, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableauConfig {
    pub prune: bool,
    /// STEP rules allowed on a branch before it is cut.
    pub max_steps: usize,
    /// Tableau nodes created before the search gives up.
    pub node_budget: usize,
    pub workers: usize,
    pub solver: SolverConfig,
    /// Keep the tree for [`to_dot`].
    pub record_tree: bool,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig {
            prune: true,
            max_steps: 64,
            node_budget: 1_000_000,
            workers: 1,
            solver: SolverConfig::default(),
            record_tree: false,
        }
    }
}

/// Why a search ended without a verdict, in increasing precedence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum UnknownReason {
    SolverUnknown,
    StepBound,
    Budget,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::SolverUnknown => "solver unknown",
            UnknownReason::StepBound => "step bound",
            UnknownReason::Budget => "budget",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat { witness: Run, branch: usize },
    Unsat,
    Unknown(UnknownReason),
}

/// Why a leaf was closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Empty,
    Contradiction,
    /// Pruned against the poised node with this index on the branch.
    Prune { with: usize },
    StepBound,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Empty => f.write_str("EMPTY"),
            Rule::Contradiction => f.write_str("CONTRADICTION"),
            Rule::Prune { with } => write!(f, "PRUNE (poised node {with})"),
            Rule::StepBound => f.write_str("STEP BOUND"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mark {
    Accepted,
    Rejected(Rule),
    Cut,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub label: Label,
    /// Index among the poised nodes of its branch, for poised nodes.
    pub poised_index: Option<usize>,
    pub mark: Option<Mark>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Nodes from the root to `id`.
    pub fn branch(&self, id: usize) -> Vec<&TreeNode> {
        let mut out = vec![&self.nodes[id]];
        while let Some(p) = out.last().and_then(|n| n.parent) {
            out.push(&self.nodes[p]);
        }
        out.reverse();
        out
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.mark.is_some())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes: usize,
    pub poised: usize,
    pub max_steps_reached: usize,
    pub rejected_contradiction: usize,
    pub rejected_prune: usize,
    pub cut_step_bound: usize,
    pub solver_queries: u64,
    pub solver_unknowns: usize,
    pub elapsed_ms: u128,
}

impl Stats {
    fn absorb(&mut self, o: &Stats) {
        self.nodes += o.nodes;
        self.poised += o.poised;
        self.max_steps_reached = self.max_steps_reached.max(o.max_steps_reached);
        self.rejected_contradiction += o.rejected_contradiction;
        self.rejected_prune += o.rejected_prune;
        self.cut_step_bound += o.cut_step_bound;
        self.solver_queries += o.solver_queries;
        self.solver_unknowns += o.solver_unknowns;
    }
}

#[derive(Debug)]
pub struct Solution {
    pub outcome: SolveOutcome,
    pub stats: Stats,
    pub tree: Option<Tree>,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Smt(#[from] SmtError),
}

/// The poised nodes of a branch, newest first, with lazily computed history
/// constraints.
struct Chain {
    k: usize,
    label: Label,
    fo: Formula,
    /// `⋀_{i<k} F(π_i)^(i)`.
    prefix: Formula,
    prev: Option<Arc<Chain>>,
    empty_sat: bool,
    h: OnceLock<Formula>,
}

impl Chain {
    fn omega(&self) -> Formula {
        Formula::mk_and(self.prefix.clone(), stepped(&l_rewrite(&self.fo), self.k as u32))
    }

    fn next_prefix(&self) -> Formula {
        Formula::mk_and(self.prefix.clone(), stepped(&self.fo, self.k as u32))
    }

    fn history(&self, session: &mut Session) -> Result<Formula, SmtError> {
        if let Some(h) = self.h.get() {
            return Ok(h.clone());
        }
        let prev = match &self.prev {
            Some(p) => p.history(session)?,
            None => Formula::tt(),
        };
        let raw = extend_history_raw(session.signature(), &prev, &self.fo, self.k as u32);
        let h = eliminate(session, &raw)?;
        Ok(self.h.get_or_init(|| h).clone())
    }
}

#[derive(Clone)]
struct Item {
    label: Label,
    parent: Option<usize>,
    chain: Option<Arc<Chain>>,
}

struct LocalNode {
    parent: Option<usize>,
    label: Label,
    poised_index: Option<usize>,
    mark: Option<Mark>,
}

#[derive(Default)]
struct ItemResult {
    count: usize,
    nodes: Vec<LocalNode>,
    /// Node id, `Ω ∧ ¬ℓ` and the witness length.
    accepted: Option<(usize, Formula, usize)>,
    next: Vec<(usize, Item)>,
    stats: Stats,
    budget: bool,
    cut: bool,
    tainted: bool,
}

struct Worker<'a> {
    cfg: &'a TableauConfig,
    created: &'a AtomicUsize,
}

impl Worker<'_> {
    fn process(&self, session: &mut Session, item: Item) -> Result<ItemResult, SmtError> {
        let queries_before = session.queries;
        let mut res = ItemResult::default();
        let r = self.process_inner(session, item, &mut res);
        res.stats.solver_queries = session.queries - queries_before;
        r.map(|_| res)
    }

    fn process_inner(&self, session: &mut Session, item: Item, res: &mut ItemResult) -> Result<(), SmtError> {
        let record = self.cfg.record_tree;
        let mut stack: Vec<(Label, Option<usize>)> = vec![(item.label, None)];
        while let Some((label, parent)) = stack.pop() {
            if self.created.fetch_add(1, Ordering::Relaxed) >= self.cfg.node_budget {
                res.budget = true;
                return Ok(());
            }
            let id = res.count;
            res.count += 1;
            res.stats.nodes += 1;
            if record {
                res.nodes.push(LocalNode { parent, label: label.clone(), poised_index: None, mark: None });
            }
            if !label.is_poised() {
                for child in expand(&label).into_iter().rev() {
                    stack.push((child, Some(id)));
                }
                continue;
            }
            let (mark, next) = self.poised(session, &label, item.chain.clone(), res)?;
            res.stats.poised += 1;
            let k = item.chain.as_ref().map_or(0, |c| c.k + 1);
            res.stats.max_steps_reached = res.stats.max_steps_reached.max(k);
            if record {
                let n = res.nodes.last_mut().expect("just pushed");
                n.poised_index = Some(k);
                n.mark = mark.clone();
            }
            if let Some(next) = next {
                res.next.push((id, next));
            }
            if let Some((_, om, len)) = res.accepted.take() {
                res.accepted = Some((id, om, len));
                return Ok(());
            }
        }
        Ok(())
    }

    /// Applies EMPTY, CONTRADICTION, PRUNE, the step bound and STEP, in
    /// that order.
    fn poised(
        &self,
        session: &mut Session,
        label: &Label,
        prev: Option<Arc<Chain>>,
        res: &mut ItemResult,
    ) -> Result<(Option<Mark>, Option<Item>), SmtError> {
        let k = prev.as_ref().map_or(0, |c| c.k + 1);
        let fo = label.first_order_part();
        let prefix = prev.as_ref().map_or_else(Formula::tt, |p| p.next_prefix());
        let mut chain = Chain { k, label: label.clone(), fo, prefix, prev, empty_sat: false, h: OnceLock::new() };
        let om = chain.omega();
        if om.is_false() {
            res.stats.rejected_contradiction += 1;
            return Ok((Some(Mark::Rejected(Rule::Contradiction)), None));
        }

        if !label.has_strong_tomorrow() {
            let not_last = negate(&Formula::last());
            match session.check(&[&om, &not_last])? {
                Verdict::Sat => {
                    chain.empty_sat = true;
                    res.accepted = Some((usize::MAX, Formula::and(om, not_last), k + 1));
                    return Ok((Some(Mark::Accepted), None));
                }
                Verdict::Unknown(_) => {
                    res.tainted = true;
                    res.stats.solver_unknowns += 1;
                }
                Verdict::Unsat => {}
            }
        }

        match session.check(&[&om])? {
            Verdict::Unsat => {
                res.stats.rejected_contradiction += 1;
                return Ok((Some(Mark::Rejected(Rule::Contradiction)), None));
            }
            Verdict::Unknown(_) => res.stats.solver_unknowns += 1,
            Verdict::Sat => {}
        }

        let chain = Arc::new(chain);
        if self.cfg.prune {
            let mut cand = chain.prev.clone();
            while let Some(c) = cand {
                if c.label == chain.label {
                    // EMPTY would have accepted the earlier node already.
                    assert!(!c.empty_sat, "EMPTY and PRUNE applicable on the same node");
                    let h_now = chain.history(session)?;
                    let h_then = c.history(session)?;
                    match entails(session, &h_now, &h_then)? {
                        Entailment::Yes => {
                            res.stats.rejected_prune += 1;
                            return Ok((Some(Mark::Rejected(Rule::Prune { with: c.k })), None));
                        }
                        Entailment::Unknown => res.stats.solver_unknowns += 1,
                        Entailment::No => {}
                    }
                }
                cand = c.prev.clone();
            }
        }

        if k >= self.cfg.max_steps {
            res.cut = true;
            res.stats.cut_step_bound += 1;
            return Ok((Some(Mark::Cut), None));
        }
        let next = Item { label: step(label), parent: None, chain: Some(chain) };
        Ok((None, Some(next)))
    }
}

/// Decides satisfiability of a formula in negation normal form.
/// Reads the witness of an accepted branch from a fresh session, so that
/// it does not depend on which worker accepted the branch.
fn witness(sig: &Arc<Signature>, cfg: &TableauConfig, om: &Formula, len: usize) -> Result<Run, SmtError> {
    let mut session = Session::new(&cfg.solver, sig.clone())?;
    match session.check_with_model(&[om])? {
        (Verdict::Sat, Some(model)) => Ok(run_from_model(sig, &model, len)),
        (v, _) => Err(SmtError::Protocol(format!("accepted branch rechecked as {v:?}"))),
    }
}

pub fn solve(sig: &Arc<Signature>, phi: &Formula, cfg: &TableauConfig) -> Result<Solution, SolveError> {
    let started = Instant::now();
    let created = AtomicUsize::new(0);
    let worker = Worker { cfg, created: &created };
    let mut stats = Stats::default();
    let mut tree = cfg.record_tree.then(Tree::default);
    let mut total = 0usize;
    let mut layer = vec![Item { label: Label::singleton(phi.clone()), parent: None, chain: None }];
    let mut cut = false;
    let mut tainted = false;
    let mut budget = false;
    let mut sat = None;

    let pool = (cfg.workers > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build())
        .transpose()
        .map_err(|e| SmtError::Protocol(format!("worker pool: {e}")))?;
    let sessions: Mutex<Vec<Session>> = Mutex::new(Vec::new());
    let mut main_session = Session::new(&cfg.solver, sig.clone())?;

    while !layer.is_empty() && sat.is_none() && !budget {
        let parents: Vec<Option<usize>> = layer.iter().map(|i| i.parent).collect();
        let results: Vec<ItemResult> = match &pool {
            None => {
                let mut out = Vec::new();
                for item in layer.drain(..) {
                    let r = worker.process(&mut main_session, item)?;
                    let stop = r.accepted.is_some() || r.budget;
                    out.push(r);
                    if stop {
                        break;
                    }
                }
                out
            }
            Some(pool) => {
                let first_accept = AtomicUsize::new(usize::MAX);
                let items: Vec<(usize, Item)> = layer.drain(..).enumerate().collect();
                let rs: Vec<Result<Option<ItemResult>, SmtError>> = pool.install(|| {
                    items
                        .into_par_iter()
                        .map(|(idx, item)| {
                            if idx > first_accept.load(Ordering::Relaxed) {
                                return Ok(None);
                            }
                            let taken = sessions.lock().expect("session pool").pop();
                            let mut s = match taken {
                                Some(s) => s,
                                None => Session::new(&cfg.solver, sig.clone())?,
                            };
                            let r = worker.process(&mut s, item);
                            sessions.lock().expect("session pool").push(s);
                            let r = r?;
                            if r.accepted.is_some() {
                                first_accept.fetch_min(idx, Ordering::Relaxed);
                            }
                            Ok(Some(r))
                        })
                        .collect()
                });
                let mut out = Vec::new();
                for r in rs {
                    let Some(r) = r? else { break };
                    let stop = r.accepted.is_some() || r.budget;
                    out.push(r);
                    if stop {
                        break;
                    }
                }
                out
            }
        };

        let mut next_layer = Vec::new();
        for (r, root_parent) in results.into_iter().zip(parents) {
            let offset = total;
            total += r.count;
            stats.absorb(&r.stats);
            cut |= r.cut;
            tainted |= r.tainted;
            budget |= r.budget;
            if let Some(t) = tree.as_mut() {
                for (i, n) in r.nodes.into_iter().enumerate() {
                    t.nodes.push(TreeNode {
                        id: offset + i,
                        parent: n.parent.map(|p| offset + p).or(root_parent),
                        label: n.label,
                        poised_index: n.poised_index,
                        mark: n.mark,
                    });
                }
            }
            for (local, mut item) in r.next {
                item.parent = Some(offset + local);
                next_layer.push(item);
            }
            if let Some((local, om, len)) = r.accepted {
                sat = Some((offset + local, om, len));
                break;
            }
        }
        layer = next_layer;
    }

    stats.elapsed_ms = started.elapsed().as_millis();
    let outcome = if let Some((branch, om, len)) = sat {
        SolveOutcome::Sat { witness: witness(sig, cfg, &om, len)?, branch }
    } else if budget {
        SolveOutcome::Unknown(UnknownReason::Budget)
    } else if cut {
        SolveOutcome::Unknown(UnknownReason::StepBound)
    } else if tainted {
        SolveOutcome::Unknown(UnknownReason::SolverUnknown)
    } else {
        SolveOutcome::Unsat
    };
    Ok(Solution { outcome, stats, tree })
}
