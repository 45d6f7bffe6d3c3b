use std::collections::{BTreeMap, HashSet};
use std::io::{BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Arc;
use std::time::Instant;

use super::reader::formula_from_sexpr;
use super::sexpr::{SExpr, SExprReader};
use super::stats;
use crate::parser::print_smt;
use crate::semantics::{parse_value, FunDef, Structure, Value};
use crate::syntax::{negate, Formula, Signature, Sort, Var, VarKind, LAST_FLAG};

pub const DEFAULT_SOLVER: &str = "z3 -in";
pub const SOLVER_ENV: &str = "LTLFMT_SOLVER";
pub const DEFAULT_TIMEOUT_MS: u64 = 5000;
const SYNC: &str = "ltlfmt-sync";

#[derive(Debug, thiserror::Error)]
pub enum SmtError {
    #[error("cannot start solver `{0}`: {1}")]
    Spawn(String, std::io::Error),
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver terminated unexpectedly")]
    Eof,
    #[error("solver error: {0}")]
    Solver(String),
    #[error("unexpected solver response: {0}")]
    Protocol(String),
}

/// How to start a solver process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub command: Vec<String>,
    pub timeout_ms: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::resolve(None, DEFAULT_TIMEOUT_MS)
    }
}

impl SolverConfig {
    /// Explicit command first, then `LTLFMT_SOLVER`, then `z3 -in`.
    pub fn resolve(explicit: Option<&str>, timeout_ms: u64) -> Self {
        let env = std::env::var(SOLVER_ENV).ok().filter(|s| !s.trim().is_empty());
        let cmd = explicit.map(str::to_string).or(env).unwrap_or_else(|| DEFAULT_SOLVER.into());
        SolverConfig { command: cmd.split_whitespace().map(String::from).collect(), timeout_ms }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entailment {
    Yes,
    No,
    Unknown,
}

/// Values of constants plus the uninterpreted part of a solver model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub consts: BTreeMap<String, Value>,
    pub structure: Structure,
}

/// One solver child process speaking SMT-LIB 2.6 over pipes. Every query
/// runs inside its own `push`/`pop` pair; constants for indexed variables
/// are declared lazily at the outermost level and stay declared.
pub struct Session {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    out: SExprReader<BufReader<ChildStdout>>,
    sig: Arc<Signature>,
    declared: HashSet<String>,
    depth: usize,
    pub queries: u64,
}

impl Session {
    pub fn new(cfg: &SolverConfig, sig: Arc<Signature>) -> Result<Self, SmtError> {
        let name = cfg.command.join(" ");
        let (prog, args) = cfg
            .command
            .split_first()
            .ok_or_else(|| SmtError::Spawn(name.clone(), std::io::Error::other("empty command")))?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SmtError::Spawn(name.clone(), e))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let out = SExprReader::new(BufReader::new(child.stdout.take().expect("piped stdout")));
        let mut s = Session { child, stdin, out, sig, declared: HashSet::new(), depth: 0, queries: 0 };
        let mut prelude = String::new();
        prelude.push_str("(set-option :print-success false)\n");
        prelude.push_str("(set-option :produce-models true)\n");
        prelude.push_str("(set-option :random-seed 0)\n");
        if cfg.timeout_ms > 0 {
            prelude.push_str(&format!("(set-option :timeout {})\n", cfg.timeout_ms));
        }
        prelude.push_str(&format!("(set-logic {})\n", quantified_logic(&s.sig)));
        for sort in &s.sig.sorts {
            prelude.push_str(&format!("(declare-sort {sort} 0)\n"));
        }
        for (p, args) in &s.sig.predicates {
            let a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            prelude.push_str(&format!("(declare-fun {p} ({}) Bool)\n", a.join(" ")));
        }
        for (f, fs) in &s.sig.functions {
            let a: Vec<String> = fs.args.iter().map(|s| s.to_string()).collect();
            prelude.push_str(&format!("(declare-fun {f} ({}) {})\n", a.join(" "), fs.result));
        }
        for (v, sort) in &s.sig.state_vars {
            prelude.push_str(&format!("(declare-const {v} {sort})\n"));
            s.declared.insert(v.to_string());
        }
        prelude.push_str(&format!("(declare-const {LAST_FLAG} Bool)\n"));
        s.declared.insert(LAST_FLAG.to_string());
        s.run(&prelude)?;
        Ok(s)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    /// Sends commands and collects their responses up to a sync marker.
    /// Any `(error ...)` response is turned into an error after the
    /// stream has been drained.
    fn run(&mut self, cmds: &str) -> Result<Vec<SExpr>, SmtError> {
        self.stdin.write_all(cmds.as_bytes())?;
        writeln!(self.stdin, "(echo \"{SYNC}\")")?;
        self.stdin.flush()?;
        let mut out = Vec::new();
        let mut err = None;
        loop {
            let e = self.out.next_expr()?.ok_or(SmtError::Eof)?;
            match &e {
                SExpr::Atom(a) if a.trim_matches('"') == SYNC => break,
                SExpr::List(items) if items.first().is_some_and(|h| h.is_atom("error")) => {
                    let msg = items.get(1).map(|m| m.to_string()).unwrap_or_default();
                    err.get_or_insert(msg.trim_matches('"').to_string());
                }
                SExpr::Atom(a) if a == "unsupported" => {
                    err.get_or_insert_with(|| "unsupported command".into());
                }
                _ => out.push(e),
            }
        }
        match err {
            Some(m) => Err(SmtError::Solver(m)),
            None => Ok(out),
        }
    }

    fn sort_of_indexed(&self, v: &Var) -> Option<Sort> {
        self.sig.state_sort(&v.name).cloned()
    }

    /// Declares the indexed constants of `f` not declared yet.
    fn declare_for(&mut self, fs: &[&Formula]) -> Result<(), SmtError> {
        let mut cmds = String::new();
        for f in fs {
            for v in f.free_vars() {
                if !matches!(v.kind, VarKind::Indexed(_)) {
                    continue;
                }
                let name = v.smt_name();
                if self.declared.contains(&name) {
                    continue;
                }
                let sort = self
                    .sort_of_indexed(&v)
                    .ok_or_else(|| SmtError::Protocol(format!("no sort for `{name}`")))?;
                cmds.push_str(&format!("(declare-const {name} {sort})\n"));
                self.declared.insert(name);
            }
        }
        if !cmds.is_empty() {
            debug_assert_eq!(self.depth, 0);
            self.run(&cmds)?;
        }
        Ok(())
    }

    pub fn declare_indexed(&mut self, vars: &[Var]) -> Result<(), SmtError> {
        let f = Formula::and_all(vars.iter().map(|v| {
            Formula::cmp(crate::syntax::Pred::Eq, crate::syntax::Term::Var(v.clone()), crate::syntax::Term::Var(v.clone()))
        }));
        self.declare_for(&[&f])
    }

    fn scoped<T>(
        &mut self,
        body: &str,
        then: impl FnOnce(&mut Self, Vec<SExpr>) -> Result<T, SmtError>,
    ) -> Result<T, SmtError> {
        self.queries += 1;
        let started = Instant::now();
        self.depth += 1;
        let res = self.run(&format!("(push 1)\n{body}"));
        let res = res.and_then(|r| then(self, r));
        let popped = self.run("(pop 1)\n");
        self.depth -= 1;
        stats::record_query(started.elapsed());
        let out = res?;
        popped?;
        Ok(out)
    }

    fn verdict_of(&mut self, resp: &[SExpr]) -> Result<Verdict, SmtError> {
        match resp.last().and_then(SExpr::as_atom) {
            Some("sat") => Ok(Verdict::Sat),
            Some("unsat") => Ok(Verdict::Unsat),
            Some("unknown") => {
                let reason = self
                    .run("(get-info :reason-unknown)\n")
                    .ok()
                    .and_then(|r| r.last().cloned())
                    .and_then(|r| r.as_list().and_then(|l| l.get(1).cloned()))
                    .map(|r| r.to_string().trim_matches('"').to_string())
                    .unwrap_or_else(|| "unknown".into());
                stats::record_unknown();
                Ok(Verdict::Unknown(reason))
            }
            _ => Err(SmtError::Protocol(format!("{resp:?}"))),
        }
    }

    fn assert_script(fs: &[&Formula]) -> String {
        let mut s = String::new();
        for f in fs {
            s.push_str(&format!("(assert {})\n", print_smt(f)));
        }
        s
    }

    /// Satisfiability of the conjunction of `fs`.
    pub fn check(&mut self, fs: &[&Formula]) -> Result<Verdict, SmtError> {
        self.declare_for(fs)?;
        let script = Self::assert_script(fs) + "(check-sat)\n";
        self.scoped(&script, |s, r| s.verdict_of(&r))
    }

    /// Like [`Session::check`], returning a model on `sat`.
    pub fn check_with_model(
        &mut self,
        fs: &[&Formula],
    ) -> Result<(Verdict, Option<Model>), SmtError> {
        self.declare_for(fs)?;
        let script = Self::assert_script(fs) + "(check-sat)\n";
        self.scoped(&script, |s, r| {
            let v = s.verdict_of(&r)?;
            if v != Verdict::Sat {
                return Ok((v, None));
            }
            let m = s.run("(get-model)\n")?;
            let m = m.last().ok_or_else(|| SmtError::Protocol("empty model".into()))?;
            Ok((v, Some(parse_model(m)?)))
        })
    }

    /// Runs a hand-written script (declarations and assertions) and checks
    /// satisfiability, inside its own scope.
    pub fn check_script(&mut self, script: &str) -> Result<Verdict, SmtError> {
        let script = format!("{script}\n(check-sat)\n");
        self.scoped(&script, |s, r| s.verdict_of(&r))
    }

    /// `a ⊨ b`, decided as unsatisfiability of `a ∧ ¬b`.
    pub fn entails(&mut self, a: &Formula, b: &Formula) -> Result<Entailment, SmtError> {
        let nb = negate(b);
        Ok(match self.check(&[a, &nb])? {
            Verdict::Unsat => Entailment::Yes,
            Verdict::Sat => Entailment::No,
            Verdict::Unknown(_) => Entailment::Unknown,
        })
    }

    /// Quantifier elimination by the solver's `qe` tactic. Fails if the
    /// result still contains quantifiers or cannot be read back.
    pub fn qe(&mut self, f: &Formula) -> Result<Formula, SmtError> {
        self.declare_for(&[f])?;
        let script = format!("(assert {})\n(apply (then qe simplify))\n", print_smt(f));
        stats::record_qe();
        let sig = self.sig.clone();
        self.scoped(&script, move |_, r| {
            let goals = r.last().ok_or_else(|| SmtError::Protocol("no goals".into()))?;
            let goals = goals.as_list().filter(|_| goals.head() == Some("goals"));
            let goals = goals.ok_or_else(|| SmtError::Protocol(format!("{r:?}")))?;
            let mut disjuncts = Vec::new();
            for g in &goals[1..] {
                let items = g.as_list().ok_or_else(|| SmtError::Protocol(g.to_string()))?;
                let mut conj = Vec::new();
                let mut it = items[1..].iter();
                while let Some(x) = it.next() {
                    if x.as_atom().is_some_and(|a| a.starts_with(':')) {
                        it.next();
                        continue;
                    }
                    conj.push(formula_from_sexpr(&sig, x).map_err(SmtError::Protocol)?);
                }
                disjuncts.push(Formula::and_all(conj));
            }
            let out = Formula::or_all(disjuncts);
            if !out.is_quantifier_free() {
                return Err(SmtError::Protocol("quantifiers left after qe".into()));
            }
            Ok(out)
        })
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "(exit)");
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn quantified_logic(sig: &Signature) -> &'static str {
    // SMT-LIB logics without the QF_ prefix admit quantifiers, which history
    // constraints and trace checks need.
    sig.smt_logic()
}

/// Reads the response to `(get-model)`.
pub fn parse_model(m: &SExpr) -> Result<Model, SmtError> {
    let items = m.as_list().ok_or_else(|| SmtError::Protocol(m.to_string()))?;
    let items = match items.first() {
        Some(h) if h.is_atom("model") => &items[1..],
        _ => items,
    };
    let mut model = Model::default();
    for it in items {
        let Some(parts) = it.as_list() else { continue };
        match it.head() {
            Some("declare-fun") if parts.len() == 4 => {
                // Universe element `S!val!0` of sort S.
                let (Some(name), Some(sort)) = (parts[1].as_atom(), parts[3].as_atom()) else {
                    continue;
                };
                model.structure.universes.entry(sort.into()).or_default().push(name.into());
            }
            Some("define-fun") if parts.len() == 5 => {
                let name = parts[1].as_atom().ok_or_else(|| SmtError::Protocol(it.to_string()))?;
                let params = parts[2].as_list().unwrap_or(&[]);
                if params.is_empty() {
                    if let Some(v) = parse_value(&parts[4]) {
                        model.consts.insert(name.to_string(), v);
                        if name.contains('@') {
                            continue;
                        }
                    }
                }
                let params = params
                    .iter()
                    .filter_map(|p| {
                        let p = p.as_list()?;
                        Some((p.first()?.as_atom()?.to_string(), p.get(1)?.clone()))
                    })
                    .collect();
                model.structure.defs.insert(
                    name.into(),
                    FunDef { params, ret: parts[3].clone(), body: parts[4].clone() },
                );
            }
            _ => {}
        }
    }
    // Constants whose value is given by an expression over other symbols.
    let pending: Vec<String> = model
        .structure
        .defs
        .iter()
        .filter(|(_, d)| d.params.is_empty())
        .map(|(n, _)| n.to_string())
        .collect();
    for n in pending {
        if let Ok(Some(v)) = model.structure.apply(&n, &[]) {
            model.consts.insert(n, v);
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, signature_from_vars};
    use crate::syntax::{stepped, Theory};
    use num_rational::BigRational;

    fn lra() -> Arc<Signature> {
        Arc::new(signature_from_vars(Theory::Lra, &[("x", Sort::Real), ("y", Sort::Real)]))
    }

    #[test]
    fn sat_unsat_and_models() {
        let sig = lra();
        let mut s = Session::new(&SolverConfig::default(), sig.clone()).unwrap();
        let f = stepped(&parse_formula(&sig, "x > 1 & x < 2 & next(x) = x + 1").unwrap(), 0);
        let (v, m) = s.check_with_model(&[&f]).unwrap();
        assert_eq!(v, Verdict::Sat);
        let m = m.unwrap();
        let x0 = m.consts["x@0"].as_num().unwrap().clone();
        let x1 = m.consts["x@1"].as_num().unwrap().clone();
        assert_eq!(x1, &x0 + BigRational::from_integer(1.into()));
        let g = stepped(&parse_formula(&sig, "x > 1 & x < 1").unwrap(), 3);
        assert_eq!(s.check(&[&g]).unwrap(), Verdict::Unsat);
        assert!(s.queries >= 2);
    }

    #[test]
    fn entailment() {
        let sig = lra();
        let mut s = Session::new(&SolverConfig::default(), sig.clone()).unwrap();
        let a = parse_formula(&sig, "x > 2").unwrap();
        let b = parse_formula(&sig, "x > 1").unwrap();
        assert_eq!(s.entails(&a, &b).unwrap(), Entailment::Yes);
        assert_eq!(s.entails(&b, &a).unwrap(), Entailment::No);
    }

    #[test]
    fn integer_quantifier_elimination() {
        let sig = Arc::new(signature_from_vars(Theory::Lia, &[("x", Sort::Int), ("y", Sort::Int)]));
        let mut s = Session::new(&SolverConfig::default(), sig.clone()).unwrap();
        let f = parse_formula(&sig, "exists z:Int. (x < z & z < y)").unwrap();
        let g = s.qe(&f).unwrap();
        assert!(g.is_quantifier_free());
        let expect = parse_formula(&sig, "x + 1 < y").unwrap();
        assert_eq!(s.entails(&g, &expect).unwrap(), Entailment::Yes);
        assert_eq!(s.entails(&expect, &g).unwrap(), Entailment::Yes);
    }

    #[test]
    fn euf_models_carry_universes() {
        let mut sig = Signature::new(Theory::Euf);
        sig.declare_sort("S").unwrap();
        sig.declare_var("x", Sort::User("S".into())).unwrap();
        sig.declare_pred("p", vec![Sort::User("S".into())]).unwrap();
        let sig = Arc::new(sig);
        let mut s = Session::new(&SolverConfig::default(), sig.clone()).unwrap();
        let f = stepped(&parse_formula(&sig, "p(x) & !p(next(x))").unwrap(), 0);
        let (v, m) = s.check_with_model(&[&f]).unwrap();
        assert_eq!(v, Verdict::Sat);
        let m = m.unwrap();
        assert!(m.structure.elements("S").len() >= 2);
        let x0 = m.consts["x@0"].clone();
        assert_eq!(m.structure.apply("p", &[x0]).unwrap(), Some(Value::Bool(true)));
    }

    #[test]
    fn solver_errors_are_reported() {
        let sig = lra();
        let mut s = Session::new(&SolverConfig::default(), sig).unwrap();
        assert!(matches!(s.check_script("(assert (> q 0))"), Err(SmtError::Solver(_))));
        // The session survives the error.
        assert_eq!(s.check_script("(assert (> x 0))").unwrap(), Verdict::Sat);
    }

    #[test]
    fn missing_solver_is_a_spawn_error() {
        let cfg = SolverConfig { command: vec!["/nonexistent/solver".into()], timeout_ms: 10 };
        assert!(matches!(Session::new(&cfg, lra()), Err(SmtError::Spawn(..))));
    }
}
