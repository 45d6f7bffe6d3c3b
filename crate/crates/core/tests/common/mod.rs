#![allow(dead_code)]

use std::sync::Arc;
use std::time::Instant;

use ltlfmt::parser::parse_problem;
use ltlfmt::semantics::{bounded_sat, parse_trace, print_trace, Bounded, Run, TraceChecker};
use ltlfmt::smt::{qe_mc, Entailment, Session, SolverConfig, Verdict};
use ltlfmt::syntax::{negate, Binder, Formula, Signature, Sort, Term, Var, VarKind};
use ltlfmt::tableau::{entails, history_constraints, omega, solve, SolveOutcome, TableauConfig};
use ltlfmt::Problem;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn problem(text: &str) -> Problem {
    parse_problem(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

pub fn data(name: &str) -> String {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Problems of a corpus file, separated by `---` lines.
pub fn corpus_file(name: &str) -> Vec<String> {
    data(name)
        .split("\n---")
        .map(|s| s.trim().to_string())
        .filter(|s| s.lines().any(|l| l.trim_start().starts_with("formula")))
        .collect()
}

// ---------------------------------------------------------------------------
// Generators. Each returns the text of a complete problem.

const OPS: &[&str] = &["=", "!=", "<", "<=", ">", ">="];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    Ncs,
    Fx,
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty choice")
}

fn arith_literal(rng: &mut ChaCha8Rng, vars: &[&str], cross: bool) -> String {
    let v = *pick(rng, vars);
    let w = *pick(rng, vars);
    let op = *pick(rng, OPS);
    let c: i64 = rng.gen_range(-3..=3);
    let kind = if cross { rng.gen_range(0..6) } else { rng.gen_range(0..3) };
    match kind {
        0 => format!("{v} {op} {c}"),
        1 => format!("{v} {op} {w}"),
        2 => format!("{v} - {w} {op} {c}"),
        3 => format!("next({v}) {op} {v} + {c}"),
        4 => format!("wnext({v}) {op} {c}"),
        _ => format!("next({v}) {op} {w}"),
    }
}

fn ncs_formula(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return arith_literal(rng, vars, false);
    }
    match rng.gen_range(0..10) {
        0 => format!("!({})", ncs_formula(rng, vars, depth)),
        1 => format!("({}) & ({})", ncs_formula(rng, vars, depth), ncs_formula(rng, vars, depth)),
        2 => format!("({}) | ({})", ncs_formula(rng, vars, depth), ncs_formula(rng, vars, depth)),
        3 => format!("X ({})", ncs_formula(rng, vars, depth - 1)),
        4 => format!("wX ({})", ncs_formula(rng, vars, depth - 1)),
        5 => format!("F ({})", ncs_formula(rng, vars, depth - 1)),
        6 => format!("G ({})", ncs_formula(rng, vars, depth - 1)),
        7 => format!("({}) U ({})", ncs_formula(rng, vars, depth - 1), ncs_formula(rng, vars, depth - 1)),
        8 => format!("({}) R ({})", ncs_formula(rng, vars, depth - 1), ncs_formula(rng, vars, depth - 1)),
        _ => format!("({}) & ({})", arith_literal(rng, vars, false), ncs_formula(rng, vars, depth)),
    }
}

fn fx_formula(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return arith_literal(rng, vars, true);
    }
    match rng.gen_range(0..6) {
        0 => format!("({}) & ({})", fx_formula(rng, vars, depth), fx_formula(rng, vars, depth)),
        1 => format!("({}) | ({})", fx_formula(rng, vars, depth), fx_formula(rng, vars, depth)),
        2 => format!("X ({})", fx_formula(rng, vars, depth - 1)),
        3 => format!("wX ({})", fx_formula(rng, vars, depth - 1)),
        _ => format!("F ({})", fx_formula(rng, vars, depth - 1)),
    }
}

fn header(theory: &str, vars: &[&str], sort: &str) -> String {
    let decls: Vec<String> = vars.iter().map(|v| format!("{v}:{sort}")).collect();
    format!("theory {theory}\nvars {}\n", decls.join(", "))
}

/// A random LIA formula with at most three variables, constants in
/// `[-3, 3]` and temporal depth at most three.
pub fn lia_problem(rng: &mut ChaCha8Rng, fragment: Fragment) -> String {
    let all = ["x", "y", "z"];
    let vars = &all[..rng.gen_range(1..=3)];
    let depth = rng.gen_range(1..=3);
    let body = match fragment {
        Fragment::Ncs => ncs_formula(rng, vars, depth),
        Fragment::Fx => fx_formula(rng, vars, depth),
    };
    format!("{}formula {body}\n", header("LIA", vars, "Int"))
}

const MC_ITER: &[&str] = &[
    "next(x) > x",
    "next(x) >= x",
    "next(y) < y",
    "next(x) <= y",
    "wnext(y) = x",
    "x < 2",
    "y >= -1",
    "next(y) != y",
    "wnext(x) > 1",
];

const LINEAR: &[&str] = &["x + y > 3", "x - y = 1", "2*x < y", "x + y <= -2", "x = 3", "y > x", "x - 2*y >= 0"];

fn mc_conj(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=2);
    (0..n).map(|_| pick(rng, MC_ITER).to_string()).collect::<Vec<_>>().join(" & ")
}

fn free_part(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.4) {
        return if rng.gen_bool(0.5) { pick(rng, LINEAR).to_string() } else { pick(rng, MC_ITER).to_string() };
    }
    match rng.gen_range(0..5) {
        0 => format!("({}) & ({})", free_part(rng, depth - 1), free_part(rng, depth - 1)),
        1 => format!("({}) | ({})", free_part(rng, depth - 1), free_part(rng, depth - 1)),
        2 => format!("X ({})", free_part(rng, depth - 1)),
        3 => format!("F ({})", free_part(rng, depth - 1)),
        _ => format!("wX ({})", free_part(rng, depth - 1)),
    }
}

/// An LRA formula whose iteration conditions are monotonicity constraints
/// while other literals may be arbitrary linear constraints.
pub fn quasi_mc_problem(rng: &mut ChaCha8Rng) -> String {
    let parts = rng.gen_range(1..=3);
    let mut conj = Vec::new();
    for _ in 0..parts {
        conj.push(match rng.gen_range(0..4) {
            0 => format!("({}) U ({})", mc_conj(rng), free_part(rng, 1)),
            1 => format!("G ({})", mc_conj(rng)),
            2 => format!("F ({})", free_part(rng, 2)),
            _ => format!("({}) R ({})", free_part(rng, 1), mc_conj(rng)),
        });
    }
    format!("{}formula {}\n", header("LRA", &["x", "y"], "Real"), conj.join(" & "))
}

pub fn lra_problem(rng: &mut ChaCha8Rng) -> String {
    let vars = ["x", "y"];
    let depth = rng.gen_range(1..=3);
    let body = if rng.gen_bool(0.5) { ncs_formula(rng, &vars, depth) } else { fx_formula(rng, &vars, depth) };
    format!("{}formula {body}\n", header("LRA", &vars, "Real"))
}

const EUF_LITS: &[&str] = &[
    "p(a)",
    "!p(a)",
    "p(b)",
    "q(a)",
    "!q(b)",
    "a = b",
    "a != b",
    "f(a) = b",
    "f(b) != a",
    "p(f(a))",
    "next(a) = b",
    "p(next(a))",
    "next(b) != f(a)",
    "wnext(a) = a",
];

fn euf_formula(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.35) {
        return pick(rng, EUF_LITS).to_string();
    }
    match rng.gen_range(0..8) {
        0 => format!("({}) & ({})", euf_formula(rng, depth), euf_formula(rng, depth - 1)),
        1 => format!("({}) | ({})", euf_formula(rng, depth - 1), euf_formula(rng, depth - 1)),
        2 => format!("X ({})", euf_formula(rng, depth - 1)),
        3 => format!("wX ({})", euf_formula(rng, depth - 1)),
        4 => format!("F ({})", euf_formula(rng, depth - 1)),
        5 => format!("G ({})", euf_formula(rng, depth - 1)),
        6 => format!("({}) U ({})", euf_formula(rng, depth - 1), euf_formula(rng, depth - 1)),
        _ => format!("!({})", euf_formula(rng, depth - 1)),
    }
}

pub fn euf_problem(rng: &mut ChaCha8Rng) -> String {
    let depth = rng.gen_range(1..=3);
    format!(
        "theory EUF\nsort S\nvars a:S, b:S\npred p(S)\npred q(S)\nfun f(S): S\nformula {}\n",
        euf_formula(rng, depth)
    )
}

/// A quantifier-free formula of monotonicity constraints over `vars`.
pub fn mc_body(rng: &mut ChaCha8Rng, vars: &[&str], literals: usize) -> String {
    let lit = |rng: &mut ChaCha8Rng| {
        let v = *pick(rng, vars);
        let op = *pick(rng, OPS);
        if rng.gen_bool(0.6) {
            format!("{v} {op} {}", *pick(rng, vars))
        } else {
            let num: i64 = rng.gen_range(-6..=6);
            format!("{v} {op} {}", if num % 2 == 0 { (num / 2).to_string() } else { format!("{}.5", num / 2) })
        }
    };
    let mut parts: Vec<String> = (0..literals).map(|_| lit(rng)).collect();
    while parts.len() > 1 {
        let i = rng.gen_range(0..parts.len() - 1);
        let a = parts.remove(i);
        let b = parts.remove(i);
        let op = if rng.gen_bool(0.65) { "&" } else { "|" };
        parts.insert(i, format!("({a}) {op} ({b})"));
    }
    parts.pop().unwrap_or_else(|| "true".into())
}

// ---------------------------------------------------------------------------
// Suites shared by the acceptance target and the differential tests.

pub struct Report {
    pub pass: bool,
    pub summary: String,
    pub failures: Vec<String>,
}

impl Report {
    fn new(failures: Vec<String>, summary: String) -> Self {
        Report { pass: failures.is_empty(), summary, failures }
    }
}

pub fn solver() -> SolverConfig {
    SolverConfig::default()
}

/// Checks a witness directly and after a round trip through the trace
/// file format.
pub fn witness_holds(p: &Problem, run: &Run) -> Result<(), String> {
    let sig = Arc::new(p.signature.clone());
    let mut checker = TraceChecker::new(sig.clone(), solver());
    match checker.holds(run, 0, &p.formula) {
        Ok(true) => {}
        Ok(false) => return Err(format!("witness fails:\n{}", print_trace(run))),
        Err(e) => return Err(format!("witness check error {e}")),
    }
    let text = print_trace(run);
    let back = parse_trace(&p.signature, &text).map_err(|e| format!("trace round trip: {e}\n{text}"))?;
    match checker.holds(&back, 0, &p.formula) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("re-read witness fails:\n{text}")),
        Err(e) => Err(format!("re-read witness check error {e}")),
    }
}

#[derive(Clone, Debug)]
pub struct Judged {
    pub text: String,
    pub outcome: Result<SolveOutcome, String>,
    /// Shortest bounded model length, if any up to the sweep bound.
    pub bounded: Option<usize>,
    pub bounded_inconclusive: bool,
    pub witness: Option<Result<(), String>>,
    pub millis: u128,
}

pub fn judge(text: &str, sweep: usize, cfg: &TableauConfig) -> Judged {
    let p = problem(text);
    let sig = Arc::new(p.signature.clone());
    let start = Instant::now();
    let outcome = solve(&sig, &p.formula, cfg).map(|s| s.outcome).map_err(|e| e.to_string());
    let millis = start.elapsed().as_millis();
    let witness = match &outcome {
        Ok(SolveOutcome::Sat { witness, .. }) => Some(witness_holds(&p, witness)),
        _ => None,
    };
    let mut bounded = None;
    let mut bounded_inconclusive = false;
    for n in 1..=sweep {
        match bounded_sat(&sig, &p.formula, n, &solver()) {
            Ok(Bounded::Sat(_)) => {
                bounded = Some(n);
                break;
            }
            Ok(Bounded::UnsatAtLength) => {}
            Ok(Bounded::Inconclusive(_)) | Err(_) => bounded_inconclusive = true,
        }
    }
    Judged { text: text.to_string(), outcome, bounded, bounded_inconclusive, witness, millis }
}

pub fn judge_all(texts: &[String], sweep: usize, cfg: &TableauConfig) -> Vec<Judged> {
    texts.par_iter().map(|t| judge(t, sweep, cfg)).collect()
}

fn verdict_name(o: &Result<SolveOutcome, String>) -> String {
    match o {
        Ok(SolveOutcome::Sat { .. }) => "SAT".into(),
        Ok(SolveOutcome::Unsat) => "UNSAT".into(),
        Ok(SolveOutcome::Unknown(r)) => format!("UNKNOWN ({r})"),
        Err(e) => format!("error: {e}"),
    }
}

/// Tableau versus bounded unrolling, plus witness validity.
pub fn oracle_agreement(judged: &[Judged]) -> Report {
    let mut failures = Vec::new();
    let (mut sat, mut unsat) = (0, 0);
    for j in judged {
        match (&j.outcome, j.bounded) {
            (Ok(SolveOutcome::Sat { .. }), _) => sat += 1,
            (Ok(SolveOutcome::Unsat), None) => unsat += 1,
            (o, b) => {
                if b.is_some() || !matches!(o, Ok(SolveOutcome::Unsat)) {
                    failures.push(format!(
                        "tableau {} but bounded model of length {:?}\n{}",
                        verdict_name(o),
                        b,
                        j.text
                    ));
                }
            }
        }
        if let Some(Err(e)) = &j.witness {
            failures.push(format!("{e}\n{}", j.text));
        }
    }
    let n = judged.len();
    Report::new(failures, format!("{n} formulas, {sat} SAT, {unsat} UNSAT"))
}

pub fn termination(judged: &[Judged]) -> Report {
    let failures: Vec<String> = judged
        .iter()
        .filter(|j| !matches!(j.outcome, Ok(SolveOutcome::Sat { .. } | SolveOutcome::Unsat)))
        .map(|j| format!("{}\n{}", verdict_name(&j.outcome), j.text))
        .collect();
    let slowest = judged.iter().map(|j| j.millis).max().unwrap_or(0);
    Report::new(failures, format!("{} formulas, slowest {slowest} ms", judged.len()))
}

/// Every formula found UNSAT with pruning stays non-SAT without pruning.
pub fn prune_safety(judged: &[Judged], max_steps: usize) -> Report {
    let unsat: Vec<&Judged> = judged.iter().filter(|j| matches!(j.outcome, Ok(SolveOutcome::Unsat))).collect();
    let cfg = TableauConfig { prune: false, max_steps, ..TableauConfig::default() };
    let failures: Vec<String> = unsat
        .par_iter()
        .filter_map(|j| {
            let p = problem(&j.text);
            let sig = Arc::new(p.signature.clone());
            match solve(&sig, &p.formula, &cfg) {
                Ok(s) => match s.outcome {
                    SolveOutcome::Sat { .. } => Some(format!("SAT without pruning\n{}", j.text)),
                    _ => None,
                },
                Err(e) => Some(format!("error {e}\n{}", j.text)),
            }
        })
        .collect();
    Report::new(failures, format!("{} UNSAT formulas rechecked", unsat.len()))
}

pub fn witness_soundness(judged: &[Judged]) -> Report {
    let mut failures = Vec::new();
    let mut sat = 0;
    for j in judged {
        match (&j.outcome, &j.witness) {
            (Ok(SolveOutcome::Sat { .. }), Some(Ok(()))) => sat += 1,
            (Ok(SolveOutcome::Sat { .. }), Some(Err(e))) => failures.push(format!("{e}\n{}", j.text)),
            (o, _) => failures.push(format!("expected SAT, got {}\n{}", verdict_name(o), j.text)),
        }
    }
    Report::new(failures, format!("{sat}/{} witnesses validated", judged.len()))
}

/// Generates satisfiable problems across the three theories.
pub fn satisfiable_corpus(seed: u64, per_theory: usize) -> Vec<String> {
    let mut rng = rng(seed);
    let cfg = TableauConfig::default();
    let mut out = Vec::new();
    let gens: [fn(&mut ChaCha8Rng) -> String; 3] =
        [lra_problem, |r| lia_problem(r, Fragment::Ncs), euf_problem];
    for g in gens {
        let mut found = 0;
        for _ in 0..per_theory * 20 {
            if found == per_theory {
                break;
            }
            let text = g(&mut rng);
            let p = problem(&text);
            let sig = Arc::new(p.signature.clone());
            if let Ok(s) = solve(&sig, &p.formula, &cfg) {
                if matches!(s.outcome, SolveOutcome::Sat { .. }) {
                    out.push(text);
                    found += 1;
                }
            }
        }
    }
    out
}

fn lra_vars_sig(names: &[&str]) -> Arc<Signature> {
    let vars: Vec<(&str, Sort)> = names.iter().map(|n| (*n, Sort::Real)).collect();
    Arc::new(ltlfmt::parser::signature_from_vars(ltlfmt::Theory::Lra, &vars))
}

/// `qe_mc` against the solver's elimination on random MC formulas.
pub fn qe_agreement(seed: u64, count: usize) -> Report {
    let all = ["a", "b", "c", "d"];
    let mut rng = rng(seed);
    let cases: Vec<(usize, usize, u64)> =
        (0..count).map(|_| (rng.gen_range(1..=4), rng.gen_range(1..=6), rng.gen())).collect();
    let failures: Vec<String> = cases
        .par_iter()
        .filter_map(|&(nv, nl, s)| {
            let mut rng = self::rng(s);
            let names = &all[..nv];
            let sig = lra_vars_sig(names);
            let body_src = mc_body(&mut rng, names, nl);
            let body = ltlfmt::parser::parse_formula(&sig, &body_src).ok()?;
            let body = ltlfmt::syntax::stepped(&body, 0);
            let k = rng.gen_range(1..=nv);
            let mut chosen: Vec<&str> = names.to_vec();
            chosen.shuffle(&mut rng);
            chosen.truncate(k);
            let vars: Vec<Var> = chosen.iter().map(|n| Var::indexed(*n, 0)).collect();
            let fail = |m: String| Some(format!("{m}\n  body: {body_src}\n  eliminate: {chosen:?}"));
            let ours = match qe_mc(&body, &vars) {
                Ok(f) => f,
                Err(e) => return fail(format!("qe_mc error {e}")),
            };
            if ours.free_vars().iter().any(|v| vars.contains(v)) {
                return fail(format!("eliminated variable left in {}", ltlfmt::print_formula(&ours)));
            }
            let mut session = match Session::new(&solver(), sig.clone()) {
                Ok(s) => s,
                Err(e) => return fail(e.to_string()),
            };
            let binders = vars.iter().map(|v| Binder::new(v.clone(), Sort::Real)).collect();
            let theirs = match session.qe(&Formula::exists(binders, body.clone())) {
                Ok(f) => f,
                Err(e) => return fail(format!("solver qe error {e}")),
            };
            for (a, b) in [(&ours, &theirs), (&theirs, &ours)] {
                match session.entails(a, b) {
                    Ok(Entailment::Yes) => {}
                    r => {
                        return fail(format!(
                            "{} does not entail {} ({r:?})",
                            ltlfmt::print_smt(a),
                            ltlfmt::print_smt(b)
                        ))
                    }
                }
            }
            None
        })
        .collect();
    Report::new(failures, format!("{count} formulas, two entailments each"))
}

const SEGMENT_POOL: &[&str] = &[
    "next(x) > x",
    "next(x) >= x & y = 1",
    "next(y) = y & x < 3",
    "x < y & next(x) = x",
    "wnext(x) <= x",
    "next(x) = y & next(y) = x",
    "x >= 0 & next(y) > y",
    "x > y | next(x) < x",
];

/// Constraints without a strong tomorrow, which may end a sequence.
const FINAL_POOL: &[&str] = &["x = y", "x > 0", "wnext(x) <= x & y < 2", "true"];

fn random_sequence(rng: &mut ChaCha8Rng, sig: &Signature, pool: usize) -> Vec<Formula> {
    let n = rng.gen_range(2..=6);
    let pool = &SEGMENT_POOL[..pool];
    let parse = |s: &str| ltlfmt::parser::parse_formula(sig, s).expect("pool formula");
    let mut cs: Vec<Formula> = (0..n).map(|_| parse(pick(rng, pool))).collect();
    cs.push(parse(pick(rng, FINAL_POOL)));
    cs
}

fn last_state(h: &Formula, m: u32) -> Formula {
    h.substitute(&mut |v| match v.kind {
        VarKind::State => Some(Term::Var(Var::indexed(v.name.clone(), m))),
        _ => None,
    })
}

fn sat_not_last(session: &mut Session, cs: &[Formula]) -> Result<bool, String> {
    let f = Formula::and(omega(cs), negate(&Formula::last()));
    match session.check(&[&f]).map_err(|e| e.to_string())? {
        Verdict::Sat => Ok(true),
        Verdict::Unsat => Ok(false),
        Verdict::Unknown(r) => Err(format!("unknown: {r}")),
    }
}

/// Deleting a segment between two equal constraints whose histories are
/// ordered by entailment preserves satisfiability of `Ω ∧ ¬ℓ`.
pub fn redundant_segments(seed: u64, wanted: usize) -> Report {
    let sig = lra_vars_sig(&["x", "y"]);
    let mut rng = rng(seed);
    let mut session = Session::new(&solver(), sig.clone()).expect("solver");
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut segments = 0;
    let mut tried = 0;
    while checked < wanted && tried < wanted * 200 {
        tried += 1;
        let cs = random_sequence(&mut rng, &sig, 4);
        let pairs: Vec<(usize, usize)> = (0..cs.len())
            .flat_map(|j| (j + 1..cs.len()).map(move |k| (j, k)))
            .filter(|&(j, k)| cs[j] == cs[k])
            .collect();
        if pairs.is_empty() {
            continue;
        }
        match sat_not_last(&mut session, &cs) {
            Ok(true) => {}
            Ok(false) => continue,
            Err(e) => {
                failures.push(e);
                continue;
            }
        }
        let hs = history_constraints(&mut session, &cs).expect("history");
        let mut qualified = false;
        for (j, k) in pairs {
            if entails(&mut session, &hs[k], &hs[j]).expect("entails") != Entailment::Yes {
                continue;
            }
            qualified = true;
            segments += 1;
            let shorter: Vec<Formula> = cs[..=j].iter().chain(&cs[k + 1..]).cloned().collect();
            match sat_not_last(&mut session, &shorter) {
                Ok(true) => {}
                other => {
                    let seq: Vec<String> = cs.iter().map(ltlfmt::print_formula).collect();
                    failures.push(format!("segment ({j}, {k}] of {seq:?}: {other:?}"));
                }
            }
        }
        checked += usize::from(qualified);
    }
    if checked < wanted {
        failures.push(format!("only {checked} sequences with redundant segments in {tried} tries"));
    }
    Report::new(failures, format!("{checked} sequences, {segments} redundant segments deleted"))
}

/// Both directions of the correspondence between histories and
/// satisfying assignment sequences.
pub fn history_characterisation(seed: u64, count: usize) -> Report {
    let sig = lra_vars_sig(&["x", "y"]);
    let mut rng = rng(seed);
    let mut session = Session::new(&solver(), sig.clone()).expect("solver");
    let mut failures = Vec::new();
    for _ in 0..count {
        let cs = random_sequence(&mut rng, &sig, SEGMENT_POOL.len());
        let m = cs.len() as u32;
        let hs = history_constraints(&mut session, &cs).expect("history");
        let h = last_state(hs.last().expect("non-empty"), m);
        let om = omega(&cs);
        let seq: Vec<String> = cs.iter().map(ltlfmt::print_formula).collect();
        if session.entails(&om, &h).expect("entails") != Entailment::Yes {
            failures.push(format!("Ω does not entail h for {seq:?}"));
        }
        let binders: Vec<Binder> = (0..m)
            .flat_map(|i| sig.state_vars.iter().map(move |(v, s)| Binder::new(Var::indexed(v.clone(), i), s.clone())))
            .collect();
        let projected = match session.qe(&Formula::exists(binders, om)) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("solver qe failed on ∃Ω for {seq:?}: {e}"));
                continue;
            }
        };
        if session.entails(&h, &projected).expect("entails") != Entailment::Yes {
            failures.push(format!("h does not entail ∃Ω for {seq:?}"));
        }
    }
    Report::new(failures, format!("{count} sequences, both directions"))
}
