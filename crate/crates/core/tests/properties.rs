mod common;

use std::sync::Arc;

use ltlfmt::fragments::{check_k_bl, classify, BlDecision, CollapsedGraph, DgNode};
use ltlfmt::parser::{parse_extended, parse_formula, parse_problem, print_formula};
use ltlfmt::semantics::{atom_holds, bounded_sat, parse_trace, Bounded, Environment, Run, TraceChecker};
use ltlfmt::smt::{Entailment, Session};
use ltlfmt::syntax::{
    closure, l_rewrite, negate, stepped, subformulas, to_nnf, Atom, Extended, Formula, Signature, VarKind,
};
use proptest::prelude::*;

const LRA_HEADER: &str = "theory LRA\nvars x:Real, y:Real\n";
const EUF_HEADER: &str = "theory EUF\nsort S\nvars a:S, b:S\npred p(S)\n";

const LRA_ATOMS: &[&str] = &[
    "x > 0", "y <= x", "x = y", "x + y < 2", "2*x >= y - 1", "x != 3", "next(x) > x", "wnext(y) <= y + 1",
    "next(y) = x",
];
const NCS_ATOMS: &[&str] = &["x > 0", "y <= x", "x = y", "x + y < 2", "2*x >= y - 1", "x != 3", "y < -1"];
const EUF_ATOMS: &[&str] = &["a = b", "p(a)", "p(b)", "p(next(a))", "p(wnext(b))", "next(a) = b", "a = wnext(b)"];

fn sig_of(header: &str) -> Arc<Signature> {
    Arc::new(parse_problem(&format!("{header}formula true")).unwrap().signature)
}

/// Surface formulas over `atoms` with every temporal and boolean operator.
fn surface(atoms: &'static [&'static str]) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        8 => proptest::sample::select(atoms).prop_map(str::to_string),
        1 => Just("true".to_string()),
        1 => Just("false".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("!({a})")),
            inner.clone().prop_map(|a| format!("X ({a})")),
            inner.clone().prop_map(|a| format!("wX ({a})")),
            inner.clone().prop_map(|a| format!("F ({a})")),
            inner.clone().prop_map(|a| format!("G ({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) & ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) | ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) -> ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) U ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) R ({b})")),
        ]
    })
}

/// Direct evaluation of a surface formula, independent of normalisation.
fn eval(run: &Run, i: usize, e: &Extended) -> bool {
    let n = run.len();
    let env = Environment::new();
    match e {
        Extended::True => true,
        Extended::False => false,
        Extended::Atom(a) => atom_holds(run, i, &env, a).unwrap(),
        Extended::Not(a) => !eval(run, i, a),
        Extended::And(a, b) => eval(run, i, a) && eval(run, i, b),
        Extended::Or(a, b) => eval(run, i, a) || eval(run, i, b),
        Extended::Implies(a, b) => !eval(run, i, a) || eval(run, i, b),
        Extended::Next(a) => i + 1 < n && eval(run, i + 1, a),
        Extended::WeakNext(a) => i + 1 == n || eval(run, i + 1, a),
        Extended::Until(a, b) => (i..n).any(|j| eval(run, j, b) && (i..j).all(|k| eval(run, k, a))),
        Extended::Release(a, b) => (i..n).all(|j| eval(run, j, b) || (i..j).any(|k| eval(run, k, a))),
        Extended::Finally(a) => (i..n).any(|j| eval(run, j, a)),
        Extended::Globally(a) => (i..n).all(|j| eval(run, j, a)),
        Extended::Exists(..) | Extended::Forall(..) => unreachable!("generators are quantifier free"),
    }
}

/// A run over a two-element universe: `p` is given by the subset `p_set`,
/// states by pairs of element indices.
fn euf_run(sig: &Signature, p_set: u8, states: &[(u8, u8)]) -> Run {
    let body = match p_set & 3 {
        0 => "false",
        1 => "(= z e0)",
        2 => "(= z e1)",
        _ => "true",
    };
    let mut text = format!("sort S = e0 e1\ndefine p ((z S)) Bool {body}\n");
    for (a, b) in states {
        text.push_str(&format!("a=e{} b=e{}\n", a & 1, b & 1));
    }
    parse_trace(sig, &text).unwrap()
}

fn euf_states() -> impl Strategy<Value = Vec<(u8, u8)>> {
    proptest::collection::vec((0u8..2, 0u8..2), 1..=4)
}

fn fresh_checker(sig: &Arc<Signature>) -> TraceChecker {
    TraceChecker::new(sig.clone(), common::solver())
}

fn collapsed(n: usize, edges: &[(usize, usize)]) -> CollapsedGraph {
    CollapsedGraph {
        nodes: (0..n).map(|i| DgNode { index: i as u32, position: 0, name: "v".into() }).collect(),
        edges: edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect(),
    }
}

/// Longest simple path by dynamic programming over vertex subsets.
fn longest_path_dp(n: usize, g: &CollapsedGraph) -> usize {
    let mut adj = vec![0u32; n];
    for &(a, b) in &g.edges {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    let mut reach = vec![0u32; 1 << n];
    let mut best = 0;
    for v in 0..n {
        reach[1 << v] |= 1 << v;
    }
    for mask in 1usize..(1 << n) {
        let ends = reach[mask];
        if ends == 0 {
            continue;
        }
        best = best.max(mask.count_ones() as usize - 1);
        for (v, &nbrs) in adj.iter().enumerate() {
            if ends & (1 << v) == 0 {
                continue;
            }
            let mut next = nbrs & !(mask as u32);
            while next != 0 {
                let w = next.trailing_zeros() as usize;
                next &= next - 1;
                reach[mask | (1 << w)] |= 1 << w;
            }
        }
    }
    best
}

fn swap_xy(text: &str) -> String {
    text.replace("next", "@").replace('x', "#").replace('y', "x").replace('#', "y").replace('@', "next")
}

fn only_steps(phi: &Formula, i: u32) -> bool {
    let mut ok = true;
    phi.for_each_atom(&mut |a: &Atom, _| {
        a.for_each_var(&mut |v| ok &= matches!(v.kind, VarKind::Indexed(j) if j == i || j == i + 1));
    });
    ok
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_the_identity(text in surface(LRA_ATOMS)) {
        let sig = sig_of(LRA_HEADER);
        let f = parse_formula(&sig, &text).unwrap();
        let printed = print_formula(&f);
        prop_assert_eq!(parse_formula(&sig, &printed).unwrap(), f, "{}", printed);
    }

    #[test]
    fn normal_form_is_a_fixpoint(text in surface(LRA_ATOMS)) {
        let sig = sig_of(LRA_HEADER);
        let f = parse_formula(&sig, &text).unwrap();
        prop_assert_eq!(to_nnf(&Extended::from(&f)), f.clone());
        prop_assert_eq!(negate(&negate(&f)), f);
    }

    #[test]
    fn closure_is_at_most_twice_the_subformulas(text in surface(LRA_ATOMS)) {
        let sig = sig_of(LRA_HEADER);
        let f = parse_formula(&sig, &text).unwrap();
        let subs = subformulas(&f);
        let cl = closure(&f);
        prop_assert!(subs.is_subset(&cl));
        prop_assert!(cl.len() <= 2 * subs.len());
    }

    #[test]
    fn stepping_moves_variables_to_adjacent_instants(text in surface(LRA_ATOMS), i in 0u32..5) {
        let sig = sig_of(LRA_HEADER);
        let f = parse_formula(&sig, &text).unwrap();
        for lit in f.literals() {
            let s = stepped(&lit, i);
            prop_assert!(only_steps(&s, i), "{}", print_formula(&s));
            prop_assert_eq!(stepped(&lit, i) == stepped(&lit, i + 1), lit.free_vars().is_empty());
        }
    }

    #[test]
    fn rewrite_leaves_state_local_formulas_alone(text in surface(NCS_ATOMS)) {
        let sig = sig_of(LRA_HEADER);
        let f = parse_formula(&sig, &text).unwrap();
        prop_assert_eq!(l_rewrite(&f), f);
    }

    #[test]
    fn normalisation_preserves_truth(text in surface(EUF_ATOMS), p_set in 0u8..4, states in euf_states()) {
        let sig = sig_of(EUF_HEADER);
        let e = parse_extended(&sig, &text).unwrap();
        let run = euf_run(&sig, p_set, &states);
        let mut checker = fresh_checker(&sig);
        let nnf = to_nnf(&e);
        let direct = eval(&run, 0, &e);
        prop_assert_eq!(checker.holds(&run, 0, &nnf).unwrap(), direct, "{}", print_formula(&nnf));
        prop_assert_eq!(checker.holds(&run, 0, &negate(&nnf)).unwrap(), !direct);
        prop_assert_eq!(to_nnf(&Extended::not(e)), negate(&nnf));
    }

    #[test]
    fn classification_ignores_variable_names(text in surface(LRA_ATOMS)) {
        let sig = sig_of(LRA_HEADER);
        let a = classify(&sig, &parse_formula(&sig, &text).unwrap());
        let b = classify(&sig, &parse_formula(&sig, &swap_xy(&text)).unwrap());
        prop_assert_eq!(
            (a.ncs, a.fx, a.quasi_mc, a.quasi_ipc, a.mc),
            (b.ncs, b.fx, b.quasi_mc, b.quasi_ipc, b.mc)
        );
    }

    #[test]
    fn path_search_finds_the_longest_simple_path(
        n in 1usize..=9,
        raw in proptest::collection::vec((0usize..9, 0usize..9), 0..20),
    ) {
        let edges: Vec<(usize, usize)> = raw.into_iter().filter(|&(a, b)| a < n && b < n).collect();
        let g = collapsed(n, &edges);
        let found = g.longest_path(1_000_000);
        prop_assert!(found.exact);
        prop_assert_eq!(found.length(), longest_path_dp(n, &g));
        for w in found.path.windows(2) {
            prop_assert!(g.edges.contains(&(w[0].min(w[1]), w[0].max(w[1]))));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounded_models_satisfy_the_formula(text in surface(LRA_ATOMS), len in 1usize..=3) {
        let sig = sig_of(LRA_HEADER);
        let f = parse_formula(&sig, &text).unwrap();
        if let Bounded::Sat(run) = bounded_sat(&sig, &f, len, &common::solver()).unwrap() {
            prop_assert_eq!(run.len(), len);
            prop_assert!(fresh_checker(&sig).holds(&run, 0, &f).unwrap());
        }
    }

    #[test]
    fn entailment_is_reflexive(text in surface(NCS_ATOMS)) {
        let sig = sig_of(LRA_HEADER);
        let f = stepped(&parse_formula(&sig, &text).unwrap(), 0);
        if f.is_first_order() {
            let mut s = Session::new(&common::solver(), sig.clone()).unwrap();
            prop_assert_eq!(s.entails(&f, &f).unwrap(), Entailment::Yes);
        }
    }

    #[test]
    fn state_local_formulas_have_bounded_lookback(text in surface(NCS_ATOMS)) {
        let sig = sig_of(LRA_HEADER);
        let f = parse_formula(&sig, &text).unwrap();
        let k = sig.state_names().count();
        let d = check_k_bl(&sig, &f, k, &common::solver()).unwrap();
        prop_assert!(matches!(d, BlDecision::HasKbl(_) | BlDecision::NotChecked(_)), "{}", d);
    }
}

#[test]
fn dp_oracle_on_a_path_and_a_triangle() {
    assert_eq!(longest_path_dp(4, &collapsed(4, &[(0, 1), (1, 2), (2, 3)])), 3);
    assert_eq!(longest_path_dp(3, &collapsed(3, &[(0, 1), (1, 2), (0, 2)])), 2);
}
