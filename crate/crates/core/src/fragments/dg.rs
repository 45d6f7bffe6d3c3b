use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{stepped, Formula, FormulaNode, Pred, Signature, Term, Var, VarKind};

/// A node of a dependency graph: state variable `name` at instant `index`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DgNode {
    pub index: u32,
    /// Position of the variable in the signature.
    pub position: usize,
    pub name: String,
}

impl std::fmt::Display for DgNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.name, self.index)
    }
}

type Edge = (usize, usize);

fn edge(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

/// Dependency graph over `V^0 … V^n` with equality edges closed under
/// transitivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<DgNode>,
    pub eq_edges: BTreeSet<Edge>,
    pub neq_edges: BTreeSet<Edge>,
}

/// The graph with every equality class contracted to its least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapsedGraph {
    pub nodes: Vec<DgNode>,
    pub edges: BTreeSet<Edge>,
}

/// Literal occurrences of a stepped formula with the variables they mention.
/// Bound variables are renamed apart per quantifier occurrence.
struct Occurrence {
    state: BTreeSet<usize>,
    bound: BTreeSet<usize>,
    equality: bool,
}

struct Collector<'a> {
    index: &'a BTreeMap<(String, u32), usize>,
    next_bound: usize,
    out: Vec<Occurrence>,
}

impl Collector<'_> {
    fn walk(&mut self, f: &Formula, scope: &mut Vec<(Var, usize)>) {
        match f.node() {
            FormulaNode::Atom(a) | FormulaNode::NegAtom(a) => {
                let mut occ = Occurrence {
                    state: BTreeSet::new(),
                    bound: BTreeSet::new(),
                    equality: matches!(f.node(), FormulaNode::Atom(_))
                        && a.pred == Pred::Eq
                        && a.args.iter().all(|t| matches!(t, Term::Var(_))),
                };
                a.for_each_var(&mut |v| {
                    if let Some((_, id)) = scope.iter().rev().find(|(w, _)| w == v) {
                        occ.bound.insert(*id);
                    } else if let VarKind::Indexed(i) = v.kind {
                        if let Some(&n) = self.index.get(&(v.name.to_string(), i)) {
                            occ.state.insert(n);
                        }
                    }
                });
                self.out.push(occ);
            }
            FormulaNode::Exists(bs, body) | FormulaNode::Forall(bs, body) => {
                let n = scope.len();
                for b in bs {
                    scope.push((b.var.clone(), self.next_bound));
                    self.next_bound += 1;
                }
                self.walk(body, scope);
                scope.truncate(n);
            }
            FormulaNode::And(a, b) | FormulaNode::Or(a, b) => {
                self.walk(a, scope);
                self.walk(b, scope);
            }
            _ => {}
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // The smaller node index is the representative.
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Builds the dependency graph of a sequence of first-order constraints,
/// one per instant, stepped without the last-instant rewriting.
pub fn build_dg(sig: &Signature, prefix: &[Formula]) -> DependencyGraph {
    let n = prefix.len() as u32;
    let mut nodes = Vec::new();
    let mut index = BTreeMap::new();
    for i in 0..=n {
        for (pos, v) in sig.state_names().enumerate() {
            index.insert((v.to_string(), i), nodes.len());
            nodes.push(DgNode { index: i, position: pos, name: v.to_string() });
        }
    }
    let mut col = Collector { index: &index, next_bound: 0, out: Vec::new() };
    for (i, c) in prefix.iter().enumerate() {
        col.walk(&stepped(c, i as u32), &mut Vec::new());
    }
    let occs = col.out;
    let nbound = col.next_bound;

    // Bound variables linked by a common literal form one chain component.
    let mut parent: Vec<usize> = (0..nbound).collect();
    for o in &occs {
        let mut it = o.bound.iter();
        if let Some(&first) = it.next() {
            for &b in it {
                union(&mut parent, first, b);
            }
        }
    }
    let mut comp_state: BTreeMap<usize, (BTreeSet<usize>, bool)> = BTreeMap::new();
    let mut eq_edges = BTreeSet::new();
    let mut neq_edges = BTreeSet::new();
    let mut add_clique = |vs: &BTreeSet<usize>, eq: bool| {
        let vs: Vec<usize> = vs.iter().copied().collect();
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                if eq {
                    eq_edges.insert(edge(a, b));
                } else {
                    neq_edges.insert(edge(a, b));
                }
            }
        }
    };
    for o in &occs {
        match o.bound.iter().next() {
            None => add_clique(&o.state, o.equality),
            Some(&b) => {
                let root = find(&mut parent, b);
                let e = comp_state.entry(root).or_insert_with(|| (BTreeSet::new(), true));
                e.0.extend(o.state.iter().copied());
                e.1 &= o.equality;
            }
        }
    }
    for (vs, eq) in comp_state.values() {
        add_clique(vs, *eq);
    }

    // Close the equality edges transitively.
    let mut uf: Vec<usize> = (0..nodes.len()).collect();
    for &(a, b) in &eq_edges {
        union(&mut uf, a, b);
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..nodes.len() {
        classes.entry(find(&mut uf, v)).or_default().push(v);
    }
    for members in classes.values() {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                eq_edges.insert(edge(a, b));
            }
        }
    }
    DependencyGraph { nodes, eq_edges, neq_edges }
}

impl DependencyGraph {
    /// Contracts equality classes. Nodes are ordered by instant then by
    /// variable position, so the representative is the earliest member.
    pub fn collapse(&self) -> CollapsedGraph {
        let mut uf: Vec<usize> = (0..self.nodes.len()).collect();
        for &(a, b) in &self.eq_edges {
            union(&mut uf, a, b);
        }
        let reps: BTreeSet<usize> = (0..self.nodes.len()).map(|v| find(&mut uf, v)).collect();
        let pos: BTreeMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let nodes = reps.iter().map(|&r| self.nodes[r].clone()).collect();
        let mut edges = BTreeSet::new();
        for &(a, b) in &self.neq_edges {
            let (ra, rb) = (pos[&find(&mut uf, a)], pos[&find(&mut uf, b)]);
            if ra != rb {
                edges.insert(edge(ra, rb));
            }
        }
        CollapsedGraph { nodes, edges }
    }

    /// Edges as pairs of node names, for comparisons in tests and reports.
    pub fn named_edges(&self, eq: bool) -> BTreeSet<(String, String)> {
        let set = if eq { &self.eq_edges } else { &self.neq_edges };
        set.iter().map(|&(a, b)| (self.nodes[a].to_string(), self.nodes[b].to_string())).collect()
    }
}

/// Result of a longest simple path search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSearch {
    /// Node indices along the longest path found.
    pub path: Vec<usize>,
    /// Whether the search explored every simple path.
    pub exact: bool,
}

impl PathSearch {
    pub fn length(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

impl CollapsedGraph {
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges.iter().map(|&(a, b)| (self.nodes[a].to_string(), self.nodes[b].to_string())).collect()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Longest acyclic path, by depth-first search over simple paths. The
    /// search stops after `budget` extension steps and then reports the
    /// best path found so far as inexact.
    pub fn longest_path(&self, budget: usize) -> PathSearch {
        let adj = self.adjacency();
        let mut best = PathSearch { path: Vec::new(), exact: true };
        if let Some(v) = (0..self.nodes.len()).next() {
            best.path = vec![v];
        }
        let mut steps = 0usize;
        let mut on_path = vec![false; self.nodes.len()];
        let mut path = Vec::new();
        // Only nodes with an edge can start a path longer than 0.
        for start in (0..self.nodes.len()).filter(|&v| !adj[v].is_empty()) {
            on_path[start] = true;
            path.push(start);
            let ok = dfs(&adj, &mut on_path, &mut path, &mut best.path, &mut steps, budget);
            path.pop();
            on_path[start] = false;
            if !ok {
                best.exact = false;
                break;
            }
            if best.path.len() == self.nodes.len() {
                break;
            }
        }
        best
    }
}

fn dfs(
    adj: &[Vec<usize>],
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    best: &mut Vec<usize>,
    steps: &mut usize,
    budget: usize,
) -> bool {
    if path.len() > best.len() {
        best.clone_from(path);
    }
    let last = *path.last().expect("non-empty path");
    for &w in &adj[last] {
        if on_path[w] {
            continue;
        }
        *steps += 1;
        if *steps > budget {
            return false;
        }
        on_path[w] = true;
        path.push(w);
        let ok = dfs(adj, on_path, path, best, steps, budget);
        path.pop();
        on_path[w] = false;
        if !ok {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> CollapsedGraph {
        CollapsedGraph {
            nodes: (0..n).map(|i| DgNode { index: i as u32, position: 0, name: "v".into() }).collect(),
            edges: edges.iter().map(|&(a, b)| edge(a, b)).collect(),
        }
    }

    #[test]
    fn longest_path_in_a_cycle_with_tail() {
        // 0-1-2-0 triangle with tail 2-3.
        let g = graph(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let p = g.longest_path(1000);
        assert!(p.exact);
        assert_eq!(p.length(), 3);
    }

    #[test]
    fn edgeless_graph_has_length_zero() {
        let p = graph(3, &[]).longest_path(10);
        assert_eq!(p.length(), 0);
        assert!(p.exact);
    }

    #[test]
    fn budget_marks_result_inexact() {
        let edges: Vec<_> = (0..8).flat_map(|a| (a + 1..8).map(move |b| (a, b))).collect();
        let p = graph(8, &edges).longest_path(5);
        assert!(!p.exact);
    }
}
