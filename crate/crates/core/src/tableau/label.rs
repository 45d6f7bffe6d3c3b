use std::collections::BTreeSet;
use std::fmt;

use crate::parser::print_formula;
use crate::syntax::{Formula, FormulaNode};

/// The set of formulas labelling a tableau node. `⊤` is never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(BTreeSet<Formula>);

impl Label {
    pub fn new(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut l = Label::default();
        for f in items {
            l.insert(f);
        }
        l
    }

    pub fn singleton(f: Formula) -> Self {
        Label::new([f])
    }

    pub fn insert(&mut self, f: Formula) {
        if !f.is_true() {
            self.0.insert(f);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.0.contains(f)
    }

    /// Only literals, quantified formulas and tomorrow-rooted members.
    pub fn is_poised(&self) -> bool {
        !self.0.iter().any(has_rule)
    }

    /// Whether some member is rooted by a strong tomorrow.
    pub fn has_strong_tomorrow(&self) -> bool {
        self.0.iter().any(|f| matches!(f.node(), FormulaNode::Next(_)))
    }

    pub fn has_tomorrow(&self) -> bool {
        self.0.iter().any(is_tomorrow)
    }

    /// `F(π)`: the conjunction of the first-order members.
    pub fn first_order_part(&self) -> Formula {
        Formula::and_all(self.0.iter().filter(|f| f.is_first_order()).cloned())
    }

    /// The member an expansion rule is applied to: the least one in the
    /// canonical order with a rule.
    pub fn selected(&self) -> Option<&Formula> {
        self.0.iter().find(|f| has_rule(f))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(print_formula).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

fn is_tomorrow(f: &Formula) -> bool {
    matches!(f.node(), FormulaNode::Next(_) | FormulaNode::WeakNext(_))
}

/// Conjunctions and disjunctions are expanded by the rules even when they
/// are first-order; literals, quantified formulas and tomorrows are not.
fn has_rule(f: &Formula) -> bool {
    matches!(
        f.node(),
        FormulaNode::And(..) | FormulaNode::Or(..) | FormulaNode::Until(..) | FormulaNode::Release(..)
    )
}

/// Children of a non-poised node, left to right.
pub fn expand(label: &Label) -> Vec<Label> {
    let sel = label.selected().expect("expand called on a poised node").clone();
    let mut rest = label.clone();
    rest.0.remove(&sel);
    let with = |items: Vec<Formula>| {
        let mut l = rest.clone();
        for f in items {
            l.insert(f);
        }
        l
    };
    match sel.node() {
        FormulaNode::And(a, b) => vec![with(vec![a.clone(), b.clone()])],
        FormulaNode::Or(a, b) => vec![with(vec![a.clone()]), with(vec![b.clone()])],
        FormulaNode::Until(a, b) => {
            vec![with(vec![b.clone()]), with(vec![a.clone(), Formula::next(sel.clone())])]
        }
        FormulaNode::Release(a, b) => vec![
            with(vec![a.clone(), b.clone()]),
            with(vec![b.clone(), Formula::weak_next(sel.clone())]),
        ],
        _ => unreachable!("selected formulas have a rule"),
    }
}

/// The label reached by advancing time from a poised node.
pub fn step(label: &Label) -> Label {
    debug_assert!(label.is_poised());
    Label::new(label.iter().filter_map(|f| match f.node() {
        FormulaNode::Next(a) | FormulaNode::WeakNext(a) => Some(a.clone()),
        _ => None,
    }))
}

/// All poised labels reachable from `label` by expansion, in tree order.
pub fn poised_descendants(label: &Label) -> Vec<Label> {
    let mut out = Vec::new();
    let mut stack = vec![label.clone()];
    while let Some(l) = stack.pop() {
        if l.is_poised() {
            out.push(l);
        } else {
            stack.extend(expand(&l).into_iter().rev());
        }
    }
    out
}
