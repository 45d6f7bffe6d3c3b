//! Trace files.
//!
//! ```text
//! # one line per instant
//! sort S = S!val!0 S!val!1
//! define p ((x!0 S)) Bool (= x!0 S!val!0)
//! x=-1 y=0
//! x=0 y=1/2
//! ```

use std::collections::BTreeMap;

use super::structure::{parse_value, FunDef, Structure, Value};
use super::{complete_structure, Run};
use crate::smt::{parse_all, SExpr};
use crate::syntax::{Name, Signature, Sort};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

pub fn print_trace(run: &Run) -> String {
    let mut out = String::new();
    for (sort, elems) in &run.structure.universes {
        let names: Vec<&str> = elems.iter().map(|e| &**e).collect();
        out.push_str(&format!("sort {sort} = {}\n", names.join(" ")));
    }
    for (name, d) in &run.structure.defs {
        let params: Vec<String> = d.params.iter().map(|(p, s)| format!("({p} {s})")).collect();
        out.push_str(&format!("define {name} ({}) {} {}\n", params.join(" "), d.ret, d.body));
    }
    for st in &run.states {
        let parts: Vec<String> = st.iter().map(|(v, val)| format!("{v}={val}")).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

fn value_fits(sig: &Signature, sort: &Sort, v: &Value) -> bool {
    match (sort, v) {
        (Sort::Real, Value::Num(_)) => true,
        (Sort::Int, Value::Num(q)) => q.is_integer(),
        (Sort::User(_), Value::Elem(_)) => sig.theory == crate::syntax::Theory::Euf,
        _ => false,
    }
}

/// Reads a trace for the state variables of `sig`. Every instant must
/// assign every state variable.
pub fn parse_trace(sig: &Signature, text: &str) -> Result<Run, TraceError> {
    let mut structure = Structure::default();
    let mut states = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let err = |m: String| TraceError { line: line_no, message: m };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("sort ") {
            let (name, elems) = rest.split_once('=').ok_or_else(|| err("expected `sort S = e …`".into()))?;
            let name = name.trim();
            if !sig.sorts.contains(name) {
                return Err(err(format!("unknown sort `{name}`")));
            }
            structure
                .universes
                .insert(name.into(), elems.split_whitespace().map(Into::into).collect());
            continue;
        }
        if let Some(rest) = line.strip_prefix("define ") {
            let (name, rest) = rest.trim().split_once(char::is_whitespace).ok_or_else(|| err("incomplete definition".into()))?;
            let parts = parse_all(rest).map_err(|e| err(e.to_string()))?;
            let [params, ret, body] = parts.as_slice() else {
                return Err(err("expected `define NAME (PARAMS) SORT BODY`".into()));
            };
            let params = params
                .as_list()
                .ok_or_else(|| err("parameters must be a list".into()))?
                .iter()
                .map(|p| match p.as_list() {
                    Some([SExpr::Atom(n), s]) => Ok((n.clone(), s.clone())),
                    _ => Err(err(format!("bad parameter {p}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if !sig.predicates.contains_key(name) && !sig.functions.contains_key(name) && !name.contains('!') {
                return Err(err(format!("unknown symbol `{name}`")));
            }
            structure
                .defs
                .insert(name.into(), FunDef { params, ret: ret.clone(), body: body.clone() });
            continue;
        }
        let mut st: BTreeMap<Name, Value> = BTreeMap::new();
        for item in line.split_whitespace() {
            let (v, val) = item.split_once('=').ok_or_else(|| err(format!("expected `var=value`, got `{item}`")))?;
            let sort = sig.state_sort(v).ok_or_else(|| err(format!("unknown variable `{v}`")))?;
            let value = parse_value(&SExpr::atom(val)).ok_or_else(|| err(format!("bad value `{val}`")))?;
            if !value_fits(sig, sort, &value) {
                return Err(err(format!("value `{val}` does not have sort {sort}")));
            }
            if st.insert(v.into(), value).is_some() {
                return Err(err(format!("`{v}` assigned twice")));
            }
        }
        if let Some((v, _)) = sig.state_vars.iter().find(|(v, _)| !st.contains_key(&**v)) {
            return Err(err(format!("no value for `{v}`")));
        }
        states.push(st);
    }
    if states.is_empty() {
        return Err(TraceError { line: text.lines().count(), message: "a trace needs at least one instant".into() });
    }
    // Elements used by the states belong to their sort's universe.
    for st in &states {
        for (v, val) in st {
            if let (Some(Sort::User(s)), Value::Elem(e)) = (sig.state_sort(v), val) {
                let u = structure.universes.entry(s.clone()).or_default();
                if !u.contains(e) {
                    u.push(e.clone());
                }
            }
        }
    }
    complete_structure(sig, &mut structure);
    Ok(Run { structure, states })
}
