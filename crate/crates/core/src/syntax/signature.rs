use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::formula::LAST_FLAG;
use super::term::{Name, Sort};

/// Background theory of a problem. Only one theory per problem; LRA and LIA
/// may still use uninterpreted predicates and functions over their numeric
/// sort (the tableau's consistency checks are modulo `T ∪ EUF`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Theory {
    Lra,
    Lia,
    Euf,
}

impl Theory {
    pub fn number_sort(self) -> Option<Sort> {
        match self {
            Theory::Lra => Some(Sort::Real),
            Theory::Lia => Some(Sort::Int),
            Theory::Euf => None,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        self != Theory::Euf
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theory::Lra => "LRA",
            Theory::Lia => "LIA",
            Theory::Euf => "EUF",
        })
    }
}

impl FromStr for Theory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LRA" => Ok(Theory::Lra),
            "LIA" => Ok(Theory::Lia),
            "EUF" => Ok(Theory::Euf),
            other => Err(format!("unknown theory `{other}` (expected LRA, LIA or EUF)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunSig {
    pub args: Vec<Sort>,
    pub result: Sort,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("`{0}` is reserved")]
    Reserved(String),
    #[error("`{0}` is declared twice")]
    Duplicate(String),
    #[error("sort `{0}` is not available in theory {1}")]
    BadSort(String, Theory),
}

/// First-order signature: sorts, uninterpreted symbols and the state
/// variables `V`. Equality exists implicitly for every sort. Quantified
/// variables are declared at their binders and must not reuse a name of `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub theory: Theory,
    pub sorts: BTreeSet<Name>,
    pub predicates: BTreeMap<Name, Vec<Sort>>,
    pub functions: BTreeMap<Name, FunSig>,
    pub state_vars: Vec<(Name, Sort)>,
}

pub fn is_reserved_name(name: &str) -> bool {
    name == LAST_FLAG || name.contains('@')
}

impl Signature {
    pub fn new(theory: Theory) -> Self {
        Signature {
            theory,
            sorts: BTreeSet::new(),
            predicates: BTreeMap::new(),
            functions: BTreeMap::new(),
            state_vars: Vec::new(),
        }
    }

    fn check_fresh(&self, name: &str) -> Result<(), SignatureError> {
        if is_reserved_name(name) {
            return Err(SignatureError::Reserved(name.to_string()));
        }
        if self.sorts.contains(name)
            || self.predicates.contains_key(name)
            || self.functions.contains_key(name)
            || self.state_sort(name).is_some()
        {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    pub fn check_sort(&self, sort: &Sort) -> Result<(), SignatureError> {
        let ok = match sort {
            Sort::Real => self.theory == Theory::Lra,
            Sort::Int => self.theory == Theory::Lia,
            Sort::Bool => false,
            Sort::User(n) => self.theory == Theory::Euf && self.sorts.contains(n),
        };
        if ok {
            Ok(())
        } else {
            Err(SignatureError::BadSort(sort.to_string(), self.theory))
        }
    }

    pub fn declare_sort(&mut self, name: &str) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        if self.theory != Theory::Euf {
            return Err(SignatureError::BadSort(name.to_string(), self.theory));
        }
        self.sorts.insert(name.into());
        Ok(())
    }

    pub fn declare_var(&mut self, name: &str, sort: Sort) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        self.check_sort(&sort)?;
        self.state_vars.push((name.into(), sort));
        Ok(())
    }

    pub fn declare_pred(&mut self, name: &str, args: Vec<Sort>) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        for s in &args {
            self.check_sort(s)?;
        }
        self.predicates.insert(name.into(), args);
        Ok(())
    }

    pub fn declare_fun(
        &mut self,
        name: &str,
        args: Vec<Sort>,
        result: Sort,
    ) -> Result<(), SignatureError> {
        self.check_fresh(name)?;
        for s in args.iter().chain(std::iter::once(&result)) {
            self.check_sort(s)?;
        }
        self.functions.insert(name.into(), FunSig { args, result });
        Ok(())
    }

    pub fn state_sort(&self, name: &str) -> Option<&Sort> {
        self.state_vars.iter().find(|(n, _)| &**n == name).map(|(_, s)| s)
    }

    pub fn state_names(&self) -> impl Iterator<Item = &Name> {
        self.state_vars.iter().map(|(n, _)| n)
    }

    pub fn var_position(&self, name: &str) -> Option<usize> {
        self.state_vars.iter().position(|(n, _)| &**n == name)
    }

    pub fn has_uninterpreted(&self) -> bool {
        !self.predicates.is_empty() || !self.functions.is_empty() || !self.sorts.is_empty()
    }

    /// The SMT-LIB logic used for solver sessions over this signature.
    pub fn smt_logic(&self) -> &'static str {
        match (self.theory, self.has_uninterpreted()) {
            (Theory::Lra, false) => "LRA",
            (Theory::Lra, true) => "UFLRA",
            (Theory::Lia, false) => "LIA",
            (Theory::Lia, true) => "UFLIA",
            (Theory::Euf, _) => "UF",
        }
    }
}
