use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::smt::SExpr;
use crate::syntax::{fmt_rational, Name};

/// A domain element: an exact number, a truth value, or an element of an
/// uninterpreted sort (named as the solver named it).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Num(BigRational),
    Bool(bool),
    Elem(Name),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Value::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// SMT-LIB rendering of the value.
    pub fn to_smt(&self) -> String {
        match self {
            Value::Num(q) => crate::syntax::smt_rational(q),
            Value::Bool(b) => b.to_string(),
            Value::Elem(e) => e.to_string(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(q) => f.write_str(&fmt_rational(q)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Elem(e) => f.write_str(e),
        }
    }
}

/// Parses a decimal or integer numeral (`3`, `3.0`, `0.25`).
pub fn parse_numeral(s: &str) -> Option<BigRational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(numer, denom))
}

/// Parses a literal value as printed by a solver or written in a trace
/// file: numerals, `p/q`, `(- v)`, `(/ p q)`, booleans and element names.
pub fn parse_value(e: &SExpr) -> Option<Value> {
    match e {
        SExpr::Atom(s) => match s.as_str() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => {
                if let Some(q) = parse_rational_text(s) {
                    return Some(Value::Num(q));
                }
                let first = s.chars().next()?;
                (first.is_alphabetic() || first == '_').then(|| Value::Elem(s.as_str().into()))
            }
        },
        SExpr::List(items) => match (items.first()?.as_atom()?, items.len()) {
            ("-", 2) => match parse_value(&items[1])? {
                Value::Num(q) => Some(Value::Num(-q)),
                _ => None,
            },
            ("/", 3) => {
                let a = parse_value(&items[1])?;
                let b = parse_value(&items[2])?;
                match (a, b) {
                    (Value::Num(a), Value::Num(b)) if !b.is_zero() => Some(Value::Num(a / b)),
                    _ => None,
                }
            }
            _ => None,
        },
    }
}

/// `3`, `-3`, `3.5`, `1/3`, `-1/3`.
pub fn parse_rational_text(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let q = match body.split_once('/') {
        Some((p, q)) => {
            let p = parse_numeral(p)?;
            let q = parse_numeral(q)?;
            if q.is_zero() {
                return None;
            }
            p / q
        }
        None => parse_numeral(body)?,
    };
    Some(if neg { -q } else { q })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDef {
    pub params: Vec<(String, SExpr)>,
    pub ret: SExpr,
    pub body: SExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("cannot evaluate `{0}`")]
    Unsupported(String),
    #[error("type error in `{0}`")]
    Type(String),
}

/// Interpretation of the uninterpreted part of a signature, as extracted
/// from a solver model: finite universes for user sorts and definitions of
/// predicate and function symbols as SMT-LIB bodies. Arithmetic symbols
/// have their standard meaning.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Structure {
    pub universes: BTreeMap<Name, Vec<Name>>,
    pub defs: BTreeMap<Name, FunDef>,
}

impl Structure {
    pub fn is_empty(&self) -> bool {
        self.universes.is_empty() && self.defs.is_empty()
    }

    pub fn elements(&self, sort: &str) -> &[Name] {
        self.universes.get(sort).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Applies a defined symbol; `None` if the model leaves it undefined.
    pub fn apply(&self, name: &str, args: &[Value]) -> Result<Option<Value>, EvalError> {
        let Some(def) = self.defs.get(name) else { return Ok(None) };
        if def.params.len() != args.len() {
            return Err(EvalError::Type(name.to_string()));
        }
        let env: HashMap<String, Value> =
            def.params.iter().map(|(p, _)| p.clone()).zip(args.iter().cloned()).collect();
        self.eval_sexpr(&def.body, &env).map(Some)
    }

    pub fn eval_sexpr(&self, e: &SExpr, env: &HashMap<String, Value>) -> Result<Value, EvalError> {
        match e {
            SExpr::Atom(s) => {
                if let Some(v) = env.get(s) {
                    return Ok(v.clone());
                }
                if self.defs.contains_key(s.as_str()) {
                    return self.apply(s, &[])?.ok_or_else(|| EvalError::Unbound(s.clone()));
                }
                if self.universes.values().any(|u| u.iter().any(|x| &**x == s)) {
                    return Ok(Value::Elem(s.as_str().into()));
                }
                match parse_value(e) {
                    Some(Value::Elem(_)) | None => Err(EvalError::Unbound(s.clone())),
                    Some(v) => Ok(v),
                }
            }
            SExpr::List(items) => self.eval_list(e, items, env),
        }
    }

    fn eval_list(
        &self,
        whole: &SExpr,
        items: &[SExpr],
        env: &HashMap<String, Value>,
    ) -> Result<Value, EvalError> {
        let head = items
            .first()
            .and_then(SExpr::as_atom)
            .ok_or_else(|| EvalError::Unsupported(whole.to_string()))?;
        let args = &items[1..];
        let ty = || EvalError::Type(whole.to_string());
        if let Some(v) = parse_value(whole) {
            if !matches!(v, Value::Elem(_)) {
                return Ok(v);
            }
        }
        match head {
            "let" => {
                let binds = args.first().and_then(SExpr::as_list).ok_or_else(ty)?;
                let mut inner = env.clone();
                for b in binds {
                    let pair = b.as_list().filter(|p| p.len() == 2).ok_or_else(ty)?;
                    let name = pair[0].as_atom().ok_or_else(ty)?;
                    inner.insert(name.to_string(), self.eval_sexpr(&pair[1], env)?);
                }
                self.eval_sexpr(args.get(1).ok_or_else(ty)?, &inner)
            }
            "ite" => {
                if args.len() != 3 {
                    return Err(ty());
                }
                let c = self.eval_sexpr(&args[0], env)?.as_bool().ok_or_else(ty)?;
                self.eval_sexpr(if c { &args[1] } else { &args[2] }, env)
            }
            "and" | "or" | "not" | "=>" | "xor" => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_sexpr(a, env)?.as_bool().ok_or_else(ty))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Value::Bool(match head {
                    "and" => vals.iter().all(|b| *b),
                    "or" => vals.iter().any(|b| *b),
                    "not" => !*vals.first().ok_or_else(ty)?,
                    "xor" => vals.iter().filter(|b| **b).count() % 2 == 1,
                    _ => {
                        let (last, init) = vals.split_last().ok_or_else(ty)?;
                        init.iter().any(|b| !*b) || *last
                    }
                }))
            }
            "=" | "distinct" => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_sexpr(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Value::Bool(if head == "=" {
                    vals.windows(2).all(|w| w[0] == w[1])
                } else {
                    (0..vals.len()).all(|i| (i + 1..vals.len()).all(|j| vals[i] != vals[j]))
                }))
            }
            "<" | "<=" | ">" | ">=" | "+" | "-" | "*" | "/" | "div" | "mod" | "abs"
            | "to_real" | "to_int" | "is_int" => {
                let nums = args
                    .iter()
                    .map(|a| self.eval_sexpr(a, env)?.as_num().cloned().ok_or_else(ty))
                    .collect::<Result<Vec<_>, _>>()?;
                arith(head, &nums).ok_or_else(ty)
            }
            name => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_sexpr(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply(name, &vals)?.ok_or_else(|| EvalError::Unbound(name.to_string()))
            }
        }
    }
}

fn arith(op: &str, xs: &[BigRational]) -> Option<Value> {
    let cmp = |f: fn(&BigRational, &BigRational) -> bool| {
        Some(Value::Bool(xs.len() >= 2 && xs.windows(2).all(|w| f(&w[0], &w[1]))))
    };
    match op {
        "<" => cmp(|a, b| a < b),
        "<=" => cmp(|a, b| a <= b),
        ">" => cmp(|a, b| a > b),
        ">=" => cmp(|a, b| a >= b),
        "+" => Some(Value::Num(xs.iter().cloned().sum())),
        "*" => Some(Value::Num(xs.iter().cloned().product())),
        "-" => match xs {
            [a] => Some(Value::Num(-a.clone())),
            [a, rest @ ..] => Some(Value::Num(rest.iter().fold(a.clone(), |acc, x| acc - x))),
            [] => None,
        },
        "/" => match xs {
            [a, b] if !b.is_zero() => Some(Value::Num(a / b)),
            _ => None,
        },
        "div" | "mod" => match xs {
            [a, b] if a.is_integer() && b.is_integer() && !b.is_zero() => {
                let (a, b) = (a.to_integer(), b.to_integer());
                // SMT-LIB integer division: remainder is always non-negative.
                let r = a.mod_floor(&b.abs());
                let q = (&a - &r) / &b;
                let v = if op == "div" { q } else { r };
                Some(Value::Num(BigRational::from_integer(v)))
            }
            _ => None,
        },
        "abs" => xs.first().map(|a| Value::Num(a.abs())),
        "to_real" => xs.first().map(|a| Value::Num(a.clone())),
        "to_int" => xs.first().map(|a| Value::Num(BigRational::from_integer(a.floor().to_integer()))),
        "is_int" => xs.first().map(|a| Value::Bool(a.is_integer())),
        _ => None,
    }
}
