//! Problem file format.
//!
//! ```text
//! # comment
//! theory LRA
//! vars x:Real, y:Real
//! options prune=on max_steps=64
//! formula (x < 0) & (y = 1) & (((next(y) > y) & (next(x) <= x)) U (x = y))
//! ```
//!
//! Declarations (`theory`, `sort`, `vars`, `pred`, `fun`, `options`) come
//! first, each on its own line; everything after the `formula` keyword is
//! the formula. Binding strength, loosest first: `->`, `U`/`R` (both
//! right associative), `|`, `&`, then the prefix operators `!`, `X`, `wX`, `F`,
//! `G`. Quantifiers are written `exists w:Sort. (body)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::syntax::{
    fmt_rational, is_reserved_name, smt_rational, to_nnf, Atom, Binder, Extended, Formula,
    FormulaNode, Func, Pred, Signature, SignatureError, Sort, Term, Theory, Var, VarKind,
    LAST_FLAG,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UnknownIdentifier,
    SortMismatch,
    Reserved,
    Declaration,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Solver options that may be set inside a problem file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProblemOptions {
    pub prune: Option<bool>,
    pub max_steps: Option<usize>,
    pub node_budget: Option<usize>,
    pub timeout_ms: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub signature: Signature,
    pub formula: Formula,
    pub options: ProblemOptions,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "->", "!=", "<=", ">=", "=[", "(", ")", ",", ":", ".", "&", "|", "!", "=", "<", ">", "+", "-", "*",
    "/", "]",
];

const KEYWORDS: &[&str] = &[
    "theory", "vars", "sort", "pred", "fun", "formula", "options", "exists", "forall", "true",
    "false", "next", "wnext", "X", "wX", "F", "G", "U", "R",
];

fn lex(text: &str, line0: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = line0 + ln;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                // `@` directly after an identifier is a reserved-name violation
                // rather than a stray symbol.
                if i < chars.len() && chars[i] == '@' {
                    return Err(ParseError {
                        kind: ParseErrorKind::Reserved,
                        line: line_no,
                        col: start + 1,
                        message: "identifiers must not contain `@`".into(),
                    });
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(s), line: line_no, col });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Num(s), line: line_no, col });
                continue;
            }
            let rest: String = chars[i..].iter().take(2).collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(Token { tok: Tok::Sym(s), line: line_no, col });
                    i += s.len();
                }
                None => {
                    return Err(ParseError {
                        kind: ParseErrorKind::Lexical,
                        line: line_no,
                        col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
    }
    let (line, col) = out.last().map(|t| (t.line, t.col + 1)).unwrap_or((line0, 1));
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

fn parse_decimal(s: &str) -> BigRational {
    match s.split_once('.') {
        None => BigRational::from_integer(s.parse::<BigInt>().expect("lexed digits")),
        Some((int, frac)) => {
            let digits = format!("{int}{frac}");
            let numer = digits.parse::<BigInt>().expect("lexed digits");
            let denom = num_traits::pow(BigInt::from(10), frac.len());
            BigRational::new(numer, denom)
        }
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    sig: &'a Signature,
    /// Quantified variables in scope, innermost last.
    scope: Vec<(String, Sort)>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, pos: usize, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        let t = &self.toks[pos.min(self.toks.len() - 1)];
        ParseError { kind, line: t.line, col: t.col, message: message.into() }
    }

    fn err(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        self.err_at(self.pos, kind, message)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Syntax, format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                if is_reserved_name(&s) {
                    return Err(self.err(ParseErrorKind::Reserved, format!("`{s}` is reserved")));
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(ParseErrorKind::Syntax, "expected identifier")),
        }
    }

    fn sort_name(&mut self) -> PResult<Sort> {
        let pos = self.pos;
        let s = self.ident()?;
        let sort = match s.as_str() {
            "Real" => Sort::Real,
            "Int" => Sort::Int,
            _ => Sort::User(s.as_str().into()),
        };
        self.sig
            .check_sort(&sort)
            .map_err(|e| self.err_at(pos, ParseErrorKind::SortMismatch, e.to_string()))?;
        Ok(sort)
    }

    // ---- formulas --------------------------------------------------------

    fn formula(&mut self) -> PResult<Extended> {
        let lhs = self.temporal()?;
        if self.is_sym("->") {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Extended::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn temporal(&mut self) -> PResult<Extended> {
        let lhs = self.disjunction()?;
        if self.is_kw("U") {
            self.bump();
            let rhs = self.temporal()?;
            Ok(Extended::until(lhs, rhs))
        } else if self.is_kw("R") {
            self.bump();
            let rhs = self.temporal()?;
            Ok(Extended::release(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> PResult<Extended> {
        let mut lhs = self.conjunction()?;
        while self.is_sym("|") {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Extended::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Extended> {
        let mut lhs = self.unary()?;
        while self.is_sym("&") {
            self.bump();
            let rhs = self.unary()?;
            lhs = Extended::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Extended> {
        if self.is_sym("!") {
            self.bump();
            return Ok(Extended::not(self.unary()?));
        }
        let wrap: Option<fn(Box<Extended>) -> Extended> = match self.peek() {
            Tok::Ident(s) if s == "X" => Some(Extended::Next),
            Tok::Ident(s) if s == "wX" => Some(Extended::WeakNext),
            Tok::Ident(s) if s == "F" => Some(Extended::Finally),
            Tok::Ident(s) if s == "G" => Some(Extended::Globally),
            _ => None,
        };
        if let Some(w) = wrap {
            self.bump();
            let body = self.unary()?;
            return Ok(w(Box::new(body)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Extended> {
        if self.is_kw("true") {
            self.bump();
            return Ok(Extended::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(Extended::False);
        }
        if self.is_kw("exists") || self.is_kw("forall") {
            return self.quantifier();
        }
        if self.is_sym("(") {
            // Either a parenthesised formula or an atom whose first term
            // starts with a parenthesis; try the formula reading first.
            let save = self.pos;
            self.bump();
            match self.formula() {
                Ok(f) if self.is_sym(")") => {
                    self.bump();
                    if !self.at_relation() {
                        return Ok(f);
                    }
                }
                Err(e) if e.kind != ParseErrorKind::Syntax => return Err(e),
                _ => {}
            }
            self.pos = save;
            return self.atom();
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(args) = self.sig.predicates.get(name.as_str()).cloned() {
                return self.pred_atom(&name, &args);
            }
        }
        self.atom()
    }

    fn at_relation(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Sym("=" | "!=" | "<" | "<=" | ">" | ">=" | "=[" | "+" | "-" | "*")
        )
    }

    fn quantifier(&mut self) -> PResult<Extended> {
        let universal = self.is_kw("forall");
        self.bump();
        let mut binders = Vec::new();
        loop {
            let pos = self.pos;
            let name = self.ident()?;
            if self.sig.state_sort(&name).is_some() {
                return Err(self.err_at(
                    pos,
                    ParseErrorKind::Declaration,
                    format!("quantified variable `{name}` clashes with a state variable"),
                ));
            }
            if self.sig.predicates.contains_key(name.as_str())
                || self.sig.functions.contains_key(name.as_str())
            {
                return Err(self.err_at(
                    pos,
                    ParseErrorKind::Declaration,
                    format!("quantified variable `{name}` clashes with a declared symbol"),
                ));
            }
            self.expect_sym(":")?;
            let sort = self.sort_name()?;
            binders.push(Binder::new(Var::quant(name.as_str()), sort));
            if self.is_sym(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_sym(".")?;
        let n = self.scope.len();
        self.scope
            .extend(binders.iter().map(|b| (b.var.name.to_string(), b.sort.clone())));
        self.expect_sym("(")?;
        let body = self.formula();
        self.scope.truncate(n);
        let body = body?;
        self.expect_sym(")")?;
        let body = Box::new(body);
        Ok(if universal {
            Extended::Forall(binders, body)
        } else {
            Extended::Exists(binders, body)
        })
    }

    fn pred_atom(&mut self, name: &str, sorts: &[Sort]) -> PResult<Extended> {
        let pos = self.pos;
        self.bump();
        let mut args = Vec::new();
        if self.is_sym("(") {
            self.bump();
            if !self.is_sym(")") {
                loop {
                    args.push(self.term()?);
                    if self.is_sym(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect_sym(")")?;
        }
        self.check_args(pos, name, sorts, &args)?;
        let atom = Atom::new(Pred::Uf(name.into()), args.into_iter().map(|(t, _)| t).collect());
        Ok(Extended::Atom(atom))
    }

    fn check_args(
        &self,
        pos: usize,
        name: &str,
        sorts: &[Sort],
        args: &[(Term, Sort)],
    ) -> PResult<()> {
        if sorts.len() != args.len() {
            return Err(self.err_at(
                pos,
                ParseErrorKind::SortMismatch,
                format!("`{name}` expects {} arguments, got {}", sorts.len(), args.len()),
            ));
        }
        for (i, (expected, (_, got))) in sorts.iter().zip(args).enumerate() {
            if expected != got {
                return Err(self.err_at(
                    pos,
                    ParseErrorKind::SortMismatch,
                    format!("argument {} of `{name}` has sort {got}, expected {expected}", i + 1),
                ));
            }
        }
        Ok(())
    }

    fn atom(&mut self) -> PResult<Extended> {
        let pos = self.pos;
        let (lhs, ls) = self.term()?;
        let op_pos = self.pos;
        let (pred, negated) = match self.peek() {
            Tok::Sym("=") => (Pred::Eq, false),
            Tok::Sym("!=") => (Pred::Eq, true),
            Tok::Sym("<") => (Pred::Lt, false),
            Tok::Sym("<=") => (Pred::Le, false),
            Tok::Sym(">") => (Pred::Gt, false),
            Tok::Sym(">=") => (Pred::Ge, false),
            Tok::Sym("=[") => {
                self.bump();
                let k = match self.bump().tok {
                    Tok::Num(s) if !s.contains('.') => s.parse::<u64>().ok().filter(|k| *k > 0),
                    _ => None,
                };
                let k = k.ok_or_else(|| {
                    self.err_at(op_pos + 1, ParseErrorKind::Syntax, "expected positive modulus")
                })?;
                if !self.is_sym("]") {
                    return Err(self.err(ParseErrorKind::Syntax, "expected `]`"));
                }
                (Pred::Cong(k), false)
            }
            _ => return Err(self.err_at(pos, ParseErrorKind::Syntax, "expected a formula")),
        };
        self.bump();
        let (rhs, rs) = self.term()?;
        if ls != rs {
            return Err(self.err_at(
                op_pos,
                ParseErrorKind::SortMismatch,
                format!("cannot compare {ls} with {rs}"),
            ));
        }
        match pred {
            Pred::Eq => {}
            Pred::Cong(_) if ls != Sort::Int => {
                return Err(self.err_at(
                    op_pos,
                    ParseErrorKind::SortMismatch,
                    "congruences need Int operands",
                ))
            }
            _ if !ls.is_numeric() => {
                return Err(self.err_at(
                    op_pos,
                    ParseErrorKind::SortMismatch,
                    format!("ordering on non-numeric sort {ls}"),
                ))
            }
            _ => {}
        }
        let a = Extended::Atom(Atom::binary(pred, lhs, rhs));
        Ok(if negated { Extended::not(a) } else { a })
    }

    // ---- terms -----------------------------------------------------------

    fn number_sort(&self) -> PResult<Sort> {
        self.sig.theory.number_sort().ok_or_else(|| {
            self.err(ParseErrorKind::SortMismatch, "arithmetic is not available in EUF")
        })
    }

    fn term(&mut self) -> PResult<(Term, Sort)> {
        let (mut lhs, mut ls) = self.product()?;
        loop {
            let func = if self.is_sym("+") {
                Func::Add
            } else if self.is_sym("-") {
                Func::Sub
            } else {
                break;
            };
            let pos = self.pos;
            self.bump();
            let (rhs, rs) = self.product()?;
            if !ls.is_numeric() || ls != rs {
                return Err(self.err_at(pos, ParseErrorKind::SortMismatch, "ill-sorted sum"));
            }
            lhs = Term::App(func, vec![lhs, rhs]);
            ls = rs;
        }
        Ok((lhs, ls))
    }

    fn product(&mut self) -> PResult<(Term, Sort)> {
        let (mut lhs, mut ls) = self.signed()?;
        while self.is_sym("*") {
            let pos = self.pos;
            self.bump();
            let (rhs, rs) = self.signed()?;
            if !ls.is_numeric() || ls != rs {
                return Err(self.err_at(pos, ParseErrorKind::SortMismatch, "ill-sorted product"));
            }
            if !lhs.is_ground() && !rhs.is_ground() {
                return Err(self.err_at(
                    pos,
                    ParseErrorKind::SortMismatch,
                    "non-linear product of two variable terms",
                ));
            }
            lhs = Term::mul(lhs, rhs);
            ls = rs;
        }
        Ok((lhs, ls))
    }

    fn signed(&mut self) -> PResult<(Term, Sort)> {
        if self.is_sym("-") {
            if let Tok::Num(_) = self.peek_at(1) {
                self.bump();
                let (t, s) = self.number()?;
                let Term::Num(q) = t else { unreachable!() };
                return Ok((Term::Num(-q), s));
            }
            let pos = self.pos;
            self.bump();
            let (t, s) = self.signed()?;
            if !s.is_numeric() {
                return Err(self.err_at(pos, ParseErrorKind::SortMismatch, "negation of non-number"));
            }
            return Ok((Term::App(Func::Neg, vec![t]), s));
        }
        self.primary_term()
    }

    fn number(&mut self) -> PResult<(Term, Sort)> {
        let sort = self.number_sort()?;
        let pos = self.pos;
        let Tok::Num(s) = self.bump().tok else { unreachable!() };
        let mut q = parse_decimal(&s);
        if self.is_sym("/") {
            if let Tok::Num(d) = self.peek_at(1).clone() {
                self.bump();
                self.bump();
                let d = parse_decimal(&d);
                if d.is_zero() {
                    return Err(self.err_at(pos, ParseErrorKind::Syntax, "division by zero"));
                }
                q /= d;
            } else {
                return Err(self.err(ParseErrorKind::Syntax, "division only between literals"));
            }
        }
        if sort == Sort::Int && !q.is_integer() {
            return Err(self.err_at(
                pos,
                ParseErrorKind::SortMismatch,
                "non-integer literal in LIA",
            ));
        }
        Ok((Term::Num(q), sort))
    }

    fn primary_term(&mut self) -> PResult<(Term, Sort)> {
        let pos = self.pos;
        match self.peek().clone() {
            Tok::Num(_) => self.number(),
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(kw) if kw == "next" || kw == "wnext" => {
                self.bump();
                self.expect_sym("(")?;
                let vpos = self.pos;
                let name = self.ident()?;
                self.expect_sym(")")?;
                let sort = self.sig.state_sort(&name).cloned().ok_or_else(|| {
                    self.err_at(
                        vpos,
                        ParseErrorKind::UnknownIdentifier,
                        format!("`{kw}` expects a state variable, got `{name}`"),
                    )
                })?;
                let kind = if kw == "next" { VarKind::Next } else { VarKind::WeakNext };
                Ok((Term::Var(Var::new(name.as_str(), kind)), sort))
            }
            Tok::Ident(name) if name == LAST_FLAG => {
                Err(self.err(ParseErrorKind::Reserved, format!("`{name}` is reserved")))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if let Some((_, s)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
                    return Ok((Term::quant(&name), s.clone()));
                }
                if let Some(s) = self.sig.state_sort(&name) {
                    return Ok((Term::state(&name), s.clone()));
                }
                if let Some(fs) = self.sig.functions.get(name.as_str()).cloned() {
                    let mut args = Vec::new();
                    if self.is_sym("(") {
                        self.bump();
                        if !self.is_sym(")") {
                            loop {
                                args.push(self.term()?);
                                if self.is_sym(",") {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect_sym(")")?;
                    }
                    self.check_args(pos, &name, &fs.args, &args)?;
                    let t = Term::App(
                        Func::Uf(name.as_str().into()),
                        args.into_iter().map(|(t, _)| t).collect(),
                    );
                    return Ok((t, fs.result));
                }
                Err(self.err_at(
                    pos,
                    ParseErrorKind::UnknownIdentifier,
                    format!("unknown identifier `{name}`"),
                ))
            }
            _ => Err(self.err(ParseErrorKind::Syntax, "expected a term")),
        }
    }
}

fn decl_err(line: usize, e: SignatureError) -> ParseError {
    let kind = match e {
        SignatureError::Reserved(_) => ParseErrorKind::Reserved,
        SignatureError::BadSort(..) => ParseErrorKind::SortMismatch,
        SignatureError::Duplicate(_) => ParseErrorKind::Declaration,
    };
    ParseError { kind, line, col: 1, message: e.to_string() }
}

/// Parses a whole problem file. The formula is returned in negation normal
/// form with `F`/`G` desugared.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    parse_problem_as(text, None)
}

/// Like [`parse_problem`], with `theory` replacing the declared theory.
pub fn parse_problem_as(text: &str, theory: Option<Theory>) -> Result<Problem, ParseError> {
    let mut sig = Signature::new(Theory::Lra);
    let mut options = ProblemOptions::default();
    let mut pending_vars: Vec<(usize, String)> = Vec::new();
    let mut formula_src: Option<(usize, String)> = None;
    let mut lines = text.lines().enumerate().peekable();
    let mut theory_seen = false;
    let mut decls: Vec<(usize, String, String)> = Vec::new();

    while let Some((ln, raw)) = lines.next() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if kw == "formula" {
            // Pad so that columns in diagnostics match the source line.
            let start = raw.find("formula").unwrap_or(0) + "formula".len();
            let mut body = format!("{}{}", " ".repeat(start), &raw[start..]);
            for (_, l) in lines.by_ref() {
                body.push('\n');
                body.push_str(l);
            }
            formula_src = Some((ln + 1, body));
            break;
        }
        match kw {
            "theory" => {
                if theory_seen || !decls.is_empty() {
                    return Err(ParseError {
                        kind: ParseErrorKind::Declaration,
                        line: ln + 1,
                        col: 1,
                        message: "`theory` must come first and only once".into(),
                    });
                }
                theory_seen = true;
                sig.theory = rest.trim().parse().map_err(|m| ParseError {
                    kind: ParseErrorKind::Declaration,
                    line: ln + 1,
                    col: 1,
                    message: m,
                })?;
            }
            "sort" | "pred" | "fun" => decls.push((ln + 1, kw.to_string(), rest.to_string())),
            "vars" => pending_vars.push((ln + 1, rest.to_string())),
            "options" => parse_options(ln + 1, rest, &mut options)?,
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax,
                    line: ln + 1,
                    col: 1,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }

    if let Some(t) = theory {
        sig.theory = t;
    }
    // Sorts first so that predicate and variable declarations can use them.
    decls.sort_by_key(|(_, kw, _)| kw != "sort");
    for (line, kw, rest) in decls {
        declare(&mut sig, line, &kw, &rest)?;
    }
    for (line, rest) in pending_vars {
        declare(&mut sig, line, "vars", &rest)?;
    }

    let (line, src) = formula_src.ok_or(ParseError {
        kind: ParseErrorKind::Syntax,
        line: text.lines().count().max(1),
        col: 1,
        message: "missing `formula`".into(),
    })?;
    let ext = parse_formula_with(&sig, &src, line)?;
    Ok(Problem { signature: sig, formula: to_nnf(&ext), options })
}

fn parse_options(line: usize, rest: &str, opts: &mut ProblemOptions) -> Result<(), ParseError> {
    let bad = |m: String| ParseError { kind: ParseErrorKind::Declaration, line, col: 1, message: m };
    for item in rest.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("bad option `{item}`")))?;
        let num = || v.parse::<u64>().map_err(|_| bad(format!("bad value for `{k}`")));
        match k {
            "prune" => {
                opts.prune = Some(match v {
                    "on" | "true" => true,
                    "off" | "false" => false,
                    _ => return Err(bad(format!("bad value for `{k}`"))),
                })
            }
            "max_steps" => opts.max_steps = Some(num()? as usize),
            "node_budget" => opts.node_budget = Some(num()? as usize),
            "timeout_ms" => opts.timeout_ms = Some(num()?),
            _ => return Err(bad(format!("unknown option `{k}`"))),
        }
    }
    Ok(())
}

fn declare(sig: &mut Signature, line: usize, kw: &str, rest: &str) -> Result<(), ParseError> {
    let toks = lex(rest, line)?;
    let mut p = Parser { toks, pos: 0, sig, scope: Vec::new() };
    let mut out: Vec<(String, Vec<Sort>, Option<Sort>)> = Vec::new();
    loop {
        let name = p.ident()?;
        match kw {
            "sort" => out.push((name, vec![], None)),
            "vars" => {
                p.expect_sym(":")?;
                let s = p.sort_name()?;
                out.push((name, vec![], Some(s)));
            }
            _ => {
                let mut args = Vec::new();
                if p.is_sym("(") {
                    p.bump();
                    if !p.is_sym(")") {
                        loop {
                            args.push(p.sort_name()?);
                            if p.is_sym(",") {
                                p.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    p.expect_sym(")")?;
                }
                let result = if kw == "fun" {
                    p.expect_sym(":")?;
                    Some(p.sort_name()?)
                } else {
                    None
                };
                out.push((name, args, result));
            }
        }
        if p.is_sym(",") && kw != "pred" && kw != "fun" {
            p.bump();
            continue;
        }
        break;
    }
    if p.peek() != &Tok::Eof {
        return Err(p.err(ParseErrorKind::Syntax, "trailing input in declaration"));
    }
    for (name, args, res) in out {
        let r = match kw {
            "sort" => sig.declare_sort(&name),
            "vars" => sig.declare_var(&name, res.expect("vars carry a sort")),
            "pred" => sig.declare_pred(&name, args),
            _ => sig.declare_fun(&name, args, res.expect("fun carries a sort")),
        };
        r.map_err(|e| decl_err(line, e))?;
    }
    Ok(())
}

/// Parses a formula against an existing signature, without normalising.
pub fn parse_extended(sig: &Signature, src: &str) -> Result<Extended, ParseError> {
    parse_formula_with(sig, src, 1)
}

/// Parses and normalises a formula against an existing signature.
pub fn parse_formula(sig: &Signature, src: &str) -> Result<Formula, ParseError> {
    Ok(to_nnf(&parse_formula_with(sig, src, 1)?))
}

fn parse_formula_with(sig: &Signature, src: &str, line: usize) -> Result<Extended, ParseError> {
    let toks = lex(src, line)?;
    let mut p = Parser { toks, pos: 0, sig, scope: Vec::new() };
    if p.peek() == &Tok::Eof {
        return Err(p.err(ParseErrorKind::Syntax, "empty formula"));
    }
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return Err(p.err(ParseErrorKind::Syntax, "unexpected trailing input"));
    }
    Ok(f)
}

// ---- printing ----------------------------------------------------------

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Var(v) => match v.kind {
            VarKind::State | VarKind::Quant => v.name.to_string(),
            VarKind::Next => format!("next({})", v.name),
            VarKind::WeakNext => format!("wnext({})", v.name),
            VarKind::Indexed(_) => v.smt_name(),
        },
        Term::Num(q) => fmt_rational(q),
        Term::App(f, args) => {
            let a: Vec<String> = args.iter().map(print_term).collect();
            match (f, a.as_slice()) {
                (Func::Add, [x, y]) => format!("({x} + {y})"),
                (Func::Sub, [x, y]) => format!("({x} - {y})"),
                (Func::Mul, [x, y]) => format!("({x} * {y})"),
                (Func::Neg, [x]) => format!("-({x})"),
                (Func::IntDiv, _) => format!("div({})", a.join(", ")),
                (Func::Mod, _) => format!("mod({})", a.join(", ")),
                (Func::Uf(n), []) => n.to_string(),
                (Func::Uf(n), _) => format!("{n}({})", a.join(", ")),
                (f, _) => format!("{f:?}({})", a.join(", ")),
            }
        }
    }
}

fn print_atom(a: &Atom) -> String {
    let bin = |op: &str| format!("({} {op} {})", print_term(&a.args[0]), print_term(&a.args[1]));
    match &a.pred {
        Pred::Eq => bin("="),
        Pred::Lt => bin("<"),
        Pred::Le => bin("<="),
        Pred::Gt => bin(">"),
        Pred::Ge => bin(">="),
        Pred::Cong(k) => bin(&format!("=[{k}]")),
        Pred::Last => LAST_FLAG.to_string(),
        Pred::Uf(n) if a.args.is_empty() => n.to_string(),
        Pred::Uf(n) => {
            let args: Vec<String> = a.args.iter().map(print_term).collect();
            format!("{n}({})", args.join(", "))
        }
    }
}

fn print_binders(bs: &[Binder]) -> String {
    bs.iter().map(|b| format!("{}:{}", b.var.smt_name(), b.sort)).collect::<Vec<_>>().join(", ")
}

/// Prints a formula in the surface syntax; `parse_formula` reads it back to
/// an equal AST.
pub fn print_formula(f: &Formula) -> String {
    match f.node() {
        FormulaNode::True => "true".into(),
        FormulaNode::False => "false".into(),
        FormulaNode::Atom(a) => print_atom(a),
        FormulaNode::NegAtom(a) if a.pred == Pred::Eq => {
            format!("({} != {})", print_term(&a.args[0]), print_term(&a.args[1]))
        }
        FormulaNode::NegAtom(a) => format!("!{}", print_atom(a)),
        FormulaNode::And(a, b) => format!("({} & {})", print_formula(a), print_formula(b)),
        FormulaNode::Or(a, b) => format!("({} | {})", print_formula(a), print_formula(b)),
        FormulaNode::Exists(bs, b) => {
            format!("(exists {}. ({}))", print_binders(bs), print_formula(b))
        }
        FormulaNode::Forall(bs, b) => {
            format!("(forall {}. ({}))", print_binders(bs), print_formula(b))
        }
        FormulaNode::Next(a) => format!("X ({})", print_formula(a)),
        FormulaNode::WeakNext(a) => format!("wX ({})", print_formula(a)),
        FormulaNode::Until(a, b) if a.is_true() => format!("F ({})", print_formula(b)),
        FormulaNode::Release(a, b) if a.is_false() => format!("G ({})", print_formula(b)),
        FormulaNode::Until(a, b) => format!("({} U {})", print_formula(a), print_formula(b)),
        FormulaNode::Release(a, b) => format!("({} R {})", print_formula(a), print_formula(b)),
    }
}

pub fn smt_term(t: &Term) -> String {
    match t {
        Term::Var(v) => match v.kind {
            VarKind::Next => format!("(next {})", v.name),
            VarKind::WeakNext => format!("(wnext {})", v.name),
            _ => v.smt_name(),
        },
        Term::Num(q) => smt_rational(q),
        Term::App(f, args) => {
            let head = match f {
                Func::Add => "+",
                Func::Sub => "-",
                Func::Neg => "-",
                Func::Mul => "*",
                Func::IntDiv => "div",
                Func::Mod => "mod",
                Func::Uf(n) => n,
            };
            if args.is_empty() {
                return head.to_string();
            }
            let mut s = format!("({head}");
            for a in args {
                s.push(' ');
                s.push_str(&smt_term(a));
            }
            s.push(')');
            s
        }
    }
}

fn smt_atom(a: &Atom) -> String {
    let bin = |op: &str| format!("({op} {} {})", smt_term(&a.args[0]), smt_term(&a.args[1]));
    match &a.pred {
        Pred::Eq => bin("="),
        Pred::Lt => bin("<"),
        Pred::Le => bin("<="),
        Pred::Gt => bin(">"),
        Pred::Ge => bin(">="),
        Pred::Cong(k) => format!(
            "(= (mod (- {} {}) {k}) 0)",
            smt_term(&a.args[0]),
            smt_term(&a.args[1])
        ),
        Pred::Last => LAST_FLAG.to_string(),
        Pred::Uf(n) if a.args.is_empty() => n.to_string(),
        Pred::Uf(n) => {
            let args: Vec<String> = a.args.iter().map(smt_term).collect();
            format!("({n} {})", args.join(" "))
        }
    }
}

/// Renders a first-order formula over indexed variables as an SMT-LIB 2.6
/// term. Nested conjunctions and disjunctions are flattened.
pub fn print_smt(f: &Formula) -> String {
    let mut out = String::new();
    write_smt(f, &mut out);
    out
}

fn flatten<'a>(f: &'a Formula, and: bool, out: &mut Vec<&'a Formula>) {
    match f.node() {
        FormulaNode::And(a, b) if and => {
            flatten(a, and, out);
            flatten(b, and, out);
        }
        FormulaNode::Or(a, b) if !and => {
            flatten(a, and, out);
            flatten(b, and, out);
        }
        _ => out.push(f),
    }
}

fn write_smt(f: &Formula, out: &mut String) {
    match f.node() {
        FormulaNode::True => out.push_str("true"),
        FormulaNode::False => out.push_str("false"),
        FormulaNode::Atom(a) => out.push_str(&smt_atom(a)),
        FormulaNode::NegAtom(a) => {
            let _ = write!(out, "(not {})", smt_atom(a));
        }
        FormulaNode::And(..) | FormulaNode::Or(..) => {
            let and = matches!(f.node(), FormulaNode::And(..));
            let mut parts = Vec::new();
            flatten(f, and, &mut parts);
            out.push_str(if and { "(and" } else { "(or" });
            for p in parts {
                out.push(' ');
                write_smt(p, out);
            }
            out.push(')');
        }
        FormulaNode::Exists(bs, b) | FormulaNode::Forall(bs, b) => {
            let q = if matches!(f.node(), FormulaNode::Exists(..)) { "exists" } else { "forall" };
            let _ = write!(out, "({q} (");
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({} {})", b.var.smt_name(), b.sort);
            }
            out.push_str(") ");
            write_smt(b, out);
            out.push(')');
        }
        // Temporal connectives have no SMT-LIB counterpart; they never
        // reach the solver, the rendering is for diagnostics only.
        FormulaNode::Next(a) => {
            out.push_str("(X ");
            write_smt(a, out);
            out.push(')');
        }
        FormulaNode::WeakNext(a) => {
            out.push_str("(wX ");
            write_smt(a, out);
            out.push(')');
        }
        FormulaNode::Until(a, b) | FormulaNode::Release(a, b) => {
            let op = if matches!(f.node(), FormulaNode::Until(..)) { "U" } else { "R" };
            let _ = write!(out, "({op} ");
            write_smt(a, out);
            out.push(' ');
            write_smt(b, out);
            out.push(')');
        }
    }
}

/// Parameters used to build a default signature from the declarations a
/// caller already holds, for tests and tools that construct ASTs directly.
pub fn signature_from_vars(theory: Theory, vars: &[(&str, Sort)]) -> Signature {
    let mut sig = Signature::new(theory);
    let mut seen = HashMap::new();
    for (n, s) in vars {
        if seen.insert(*n, ()).is_none() {
            sig.declare_var(n, s.clone()).expect("valid test signature");
        }
    }
    sig
}
