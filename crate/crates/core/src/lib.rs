//! Satisfiability checking for linear temporal logic modulo theories over
//! finite traces (LTLfMT).
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`] holds the term/formula AST, signatures and the syntactic
//!   transformations used by the tableau (NNF, closure, stepping, `L`).
//! * [`parser`] reads the textual problem format and prints formulas back,
//!   either in the same syntax or as SMT-LIB terms.
//! * [`smt`] talks SMT-LIB 2.6 to an external solver process and contains a
//!   Fourier-Motzkin eliminator for monotonicity constraints.
//! * [`semantics`] evaluates formulas on concrete runs and provides a
//!   bounded-length satisfiability oracle that does not use the tableau.
//! * [`tableau`] is the one-pass tree-shaped tableau with the EMPTY,
//!   CONTRADICTION and PRUNE rules.
//! * [`fragments`] classifies formulas into decidable fragments and builds
//!   dependency graphs.
//! * [`cli`] wires everything into the `ltlfmt` command line tool.

pub mod cli;
pub mod fragments;
pub mod parser;
pub mod semantics;
pub mod smt;
pub mod syntax;
pub mod tableau;

pub use parser::{parse_problem, parse_problem_as, print_formula, print_smt, Problem};
pub use syntax::{Formula, Signature, Term, Theory};
