//! Terms, formulas, signatures and the syntactic operations the tableau is
//! built from.

mod formula;
mod nnf;
mod ops;
mod signature;
mod term;

pub use formula::{Atom, Binder, Formula, FormulaNode, Pred, LAST_FLAG};
pub use nnf::{negate, to_nnf, Extended};
pub use ops::{closure, iteration_conditions, l_rewrite, stepped, stepped_term, subformulas};
pub use signature::{is_reserved_name, FunSig, Signature, SignatureError, Theory};
pub use term::{Func, Name, Sort, Term, Var, VarKind};

pub(crate) use term::{fmt_rational, smt_rational};
