//! Solver backend: SMT-LIB sessions over pipes, reading solver output back
//! into formulas, and Fourier-Motzkin elimination for monotonicity
//! constraints.

mod qe_mc;
mod reader;
mod session;
mod sexpr;

pub use qe_mc::{is_mc_atom, is_mc_formula, qe_mc, qe_mc_formula, QeError, MAX_DISJUNCTS};
pub use reader::{formula_from_sexpr, term_from_sexpr};
pub use session::{
    parse_model, Entailment, Model, Session, SmtError, SolverConfig, Verdict, DEFAULT_SOLVER,
    DEFAULT_TIMEOUT_MS, SOLVER_ENV,
};
pub use sexpr::{parse_all, parse_one, SExpr, SExprError, SExprReader};

/// Process-wide solver statistics.
pub mod stats {
    use std::sync::atomic::{AtomicU64, Ordering};
    use std::time::Duration;

    static QUERIES: AtomicU64 = AtomicU64::new(0);
    static MICROS: AtomicU64 = AtomicU64::new(0);
    static UNKNOWNS: AtomicU64 = AtomicU64::new(0);
    static QE_CALLS: AtomicU64 = AtomicU64::new(0);

    #[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
    pub struct Snapshot {
        pub queries: u64,
        pub solver_micros: u64,
        pub unknowns: u64,
        pub qe_calls: u64,
    }

    pub(crate) fn record_query(d: Duration) {
        QUERIES.fetch_add(1, Ordering::Relaxed);
        MICROS.fetch_add(d.as_micros() as u64, Ordering::Relaxed);
    }

    pub(crate) fn record_unknown() {
        UNKNOWNS.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn record_qe() {
        QE_CALLS.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot() -> Snapshot {
        Snapshot {
            queries: QUERIES.load(Ordering::Relaxed),
            solver_micros: MICROS.load(Ordering::Relaxed),
            unknowns: UNKNOWNS.load(Ordering::Relaxed),
            qe_calls: QE_CALLS.load(Ordering::Relaxed),
        }
    }
}
