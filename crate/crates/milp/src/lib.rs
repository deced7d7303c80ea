//! Small exact-arithmetic-free LP/MILP toolkit: a dense two-phase simplex, best-first
//! branch-and-bound over binary variables, and CPLEX LP file output.

mod bnb;
mod lp_format;
mod model;
mod simplex;

pub use bnb::{solve_milp, solve_milp_with};
pub use lp_format::{export_lp, parse_lp};
pub use model::{
    Constraint, MilpModel, MilpSolution, Objective, Relation, Sense, SolveStatus, SolverOptions,
    VarId, VarKind, Variable,
};
pub use simplex::{solve_lp, solve_lp_with};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("linear relaxation is unbounded")]
    Unbounded,
    #[error("simplex pivot limit reached")]
    IterationLimit,
    #[error("no integer-feasible assignment exists")]
    Infeasible,
    #[error("branch-and-bound node limit ({0}) reached")]
    NodeLimit(usize),
    #[error("LP file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
