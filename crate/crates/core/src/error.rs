use crnlc_milp::MilpError;

#[derive(Debug, thiserror::Error)]
pub enum CrnError {
    #[error("line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("line {line}: duplicate reaction {what}")]
    DuplicateReaction { line: usize, what: String },
    #[error("line {line}: reaction {label} has identical reactant and product")]
    SelfLoop { line: usize, label: String },
    #[error("line {line}: reaction {label} has no kinetics ({missing})")]
    MissingKinetics {
        line: usize,
        label: String,
        missing: String,
    },
    #[error("line {line}: negative Hill exponent for {species} in reaction {label} (add `@allow negative-hill` to accept)")]
    NegativeHillExponent {
        line: usize,
        label: String,
        species: String,
    },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid kinetics: {0}")]
    InvalidKinetics(String),
    #[error("kinetics is not complex factorizable ({cf_subsets} CF-subsets over {reactants} reactant complexes); run the CF-RM transform first")]
    NotComplexFactorizable { cf_subsets: usize, reactants: usize },
    #[error("state vector must be strictly positive (coordinate {index} is {value})")]
    NonPositiveState { index: usize, value: f64 },
    #[error("systems have different species lists")]
    SpeciesMismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no linearly conjugate realization within the given bounds")]
    NoRealization,
    #[error("solver failure: {0}")]
    Solver(#[from] MilpError),
    #[error("integration failed at t = {time}: {msg}")]
    Integration { time: f64, msg: String },
}

pub type Result<T> = std::result::Result<T, CrnError>;
