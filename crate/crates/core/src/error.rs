use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GviError {
    #[error("non-finite value in {component} at index {index}")]
    NumericDomain { component: &'static str, index: usize },

    #[error("missing capability: {0}")]
    Capability(&'static str),

    #[error("iterates diverged after {iterations} iterations")]
    Divergence {
        iterations: usize,
        last: DVector<f64>,
    },

    #[error("inner loop of {variant} did not settle at outer iteration {outer}")]
    InnerDivergence { variant: &'static str, outer: usize },

    #[error("line search exceeded {0} reductions")]
    LineSearch(u32),

    #[error("descent stalled at iteration {0}")]
    Stall(usize),

    #[error("set is empty or hyperplane misses it")]
    Infeasible,

    #[error("operation not supported for this set: {0}")]
    UnsupportedSet(&'static str),

    #[error("oracle returned an infeasible point at iteration {0}")]
    OracleContract(usize),

    #[error("grid size {0}: n + 1 must be divisible by 4")]
    Grid(usize),

    #[error("singular system at row {0}")]
    Singular(usize),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GviError>;
