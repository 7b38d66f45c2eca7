use thiserror::Error;

use crate::symcore::Partition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("expected {expected} evaluation points, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("oracle is missing values for partitions {}", fmt_partitions(.0))]
    MissingOracle(Vec<Partition>),
    #[error("moment table does not cover arc {arc} power {k}")]
    MissingMoment { arc: usize, k: usize },
    #[error("quadrature did not reach tolerance: achieved error {achieved:e} > {requested:e} ({context})")]
    Quadrature {
        achieved: f64,
        requested: f64,
        context: String,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("complexity cap exceeded: {0}")]
    Cap(String),
    #[error("inadmissible deformation: {0}")]
    Deformation(String),
    #[error("coincident saddle points at r = {r}; try a larger r")]
    CoincidentSaddles { r: u32 },
    #[error("malformed input: {0}")]
    Parse(String),
}

fn fmt_partitions(ps: &[Partition]) -> String {
    ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
}
