use thiserror::Error;

use crate::C64;

/// Failure modes shared by every evaluator in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite operand")]
    NonFiniteOperand,
    #[error("no admissible sample")]
    NoAdmissibleSample,
    #[error("quadrature stall: last estimates {last} and {previous}")]
    QuadratureStall { last: C64, previous: C64 },
    #[error("nome out of range")]
    NomeOutOfRange,
    #[error("theta argument zero")]
    ThetaArgumentZero,
    #[error("evaluation at pole")]
    EvaluationAtPole,
    #[error("degenerate nodes")]
    DegenerateNodes,
    #[error("contour too close to zero/pole (winding estimate {0})")]
    ContourTooClose(f64),
    #[error("denominator zero at k={0}")]
    DenominatorZero(usize),
    #[error("gamma pole")]
    GammaPole,
    #[error("parameter outside disk")]
    ParameterOutsideDisk,
    #[error("forbidden parameter product t{0}*t{1}")]
    ForbiddenProduct(usize, usize),
    #[error("integrand pole")]
    IntegrandPole,
    #[error("residue circle too large, suggested radius {suggested}")]
    ResidueCircleTooLarge { suggested: f64 },
    #[error("weight pole")]
    WeightPole,
    #[error("inadmissible heights")]
    InadmissibleHeights,
    #[error("no nondegenerate draw after {0} attempts")]
    DegenerateDraw(usize),
}

impl Error {
    /// Errors caused by an unlucky parameter draw rather than bad input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::ThetaArgumentZero
                | Error::EvaluationAtPole
                | Error::DegenerateNodes
                | Error::DenominatorZero(_)
                | Error::GammaPole
                | Error::ForbiddenProduct(..)
                | Error::IntegrandPole
                | Error::WeightPole
                | Error::ContourTooClose(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
