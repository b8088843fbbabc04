use thiserror::Error;

use crate::fields::parse::SyntaxError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("{0}")]
    Syntax(SyntaxError),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("degree overflow: degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("wrong arity: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("form vanishes at the point")]
    FormVanishes,
    #[error("not contact at p")]
    NotContact,
    #[error("complement is not transverse: {0}")]
    NotTransverse(String),
    #[error("pairing is degenerate")]
    DegeneratePairing,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not singular: {0}")]
    NotSingular(String),
    #[error("non-generic singular structure: {0}")]
    NonGeneric(String),
    #[error("empty grid")]
    EmptyGrid,
    #[error("perturbation does not clear singularity at 0")]
    PerturbationInsufficient,
    #[error("perturbation sup-norm {sup} exceeds declared bound {bound}")]
    PerturbationTooLarge { sup: f64, bound: f64 },
    #[error("line field not positively transverse: {0}")]
    LineFieldNotTransverse(String),
    #[error("not a CCL form: failed {0:?}")]
    NotCcl(Vec<String>),
    #[error("co-orientation mismatch: {0}")]
    CoOrientationMismatch(String),
    #[error("step size underflow at parameter {0}")]
    StepUnderflow(f64),
    #[error(
        "not coisotropic at p = {:?} (foliation residual {:e}; {} failing samples)",
        .points[0], .residuals[0], .points.len()
    )]
    NotCoisotropic {
        points: Vec<Vec<f64>>,
        residuals: Vec<f64>,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl From<SyntaxError> for Error {
    fn from(e: SyntaxError) -> Self {
        Error::Syntax(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
