use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("regular branch at z=0 undefined: beta = {0} is a negative integer")]
    BranchUnavailable(Complex64),

    #[error("error control failed near x = {at}: {reason}")]
    DidNotConverge { at: f64, reason: String },

    #[error("evaluation requested at the singular point {0}")]
    SingularPoint(f64),

    #[error("{0}")]
    OutOfDomain(String),

    #[error("spheroidal form needs alpha != 0 (no irregular-point scaling)")]
    NotIrregular,

    #[error("r^2 f(r) vanishes at r = {0}")]
    DivisionBySingularArea(f64),

    #[error("integration interval [{from}, {to}] contains a singular point")]
    IntervalContainsSingularity { from: f64, to: f64 },

    #[error("finite-difference step {h} exceeds a tenth of the position {at}")]
    StepTooLarge { h: f64, at: f64 },

    #[error("r = {0} lies on a horizon")]
    OnHorizon(f64),

    #[error("order |n| = {order} exceeds degree l = {degree}")]
    OrderExceedsDegree { degree: u32, order: u32 },

    #[error("theta = {theta} is within 10 h of a pole (h = {h})")]
    TooCloseToPole { theta: f64, h: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("refusing to emit an empty curve")]
    EmptyCurve,

    #[error("sample {index} at {coordinate}: {source}")]
    AtSample {
        index: usize,
        coordinate: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable code, used in `ERROR <code>: <message>` lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::BranchUnavailable(_) => "BRANCH_UNAVAILABLE",
            Error::DidNotConverge { .. } => "DID_NOT_CONVERGE",
            Error::SingularPoint(_) => "SINGULAR_POINT",
            Error::OutOfDomain(_) => "OUT_OF_DOMAIN",
            Error::NotIrregular => "NOT_IRREGULAR",
            Error::DivisionBySingularArea(_) => "DIVISION_BY_SINGULAR_AREA",
            Error::IntervalContainsSingularity { .. } => "INTERVAL_CONTAINS_SINGULARITY",
            Error::StepTooLarge { .. } => "STEP_TOO_LARGE",
            Error::OnHorizon(_) => "ON_HORIZON",
            Error::OrderExceedsDegree { .. } => "ORDER_EXCEEDS_DEGREE",
            Error::TooCloseToPole { .. } => "TOO_CLOSE_TO_POLE",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::EmptyCurve => "EMPTY_CURVE",
            Error::AtSample { source, .. } => source.code(),
            Error::Io(_) => "IO_ERROR",
            Error::Config(_) => "CONFIG_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
