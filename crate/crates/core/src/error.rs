use std::fmt;

/// Errors reported by the fitting, translation and solving routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Dimension count outside the supported range (e.g. rotations need n >= 2).
    InvalidDimension(String),
    /// Inconsistent or malformed arguments (length mismatches, odd plane counts, ...).
    Parameter(String),
    /// A hyperplane whose construction is numerically degenerate
    /// (zero normal, or a model plane that is vertical in y).
    DegeneratePlane(String),
    /// A fitted model contains a degenerate plane; carries the offending pair index.
    DegenerateModel { pair: usize, detail: String },
    /// Objective value is not finite at the starting point of a minimization.
    InvalidStart(String),
    /// Not enough data points to determine the requested number of planes.
    Underdetermined { needed: usize, got: usize },
    /// The band around the interface guess selects too few data points.
    BandTooNarrow { selected: usize, needed: usize },
    /// A data point evaluated outside the covered domain.
    Domain(String),
    /// Big-M values require finite variable bounds.
    UnboundedBigM(String),
    /// Variable name collision or missing name during problem assembly.
    Naming(String),
    /// A constraint references an undeclared variable, or the problem is
    /// otherwise structurally invalid.
    InvalidProblem(String),
    /// The requested MILP formulation does not apply to this triangulation.
    Formulation(String),
    /// Numerical breakdown inside the simplex or branch-and-bound loop.
    SolverFailure(String),
    /// Malformed model, dataset or LP text.
    Format(String),
    /// Underlying I/O failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension(msg) => write!(f, "invalid dimension: {msg}"),
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DegeneratePlane(msg) => write!(f, "degenerate plane: {msg}"),
            Error::DegenerateModel { pair, detail } => {
                write!(f, "degenerate model at plane pair {pair}: {detail}")
            }
            Error::InvalidStart(msg) => write!(f, "invalid starting point: {msg}"),
            Error::Underdetermined { needed, got } => {
                write!(f, "underdetermined fit: need at least {needed} data points, got {got}")
            }
            Error::BandTooNarrow { selected, needed } => {
                write!(f, "band too narrow: selected {selected} points, need {needed}")
            }
            Error::Domain(msg) => write!(f, "outside domain: {msg}"),
            Error::UnboundedBigM(msg) => write!(f, "unbounded big-M: {msg}"),
            Error::Naming(msg) => write!(f, "naming error: {msg}"),
            Error::InvalidProblem(msg) => write!(f, "invalid problem: {msg}"),
            Error::Formulation(msg) => write!(f, "formulation error: {msg}"),
            Error::SolverFailure(msg) => write!(f, "solver failure: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
