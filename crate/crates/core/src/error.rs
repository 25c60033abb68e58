use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radii {0:?}: every radius must be finite and nonnegative")]
    InvalidRadii([f64; 3]),

    #[error("singular configuration: particles {0} and {1} coincide")]
    SingularConfiguration(usize, usize),

    #[error("degenerate radii: {0}")]
    DegenerateRadii(String),

    #[error("equal radii {0}: critical angle undefined")]
    EqualRadii(f64),

    #[error("every angular configuration has a coincident pair for radii {0:?}")]
    AllInfinite([f64; 3]),

    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("degenerate tertile: {0}")]
    DegenerateTertile(String),

    #[error("problem size {n} exceeds the limit {limit} of method '{method}'")]
    SizeExceeded {
        method: String,
        n: usize,
        limit: usize,
    },

    #[error("every coupling has infinite cost")]
    InfeasibleCost,

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("alignment condition violated at {} samples", .0.len())]
    ConditionViolated(Vec<f64>),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("gate failed: {0}")]
    GateFailed(String),

    #[error("h profile is not positive on (0, s1]: {0}")]
    JetNotPositive(String),

    #[error("tail map is not increasing: {0}")]
    TailNotMonotone(String),

    #[error("no violation found: {0}")]
    NotFound(String),

    #[error("c = c_pi region not found: {0}")]
    RegionEmpty(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Input or usage problems, as opposed to a mathematical gate or check failing.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidRadii(_)
                | Error::InvalidDensity(_)
                | Error::InvalidArgument(_)
                | Error::UnknownStrategy { .. }
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}
