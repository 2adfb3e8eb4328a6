use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed structured graph: {0}")]
    Structured(String),

    #[error("non-positive weight {value} on {what}")]
    NonPositiveWeight { what: String, value: f64 },

    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),

    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),

    #[error("self-loop at {0}")]
    SelfLoop(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("no edge between {0} and {1}")]
    NotAnEdge(String, String),

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("graph is disconnected: {unreached} of {total} vertices unreachable from {root}")]
    Disconnected {
        root: String,
        unreached: usize,
        total: usize,
    },

    #[error("vertex function has {got} values, graph has {expected} vertices")]
    Unbound { expected: usize, got: usize },

    #[error("vertex index {0} out of range")]
    VertexIndex(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("profile is not non-decreasing: f({t_next}) = {f_next} < f({t}) = {f}")]
    NonMonotone {
        t: f64,
        f: f64,
        t_next: f64,
        f_next: f64,
    },

    #[error("no admissible grid pairs in the requested interval")]
    EmptyGrid,

    #[error("time {t} falls outside the profile range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("test function is not positive at t = {t}, vertex {vertex}")]
    NonPositiveTestFunction { t: f64, vertex: usize },

    #[error("kernel tolerance too loose for the J-monotonicity check: coupled tolerance {0:e}")]
    ToleranceTooLoose(f64),

    #[error("radial function does not belong to the admissible class: {0}")]
    NotAdmissible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake-case name of the variant, for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Structured(_) => "structured",
            Error::NonPositiveWeight { .. } => "non_positive_weight",
            Error::DuplicateEdge(..) => "duplicate_edge",
            Error::DuplicateVertex(_) => "duplicate_vertex",
            Error::SelfLoop(_) => "self_loop",
            Error::UnknownVertex(_) => "unknown_vertex",
            Error::NotAnEdge(..) => "not_an_edge",
            Error::EmptyGraph => "empty_graph",
            Error::Disconnected { .. } => "disconnected",
            Error::Unbound { .. } => "unbound",
            Error::VertexIndex(_) => "vertex_index",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonMonotone { .. } => "non_monotone",
            Error::EmptyGrid => "empty_grid",
            Error::OutOfRange { .. } => "out_of_range",
            Error::NonPositiveTestFunction { .. } => "non_positive_test_function",
            Error::ToleranceTooLoose(_) => "tolerance_too_loose",
            Error::NotAdmissible(_) => "not_admissible",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
