use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(&'static str),
    #[error("no real intersection (discriminant {discriminant:e})")]
    NoIntersection { discriminant: f64 },
    #[error("sphere centers are degenerate (projected denominator {denominator:e})")]
    DegenerateCenters { denominator: f64 },
    #[error("planes are parallel")]
    ParallelPlanes,
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("invalid links: {0}")]
    InvalidLinks(String),
    #[error("perturbed link {index} has non-positive length {length}")]
    NonPositiveResult { index: usize, length: f64 },
    #[error("outside the workspace: {0}")]
    OutOfWorkspace(String),
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),
    #[error("query ({x}, {y}) lies outside the field domain")]
    OutOfDomain { x: f64, y: f64 },
    #[error("zero-length normal vector")]
    ZeroNormal,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("line {line}: cannot parse `{token}`")]
    Parse { line: usize, token: String },
    #[error("line {line}: unsupported command `{code}`")]
    UnsupportedCommand { line: usize, code: String },
    #[error("command {index}: {source}")]
    Command { index: usize, source: Box<Error> },
    #[error("too many failed instances: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
