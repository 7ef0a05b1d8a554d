use thiserror::Error;

/// Failures while evaluating a field or operator at a point.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("singular point: {0}")]
    Singular(String),
    #[error("jet order {requested} exceeds cap {cap}")]
    OrderCap { requested: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Errors from the expression parser, with a byte offset into the input.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdent { pos: usize, name: String },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("operator order {order} exceeds cap {cap}")]
    OrderOverflow { order: usize, cap: usize },
    #[error("operands live on different spaces: {0}")]
    SpaceMismatch(String),
    #[error("reduction invalid: coefficients depend on dropped coordinate `{coord}` (|∂| = {magnitude:e})")]
    Dependence { coord: String, magnitude: f64 },
    #[error("evaluation failed at point {point:?}: {source}")]
    AtPoint { point: Vec<f64>, source: EvalError },
    #[error("all {tried} sample candidates were excluded")]
    AllExcluded { tried: usize },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("scenario error at line {line}: {msg}")]
    Scenario { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
