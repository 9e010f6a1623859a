use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dims(String),
    #[error("invalid grid spec: {0}")]
    Grid(String),
    #[error("field does not match grid: {0}")]
    Mismatch(String),
    #[error("degree {degree} is not resolvable: {reason}")]
    Unresolvable { degree: usize, reason: String },
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: String, reason: String },
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("bad value for config key `{key}`: {reason}")]
    BadKey { key: String, reason: String },
    #[error("dilation ratio {0} is not admissible for this grid")]
    Inadmissible(f64),
    #[error("truncation L = {l} leaves tail {tail:.3e} above tolerance {tol:.3e}")]
    Truncation { l: usize, tail: f64, tol: f64 },
    #[error("insufficient padding: boundary energy fraction {0:.3e}")]
    Padding(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("empty sample set")]
    EmptySamples,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &str, reason: impl Into<String>) -> Error {
    Error::Param { name: name.to_string(), reason: reason.into() }
}
