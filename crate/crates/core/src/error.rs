use crate::space::PointId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown point id {0}")]
    UnknownPoint(PointId),

    #[error("invalid input: {0}")]
    Input(String),

    /// An axiom of the space fails; `axiom` names it, e.g. `(H1)(a)`.
    #[error("axiom {axiom} violated: {detail}")]
    Axiom { axiom: &'static str, detail: String },

    /// A parameter inequality fails; `constraint` names it, e.g. `delta 6`.
    #[error("configuration error, {constraint} fails: {detail}")]
    Config { constraint: String, detail: String },

    #[error("out of range: {0}")]
    Range(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("{what} has {size} points, cap is {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }

    /// True for errors that signal a failed exact check rather than bad input.
    pub fn is_check_failure(&self) -> bool {
        matches!(
            self,
            Error::Axiom { .. } | Error::Construction(_) | Error::Config { .. }
        )
    }
}
