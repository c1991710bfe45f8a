use std::fmt;

use thiserror::Error;

/// Location an error originated from, written as `module::operation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Origin {
    pub module: &'static str,
    pub operation: &'static str,
}

impl Origin {
    pub const fn new(module: &'static str, operation: &'static str) -> Self {
        Self { module, operation }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.module, self.operation)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("[{origin}] parameter error: {message}")]
    Parameter { origin: Origin, message: String },

    #[error("[{origin}] shape error: expected {expected} coordinates, got {actual}")]
    Shape {
        origin: Origin,
        expected: usize,
        actual: usize,
    },

    #[error("[{origin}] evaluation error: {message}")]
    Evaluation { origin: Origin, message: String },

    #[error("[{origin}] degenerate input: {message}")]
    Degenerate { origin: Origin, message: String },

    #[error("[{origin}] divergent integral: {message}")]
    Divergence { origin: Origin, message: String },

    #[error("[{origin}] precondition failed: {message}")]
    Precondition { origin: Origin, message: String },

    #[error("[{origin}] estimation failed: {message}")]
    Estimation { origin: Origin, message: String },

    #[error("[cli::config] {message}")]
    Config { message: String },

    #[error("[cli::run] i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Error class used for CLI exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Configuration, parameter, shape or precondition problems.
    Input,
    /// Divergence, degenerate data or non-finite evaluation.
    Numerical,
}

impl Error {
    pub fn parameter(origin: Origin, message: impl Into<String>) -> Self {
        Error::Parameter {
            origin,
            message: message.into(),
        }
    }

    pub fn evaluation(origin: Origin, message: impl Into<String>) -> Self {
        Error::Evaluation {
            origin,
            message: message.into(),
        }
    }

    pub fn degenerate(origin: Origin, message: impl Into<String>) -> Self {
        Error::Degenerate {
            origin,
            message: message.into(),
        }
    }

    pub fn divergence(origin: Origin, message: impl Into<String>) -> Self {
        Error::Divergence {
            origin,
            message: message.into(),
        }
    }

    pub fn precondition(origin: Origin, message: impl Into<String>) -> Self {
        Error::Precondition {
            origin,
            message: message.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parameter { .. }
            | Error::Shape { .. }
            | Error::Precondition { .. }
            | Error::Config { .. }
            | Error::Io { .. } => ErrorClass::Input,
            Error::Evaluation { .. }
            | Error::Degenerate { .. }
            | Error::Divergence { .. }
            | Error::Estimation { .. } => ErrorClass::Numerical,
        }
    }

    /// Re-tags an error with a different origin, keeping its kind and message.
    pub fn with_origin(self, origin: Origin) -> Self {
        match self {
            Error::Parameter { message, .. } => Error::Parameter { origin, message },
            Error::Evaluation { message, .. } => Error::Evaluation { origin, message },
            Error::Degenerate { message, .. } => Error::Degenerate { origin, message },
            Error::Divergence { message, .. } => Error::Divergence { origin, message },
            Error::Precondition { message, .. } => Error::Precondition { origin, message },
            Error::Estimation { message, .. } => Error::Estimation { origin, message },
            Error::Shape {
                expected, actual, ..
            } => Error::Shape {
                origin,
                expected,
                actual,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
