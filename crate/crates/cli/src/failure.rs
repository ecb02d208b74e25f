//! The two ways a scenario can fail, and their exit codes.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad configuration or inputs, caught before any work is done. Exit 1.
    Validation(String),
    /// Numerical or I/O failure while running. Exit 2.
    Runtime(String),
}

pub type Outcome<T> = Result<T, Failure>;

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid scenario: {m}"),
            Failure::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

pub fn validation(e: emlab::Error) -> Failure {
    Failure::Validation(e.to_string())
}

pub fn runtime(e: emlab::Error) -> Failure {
    Failure::Runtime(e.to_string())
}
