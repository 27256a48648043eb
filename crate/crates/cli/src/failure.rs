use std::fmt;
use std::process::ExitCode;

/// An error tagged with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: Code,
    pub error: anyhow::Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    /// Bad arguments, config, or input data.
    Usage = 2,
    /// The command failed while running (I/O and the like).
    Runtime = 3,
    /// Nothing to evaluate.
    Empty = 4,
}

impl Failure {
    pub fn new(code: Code, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code as u8)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)
    }
}

pub trait Classify<T> {
    fn or_code(self, code: Code) -> Result<T, Failure>;

    fn usage(self) -> Result<T, Failure>
    where
        Self: Sized,
    {
        self.or_code(Code::Usage)
    }

    fn runtime(self) -> Result<T, Failure>
    where
        Self: Sized,
    {
        self.or_code(Code::Runtime)
    }
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_code(self, code: Code) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(code, e))
    }
}
