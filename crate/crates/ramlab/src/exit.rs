//! Exit-code contract and the error type carried to `main`.

use std::fmt;

use ramlab_core::Error;

/// Process exit status of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitKind {
    Success = 0,
    VerificationFailure = 1,
    InputError = 2,
    PrecisionFailure = 3,
}

impl ExitKind {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Classifies a library error.
    pub fn of(e: &Error) -> ExitKind {
        match e {
            Error::NotConverged(_) | Error::PrecisionTooSmall(_) | Error::NotInvertibleAtPrecision => {
                ExitKind::PrecisionFailure
            }
            Error::InvalidSpec(_)
            | Error::NonEisenstein(_)
            | Error::Parse(_)
            | Error::ReducibleUnramifiedStep
            | Error::PrecisionTooLarge(_)
            | Error::MissingWeight(_)
            | Error::ParameterOutOfRange(_)
            | Error::UnknownLemma(_)
            | Error::FieldMismatch(_)
            | Error::ZeroPolynomial => ExitKind::InputError,
            _ => ExitKind::VerificationFailure,
        }
    }
}

/// A failed command: its exit status and a diagnostic for stderr.
#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> CliError {
        CliError { kind: ExitKind::InputError, message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> CliError {
        CliError { kind: ExitKind::VerificationFailure, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError { kind: ExitKind::of(&e), message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
