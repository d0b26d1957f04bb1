use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const MALFORMED_INPUT: i32 = 1;
    pub const SINGULAR: i32 = 2;
    pub const BOUND_VIOLATED: i32 = 3;
    pub const ENUMERATION_LIMIT: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] condlab::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use condlab::Error::*;
        match self {
            CliError::Input(_) => exit::MALFORMED_INPUT,
            CliError::Core(e) => match e {
                SingularMatrix { .. } | ZeroDiagonal { .. } | DeltaTooLarge { .. } => {
                    exit::SINGULAR
                }
                DimensionTooLarge { .. } => exit::ENUMERATION_LIMIT,
                _ => exit::MALFORMED_INPUT,
            },
        }
    }
}
