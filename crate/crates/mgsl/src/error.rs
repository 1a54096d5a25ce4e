pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-physical state: {0}")]
    NonPhysicalState(String),
    #[error("eigendecomposition failure: {0}")]
    EigendecompositionFailure(String),
    #[error("singular diagonal block{}", cell_suffix(.0))]
    SingularDiagonal(Option<(usize, usize)>),
    #[error("singular preconditioner symbol")]
    SingularPreconditioner,
    #[error("singular stage matrix")]
    SingularStageMatrix,
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("eigenvalue iteration did not converge")]
    NonConvergence,
    #[error("diverged state: {0}")]
    DivergedState(String),
    #[error("config error: {0}")]
    Config(String),
}

fn cell_suffix(cell: &Option<(usize, usize)>) -> String {
    match cell {
        Some((i, j)) => format!(" at cell ({i}, {j})"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit code for the CLI: 2 for config/usage problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownScheme(_) => 2,
            _ => 3,
        }
    }
}
