use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("numeric abort in {panel} (seed {seed}, sample {sample}): {source}")]
    Numeric {
        panel: String,
        seed: u64,
        sample: u32,
        #[source]
        source: viable_sde::Error,
    },
    #[error("{0} assertion(s) failed")]
    Assertions(usize),
    #[error(transparent)]
    Core(#[from] viable_sde::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 0 success, 1 assertion failure, 2 config error, 3 numeric abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertions(_) => 1,
            CliError::Numeric { .. } => 3,
            CliError::Core(viable_sde::Error::NumericAbort { .. } | viable_sde::Error::StepSizeUnderflow { .. }) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
