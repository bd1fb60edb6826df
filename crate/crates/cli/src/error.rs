use crate::config::Diagnostic;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration is not runnable:\n{}", render(.0))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Simulation(#[from] dirac_qca_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

fn render(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    /// 2 for bad input, 3 for simulations stopped by a runtime check, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use dirac_qca_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Invalid(_) => 2,
            CliError::Simulation(
                E::Leakage { .. }
                | E::Inconclusive(_)
                | E::InsufficientSignal { .. }
                | E::Resolution { .. },
            ) => 3,
            CliError::Simulation(_) => 2,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}
