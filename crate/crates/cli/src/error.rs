use std::path::Path;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Io(String),

    #[error("missing artifacts: {}", .0.join(", "))]
    Missing(Vec<String>),

    #[error(transparent)]
    Core(#[from] chassis_ris::Error),
}

impl CliError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    /// Process exit status: 1 I/O, 2 configuration, 3 numerical, 4 guard refusal.
    pub fn exit_code(&self) -> i32 {
        use chassis_ris::Error as E;
        match self {
            CliError::Io(_) | CliError::Missing(_) => 1,
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::Io { .. } | E::Load { .. } | E::Parse { .. } => 1,
                E::Domain(_) | E::Geometry(_) | E::Dataset(_) | E::MaskUnavailable(_) => 2,
                E::Numerical { .. } | E::ZeroEnergy { .. } | E::NoSensitiveBand => 3,
                E::GuardRefused { .. } => 4,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "io",
            2 => "config",
            3 => "numerical",
            _ => "guard",
        }
    }

    /// Single-line JSON form written to standard error.
    pub fn to_json_line(&self) -> String {
        let mut value = json!({
            "error": self.kind(),
            "code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Missing(files) = self {
            value["missing"] = json!(files);
        }
        value.to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
