use std::path::Path;

use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, configuration, or output location.
    Usage(String),
    /// A computation failed or produced non-finite output.
    Numeric(String),
    /// Anything else that went wrong after validation.
    Failure(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Failure(format!("{}: {e}", path.display()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numeric(_) => "numeric",
            CliError::Failure(_) => "failure",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Failure(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Failure(_) => 3,
        }
    }

    pub fn record(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.message() } })
    }
}

impl From<wishart_hs::Error> for CliError {
    fn from(e: wishart_hs::Error) -> Self {
        use wishart_hs::Error as E;
        match e {
            E::HermiticityViolation { .. } | E::ConvergenceFailure { .. } | E::NonFinite { .. } | E::DegenerateSample => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub fn finite(what: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Numeric(format!("{what} evaluated to {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        let e: CliError = wishart_hs::Error::ConvergenceFailure { sweeps: 100, off_norm: 1.0 }.into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = wishart_hs::Error::SpecError("x".into()).into();
        assert_eq!(e.exit_code(), 2);
        assert_eq!(finite("v", f64::NAN).unwrap_err().exit_code(), 3);
        assert_eq!(CliError::Usage("u".into()).record()["error"]["kind"], "usage");
    }
}
