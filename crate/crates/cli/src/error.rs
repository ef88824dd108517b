use kendall_renewal::Error;
use thiserror::Error as ThisError;

/// Exit status for a run whose checks did not all pass.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Failures of a CLI run, each with its own exit code.
#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Library(#[from] Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Library(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Library(e) => library_exit_code(e),
        }
    }

    /// The single machine-parsable line printed on stderr.
    pub fn line(&self) -> String {
        let msg = match self {
            CliError::Library(e) => e.message().to_string(),
            other => other.to_string(),
        };
        let msg = msg.replace('\n', " ");
        format!("error kind={} msg={}", self.kind(), msg.trim())
    }
}

fn library_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) => 10,
        Error::InvalidInput(_) => 11,
        Error::UnknownDistribution(_) => 12,
        Error::IntegrationFailure(_) => 13,
        Error::Divergence(_) => 14,
        Error::Domain(_) => 15,
        Error::DegenerateState(_) => 16,
        Error::CapExceeded(_) => 17,
        Error::Runaway(_) => 18,
        Error::OutOfScope(_) => 19,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct() {
        let all = [
            Error::InvalidParameter(String::new()),
            Error::InvalidInput(String::new()),
            Error::UnknownDistribution(String::new()),
            Error::IntegrationFailure(String::new()),
            Error::Divergence(String::new()),
            Error::Domain(String::new()),
            Error::DegenerateState(String::new()),
            Error::CapExceeded(String::new()),
            Error::Runaway(String::new()),
            Error::OutOfScope(String::new()),
        ];
        let mut codes: Vec<i32> = all.iter().map(library_exit_code).collect();
        codes.extend([EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_IO]);
        let n = codes.len();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), n);
    }

    #[test]
    fn line_is_single() {
        let e = CliError::Usage("bad\nflag".into());
        assert_eq!(e.line(), "error kind=usage msg=bad flag");
    }
}
