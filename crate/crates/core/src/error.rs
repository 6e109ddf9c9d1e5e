use thiserror::Error;

/// Errors raised by the solver stack. Every variant names the module that
/// produced it so command-line reports can point at the failing site.
#[derive(Debug, Error)]
pub enum Error {
    #[error("[{module}] configuration error: {msg}")]
    Config { module: &'static str, msg: String },

    #[error("[{module}] domain error: {msg}")]
    Domain { module: &'static str, msg: String },

    #[error("[{module}] unsupported: {msg}")]
    Unsupported { module: &'static str, msg: String },

    #[error("[{module}] numerical failure at {site}: {msg}")]
    Numerical {
        module: &'static str,
        site: String,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Config {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn domain(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn unsupported(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Unsupported {
            module,
            msg: msg.into(),
        }
    }

    pub(crate) fn numerical(
        module: &'static str,
        site: impl Into<String>,
        msg: impl Into<String>,
    ) -> Self {
        Error::Numerical {
            module,
            site: site.into(),
            msg: msg.into(),
        }
    }

    /// Process exit status used by the command-line front end:
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
