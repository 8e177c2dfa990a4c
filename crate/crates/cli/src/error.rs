use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(catpump::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Config { field, .. } => Some(field),
            _ => None,
        }
    }

    /// 2 for rejected configuration, 3 for numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    /// One `key=value` line for stderr.
    pub fn diagnostic(&self) -> String {
        match self {
            CliError::Config { field, message } => {
                format!("error kind=config field={field} message={message:?}")
            }
            CliError::Numerical(e) => format!("error kind=numerical message={:?}", e.to_string()),
            CliError::Io { path, source } => {
                format!("error kind=io path={path:?} message={:?}", source.to_string())
            }
        }
    }
}

impl From<catpump::Error> for CliError {
    fn from(e: catpump::Error) -> Self {
        if e.is_numerical() {
            return CliError::Numerical(e);
        }
        match &e {
            catpump::Error::InvalidParameter { name, .. } => CliError::config(*name, e.to_string()),
            _ => CliError::config("input", e.to_string()),
        }
    }
}
