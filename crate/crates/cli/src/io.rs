use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;
use xplab::report::Check;
use xplab::XpError;

/// Anything that ends in exit code 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{origin}: field `{field}`: {message}")]
    Json {
        origin: String,
        field: String,
        message: String,
    },

    #[error("{context}{source}")]
    Core { context: String, source: XpError },
}

impl From<XpError> for CliError {
    fn from(source: XpError) -> Self {
        CliError::Core {
            context: String::new(),
            source,
        }
    }
}

pub trait Context<T> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, XpError> {
    fn context(self, what: impl std::fmt::Display) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: format!("{what}: "),
            source,
        })
    }
}

/// Resolves input paths against a base directory (the batch file's).
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub base: Option<PathBuf>,
}

impl Inputs {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn read(&self, p: &Path) -> Result<String, CliError> {
        let path = self.resolve(p);
        fs::read_to_string(&path).map_err(|source| CliError::Io { path, source })
    }

    /// Parses a JSON file; errors name the offending field.
    pub fn load<T: DeserializeOwned>(&self, p: &Path) -> Result<T, CliError> {
        let text = self.read(p)?;
        parse_json(&text, &p.display().to_string())
    }

    /// `arg` is inline JSON when it starts with `{` or `[`, a path otherwise.
    pub fn inline_or_file<T: DeserializeOwned>(&self, arg: &str) -> Result<T, CliError> {
        let t = arg.trim_start();
        if t.starts_with('{') || t.starts_with('[') {
            parse_json(arg, "inline JSON")
        } else {
            self.load(Path::new(arg))
        }
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Json {
            origin: origin.to_string(),
            field: if field.is_empty() { ".".into() } else { field },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// The document every command writes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    pub config: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Rows for the optional CSV export.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn of_checks(checks: &[Check]) -> Self {
        Table {
            headers: [
                "index",
                "name",
                "lhs",
                "relation",
                "rhs",
                "pass",
                "applicable",
            ]
            .map(String::from)
            .to_vec(),
            rows: checks
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    vec![
                        (i + 1).to_string(),
                        c.name.clone(),
                        c.lhs.to_string(),
                        c.relation.to_string(),
                        c.rhs.to_string(),
                        c.pass.to_string(),
                        c.applicable.to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |source: std::io::Error| CliError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| io(e.into()))?;
        w.write_record(&self.headers).map_err(|e| io(e.into()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
