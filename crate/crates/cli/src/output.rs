use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;

use crate::Format;

pub const OUT_DIR_ENV: &str = "FFDEF_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Malformed flags or unparsable input; exit code 2.
    Usage(String),
    /// Well-formed input the computation rejects; exit code 1.
    Domain(String),
}

impl CliError {
    pub fn domain(e: impl ToString) -> CliError {
        CliError::Domain(e.to_string())
    }

    pub fn usage(e: impl ToString) -> CliError {
        CliError::Usage(e.to_string())
    }

    pub fn report(&self) -> ExitCode {
        let (kind, message, code) = match self {
            CliError::Usage(m) => ("usage", m, 2),
            CliError::Domain(m) => ("domain", m, 1),
        };
        let body = serde_json::json!({ "error": kind, "message": message });
        eprintln!("{body}");
        ExitCode::from(code)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Domain(format!("i/o error: {e}"))
    }
}

pub struct Sink {
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

impl Sink {
    pub fn new(format: Format, out: Option<PathBuf>) -> Result<Sink, CliError> {
        Ok(Sink { format, out: out.as_deref().map(resolve) })
    }

    pub fn write_raw(&self, bytes: &[u8]) -> Result<(), CliError> {
        match &self.out {
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                fs::write(path, bytes)?;
            }
            None => {
                let mut stdout = io::stdout().lock();
                match stdout.write_all(bytes).and_then(|()| stdout.flush()) {
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                    other => other?,
                }
            }
        }
        Ok(())
    }

    /// Writes `text` or the JSON form of `value`, depending on the format.
    pub fn emit<T: Serialize>(&self, text: impl FnOnce() -> String, value: &T) -> Result<(), CliError> {
        match self.format {
            Format::Text => {
                let mut s = text();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                self.write_raw(s.as_bytes())
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(value).map_err(CliError::domain)?;
                s.push('\n');
                self.write_raw(s.as_bytes())
            }
            Format::Csv => Err(CliError::usage("--format csv is only available for `sweep`")),
        }
    }
}

/// Reads `@path` arguments from disk; other values are used verbatim.
pub fn read_arg(arg: &str) -> Result<String, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}
