//! Instance I/O: CVRP source parsing, CCSP instance generation, the
//! self-contained CCSP and MDCTVRP instance formats, and solution files.
//!
//! All formats are UTF-8 with LF line endings and 1-based vertex ids on
//! disk; the grammar is documented in `docs/formats.md`.

mod ccsp_format;
mod cvrp;
mod generate;
mod mdctvrp_format;
mod solution_format;

pub use ccsp_format::{read_ccsp, write_ccsp};
pub use cvrp::{parse_cvrp, CvrpSource};
pub use generate::{generate_ccsp, GenerationParams};
pub use mdctvrp_format::{read_mdctvrp, write_mdctvrp};
pub use solution_format::{read_solution, write_solution};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing {0}")]
    MissingSection(String),
    #[error("{0}")]
    Header(String),
    #[error("cannot generate instance: {0}")]
    Generation(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IoError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Line-oriented scanner over TSPLIB-style files: `KEY : VALUE` headers
/// followed by named sections of whitespace-separated records.
struct Scanner<'a> {
    /// (1-based line number, trimmed content), blanks skipped.
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { lines, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.peek();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    /// Split a `KEY : VALUE` header; returns None when the line is a bare
    /// keyword (a section name or EOF).
    fn header_of(line: &'a str) -> Option<(&'a str, &'a str)> {
        line.split_once(':')
            .map(|(k, v)| (k.trim(), v.trim()))
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T, IoError> {
    token
        .parse()
        .map_err(|_| IoError::at(line, format!("malformed {what}: `{token}`")))
}
