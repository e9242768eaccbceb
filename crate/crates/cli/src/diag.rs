//! Configuration errors with a machine-readable class and file/line context.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    /// Malformed JSON or a field of the wrong type.
    Parse,
    UnknownName,
    InvalidDims,
    MatrixFileShape,
    /// Any other out-of-range parameter.
    InvalidConfig,
    Io,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigError {
    pub class: ErrorClass,
    pub message: String,
    pub path: PathBuf,
    pub line: Option<usize>,
}

impl ConfigError {
    pub fn new(class: ErrorClass, message: impl Into<String>, path: &Path, line: Option<usize>) -> Self {
        Self { class, message: message.into(), path: path.to_path_buf(), line }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": self })
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.path.display(), l, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Line lookup in the raw config text, so semantic errors found after
/// deserialization can still point at a line.
pub struct SourceMap<'a> {
    text: &'a str,
}

impl<'a> SourceMap<'a> {
    pub fn new(text: &'a str) -> Self {
        Self { text }
    }

    fn line_of(&self, byte: usize) -> usize {
        self.text[..byte].matches('\n').count() + 1
    }

    /// First line at or after byte `from` containing `needle`.
    fn find_from(&self, from: usize, needle: &str) -> Option<usize> {
        self.text.get(from..)?.find(needle).map(|i| i + from)
    }

    /// Byte offset of the `idx`-th task object (by its `"task"` key).
    fn task_start(&self, idx: usize) -> Option<usize> {
        let mut pos = self.find_from(0, "\"tasks\"")?;
        for k in 0..=idx {
            pos = self.find_from(pos + usize::from(k > 0), "\"task\"")?;
        }
        Some(pos)
    }

    pub fn task_line(&self, idx: usize) -> Option<usize> {
        self.task_start(idx).map(|b| self.line_of(b))
    }

    /// Line of `needle` inside task `idx`, falling back to the task itself.
    pub fn in_task(&self, idx: usize, needle: &str) -> Option<usize> {
        let start = self.task_start(idx)?;
        let end = self.task_start(idx + 1).unwrap_or(self.text.len());
        match self.find_from(start, needle) {
            Some(b) if b < end => Some(self.line_of(b)),
            _ => Some(self.line_of(start)),
        }
    }

    /// Line where the object keyed `name` is defined (`"name": ...`).
    pub fn definition(&self, name: &str) -> Option<usize> {
        let quoted = format!("\"{name}\"");
        let mut from = 0;
        while let Some(b) = self.find_from(from, &quoted) {
            let rest = self.text[b + quoted.len()..].trim_start();
            if rest.starts_with(':') {
                return Some(self.line_of(b));
            }
            from = b + 1;
        }
        None
    }

    /// Line of the first use of `name` as a string value (not as a key).
    pub fn reference(&self, name: &str) -> Option<usize> {
        let quoted = format!("\"{name}\"");
        let mut from = 0;
        while let Some(b) = self.find_from(from, &quoted) {
            let rest = self.text[b + quoted.len()..].trim_start();
            if !rest.starts_with(':') {
                return Some(self.line_of(b));
            }
            from = b + 1;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "{\n  \"sequences\": {\"a\": {\"kind\": \"identity\"}},\n  \"tasks\": [\n    {\"task\": \"pa\",\n     \"seq\": \"a\", \"dims\": [4]},\n    {\"task\": \"qw\", \"seq\": \"b\",\n     \"dims\": [8, 4]}\n  ]\n}\n";

    #[test]
    fn lines_found() {
        let m = SourceMap::new(SRC);
        assert_eq!(m.task_line(0), Some(4));
        assert_eq!(m.task_line(1), Some(6));
        assert_eq!(m.in_task(1, "\"dims\""), Some(7));
        assert_eq!(m.in_task(0, "\"dims\""), Some(5));
        assert_eq!(m.definition("a"), Some(2));
        assert_eq!(m.reference("b"), Some(6));
        assert_eq!(m.reference("zzz"), None);
    }

    #[test]
    fn error_json_shape() {
        let e = ConfigError::new(ErrorClass::UnknownName, "no sequence `b`", Path::new("c.json"), Some(6));
        let v = e.to_json();
        assert_eq!(v["error"]["class"], "unknown_name");
        assert_eq!(v["error"]["line"], 6);
        assert_eq!(e.to_string(), "c.json:6: no sequence `b`");
    }
}
