//! CSV path files: one row per time-step, one column per state value, with
//! an optional `# k=K` first line declaring the width.

use std::path::Path as FsPath;

use crate::error::{Error, Result};
use crate::logic::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct PathFile {
    /// Width from the `# k=K` line, if present.
    pub declared_width: Option<usize>,
    pub path: Path,
}

impl PathFile {
    /// Declared width, else the width of the rows, else `None` for an
    /// empty file without a header.
    pub fn width(&self) -> Option<usize> {
        self.declared_width
            .or_else(|| (!self.path.is_empty()).then(|| self.path.width()))
    }
}

fn declared_width(text: &str) -> Result<Option<usize>> {
    let Some(first) = text.lines().next() else {
        return Ok(None);
    };
    let Some(rest) = first.trim().strip_prefix('#') else {
        return Ok(None);
    };
    let Some(k) = rest.trim().strip_prefix("k=") else {
        return Ok(None);
    };
    k.trim()
        .parse()
        .map(Some)
        .map_err(|_| Error::BadValue {
            row: 1,
            message: format!("bad width declaration {:?}", first.trim()),
        })
}

pub fn parse_path(text: &str) -> Result<PathFile> {
    let declared = declared_width(text)?;
    let mut width = declared;
    let mut values = Vec::new();
    for (line_index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line_index + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found: fields.len(),
            });
        }
        for field in fields {
            let v: f64 = field.parse().map_err(|_| Error::BadValue {
                row,
                message: format!("{field:?} is not a number"),
            })?;
            values.push(v);
        }
    }
    let path = Path::from_flat(width.unwrap_or(0), values)?;
    Ok(PathFile {
        declared_width: declared,
        path,
    })
}

pub fn read_path(file: &FsPath) -> Result<PathFile> {
    parse_path(&std::fs::read_to_string(file)?)
}

/// Renders a path in the same format, values in shortest round-trip form.
pub fn format_path(p: &Path) -> String {
    let mut out = format!("# k={}\n", p.width());
    for state in p.states() {
        let row: Vec<String> = state.iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
