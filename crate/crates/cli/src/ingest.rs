use std::path::Path;

use dpm_seq::Dataset;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Header {
    /// Treat the first data line as a header if any field fails to parse.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IngestOptions {
    pub header: Header,
    /// The last column holds integer labels.
    pub labels: bool,
}

pub fn ingest(path: &Path, options: IngestOptions) -> Result<Dataset, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, options)
}

/// Parses comma-delimited observations. Blank lines and lines starting with
/// `#` are skipped.
pub fn parse(text: &str, options: IngestOptions) -> Result<Dataset, CliError> {
    let mut width: Option<usize> = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut header_pending = options.header != Header::Absent;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if header_pending {
            header_pending = false;
            let numeric = fields.iter().all(|f| f.parse::<f64>().is_ok());
            if options.header == Header::Present || !numeric {
                width = Some(fields.len());
                continue;
            }
        }
        match width {
            Some(w) if w != fields.len() => {
                return Err(CliError::input(
                    line,
                    format!("expected {w} columns, found {}", fields.len()),
                ))
            }
            _ => width = Some(fields.len()),
        }
        let data_cols = if options.labels { fields.len() - 1 } else { fields.len() };
        if data_cols == 0 {
            return Err(CliError::input(line, "no data columns".to_string()));
        }
        for f in &fields[..data_cols] {
            let v: f64 = f
                .parse()
                .map_err(|_| CliError::input(line, format!("non-numeric field `{f}`")))?;
            if !v.is_finite() {
                return Err(CliError::input(line, format!("non-finite field `{f}`")));
            }
            values.push(v);
        }
        if options.labels {
            let f = fields[data_cols];
            labels.push(
                f.parse::<i64>()
                    .map_err(|_| CliError::input(line, format!("label `{f}` is not an integer")))?,
            );
        }
    }
    let dim = match width {
        Some(w) if options.labels => w - 1,
        Some(w) => w,
        None => 1,
    };
    let data = Dataset::from_rows(dim, values)?;
    if options.labels {
        Ok(data.with_labels(labels)?)
    } else {
        Ok(data)
    }
}
