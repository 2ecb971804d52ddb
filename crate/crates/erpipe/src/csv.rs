//! Strict RFC-4180 reader and writer. Unlike lenient readers, an unterminated
//! quote or stray quote inside an unquoted field is an error.

use std::path::Path;

use erpipe_core::dataset::{Dataset, Tuple};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("line {line}: unterminated quoted field")]
    UnterminatedQuote { line: usize },
    #[error("line {line}: unexpected character {found:?} after closing quote")]
    AfterQuote { line: usize, found: char },
    #[error("line {line}: quote inside unquoted field")]
    StrayQuote { line: usize },
    #[error("missing header row")]
    MissingHeader,
    #[error("duplicate header name {0:?}")]
    DuplicateHeader(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: usize, expected: usize, found: usize },
    #[error("id column {0:?} not in header")]
    UnknownIdColumn(String),
    #[error("line {line}: empty id")]
    EmptyId { line: usize },
    #[error(transparent)]
    Dataset(#[from] erpipe_core::Error),
}

/// A parsed record and the line it starts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub line: usize,
    pub fields: Vec<String>,
}

pub fn parse_records(text: &str) -> Result<Vec<Record>, CsvError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut records = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut record_line = 1;
    let mut at_field_start = true;

    while let Some(c) = chars.next() {
        match c {
            '"' if at_field_start => {
                let start = line;
                loop {
                    match chars.next() {
                        None => return Err(CsvError::UnterminatedQuote { line: start }),
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            field.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            field.push(ch);
                        }
                    }
                }
                match chars.peek() {
                    None | Some(',') | Some('\n') | Some('\r') => {}
                    Some(&found) => return Err(CsvError::AfterQuote { line, found }),
                }
                at_field_start = false;
            }
            '"' => return Err(CsvError::StrayQuote { line }),
            ',' => {
                fields.push(std::mem::take(&mut field));
                at_field_start = true;
            }
            '\r' if chars.peek() == Some(&'\n') => {}
            '\n' => {
                fields.push(std::mem::take(&mut field));
                records.push(Record {
                    line: record_line,
                    fields: std::mem::take(&mut fields),
                });
                line += 1;
                record_line = line;
                at_field_start = true;
            }
            _ => {
                field.push(c);
                at_field_start = false;
            }
        }
    }
    if !fields.is_empty() || !field.is_empty() || !at_field_start {
        fields.push(field);
        records.push(Record {
            line: record_line,
            fields,
        });
    }
    Ok(records)
}

/// Builds a dataset from CSV text. With `id_column` the named column supplies
/// tuple ids and is not an attribute; otherwise ids are 0-based row indices.
pub fn read_dataset(text: &str, dataset_id: &str, id_column: Option<&str>) -> Result<Dataset, CsvError> {
    let mut records = parse_records(text)?.into_iter();
    let header = records.next().ok_or(CsvError::MissingHeader)?.fields;
    for (i, name) in header.iter().enumerate() {
        if header[..i].contains(name) {
            return Err(CsvError::DuplicateHeader(name.clone()));
        }
    }
    let id_pos = match id_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CsvError::UnknownIdColumn(name.to_string()))?,
        ),
        None => None,
    };
    let attributes: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != id_pos)
        .map(|(_, h)| h.clone())
        .collect();
    let mut tuples = Vec::new();
    for (row, rec) in records.enumerate() {
        if rec.fields.len() != header.len() {
            return Err(CsvError::FieldCount {
                line: rec.line,
                expected: header.len(),
                found: rec.fields.len(),
            });
        }
        let id = match id_pos {
            Some(p) => {
                let id = rec.fields[p].trim();
                if id.is_empty() {
                    return Err(CsvError::EmptyId { line: rec.line });
                }
                id.to_string()
            }
            None => row.to_string(),
        };
        let cells: Vec<&String> = rec
            .fields
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != id_pos)
            .map(|(_, f)| f)
            .collect();
        tuples.push(Tuple::from_cells(id, &cells));
    }
    Ok(Dataset::new(dataset_id, attributes, tuples)?)
}

pub fn load_csv(path: &Path, id_column: Option<&str>) -> anyhow::Result<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let id = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    read_dataset(&text, &id, id_column).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn push_field(out: &mut String, field: &str) {
    if field.contains([',', '"', '\n', '\r']) || field.starts_with('\u{feff}') {
        out.push('"');
        out.push_str(&field.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(field);
    }
}

pub fn write_record<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_field(out, f.as_ref());
    }
    out.push('\n');
}

/// Serializes `dataset` with an optional leading id column. Missing values
/// become empty cells.
pub fn write_dataset(dataset: &Dataset, id_column: Option<&str>) -> Result<String, CsvError> {
    if let Some(name) = id_column {
        if dataset.attributes().iter().any(|a| a == name) {
            return Err(CsvError::DuplicateHeader(name.to_string()));
        }
    }
    let mut out = String::new();
    let mut header: Vec<&str> = id_column.into_iter().collect();
    header.extend(dataset.attributes().iter().map(String::as_str));
    write_record(&mut out, &header);
    for t in dataset.tuples() {
        let mut row: Vec<&str> = Vec::with_capacity(header.len());
        if id_column.is_some() {
            row.push(&t.id);
        }
        row.extend(t.values.iter().map(|v| v.as_deref().unwrap_or("")));
        write_record(&mut out, &row);
    }
    Ok(out)
}
