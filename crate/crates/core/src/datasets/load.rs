use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::schema::DatasetSchema;

/// Cell values of one column after type inference. Numeric cells keep
/// infinities; missing cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<String>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub values: ColumnValues,
}

/// Loaded CSV with drop columns removed and the label held out.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<RawColumn>,
    pub labels: Vec<String>,
    /// Width of the file as read, before drops.
    pub source_column_count: usize,
    /// Schema drop columns that were actually present.
    pub dropped: Vec<String>,
}

impl RawTable {
    /// Builds a raw table from named string columns, inferring each column's
    /// type. A column is numeric when every non-missing cell parses as a real.
    pub fn from_strings(
        header: Vec<String>,
        columns: Vec<Vec<String>>,
        schema: &DatasetSchema,
    ) -> Result<Self> {
        schema.validate()?;
        let source_column_count = header.len();
        let label_pos = header
            .iter()
            .position(|h| h == &schema.label_column)
            .ok_or_else(|| Error::MissingLabelColumn(schema.label_column.clone()))?;

        let mut labels = Vec::new();
        let mut out = Vec::new();
        let mut dropped = Vec::new();
        for (i, (name, cells)) in header.into_iter().zip(columns).enumerate() {
            if i == label_pos {
                labels = cells.into_iter().map(|c| c.trim().to_string()).collect();
            } else if schema.drops(&name) {
                dropped.push(name);
            } else {
                out.push(RawColumn {
                    values: infer(cells),
                    name,
                });
            }
        }
        Ok(RawTable {
            columns: out,
            labels,
            source_column_count,
            dropped,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    /// Retained columns including the held-out label.
    pub fn modeling_column_count(&self) -> usize {
        self.columns.len() + 1
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "?" | "NA" | "N/A" | "null" | "NULL") || cell.eq_ignore_ascii_case("nan")
}

fn infer(cells: Vec<String>) -> ColumnValues {
    let mut parsed = Vec::with_capacity(cells.len());
    for cell in &cells {
        let c = cell.trim();
        if is_missing(c) {
            parsed.push(None);
        } else if let Ok(v) = c.parse::<f64>() {
            parsed.push(Some(v));
        } else {
            return ColumnValues::Categorical(
                cells
                    .into_iter()
                    .map(|c| {
                        let t = c.trim();
                        if is_missing(t) { String::new() } else { t.to_string() }
                    })
                    .collect(),
            );
        }
    }
    ColumnValues::Numeric(parsed)
}

/// Loads one CSV file against `schema`.
pub fn load_csv(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<RawTable> {
    load_csv_many(&[path.as_ref().to_path_buf()], schema)
}

/// Loads and concatenates several CSV files sharing one header layout.
pub fn load_csv_many(paths: &[PathBuf], schema: &DatasetSchema) -> Result<RawTable> {
    load_csv_groups(&[paths], schema).map(|(raw, _)| raw)
}

/// Loads several groups of files into one table (so categorical codes are
/// shared) and returns the row count contributed by each group. Rows keep
/// group order.
pub fn load_csv_groups(groups: &[&[PathBuf]], schema: &DatasetSchema) -> Result<(RawTable, Vec<usize>)> {
    schema.validate()?;
    let mut header: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<String>> = Vec::new();
    let mut sizes = Vec::with_capacity(groups.len());
    for group in groups {
        let before = columns.first().map_or(0, Vec::len);
        for path in expand_dirs(group)? {
            read_into(&path, schema, &mut header, &mut columns)?;
        }
        let after = columns.first().map_or(0, Vec::len);
        if after == before {
            return Err(Error::NoRows {
                path: group.first().cloned().unwrap_or_default(),
            });
        }
        sizes.push(after - before);
    }
    let header = header.unwrap_or_default();
    Ok((RawTable::from_strings(header, columns, schema)?, sizes))
}

/// Replaces each directory by the `.csv` files directly inside it, sorted by
/// name.
fn expand_dirs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if !p.is_dir() {
            out.push(p.clone());
            continue;
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(p)
            .map_err(|e| Error::io(p, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|f| f.is_file() && f.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
            .collect();
        files.sort();
        out.extend(files);
    }
    Ok(out)
}

fn read_into(
    path: &Path,
    schema: &DatasetSchema,
    header: &mut Option<Vec<String>>,
    columns: &mut Vec<Vec<String>>,
) -> Result<()> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(std::io::BufReader::new(file));

    let mut records = reader.records();
    let malformed = |row: usize, reason: String| Error::MalformedRow {
        path: path.to_path_buf(),
        row,
        reason,
    };

    let file_header: Vec<String> = if schema.header_present {
        match records.next() {
            None => return Err(Error::NoRows { path: path.into() }),
            Some(rec) => rec
                .map_err(|e| malformed(0, e.to_string()))?
                .iter()
                .map(|h| h.trim().to_string())
                .collect(),
        }
    } else {
        Vec::new()
    };

    let mut row = 0usize;
    for rec in records {
        row += 1;
        let rec = rec.map_err(|e| malformed(row, e.to_string()))?;
        if header.is_none() {
            let names = if schema.header_present {
                file_header.clone()
            } else if !schema.column_names.is_empty() {
                schema.column_names.clone()
            } else {
                (0..rec.len()).map(|i| format!("col_{i}")).collect()
            };
            columns.resize_with(names.len(), Vec::new);
            *header = Some(names);
        } else if schema.header_present && header.as_deref() != Some(file_header.as_slice()) {
            return Err(malformed(0, "header differs from the first file".into()));
        }
        let width = header.as_ref().map_or(0, Vec::len);
        if rec.len() != width {
            return Err(malformed(
                row,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            col.push(field.to_string());
        }
    }
    if header.is_none() && schema.header_present {
        // Header-only file: remember the layout so the caller reports "no rows".
        columns.resize_with(file_header.len(), Vec::new);
        *header = Some(file_header);
    }
    Ok(())
}
