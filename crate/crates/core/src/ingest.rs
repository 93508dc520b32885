//! CSV ingestion: reading flow-record exports, repairing label defects,
//! merging files, and encoding every column to numbers.
//!
//! The reader accepts RFC-4180-style CSV with a header row. Header cells
//! are trimmed because flow exports routinely carry leading spaces in
//! column names. Label cells can contain mojibake (replacement characters
//! where a separator used to be); [`repair_labels`] normalizes those to a
//! plain `" - "` separator. Rate columns can contain `Infinity`/`NaN`
//! cells, which are imputed according to [`ImputeMode`].

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{
    binarize_labels, CategoryMap, Dataset, DatasetSchema, FeatureMatrix,
};
use crate::error::{Error, Result};

/// A parsed CSV file: trimmed header and raw string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// What ingestion did to the data, for operator inspection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub files_read: usize,
    pub rows_total: usize,
    /// Rows whose label cell changed during repair.
    pub rows_repaired: usize,
    /// Non-finite numeric cells encountered (replaced, or the cause of a
    /// dropped row under `ImputeMode::Drop`).
    pub cells_imputed: usize,
    /// Rows removed under `ImputeMode::Drop`.
    pub rows_dropped: usize,
}

/// How to handle non-finite numeric cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImputeMode {
    /// Replace with 0.0 (neutral after min-max scaling).
    #[default]
    Zero,
    /// Replace with the column median over finite cells.
    Median,
    /// Drop the whole row.
    Drop,
}

impl std::str::FromStr for ImputeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(ImputeMode::Zero),
            "median" => Ok(ImputeMode::Median),
            "drop" => Ok(ImputeMode::Drop),
            other => Err(Error::InvalidConfig {
                detail: format!("unknown impute mode `{other}` (expected zero|median|drop)"),
            }),
        }
    }
}

/// Read one CSV file into a [`RawTable`].
pub fn read_csv(path: &Path) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv_from(file, &path.display().to_string())
}

/// Read CSV from any reader; `origin` labels errors.
pub fn read_csv_from<R: Read>(reader: R, origin: &str) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::None)
        .from_reader(reader);

    let header_record = rdr.byte_headers().map_err(|e| Error::Csv {
        origin: origin.to_string(),
        detail: e.to_string(),
    })?;
    let header: Vec<String> = header_record
        .iter()
        .map(|c| String::from_utf8_lossy(c).trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::EmptyInput {
            context: origin.to_string(),
        });
    }
    let mut seen = std::collections::BTreeSet::new();
    for name in &header {
        if !seen.insert(name.clone()) {
            return Err(Error::DuplicateColumn {
                column: name.clone(),
            });
        }
    }

    let mut rows = Vec::new();
    for (i, record) in rdr.byte_records().enumerate() {
        let row_number = i + 1; // 1-based data row
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::RaggedRow {
                row: row_number,
                expected: *expected_len as usize,
                found: *len as usize,
            },
            _ => Error::Csv {
                origin: origin.to_string(),
                detail: e.to_string(),
            },
        })?;
        rows.push(
            record
                .iter()
                .map(|c| String::from_utf8_lossy(c).into_owned())
                .collect(),
        );
    }
    Ok(RawTable { header, rows })
}

fn is_printable_ascii(ch: char) -> bool {
    (' '..='~').contains(&ch)
}

/// Normalize one label cell: replace each run of non-printable-ASCII
/// characters with `" - "`, then collapse whitespace runs and trim.
fn repair_label_cell(cell: &str) -> String {
    let mut replaced = String::with_capacity(cell.len());
    let mut in_bad_run = false;
    for ch in cell.chars() {
        if is_printable_ascii(ch) {
            in_bad_run = false;
            replaced.push(ch);
        } else if !in_bad_run {
            in_bad_run = true;
            replaced.push_str(" - ");
        }
    }
    let mut out = String::with_capacity(replaced.len());
    for word in replaced.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Repair the label column of a table. Returns the repaired table and the
/// number of rows whose label changed.
pub fn repair_labels(mut table: RawTable, label_name: &str) -> Result<(RawTable, usize)> {
    let label_idx = column_index(&table.header, label_name)?;
    let mut repaired = 0usize;
    for row in &mut table.rows {
        let fixed = repair_label_cell(&row[label_idx]);
        if fixed != row[label_idx] {
            row[label_idx] = fixed;
            repaired += 1;
        }
    }
    Ok((table, repaired))
}

fn column_index(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn {
            column: name.to_string(),
        })
}

/// Concatenate tables that share an identical trimmed header.
pub fn merge_tables(tables: Vec<RawTable>) -> Result<RawTable> {
    let mut iter = tables.into_iter();
    let mut merged = iter.next().ok_or_else(|| Error::EmptyInput {
        context: "no tables to merge".into(),
    })?;
    for (i, table) in iter.enumerate() {
        if table.header != merged.header {
            let mut diffs = Vec::new();
            let n = merged.header.len().max(table.header.len());
            for c in 0..n {
                let a = merged.header.get(c).map(String::as_str).unwrap_or("<absent>");
                let b = table.header.get(c).map(String::as_str).unwrap_or("<absent>");
                if a != b {
                    diffs.push(format!("column {c}: `{a}` vs `{b}`"));
                }
            }
            return Err(Error::HeaderMismatch {
                detail: format!("table {} differs: {}", i + 1, diffs.join("; ")),
            });
        }
        merged.rows.extend(table.rows);
    }
    Ok(merged)
}

/// Empty and whitespace-only cells count as non-finite numeric values so
/// that sparse numeric columns do not flip to categorical.
fn parse_numeric(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return Some(f64::NAN);
    }
    t.parse::<f64>().ok()
}

fn median(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Column-by-column encoding result, before row filtering.
struct EncodedColumns {
    /// One vec per feature column.
    columns: Vec<Vec<f64>>,
    /// (row, was-non-finite) flags per feature column cell.
    non_finite: Vec<Vec<bool>>,
    maps: BTreeMap<String, CategoryMap>,
}

/// Encode every non-numeric column to integer codes and impute non-finite
/// numeric cells. Returns the feature matrix, raw label codes, the schema,
/// and imputation statistics.
pub fn encode_non_numeric(
    table: &RawTable,
    label_name: &str,
    impute: ImputeMode,
) -> Result<(FeatureMatrix, Vec<u32>, DatasetSchema, IngestReport)> {
    let label_idx = column_index(&table.header, label_name)?;
    let n_rows = table.rows.len();
    let feature_cols: Vec<usize> = (0..table.header.len()).filter(|&c| c != label_idx).collect();

    let mut enc = EncodedColumns {
        columns: Vec::with_capacity(feature_cols.len()),
        non_finite: Vec::with_capacity(feature_cols.len()),
        maps: BTreeMap::new(),
    };

    for &c in &feature_cols {
        let name = &table.header[c];
        let parsed: Vec<Option<f64>> =
            table.rows.iter().map(|r| parse_numeric(&r[c])).collect();
        if parsed.iter().all(Option::is_some) {
            // Numeric column; non-finite cells get imputed below.
            let raw: Vec<f64> = parsed.into_iter().map(Option::unwrap).collect();
            let flags: Vec<bool> = raw.iter().map(|v| !v.is_finite()).collect();
            let fill = match impute {
                ImputeMode::Median => {
                    let mut finite: Vec<f64> =
                        raw.iter().copied().filter(|v| v.is_finite()).collect();
                    finite.sort_by(f64::total_cmp);
                    median(&finite)
                }
                _ => 0.0,
            };
            let values = raw
                .into_iter()
                .map(|v| if v.is_finite() { v } else { fill })
                .collect();
            enc.columns.push(values);
            enc.non_finite.push(flags);
        } else {
            // Categorical column: codes in first-appearance order.
            let mut map = CategoryMap::default();
            let values = table
                .rows
                .iter()
                .map(|r| f64::from(map.insert_or_get(r[c].trim())))
                .collect();
            enc.maps.insert(name.clone(), map);
            enc.columns.push(values);
            enc.non_finite.push(vec![false; n_rows]);
        }
    }

    // Label column always gets its own categorical map.
    let mut label_map = CategoryMap::default();
    let raw_labels_all: Vec<u32> = table
        .rows
        .iter()
        .map(|r| label_map.insert_or_get(r[label_idx].trim()))
        .collect();
    enc.maps.insert(label_name.to_string(), label_map);

    let cells_imputed = enc
        .non_finite
        .iter()
        .map(|col| col.iter().filter(|&&b| b).count())
        .sum();

    let keep: Vec<usize> = match impute {
        ImputeMode::Drop => (0..n_rows)
            .filter(|&r| enc.non_finite.iter().all(|col| !col[r]))
            .collect(),
        _ => (0..n_rows).collect(),
    };
    let rows_dropped = n_rows - keep.len();

    let n_features = feature_cols.len();
    let mut values = Vec::with_capacity(keep.len() * n_features);
    for &r in &keep {
        for col in &enc.columns {
            values.push(col[r]);
        }
    }
    let features = FeatureMatrix::new(keep.len(), n_features, values)?;
    let raw_labels: Vec<u32> = keep.iter().map(|&r| raw_labels_all[r]).collect();

    let feature_names: Vec<String> = feature_cols
        .iter()
        .map(|&c| table.header[c].clone())
        .collect();
    let schema = DatasetSchema::new(feature_names, label_name.to_string(), enc.maps)?;

    let report = IngestReport {
        files_read: 0,
        rows_total: n_rows,
        rows_repaired: 0,
        cells_imputed,
        rows_dropped,
    };
    Ok((features, raw_labels, schema, report))
}

/// Options for the full ingest path.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub label_column: String,
    pub benign_class: String,
    pub impute: ImputeMode,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            label_column: "Label".to_string(),
            benign_class: "BENIGN".to_string(),
            impute: ImputeMode::Zero,
        }
    }
}

/// Read, repair, merge, and encode a set of CSV files into a [`Dataset`].
pub fn load_dataset(paths: &[impl AsRef<Path>], opts: &IngestOptions) -> Result<(Dataset, IngestReport)> {
    if paths.is_empty() {
        return Err(Error::EmptyInput {
            context: "no input files".into(),
        });
    }
    let mut tables = Vec::with_capacity(paths.len());
    let mut rows_repaired = 0usize;
    for p in paths {
        let table = read_csv(p.as_ref())?;
        let (table, repaired) = repair_labels(table, &opts.label_column)?;
        rows_repaired += repaired;
        tables.push(table);
    }
    let files_read = tables.len();
    let merged = merge_tables(tables)?;
    let (features, raw_labels, schema, mut report) =
        encode_non_numeric(&merged, &opts.label_column, opts.impute)?;
    report.files_read = files_read;
    report.rows_repaired = rows_repaired;

    let labels = binarize_labels(&schema, &raw_labels, &opts.benign_class)?;
    let dataset = Dataset::new(features, labels, schema)?;
    Ok((dataset, report))
}

/// Encode a table for prediction against an existing schema.
///
/// Feature columns must all be present (the label column may be present
/// and is ignored). Categorical cells must map to codes already in the
/// schema; unseen values are a schema error naming the column. Non-finite
/// numeric cells are imputed to 0.0.
pub fn encode_for_prediction(schema: &DatasetSchema, table: &RawTable) -> Result<FeatureMatrix> {
    let mut col_of: Vec<usize> = Vec::with_capacity(schema.n_features());
    for name in schema.feature_names() {
        col_of.push(column_index(&table.header, name)?);
    }
    let n = table.rows.len();
    let mut values = Vec::with_capacity(n * schema.n_features());
    for (r, row) in table.rows.iter().enumerate() {
        for (f, name) in schema.feature_names().iter().enumerate() {
            let cell = &row[col_of[f]];
            let v = if let Some(map) = schema.categorical_map(name) {
                match map.code_of(cell.trim()) {
                    Some(code) => f64::from(code),
                    None => {
                        return Err(Error::SchemaMismatch {
                            column: name.clone(),
                            detail: format!("unseen category `{}` in row {}", cell.trim(), r + 1),
                        })
                    }
                }
            } else {
                match parse_numeric(cell) {
                    Some(v) if v.is_finite() => v,
                    Some(_) => 0.0,
                    None => {
                        return Err(Error::SchemaMismatch {
                            column: name.clone(),
                            detail: format!("non-numeric cell `{}` in row {}", cell.trim(), r + 1),
                        })
                    }
                }
            };
            values.push(v);
        }
    }
    FeatureMatrix::new(n, schema.n_features(), values)
}
