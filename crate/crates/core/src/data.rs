//! Core domain types: feature matrices, schemas, and label columns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major table of real-valued features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix construction".into(),
                expected: rows * cols,
                found: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: format!("row {i}"),
                    expected: cols,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Ok(Self {
            rows: n,
            cols,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    /// True when every cell is finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Column-wise (min, max) over all rows. Errors on an empty matrix.
    pub fn column_extrema(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.rows == 0 {
            return Err(Error::EmptyInput {
                context: "column extrema of an empty matrix".into(),
            });
        }
        let mut mins = self.row(0).to_vec();
        let mut maxs = mins.clone();
        for r in 1..self.rows {
            for (c, &v) in self.row(r).iter().enumerate() {
                if v < mins[c] {
                    mins[c] = v;
                }
                if v > maxs[c] {
                    maxs[c] = v;
                }
            }
        }
        Ok((mins, maxs))
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            values,
        }
    }

    /// Horizontally append `extra` columns (same row count).
    pub fn hstack(&self, extra: &FeatureMatrix) -> Result<Self> {
        if self.rows != extra.rows {
            return Err(Error::DimensionMismatch {
                context: "hstack row count".into(),
                expected: self.rows,
                found: extra.rows,
            });
        }
        let cols = self.cols + extra.cols;
        let mut values = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            values.extend_from_slice(self.row(r));
            values.extend_from_slice(extra.row(r));
        }
        Ok(Self {
            rows: self.rows,
            cols,
            values,
        })
    }

    /// Single-column matrix from a vector.
    pub fn from_column(col: &[f64]) -> Self {
        Self {
            rows: col.len(),
            cols: 1,
            values: col.to_vec(),
        }
    }
}

/// Bijection between observed category strings and consecutive integer
/// codes assigned in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryMap {
    codes: BTreeMap<String, u32>,
    names: Vec<String>,
}

impl CategoryMap {
    pub fn code_of(&self, name: &str) -> Option<u32> {
        self.codes.get(name).copied()
    }

    pub fn name_of(&self, code: u32) -> Option<&str> {
        self.names.get(code as usize).map(String::as_str)
    }

    /// Existing code for `name`, or the next consecutive code.
    pub fn insert_or_get(&mut self, name: &str) -> u32 {
        if let Some(&c) = self.codes.get(name) {
            return c;
        }
        let c = self.names.len() as u32;
        self.codes.insert(name.to_string(), c);
        self.names.push(name.to_string());
        c
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Column layout of a dataset: ordered feature names, the label column,
/// and the categorical encodings discovered at ingest time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    feature_names: Vec<String>,
    label_name: String,
    /// Keyed by column name; present only for columns that needed encoding.
    /// The label column always has an entry.
    categorical_maps: BTreeMap<String, CategoryMap>,
}

impl DatasetSchema {
    pub fn new(
        feature_names: Vec<String>,
        label_name: String,
        categorical_maps: BTreeMap<String, CategoryMap>,
    ) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for name in &feature_names {
            if name == &label_name {
                return Err(Error::SchemaMismatch {
                    column: name.clone(),
                    detail: "feature column shares the label column name".into(),
                });
            }
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateColumn {
                    column: name.clone(),
                });
            }
        }
        Ok(Self {
            feature_names,
            label_name,
            categorical_maps,
        })
    }

    /// All-numeric schema with generated feature names; used by synthetic
    /// in-memory datasets and tests.
    pub fn numeric(n_features: usize, label_classes: &[&str]) -> Self {
        let feature_names = (0..n_features).map(|i| format!("Feature {i}")).collect();
        let mut label_map = CategoryMap::default();
        for c in label_classes {
            label_map.insert_or_get(c);
        }
        let mut maps = BTreeMap::new();
        maps.insert("Label".to_string(), label_map);
        Self {
            feature_names,
            label_name: "Label".to_string(),
            categorical_maps: maps,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn categorical_map(&self, column: &str) -> Option<&CategoryMap> {
        self.categorical_maps.get(column)
    }

    pub fn label_map(&self) -> &CategoryMap {
        self.categorical_maps
            .get(&self.label_name)
            .expect("label column always has a categorical map")
    }

    /// Code of a class name in the label map.
    pub fn label_code(&self, class: &str) -> Result<u32> {
        self.label_map()
            .code_of(class)
            .ok_or_else(|| Error::UnknownClass {
                class: class.to_string(),
            })
    }
}

/// Per-row class labels: the raw multi-class code and the derived binary
/// view where 0 = normal/benign and 1 = attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelColumn {
    raw: Vec<u32>,
    binary: Vec<u8>,
    benign_code: u32,
}

impl LabelColumn {
    /// Build the binary view from raw codes: rows equal to `benign_code`
    /// map to 0, everything else to 1.
    pub fn binarize(raw: Vec<u32>, benign_code: u32) -> Self {
        let binary = raw
            .iter()
            .map(|&c| u8::from(c != benign_code))
            .collect();
        Self {
            raw,
            binary,
            benign_code,
        }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw(&self) -> &[u32] {
        &self.raw
    }

    pub fn binary(&self) -> &[u8] {
        &self.binary
    }

    pub fn benign_code(&self) -> u32 {
        self.benign_code
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            raw: indices.iter().map(|&i| self.raw[i]).collect(),
            binary: indices.iter().map(|&i| self.binary[i]).collect(),
            benign_code: self.benign_code,
        }
    }
}

/// Map raw label codes to the binary normal/attack view, resolving the
/// benign class name through the schema's label map.
pub fn binarize_labels(
    schema: &DatasetSchema,
    raw: &[u32],
    benign_class: &str,
) -> Result<LabelColumn> {
    let code = schema.label_code(benign_class)?;
    Ok(LabelColumn::binarize(raw.to_vec(), code))
}

/// A fully ingested dataset: features, labels, and the schema that
/// produced them.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub labels: LabelColumn,
    pub schema: DatasetSchema,
}

impl Dataset {
    pub fn new(features: FeatureMatrix, labels: LabelColumn, schema: DatasetSchema) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                context: "label count vs feature rows".into(),
                expected: features.rows(),
                found: labels.len(),
            });
        }
        if features.cols() != schema.n_features() {
            return Err(Error::DimensionMismatch {
                context: "feature columns vs schema".into(),
                expected: schema.n_features(),
                found: features.cols(),
            });
        }
        Ok(Self {
            features,
            labels,
            schema,
        })
    }
}
