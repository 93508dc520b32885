//! Seeded synthetic dataset generator.
//!
//! Emits flow-record-shaped CSVs (feature columns plus a trailing Label
//! column) drawn from per-class Gaussian clusters, with optional injected
//! defects: `Infinity`/`NaN` cells, mojibake label separators, and
//! leading whitespace in header names. The same spec and seed always
//! produce byte-identical output. This is a test scaffold, not a traffic
//! simulator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random::RandomSource;

/// One class cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    pub weight: f64,
    /// Cluster center, one entry per feature.
    pub mean: Vec<f64>,
    /// Standard deviation around the center.
    pub spread: f64,
}

/// Which pathologies to inject into the emitted CSV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectFlags {
    pub infinity_cells: bool,
    pub nan_cells: bool,
    /// Replace the `" - "` separator of eligible labels with a
    /// replacement character so the repair path has work to do.
    pub mojibake_labels: bool,
    pub header_whitespace: bool,
}

impl DefectFlags {
    pub fn all() -> Self {
        Self {
            infinity_cells: true,
            nan_cells: true,
            mojibake_labels: true,
            header_whitespace: true,
        }
    }
}

/// Full description of a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub n_features: usize,
    pub classes: Vec<ClassSpec>,
    /// Extra uniform jitter amplitude on top of the Gaussian spread.
    pub noise: f64,
    pub seed: u64,
    pub defects: DefectFlags,
}

impl SynthSpec {
    /// Equal-weight, well-separated clusters: class k sits at offset 6k
    /// per dimension plus seeded jitter, spread 1. Separation holds for
    /// any seed, so accuracy thresholds on this data are stable.
    pub fn separable(n_rows: usize, n_features: usize, class_names: &[&str], seed: u64) -> Self {
        let mut rng = RandomSource::new(seed).child(100);
        let classes = class_names
            .iter()
            .enumerate()
            .map(|(k, name)| ClassSpec {
                name: (*name).to_string(),
                weight: 1.0,
                mean: (0..n_features)
                    .map(|_| 6.0 * k as f64 + rng.uniform(0.0, 2.0))
                    .collect(),
                spread: 1.0,
            })
            .collect();
        Self {
            n_rows,
            n_features,
            classes,
            noise: 0.1,
            seed,
            defects: DefectFlags::default(),
        }
    }

    pub fn with_defects(mut self, defects: DefectFlags) -> Self {
        self.defects = defects;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::InvalidConfig {
                detail: "synthetic dataset needs at least one row".into(),
            });
        }
        if self.n_features < 2 {
            return Err(Error::InvalidConfig {
                detail: "synthetic dataset needs at least two features".into(),
            });
        }
        if self.classes.is_empty() {
            return Err(Error::InvalidConfig {
                detail: "synthetic dataset needs at least one class".into(),
            });
        }
        for class in &self.classes {
            if !(class.weight.is_finite() && class.weight > 0.0) {
                return Err(Error::InvalidConfig {
                    detail: format!("class `{}` has non-positive weight", class.name),
                });
            }
            if class.mean.len() != self.n_features {
                return Err(Error::InvalidConfig {
                    detail: format!(
                        "class `{}` mean has {} entries, expected {}",
                        class.name,
                        class.mean.len(),
                        self.n_features
                    ),
                });
            }
        }
        Ok(())
    }
}

/// How many of each defect actually landed in the output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedDefects {
    pub infinity_cells: usize,
    pub nan_cells: usize,
    pub mojibake_labels: usize,
    pub whitespace_headers: usize,
}

/// A generated dataset: the CSV text, the clean per-row class names, and
/// the injected defect counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub csv: String,
    pub labels: Vec<String>,
    pub injected: InjectedDefects,
}

/// Generate a dataset from a spec. Deterministic: same spec, same bytes.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let root = RandomSource::new(spec.seed);
    let mut class_rng = root.child(0);
    let mut value_rng = root.child(1);
    let mut defect_rng = root.child(2);

    let total_weight: f64 = spec.classes.iter().map(|c| c.weight).sum();

    // Draw class per row, then features.
    let mut labels = Vec::with_capacity(spec.n_rows);
    let mut cells: Vec<String> = Vec::with_capacity(spec.n_rows * spec.n_features);
    for _ in 0..spec.n_rows {
        let mut pick = class_rng.uniform(0.0, total_weight);
        let mut chosen = spec.classes.len() - 1;
        for (k, class) in spec.classes.iter().enumerate() {
            if pick < class.weight {
                chosen = k;
                break;
            }
            pick -= class.weight;
        }
        let class = &spec.classes[chosen];
        labels.push(class.name.clone());
        for j in 0..spec.n_features {
            let v = class.mean[j]
                + class.spread * value_rng.normal()
                + spec.noise * value_rng.uniform(-1.0, 1.0);
            cells.push(format!("{v}"));
        }
    }

    let mut injected = InjectedDefects::default();

    // Non-finite cells: distinct positions so ingest's imputed-cell count
    // matches exactly.
    let per_kind = (spec.n_rows / 100).max(1);
    let want_inf = if spec.defects.infinity_cells { per_kind } else { 0 };
    let want_nan = if spec.defects.nan_cells { per_kind } else { 0 };
    if want_inf + want_nan > 0 {
        let total_cells = spec.n_rows * spec.n_features;
        let chosen = defect_rng.sample_indices(total_cells, (want_inf + want_nan).min(total_cells));
        for (i, &flat) in chosen.iter().enumerate() {
            cells[flat] = if i < want_inf.min(chosen.len()) {
                injected.infinity_cells += 1;
                "Infinity".to_string()
            } else {
                injected.nan_cells += 1;
                "NaN".to_string()
            };
        }
    }

    // Mojibake only applies to labels that carry the " - " separator;
    // repairing the replacement character reproduces the original name.
    let mut written_labels = labels.clone();
    if spec.defects.mojibake_labels {
        let eligible: Vec<usize> = (0..labels.len())
            .filter(|&i| labels[i].contains(" - "))
            .collect();
        if !eligible.is_empty() {
            let take = (eligible.len() / 10).max(1);
            let picks = defect_rng.sample_indices(eligible.len(), take.min(eligible.len()));
            for &p in &picks {
                let row = eligible[p];
                written_labels[row] = labels[row].replace(" - ", " \u{FFFD} ");
                injected.mojibake_labels += 1;
            }
        }
    }

    // Header, optionally with flow-export-style leading spaces.
    let mut header: Vec<String> = (0..spec.n_features).map(|j| format!("Feature {j}")).collect();
    header.push("Label".to_string());
    if spec.defects.header_whitespace {
        for name in header.iter_mut().step_by(2) {
            *name = format!(" {name}");
            injected.whitespace_headers += 1;
        }
    }

    let mut csv = String::new();
    csv.push_str(&header.join(","));
    csv.push('\n');
    for r in 0..spec.n_rows {
        for j in 0..spec.n_features {
            csv.push_str(&cells[r * spec.n_features + j]);
            csv.push(',');
        }
        csv.push_str(&written_labels[r]);
        csv.push('\n');
    }

    Ok(SynthOutput {
        csv,
        labels,
        injected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{self, ImputeMode};
    use crate::preprocess::{Normalizer, NormalizerMode};

    #[test]
    fn equal_weights_balance_class_counts() {
        let spec = SynthSpec::separable(1000, 4, &["BENIGN", "DoS"], 7);
        let out = generate(&spec).unwrap();
        let benign = out.labels.iter().filter(|l| *l == "BENIGN").count();
        assert!(
            (450..=550).contains(&benign),
            "benign count {benign} outside ±5% of 500"
        );
    }

    #[test]
    fn clean_generation_needs_no_repair_or_imputation() {
        let spec = SynthSpec::separable(200, 5, &["BENIGN", "DoS"], 9);
        let out = generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clean.csv");
        std::fs::write(&path, &out.csv).unwrap();
        let (_, report) =
            ingest::load_dataset(&[&path], &ingest::IngestOptions::default()).unwrap();
        assert_eq!(report.rows_repaired, 0);
        assert_eq!(report.cells_imputed, 0);
        assert_eq!(report.rows_total, 200);
    }

    #[test]
    fn mojibake_labels_repair_back_to_spec_names() {
        let spec = SynthSpec::separable(300, 4, &["BENIGN", "Web Attack - Brute Force"], 11)
            .with_defects(DefectFlags {
                mojibake_labels: true,
                ..DefectFlags::default()
            });
        let out = generate(&spec).unwrap();
        assert!(out.injected.mojibake_labels >= 1);
        assert!(out.csv.contains('\u{FFFD}'));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("moji.csv");
        std::fs::write(&path, &out.csv).unwrap();
        let (ds, report) =
            ingest::load_dataset(&[&path], &ingest::IngestOptions::default()).unwrap();
        assert_eq!(report.rows_repaired, out.injected.mojibake_labels);
        let mut seen: Vec<&str> = ds
            .schema
            .label_map()
            .names()
            .iter()
            .map(String::as_str)
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, vec!["BENIGN", "Web Attack - Brute Force"]);
    }

    #[test]
    fn injected_cell_defects_are_counted_exactly() {
        let spec = SynthSpec::separable(400, 6, &["BENIGN", "DoS"], 13).with_defects(DefectFlags {
            infinity_cells: true,
            nan_cells: true,
            ..DefectFlags::default()
        });
        let out = generate(&spec).unwrap();
        assert_eq!(out.injected.infinity_cells, 4);
        assert_eq!(out.injected.nan_cells, 4);

        let table = ingest::read_csv_from(out.csv.as_bytes(), "synth").unwrap();
        let (_, _, _, report) = ingest::encode_non_numeric(&table, "Label", ImputeMode::Zero).unwrap();
        assert_eq!(
            report.cells_imputed,
            out.injected.infinity_cells + out.injected.nan_cells
        );
    }

    #[test]
    fn header_whitespace_defect_is_trimmed_by_ingest() {
        let spec = SynthSpec::separable(50, 4, &["BENIGN", "DoS"], 15).with_defects(DefectFlags {
            header_whitespace: true,
            ..DefectFlags::default()
        });
        let out = generate(&spec).unwrap();
        assert!(out.injected.whitespace_headers > 0);
        assert!(out.csv.starts_with(' '));
        let table = ingest::read_csv_from(out.csv.as_bytes(), "synth").unwrap();
        assert_eq!(table.header[0], "Feature 0");
    }

    #[test]
    fn same_spec_same_bytes() {
        let spec = SynthSpec::separable(120, 5, &["BENIGN", "DoS"], 17)
            .with_defects(DefectFlags::all());
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.csv.as_bytes(), b.csv.as_bytes());
        assert_eq!(a.injected, b.injected);
    }

    #[test]
    fn normalized_synthetic_data_lands_in_unit_interval() {
        let spec = SynthSpec::separable(150, 6, &["BENIGN", "DoS"], 19)
            .with_defects(DefectFlags::all());
        let out = generate(&spec).unwrap();
        let table = ingest::read_csv_from(out.csv.as_bytes(), "synth").unwrap();
        let (x, _, _, _) = ingest::encode_non_numeric(&table, "Label", ImputeMode::Zero).unwrap();
        let norm = Normalizer::fit(&x, NormalizerMode::Standard).unwrap();
        let xn = norm.apply(&x).unwrap();
        assert!(xn.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SynthSpec::separable(10, 4, &["A", "B"], 1);
        spec.classes[0].weight = 0.0;
        assert!(generate(&spec).is_err());

        let mut spec = SynthSpec::separable(10, 4, &["A"], 1);
        spec.classes[0].mean.pop();
        assert!(generate(&spec).is_err());

        let spec = SynthSpec::separable(0, 4, &["A"], 1);
        assert!(generate(&spec).is_err());
    }
}
