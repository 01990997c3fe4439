//! Dataset ingestion, validation, and deterministic stratified splits.
//!
//! Datasets are dense numeric matrices with a binary target. Ingestion is
//! strict: non-numeric or missing feature cells are errors (categorical
//! encoding happens upstream), and the target must carry exactly two distinct
//! labels, mapped to {0, 1} by lexicographic order of the raw text.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Immutable tabular dataset: `n` feature columns of length `m`, a binary
/// target, and positionally aligned feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    feature_names: Vec<String>,
    target: Vec<u8>,
}

impl Dataset {
    /// Validates the type invariants: at least two rows and one column, all
    /// values finite, both classes present, unique names aligned to columns.
    pub fn new(columns: Vec<Vec<f64>>, feature_names: Vec<String>, target: Vec<u8>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("dataset needs at least one feature"));
        }
        if feature_names.len() != columns.len() {
            return Err(Error::LengthMismatch(feature_names.len(), columns.len()));
        }
        let m = target.len();
        if m < 2 {
            return Err(Error::invalid("dataset needs at least two rows"));
        }
        for (name, col) in feature_names.iter().zip(&columns) {
            if col.len() != m {
                return Err(Error::LengthMismatch(col.len(), m));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::MissingValue {
                    row: row + 1,
                    column: name.clone(),
                });
            }
        }
        let mut sorted = feature_names.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateFeatureName(w[0].clone()));
        }
        if !target.contains(&0) || !target.contains(&1) {
            return Err(Error::NonBinaryTarget {
                column: "target".into(),
                found: 1,
            });
        }
        Ok(Self {
            columns,
            feature_names,
            target,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.target.len()
    }

    pub fn num_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    /// Count of rows per class, indexed by label.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.target.iter().filter(|&&y| y == 1).count();
        [self.target.len() - ones, ones]
    }

    /// New dataset containing only the given rows, in the given order.
    /// Fails if the slice would lose a class.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .map(|col| rows.iter().map(|&r| col[r]).collect())
            .collect();
        let target = rows.iter().map(|&r| self.target[r]).collect();
        Dataset::new(columns, self.feature_names.clone(), target)
    }

    /// Row-major matrix restricted to the given feature indices.
    pub fn rows_for(&self, features: &[usize]) -> Vec<Vec<f64>> {
        (0..self.num_rows())
            .map(|r| features.iter().map(|&j| self.columns[j][r]).collect())
            .collect()
    }

    /// Writes the dataset back as CSV with a `target` column. Values are
    /// printed with shortest round-trip precision, so reloading reproduces
    /// the dataset bit-exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header = self
            .feature_names
            .iter()
            .map(String::as_str)
            .chain(std::iter::once("target"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "{header}").map_err(|e| Error::FileAccess {
            path: "<writer>".into(),
            source: e,
        })?;
        for r in 0..self.num_rows() {
            let mut fields: Vec<String> =
                self.columns.iter().map(|c| format!("{}", c[r])).collect();
            fields.push(self.target[r].to_string());
            writeln!(out, "{}", fields.join(",")).map_err(|e| Error::FileAccess {
                path: "<writer>".into(),
                source: e,
            })?;
        }
        Ok(())
    }
}

/// Stratified cross-validation plan: per fold, disjoint train/test index
/// sets whose union is all rows; each row is tested exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
    pub seed: u64,
}

/// Loads an RFC-4180-style CSV with a header row. The target column is
/// chosen by name, defaulting to the last column; its two distinct raw
/// labels map to {0, 1} in lexicographic order. All other columns must
/// parse as finite reals.
pub fn load_csv(path: impl AsRef<Path>, target_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::FileAccess {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() {
        return Err(Error::invalid("empty header row"));
    }
    let target_idx = match target_column {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingTargetColumn(name.to_string()))?,
        None => header.len() - 1,
    };
    if header.len() < 2 {
        return Err(Error::invalid("dataset needs at least one feature column"));
    }

    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); feature_names.len()];
    let mut raw_labels: Vec<String> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        if record.len() != header.len() {
            return Err(Error::invalid(format!(
                "data row {row} has {} fields, expected {}",
                record.len(),
                header.len()
            )));
        }
        let mut feat = 0;
        for (col_idx, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if col_idx == target_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row,
                    column: header[col_idx].clone(),
                });
            }
            let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                row,
                column: header[col_idx].clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::MissingValue {
                    row,
                    column: header[col_idx].clone(),
                });
            }
            columns[feat].push(value);
            feat += 1;
        }
    }

    let mut distinct: Vec<&String> = Vec::new();
    for label in &raw_labels {
        if !distinct.contains(&label) {
            distinct.push(label);
        }
    }
    if distinct.len() != 2 {
        return Err(Error::NonBinaryTarget {
            column: header[target_idx].clone(),
            found: distinct.len(),
        });
    }
    distinct.sort();
    let zero_label = distinct[0].clone();
    let target: Vec<u8> = raw_labels
        .iter()
        .map(|l| if *l == zero_label { 0 } else { 1 })
        .collect();

    Dataset::new(columns, feature_names, target)
}

/// Deterministic stratified k-fold plan: per class, row indices are
/// shuffled by a ChaCha generator seeded from `seed` and dealt round-robin
/// to folds, so test-fold class proportions match the full dataset within
/// one row per class. Classes rarer than the fold count are simply absent
/// from some test folds; a class needs at least two members so that every
/// training part keeps both classes.
pub fn stratified_kfold(ds: &Dataset, folds: usize, seed: u64) -> Result<SplitPlan> {
    if folds < 2 {
        return Err(Error::invalid("fold count must be at least 2"));
    }
    let counts = ds.class_counts();
    for class in 0..2u8 {
        if counts[class as usize] < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count: counts[class as usize],
                folds,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_sets: Vec<Vec<usize>> = vec![Vec::new(); folds];
    for class in 0..2u8 {
        let mut members: Vec<usize> = (0..ds.num_rows())
            .filter(|&r| ds.target()[r] == class)
            .collect();
        members.shuffle(&mut rng);
        for (pos, row) in members.into_iter().enumerate() {
            test_sets[pos % folds].push(row);
        }
    }
    if test_sets.iter().any(Vec::is_empty) {
        return Err(Error::invalid(format!(
            "{folds} folds cannot all receive test rows from {} rows",
            ds.num_rows()
        )));
    }
    let plan = test_sets
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train: Vec<usize> = (0..ds.num_rows()).filter(|r| !test.contains(r)).collect();
            (train, test)
        })
        .collect();
    Ok(SplitPlan { folds: plan, seed })
}

/// Deterministic stratified holdout: shuffles each class with the seeded
/// generator and moves a `validation_fraction` share (rounded, at least one
/// row) into the second part. Errors if either part would lose a class.
pub fn stratified_holdout(
    ds: &Dataset,
    validation_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::invalid(
            "validation fraction must lie strictly between 0 and 1",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for class in 0..2u8 {
        let mut members: Vec<usize> = (0..ds.num_rows())
            .filter(|&r| ds.target()[r] == class)
            .collect();
        members.shuffle(&mut rng);
        let take = (members.len() as f64 * validation_fraction).round() as usize;
        if take == 0 {
            return Err(Error::DegenerateSplit(class, "validation"));
        }
        if take == members.len() {
            return Err(Error::DegenerateSplit(class, "train"));
        }
        validation.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok((train, validation))
}
