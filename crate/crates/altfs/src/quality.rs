//! Feature-target qualities and pairwise feature-feature dependencies.
//!
//! These scores parameterize every white-box objective: the univariate and
//! FCBF objectives sum per-feature target scores, and mRMR additionally
//! subtracts averaged pairwise dependencies. Mutual information uses a
//! deterministic equal-width histogram plug-in estimator; integer-valued
//! columns with few distinct values are binned by exact value, so binary
//! targets are never discretized further.
//!
//! Per-column and per-pair computations run on the rayon pool when the
//! `parallel` feature is enabled; the `*_serial` twins are the fallback used
//! otherwise and stay public so benchmarks can compare the two paths.

use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityMeasure {
    MutualInformation,
    AbsPearson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    SumToOne,
    MinMax,
}

/// Per-feature target-dependency scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureQualities {
    pub values: Vec<f64>,
    pub measure: String,
    pub normalization: Normalization,
}

impl FeatureQualities {
    pub fn new(values: Vec<f64>, measure: impl Into<String>, normalization: Normalization) -> Self {
        Self {
            values,
            measure: measure.into(),
            normalization,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Errors on the first negative entry; the greedy heuristics and
    /// pre-selection assume non-negative qualities.
    pub fn ensure_non_negative(&self) -> Result<()> {
        for (index, &value) in self.values.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeQuality { index, value });
            }
        }
        Ok(())
    }
}

/// Symmetric pairwise feature-feature dependencies with a zero diagonal
/// (self-redundancy is excluded from every objective).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyMatrix {
    values: Vec<Vec<f64>>,
}

impl DependencyMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        for row in &values {
            if row.len() != n {
                return Err(Error::LengthMismatch(row.len(), n));
            }
        }
        for i in 0..n {
            if values[i][i] != 0.0 {
                return Err(Error::invalid("dependency diagonal must be zero"));
            }
            for j in 0..i {
                if values[i][j] != values[j][i] {
                    return Err(Error::invalid("dependency matrix must be symmetric"));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// Plug-in mutual information (natural log) of two columns after histogram
/// binning. Integer-valued columns with at most `bins` distinct values keep
/// their exact values as bins; everything else is equal-width binned.
/// Constant columns carry no information, so the result is 0.
///
/// Panics if the columns differ in length, have fewer than two rows, or
/// `bins < 2`.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> f64 {
    assert_eq!(x.len(), y.len(), "columns must have equal length");
    assert!(x.len() >= 2, "need at least two rows");
    assert!(bins >= 2, "need at least two bins");
    let (bx, nx) = bin_column(x, bins);
    let (by, ny) = bin_column(y, bins);
    let m = x.len() as f64;
    let mut joint = vec![0usize; nx * ny];
    let mut marg_x = vec![0usize; nx];
    let mut marg_y = vec![0usize; ny];
    for (&a, &b) in bx.iter().zip(&by) {
        joint[a * ny + b] += 1;
        marg_x[a] += 1;
        marg_y[b] += 1;
    }
    let mut mi = 0.0;
    for a in 0..nx {
        for b in 0..ny {
            let c = joint[a * ny + b];
            if c == 0 {
                continue;
            }
            let p_ab = c as f64 / m;
            let p_a = marg_x[a] as f64 / m;
            let p_b = marg_y[b] as f64 / m;
            mi += p_ab * (p_ab / (p_a * p_b)).ln();
        }
    }
    mi.max(0.0)
}

/// Bin assignment per row plus the number of bins.
fn bin_column(x: &[f64], bins: usize) -> (Vec<usize>, usize) {
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() == 1 {
        return (vec![0; x.len()], 1);
    }
    let integral = distinct.iter().all(|v| v.fract() == 0.0);
    if integral && distinct.len() <= bins {
        let assign = x
            .iter()
            .map(|v| distinct.partition_point(|d| d < v))
            .collect();
        return (assign, distinct.len());
    }
    let min = distinct[0];
    let max = *distinct.last().unwrap();
    let width = (max - min) / bins as f64;
    let assign = x
        .iter()
        .map(|v| (((v - min) / width) as usize).min(bins - 1))
        .collect();
    (assign, bins)
}

/// Absolute Pearson correlation; 0 when either column has zero variance.
pub fn abs_pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "columns must have equal length");
    assert!(x.len() >= 2, "need at least two rows");
    let m = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / m;
    let mean_y = y.iter().sum::<f64>() / m;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mean_x) * (b - mean_y);
        var_x += (a - mean_x) * (a - mean_x);
        var_y += (b - mean_y) * (b - mean_y);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return 0.0;
    }
    (cov / (var_x * var_y).sqrt()).abs().min(1.0)
}

fn measure_name(measure: QualityMeasure) -> &'static str {
    match measure {
        QualityMeasure::MutualInformation => "mutual_information",
        QualityMeasure::AbsPearson => "abs_pearson",
    }
}

fn apply_measure(measure: QualityMeasure, x: &[f64], y: &[f64], bins: usize) -> f64 {
    match measure {
        QualityMeasure::MutualInformation => mutual_information(x, y, bins),
        QualityMeasure::AbsPearson => abs_pearson(x, y),
    }
}

/// Normalizes in place. `SumToOne` divides by the total (identity when the
/// sum is 0); `MinMax` maps the range onto [0,1] (all-equal values map to 0).
fn normalize_values(values: &mut [f64], normalization: Normalization) {
    match normalization {
        Normalization::None => {}
        Normalization::SumToOne => {
            let total: f64 = values.iter().sum();
            if total > 0.0 {
                for v in values.iter_mut() {
                    *v /= total;
                }
            }
        }
        Normalization::MinMax => {
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if max > min {
                for v in values.iter_mut() {
                    *v = (*v - min) / (max - min);
                }
            } else {
                for v in values.iter_mut() {
                    *v = 0.0;
                }
            }
        }
    }
}

/// Per-feature target dependency under the chosen measure, then normalized.
pub fn univariate_qualities(
    ds: &Dataset,
    measure: QualityMeasure,
    bins: usize,
    normalization: Normalization,
) -> FeatureQualities {
    let target: Vec<f64> = ds.target().iter().map(|&y| y as f64).collect();
    #[cfg(feature = "parallel")]
    let mut values: Vec<f64> = (0..ds.num_features())
        .into_par_iter()
        .map(|j| apply_measure(measure, ds.column(j), &target, bins))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let mut values = raw_univariate_serial(ds, measure, bins);
    normalize_values(&mut values, normalization);
    FeatureQualities::new(values, measure_name(measure), normalization)
}

/// Sequential twin of [`univariate_qualities`].
pub fn univariate_qualities_serial(
    ds: &Dataset,
    measure: QualityMeasure,
    bins: usize,
    normalization: Normalization,
) -> FeatureQualities {
    let mut values = raw_univariate_serial(ds, measure, bins);
    normalize_values(&mut values, normalization);
    FeatureQualities::new(values, measure_name(measure), normalization)
}

fn raw_univariate_serial(ds: &Dataset, measure: QualityMeasure, bins: usize) -> Vec<f64> {
    let target: Vec<f64> = ds.target().iter().map(|&y| y as f64).collect();
    (0..ds.num_features())
        .map(|j| apply_measure(measure, ds.column(j), &target, bins))
        .collect()
}

fn upper_triangle_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

fn matrix_from_pairs(n: usize, pairs: &[(usize, usize)], values: &[f64]) -> Vec<Vec<f64>> {
    let mut matrix = vec![vec![0.0; n]; n];
    for (&(i, j), &v) in pairs.iter().zip(values) {
        matrix[i][j] = v;
        matrix[j][i] = v;
    }
    matrix
}

/// Symmetric matrix of the measure on every feature pair, normalized over
/// the off-diagonal entries, diagonal forced to 0.
pub fn pairwise_dependencies(
    ds: &Dataset,
    measure: QualityMeasure,
    bins: usize,
    normalization: Normalization,
) -> DependencyMatrix {
    let n = ds.num_features();
    let pairs = upper_triangle_pairs(n);
    #[cfg(feature = "parallel")]
    let mut values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| apply_measure(measure, ds.column(i), ds.column(j), bins))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let mut values: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| apply_measure(measure, ds.column(i), ds.column(j), bins))
        .collect();
    normalize_values(&mut values, normalization);
    DependencyMatrix::new(matrix_from_pairs(n, &pairs, &values)).expect("construction is symmetric")
}

/// Sequential twin of [`pairwise_dependencies`].
pub fn pairwise_dependencies_serial(
    ds: &Dataset,
    measure: QualityMeasure,
    bins: usize,
    normalization: Normalization,
) -> DependencyMatrix {
    let n = ds.num_features();
    let pairs = upper_triangle_pairs(n);
    let mut values: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| apply_measure(measure, ds.column(i), ds.column(j), bins))
        .collect();
    normalize_values(&mut values, normalization);
    DependencyMatrix::new(matrix_from_pairs(n, &pairs, &values)).expect("construction is symmetric")
}

/// Inputs for the mRMR objective: feature-target and feature-feature values
/// are min-max normalized jointly, so relevance and redundancy live on the
/// same `[0,1]` scale and the overall objective stays within `[-1,1]`.
pub fn mrmr_inputs(
    ds: &Dataset,
    measure: QualityMeasure,
    bins: usize,
) -> (FeatureQualities, DependencyMatrix) {
    let n = ds.num_features();
    let target = univariate_qualities(ds, measure, bins, Normalization::None);
    let deps = pairwise_dependencies(ds, measure, bins, Normalization::None);
    let pairs = upper_triangle_pairs(n);
    let mut pool: Vec<f64> = target.values.clone();
    pool.extend(pairs.iter().map(|&(i, j)| deps.get(i, j)));
    let min = pool.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = pool.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = |v: f64| {
        if max > min {
            (v - min) / (max - min)
        } else {
            0.0
        }
    };
    let q = FeatureQualities::new(
        target.values.iter().map(|&v| scale(v)).collect(),
        measure_name(measure),
        Normalization::MinMax,
    );
    let pair_values: Vec<f64> = pairs.iter().map(|&(i, j)| scale(deps.get(i, j))).collect();
    let d = DependencyMatrix::new(matrix_from_pairs(n, &pairs, &pair_values))
        .expect("construction is symmetric");
    (q, d)
}

/// Reads a two-column `feature,score` CSV in file order.
pub fn load_importance_file(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<f64>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::FileAccess {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut names = Vec::new();
    let mut scores = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        if record.len() != 2 {
            return Err(Error::invalid(format!(
                "importance file row {row} has {} fields, expected 2",
                record.len()
            )));
        }
        let name = record[0].trim().to_string();
        if names.contains(&name) {
            return Err(Error::DuplicateFeatureName(name));
        }
        let score: f64 = record[1].trim().parse().map_err(|_| Error::NonNumericCell {
            row,
            column: "score".into(),
            value: record[1].to_string(),
        })?;
        if !score.is_finite() || score < 0.0 {
            return Err(Error::invalid(format!(
                "importance score for '{name}' must be a finite non-negative real, got {score}"
            )));
        }
        names.push(name);
        scores.push(score);
    }
    if names.is_empty() {
        return Err(Error::invalid("importance file has no rows"));
    }
    Ok((names, scores))
}

/// Loads post-hoc importance scores and aligns them to the given feature
/// order. Every feature must be present; unknown names are rejected.
pub fn load_importance_scores(
    path: impl AsRef<Path>,
    feature_names: &[String],
) -> Result<FeatureQualities> {
    let (names, scores) = load_importance_file(path)?;
    for name in &names {
        if !feature_names.contains(name) {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }
    let values = feature_names
        .iter()
        .map(|want| {
            names
                .iter()
                .position(|n| n == want)
                .map(|i| scores[i])
                .ok_or_else(|| Error::MissingFeature(want.clone()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FeatureQualities::new(
        values,
        "importance_file",
        Normalization::None,
    ))
}
