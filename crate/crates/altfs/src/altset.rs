//! Selection vectors, set-dissimilarity measures, and validity checks for
//! alternative feature sets.
//!
//! A feature set is an *alternative* to another one if their dissimilarity is
//! at least a threshold `tau`. For fixed set sizes both supported measures
//! reduce to an integer cap on the overlap, which is what the search engines
//! propagate; [`max_overlap`] computes that cap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard against non-representable thresholds like 0.3 when flooring.
const FLOAT_GUARD: f64 = 1e-9;

/// Binary decision vector identifying a feature set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectionVector {
    bits: Vec<bool>,
}

impl SelectionVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &i in indices {
            bits[i] = true;
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    /// Number of selected features.
    pub fn cardinality(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of selected features, ascending.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i]).collect()
    }

    pub fn intersection_size(&self, other: &SelectionVector) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a && b)
            .count()
    }

    /// Rendered as a 0/1 string, e.g. `110010`.
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DissimilarityMeasure {
    Dice,
    Jaccard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Sum,
    Min,
}

/// User parameters for a search for alternatives.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativesSpec {
    /// Desired feature-set size.
    pub k: usize,
    /// Number of alternatives; the search produces `a + 1` sets overall.
    pub a: usize,
    /// Dissimilarity threshold in (0, 1].
    pub tau: f64,
    pub measure: DissimilarityMeasure,
    pub aggregation: Aggregation,
    /// Total budget for one solve call; `None` grants 60 s per sought set.
    pub timeout_ms: Option<u64>,
}

impl AlternativesSpec {
    /// Validates `k >= 1`, `0 < tau <= 1`. `tau = 0` is rejected because it
    /// would allow duplicate feature sets.
    pub fn new(k: usize, a: usize, tau: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("feature-set size k must be at least 1"));
        }
        if !(tau > 0.0 && tau <= 1.0) || !tau.is_finite() {
            return Err(Error::invalid(format!(
                "dissimilarity threshold tau must lie in (0, 1], got {tau}"
            )));
        }
        Ok(Self {
            k,
            a,
            tau,
            measure: DissimilarityMeasure::Dice,
            aggregation: Aggregation::Sum,
            timeout_ms: None,
        })
    }

    pub fn with_measure(mut self, measure: DissimilarityMeasure) -> Self {
        self.measure = measure;
        self
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    pub fn with_timeout_ms(mut self, timeout_ms: Option<u64>) -> Self {
        self.timeout_ms = timeout_ms;
        self
    }
}

/// Dice dissimilarity `1 - 2|A∩B| / (|A|+|B|)`.
///
/// Errors when both sets are empty (the quotient is undefined).
pub fn dice(f1: &SelectionVector, f2: &SelectionVector) -> Result<f64> {
    let s1 = f1.cardinality();
    let s2 = f2.cardinality();
    if s1 + s2 == 0 {
        return Err(Error::EmptySets);
    }
    let overlap = f1.intersection_size(f2);
    Ok(1.0 - 2.0 * overlap as f64 / (s1 + s2) as f64)
}

/// Jaccard distance `1 - |A∩B| / |A∪B|`.
pub fn jaccard(f1: &SelectionVector, f2: &SelectionVector) -> Result<f64> {
    let s1 = f1.cardinality();
    let s2 = f2.cardinality();
    if s1 + s2 == 0 {
        return Err(Error::EmptySets);
    }
    let overlap = f1.intersection_size(f2);
    Ok(1.0 - overlap as f64 / (s1 + s2 - overlap) as f64)
}

pub fn dissimilarity(
    measure: DissimilarityMeasure,
    f1: &SelectionVector,
    f2: &SelectionVector,
) -> Result<f64> {
    match measure {
        DissimilarityMeasure::Dice => dice(f1, f2),
        DissimilarityMeasure::Jaccard => jaccard(f1, f2),
    }
}

/// Largest overlap two sets of the given sizes may have while still counting
/// as alternatives at threshold `tau`.
///
/// Rearranging the threshold condition gives `(1-tau)/2 * (s1+s2)` for Dice
/// and `(1-tau)/(2-tau) * (s1+s2)` for Jaccard; the result is floored with a
/// small guard so that thresholds like 0.3 keep their intended integer
/// budget.
pub fn max_overlap(
    size1: usize,
    size2: usize,
    tau: f64,
    measure: DissimilarityMeasure,
) -> usize {
    let total = (size1 + size2) as f64;
    let bound = match measure {
        DissimilarityMeasure::Dice => (1.0 - tau) / 2.0 * total,
        DissimilarityMeasure::Jaccard => (1.0 - tau) / (2.0 - tau) * total,
    };
    (bound + FLOAT_GUARD).floor().max(0.0) as usize
}

/// True iff `candidate` is a valid alternative to every set in `existing`
/// under `spec`, i.e. the dissimilarity to each of them reaches `tau`
/// (inclusive, with a small slack against rounding). Vacuously true when
/// `existing` is empty.
pub fn is_valid_alternative(
    candidate: &SelectionVector,
    existing: &[SelectionVector],
    spec: &AlternativesSpec,
) -> bool {
    existing.iter().all(|e| {
        dissimilarity(spec.measure, candidate, e)
            .map(|d| d >= spec.tau - FLOAT_GUARD)
            .unwrap_or(false)
    })
}

/// `ceil(tau * k)` with a guard against thresholds that are not exactly
/// representable; the number of features that must differ between equal-size
/// alternatives under Dice.
pub fn min_differing(k: usize, tau: f64) -> usize {
    (tau * k as f64 - FLOAT_GUARD).ceil().max(0.0) as usize
}
