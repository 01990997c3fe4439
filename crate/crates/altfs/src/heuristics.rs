//! Polynomial-time searches for alternatives under the univariate objective.
//!
//! All three heuristics sort features by descending quality and exploit that
//! the objective is a plain sum. With the Dice measure and equal set sizes,
//! the top `k - ceil(tau*k)` features fit into every alternative without
//! violating the threshold; the heuristics differ in how they fill the
//! remaining `ceil(tau*k)` slots:
//!
//! - replacement walks down the quality order, giving each alternative the
//!   next unused block (sequential);
//! - balancing assigns the same features to the currently worst non-full set
//!   instead, LPT style (simultaneous);
//! - depth search drops the shared prefix entirely and iterates candidate
//!   sets in lexicographic quality order, keeping every valid one, which can
//!   continue long after the other two run out of unused features.

use crate::altset::{is_valid_alternative, AlternativesSpec, SelectionVector};
use crate::error::{Error, Result};
use crate::quality::FeatureQualities;

/// `floor((1 - tau) * k)` shared features and `ceil(tau * k)` replaced ones;
/// computed from the replaced side so the two always add up to `k`.
fn shared_and_tail(k: usize, tau: f64) -> (usize, usize) {
    let tail = ((tau * k as f64 - 1e-9).ceil().max(0.0) as usize).clamp(1, k);
    (k - tail, tail)
}

fn validate(q: &FeatureQualities, k: usize, tau: f64) -> Result<Vec<usize>> {
    q.ensure_non_negative()?;
    if k == 0 || k > q.len() {
        return Err(Error::invalid(format!(
            "feature-set size {k} must lie in 1..={}",
            q.len()
        )));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid(format!(
            "dissimilarity threshold tau must lie in (0, 1], got {tau}"
        )));
    }
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| q.values[b].partial_cmp(&q.values[a]).unwrap().then(a.cmp(&b)));
    Ok(order)
}

/// Greedy Replacement: every set keeps the shared top features and draws a
/// fresh tail in descending quality. Stops before `a + 1` sets when unused
/// features run out; all pairwise Dice dissimilarities reach `tau`.
pub fn greedy_replacement(
    q: &FeatureQualities,
    k: usize,
    a: usize,
    tau: f64,
) -> Result<Vec<SelectionVector>> {
    let order = validate(q, k, tau)?;
    let n = q.len();
    let (shared, tail) = shared_and_tail(k, tau);
    let mut sets = Vec::new();
    let mut position = shared;
    for i in 0..=a {
        if k + i * tail > n {
            break;
        }
        let mut indices = order[..shared].to_vec();
        indices.extend_from_slice(&order[position..position + tail]);
        position += tail;
        sets.push(SelectionVector::from_indices(n, &indices));
    }
    Ok(sets)
}

/// Greedy Balancing: same selected features as replacement, but tails are
/// dealt to the non-full set with the lowest running non-shared quality
/// (ties to the lowest set index). Returns an empty list when
/// `ceil(tau*k)*a + k > n`, the early-exit guard.
pub fn greedy_balancing(
    q: &FeatureQualities,
    k: usize,
    a: usize,
    tau: f64,
) -> Result<Vec<SelectionVector>> {
    let order = validate(q, k, tau)?;
    let n = q.len();
    let (shared, tail) = shared_and_tail(k, tau);
    if tail * a + k > n {
        return Ok(Vec::new());
    }
    let mut sets: Vec<Vec<usize>> = vec![order[..shared].to_vec(); a + 1];
    let mut load = vec![0.0f64; a + 1];
    for &feature in &order[shared..tail * a + k] {
        let mut target = None;
        for i in 0..=a {
            if sets[i].len() < k && target.is_none_or(|t: usize| load[i] < load[t]) {
                target = Some(i);
            }
        }
        let i = target.expect("capacity equals the number of dealt features");
        sets[i].push(feature);
        load[i] += q.values[feature];
    }
    Ok(sets
        .into_iter()
        .map(|idx| SelectionVector::from_indices(n, &idx))
        .collect())
}

/// Greedy Depth with the default unlimited validity-check budget.
pub fn greedy_depth(
    q: &FeatureQualities,
    k: usize,
    a: usize,
    tau: f64,
) -> Result<Vec<SelectionVector>> {
    greedy_depth_with_budget(q, k, a, tau, None).map(|(sets, _)| sets)
}

/// Greedy Depth: iterates size-`k` position arrays over the quality-sorted
/// features in lexicographic order, keeping each candidate that is a valid
/// alternative to everything kept so far. Stops at `a + 1` sets, position
/// exhaustion, or an optional cap on validity checks. Also returns the
/// number of checks performed.
pub fn greedy_depth_with_budget(
    q: &FeatureQualities,
    k: usize,
    a: usize,
    tau: f64,
    max_checks: Option<u64>,
) -> Result<(Vec<SelectionVector>, u64)> {
    let order = validate(q, k, tau)?;
    let n = q.len();
    let spec = AlternativesSpec::new(k, a, tau)?;
    let mut positions: Vec<usize> = (0..k).collect();
    let mut found: Vec<SelectionVector> = Vec::new();
    let mut checks = 0u64;
    loop {
        if found.len() == a + 1 || max_checks.is_some_and(|cap| checks >= cap) {
            break;
        }
        let indices: Vec<usize> = positions.iter().map(|&p| order[p]).collect();
        let candidate = SelectionVector::from_indices(n, &indices);
        checks += 1;
        if is_valid_alternative(&candidate, &found, &spec) {
            found.push(candidate);
        }
        // lexicographic successor of the position array
        let mut advanced = false;
        let mut slot = k;
        while slot > 0 {
            slot -= 1;
            if positions[slot] < n - (k - slot) {
                let base = positions[slot] + 1;
                for offset in 0..(k - slot) {
                    positions[slot + offset] = base + offset;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    Ok((found, checks))
}
