//! Shared test oracles: exhaustive enumeration references for the search
//! problems, independent of the branch-and-bound implementation they check.
//! Validity is decided through the dissimilarity-threshold route
//! ([`is_valid_alternative`]), not the integer overlap budgets the engine
//! propagates, so the two algebraic routes check each other.

use altfs::altset::{is_valid_alternative, Aggregation, AlternativesSpec, SelectionVector};
use altfs::solver::{evaluate_objective, Objective};

/// All size-`k` subsets of `0..n` as selection vectors.
pub fn k_subsets(n: usize, k: usize) -> Vec<SelectionVector> {
    let mut out = Vec::new();
    let mut combo: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(SelectionVector::from_indices(n, &combo));
        let mut slot = k;
        let mut advanced = false;
        while slot > 0 {
            slot -= 1;
            if combo[slot] < n - (k - slot) {
                combo[slot] += 1;
                for later in (slot + 1)..k {
                    combo[later] = combo[later - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return out;
        }
    }
}

/// Best objective value of one additional selection that is a valid
/// alternative to everything in `existing`; `None` when none exists.
pub fn enumerate_sequential_step(
    obj: &Objective,
    spec: &AlternativesSpec,
    existing: &[SelectionVector],
) -> Option<f64> {
    let n = obj.num_features();
    let mut best: Option<f64> = None;
    for cand in k_subsets(n, spec.k) {
        if !is_valid_alternative(&cand, existing, spec) {
            continue;
        }
        let Ok(value) = evaluate_objective(&cand, obj) else {
            continue;
        };
        if best.is_none_or(|b| value > b) {
            best = Some(value);
        }
    }
    best
}

/// Best aggregated value over families of `num_sets` pairwise-valid
/// selections; `None` when no valid family exists.
pub fn enumerate_family(
    obj: &Objective,
    spec: &AlternativesSpec,
    num_sets: usize,
    aggregation: Aggregation,
) -> Option<f64> {
    let n = obj.num_features();
    // candidates with their values; FCBF-violating subsets are not candidates
    let candidates: Vec<(SelectionVector, f64)> = k_subsets(n, spec.k)
        .into_iter()
        .filter_map(|s| evaluate_objective(&s, obj).ok().map(|v| (s, v)))
        .collect();
    let mut best: Option<f64> = None;
    let mut chosen: Vec<usize> = Vec::with_capacity(num_sets);
    fn recurse(
        candidates: &[(SelectionVector, f64)],
        spec: &AlternativesSpec,
        num_sets: usize,
        aggregation: Aggregation,
        start: usize,
        chosen: &mut Vec<usize>,
        best: &mut Option<f64>,
    ) {
        if chosen.len() == num_sets {
            let value = match aggregation {
                Aggregation::Sum => chosen.iter().map(|&i| candidates[i].1).sum(),
                Aggregation::Min => chosen
                    .iter()
                    .map(|&i| candidates[i].1)
                    .fold(f64::INFINITY, f64::min),
            };
            if best.is_none_or(|b| value > b) {
                *best = Some(value);
            }
            return;
        }
        for next in start..candidates.len() {
            let valid = chosen.iter().all(|&i| {
                is_valid_alternative(
                    &candidates[next].0,
                    std::slice::from_ref(&candidates[i].0),
                    spec,
                )
            });
            if !valid {
                continue;
            }
            chosen.push(next);
            recurse(candidates, spec, num_sets, aggregation, next + 1, chosen, best);
            chosen.pop();
        }
    }
    recurse(
        &candidates,
        spec,
        num_sets,
        aggregation,
        0,
        &mut chosen,
        &mut best,
    );
    best
}
