//! Exact search for optimal alternatives via depth-first branch-and-bound.
//!
//! The engine searches binary selection vectors directly: decisions are
//! ordered feature-major (features in descending quality, then set index for
//! simultaneous families), the include branch is tried before exclude, and
//! per-set overlap budgets against existing sets and partner sets are
//! propagated incrementally. Objective-specific admissible upper bounds
//! prune subtrees that cannot strictly beat the incumbent:
//!
//! - univariate / FCBF: current value plus the best fill of the remaining
//!   cardinality from the top undecided qualities, truncated by each
//!   existing set's remaining overlap budget;
//! - mRMR: relevance-only fill (future redundancy only subtracts);
//! - min-aggregation: the minimum of the per-set bounds.
//!
//! The engine evaluates everything directly instead of building a MILP: no
//! product-linearization variables for overlaps, no big-M for the mRMR
//! redundancy, no epigraph variable for min-aggregation. The corresponding
//! linearization identities are pinned by tests in `altset`.
//!
//! For the univariate objective with non-negative qualities, the candidate
//! pool is pre-selected down to the `(sets sought + sets fixed) * k` best
//! features, which is lossless for optimality by the objective's
//! monotonicity. A solve runs single-threaded and deterministically; a
//! cooperative timeout check fires every 1024 node expansions.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::altset::{
    max_overlap, Aggregation, AlternativesSpec, SelectionVector,
};
use crate::error::{Error, Result};
use crate::quality::{DependencyMatrix, FeatureQualities};

/// How often (in node expansions) the engine polls the deadline.
const TIMEOUT_CHECK_MASK: u64 = 1023;
/// Default per-feature-set solver budget.
const DEFAULT_TIMEOUT_PER_SET_MS: u64 = 60_000;

/// White-box feature-set quality function.
#[derive(Debug, Clone)]
pub enum Objective {
    /// Sum of per-feature target qualities over the selection.
    Univariate(FeatureQualities),
    /// Univariate sum under predominance constraints: two features cannot be
    /// selected together when their mutual dependency reaches either one's
    /// target quality.
    Fcbf {
        qualities: FeatureQualities,
        /// Unordered index pairs that may not be selected together.
        forbidden_pairs: Vec<(usize, usize)>,
    },
    /// Averaged relevance minus averaged pairwise redundancy, defined for a
    /// fixed set size `k` (the denominators); self-redundancy is zero.
    Mrmr {
        qualities: FeatureQualities,
        dependencies: DependencyMatrix,
        k: usize,
    },
}

impl Objective {
    /// Builds the FCBF objective, precomputing the forbidden pairs from the
    /// predominance condition.
    pub fn fcbf(qualities: FeatureQualities, dependencies: &DependencyMatrix) -> Objective {
        let n = qualities.len();
        let mut forbidden_pairs = Vec::new();
        for j1 in 0..n {
            for j2 in (j1 + 1)..n {
                let d = dependencies.get(j1, j2);
                if qualities.values[j1] <= d || qualities.values[j2] <= d {
                    forbidden_pairs.push((j1, j2));
                }
            }
        }
        Objective::Fcbf {
            qualities,
            forbidden_pairs,
        }
    }

    pub fn qualities(&self) -> &FeatureQualities {
        match self {
            Objective::Univariate(q) => q,
            Objective::Fcbf { qualities, .. } => qualities,
            Objective::Mrmr { qualities, .. } => qualities,
        }
    }

    pub fn num_features(&self) -> usize {
        self.qualities().len()
    }
}

/// Outcome of one solve call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// Search completed with a proven optimum.
    Optimal,
    /// Search completed and proved that no valid solution exists.
    Infeasible,
    /// Timeout hit with an incumbent whose optimality is unproven.
    Feasible,
    /// Timeout hit before any valid solution was found.
    NotSolved,
}

impl std::fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SearchStatus::Optimal => "optimal",
            SearchStatus::Infeasible => "infeasible",
            SearchStatus::Feasible => "feasible",
            SearchStatus::NotSolved => "not_solved",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub selections: Vec<SelectionVector>,
    /// Objective value per selection, aligned with `selections`.
    pub objective_values: Vec<f64>,
    pub status: SearchStatus,
    pub wall_time_ms: u64,
    pub nodes_expanded: u64,
}

impl Solution {
    pub fn found(&self) -> bool {
        matches!(self.status, SearchStatus::Optimal | SearchStatus::Feasible)
    }

    /// Aggregated objective over the selections; `None` when nothing was found.
    pub fn aggregate(&self, aggregation: Aggregation) -> Option<f64> {
        if self.objective_values.is_empty() {
            return None;
        }
        Some(match aggregation {
            Aggregation::Sum => self.objective_values.iter().sum(),
            Aggregation::Min => self
                .objective_values
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min),
        })
    }
}

/// Evaluates the objective on one selection.
///
/// For mRMR the selection must have exactly the objective's cardinality `k`;
/// for FCBF the selection must not violate a forbidden pair (such a vector
/// is infeasible rather than low-quality).
pub fn evaluate_objective(s: &SelectionVector, obj: &Objective) -> Result<f64> {
    let selected = s.indices();
    match obj {
        Objective::Univariate(q) => Ok(selected.iter().map(|&j| q.values[j]).sum()),
        Objective::Fcbf {
            qualities,
            forbidden_pairs,
        } => {
            for &(j1, j2) in forbidden_pairs {
                if s.get(j1) && s.get(j2) {
                    return Err(Error::ForbiddenPairViolated(j1, j2));
                }
            }
            Ok(selected.iter().map(|&j| qualities.values[j]).sum())
        }
        Objective::Mrmr {
            qualities,
            dependencies,
            k,
        } => {
            if selected.len() != *k {
                return Err(Error::CardinalityMismatch {
                    got: selected.len(),
                    expected: *k,
                });
            }
            let relevance: f64 = selected.iter().map(|&j| qualities.values[j]).sum();
            if *k == 1 {
                return Ok(relevance);
            }
            let mut redundancy = 0.0;
            for &j1 in &selected {
                for &j2 in &selected {
                    if j1 != j2 {
                        redundancy += dependencies.get(j1, j2);
                    }
                }
            }
            Ok(relevance / *k as f64 - redundancy / (*k as f64 * (*k as f64 - 1.0)))
        }
    }
}

/// Indices of the `min(n, (a+1)*k)` highest qualities, ascending; ties go to
/// the lower index. Sound only for the univariate objective (whose
/// monotonicity guarantees an optimal solution inside the pool), so the
/// other objectives are rejected.
pub fn preselect(obj: &Objective, a: usize, k: usize) -> Result<Vec<usize>> {
    let q = match obj {
        Objective::Univariate(q) => q,
        _ => {
            return Err(Error::invalid(
                "pre-selection is only sound for the univariate objective",
            ))
        }
    };
    q.ensure_non_negative()?;
    let mut indices = quality_order(&q.values);
    indices.truncate(q.len().min((a + 1) * k));
    indices.sort_unstable();
    Ok(indices)
}

/// All feature indices by descending quality, ties broken by lower index.
fn quality_order(q: &[f64]) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..q.len()).collect();
    indices.sort_by(|&a, &b| q[b].partial_cmp(&q[a]).unwrap().then(a.cmp(&b)));
    indices
}

/// Maximizes the objective over one new selection of cardinality `k` whose
/// overlap with every existing set stays within the budget implied by
/// `spec.tau`. Infeasibility is a status, not an error.
pub fn solve_sequential(
    obj: &Objective,
    spec: &AlternativesSpec,
    existing: &[SelectionVector],
) -> Result<Solution> {
    let engine = Engine::for_objective(obj, spec, existing, 1)?;
    Ok(engine.run())
}

/// Jointly maximizes the aggregated objective over `a + 1` selections of
/// cardinality `k` under pairwise overlap budgets.
pub fn solve_simultaneous(obj: &Objective, spec: &AlternativesSpec) -> Result<Solution> {
    let engine = Engine::for_objective(obj, spec, &[], spec.a + 1)?;
    Ok(engine.run())
}

/// Sequential chain: `a + 1` solve calls, threading every found set into the
/// next step's constraints. Every step is attempted; once a step comes back
/// infeasible the constraint set stops growing, so later steps re-prove the
/// same outcome rather than being assumed infeasible.
pub fn run_sequential_chain(obj: &Objective, spec: &AlternativesSpec) -> Result<Vec<Solution>> {
    let mut found: Vec<SelectionVector> = Vec::new();
    let mut solutions = Vec::with_capacity(spec.a + 1);
    for _ in 0..=spec.a {
        let solution = solve_sequential(obj, spec, &found)?;
        if solution.found() {
            found.push(solution.selections[0].clone());
        }
        solutions.push(solution);
    }
    Ok(solutions)
}

/// Finds any family of `num_sets` valid selections (constant objective,
/// first-feasible exit), optionally under forced assignments
/// `(set, feature, value)`. This is the satisfiability mode used by the
/// greedy wrapper.
pub fn solve_satisfiable(
    spec: &AlternativesSpec,
    num_features: usize,
    num_sets: usize,
    existing: &[SelectionVector],
    forced: &[(usize, usize, bool)],
) -> Result<Solution> {
    let mut engine = Engine::new(
        EngineKind::Satisfy,
        num_features,
        spec,
        existing,
        num_sets,
        (0..num_features).collect(),
    )?;
    for &(set, feature, value) in forced {
        if set >= num_sets || feature >= num_features {
            return Err(Error::invalid("forced assignment out of range"));
        }
        engine.forced[set][feature] = Some(value);
    }
    Ok(engine.run())
}

enum EngineKind<'a> {
    /// Univariate and FCBF: the per-set value is the selected quality sum.
    Additive {
        q: &'a [f64],
        forbidden: Option<Vec<Vec<bool>>>,
    },
    Mrmr {
        q: &'a [f64],
        d: &'a DependencyMatrix,
    },
    Satisfy,
}

struct Engine<'a> {
    kind: EngineKind<'a>,
    n: usize,
    k: usize,
    num_sets: usize,
    aggregation: Aggregation,
    /// Branching order over the candidate pool (original feature indices).
    order: Vec<usize>,
    /// Prefix sums of quality along `order` (len `order.len() + 1`).
    prefix: Vec<f64>,
    /// Membership of `order[p]` in each existing set.
    existing_member: Vec<Vec<bool>>,
    existing: &'a [SelectionVector],
    budget: usize,
    forced: Vec<Vec<Option<bool>>>,
    timeout_ms: u64,
}

struct SearchState {
    bits: Vec<Vec<bool>>,
    selected: Vec<Vec<usize>>,
    counts: Vec<usize>,
    relevance: Vec<f64>,
    /// Ordered-pair redundancy sums (only maintained for mRMR).
    redundancy: Vec<f64>,
    overlap_existing: Vec<Vec<usize>>,
    /// `overlap_pairs[hi][lo]` for variable-set pairs with `lo < hi`.
    overlap_pairs: Vec<Vec<usize>>,
    incumbent: Option<Incumbent>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
    stop: bool,
}

struct Incumbent {
    value: f64,
    selections: Vec<SelectionVector>,
    per_set: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn for_objective(
        obj: &'a Objective,
        spec: &AlternativesSpec,
        existing: &'a [SelectionVector],
        num_sets: usize,
    ) -> Result<Engine<'a>> {
        let n = obj.num_features();
        if let Objective::Mrmr { k, .. } = obj {
            if *k != spec.k {
                return Err(Error::invalid(format!(
                    "mRMR objective is defined for k={k} but the search asks for k={}",
                    spec.k
                )));
            }
        }
        let q = &obj.qualities().values;
        let mut order = quality_order(q);
        // pre-selection: lossless for the monotone univariate objective
        if matches!(obj, Objective::Univariate(_)) && obj.qualities().ensure_non_negative().is_ok()
        {
            order.truncate(n.min((existing.len() + num_sets) * spec.k));
        }
        let kind = match obj {
            Objective::Univariate(_) => EngineKind::Additive { q, forbidden: None },
            Objective::Fcbf {
                forbidden_pairs, ..
            } => {
                let mut matrix = vec![vec![false; n]; n];
                for &(j1, j2) in forbidden_pairs {
                    matrix[j1][j2] = true;
                    matrix[j2][j1] = true;
                }
                EngineKind::Additive {
                    q,
                    forbidden: Some(matrix),
                }
            }
            Objective::Mrmr { dependencies, .. } => EngineKind::Mrmr { q, d: dependencies },
        };
        Engine::new(kind, n, spec, existing, num_sets, order)
    }

    fn new(
        kind: EngineKind<'a>,
        n: usize,
        spec: &AlternativesSpec,
        existing: &'a [SelectionVector],
        num_sets: usize,
        order: Vec<usize>,
    ) -> Result<Engine<'a>> {
        if spec.k > n {
            return Err(Error::invalid(format!(
                "feature-set size {} exceeds the number of features {n}",
                spec.k
            )));
        }
        for e in existing {
            if e.len() != n {
                return Err(Error::LengthMismatch(e.len(), n));
            }
            if e.cardinality() != spec.k {
                return Err(Error::CardinalityMismatch {
                    got: e.cardinality(),
                    expected: spec.k,
                });
            }
        }
        let q_along_order: Vec<f64> = match &kind {
            EngineKind::Additive { q, .. } => order.iter().map(|&j| q[j]).collect(),
            EngineKind::Mrmr { q, .. } => order.iter().map(|&j| q[j]).collect(),
            EngineKind::Satisfy => vec![0.0; order.len()],
        };
        let mut prefix = vec![0.0; order.len() + 1];
        for (p, v) in q_along_order.iter().enumerate() {
            prefix[p + 1] = prefix[p] + v;
        }
        let existing_member = existing
            .iter()
            .map(|e| order.iter().map(|&j| e.get(j)).collect())
            .collect();
        Ok(Engine {
            kind,
            n,
            k: spec.k,
            num_sets,
            aggregation: spec.aggregation,
            order,
            prefix,
            existing_member,
            existing,
            budget: max_overlap(spec.k, spec.k, spec.tau, spec.measure),
            forced: vec![vec![None; n]; num_sets],
            timeout_ms: spec
                .timeout_ms
                .unwrap_or(DEFAULT_TIMEOUT_PER_SET_MS * num_sets as u64),
        })
    }

    fn run(&self) -> Solution {
        let start = Instant::now();
        let mut st = SearchState {
            bits: vec![vec![false; self.n]; self.num_sets],
            selected: vec![Vec::with_capacity(self.k); self.num_sets],
            counts: vec![0; self.num_sets],
            relevance: vec![0.0; self.num_sets],
            redundancy: vec![0.0; self.num_sets],
            overlap_existing: vec![vec![0; self.existing.len()]; self.num_sets],
            overlap_pairs: (0..self.num_sets).map(|i| vec![0; i]).collect(),
            incumbent: None,
            nodes: 0,
            deadline: start + std::time::Duration::from_millis(self.timeout_ms),
            timed_out: false,
            stop: false,
        };
        self.dfs(&mut st, 0);
        let status = match (&st.incumbent, st.timed_out) {
            (Some(_), false) => SearchStatus::Optimal,
            (None, false) => SearchStatus::Infeasible,
            (Some(_), true) => SearchStatus::Feasible,
            (None, true) => SearchStatus::NotSolved,
        };
        let status = if matches!(self.kind, EngineKind::Satisfy) && status == SearchStatus::Optimal
        {
            // satisfiability proves existence, not optimality
            SearchStatus::Feasible
        } else {
            status
        };
        let (selections, objective_values) = match st.incumbent {
            Some(inc) => (inc.selections, inc.per_set),
            None => (Vec::new(), Vec::new()),
        };
        Solution {
            selections,
            objective_values,
            status,
            wall_time_ms: start.elapsed().as_millis() as u64,
            nodes_expanded: st.nodes,
        }
    }

    fn dfs(&self, st: &mut SearchState, depth: usize) {
        if st.stop || st.timed_out {
            return;
        }
        st.nodes += 1;
        if st.nodes & TIMEOUT_CHECK_MASK == 0 && Instant::now() >= st.deadline {
            st.timed_out = true;
            return;
        }
        if !self.feasible_and_promising(st, depth) {
            return;
        }
        if depth == self.num_sets * self.order.len() {
            self.complete(st);
            return;
        }
        let position = depth / self.num_sets;
        let set = depth % self.num_sets;
        let feature = self.order[position];
        let forced = self.forced[set][feature];
        if forced != Some(false) && self.can_include(st, set, position) {
            self.apply_include(st, set, position);
            self.dfs(st, depth + 1);
            self.undo_include(st, set, position);
            if st.stop || st.timed_out {
                return;
            }
        }
        if forced != Some(true) {
            self.dfs(st, depth + 1);
        }
    }

    /// First undecided position in `order` for the given set once `depth`
    /// decisions are made.
    fn next_position(&self, depth: usize, set: usize) -> usize {
        (depth + self.num_sets - 1 - set) / self.num_sets
    }

    fn can_include(&self, st: &SearchState, set: usize, position: usize) -> bool {
        if st.counts[set] == self.k {
            return false;
        }
        let feature = self.order[position];
        for (e_idx, member) in self.existing_member.iter().enumerate() {
            if member[position] && st.overlap_existing[set][e_idx] + 1 > self.budget {
                return false;
            }
        }
        for other in 0..self.num_sets {
            if other == set || !st.bits[other][feature] {
                continue;
            }
            let (hi, lo) = if set > other { (set, other) } else { (other, set) };
            if st.overlap_pairs[hi][lo] + 1 > self.budget {
                return false;
            }
        }
        if let EngineKind::Additive {
            forbidden: Some(matrix),
            ..
        } = &self.kind
        {
            if st.selected[set].iter().any(|&j| matrix[feature][j]) {
                return false;
            }
        }
        true
    }

    fn apply_include(&self, st: &mut SearchState, set: usize, position: usize) {
        let feature = self.order[position];
        if let EngineKind::Mrmr { d, .. } = &self.kind {
            let delta: f64 = st.selected[set]
                .iter()
                .map(|&j| 2.0 * d.get(feature, j))
                .sum();
            st.redundancy[set] += delta;
        }
        st.relevance[set] += self.quality_at(position);
        st.bits[set][feature] = true;
        st.selected[set].push(feature);
        st.counts[set] += 1;
        for (e_idx, member) in self.existing_member.iter().enumerate() {
            if member[position] {
                st.overlap_existing[set][e_idx] += 1;
            }
        }
        for other in 0..self.num_sets {
            if other != set && st.bits[other][feature] {
                let (hi, lo) = if set > other { (set, other) } else { (other, set) };
                st.overlap_pairs[hi][lo] += 1;
            }
        }
    }

    fn undo_include(&self, st: &mut SearchState, set: usize, position: usize) {
        let feature = self.order[position];
        st.bits[set][feature] = false;
        st.selected[set].pop();
        st.counts[set] -= 1;
        st.relevance[set] -= self.quality_at(position);
        if let EngineKind::Mrmr { d, .. } = &self.kind {
            let delta: f64 = st.selected[set]
                .iter()
                .map(|&j| 2.0 * d.get(feature, j))
                .sum();
            st.redundancy[set] -= delta;
        }
        for (e_idx, member) in self.existing_member.iter().enumerate() {
            if member[position] {
                st.overlap_existing[set][e_idx] -= 1;
            }
        }
        for other in 0..self.num_sets {
            if other != set && st.bits[other][feature] {
                let (hi, lo) = if set > other { (set, other) } else { (other, set) };
                st.overlap_pairs[hi][lo] -= 1;
            }
        }
    }

    fn quality_at(&self, position: usize) -> f64 {
        self.prefix[position + 1] - self.prefix[position]
    }

    /// Cardinality feasibility for every set plus the admissible bound test
    /// against the incumbent.
    fn feasible_and_promising(&self, st: &SearchState, depth: usize) -> bool {
        let pool = self.order.len();
        let mut aggregate = match self.aggregation {
            Aggregation::Sum => 0.0,
            Aggregation::Min => f64::INFINITY,
        };
        for set in 0..self.num_sets {
            let start = self.next_position(depth, set);
            let need = self.k - st.counts[set];
            if start + need > pool {
                return false;
            }
            if matches!(self.kind, EngineKind::Satisfy) {
                continue;
            }
            let Some(fill) = self.best_fill(st, set, start, need) else {
                return false;
            };
            let ub = match &self.kind {
                EngineKind::Additive { .. } => st.relevance[set] + fill,
                EngineKind::Mrmr { .. } => {
                    let kf = self.k as f64;
                    if self.k == 1 {
                        st.relevance[set] + fill
                    } else {
                        (st.relevance[set] + fill) / kf - st.redundancy[set] / (kf * (kf - 1.0))
                    }
                }
                EngineKind::Satisfy => unreachable!(),
            };
            aggregate = match self.aggregation {
                Aggregation::Sum => aggregate + ub,
                Aggregation::Min => aggregate.min(ub),
            };
        }
        if matches!(self.kind, EngineKind::Satisfy) {
            return true;
        }
        match &st.incumbent {
            Some(inc) => aggregate > inc.value,
            None => true,
        }
    }

    /// Largest achievable quality sum when filling `need` more features for
    /// `set` from the undecided tail `order[start..]`.
    ///
    /// The unconstrained fill is the prefix-sum of the top `need` remaining
    /// qualities. Each existing set's remaining overlap budget caps how many
    /// of its members the fill may contain; taking features in descending
    /// quality while skipping over-budget members is optimal for a single
    /// cap, so the minimum over caps stays an upper bound for the
    /// fully-constrained completion. `None` means no completion can satisfy
    /// some cap, which proves this branch dead. mRMR skips the cap
    /// refinement and uses the plain fill.
    fn best_fill(&self, st: &SearchState, set: usize, start: usize, need: usize) -> Option<f64> {
        let plain = self.prefix[start + need] - self.prefix[start];
        if need == 0 {
            return Some(0.0);
        }
        if self.existing.is_empty() || matches!(self.kind, EngineKind::Mrmr { .. }) {
            return Some(plain);
        }
        let mut fill = plain;
        for (e_idx, member) in self.existing_member.iter().enumerate() {
            let cap = self.budget - st.overlap_existing[set][e_idx];
            let mut taken = 0usize;
            let mut taken_member = 0usize;
            let mut sum = 0.0;
            for p in start..self.order.len() {
                if member[p] {
                    if taken_member == cap {
                        continue;
                    }
                    taken_member += 1;
                }
                sum += self.quality_at(p);
                taken += 1;
                if taken == need {
                    break;
                }
            }
            if taken < need {
                return None;
            }
            fill = fill.min(sum);
        }
        Some(fill)
    }

    fn complete(&self, st: &mut SearchState) {
        let per_set: Vec<f64> = (0..self.num_sets)
            .map(|set| match &self.kind {
                EngineKind::Additive { .. } | EngineKind::Satisfy => st.relevance[set],
                EngineKind::Mrmr { .. } => {
                    let kf = self.k as f64;
                    if self.k == 1 {
                        st.relevance[set]
                    } else {
                        st.relevance[set] / kf - st.redundancy[set] / (kf * (kf - 1.0))
                    }
                }
            })
            .collect();
        let value = match self.aggregation {
            Aggregation::Sum => per_set.iter().sum(),
            Aggregation::Min => per_set.iter().cloned().fold(f64::INFINITY, f64::min),
        };
        let improved = st.incumbent.as_ref().is_none_or(|inc| value > inc.value);
        if improved {
            st.incumbent = Some(Incumbent {
                value,
                selections: st
                    .bits
                    .iter()
                    .map(|bits| SelectionVector::new(bits.clone()))
                    .collect(),
                per_set,
            });
        }
        if matches!(self.kind, EngineKind::Satisfy) {
            st.stop = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altset::DissimilarityMeasure;
    use crate::quality::Normalization;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn uni(q: &[f64]) -> Objective {
        Objective::Univariate(FeatureQualities::new(
            q.to_vec(),
            "test",
            Normalization::None,
        ))
    }

    fn example5() -> Objective {
        uni(&[9.0, 8.0, 7.0, 3.0, 2.0, 1.0])
    }

    #[test]
    fn evaluate_univariate_top_three() {
        let s = SelectionVector::from_indices(6, &[0, 1, 2]);
        assert_eq!(evaluate_objective(&s, &example5()).unwrap(), 24.0);
        let empty = SelectionVector::empty(6);
        assert_eq!(evaluate_objective(&empty, &example5()).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_mrmr_hand_example() {
        let q = FeatureQualities::new(vec![1.0, 1.0], "test", Normalization::None);
        let d = DependencyMatrix::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let obj = Objective::Mrmr {
            qualities: q,
            dependencies: d,
            k: 2,
        };
        let s = SelectionVector::from_indices(2, &[0, 1]);
        // relevance (1+1)/2 = 1, redundancy (1+1)/(2*1) = 1
        assert_eq!(evaluate_objective(&s, &obj).unwrap(), 0.0);
        let wrong = SelectionVector::from_indices(2, &[0]);
        assert!(matches!(
            evaluate_objective(&wrong, &obj),
            Err(Error::CardinalityMismatch { .. })
        ));
    }

    #[test]
    fn evaluate_fcbf_rejects_forbidden_pair() {
        let q = FeatureQualities::new(vec![0.5, 0.4, 0.3], "test", Normalization::None);
        let d = DependencyMatrix::new(vec![
            vec![0.0, 0.9, 0.0],
            vec![0.9, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let obj = Objective::fcbf(q, &d);
        let bad = SelectionVector::from_indices(3, &[0, 1]);
        assert!(matches!(
            evaluate_objective(&bad, &obj),
            Err(Error::ForbiddenPairViolated(0, 1))
        ));
        let good = SelectionVector::from_indices(3, &[0, 2]);
        assert!((evaluate_objective(&good, &obj).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn preselect_takes_top_values_and_rejects_multivariate() {
        let obj = example5();
        assert_eq!(preselect(&obj, 1, 2).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(preselect(&obj, 2, 3).unwrap(), vec![0, 1, 2, 3, 4, 5]);

        let q = FeatureQualities::new(vec![1.0, 1.0], "test", Normalization::None);
        let d = DependencyMatrix::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(preselect(&Objective::fcbf(q, &d), 1, 1).is_err());
    }

    fn spec(k: usize, a: usize, tau: f64) -> AlternativesSpec {
        AlternativesSpec::new(k, a, tau).unwrap()
    }

    #[test]
    fn sequential_steps_match_the_worked_instance() {
        let obj = example5();
        let s = spec(3, 2, 0.5);
        let first = solve_sequential(&obj, &s, &[]).unwrap();
        assert_eq!(first.status, SearchStatus::Optimal);
        assert_eq!(first.objective_values[0], 24.0);

        let top3 = SelectionVector::from_indices(6, &[0, 1, 2]);
        let second = solve_sequential(&obj, &s, std::slice::from_ref(&top3)).unwrap();
        assert_eq!(second.status, SearchStatus::Optimal);
        assert_eq!(second.objective_values[0], 14.0);

        let third = solve_sequential(&obj, &s, &[top3, second.selections[0].clone()]).unwrap();
        assert_eq!(third.status, SearchStatus::Optimal);
        assert_eq!(third.objective_values[0], 12.0);
    }

    #[test]
    fn chain_reproduces_the_objective_sequence() {
        let chain = run_sequential_chain(&example5(), &spec(3, 2, 0.5)).unwrap();
        let values: Vec<f64> = chain.iter().map(|s| s.objective_values[0]).collect();
        assert_eq!(values, vec![24.0, 14.0, 12.0]);
    }

    #[test]
    fn chain_with_no_alternatives_returns_top_k() {
        let chain = run_sequential_chain(&example5(), &spec(3, 0, 0.5)).unwrap();
        assert_eq!(chain.len(), 1);
        assert_eq!(chain[0].selections[0].indices(), vec![0, 1, 2]);
    }

    #[test]
    fn sequential_infeasible_when_too_few_features_remain() {
        let obj = uni(&[4.0, 3.0, 2.0, 1.0]);
        let s = spec(3, 1, 1.0);
        let existing = SelectionVector::from_indices(4, &[0, 1, 2]);
        let sol = solve_sequential(&obj, &s, &[existing]).unwrap();
        assert_eq!(sol.status, SearchStatus::Infeasible);
        assert!(sol.selections.is_empty());
    }

    #[test]
    fn simultaneous_sum_matches_the_worked_instance() {
        let sol = solve_simultaneous(&example5(), &spec(3, 2, 0.5)).unwrap();
        assert_eq!(sol.status, SearchStatus::Optimal);
        assert_eq!(sol.aggregate(Aggregation::Sum).unwrap(), 54.0);
    }

    #[test]
    fn simultaneous_min_matches_the_worked_instances() {
        let s = spec(3, 1, 0.5).with_aggregation(Aggregation::Min);
        let sol = solve_simultaneous(&example5(), &s).unwrap();
        assert_eq!(sol.aggregate(Aggregation::Min).unwrap(), 19.0);

        let other = uni(&[11.0, 10.0, 6.0, 5.0, 4.0, 1.0]);
        let sol = solve_simultaneous(&other, &s).unwrap();
        assert_eq!(sol.aggregate(Aggregation::Min).unwrap(), 22.0);
    }

    #[test]
    fn jaccard_budget_is_respected() {
        let s = spec(2, 1, 0.5).with_measure(DissimilarityMeasure::Jaccard);
        let obj = uni(&[5.0, 4.0, 3.0, 2.0]);
        let chain = run_sequential_chain(&obj, &s).unwrap();
        // jaccard at tau=0.5 allows overlap 1 for k=2: {5,4} then {5,3}
        assert_eq!(chain[0].objective_values[0], 9.0);
        assert_eq!(chain[1].objective_values[0], 8.0);
        let d = crate::altset::jaccard(&chain[0].selections[0], &chain[1].selections[0]).unwrap();
        assert!(d >= 0.5 - 1e-9);
    }

    /// Exhaustive reference for one sequential step.
    fn enumerate_sequential(
        obj: &Objective,
        s: &AlternativesSpec,
        existing: &[SelectionVector],
    ) -> Option<f64> {
        let n = obj.num_features();
        let budget = max_overlap(s.k, s.k, s.tau, s.measure);
        let mut best: Option<f64> = None;
        let mut combo: Vec<usize> = (0..s.k).collect();
        loop {
            let cand = SelectionVector::from_indices(n, &combo);
            if existing.iter().all(|e| cand.intersection_size(e) <= budget) {
                if let Ok(value) = evaluate_objective(&cand, obj) {
                    if best.is_none_or(|b| value > b) {
                        best = Some(value);
                    }
                }
            }
            // next k-combination of 0..n
            let mut idx = s.k;
            loop {
                if idx == 0 {
                    return best;
                }
                idx -= 1;
                if combo[idx] < n - (s.k - idx) {
                    combo[idx] += 1;
                    for later in (idx + 1)..s.k {
                        combo[later] = combo[later - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn quick_oracle_equivalence_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.gen_range(4..=9);
            let k = rng.gen_range(1..=3.min(n));
            let tau = [0.25, 0.5, 0.75, 1.0][rng.gen_range(0..4)];
            let q: Vec<f64> = (0..n).map(|_| (rng.gen::<f64>() * 10.0).round() / 10.0).collect();
            let obj = uni(&q);
            let s = spec(k, 1, tau);
            let mut existing = Vec::new();
            for _ in 0..2 {
                let sol = solve_sequential(&obj, &s, &existing).unwrap();
                let reference = enumerate_sequential(&obj, &s, &existing);
                match reference {
                    Some(value) => {
                        assert_eq!(sol.status, SearchStatus::Optimal);
                        assert!(
                            (sol.objective_values[0] - value).abs() < 1e-9,
                            "bnb {} vs enum {value}",
                            sol.objective_values[0]
                        );
                        existing.push(sol.selections[0].clone());
                    }
                    None => {
                        assert_eq!(sol.status, SearchStatus::Infeasible);
                        break;
                    }
                }
            }
        }
    }

    /// The single-cap greedy fill must upper-bound (here: equal) the best
    /// completion found by enumeration under that cap.
    #[test]
    fn truncated_fill_bound_is_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let pool = rng.gen_range(3..9usize);
            let mut q: Vec<f64> = (0..pool).map(|_| rng.gen::<f64>()).collect();
            q.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let member: Vec<bool> = (0..pool).map(|_| rng.gen_bool(0.5)).collect();
            let need = rng.gen_range(1..=pool);
            let cap = rng.gen_range(0..=need);

            // greedy fill, same as Engine::best_fill with one existing set
            let mut taken = 0;
            let mut taken_member = 0;
            let mut greedy = 0.0;
            for p in 0..pool {
                if member[p] {
                    if taken_member == cap {
                        continue;
                    }
                    taken_member += 1;
                }
                greedy += q[p];
                taken += 1;
                if taken == need {
                    break;
                }
            }
            let greedy = (taken == need).then_some(greedy);

            // brute force over all subsets
            let mut best: Option<f64> = None;
            for mask in 0u32..(1 << pool) {
                if mask.count_ones() as usize != need {
                    continue;
                }
                let members_used = (0..pool)
                    .filter(|&p| mask & (1 << p) != 0 && member[p])
                    .count();
                if members_used > cap {
                    continue;
                }
                let sum: f64 = (0..pool)
                    .filter(|&p| mask & (1 << p) != 0)
                    .map(|p| q[p])
                    .sum();
                if best.is_none_or(|b| sum > b) {
                    best = Some(sum);
                }
            }
            match (greedy, best) {
                (Some(g), Some(b)) => assert!(g >= b - 1e-9, "greedy {g} below best {b}"),
                (None, None) => {}
                (g, b) => panic!("feasibility disagreement: greedy {g:?}, brute {b:?}"),
            }
        }
    }

    #[test]
    fn restricting_to_the_preselected_pool_keeps_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 12;
            let q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let (a, k) = (1usize, 3usize);
            let obj = uni(&q);
            let pool = preselect(&obj, a, k).unwrap();
            assert_eq!(pool.len(), (a + 1) * k);

            // restricted instance: non-pool features get quality zero and
            // are excluded by construction of the enumeration below
            let s = spec(k, a, 0.5);
            let full = solve_simultaneous(&obj, &s).unwrap();
            // enumerate families inside the pool only
            let subsets: Vec<Vec<usize>> = {
                let mut out = Vec::new();
                let mut combo: Vec<usize> = (0..k).collect();
                loop {
                    out.push(combo.iter().map(|&i| pool[i]).collect());
                    let mut idx = k;
                    let mut advanced = false;
                    while idx > 0 {
                        idx -= 1;
                        if combo[idx] < pool.len() - (k - idx) {
                            combo[idx] += 1;
                            for later in (idx + 1)..k {
                                combo[later] = combo[later - 1] + 1;
                            }
                            advanced = true;
                            break;
                        }
                    }
                    if !advanced {
                        break;
                    }
                }
                out
            };
            let budget = max_overlap(k, k, 0.5, DissimilarityMeasure::Dice);
            let mut best = f64::NEG_INFINITY;
            for x in 0..subsets.len() {
                for y in (x + 1)..subsets.len() {
                    let sx = SelectionVector::from_indices(n, &subsets[x]);
                    let sy = SelectionVector::from_indices(n, &subsets[y]);
                    if sx.intersection_size(&sy) <= budget {
                        let total: f64 = subsets[x].iter().chain(&subsets[y]).map(|&j| q[j]).sum();
                        best = best.max(total);
                    }
                }
            }
            assert!(
                (full.aggregate(Aggregation::Sum).unwrap() - best).abs() < 1e-9,
                "pool-restricted optimum must equal the unrestricted one"
            );
        }
    }

    /// An FCBF objective with no forbidden pairs is the same additive
    /// objective as Univariate, but only the latter goes through
    /// pre-selection; agreement across engines validates that pre-selection
    /// is lossless beyond enumeration-sized instances.
    #[test]
    fn preselected_and_unrestricted_engines_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.gen_range(8..=16);
            let k = rng.gen_range(2..=5.min(n));
            let a = rng.gen_range(0..=2);
            let tau = [0.25, 0.5, 0.75, 1.0][rng.gen_range(0..4)];
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
            let q = FeatureQualities::new(values, "test", Normalization::None);
            let zero = DependencyMatrix::new(vec![vec![0.0; n]; n]).unwrap();
            let unrestricted = Objective::fcbf(q.clone(), &zero);
            if let Objective::Fcbf {
                forbidden_pairs, ..
            } = &unrestricted
            {
                assert!(forbidden_pairs.is_empty());
            }
            let preselected = Objective::Univariate(q);

            let s = spec(k, a, tau);
            let chain_a = run_sequential_chain(&preselected, &s).unwrap();
            let chain_b = run_sequential_chain(&unrestricted, &s).unwrap();
            for (sa, sb) in chain_a.iter().zip(&chain_b) {
                assert_eq!(sa.status, sb.status);
                if sa.found() {
                    assert!((sa.objective_values[0] - sb.objective_values[0]).abs() < 1e-9);
                }
            }
            for aggregation in [Aggregation::Sum, Aggregation::Min] {
                let s_sim = s.clone().with_aggregation(aggregation);
                let sim_a = solve_simultaneous(&preselected, &s_sim).unwrap();
                let sim_b = solve_simultaneous(&unrestricted, &s_sim).unwrap();
                assert_eq!(sim_a.status, sim_b.status);
                if sim_a.found() {
                    let va = sim_a.aggregate(aggregation).unwrap();
                    let vb = sim_b.aggregate(aggregation).unwrap();
                    assert!((va - vb).abs() < 1e-9, "preselected {va} vs unrestricted {vb}");
                }
            }
        }
    }

    #[test]
    fn satisfiability_honors_forced_assignments() {
        let s = spec(2, 0, 0.5);
        let sol = solve_satisfiable(&s, 4, 1, &[], &[(0, 0, false), (0, 3, true)]).unwrap();
        assert_eq!(sol.status, SearchStatus::Feasible);
        let sel = &sol.selections[0];
        assert!(!sel.get(0));
        assert!(sel.get(3));
        assert_eq!(sel.cardinality(), 2);
    }

    #[test]
    fn satisfiability_detects_infeasibility() {
        // forcing three features into a k=2 set cannot work
        let s = spec(2, 0, 0.5);
        let sol =
            solve_satisfiable(&s, 4, 1, &[], &[(0, 0, true), (0, 1, true), (0, 2, true)]).unwrap();
        assert_eq!(sol.status, SearchStatus::Infeasible);
    }

    #[test]
    fn tiny_timeout_cannot_claim_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let q = FeatureQualities::new(
            (0..n).map(|_| rng.gen::<f64>()).collect(),
            "test",
            Normalization::None,
        );
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen::<f64>();
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        let obj = Objective::Mrmr {
            qualities: q,
            dependencies: DependencyMatrix::new(d).unwrap(),
            k: 10,
        };
        let s = spec(10, 1, 0.5).with_timeout_ms(Some(1));
        let sol = solve_simultaneous(&obj, &s).unwrap();
        assert!(
            matches!(sol.status, SearchStatus::Feasible | SearchStatus::NotSolved),
            "status {:?}",
            sol.status
        );
    }
}
