//! Greedy Wrapper: solver-assisted hill climbing for black-box feature-set
//! quality.
//!
//! The solver is used in satisfiability mode only: it produces a valid
//! starting family and then, per step, one valid family containing a forced
//! "swap" (both features of a pair flip their current assignment in every
//! set). A swap is accepted iff the oracle score strictly improves; the swap
//! indices reset on acceptance. Iterations are counted as solver
//! invocations, the initial one included, and the oracle is consulted only
//! for the start and for feasible swap results.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::time::Instant;

use crate::altset::{AlternativesSpec, SelectionVector};
use crate::data::{stratified_holdout, Dataset};
use crate::error::{Error, Result};
use crate::predict::{mcc, train_tree, TreeParams};
use crate::solver::{solve_satisfiable, SearchStatus, Solution};

/// Black-box evaluator of a family of selections; higher is better and the
/// score must be deterministic for a given family.
pub trait QualityOracle {
    fn evaluate(&mut self, family: &[SelectionVector]) -> Result<f64>;
    /// Number of `evaluate` calls so far.
    fn evaluations(&self) -> u64;
    fn num_features(&self) -> usize;
}

/// Whether the wrapper searches one new set against fixed existing sets or
/// all `a + 1` sets jointly.
#[derive(Debug, Clone)]
pub enum WrapperMode {
    SequentialStep { existing: Vec<SelectionVector> },
    Simultaneous,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WrapperStats {
    pub solver_invocations: u64,
    pub accepted_steps: u64,
}

/// Runs the hill climb from a solver-found start. The returned solution
/// carries the family and the oracle's single joint score in
/// `objective_values`; the status is `Feasible` on success, or the initial
/// satisfiability status when no valid family exists.
pub fn greedy_wrapper(
    oracle: &mut dyn QualityOracle,
    spec: &AlternativesSpec,
    mode: &WrapperMode,
    max_iters: u64,
) -> Result<Solution> {
    greedy_wrapper_detailed(oracle, spec, mode, max_iters).map(|(solution, _)| solution)
}

/// [`greedy_wrapper`] plus iteration statistics.
pub fn greedy_wrapper_detailed(
    oracle: &mut dyn QualityOracle,
    spec: &AlternativesSpec,
    mode: &WrapperMode,
    max_iters: u64,
) -> Result<(Solution, WrapperStats)> {
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    let start = Instant::now();
    let n = oracle.num_features();
    let (num_sets, existing) = match mode {
        WrapperMode::SequentialStep { existing } => (1, existing.as_slice()),
        WrapperMode::Simultaneous => (spec.a + 1, &[] as &[SelectionVector]),
    };
    let init = solve_satisfiable(spec, n, num_sets, existing, &[])?;
    let mut stats = WrapperStats {
        solver_invocations: 1,
        accepted_steps: 0,
    };
    let mut nodes = init.nodes_expanded;
    if !init.found() {
        let solution = Solution {
            selections: Vec::new(),
            objective_values: Vec::new(),
            status: init.status,
            wall_time_ms: start.elapsed().as_millis() as u64,
            nodes_expanded: nodes,
        };
        return Ok((solution, stats));
    }
    let outcome = climb(
        oracle,
        spec,
        existing,
        num_sets,
        init.selections,
        max_iters,
        &mut stats,
        &mut nodes,
    )?;
    let solution = Solution {
        selections: outcome.0,
        objective_values: vec![outcome.1],
        status: SearchStatus::Feasible,
        wall_time_ms: start.elapsed().as_millis() as u64,
        nodes_expanded: nodes,
    };
    Ok((solution, stats))
}

/// Hill climb from an explicit feasible family instead of a solver-found
/// one. The start counts as the first iteration, mirroring the usual entry
/// point.
pub fn greedy_wrapper_from(
    oracle: &mut dyn QualityOracle,
    spec: &AlternativesSpec,
    mode: &WrapperMode,
    max_iters: u64,
    start_family: Vec<SelectionVector>,
) -> Result<(Solution, WrapperStats)> {
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    let start = Instant::now();
    let (num_sets, existing) = match mode {
        WrapperMode::SequentialStep { existing } => (1, existing.as_slice()),
        WrapperMode::Simultaneous => (spec.a + 1, &[] as &[SelectionVector]),
    };
    if start_family.len() != num_sets {
        return Err(Error::LengthMismatch(start_family.len(), num_sets));
    }
    let mut stats = WrapperStats {
        solver_invocations: 1,
        accepted_steps: 0,
    };
    let mut nodes = 0;
    let outcome = climb(
        oracle,
        spec,
        existing,
        num_sets,
        start_family,
        max_iters,
        &mut stats,
        &mut nodes,
    )?;
    let solution = Solution {
        selections: outcome.0,
        objective_values: vec![outcome.1],
        status: SearchStatus::Feasible,
        wall_time_ms: start.elapsed().as_millis() as u64,
        nodes_expanded: nodes,
    };
    Ok((solution, stats))
}

#[allow(clippy::too_many_arguments)]
fn climb(
    oracle: &mut dyn QualityOracle,
    spec: &AlternativesSpec,
    existing: &[SelectionVector],
    num_sets: usize,
    mut family: Vec<SelectionVector>,
    max_iters: u64,
    stats: &mut WrapperStats,
    nodes: &mut u64,
) -> Result<(Vec<SelectionVector>, f64)> {
    let n = oracle.num_features();
    let mut score = oracle.evaluate(&family)?;
    if n < 2 {
        return Ok((family, score));
    }
    let mut j1 = 0usize;
    let mut j2 = 1usize;
    while stats.solver_invocations < max_iters && j1 < n - 1 {
        let mut forced = Vec::with_capacity(2 * num_sets);
        for (i, selection) in family.iter().enumerate() {
            forced.push((i, j1, !selection.get(j1)));
            forced.push((i, j2, !selection.get(j2)));
        }
        let attempt = solve_satisfiable(spec, n, num_sets, existing, &forced)?;
        stats.solver_invocations += 1;
        *nodes += attempt.nodes_expanded;
        let mut improved = false;
        if attempt.found() {
            let candidate_score = oracle.evaluate(&attempt.selections)?;
            if candidate_score > score {
                score = candidate_score;
                family = attempt.selections;
                improved = true;
            }
        }
        if improved {
            stats.accepted_steps += 1;
            j1 = 0;
            j2 = 1;
        } else if j2 < n - 1 {
            j2 += 1;
        } else {
            j1 += 1;
            j2 = j1 + 1;
        }
    }
    Ok((family, score))
}

/// Oracle built from a plain scoring function; used to plug white-box or
/// synthetic scores into the wrapper.
pub struct FnOracle<F: FnMut(&[SelectionVector]) -> f64> {
    score: F,
    num_features: usize,
    evaluations: u64,
}

impl<F: FnMut(&[SelectionVector]) -> f64> FnOracle<F> {
    pub fn new(num_features: usize, score: F) -> Self {
        Self {
            score,
            num_features,
            evaluations: 0,
        }
    }
}

impl<F: FnMut(&[SelectionVector]) -> f64> QualityOracle for FnOracle<F> {
    fn evaluate(&mut self, family: &[SelectionVector]) -> Result<f64> {
        self.evaluations += 1;
        Ok((self.score)(family))
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn num_features(&self) -> usize {
        self.num_features
    }
}

/// Scores a family by the summed validation MCC of decision trees trained on
/// the training part of a stratified holdout split, each restricted to one
/// selection.
pub struct HoldoutMccOracle {
    train_rows: Vec<Vec<f64>>,
    train_labels: Vec<u8>,
    validation_rows: Vec<Vec<f64>>,
    validation_labels: Vec<u8>,
    num_features: usize,
    params: TreeParams,
    evaluations: u64,
}

/// Builds the holdout oracle; `split_fraction` is the validation share.
/// Errors at construction when a class would be absent from either part.
pub fn holdout_mcc_oracle(
    ds: &Dataset,
    split_fraction: f64,
    seed: u64,
) -> Result<HoldoutMccOracle> {
    let (train, validation) = stratified_holdout(ds, split_fraction, seed)?;
    let all: Vec<usize> = (0..ds.num_features()).collect();
    let rows = ds.rows_for(&all);
    Ok(HoldoutMccOracle {
        train_rows: train.iter().map(|&r| rows[r].clone()).collect(),
        train_labels: train.iter().map(|&r| ds.target()[r]).collect(),
        validation_rows: validation.iter().map(|&r| rows[r].clone()).collect(),
        validation_labels: validation.iter().map(|&r| ds.target()[r]).collect(),
        num_features: ds.num_features(),
        params: TreeParams::default(),
        evaluations: 0,
    })
}

impl HoldoutMccOracle {
    /// Validation MCC of one selection; does not count as a family
    /// evaluation.
    pub fn single_set_mcc(&self, selection: &SelectionVector) -> Result<f64> {
        let features = selection.indices();
        if features.is_empty() {
            return Err(Error::Oracle("cannot score an empty selection".into()));
        }
        let project = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|row| features.iter().map(|&j| row[j]).collect())
                .collect()
        };
        let model = train_tree(&project(&self.train_rows), &self.train_labels, &self.params);
        let predicted = model.predict(&project(&self.validation_rows));
        mcc(&predicted, &self.validation_labels)
    }
}

impl QualityOracle for HoldoutMccOracle {
    fn evaluate(&mut self, family: &[SelectionVector]) -> Result<f64> {
        self.evaluations += 1;
        family.iter().map(|s| self.single_set_mcc(s)).sum()
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn num_features(&self) -> usize {
        self.num_features
    }
}

/// Oracle backed by an external command speaking a line protocol: one
/// request line per family (selection bitstrings separated by spaces), one
/// response line holding a single real.
pub struct CommandOracle {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    num_features: usize,
    evaluations: u64,
}

impl CommandOracle {
    pub fn spawn(program: &str, args: &[String], num_features: usize) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Oracle(format!("cannot spawn '{program}': {e}")))?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = BufReader::new(child.stdout.take().expect("stdout piped"));
        Ok(Self {
            child,
            stdin,
            stdout,
            num_features,
            evaluations: 0,
        })
    }
}

impl QualityOracle for CommandOracle {
    fn evaluate(&mut self, family: &[SelectionVector]) -> Result<f64> {
        self.evaluations += 1;
        let line = family
            .iter()
            .map(SelectionVector::to_bitstring)
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Oracle(format!("write to oracle failed: {e}")))?;
        let mut response = String::new();
        self.stdout
            .read_line(&mut response)
            .map_err(|e| Error::Oracle(format!("read from oracle failed: {e}")))?;
        response
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Oracle(format!("oracle returned non-numeric '{}'", response.trim())))
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn num_features(&self) -> usize {
        self.num_features
    }
}

impl Drop for CommandOracle {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
