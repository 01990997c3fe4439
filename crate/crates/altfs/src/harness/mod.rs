//! Experiment orchestration: cross-validated searches over a parameter grid,
//! train/test bookkeeping, per-run normalization, and result tables.
//!
//! Grid cells are independent jobs; with the `parallel` feature they run on
//! the rayon pool and the records are merged in deterministic
//! (cell, fold, alternative) order, so the output is identical regardless of
//! worker count. [`run_grid_serial`] is the sequential fallback.

pub mod synthetic;

use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::altset::{Aggregation, AlternativesSpec, SelectionVector};
use crate::data::{stratified_kfold, Dataset};
use crate::error::{Error, Result};
use crate::heuristics::{greedy_balancing, greedy_depth, greedy_replacement};
use crate::predict::{feature_importance, mcc, train_tree, TreeParams};
use crate::quality::{mrmr_inputs, univariate_qualities, Normalization, QualityMeasure};
use crate::solver::{
    evaluate_objective, run_sequential_chain, solve_simultaneous, Objective, SearchStatus,
};
use crate::wrapper::{
    greedy_wrapper, holdout_mcc_oracle, HoldoutMccOracle, WrapperMode,
};

/// Search method identifiers as they appear in result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    Seq,
    SimSum,
    SimMin,
    Rep,
    Bal,
    Depth,
    WrapperSeq,
    WrapperSim,
}

impl MethodId {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodId::Seq => "seq",
            MethodId::SimSum => "sim_sum",
            MethodId::SimMin => "sim_min",
            MethodId::Rep => "rep",
            MethodId::Bal => "bal",
            MethodId::Depth => "depth",
            MethodId::WrapperSeq => "wrapper_seq",
            MethodId::WrapperSim => "wrapper_sim",
        }
    }

    pub fn parse(s: &str) -> Result<MethodId> {
        Ok(match s {
            "seq" => MethodId::Seq,
            "sim_sum" | "sim-sum" => MethodId::SimSum,
            "sim_min" | "sim-min" => MethodId::SimMin,
            "rep" => MethodId::Rep,
            "bal" => MethodId::Bal,
            "depth" => MethodId::Depth,
            "wrapper_seq" | "wrapper-seq" => MethodId::WrapperSeq,
            "wrapper_sim" | "wrapper-sim" => MethodId::WrapperSim,
            other => return Err(Error::invalid(format!("unknown method '{other}'"))),
        })
    }
}

/// Feature-set quality notion driving a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridObjective {
    /// Univariate mutual-information filter, qualities normalized to sum 1.
    Mi,
    /// Decision-tree importance scores used as univariate qualities.
    ModelGain,
    Fcbf,
    Mrmr,
    /// Black-box holdout-MCC wrapper.
    Wrapper,
}

impl GridObjective {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridObjective::Mi => "mi",
            GridObjective::ModelGain => "model_gain",
            GridObjective::Fcbf => "fcbf",
            GridObjective::Mrmr => "mrmr",
            GridObjective::Wrapper => "wrapper",
        }
    }

    pub fn parse(s: &str) -> Result<GridObjective> {
        Ok(match s {
            "mi" => GridObjective::Mi,
            "model_gain" | "model-gain" => GridObjective::ModelGain,
            "fcbf" => GridObjective::Fcbf,
            "mrmr" => GridObjective::Mrmr,
            "wrapper" => GridObjective::Wrapper,
            other => return Err(Error::invalid(format!("unknown objective '{other}'"))),
        })
    }

    /// The greedy heuristics need univariate qualities; the wrapper methods
    /// need the wrapper objective and vice versa.
    pub fn compatible_with(&self, method: MethodId) -> bool {
        match method {
            MethodId::Seq | MethodId::SimSum | MethodId::SimMin => !matches!(self, GridObjective::Wrapper),
            MethodId::Rep | MethodId::Bal | MethodId::Depth => {
                matches!(self, GridObjective::Mi | GridObjective::ModelGain)
            }
            MethodId::WrapperSeq | MethodId::WrapperSim => matches!(self, GridObjective::Wrapper),
        }
    }
}

/// One result row: a single alternative index of a single search run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub dataset_id: String,
    pub fold_id: usize,
    pub method: MethodId,
    pub objective: GridObjective,
    pub k: usize,
    pub a: usize,
    pub tau: f64,
    pub alt_index: usize,
    pub status: SearchStatus,
    pub train_objective: Option<f64>,
    pub test_objective: Option<f64>,
    pub train_mcc: Option<f64>,
    pub test_mcc: Option<f64>,
    pub wall_time_ms: u64,
}

/// Train/test quality of one feature set found on the training data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityQuadruple {
    pub train_objective: f64,
    pub test_objective: f64,
    pub train_mcc: f64,
    pub test_mcc: f64,
}

fn wrapper_seed(base: u64, fold: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fold as u64)
}

/// Fits the white-box objective of a grid cell on one dataset slice.
pub fn fit_objective(
    kind: GridObjective,
    ds: &Dataset,
    bins: usize,
    k: usize,
) -> Result<Objective> {
    match kind {
        GridObjective::Mi => Ok(Objective::Univariate(univariate_qualities(
            ds,
            QualityMeasure::MutualInformation,
            bins,
            Normalization::SumToOne,
        ))),
        GridObjective::ModelGain => {
            let all: Vec<usize> = (0..ds.num_features()).collect();
            let model = train_tree(&ds.rows_for(&all), ds.target(), &TreeParams::default());
            Ok(Objective::Univariate(feature_importance(&model)))
        }
        GridObjective::Fcbf => {
            // predominance is checked on the raw measure; the objective sums
            // the normalized qualities
            let raw = univariate_qualities(
                ds,
                QualityMeasure::MutualInformation,
                bins,
                Normalization::None,
            );
            let deps = crate::quality::pairwise_dependencies(
                ds,
                QualityMeasure::MutualInformation,
                bins,
                Normalization::None,
            );
            let forbidden = match Objective::fcbf(raw, &deps) {
                Objective::Fcbf {
                    forbidden_pairs, ..
                } => forbidden_pairs,
                _ => unreachable!(),
            };
            Ok(Objective::Fcbf {
                qualities: univariate_qualities(
                    ds,
                    QualityMeasure::MutualInformation,
                    bins,
                    Normalization::SumToOne,
                ),
                forbidden_pairs: forbidden,
            })
        }
        GridObjective::Mrmr => {
            let (q, d) = mrmr_inputs(ds, QualityMeasure::MutualInformation, bins);
            Ok(Objective::Mrmr {
                qualities: q,
                dependencies: d,
                k,
            })
        }
        GridObjective::Wrapper => Err(Error::invalid(
            "the wrapper objective has no white-box form",
        )),
    }
}

/// Objective value of a selection for reporting: FCBF reports the plain
/// quality sum (its pair constraints bind the search, not the report).
fn report_objective(s: &SelectionVector, obj: &Objective) -> Result<f64> {
    match obj {
        Objective::Fcbf { qualities, .. } => {
            Ok(s.indices().iter().map(|&j| qualities.values[j]).sum())
        }
        other => evaluate_objective(s, other),
    }
}

/// Fits the objective on the training and test slices separately and scores
/// one selection on both, plus train/test MCC of a tree trained on the
/// training slice restricted to the selection.
pub fn evaluate_feature_set(
    train: &Dataset,
    test: &Dataset,
    s: &SelectionVector,
    kind: GridObjective,
    bins: usize,
    seed: u64,
) -> Result<QualityQuadruple> {
    let features = s.indices();
    let model = train_tree(
        &train.rows_for(&features),
        train.target(),
        &TreeParams::default(),
    );
    let train_mcc = mcc(&model.predict(&train.rows_for(&features)), train.target())?;
    let test_mcc = mcc(&model.predict(&test.rows_for(&features)), test.target())?;
    let (train_objective, test_objective) = match kind {
        GridObjective::Wrapper => {
            let oracle = holdout_mcc_oracle(train, 0.2, seed)?;
            (oracle.single_set_mcc(s)?, test_mcc)
        }
        _ => {
            let k = features.len();
            let obj_train = fit_objective(kind, train, bins, k)?;
            let obj_test = fit_objective(kind, test, bins, k)?;
            (report_objective(s, &obj_train)?, report_objective(s, &obj_test)?)
        }
    };
    Ok(QualityQuadruple {
        train_objective,
        test_objective,
        train_mcc,
        test_mcc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunNormalization {
    Max,
    MinMax,
}

/// Native range of the metric being normalized; signed metrics are shifted
/// onto `[0,1]` via `(v+1)/2` before run normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueRange {
    Unit,
    Signed,
}

/// Normalizes the per-alternative values of one search run.
///
/// Empty slots (infeasible alternatives) are replaced by `fill_infeasible`
/// when given (the fill lives in the shifted space, with 0 as the usual
/// choice) and dropped otherwise. `Max` divides by the run maximum when it
/// is positive; `MinMax` maps the run range onto `[0,1]`, with an all-equal
/// run mapping to all ones. Errors when every slot is empty and no fill is
/// given.
pub fn normalize_run(
    values: &[Option<f64>],
    method: RunNormalization,
    fill_infeasible: Option<f64>,
    range: ValueRange,
) -> Result<Vec<Option<f64>>> {
    let mut shifted: Vec<Option<f64>> = values
        .iter()
        .map(|slot| {
            slot.map(|v| match range {
                ValueRange::Unit => v,
                ValueRange::Signed => (v + 1.0) / 2.0,
            })
        })
        .collect();
    if let Some(fill) = fill_infeasible {
        for slot in &mut shifted {
            if slot.is_none() {
                *slot = Some(fill);
            }
        }
    }
    let present: Vec<f64> = shifted.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::AllInfeasible);
    }
    let max = present.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = present.iter().cloned().fold(f64::INFINITY, f64::min);
    let out = shifted
        .into_iter()
        .map(|slot| {
            slot.map(|v| match method {
                RunNormalization::Max => {
                    if max > 0.0 {
                        v / max
                    } else {
                        v
                    }
                }
                RunNormalization::MinMax => {
                    if max > min {
                        (v - min) / (max - min)
                    } else {
                        1.0
                    }
                }
            })
        })
        .collect();
    Ok(out)
}

/// Full experiment grid. Records come out in deterministic
/// (dataset, fold, objective, method, k, a, tau, alternative) order.
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub datasets: Vec<(String, Dataset)>,
    pub objectives: Vec<GridObjective>,
    pub methods: Vec<MethodId>,
    pub ks: Vec<usize>,
    pub a_values: Vec<usize>,
    pub taus: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub bins: usize,
    pub timeout_ms: Option<u64>,
    /// Iteration budget for wrapper cells.
    pub max_iters: u64,
}

impl GridConfig {
    pub fn new(datasets: Vec<(String, Dataset)>) -> Self {
        Self {
            datasets,
            objectives: vec![GridObjective::Mi],
            methods: vec![MethodId::Seq],
            ks: vec![5],
            a_values: vec![1],
            taus: vec![0.5],
            folds: 5,
            seed: 0,
            bins: 10,
            timeout_ms: None,
            max_iters: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    dataset: usize,
    fold: usize,
    objective: GridObjective,
    method: MethodId,
    k: usize,
    a: usize,
    tau: f64,
}

fn enumerate_cells(config: &GridConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for dataset in 0..config.datasets.len() {
        for fold in 0..config.folds {
            for &objective in &config.objectives {
                for &method in &config.methods {
                    if !objective.compatible_with(method) {
                        continue;
                    }
                    for &k in &config.ks {
                        for &a in &config.a_values {
                            for &tau in &config.taus {
                                cells.push(Cell {
                                    dataset,
                                    fold,
                                    objective,
                                    method,
                                    k,
                                    a,
                                    tau,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    cells
}

/// Sizes the global worker pool (no-op without the `parallel` feature).
/// Fails if a pool was already built.
#[cfg(feature = "parallel")]
pub fn configure_workers(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
pub fn configure_workers(_n: usize) -> Result<()> {
    Ok(())
}

/// Runs the grid, cells in parallel when the `parallel` feature is enabled.
pub fn run_grid(config: &GridConfig) -> Result<Vec<RunRecord>> {
    run_grid_with_cancel(config, None)
}

/// Like [`run_grid`] but polls `cancel` before starting each cell; cells
/// skipped after cancellation contribute no records, completed ones are
/// kept.
pub fn run_grid_with_cancel(
    config: &GridConfig,
    cancel: Option<&AtomicBool>,
) -> Result<Vec<RunRecord>> {
    let cells = enumerate_cells(config);
    #[cfg(feature = "parallel")]
    let per_cell: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(|cell| run_cell(config, cell, cancel))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let per_cell: Vec<Vec<RunRecord>> = cells
        .iter()
        .map(|cell| run_cell(config, cell, cancel))
        .collect();
    Ok(per_cell.into_iter().flatten().collect())
}

/// Sequential fallback twin of [`run_grid`], compiled unconditionally.
pub fn run_grid_serial(config: &GridConfig) -> Result<Vec<RunRecord>> {
    let cells = enumerate_cells(config);
    Ok(cells
        .iter()
        .map(|cell| run_cell(config, cell, None))
        .flat_map(|records| records.into_iter())
        .collect())
}

/// One found (or missing) feature set of a search run.
struct SearchSlot {
    status: SearchStatus,
    selection: Option<SelectionVector>,
    train_objective: Option<f64>,
    wall_time_ms: u64,
}

fn run_cell(config: &GridConfig, cell: &Cell, cancel: Option<&AtomicBool>) -> Vec<RunRecord> {
    if cancel.is_some_and(|flag| flag.load(Ordering::Relaxed)) {
        return Vec::new();
    }
    let (dataset_id, ds) = &config.datasets[cell.dataset];
    let make_record = |i: usize, slot: Option<&SearchSlot>, quad: Option<QualityQuadruple>| RunRecord {
        dataset_id: dataset_id.clone(),
        fold_id: cell.fold,
        method: cell.method,
        objective: cell.objective,
        k: cell.k,
        a: cell.a,
        tau: cell.tau,
        alt_index: i,
        status: slot.map_or(SearchStatus::NotSolved, |s| s.status),
        train_objective: slot.and_then(|s| s.train_objective),
        test_objective: quad.map(|q| q.test_objective),
        train_mcc: quad.map(|q| q.train_mcc),
        test_mcc: quad.map(|q| q.test_mcc),
        wall_time_ms: slot.map_or(0, |s| s.wall_time_ms),
    };
    let outcome = execute_cell(config, cell, ds);
    match outcome {
        Ok(slots) => (0..=cell.a)
            .map(|i| {
                let slot = &slots[i];
                let quad = slot.selection.as_ref().and_then(|s| {
                    evaluate_slot(config, cell, ds, s).ok()
                });
                make_record(i, Some(slot), quad)
            })
            .collect(),
        // cell failure: keep the slots, mark them unsolved
        Err(_) => (0..=cell.a).map(|i| make_record(i, None, None)).collect(),
    }
}

fn evaluate_slot(
    config: &GridConfig,
    cell: &Cell,
    ds: &Dataset,
    s: &SelectionVector,
) -> Result<QualityQuadruple> {
    let plan = stratified_kfold(ds, config.folds, config.seed)?;
    let (train_idx, test_idx) = &plan.folds[cell.fold];
    let train = ds.subset_rows(train_idx)?;
    let test = ds.subset_rows(test_idx)?;
    evaluate_feature_set(
        &train,
        &test,
        s,
        cell.objective,
        config.bins,
        wrapper_seed(config.seed, cell.fold),
    )
}

fn execute_cell(config: &GridConfig, cell: &Cell, ds: &Dataset) -> Result<Vec<SearchSlot>> {
    let plan = stratified_kfold(ds, config.folds, config.seed)?;
    let (train_idx, _) = &plan.folds[cell.fold];
    let train = ds.subset_rows(train_idx)?;
    let mut spec = AlternativesSpec::new(cell.k, cell.a, cell.tau)?
        .with_timeout_ms(config.timeout_ms);
    let oracle_seed = wrapper_seed(config.seed, cell.fold);

    let slots = match cell.method {
        MethodId::Seq => {
            let obj = fit_objective(cell.objective, &train, config.bins, cell.k)?;
            run_sequential_chain(&obj, &spec)?
                .into_iter()
                .map(|sol| SearchSlot {
                    status: sol.status,
                    selection: sol.selections.first().cloned(),
                    train_objective: sol.objective_values.first().copied(),
                    wall_time_ms: sol.wall_time_ms,
                })
                .collect()
        }
        MethodId::SimSum | MethodId::SimMin => {
            spec = spec.with_aggregation(if cell.method == MethodId::SimSum {
                Aggregation::Sum
            } else {
                Aggregation::Min
            });
            let obj = fit_objective(cell.objective, &train, config.bins, cell.k)?;
            let sol = solve_simultaneous(&obj, &spec)?;
            (0..=cell.a)
                .map(|i| SearchSlot {
                    status: sol.status,
                    selection: sol.selections.get(i).cloned(),
                    train_objective: sol.objective_values.get(i).copied(),
                    wall_time_ms: sol.wall_time_ms,
                })
                .collect()
        }
        MethodId::Rep | MethodId::Bal | MethodId::Depth => {
            let obj = fit_objective(cell.objective, &train, config.bins, cell.k)?;
            let q = obj.qualities();
            let start = std::time::Instant::now();
            let sets = match cell.method {
                MethodId::Rep => greedy_replacement(q, cell.k, cell.a, cell.tau)?,
                MethodId::Bal => greedy_balancing(q, cell.k, cell.a, cell.tau)?,
                _ => greedy_depth(q, cell.k, cell.a, cell.tau)?,
            };
            let elapsed = start.elapsed().as_millis() as u64;
            (0..=cell.a)
                .map(|i| match sets.get(i) {
                    Some(s) => SearchSlot {
                        status: SearchStatus::Feasible,
                        selection: Some(s.clone()),
                        train_objective: evaluate_objective(s, &obj).ok(),
                        wall_time_ms: elapsed,
                    },
                    None => SearchSlot {
                        status: SearchStatus::NotSolved,
                        selection: None,
                        train_objective: None,
                        wall_time_ms: elapsed,
                    },
                })
                .collect()
        }
        MethodId::WrapperSeq => {
            let mut oracle: HoldoutMccOracle = holdout_mcc_oracle(&train, 0.2, oracle_seed)?;
            let mut existing: Vec<SelectionVector> = Vec::new();
            let mut slots = Vec::with_capacity(cell.a + 1);
            for _ in 0..=cell.a {
                let mode = WrapperMode::SequentialStep {
                    existing: existing.clone(),
                };
                let sol = greedy_wrapper(&mut oracle, &spec, &mode, config.max_iters)?;
                if sol.found() {
                    existing.push(sol.selections[0].clone());
                }
                slots.push(SearchSlot {
                    status: sol.status,
                    selection: sol.selections.first().cloned(),
                    train_objective: sol.objective_values.first().copied(),
                    wall_time_ms: sol.wall_time_ms,
                });
            }
            slots
        }
        MethodId::WrapperSim => {
            let mut oracle: HoldoutMccOracle = holdout_mcc_oracle(&train, 0.2, oracle_seed)?;
            let sol = greedy_wrapper(&mut oracle, &spec, &WrapperMode::Simultaneous, config.max_iters)?;
            (0..=cell.a)
                .map(|i| SearchSlot {
                    status: sol.status,
                    selection: sol.selections.get(i).cloned(),
                    train_objective: sol
                        .selections
                        .get(i)
                        .and_then(|s| oracle.single_set_mcc(s).ok()),
                    wall_time_ms: sol.wall_time_ms,
                })
                .collect()
        }
    };
    Ok(slots)
}

/// Documented CSV header of result tables.
pub const RECORD_CSV_HEADER: &str = "dataset,fold,method,objective,k,a,tau,alt_index,status,train_objective,test_objective,train_mcc,test_mcc,wall_time_ms";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records as CSV, one row per record, with [`RECORD_CSV_HEADER`].
pub fn write_records_csv<W: Write>(records: &[RunRecord], mut out: W) -> Result<()> {
    let io_err = |e: std::io::Error| Error::FileAccess {
        path: "<writer>".into(),
        source: e,
    };
    writeln!(out, "{RECORD_CSV_HEADER}").map_err(io_err)?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.dataset_id,
            r.fold_id,
            r.method.as_str(),
            r.objective.as_str(),
            r.k,
            r.a,
            r.tau,
            r.alt_index,
            r.status,
            opt(r.train_objective),
            opt(r.test_objective),
            opt(r.train_mcc),
            opt(r.test_mcc),
            r.wall_time_ms
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Writes records as JSON lines.
pub fn write_records_jsonl<W: Write>(records: &[RunRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
        writeln!(out, "{line}").map_err(|e| Error::FileAccess {
            path: "<writer>".into(),
            source: e,
        })?;
    }
    Ok(())
}
