//! Command line for alternative feature selection: quality scoring, single
//! searches, and cross-validated benchmark grids.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use altfs::altset::{Aggregation, AlternativesSpec, DissimilarityMeasure, SelectionVector};
use altfs::data::load_csv;
use altfs::harness::{
    self, fit_objective, run_grid_with_cancel, write_records_csv, write_records_jsonl,
    GridConfig, GridObjective, MethodId, RunRecord,
};
use altfs::heuristics::{greedy_balancing, greedy_depth, greedy_replacement};
use altfs::quality::{
    load_importance_file, load_importance_scores, univariate_qualities, FeatureQualities,
    Normalization, QualityMeasure,
};
use altfs::solver::{
    evaluate_objective, run_sequential_chain, solve_simultaneous, Objective, SearchStatus,
};
use altfs::wrapper::{greedy_wrapper, holdout_mcc_oracle, WrapperMode};

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

extern "C" fn on_sigint(_: libc::c_int) {
    INTERRUPTED.store(true, Ordering::Relaxed);
}

#[derive(Parser)]
#[command(
    name = "altfs",
    version,
    about = "Alternative feature selection: find several dissimilar, high-quality feature sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-feature quality scores and write them as feature,score CSV
    Qualities(QualitiesArgs),
    /// Search alternatives on one dataset or importance file, emitting JSON
    Search(SearchArgs),
    /// Run a cross-validated experiment grid from a config file
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Mi,
    AbsPearson,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    SumToOne,
    MinMax,
}

#[derive(Args)]
struct QualitiesArgs {
    /// Input CSV (header row; features numeric)
    #[arg(long)]
    data: PathBuf,
    /// Target column name; default is the last column
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_enum, default_value = "mi")]
    measure: MeasureArg,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long, value_enum, default_value = "none")]
    normalize: NormalizeArg,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Mi,
    Fcbf,
    Mrmr,
    Importance,
    Wrapper,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Seq,
    SimSum,
    SimMin,
    Rep,
    Bal,
    Depth,
    Wrapper,
}

#[derive(Clone, Copy, ValueEnum)]
enum DissimilarityArg {
    Dice,
    Jaccard,
}

#[derive(Args)]
struct SearchArgs {
    /// Input CSV; optional when --objective importance supplies the scores
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    /// feature,score CSV for --objective importance
    #[arg(long)]
    importance_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    num_alternatives: usize,
    /// Dissimilarity threshold: a decimal in (0,1] or a fraction like 2/5
    #[arg(long, default_value = "0.5")]
    tau: String,
    #[arg(long, value_enum, default_value = "dice")]
    measure: DissimilarityArg,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration budget for the wrapper method
    #[arg(long, default_value_t = 1000)]
    max_iters: u64,
    /// Output JSON path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Key-value config file describing the grid
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; overrides the config's `out`
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    unsafe {
        libc::signal(libc::SIGINT, on_sigint as *const () as libc::sighandler_t);
    }
    if let Ok(workers) = std::env::var("ALTFS_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            let _ = harness::configure_workers(n);
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Qualities(args) => cmd_qualities(args),
        Command::Search(args) => cmd_search(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_qualities(args: QualitiesArgs) -> Result<ExitCode> {
    let ds = load_csv(&args.data, args.target.as_deref())?;
    let measure = match args.measure {
        MeasureArg::Mi => QualityMeasure::MutualInformation,
        MeasureArg::AbsPearson => QualityMeasure::AbsPearson,
    };
    let normalization = match args.normalize {
        NormalizeArg::None => Normalization::None,
        NormalizeArg::SumToOne => Normalization::SumToOne,
        NormalizeArg::MinMax => Normalization::MinMax,
    };
    let q = univariate_qualities(&ds, measure, args.bins, normalization);
    let mut content = String::from("feature,score\n");
    for (name, value) in ds.feature_names().iter().zip(&q.values) {
        content.push_str(&format!("{name},{value}\n"));
    }
    write_output(args.out.as_deref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

/// Decimal or `i/k` fraction in (0, 1].
fn parse_tau(raw: &str) -> Result<f64> {
    let tau = if let Some((num, den)) = raw.split_once('/') {
        let num: f64 = num.trim().parse().context("tau fraction numerator")?;
        let den: f64 = den.trim().parse().context("tau fraction denominator")?;
        if den <= 0.0 {
            bail!("tau fraction denominator must be positive");
        }
        num / den
    } else {
        raw.trim().parse().context("tau value")?
    };
    if !(tau > 0.0 && tau <= 1.0) {
        bail!("tau must lie in (0, 1], got {tau}");
    }
    Ok(tau)
}

/// One output row of `search`.
fn alternative_json(
    index: usize,
    features: Option<Vec<String>>,
    objective_value: Option<f64>,
    status: SearchStatus,
    wall_time_ms: u64,
) -> serde_json::Value {
    serde_json::json!({
        "index": index,
        "features": features,
        "objective_value": objective_value,
        "status": status,
        "wall_time_ms": wall_time_ms,
    })
}

struct SearchInputs {
    feature_names: Vec<String>,
    qualities: Option<FeatureQualities>,
    objective: Option<Objective>,
    dataset: Option<altfs::data::Dataset>,
}

fn load_search_inputs(args: &SearchArgs) -> Result<SearchInputs> {
    let dataset = match &args.data {
        Some(path) => Some(load_csv(path, args.target.as_deref())?),
        None => None,
    };
    match args.objective {
        ObjectiveArg::Importance => {
            let path = args
                .importance_file
                .as_ref()
                .ok_or_else(|| anyhow!("--objective importance requires --importance-file"))?;
            let (names, qualities) = match &dataset {
                Some(ds) => {
                    let q = load_importance_scores(path, ds.feature_names())?;
                    (ds.feature_names().to_vec(), q)
                }
                None => {
                    let (names, scores) = load_importance_file(path)?;
                    (
                        names,
                        FeatureQualities::new(scores, "importance_file", Normalization::None),
                    )
                }
            };
            Ok(SearchInputs {
                feature_names: names,
                objective: Some(Objective::Univariate(qualities.clone())),
                qualities: Some(qualities),
                dataset,
            })
        }
        ObjectiveArg::Wrapper => {
            let ds = dataset.ok_or_else(|| anyhow!("--objective wrapper requires --data"))?;
            Ok(SearchInputs {
                feature_names: ds.feature_names().to_vec(),
                qualities: None,
                objective: None,
                dataset: Some(ds),
            })
        }
        white_box => {
            let ds = dataset.ok_or_else(|| anyhow!("this objective requires --data"))?;
            let kind = match white_box {
                ObjectiveArg::Mi => GridObjective::Mi,
                ObjectiveArg::Fcbf => GridObjective::Fcbf,
                ObjectiveArg::Mrmr => GridObjective::Mrmr,
                _ => unreachable!(),
            };
            let objective = fit_objective(kind, &ds, args.bins, args.k)?;
            Ok(SearchInputs {
                feature_names: ds.feature_names().to_vec(),
                qualities: Some(objective.qualities().clone()),
                objective: Some(objective),
                dataset: Some(ds),
            })
        }
    }
}

fn cmd_search(args: SearchArgs) -> Result<ExitCode> {
    let tau = parse_tau(&args.tau)?;
    let measure = match args.measure {
        DissimilarityArg::Dice => DissimilarityMeasure::Dice,
        DissimilarityArg::Jaccard => DissimilarityMeasure::Jaccard,
    };
    // objective/method pairing rules
    let wrapper_objective = matches!(args.objective, ObjectiveArg::Wrapper);
    let wrapper_method = matches!(args.method, MethodArg::Wrapper);
    if wrapper_objective != wrapper_method {
        bail!("the wrapper method and the wrapper objective require each other");
    }
    if matches!(args.method, MethodArg::Rep | MethodArg::Bal | MethodArg::Depth)
        && !matches!(args.objective, ObjectiveArg::Mi | ObjectiveArg::Importance)
    {
        bail!("greedy heuristics need univariate qualities (--objective mi or importance)");
    }

    let inputs = load_search_inputs(&args)?;
    let spec = AlternativesSpec::new(args.k, args.num_alternatives, tau)?
        .with_measure(measure)
        .with_timeout_ms(args.timeout_ms);
    let names = &inputs.feature_names;
    let name_list = |s: &SelectionVector| -> Vec<String> {
        s.indices().iter().map(|&j| names[j].clone()).collect()
    };
    let a = args.num_alternatives;
    let mut rows = Vec::with_capacity(a + 1);

    match args.method {
        MethodArg::Seq => {
            let obj = inputs.objective.as_ref().expect("white-box objective");
            for (i, sol) in run_sequential_chain(obj, &spec)?.into_iter().enumerate() {
                rows.push(alternative_json(
                    i,
                    sol.selections.first().map(&name_list),
                    sol.objective_values.first().copied(),
                    sol.status,
                    sol.wall_time_ms,
                ));
            }
        }
        MethodArg::SimSum | MethodArg::SimMin => {
            let aggregation = if matches!(args.method, MethodArg::SimSum) {
                Aggregation::Sum
            } else {
                Aggregation::Min
            };
            let obj = inputs.objective.as_ref().expect("white-box objective");
            let sol = solve_simultaneous(obj, &spec.with_aggregation(aggregation))?;
            for i in 0..=a {
                rows.push(alternative_json(
                    i,
                    sol.selections.get(i).map(&name_list),
                    sol.objective_values.get(i).copied(),
                    sol.status,
                    sol.wall_time_ms,
                ));
            }
        }
        MethodArg::Rep | MethodArg::Bal | MethodArg::Depth => {
            let q = inputs.qualities.as_ref().expect("univariate qualities");
            let obj = inputs.objective.as_ref().expect("univariate objective");
            let start = std::time::Instant::now();
            let sets = match args.method {
                MethodArg::Rep => greedy_replacement(q, args.k, a, tau)?,
                MethodArg::Bal => greedy_balancing(q, args.k, a, tau)?,
                _ => greedy_depth(q, args.k, a, tau)?,
            };
            let elapsed = start.elapsed().as_millis() as u64;
            for i in 0..=a {
                match sets.get(i) {
                    Some(s) => rows.push(alternative_json(
                        i,
                        Some(name_list(s)),
                        evaluate_objective(s, obj).ok(),
                        SearchStatus::Feasible,
                        elapsed,
                    )),
                    None => rows.push(alternative_json(
                        i,
                        None,
                        None,
                        SearchStatus::NotSolved,
                        elapsed,
                    )),
                }
            }
        }
        MethodArg::Wrapper => {
            let ds = inputs.dataset.as_ref().expect("wrapper dataset");
            let mut oracle = holdout_mcc_oracle(ds, 0.2, args.seed)?;
            let sol = greedy_wrapper(&mut oracle, &spec, &WrapperMode::Simultaneous, args.max_iters)?;
            for i in 0..=a {
                let selection = sol.selections.get(i);
                rows.push(alternative_json(
                    i,
                    selection.map(&name_list),
                    selection.and_then(|s| oracle.single_set_mcc(s).ok()),
                    sol.status,
                    sol.wall_time_ms,
                ));
            }
        }
    }

    let content = format!("{}\n", serde_json::to_string_pretty(&rows)?);
    write_output(args.out.as_deref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

/// Parsed `benchmark` config: `key = value` lines, `#` comments, lists
/// comma-separated.
#[derive(Default)]
struct BenchmarkSpec {
    data: Vec<PathBuf>,
    target: Option<String>,
    objectives: Vec<GridObjective>,
    methods: Vec<MethodId>,
    ks: Vec<usize>,
    a_values: Vec<usize>,
    taus: Vec<f64>,
    folds: Option<usize>,
    seed: Option<u64>,
    bins: Option<usize>,
    timeout_ms: Option<u64>,
    max_iters: Option<u64>,
    out: Option<PathBuf>,
    jsonl: Option<PathBuf>,
}

fn config_err(line: usize, message: impl Into<String>) -> anyhow::Error {
    anyhow!("config error at line {line}: {}", message.into())
}

fn parse_benchmark_config(path: &Path) -> Result<BenchmarkSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut spec = BenchmarkSpec::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(line_no, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(config_err(line_no, format!("duplicate key '{key}'")));
        }
        let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
        let parse_list_usize = |spec_key: &str| -> Result<Vec<usize>> {
            list()
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| config_err(line_no, format!("bad {spec_key} value '{v}'")))
                })
                .collect()
        };
        match key {
            "data" => spec.data = list().map(PathBuf::from).collect(),
            "target" => spec.target = Some(value.to_string()),
            "objectives" => {
                spec.objectives = list()
                    .map(|v| GridObjective::parse(v).map_err(|e| config_err(line_no, e.to_string())))
                    .collect::<Result<_>>()?
            }
            "methods" => {
                spec.methods = list()
                    .map(|v| MethodId::parse(v).map_err(|e| config_err(line_no, e.to_string())))
                    .collect::<Result<_>>()?
            }
            "k" => spec.ks = parse_list_usize("k")?,
            "a" => spec.a_values = parse_list_usize("a")?,
            "tau" => {
                spec.taus = list()
                    .map(|v| parse_tau(v).map_err(|e| config_err(line_no, e.to_string())))
                    .collect::<Result<_>>()?
            }
            "folds" => {
                spec.folds = Some(
                    value
                        .parse()
                        .map_err(|_| config_err(line_no, "bad folds value"))?,
                )
            }
            "seed" => {
                spec.seed = Some(
                    value
                        .parse()
                        .map_err(|_| config_err(line_no, "bad seed value"))?,
                )
            }
            "bins" => {
                spec.bins = Some(
                    value
                        .parse()
                        .map_err(|_| config_err(line_no, "bad bins value"))?,
                )
            }
            "timeout_ms" => {
                spec.timeout_ms = Some(
                    value
                        .parse()
                        .map_err(|_| config_err(line_no, "bad timeout_ms value"))?,
                )
            }
            "max_iters" => {
                spec.max_iters = Some(
                    value
                        .parse()
                        .map_err(|_| config_err(line_no, "bad max_iters value"))?,
                )
            }
            "out" => spec.out = Some(PathBuf::from(value)),
            "jsonl" => spec.jsonl = Some(PathBuf::from(value)),
            other => return Err(config_err(line_no, format!("unknown key '{other}'"))),
        }
    }
    if spec.data.is_empty() {
        bail!("config error: no `data` entries");
    }
    Ok(spec)
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<ExitCode> {
    let spec = parse_benchmark_config(&args.config)?;
    let mut datasets = Vec::new();
    for path in &spec.data {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        datasets.push((id, load_csv(path, spec.target.as_deref())?));
    }
    let mut config = GridConfig::new(datasets);
    if !spec.objectives.is_empty() {
        config.objectives = spec.objectives;
    }
    if !spec.methods.is_empty() {
        config.methods = spec.methods;
    }
    if !spec.ks.is_empty() {
        config.ks = spec.ks;
    }
    if !spec.a_values.is_empty() {
        config.a_values = spec.a_values;
    }
    if !spec.taus.is_empty() {
        config.taus = spec.taus;
    }
    if let Some(folds) = spec.folds {
        config.folds = folds;
    }
    if let Some(seed) = spec.seed {
        config.seed = seed;
    }
    if let Some(bins) = spec.bins {
        config.bins = bins;
    }
    config.timeout_ms = spec.timeout_ms;
    if let Some(max_iters) = spec.max_iters {
        config.max_iters = max_iters;
    }

    let records = run_grid_with_cancel(&config, Some(&INTERRUPTED))?;

    let out_path = args.out.or(spec.out);
    let mut csv = Vec::new();
    write_records_csv(&records, &mut csv)?;
    match &out_path {
        Some(p) => fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(&csv)?,
    }
    if let Some(p) = &spec.jsonl {
        let mut buf = Vec::new();
        write_records_jsonl(&records, &mut buf)?;
        fs::write(p, &buf).with_context(|| format!("writing {}", p.display()))?;
    }
    print_summary(&records);
    if INTERRUPTED.load(Ordering::Relaxed) {
        eprintln!("interrupted: wrote {} completed records", records.len());
        return Ok(ExitCode::from(130));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(records: &[RunRecord]) {
    let count = |status: SearchStatus| records.iter().filter(|r| r.status == status).count();
    eprintln!(
        "records: {} (optimal {}, feasible {}, infeasible {}, not_solved {})",
        records.len(),
        count(SearchStatus::Optimal),
        count(SearchStatus::Feasible),
        count(SearchStatus::Infeasible),
        count(SearchStatus::NotSolved),
    );
}
