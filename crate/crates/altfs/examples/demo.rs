//! Small end-to-end tour: build a synthetic dataset, score its features,
//! and search alternatives with the exact engine and the greedy heuristics.
//!
//! Run with `cargo run -p altfs --example demo --release`.

use std::time::Instant;

use altfs::altset::{Aggregation, AlternativesSpec};
use altfs::harness::synthetic;
use altfs::heuristics::greedy_replacement;
use altfs::quality::{univariate_qualities, Normalization, QualityMeasure};
use altfs::solver::{run_sequential_chain, solve_simultaneous, Objective};

fn main() -> altfs::Result<()> {
    let ds = synthetic::trend(800, 100, 10, 1);
    let qualities = univariate_qualities(
        &ds,
        QualityMeasure::MutualInformation,
        10,
        Normalization::SumToOne,
    );

    let spec = AlternativesSpec::new(10, 5, 0.5)?;
    let heuristic = greedy_replacement(&qualities, spec.k, spec.a, spec.tau)?;
    println!("greedy replacement found {} sets", heuristic.len());

    let objective = Objective::Univariate(qualities);
    let started = Instant::now();
    let chain = run_sequential_chain(&objective, &spec)?;
    println!(
        "sequential chain (n=100, k=10, a=5) in {:?}, {} nodes:",
        started.elapsed(),
        chain.iter().map(|s| s.nodes_expanded).sum::<u64>()
    );
    for (i, solution) in chain.iter().enumerate() {
        match solution.objective_values.first() {
            Some(value) => println!(
                "  set {i}: value {value:.4} features {:?}",
                solution.selections[0].indices()
            ),
            None => println!("  set {i}: {}", solution.status),
        }
    }

    for aggregation in [Aggregation::Sum, Aggregation::Min] {
        let sim_spec = AlternativesSpec::new(5, 2, 0.6)?.with_aggregation(aggregation);
        let started = Instant::now();
        let solution = solve_simultaneous(&objective, &sim_spec)?;
        println!(
            "simultaneous {aggregation:?} (k=5, a=2, tau=0.6): {} = {:.4} in {:?}",
            solution.status,
            solution.aggregate(aggregation).unwrap_or(f64::NAN),
            started.elapsed()
        );
    }
    Ok(())
}
