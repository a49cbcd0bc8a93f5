//! Acceptance criteria at their pinned parameters. Prints one line per
//! criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use combkit::verify::Suite;

const SEED: u64 = 0;

const CRITERIA: [(u32, &str, Suite, f64); 10] = [
    (1, "intertwining of generators", Suite::Intertwining, 10.0),
    (2, "markov projection of block counts", Suite::Projection, 60.0),
    (3, "kingman comb pair coalescence", Suite::KingmanPair, 30.0),
    (4, "empirical interval-partition convergence", Suite::EmpiricalConvergence, 60.0),
    (5, "semigroup consistency", Suite::Semigroup, 120.0),
    (6, "uniform ordering", Suite::UniformOrdering, 10.0),
    (7, "evolving comb stationarity", Suite::EvolveStationarity, 60.0),
    (8, "star metric indistinguishability", Suite::StarMetric, 5.0),
    (9, "same masses, different coalescents", Suite::Figure2, 10.0),
    (10, "metric and ultrametric properties", Suite::Properties, 10.0),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, title, suite, budget) in CRITERIA {
        let start = Instant::now();
        let result = suite.run(SEED);
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(reports) => {
                let pass = reports.iter().all(|r| r.pass);
                let detail: Vec<String> = reports
                    .iter()
                    .map(|r| format!("{}={:.3e}<{:.3e}", r.name, r.statistic, r.threshold))
                    .collect();
                println!(
                    "criterion {id:>2} {}: {title} [{suite}] {secs:.1}s (budget {budget}s) {}",
                    if pass { "PASS" } else { "FAIL" },
                    detail.join(" ")
                );
                if !pass {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL: {title} [{suite}] error: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
