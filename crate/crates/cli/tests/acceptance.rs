//! One line per acceptance criterion. Tolerances, instance minimums and
//! time budgets are pinned here, independent of the suite defaults.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qicost_cli::suite::{registry, run_check, Status, SuiteConfig, SuiteResult};
use rayon::prelude::*;

struct Pinned {
    check: &'static str,
    tolerance: f64,
    min_instances: usize,
}

struct Criterion {
    number: usize,
    title: &'static str,
    checks: Vec<Pinned>,
    budget: Option<Duration>,
}

fn pin(check: &'static str, tolerance: f64, min_instances: usize) -> Pinned {
    Pinned {
        check,
        tolerance,
        min_instances,
    }
}

fn criteria() -> Vec<Criterion> {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    vec![
        Criterion {
            number: 1,
            title: "entropy and trace-distance identities",
            checks: [
                "chain-rule",
                "strong-subadditivity",
                "data-processing",
                "product-additivity",
                "conditioning-average",
                "pure-entropy-symmetry",
                "trace-distance-range",
                "trace-distance-symmetry",
                "trace-distance-triangle",
                "trace-distance-monotonicity",
            ]
            .into_iter()
            .map(|c| pin(c, 1e-8, 100))
            .collect(),
            budget: minutes(2),
        },
        Criterion {
            number: 2,
            title: "information cost bounded by communication cost",
            checks: vec![pin("qic-vs-qcc", 1e-8, 100)],
            budget: minutes(2),
        },
        Criterion {
            number: 3,
            title: "zero information cost on pure inputs",
            checks: vec![pin("pure-input-nullity", 1e-9, 50)],
            budget: None,
        },
        Criterion {
            number: 4,
            title: "additivity under parallel composition and slot freezing",
            checks: vec![pin("parallel-additivity", 1e-7, 25), pin("slot-split", 1e-7, 25)],
            budget: None,
        },
        Criterion {
            number: 5,
            title: "coherent mixtures: channel and cost are affine",
            checks: vec![
                pin("mixture-channel", 1e-9, 25),
                pin("mixture-affinity", 1e-7, 25),
                pin("mixture-degenerate", 1e-9, 2),
            ],
            budget: None,
        },
        Criterion {
            number: 6,
            title: "concavity in the input",
            checks: vec![pin("input-concavity", 1e-8, 50)],
            budget: None,
        },
        Criterion {
            number: 7,
            title: "averaging reduction at n = 2",
            checks: vec![pin("and-average", 1e-5, 1)],
            budget: minutes(30),
        },
        Criterion {
            number: 8,
            title: "failure probability at most half the protocol error",
            checks: vec![pin("failure-bound", 1e-9, 20)],
            budget: None,
        },
        Criterion {
            number: 9,
            title: "two classical information cost formulas agree",
            checks: vec![pin("ic-equivalence", 1e-10, 200)],
            budget: None,
        },
        Criterion {
            number: 10,
            title: "compression budget and redistribution rates",
            checks: vec![
                pin("budget-total", 1e-8, 25),
                pin("e-net-bounds", 1e-9, 25),
                pin("redist-matches-qic", 1e-9, 25),
            ],
            budget: None,
        },
        Criterion {
            number: 11,
            title: "known values",
            checks: vec![pin("known-values", 1e-9, 1)],
            budget: None,
        },
    ]
}

fn evaluate(c: &Criterion, seed: u64) -> (bool, String, Vec<SuiteResult>) {
    let all = registry();
    let start = Instant::now();
    let results: Vec<(SuiteResult, &Pinned)> = c
        .checks
        .par_iter()
        .map(|p| {
            let check = all.iter().find(|k| k.id == p.check).expect("registered check");
            let cfg = SuiteConfig {
                seed,
                tolerance: Some(p.tolerance),
                ..SuiteConfig::default()
            };
            (run_check(check, &cfg), p)
        })
        .collect();
    let elapsed = start.elapsed();
    let mut problems = Vec::new();
    for (r, p) in &results {
        if r.status != Status::Pass {
            problems.push(format!("{} {:?}", r.check_id, r.status));
        } else if r.instances < p.min_instances {
            problems.push(format!("{} ran {} < {} instances", r.check_id, r.instances, p.min_instances));
        }
    }
    if let Some(b) = c.budget {
        if elapsed > b {
            problems.push(format!("took {:.1}s, budget {}s", elapsed.as_secs_f64(), b.as_secs()));
        }
    }
    let ok = problems.is_empty();
    let summary = if ok {
        format!("{:.1}s", elapsed.as_secs_f64())
    } else {
        problems.join("; ")
    };
    (ok, summary, results.into_iter().map(|(r, _)| r).collect())
}

fn main() -> ExitCode {
    let seed = SuiteConfig::default().seed;
    let mut failed = 0;
    for c in criteria() {
        let (ok, summary, results) = evaluate(&c, seed);
        for r in &results {
            println!("    {}", r.text_line());
        }
        println!(
            "criterion {:>2} {}: {} ({})",
            c.number,
            if ok { "PASS" } else { "FAIL" },
            c.title,
            summary
        );
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
