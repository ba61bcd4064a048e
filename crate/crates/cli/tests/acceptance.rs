//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::process::Command;
use std::time::{Duration, Instant};

use bellbound_cli::suites::{
    check_asymptotics, check_closed_form, check_constants, check_inequalities, check_oracles,
    check_relative_error, check_sandwich, Check,
};
use bellbound_core::applications::VerifyConfig;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> (Vec<Check>, Vec<String>),
}

fn determinism() -> (Vec<Check>, Vec<String>) {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_bellbound"))
            .args(args)
            .env_remove("BELLBOUND_PMAX")
            .output()
            .expect("binary runs")
    };
    let invocations: [(&str, &[&str]); 3] = [
        (
            "scan, 40 x 12 log grid, csv",
            &[
                "scan",
                "--p-start",
                "2",
                "--p-stop",
                "200",
                "--p-count",
                "40",
                "--p-log",
                "--beta-start",
                "0.1",
                "--beta-stop",
                "50",
                "--beta-count",
                "12",
                "--beta-log",
            ],
        ),
        (
            "scan, 25-point linear p grid, json",
            &[
                "scan",
                "--p-start",
                "1",
                "--p-stop",
                "300",
                "--p-count",
                "25",
                "--format",
                "json",
            ],
        ),
        (
            "verify, all suites, seed 7",
            &[
                "verify", "--suite", "all", "--seed", "7", "--trials", "1000",
            ],
        ),
    ];
    let checks = invocations
        .iter()
        .map(|(label, args)| {
            let (a, b) = (run(args), run(args));
            let same = a.stdout == b.stdout && a.status.code() == b.status.code();
            Check {
                name: format!("{label}, run twice"),
                passed: same && a.status.success() && !a.stdout.is_empty(),
                value: None,
                limit: None,
                detail: format!(
                    "{} bytes, exit {:?}, identical: {same}",
                    a.stdout.len(),
                    a.status.code()
                ),
            }
        })
        .collect();
    (checks, Vec::new())
}

fn inequalities() -> (Vec<Check>, Vec<String>) {
    check_inequalities(&VerifyConfig::default(), &[])
}

fn sandwich_and_flags() -> (Vec<Check>, Vec<String>) {
    let (checks, notes) = check_sandwich();
    // Only the count line; per-point flags would be listed after it.
    (checks, notes.into_iter().take(1).collect())
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "oracle equivalence",
            limit: Some(Duration::from_secs(1)),
            run: check_oracles,
        },
        Criterion {
            id: 2,
            name: "bilateral sandwich",
            limit: Some(Duration::from_secs(10)),
            run: sandwich_and_flags,
        },
        Criterion {
            id: 3,
            name: "constant reproduction",
            limit: None,
            run: check_constants,
        },
        Criterion {
            id: 4,
            name: "closed-form consistency",
            limit: None,
            run: check_closed_form,
        },
        Criterion {
            id: 5,
            name: "asymptotic residuals",
            limit: Some(Duration::from_secs(5)),
            run: check_asymptotics,
        },
        Criterion {
            id: 6,
            name: "inequality verification",
            limit: Some(Duration::from_secs(30)),
            run: inequalities,
        },
        Criterion {
            id: 7,
            name: "relative-error corollary",
            limit: None,
            run: check_relative_error,
        },
        Criterion {
            id: 8,
            name: "determinism",
            limit: None,
            run: determinism,
        },
    ];

    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let (checks, notes) = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed < l);
        let passed = in_time && !checks.is_empty() && checks.iter().all(|k| k.passed);
        let budget = c.limit.map_or(String::new(), |l| {
            format!(" / limit {:.0} s", l.as_secs_f64())
        });
        println!(
            "criterion {} {}: {} ({:.2} s{budget})",
            c.id,
            c.name,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        for k in &checks {
            println!(
                "    [{}] {}: {}",
                if k.passed { "ok" } else { "FAIL" },
                k.name,
                k.detail
            );
        }
        for n in &notes {
            println!("    note: {n}");
        }
        if !passed {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
