//! Self-verification suites run by `verify` and by the acceptance harness.
//!
//! Reports contain no timings, so identical invocations print identical
//! bytes.

use bellbound_core::applications::{
    check_family, schechtman_extremal, trial_rng, verify_inequalities, DiscreteDist,
    ExtremalProblem, VerifyConfig,
};
use bellbound_core::asymptotics::{debruijn_normalized_residual, lambert_w};
use bellbound_core::bounds::{
    bound_report, normalized_relative_error, upper_closed_form_largep, upper_g_optimized,
    LowerMethod, RegimeConstants, DEFAULT_OPT_TOL, K_MINUS_PRINTED, SANDWICH_SLACK,
};
use bellbound_core::series::{
    bell_dobinski, bell_number_exact, bell_touchard_exact, BellQuery, Regime,
};
use rand::Rng;
use serde::Serialize;

use crate::grid::GridSpec;

pub const ORACLE_TOL: f64 = 1e-10;
pub const K_PLUS_REFERENCE: f64 = 8.9758;
pub const K_MINUS_REFERENCE: f64 = 0.4632;
pub const CONSTANT_TOL: f64 = 1e-3;
pub const LAMBERT_TOL: f64 = 1e-12;
pub const QUADRATIC_TOL: f64 = 1e-10;
const SERIES_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            value: None,
            limit: None,
            detail,
        }
    }

    fn measured(mut self, value: f64, limit: Option<f64>) -> Self {
        self.value = Some(value);
        self.limit = limit;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Informational findings that do not affect `passed`.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, parts: Vec<(Vec<Check>, Vec<String>)>) -> Self {
        let (checks, notes): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        let checks: Vec<Check> = checks.into_iter().flatten().collect();
        SuiteReport {
            suite: suite.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            notes: notes.into_iter().flatten().collect(),
        }
    }
}

fn series_root(q: &BellQuery) -> Option<f64> {
    bell_dobinski(q, SERIES_TOL).ok().map(|r| r.pth_root(q.p()))
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    GridSpec::new(lo, hi, n, true).expect("valid grid").points()
}

/// 40 log-spaced `p ∈ [2, 200]` × 12 log-spaced `β ∈ [0.1, 50]`.
pub fn sandwich_grid() -> Vec<BellQuery> {
    let betas = log_points(0.1, 50.0, 12);
    log_points(2.0, 200.0, 40)
        .into_iter()
        .flat_map(|p| {
            betas
                .iter()
                .map(move |&b| BellQuery::new(p, b).expect("grid point"))
        })
        .collect()
}

/// Series vs the exact Touchard values, and the classical Bell numbers.
pub fn check_oracles() -> (Vec<Check>, Vec<String>) {
    let mut worst = 0.0f64;
    let mut worst_at = (0, 0.0);
    let mut failures = Vec::new();
    for p in 0..=25u32 {
        for beta in [0.5, 1.0, 2.0, 10.0] {
            let exact = bell_touchard_exact(p, beta);
            let series = BellQuery::new(p as f64, beta).and_then(|q| bell_dobinski(&q, SERIES_TOL));
            match (exact, series) {
                (Ok(e), Ok(s)) => {
                    let err = (s.value() - e).abs() / e;
                    if err > worst {
                        worst = err;
                        worst_at = (p, beta);
                    }
                }
                (Err(e), _) | (_, Err(e)) => failures.push(format!("p={p} beta={beta}: {e}")),
            }
        }
    }
    let agree = Check::new(
        "dobinski_vs_touchard",
        failures.is_empty() && worst <= ORACLE_TOL,
        format!(
            "max relative error {worst:.3e} at p={}, beta={} over p in 0..=25, beta in {{0.5, 1, 2, 10}} (limit {ORACLE_TOL:.0e}){}",
            worst_at.0,
            worst_at.1,
            if failures.is_empty() { String::new() } else { format!("; errors: {}", failures.join("; ")) }
        ),
    )
    .measured(worst, Some(ORACLE_TOL));

    let expected: [(u32, u128); 7] = [
        (0, 1),
        (1, 1),
        (2, 2),
        (3, 5),
        (4, 15),
        (5, 52),
        (10, 115_975),
    ];
    let got: Vec<Option<u128>> = expected
        .iter()
        .map(|&(p, _)| bell_number_exact(p).ok())
        .collect();
    let exact_ok = expected.iter().zip(&got).all(|(&(_, e), g)| *g == Some(e));
    let listing: Vec<String> = expected
        .iter()
        .zip(&got)
        .map(|(&(p, _), g)| format!("B({p})={}", g.map_or("error".into(), |v| v.to_string())))
        .collect();
    let bell = Check::new("classical_bell_numbers", exact_ok, listing.join(", "));
    (vec![agree, bell], Vec::new())
}

/// Every bound candidate on the sandwich grid against the series.
pub fn check_sandwich() -> (Vec<Check>, Vec<String>) {
    let mut checked = 0usize;
    let mut violations = Vec::new();
    let mut errors = Vec::new();
    let mut k_minus_flags = Vec::new();
    let mut k_minus_checked = 0usize;
    for q in sandwich_grid() {
        let (p, beta) = (q.p(), q.beta());
        let report = match bound_report(&q) {
            Ok(r) => r,
            Err(e) => {
                errors.push(format!("p={p} beta={beta}: {e}"));
                continue;
            }
        };
        let Some(b) = report.series_check.map(|c| c.b_1p) else {
            errors.push(format!("p={p} beta={beta}: no series value"));
            continue;
        };
        for c in &report.lower_candidates {
            let Some(v) = c.value else { continue };
            if c.method == LowerMethod::KMinusLargeBeta {
                k_minus_checked += 1;
                if v > b * (1.0 + SANDWICH_SLACK) {
                    k_minus_flags.push(format!("p={p:.6} beta={beta:.6}: {v:.6} > {b:.6}"));
                }
                continue;
            }
            checked += 1;
            if v > b * (1.0 + SANDWICH_SLACK) {
                violations.push(format!("{:?} at p={p} beta={beta}: {v} > {b}", c.method));
            }
        }
        for c in &report.upper_candidates {
            let Some(v) = c.value else { continue };
            checked += 1;
            if v < b * (1.0 - SANDWICH_SLACK) {
                violations.push(format!("{:?} at p={p} beta={beta}: {v} < {b}", c.method));
            }
        }
    }
    let mut detail = format!(
        "{checked} bound evaluations on 40 x 12 grid, {} violations at {SANDWICH_SLACK:.0e} relative slack",
        violations.len()
    );
    for v in violations.iter().chain(&errors).take(10) {
        detail.push_str(&format!("; {v}"));
    }
    let check = Check::new(
        "bilateral_sandwich",
        violations.is_empty() && errors.is_empty(),
        detail,
    )
    .measured(violations.len() as f64, Some(0.0));
    let mut notes = vec![format!(
        "K- lower bound (formula constant): {} flagged of {k_minus_checked} LargeBeta points",
        k_minus_flags.len()
    )];
    notes.extend(k_minus_flags.into_iter().map(|f| format!("K- flag: {f}")));
    (vec![check], notes)
}

/// The regime constants against their reference values.
pub fn check_constants() -> (Vec<Check>, Vec<String>) {
    let c = RegimeConstants::get();
    let kp = (c.k_plus - K_PLUS_REFERENCE).abs();
    let km = (c.k_minus_formula - K_MINUS_REFERENCE).abs();
    let checks = vec![
        Check::new(
            "k_plus",
            kp <= CONSTANT_TOL,
            format!("K+ = exp((e^2-3)/2) = {:.10} (reference {K_PLUS_REFERENCE} +/- {CONSTANT_TOL:.0e})", c.k_plus),
        )
        .measured(c.k_plus, Some(CONSTANT_TOL)),
        Check::new(
            "k_minus_formula",
            km <= CONSTANT_TOL,
            format!(
                "K- from its defining formula = {:.10} (reference {K_MINUS_REFERENCE} +/- {CONSTANT_TOL:.0e})",
                c.k_minus_formula
            ),
        )
        .measured(c.k_minus_formula, Some(CONSTANT_TOL)),
    ];
    let notes = vec![
        format!(
            "K- discrepancy: formula gives {:.6}, printed constant is {K_MINUS_PRINTED}, difference {:+.6}",
            c.k_minus_formula,
            K_MINUS_PRINTED - c.k_minus_formula
        ),
        format!("fitted c3 for the triangle bound: {:.6}", c.c3_fitted),
    ];
    (checks, notes)
}

/// The closed-form large-`p` upper bound dominates the series and is
/// dominated by the optimized bound.
pub fn check_closed_form() -> (Vec<Check>, Vec<String>) {
    let mut points = 0usize;
    let mut above_series = Vec::new();
    let mut below_g = Vec::new();
    let mut errors = Vec::new();
    for q in sandwich_grid()
        .into_iter()
        .filter(|q| q.regime() == Regime::LargeP)
    {
        let (p, beta) = (q.p(), q.beta());
        let (closed, g, b) = match (
            upper_closed_form_largep(&q),
            upper_g_optimized(&q, DEFAULT_OPT_TOL),
            series_root(&q),
        ) {
            (Ok(c), Ok(g), Some(b)) => (c, g.bound, b),
            (Err(e), _, _) | (_, Err(e), _) => {
                errors.push(format!("p={p} beta={beta}: {e}"));
                continue;
            }
            (_, _, None) => {
                errors.push(format!("p={p} beta={beta}: no series value"));
                continue;
            }
        };
        points += 1;
        if closed < b * (1.0 - SANDWICH_SLACK) {
            above_series.push(format!("p={p} beta={beta}"));
        }
        if g > closed * (1.0 + SANDWICH_SLACK) {
            below_g.push(format!("p={p} beta={beta}"));
        }
    }
    let checks = vec![
        Check::new(
            "closed_form_dominates_series",
            above_series.is_empty() && errors.is_empty() && points > 0,
            format!(
                "{points} LargeP grid points, {} violations {}",
                above_series.len(),
                errors.join("; ")
            )
            .trim_end()
            .into(),
        )
        .measured(above_series.len() as f64, Some(0.0)),
        Check::new(
            "optimized_below_closed_form",
            below_g.is_empty() && points > 0,
            format!("{points} LargeP grid points, {} violations", below_g.len()),
        )
        .measured(below_g.len() as f64, Some(0.0)),
    ];
    (checks, Vec::new())
}

pub const DEBRUIJN_POINTS: [f64; 5] = [25.0, 50.0, 100.0, 200.0, 300.0];

/// Decay of the normalized de Bruijn remainder and the Lambert W residual.
pub fn check_asymptotics() -> (Vec<Check>, Vec<String>) {
    let residuals: Vec<Result<f64, String>> = DEBRUIJN_POINTS
        .iter()
        .map(|&p| debruijn_normalized_residual(p).map_err(|e| e.to_string()))
        .collect();
    let listing: Vec<String> = DEBRUIJN_POINTS
        .iter()
        .zip(&residuals)
        .map(|(p, r)| match r {
            Ok(v) => format!("{p}: {v:.6}"),
            Err(e) => format!("{p}: {e}"),
        })
        .collect();
    let argmax = residuals
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|v| (i, *v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| DEBRUIJN_POINTS[i]);
    let decay = Check::new(
        "debruijn_remainder_decay",
        residuals.iter().all(Result::is_ok) && argmax.is_some_and(|p| p < 100.0),
        format!(
            "R(p) ln^2 p / lnln p = [{}]; running max attained at p = {}",
            listing.join(", "),
            argmax.map_or("none".into(), |p| p.to_string())
        ),
    );

    // x = 0 plus 49 log-spaced points in [1e-6, 1e6].
    let mut xs = vec![0.0];
    xs.extend(log_points(1e-6, 1e6, 49));
    let mut worst = 0.0f64;
    let mut worst_x = 0.0;
    let mut failures = Vec::new();
    for &x in &xs {
        match lambert_w(x) {
            Ok(w) => {
                let scaled = (w * w.exp() - x).abs() / x.max(1.0);
                if scaled > worst {
                    worst = scaled;
                    worst_x = x;
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let lambert = Check::new(
        "lambert_residual",
        failures.is_empty() && worst <= LAMBERT_TOL,
        format!(
            "max |W e^W - x| / max(1, x) = {worst:.3e} at x = {worst_x:.3e} over {} points (limit {LAMBERT_TOL:.0e})",
            xs.len()
        ),
    )
    .measured(worst, Some(LAMBERT_TOL));
    (vec![decay, lambert], Vec::new())
}

/// The normalized deviation of `B^{1/p}` from `p/(e ln(p/β))` on the LargeP
/// part of the sandwich grid where `p/β > e`.
pub fn check_relative_error() -> (Vec<Check>, Vec<String>) {
    let mut values: Vec<(f64, f64, f64)> = sandwich_grid()
        .into_iter()
        .filter(|q| q.regime() == Regime::LargeP)
        .filter_map(|q| {
            let b = series_root(&q)?;
            normalized_relative_error(&q, b).map(|v| (q.p(), q.beta(), v))
        })
        .collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let finite = !values.is_empty() && values.iter().all(|v| v.2.is_finite());
    let p_top = values.last().map_or(0.0, |v| v.0);
    let max_below = values
        .iter()
        .filter(|v| v.0 <= p_top / 2.0)
        .map(|v| v.2)
        .fold(0.0f64, f64::max);
    let (max_all, at) = values.iter().fold((0.0f64, (0.0, 0.0)), |acc, v| {
        if v.2 > acc.0 {
            (v.2, (v.0, v.1))
        } else {
            acc
        }
    });
    let stable = max_all <= max_below * (1.0 + SANDWICH_SLACK);
    let checks = vec![Check::new(
        "relative_error_bounded",
        finite && stable,
        format!(
            "{} points with p/beta > e; constant {max_all:.6} (at p={:.4}, beta={:.4}); running max at p <= {:.1} is {max_below:.6}, {} over the top octave",
            values.len(),
            at.0,
            at.1,
            p_top / 2.0,
            if stable { "unchanged" } else { "increased" }
        ),
    )
    .measured(max_all, None)];
    let e2 = std::f64::consts::E.powi(2);
    let away = values
        .iter()
        .filter(|v| v.0 / v.1 >= e2)
        .map(|v| v.2)
        .fold(0.0f64, f64::max);
    let notes = vec![format!(
        "the normalization ln r / lnln r is singular at r = p/beta = e; restricted to r >= e^2 the constant is {away:.6}"
    )];
    (checks, notes)
}

/// Randomized inequality trials, optional user instances and the quadratic
/// closed form.
pub fn check_inequalities(
    cfg: &VerifyConfig,
    instances: &[DiscreteDist],
) -> (Vec<Check>, Vec<String>) {
    let report = verify_inequalities(cfg);
    let mut detail = format!(
        "{} trials, {} checks at p in {:?}: {} Rosenthal and {} extremal-class violations; max exact/bound {:.6} and {:.6}",
        report.trials,
        report.checks,
        cfg.p_set,
        report.rosenthal_violations.len(),
        report.schechtman_violations.len(),
        report.max_ratio_rosenthal,
        report.max_ratio_schechtman
    );
    for e in report.errors.iter().take(5) {
        detail.push_str(&format!("; {e}"));
    }
    let mut checks = vec![
        Check::new("random_instances", report.passed(), detail).measured(
            (report.rosenthal_violations.len() + report.schechtman_violations.len()) as f64,
            Some(0.0),
        ),
    ];

    if !instances.is_empty() {
        let mut violations = Vec::new();
        for (i, d) in instances.iter().enumerate() {
            for &p in &cfg.p_set {
                match check_family(std::slice::from_ref(d), p) {
                    Ok(c) if c.rosenthal_holds() && c.schechtman_holds() => {}
                    Ok(_) => violations.push(format!("instance {} at p={p}", i + 1)),
                    Err(e) => violations.push(format!("instance {} at p={p}: {e}", i + 1)),
                }
            }
        }
        checks.push(Check::new(
            "file_instances",
            violations.is_empty(),
            format!(
                "{} instances, {} failures {}",
                instances.len(),
                violations.len(),
                violations.join("; ")
            )
            .trim_end()
            .into(),
        ));
    }

    let mut rng = trial_rng(cfg.seed, u64::MAX);
    let (lo, hi) = (1e-2f64.ln(), 1e2f64.ln());
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for _ in 0..100 {
        let a = rng.random_range(lo..hi).exp();
        let b = rng.random_range(lo..hi).exp();
        match ExtremalProblem::new(a, b, 2.0).and_then(|prob| schechtman_extremal(&prob)) {
            Ok(v) => worst = worst.max((v - (a * a + b)).abs() / (a * a + b)),
            Err(e) => failures.push(e.to_string()),
        }
    }
    checks.push(
        Check::new(
            "quadratic_extremal",
            failures.is_empty() && worst <= QUADRATIC_TOL,
            format!("p = 2 extremal vs a^2 + b on 100 random (a, b): max relative error {worst:.3e} (limit {QUADRATIC_TOL:.0e})"),
        )
        .measured(worst, Some(QUADRATIC_TOL)),
    );
    (checks, Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Oracles,
    Sandwich,
    Inequalities,
    Asymptotics,
    All,
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig, instances: &[DiscreteDist]) -> Vec<SuiteReport> {
    let one = |s: Suite| match s {
        Suite::Oracles => SuiteReport::new("oracles", vec![check_oracles()]),
        Suite::Sandwich => SuiteReport::new(
            "sandwich",
            vec![check_sandwich(), check_constants(), check_closed_form()],
        ),
        Suite::Inequalities => {
            SuiteReport::new("inequalities", vec![check_inequalities(cfg, instances)])
        }
        Suite::Asymptotics => SuiteReport::new(
            "asymptotics",
            vec![check_asymptotics(), check_relative_error()],
        ),
        Suite::All => unreachable!(),
    };
    match suite {
        Suite::All => [
            Suite::Oracles,
            Suite::Sandwich,
            Suite::Inequalities,
            Suite::Asymptotics,
        ]
        .into_iter()
        .map(one)
        .collect(),
        s => vec![one(s)],
    }
}

pub fn render_text(reports: &[SuiteReport]) -> String {
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let mut s = String::new();
    for r in reports {
        s.push_str(&format!("suite {}: {}\n", r.suite, verdict(r.passed)));
        for c in &r.checks {
            s.push_str(&format!(
                "  [{}] {}: {}\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        for n in &r.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
    }
    s.push_str(&format!(
        "overall: {}\n",
        verdict(reports.iter().all(|r| r.passed))
    ));
    s
}
