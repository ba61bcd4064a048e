//! The `eval`, `bounds`, `scan` and `extremal` commands.

use bellbound_core::applications::{schechtman_extremal, ExtremalProblem};
use bellbound_core::asymptotics::debruijn_expansion;
use bellbound_core::bounds::{bound_report_with, BoundOptions, BoundReport, Candidate, Witness};
use bellbound_core::series::{bell_dobinski_with, BellQuery, SeriesConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::format::{csv_table, json, key_values, num, opt_num, Format};
use crate::grid::GridSpec;
use crate::{exit, exit_code_for, CliError, Output};

pub const DEFAULT_TOL: f64 = 1e-15;

/// Series settings, with `p_max` taken from the environment override when
/// present.
pub fn series_config(pmax_override: Option<&str>) -> Result<SeriesConfig, CliError> {
    let mut cfg = SeriesConfig::default();
    if let Some(raw) = pmax_override {
        let p_max: f64 = raw.trim().parse().map_err(|_| {
            CliError::domain(format!("{}={raw:?} is not a number", crate::PMAX_ENV))
        })?;
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(CliError::domain(format!(
                "{} must be finite and > 0, got {p_max}",
                crate::PMAX_ENV
            )));
        }
        cfg.p_max = p_max;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalOutput {
    pub p: f64,
    pub beta: f64,
    /// `null` when `B(p, β)` overflows `f64`; `log_value` is always finite.
    pub value: Option<f64>,
    pub log_value: f64,
    pub terms_used: usize,
    /// Certified bound on (omitted tail) / value.
    pub tail_bound: f64,
    pub peak_index: u64,
}

pub fn eval(
    p: f64,
    beta: f64,
    tol: f64,
    cfg: &SeriesConfig,
    fmt: Format,
) -> Result<Output, CliError> {
    let q = BellQuery::new(p, beta)?;
    let r = bell_dobinski_with(&q, tol, cfg)?;
    let value = r.value();
    let out = EvalOutput {
        p,
        beta,
        value: value.is_finite().then_some(value),
        log_value: r.log_value,
        terms_used: r.terms_used,
        tail_bound: r.tail_bound_log.exp(),
        peak_index: r.peak_index,
    };
    let body = match fmt {
        Format::Json => json(&out),
        Format::Csv => csv_table(
            &[
                "p",
                "beta",
                "value",
                "log_value",
                "terms_used",
                "tail_bound",
                "peak_index",
            ],
            [vec![
                num(p),
                num(beta),
                opt_num(out.value),
                num(out.log_value),
                out.terms_used.to_string(),
                num(out.tail_bound),
                out.peak_index.to_string(),
            ]],
        ),
        Format::Text => key_values(&[
            ("p", p.to_string()),
            ("beta", beta.to_string()),
            (
                "value",
                out.value
                    .map_or_else(|| "overflow (see log_value)".into(), num),
            ),
            ("log_value", num(out.log_value)),
            ("terms_used", out.terms_used.to_string()),
            ("tail_bound", format!("{:.3e} (relative)", out.tail_bound)),
            ("peak_index", out.peak_index.to_string()),
        ]),
    };
    Ok(Output::ok(body))
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    pub lower: Option<Witness>,
    pub upper: Option<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KMinusInfo {
    pub constant: String,
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateList {
    pub lower: Vec<Candidate<String>>,
    pub upper: Vec<Candidate<String>>,
}

/// The JSON shape of a bound report.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsOutput {
    pub p: f64,
    pub beta: f64,
    pub regime: String,
    pub lower: Option<f64>,
    pub lower_method: Option<String>,
    pub upper: Option<f64>,
    pub upper_method: Option<String>,
    pub witness: Witnesses,
    pub series_check: Option<bellbound_core::bounds::SeriesCheck>,
    pub k_minus: Option<KMinusInfo>,
    pub candidates: CandidateList,
}

fn method_name(m: impl std::fmt::Debug) -> String {
    format!("{m:?}")
}

fn named<M: std::fmt::Debug + Copy>(cands: &[Candidate<M>]) -> Vec<Candidate<String>> {
    cands
        .iter()
        .map(|c| Candidate {
            method: method_name(c.method),
            value: c.value,
            witness: c.witness,
            error: c.error.clone(),
            eligible: c.eligible,
        })
        .collect()
}

impl From<&BoundReport> for BoundsOutput {
    fn from(r: &BoundReport) -> Self {
        BoundsOutput {
            p: r.query.p(),
            beta: r.query.beta(),
            regime: r.regime.as_str().to_string(),
            lower: r.lower,
            lower_method: r.lower_method.map(method_name),
            upper: r.upper,
            upper_method: r.upper_method.map(method_name),
            witness: Witnesses {
                lower: r.lower_witness,
                upper: r.upper_witness,
            },
            series_check: r.series_check,
            k_minus: r.k_minus_constant.map(|c| KMinusInfo {
                constant: method_name(c),
                violation: r.k_minus_violation,
            }),
            candidates: CandidateList {
                lower: named(&r.lower_candidates),
                upper: named(&r.upper_candidates),
            },
        }
    }
}

fn witness_text(w: Option<Witness>) -> String {
    match w {
        Some(Witness::Lambda(l)) => format!(", lambda = {}", num(l)),
        Some(Witness::K(k)) => format!(", k = {k}"),
        Some(Witness::X(x)) => format!(", x = {}", num(x)),
        None => String::new(),
    }
}

fn candidate_lines(side: &str, cands: &[Candidate<String>], selected: Option<&str>) -> String {
    cands
        .iter()
        .map(|c| {
            let status = match (&c.error, c.eligible) {
                (Some(e), _) => format!("error: {e}"),
                (None, true) if selected == Some(c.method.as_str()) => "selected".into(),
                (None, true) => "eligible".into(),
                (None, false) => "reported only".into(),
            };
            format!(
                "  {side:<5}  {:<16}  {:<23}  {status}\n",
                c.method,
                opt_num(c.value)
            )
        })
        .collect()
}

fn bounds_text(o: &BoundsOutput) -> String {
    let side = |v: Option<f64>, m: &Option<String>, w: Option<Witness>| match (v, m) {
        (Some(v), Some(m)) => format!("{}  ({m}{})", num(v), witness_text(w)),
        _ => "unavailable".into(),
    };
    let mut pairs = vec![
        ("p", o.p.to_string()),
        ("beta", o.beta.to_string()),
        ("regime", o.regime.clone()),
        ("lower", side(o.lower, &o.lower_method, o.witness.lower)),
        ("upper", side(o.upper, &o.upper_method, o.witness.upper)),
    ];
    if let Some(c) = &o.series_check {
        let ok = |b: Option<bool>| match b {
            Some(true) => "ok",
            Some(false) => "VIOLATED",
            None => "n/a",
        };
        pairs.push((
            "series",
            format!(
                "{}  (lower {}, upper {})",
                num(c.b_1p),
                ok(c.lower_ok),
                ok(c.upper_ok)
            ),
        ));
    }
    if let Some(k) = &o.k_minus {
        let flag = if k.violation {
            "violated"
        } else {
            "no violation"
        };
        pairs.push(("k_minus", format!("{} ({flag})", k.constant)));
    }
    let mut s = key_values(&pairs);
    s.push_str("candidates (B^{1/p} scale)\n");
    s.push_str(&candidate_lines(
        "lower",
        &o.candidates.lower,
        o.lower_method.as_deref(),
    ));
    s.push_str(&candidate_lines(
        "upper",
        &o.candidates.upper,
        o.upper_method.as_deref(),
    ));
    s
}

pub fn bounds(p: f64, beta: f64, opts: &BoundOptions, fmt: Format) -> Result<Output, CliError> {
    let q = BellQuery::new(p, beta)?;
    let report = bound_report_with(&q, opts)?;
    let out = BoundsOutput::from(&report);
    let body = match fmt {
        Format::Json => json(&out),
        Format::Text => bounds_text(&out),
        Format::Csv => csv_table(
            &[
                "p",
                "beta",
                "regime",
                "lower",
                "lower_method",
                "upper",
                "upper_method",
                "series_b_1p",
            ],
            [vec![
                num(p),
                num(beta),
                out.regime.clone(),
                opt_num(out.lower),
                out.lower_method.clone().unwrap_or_default(),
                opt_num(out.upper),
                out.upper_method.clone().unwrap_or_default(),
                opt_num(out.series_check.map(|c| c.b_1p)),
            ]],
        ),
    };
    Ok(Output::ok(body))
}

/// A `scan` request: the product of a `p` grid and a `β` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub p_grid: GridSpec,
    pub beta_grid: GridSpec,
    pub tol: f64,
}

pub const SCAN_COLUMNS: [&str; 12] = [
    "p",
    "beta",
    "regime",
    "series_b_1p",
    "lower",
    "lower_method",
    "upper",
    "upper_method",
    "ratio_upper_over_series",
    "ratio_series_over_lower",
    "debruijn_total",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: f64,
    pub beta: f64,
    pub regime: Option<String>,
    pub series_b_1p: Option<f64>,
    pub lower: Option<f64>,
    pub lower_method: Option<String>,
    pub upper: Option<f64>,
    pub upper_method: Option<String>,
    pub ratio_upper_over_series: Option<f64>,
    pub ratio_series_over_lower: Option<f64>,
    pub debruijn_total: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    error_code: Option<i32>,
}

impl ScanRow {
    fn fields(&self) -> Vec<String> {
        vec![
            num(self.p),
            num(self.beta),
            self.regime.clone().unwrap_or_default(),
            opt_num(self.series_b_1p),
            opt_num(self.lower),
            self.lower_method.clone().unwrap_or_default(),
            opt_num(self.upper),
            self.upper_method.clone().unwrap_or_default(),
            opt_num(self.ratio_upper_over_series),
            opt_num(self.ratio_series_over_lower),
            opt_num(self.debruijn_total),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

pub fn scan_row(p: f64, beta: f64, tol: f64, cfg: &SeriesConfig) -> ScanRow {
    let mut row = ScanRow {
        p,
        beta,
        regime: None,
        series_b_1p: None,
        lower: None,
        lower_method: None,
        upper: None,
        upper_method: None,
        ratio_upper_over_series: None,
        ratio_series_over_lower: None,
        debruijn_total: None,
        error: None,
        error_code: None,
    };
    let mut errors = Vec::new();
    let mut note = |e: bellbound_core::BellError, row: &mut ScanRow| {
        row.error_code.get_or_insert(exit_code_for(&e));
        errors.push(e.to_string());
    };
    let q = match BellQuery::new(p, beta) {
        Ok(q) => q,
        Err(e) => {
            note(e, &mut row);
            row.error = Some(errors.join("; "));
            return row;
        }
    };
    row.regime = Some(q.regime().as_str().to_string());
    if p <= cfg.p_max {
        match bell_dobinski_with(&q, tol, cfg) {
            Ok(r) => row.series_b_1p = (p > 0.0).then(|| r.pth_root(p)),
            Err(e) => note(e, &mut row),
        }
    }
    let opts = BoundOptions {
        series: *cfg,
        series_tol: tol,
        ..BoundOptions::default()
    };
    match bound_report_with(&q, &opts) {
        Ok(r) => {
            row.lower = r.lower;
            row.lower_method = r.lower_method.map(method_name);
            row.upper = r.upper;
            row.upper_method = r.upper_method.map(method_name);
        }
        Err(e) => note(e, &mut row),
    }
    if let Some(s) = row.series_b_1p {
        row.ratio_upper_over_series = row.upper.map(|u| u / s);
        row.ratio_series_over_lower = row.lower.map(|l| s / l);
    }
    if beta == 1.0 && p > std::f64::consts::E {
        match debruijn_expansion(p) {
            Ok(v) => row.debruijn_total = Some(v.total),
            Err(e) => note(e, &mut row),
        }
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

/// Evaluates every grid point (in parallel) and emits rows in grid order,
/// `p` outer and `β` inner.
pub fn scan_rows(spec: &ScanSpec, cfg: &SeriesConfig) -> Vec<ScanRow> {
    let betas = spec.beta_grid.points();
    let points: Vec<(f64, f64)> = spec
        .p_grid
        .points()
        .into_iter()
        .flat_map(|p| betas.iter().map(move |&b| (p, b)))
        .collect();
    points
        .par_iter()
        .map(|&(p, b)| scan_row(p, b, spec.tol, cfg))
        .collect()
}

pub fn scan(spec: &ScanSpec, cfg: &SeriesConfig, fmt: Format) -> Result<Output, CliError> {
    let rows = scan_rows(spec, cfg);
    let body = match fmt {
        Format::Json => json(&rows),
        Format::Csv | Format::Text => csv_table(&SCAN_COLUMNS, rows.iter().map(ScanRow::fields)),
    };
    let code = if rows.iter().any(|r| r.error.is_none()) {
        exit::SUCCESS
    } else {
        rows.iter()
            .find_map(|r| r.error_code)
            .unwrap_or(exit::NUMERIC)
    };
    Ok(Output { body, code })
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub formula: &'static str,
    pub value: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalOutput {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub mu: f64,
    pub value: f64,
    pub cross_check: Option<CrossCheck>,
}

pub fn extremal(a: f64, b: f64, p: f64, fmt: Format) -> Result<Output, CliError> {
    let prob = ExtremalProblem::new(a, b, p)?;
    let value = schechtman_extremal(&prob)?;
    let cross_check = (p == 2.0).then(|| {
        let expected = a * a + b;
        CrossCheck {
            formula: "a^2+b",
            value: expected,
            ok: (value - expected).abs() <= 1e-10 * expected,
        }
    });
    let code = match &cross_check {
        Some(c) if !c.ok => exit::VERIFY_FAILED,
        _ => exit::SUCCESS,
    };
    let out = ExtremalOutput {
        a,
        b,
        p,
        mu: prob.mu(),
        value,
        cross_check,
    };
    let body = match fmt {
        Format::Json => json(&out),
        Format::Csv => csv_table(
            &["a", "b", "p", "mu", "value", "cross_check_ok"],
            [vec![
                num(a),
                num(b),
                num(p),
                num(out.mu),
                num(value),
                out.cross_check
                    .as_ref()
                    .map(|c| c.ok.to_string())
                    .unwrap_or_default(),
            ]],
        ),
        Format::Text => {
            let mut s = key_values(&[("mu", num(out.mu)), ("value", num(value))]);
            if let Some(c) = &out.cross_check {
                let verdict = if c.ok { "ok" } else { "MISMATCH" };
                s.push_str(&format!("{}: {}, {verdict}\n", c.formula, c.value));
            }
            s
        }
    };
    Ok(Output { body, code })
}
