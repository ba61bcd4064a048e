//! Dobinski-series evaluation of `B(p, β)` and the exact oracles it is
//! checked against.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{BellError, Result};

/// Default cap on `p` for series evaluation.
pub const DEFAULT_P_MAX: f64 = 500.0;

/// Default cap on the number of series terms summed.
pub const DEFAULT_TERM_BUDGET: usize = 2_000_000;

/// Largest `p` for which Stirling numbers of the second kind are built
/// exactly.
pub const TOUCHARD_P_MAX: u32 = 30;

/// Parameter regime of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `p ≥ 1` and `p/β ≥ 2` (the tie `p/β = 2` lands here).
    LargeP,
    /// `p ≥ 1` and `p/β < 2`.
    LargeBeta,
    /// `p < 1`, where none of the regime bounds apply.
    Gap,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::LargeP => "LargeP",
            Regime::LargeBeta => "LargeBeta",
            Regime::Gap => "Gap",
        }
    }
}

/// An evaluation point `(p, β)` with `p ≥ 0`, `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellQuery {
    p: f64,
    beta: f64,
}

impl BellQuery {
    pub fn new(p: f64, beta: f64) -> Result<Self> {
        if !p.is_finite() || p < 0.0 {
            return Err(BellError::domain(format!(
                "p must be finite and >= 0, got {p}"
            )));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(BellError::domain(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        Ok(BellQuery { p, beta })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `p / β`.
    pub fn ratio(&self) -> f64 {
        self.p / self.beta
    }

    pub fn regime(&self) -> Regime {
        if self.p < 1.0 {
            Regime::Gap
        } else if self.ratio() >= 2.0 {
            Regime::LargeP
        } else {
            Regime::LargeBeta
        }
    }

    pub(crate) fn require_p_at_least(&self, min: f64) -> Result<()> {
        if self.p < min {
            Err(BellError::domain(format!(
                "p must be >= {min}, got {}",
                self.p
            )))
        } else {
            Ok(())
        }
    }
}

/// Limits applied to series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub p_max: f64,
    pub term_budget: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            p_max: DEFAULT_P_MAX,
            term_budget: DEFAULT_TERM_BUDGET,
        }
    }
}

/// A positive value carried as its natural log, with the certificate of the
/// omitted series tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub log_value: f64,
    pub terms_used: usize,
    /// Log of a certified bound on (omitted tail) / (returned value).
    pub tail_bound_log: f64,
    pub peak_index: u64,
}

impl EvalResult {
    /// `exp(log_value)`; may overflow to infinity for large `p`.
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// `B^{1/p}`, the `L_p` norm of the Poisson variable.
    pub fn pth_root(&self, p: f64) -> f64 {
        (self.log_value / p).exp()
    }
}

/// One summand of the Dobinski series, as a log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTerm {
    pub k: u64,
    pub log_term: f64,
}

/// Log of the `k`-th Dobinski term `e^{-β} k^p β^k / k!`, given `ln k!`.
fn log_term_with(p: f64, ln_beta: f64, beta: f64, k: u64, ln_fact: f64) -> f64 {
    if k == 0 {
        return if p == 0.0 { -beta } else { f64::NEG_INFINITY };
    }
    let kf = k as f64;
    p * kf.ln() + kf * ln_beta - ln_fact - beta
}

/// Iterator over the Dobinski terms of a query, from `k = 0`.
pub struct LogTerms {
    p: f64,
    beta: f64,
    ln_beta: f64,
    k: u64,
    ln_fact: Kahan,
}

impl Iterator for LogTerms {
    type Item = LogTerm;

    fn next(&mut self) -> Option<LogTerm> {
        let k = self.k;
        if k > 0 {
            self.ln_fact.add((k as f64).ln());
        }
        let log_term = log_term_with(self.p, self.ln_beta, self.beta, k, self.ln_fact.sum());
        self.k += 1;
        Some(LogTerm { k, log_term })
    }
}

/// All Dobinski terms of `q`, starting at `k = 0`.
pub fn log_terms(q: &BellQuery) -> LogTerms {
    LogTerms {
        p: q.p,
        beta: q.beta,
        ln_beta: q.beta.ln(),
        k: 0,
        ln_fact: Kahan::default(),
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.comp *= factor;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `log B(p, β)` by the Dobinski series with default limits.
pub fn bell_dobinski(q: &BellQuery, tol: f64) -> Result<EvalResult> {
    bell_dobinski_with(q, tol, &SeriesConfig::default())
}

/// `log B(p, β)` by the Dobinski series, summed in log-space until the
/// geometric tail bound past the peak certifies the relative tolerance.
pub fn bell_dobinski_with(q: &BellQuery, tol: f64, cfg: &SeriesConfig) -> Result<EvalResult> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(BellError::domain(format!(
            "tolerance must lie in (0, 1e-3], got {tol}"
        )));
    }
    if q.p > cfg.p_max {
        return Err(BellError::domain(format!(
            "p = {} exceeds p_max = {}",
            q.p, cfg.p_max
        )));
    }
    let ln_tol = tol.ln();

    let mut terms = log_terms(q);
    if q.p > 0.0 {
        // k = 0 contributes exactly zero.
        terms.next();
    }
    let first = terms.next().expect("term iterator is infinite");

    // Running sum in units of exp(shift).
    let mut shift = first.log_term;
    let mut acc = Kahan::default();
    acc.add(1.0);
    let mut peak = first;
    let mut current = first;
    let mut used = 1usize;

    loop {
        let next = terms.next().expect("term iterator is infinite");
        let ln_ratio = next.log_term - current.log_term;
        if ln_ratio < 0.0 {
            // Past the peak: every later ratio is at most this one.
            let ratio = ln_ratio.exp();
            let ln_tail = current.log_term + ln_ratio - (-ratio).ln_1p();
            let tail_bound_log = ln_tail - (shift + acc.sum().ln());
            if tail_bound_log <= ln_tol {
                return Ok(EvalResult {
                    log_value: shift + acc.sum().ln(),
                    terms_used: used,
                    tail_bound_log,
                    peak_index: peak.k,
                });
            }
        }
        if used >= cfg.term_budget {
            return Err(BellError::ToleranceNotReached { tol, terms: used });
        }
        if next.log_term > shift {
            acc.scale((shift - next.log_term).exp());
            shift = next.log_term;
        }
        acc.add((next.log_term - shift).exp());
        if next.log_term > peak.log_term {
            peak = next;
        }
        current = next;
        used += 1;
    }
}

/// Row `p` of the Stirling triangle of the second kind, `S(p, 0..=p)`.
pub fn stirling2_row(p: u32) -> Result<Vec<u128>> {
    if p > TOUCHARD_P_MAX {
        return Err(BellError::Overflow(format!(
            "exact Stirling numbers are limited to p <= {TOUCHARD_P_MAX}, got {p}"
        )));
    }
    let mut row = vec![1u128];
    for n in 1..=p as usize {
        let mut next = vec![0u128; n + 1];
        for j in 1..=n {
            let carry = if j < n { row[j] } else { 0 };
            next[j] = (j as u128)
                .checked_mul(carry)
                .and_then(|v| v.checked_add(row[j - 1]))
                .ok_or_else(|| BellError::Overflow(format!("S({n}, {j}) overflows u128")))?;
        }
        row = next;
    }
    Ok(row)
}

/// `Σ_j S(p, j) β^j` for an integer `β`, in exact arithmetic.
pub fn touchard_integer(p: u32, beta: u64) -> Result<u128> {
    let row = stirling2_row(p)?;
    let b = beta as u128;
    // Horner from the top coefficient.
    row.iter().rev().try_fold(0u128, |acc, &s| {
        acc.checked_mul(b)
            .and_then(|v| v.checked_add(s))
            .ok_or_else(|| {
                BellError::Overflow(format!("Touchard polynomial at p = {p}, beta = {beta}"))
            })
    })
}

/// The Bell number `B(p)`, exact.
pub fn bell_number_exact(p: u32) -> Result<u128> {
    touchard_integer(p, 1)
}

/// `B(p, β) = Σ_j S(p, j) β^j` with exact Stirling numbers and a real `β`.
pub fn bell_touchard_exact(p: u32, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(BellError::domain(format!("beta must be > 0, got {beta}")));
    }
    let row = stirling2_row(p)?;
    // All coefficients are non-negative, so Horner has no cancellation.
    let value = row
        .iter()
        .rev()
        .fold(0.0f64, |acc, &s| acc * beta + s as f64);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(BellError::Overflow(format!("B({p}, {beta}) overflows f64")))
    }
}

/// `ln ζ(x) = ½ ln(2πx) + x ln(x/e) + 1/(12x)`.
pub fn ln_stirling_zeta(x: f64) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(BellError::domain(format!(
            "Stirling majorant needs x >= 1, got {x}"
        )));
    }
    Ok(0.5 * (2.0 * PI * x).ln() + x * (x.ln() - 1.0) + 1.0 / (12.0 * x))
}

/// Stirling majorant `ζ(x) = √(2πx) (x/e)^x e^{1/(12x)}`; `k! ≤ ζ(k)`.
pub fn stirling_zeta(x: f64) -> Result<f64> {
    ln_stirling_zeta(x).map(f64::exp)
}

/// Log of the Chernoff-type bound `(p/(eλ)) · exp(β(e^λ − 1)/p)` on
/// `B^{1/p}`.
pub fn ln_mgf_bound_at_lambda(q: &BellQuery, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(BellError::domain(format!(
            "lambda must be finite and > 0, got {lambda}"
        )));
    }
    q.require_p_at_least(1.0)?;
    let p = q.p;
    Ok(p.ln() - 1.0 - lambda.ln() + q.beta * lambda.exp_m1() / p)
}

/// Upper bound on `B^{1/p}` from the Poisson MGF at a fixed `λ > 0`.
pub fn mgf_bound_at_lambda(q: &BellQuery, lambda: f64) -> Result<f64> {
    ln_mgf_bound_at_lambda(q, lambda).map(f64::exp)
}
