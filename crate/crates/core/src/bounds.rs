//! Non-asymptotic lower and upper estimates of `B^{1/p}(p, β)`.
//!
//! Upper estimates come from the Poisson moment generating function
//! (optimized over `λ`, at the closed-form `λ₀`, or at `λ = p/β`) and from
//! the triangle inequality over unit-rate summands. Lower estimates come
//! from single Dobinski terms: the largest one, a Stirling-smoothed
//! continuous relaxation, the term at the closed-form index `k₀`, and the
//! constant multiple `K₋·β`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{BellError, Result};
use crate::optimize::minimize_unimodal;
use crate::series::{
    bell_dobinski, bell_dobinski_with, ln_mgf_bound_at_lambda, ln_stirling_zeta, log_terms,
    BellQuery, Regime, SeriesConfig,
};

/// Relative slack allowed when comparing a bound against the series value.
pub const SANDWICH_SLACK: f64 = 1e-9;

/// Default tolerance of the scalar optimizers.
pub const DEFAULT_OPT_TOL: f64 = 1e-6;

/// `K₋` as printed next to its defining formula.
pub const K_MINUS_PRINTED: f64 = 0.6538;

/// Smallest `p` at which the triangle bound is admitted. Below `e` the
/// correction `ln ln p / ln p` is non-positive and no positive constant can
/// make the bound hold.
pub const ROUGH_P_MIN: f64 = 3.0;

/// Largest `p` of the grid the triangle constant is fitted on.
pub const ROUGH_FIT_P_MAX: f64 = 200.0;

const SERIES_TOL: f64 = 1e-12;
const C3_FIT_POINTS: usize = 400;

/// Named constants of the large-`β` regime bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeConstants {
    /// `exp((e² − 3)/2)`.
    pub k_plus: f64,
    /// `(2π)^{-1/2} exp(−1/(2e) + 1/3)`, evaluated.
    pub k_minus_formula: f64,
    /// The printed value `0.6538`.
    pub k_minus_printed: f64,
    /// Smallest `c₃` making the triangle bound hold at `β = 1` on the fit
    /// grid `p ∈ [3, 200]`.
    pub c3_fitted: f64,
}

impl RegimeConstants {
    /// The constants, with `c₃` fitted once on first use.
    pub fn get() -> &'static RegimeConstants {
        static CONSTANTS: OnceLock<RegimeConstants> = OnceLock::new();
        CONSTANTS.get_or_init(|| RegimeConstants {
            k_plus: k_plus(),
            k_minus_formula: k_minus_formula(),
            k_minus_printed: K_MINUS_PRINTED,
            c3_fitted: fit_c3(),
        })
    }
}

pub fn k_plus() -> f64 {
    let e = std::f64::consts::E;
    ((e * e - 3.0) / 2.0).exp()
}

pub fn k_minus_formula() -> f64 {
    let e = std::f64::consts::E;
    (2.0 * std::f64::consts::PI).powf(-0.5) * (-1.0 / (2.0 * e) + 1.0 / 3.0).exp()
}

/// The constant `c₃` needed by the triangle bound at `β = 1` and this `p`:
/// `(B^{1/p} e ln p / p − 1) · ln p / ln ln p`.
pub fn c3_required(p: f64, b_1p: f64) -> f64 {
    let lp = p.ln();
    (b_1p * std::f64::consts::E * lp / p - 1.0) * lp / lp.ln()
}

fn fit_c3() -> f64 {
    let (lo, hi) = (ROUGH_P_MIN.ln(), ROUGH_FIT_P_MAX.ln());
    (0..C3_FIT_POINTS)
        .map(|i| {
            let p = (lo + (hi - lo) * i as f64 / (C3_FIT_POINTS - 1) as f64).exp();
            let q = BellQuery::new(p, 1.0).expect("grid point is valid");
            let b_1p = bell_dobinski(&q, SERIES_TOL)
                .expect("series converges on the fit grid")
                .pth_root(p);
            c3_required(p, b_1p)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Which value of `K₋` a lower bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum KMinusChoice {
    /// The evaluated formula.
    #[default]
    Formula,
    /// The printed number.
    Printed,
}

impl KMinusChoice {
    pub fn value(self) -> f64 {
        match self {
            KMinusChoice::Formula => RegimeConstants::get().k_minus_formula,
            KMinusChoice::Printed => RegimeConstants::get().k_minus_printed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LowerMethod {
    H0Search,
    HContinuous,
    ClosedFormLargeP,
    KMinusLargeBeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum UpperMethod {
    GOptimized,
    ClosedFormLargeP,
    KPlusLargeBeta,
    RoughTriangle,
}

/// The argument that achieved a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Witness {
    Lambda(f64),
    K(u64),
    X(f64),
}

/// `g_β(p)` and its minimizing `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GOptimum {
    pub bound: f64,
    pub lambda_star: f64,
    /// The search ended on the admissible interval's edge; the bound is
    /// still valid but may not be the infimum.
    pub at_boundary: bool,
}

/// `λ β e^λ / p − 1`, the scaled derivative of the log MGF bound in `λ`.
pub fn lambda_stationarity_residual(q: &BellQuery, lambda: f64) -> f64 {
    lambda * q.beta() * lambda.exp() / q.p() - 1.0
}

/// Upper bound `g_β(p)`: the MGF bound minimized over `λ` by golden-section
/// search on its logarithm.
pub fn upper_g_optimized(q: &BellQuery, opt_tol: f64) -> Result<GOptimum> {
    q.require_p_at_least(1.0)?;
    if !(opt_tol > 0.0) {
        return Err(BellError::domain("optimizer tolerance must be > 0"));
    }
    let (p, beta) = (q.p(), q.beta());
    // Keep β e^λ / p within reach of f64.
    let hi = ((700.0 + 700.0 * p) / beta).ln();
    let lo = 1e-12 * q.ratio().min(1.0);
    let seed = q.ratio().ln_1p().clamp(lo, hi);
    let objective = |lambda: f64| ln_mgf_bound_at_lambda(q, lambda).unwrap_or(f64::INFINITY);
    let rel_tol = (opt_tol * 1e-4).max(1e-15);
    let m = minimize_unimodal(objective, seed, lo, hi, 2.0, rel_tol);
    Ok(GOptimum {
        bound: m.fx.exp(),
        lambda_star: m.x,
        at_boundary: m.at_boundary,
    })
}

/// `λ₀ = ln(p/β) − ln ln(p/β)`.
pub fn lambda0(q: &BellQuery) -> Result<f64> {
    let r = q.ratio();
    if !(r > 1.0) {
        return Err(BellError::domain(format!(
            "ln ln(p/beta) needs p/beta > 1, got {r}"
        )));
    }
    let l0 = r.ln() - r.ln().ln();
    if l0 > 0.0 {
        Ok(l0)
    } else {
        Err(BellError::domain(format!("lambda0 = {l0} is not positive")))
    }
}

fn require_large_p(q: &BellQuery) -> Result<()> {
    q.require_p_at_least(1.0)?;
    if q.ratio() < 2.0 {
        return Err(BellError::Regime(format!(
            "bound needs p >= 2 beta, got p/beta = {}",
            q.ratio()
        )));
    }
    Ok(())
}

fn require_large_beta(q: &BellQuery) -> Result<()> {
    q.require_p_at_least(1.0)?;
    if q.ratio() > 2.0 {
        return Err(BellError::Regime(format!(
            "bound needs p <= 2 beta, got p/beta = {}",
            q.ratio()
        )));
    }
    Ok(())
}

/// Closed-form upper bound for `p ≥ 2β`:
/// `(p/e)/(ln r − ln ln r) · exp(1/ln r − 1/r)` with `r = p/β`.
pub fn upper_closed_form_largep(q: &BellQuery) -> Result<f64> {
    require_large_p(q)?;
    lambda0(q)?;
    let r = q.ratio();
    let lr = r.ln();
    let ln_value = (q.p() / std::f64::consts::E).ln() - (lr - lr.ln()).ln() + 1.0 / lr - 1.0 / r;
    Ok(ln_value.exp())
}

/// Largest single Dobinski term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H0Search {
    /// `ln h₀`, where `h₀ ≤ B(p, β)`.
    pub ln_bound: f64,
    pub k_star: u64,
}

impl H0Search {
    /// `h₀`, a lower bound on `B(p, β)`; may overflow for large `p`.
    pub fn bound(&self) -> f64 {
        self.ln_bound.exp()
    }

    /// `h₀^{1/p}`, a lower bound on `B^{1/p}`.
    pub fn pth_root(&self, p: f64) -> f64 {
        (self.ln_bound / p).exp()
    }
}

/// `h₀ = max_{k ≥ 1} e^{-β} k^p β^k / k!`, scanning upward to the first
/// descent.
pub fn lower_h0_search(q: &BellQuery) -> Result<H0Search> {
    if !(q.p() > 0.0) {
        return Err(BellError::domain("h0 search needs p > 0"));
    }
    let mut terms = log_terms(q).skip(1);
    let mut best = terms.next().expect("term iterator is infinite");
    for t in terms {
        if t.log_term <= best.log_term {
            break;
        }
        best = t;
    }
    Ok(H0Search {
        ln_bound: best.log_term,
        k_star: best.k,
    })
}

/// Stirling-smoothed single-term lower estimate and its maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousLower {
    /// Estimate of `B^{1/p}`.
    pub bound: f64,
    pub x_star: f64,
    /// The search stopped at the upper end of the search interval.
    pub at_boundary: bool,
}

/// `(1/p) · ln[e^{-β} x^p β^x / ζ(x)]`.
pub fn ln_h_continuous_objective(q: &BellQuery, x: f64) -> Result<f64> {
    let (p, beta) = (q.p(), q.beta());
    Ok((-beta + p * x.ln() + x * beta.ln() - ln_stirling_zeta(x)?) / p)
}

/// `sup_{x ≥ 1} [e^{-β} x^p β^x / ζ(x)]^{1/p}`. The objective is concave in
/// `x` on `[1, ∞)`, so golden-section search seeded at `k₀` finds it.
pub fn lower_h_continuous(q: &BellQuery, opt_tol: f64) -> Result<ContinuousLower> {
    if !(q.p() > 0.0) {
        return Err(BellError::domain("continuous lower bound needs p > 0"));
    }
    if !(opt_tol > 0.0) {
        return Err(BellError::domain("optimizer tolerance must be > 0"));
    }
    let seed = match k0_selector(q) {
        Ok(k) => k as f64,
        Err(_) => q.beta().max(1.0),
    };
    let hi = 10.0 * (q.p() + q.beta()) + 10.0;
    let objective = |x: f64| -ln_h_continuous_objective(q, x).unwrap_or(f64::NEG_INFINITY);
    let rel_tol = (opt_tol * 1e-4).max(1e-15);
    let m = minimize_unimodal(objective, seed, 1.0, hi, 2.0, rel_tol);
    Ok(ContinuousLower {
        bound: (-m.fx).exp(),
        x_star: m.x,
        at_boundary: m.at_boundary && m.x > 1.0,
    })
}

/// `k₀ = ⌊p / ln(pe/β)⌋ + 1`.
pub fn k0_selector(q: &BellQuery) -> Result<u64> {
    q.require_p_at_least(1.0)?;
    let denom = (q.ratio() * std::f64::consts::E).ln();
    if !(denom > 0.0) {
        return Err(BellError::domain(format!(
            "k0 needs ln(p e / beta) > 0, got {denom}"
        )));
    }
    Ok((q.p() / denom).floor() as u64 + 1)
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Log of the Dobinski term at index `k ≥ 1`.
pub fn ln_dobinski_term(q: &BellQuery, k: u64) -> f64 {
    let kf = k as f64;
    q.p() * kf.ln() + kf * q.beta().ln() - ln_factorial(k) - q.beta()
}

/// Closed-form lower bound for `p ≥ 2β`: the Dobinski term at `k₀`, on the
/// `B^{1/p}` scale.
pub fn lower_closed_form_largep(q: &BellQuery) -> Result<f64> {
    require_large_p(q)?;
    let k0 = k0_selector(q)?;
    Ok((ln_dobinski_term(q, k0) / q.p()).exp())
}

/// `K₊ · β` for `p ≤ 2β`.
pub fn regime_upper_largebeta(q: &BellQuery) -> Result<f64> {
    require_large_beta(q)?;
    Ok(RegimeConstants::get().k_plus * q.beta())
}

/// `K₋ · β` together with an empirical check against the series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KMinusLower {
    pub value: f64,
    pub constant: KMinusChoice,
    pub constant_value: f64,
    /// Whether `value ≤ B^{1/p}` held against the series; `None` when the
    /// series is out of range.
    pub holds: Option<bool>,
}

/// `K₋ · β` for `p ≤ 2β`. The result is not trusted: `holds` records whether
/// it actually lower-bounds the series value.
pub fn regime_lower_largebeta(q: &BellQuery, choice: KMinusChoice) -> Result<KMinusLower> {
    require_large_beta(q)?;
    let constant_value = choice.value();
    let value = constant_value * q.beta();
    let holds = bell_dobinski(q, SERIES_TOL)
        .ok()
        .map(|r| value <= r.pth_root(q.p()) * (1.0 + SANDWICH_SLACK));
    Ok(KMinusLower {
        value,
        constant: choice,
        constant_value,
        holds,
    })
}

/// Triangle-inequality bound `⌈β⌉ · p/(e ln p) · (1 + c₃ ln ln p / ln p)`.
pub fn rough_upper_triangle(q: &BellQuery, c3: f64) -> Result<f64> {
    if q.p() < ROUGH_P_MIN {
        return Err(BellError::domain(format!(
            "triangle bound needs p >= {ROUGH_P_MIN}, got {}",
            q.p()
        )));
    }
    if q.beta() < 1.0 {
        return Err(BellError::domain(format!(
            "triangle bound needs beta >= 1, got {}",
            q.beta()
        )));
    }
    if !(c3 > 0.0) {
        return Err(BellError::domain(format!("c3 must be > 0, got {c3}")));
    }
    let p = q.p();
    let lp = p.ln();
    Ok(q.beta().ceil() * p / (std::f64::consts::E * lp) * (1.0 + c3 * lp.ln() / lp))
}

/// `|B^{1/p} − m| / m · ln r / ln ln r` with `m = p/(e ln r)`, `r = p/β`.
/// Defined for `r > e`, where `ln ln r > 0`.
pub fn normalized_relative_error(q: &BellQuery, b_1p: f64) -> Option<f64> {
    let r = q.ratio();
    if !(r > std::f64::consts::E) {
        return None;
    }
    let lr = r.ln();
    let m = q.p() / (std::f64::consts::E * lr);
    Some((b_1p - m).abs() / m * lr / lr.ln())
}

/// Options for [`bound_report_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub opt_tol: f64,
    pub k_minus: KMinusChoice,
    pub series: SeriesConfig,
    pub series_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            opt_tol: DEFAULT_OPT_TOL,
            k_minus: KMinusChoice::Formula,
            series: SeriesConfig::default(),
            series_tol: SERIES_TOL,
        }
    }
}

/// One evaluated method, successful or not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate<M> {
    pub method: M,
    pub value: Option<f64>,
    pub witness: Option<Witness>,
    pub error: Option<String>,
    /// Eligible to become the reported bound.
    pub eligible: bool,
}

/// The series value and whether the selected bounds enclose it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesCheck {
    pub b_1p: f64,
    pub lower_ok: Option<bool>,
    pub upper_ok: Option<bool>,
}

/// Matched lower and upper estimates of `B^{1/p}` for one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub query: BellQuery,
    pub regime: Regime,
    pub lower: Option<f64>,
    pub lower_method: Option<LowerMethod>,
    pub lower_witness: Option<Witness>,
    pub upper: Option<f64>,
    pub upper_method: Option<UpperMethod>,
    pub upper_witness: Option<Witness>,
    pub k_minus_constant: Option<KMinusChoice>,
    /// Set when the `K₋ · β` candidate failed to lower-bound the series.
    pub k_minus_violation: bool,
    pub series_check: Option<SeriesCheck>,
    pub lower_candidates: Vec<Candidate<LowerMethod>>,
    pub upper_candidates: Vec<Candidate<UpperMethod>>,
}

impl BoundReport {
    /// The selected bounds enclose the series value (when one is known).
    pub fn sandwich_holds(&self) -> Option<bool> {
        let check = self.series_check?;
        Some(check.lower_ok.unwrap_or(true) && check.upper_ok.unwrap_or(true))
    }
}

fn candidate<M>(method: M, result: Result<(f64, Option<Witness>)>, eligible: bool) -> Candidate<M> {
    match result {
        Ok((value, witness)) => Candidate {
            method,
            value: Some(value),
            witness,
            error: None,
            eligible,
        },
        Err(e) => Candidate {
            method,
            value: None,
            witness: None,
            error: Some(e.to_string()),
            eligible: false,
        },
    }
}

pub fn bound_report(q: &BellQuery) -> Result<BoundReport> {
    bound_report_with(q, &BoundOptions::default())
}

/// Evaluates every bound applicable to the regime of `q` and keeps the
/// tightest lower and upper ones.
///
/// Only rigorous single-term bounds compete for the lower side: the
/// continuous relaxation is evaluated for reference but never selected, and
/// `K₋ · β` is dropped when it fails the series check.
pub fn bound_report_with(q: &BellQuery, opts: &BoundOptions) -> Result<BoundReport> {
    q.require_p_at_least(1.0)?;
    let regime = q.regime();
    let p = q.p();

    let mut upper_candidates = vec![candidate(
        UpperMethod::GOptimized,
        upper_g_optimized(q, opts.opt_tol).map(|g| (g.bound, Some(Witness::Lambda(g.lambda_star)))),
        true,
    )];
    let mut lower_candidates = vec![
        candidate(
            LowerMethod::H0Search,
            lower_h0_search(q).map(|h| (h.pth_root(p), Some(Witness::K(h.k_star)))),
            true,
        ),
        candidate(
            LowerMethod::HContinuous,
            lower_h_continuous(q, opts.opt_tol).map(|h| (h.bound, Some(Witness::X(h.x_star)))),
            false,
        ),
    ];
    let mut k_minus_constant = None;
    let mut k_minus_violation = false;
    match regime {
        Regime::LargeP => {
            upper_candidates.push(candidate(
                UpperMethod::ClosedFormLargeP,
                upper_closed_form_largep(q)
                    .and_then(|v| Ok((v, Some(Witness::Lambda(lambda0(q)?))))),
                true,
            ));
            lower_candidates.push(candidate(
                LowerMethod::ClosedFormLargeP,
                lower_closed_form_largep(q)
                    .and_then(|v| Ok((v, Some(Witness::K(k0_selector(q)?))))),
                true,
            ));
        }
        Regime::LargeBeta => {
            upper_candidates.push(candidate(
                UpperMethod::KPlusLargeBeta,
                regime_upper_largebeta(q).map(|v| (v, Some(Witness::Lambda(q.ratio())))),
                true,
            ));
            let km = regime_lower_largebeta(q, opts.k_minus);
            k_minus_constant = Some(opts.k_minus);
            let eligible = match &km {
                Ok(k) => k.holds != Some(false),
                Err(_) => false,
            };
            k_minus_violation = matches!(&km, Ok(k) if k.holds == Some(false));
            lower_candidates.push(candidate(
                LowerMethod::KMinusLargeBeta,
                km.map(|k| (k.value, None)),
                eligible,
            ));
        }
        Regime::Gap => unreachable!("p >= 1 was checked"),
    }
    if p >= ROUGH_P_MIN && q.beta() >= 1.0 {
        upper_candidates.push(candidate(
            UpperMethod::RoughTriangle,
            rough_upper_triangle(q, RegimeConstants::get().c3_fitted).map(|v| (v, None)),
            true,
        ));
    }

    let best_upper = upper_candidates
        .iter()
        .filter(|c| c.eligible)
        .filter_map(|c| c.value.map(|v| (v, c)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let best_lower = lower_candidates
        .iter()
        .filter(|c| c.eligible)
        .filter_map(|c| c.value.map(|v| (v, c)))
        .max_by(|a, b| a.0.total_cmp(&b.0));

    let (upper, upper_method, upper_witness) = match best_upper {
        Some((v, c)) => (Some(v), Some(c.method), c.witness),
        None => (None, None, None),
    };
    let (lower, lower_method, lower_witness) = match best_lower {
        Some((v, c)) => (Some(v), Some(c.method), c.witness),
        None => (None, None, None),
    };

    let series_check = if p <= opts.series.p_max {
        bell_dobinski_with(q, opts.series_tol, &opts.series)
            .ok()
            .map(|r| {
                let b_1p = r.pth_root(p);
                SeriesCheck {
                    b_1p,
                    lower_ok: lower.map(|l| l <= b_1p * (1.0 + SANDWICH_SLACK)),
                    upper_ok: upper.map(|u| u >= b_1p * (1.0 - SANDWICH_SLACK)),
                }
            })
    } else {
        None
    };

    Ok(BoundReport {
        query: *q,
        regime,
        lower,
        lower_method,
        lower_witness,
        upper,
        upper_method,
        upper_witness,
        k_minus_constant,
        k_minus_violation,
        series_check,
        lower_candidates,
        upper_candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: f64, beta: f64) -> BellQuery {
        BellQuery::new(p, beta).unwrap()
    }

    fn series_root(p: f64, beta: f64) -> f64 {
        bell_dobinski(&q(p, beta), 1e-13).unwrap().pth_root(p)
    }

    #[test]
    fn constants() {
        let c = RegimeConstants::get();
        assert!(c.k_plus >= 8.975 && c.k_plus <= 8.976, "{}", c.k_plus);
        assert!(
            (c.k_minus_formula - 0.4632).abs() < 1e-3,
            "{}",
            c.k_minus_formula
        );
        assert_eq!(c.k_minus_printed, 0.6538);
        assert!(c.c3_fitted > 8.0 && c.c3_fitted < 8.5, "{}", c.c3_fitted);
    }

    #[test]
    fn g_optimized_examples() {
        let g = upper_g_optimized(&q(10.0, 1.0), DEFAULT_OPT_TOL).unwrap();
        assert!(
            g.bound >= series_root(10.0, 1.0) && g.bound <= 3.4995,
            "{g:?}"
        );
        assert!(!g.at_boundary);
        let at_l0 =
            crate::series::mgf_bound_at_lambda(&q(10.0, 1.0), lambda0(&q(10.0, 1.0)).unwrap())
                .unwrap();
        assert!(g.bound <= at_l0);
        assert!(
            upper_g_optimized(&q(2.0, 1.0), DEFAULT_OPT_TOL)
                .unwrap()
                .bound
                >= 2f64.sqrt()
        );
        assert!(upper_g_optimized(&q(0.5, 1.0), DEFAULT_OPT_TOL).is_err());
    }

    #[test]
    fn g_optimized_is_stationary() {
        for &(p, beta) in &[
            (1.0, 50.0),
            (2.0, 0.1),
            (10.0, 1.0),
            (200.0, 3.0),
            (5.0, 5.0),
        ] {
            let query = q(p, beta);
            let g = upper_g_optimized(&query, DEFAULT_OPT_TOL).unwrap();
            let res = lambda_stationarity_residual(&query, g.lambda_star);
            assert!(
                res.abs() < DEFAULT_OPT_TOL,
                "p={p} beta={beta} residual={res}"
            );
        }
    }

    #[test]
    fn closed_form_upper() {
        let v = upper_closed_form_largep(&q(10.0, 1.0)).unwrap();
        assert!((v - 3.499_437_539).abs() < 1e-8, "{v}");
        assert!(v >= series_root(10.0, 1.0));
        let v100 = upper_closed_form_largep(&q(100.0, 1.0)).unwrap();
        let s100 = series_root(100.0, 1.0);
        assert!(v100 >= s100 && v100 / s100 < 1.25);
        assert!(matches!(
            upper_closed_form_largep(&q(3.0, 2.0)),
            Err(BellError::Regime(_))
        ));
    }

    #[test]
    fn h0_examples() {
        let h = lower_h0_search(&q(10.0, 1.0)).unwrap();
        assert_eq!(h.k_star, 6);
        let expected = (-1.0f64).exp() * 6f64.powi(10) / 720.0;
        assert!((h.bound() - expected).abs() / expected < 1e-12);
        assert!((h.bound() - 30894.0).abs() < 1.0);

        let h = lower_h0_search(&q(1.0, 1.0)).unwrap();
        assert_eq!(h.k_star, 1);
        assert!((h.bound() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(lower_h0_search(&q(0.0, 1.0)).is_err());
    }

    #[test]
    fn h_continuous_examples() {
        let c = lower_h_continuous(&q(10.0, 1.0), DEFAULT_OPT_TOL).unwrap();
        let h0 = lower_h0_search(&q(10.0, 1.0)).unwrap().bound();
        let ratio = c.bound.powi(10) / h0;
        assert!(ratio > 0.9 && ratio < 1.2, "{ratio}");
        assert!(c.bound <= series_root(10.0, 1.0));
        assert!(
            lower_h_continuous(&q(2.0, 1.0), DEFAULT_OPT_TOL)
                .unwrap()
                .bound
                <= 2f64.sqrt()
        );
    }

    #[test]
    fn k0_examples() {
        assert_eq!(k0_selector(&q(10.0, 1.0)).unwrap(), 4);
        assert_eq!(k0_selector(&q(100.0, 1.0)).unwrap(), 18);
        let beta = 3.0;
        let k = k0_selector(&q(std::f64::consts::E * beta, beta)).unwrap();
        assert_eq!(k, (std::f64::consts::E * beta / 2.0).floor() as u64 + 1);
        assert!(k0_selector(&q(1.0, 10.0)).is_err());
    }

    #[test]
    fn closed_form_lower() {
        let v = lower_closed_form_largep(&q(10.0, 1.0)).unwrap();
        let expected = ((-1.0f64).exp() * 4f64.powi(10) / 24.0).powf(0.1);
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 2.633_961_477).abs() < 1e-8, "{v}");
        assert!(v <= lower_h0_search(&q(10.0, 1.0)).unwrap().pth_root(10.0));
        assert!(matches!(
            lower_closed_form_largep(&q(2.0, 10.0)),
            Err(BellError::Regime(_))
        ));
    }

    #[test]
    fn large_beta_upper() {
        let v = regime_upper_largebeta(&q(2.0, 10.0)).unwrap();
        assert!((v - 89.758).abs() < 1e-2);
        assert!(v >= 110f64.sqrt());
        assert!(regime_upper_largebeta(&q(1.0, 1.0)).unwrap() >= 1.0);
        let direct = crate::series::mgf_bound_at_lambda(&q(2.0, 1.0), 2.0).unwrap();
        assert!((direct - k_plus()).abs() / k_plus() < 1e-12);
        assert!(matches!(
            regime_upper_largebeta(&q(10.0, 1.0)),
            Err(BellError::Regime(_))
        ));
    }

    #[test]
    fn large_beta_lower_flags() {
        let f = regime_lower_largebeta(&q(2.0, 10.0), KMinusChoice::Formula).unwrap();
        assert!((f.value - 4.632).abs() < 1e-2);
        assert_eq!(f.holds, Some(true));
        let pr = regime_lower_largebeta(&q(2.0, 10.0), KMinusChoice::Printed).unwrap();
        assert!((pr.value - 6.538).abs() < 1e-12);
        assert_eq!(pr.holds, Some(true));
        let one = regime_lower_largebeta(&q(1.0, 1.0), KMinusChoice::Printed).unwrap();
        assert_eq!(one.holds, Some(true));
    }

    #[test]
    fn rough_triangle() {
        let c3 = RegimeConstants::get().c3_fitted;
        assert!(rough_upper_triangle(&q(10.0, 1.0), c3).unwrap() >= series_root(10.0, 1.0));
        assert!(rough_upper_triangle(&q(10.0, 3.0), c3).unwrap() >= series_root(10.0, 3.0));
        let one = rough_upper_triangle(&q(10.0, 1.0), c3).unwrap();
        let three = rough_upper_triangle(&q(10.0, 3.0), c3).unwrap();
        assert!((three - 3.0 * one).abs() < 1e-12);
        assert!(rough_upper_triangle(&q(2.5, 1.0), c3).is_err());
        assert!(rough_upper_triangle(&q(10.0, 0.5), c3).is_err());
    }

    #[test]
    fn report_examples() {
        let r = bound_report(&q(10.0, 1.0)).unwrap();
        assert_eq!(r.regime, Regime::LargeP);
        assert_eq!(r.upper_method, Some(UpperMethod::GOptimized));
        assert_eq!(r.lower_method, Some(LowerMethod::H0Search));
        let b = 115_975f64.powf(0.1);
        assert!(r.lower.unwrap() <= b && b <= r.upper.unwrap());
        assert_eq!(r.sandwich_holds(), Some(true));

        let r = bound_report(&q(2.0, 10.0)).unwrap();
        assert_eq!(r.regime, Regime::LargeBeta);
        let b = 110f64.sqrt();
        assert!(r.lower.unwrap() <= b && b <= r.upper.unwrap());
        let kplus = r
            .upper_candidates
            .iter()
            .find(|c| c.method == UpperMethod::KPlusLargeBeta)
            .unwrap();
        assert!((kplus.value.unwrap() - 89.758).abs() < 1e-2);
        assert!(matches!(
            r.lower_method,
            Some(LowerMethod::H0Search) | Some(LowerMethod::KMinusLargeBeta)
        ));

        assert_eq!(bound_report(&q(2.0, 1.0)).unwrap().regime, Regime::LargeP);
        assert!(bound_report(&q(0.5, 1.0)).is_err());
    }

    #[test]
    fn normalized_error_domain() {
        assert!(normalized_relative_error(&q(2.5, 1.0), 1.0).is_none());
        assert!(
            normalized_relative_error(&q(100.0, 1.0), series_root(100.0, 1.0))
                .unwrap()
                .is_finite()
        );
    }
}
