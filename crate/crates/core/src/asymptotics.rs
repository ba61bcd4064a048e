//! Large-`p` approximations of the Bell numbers `B(p) = B(p, 1)`.

use serde::Serialize;

use crate::error::{BellError, Result};
use crate::series::{bell_dobinski, BellQuery, DEFAULT_P_MAX};

const LAMBERT_MAX_ITERS: usize = 64;
const SERIES_TOL: f64 = 1e-12;

/// The six leading terms of the de Bruijn expansion of `ln B(p) / p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionValue {
    pub p: f64,
    /// `[ln p, −ln ln p, −1, ln ln p/ln p, 1/ln p, ½(ln ln p/ln p)²]`.
    pub partial_terms: [f64; 6],
    pub total: f64,
}

/// `ln p − ln ln p − 1 + ln ln p/ln p + 1/ln p + ½(ln ln p/ln p)²`, for `p > e`.
pub fn debruijn_expansion(p: f64) -> Result<ExpansionValue> {
    if !(p > std::f64::consts::E) || !p.is_finite() {
        return Err(BellError::domain(format!(
            "de Bruijn expansion needs p > e, got {p}"
        )));
    }
    let lp = p.ln();
    let llp = lp.ln();
    let partial_terms = [lp, -llp, -1.0, llp / lp, 1.0 / lp, 0.5 * (llp / lp).powi(2)];
    Ok(ExpansionValue {
        p,
        partial_terms,
        total: partial_terms.iter().sum(),
    })
}

/// `|ln B(p)/p − expansion(p)|` against the series at `β = 1`.
pub fn debruijn_residual(p: f64) -> Result<f64> {
    let expansion = debruijn_expansion(p)?;
    let series = bell_dobinski(&BellQuery::new(p, 1.0)?, SERIES_TOL)?;
    Ok((series.log_value / p - expansion.total).abs())
}

/// The residual scaled by its expected order: `R(p) · ln²p / ln ln p`.
pub fn debruijn_normalized_residual(p: f64) -> Result<f64> {
    let lp = p.ln();
    Ok(debruijn_residual(p)? * lp * lp / lp.ln())
}

/// Principal branch of the Lambert W function on `x ≥ 0`, by Halley
/// iteration.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(BellError::domain(format!(
            "lambert_w is implemented for finite x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x < 0.25 { x * (1.0 - x) } else { x.ln_1p() };
    for _ in 0..LAMBERT_MAX_ITERS {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= 1e-15 * x.max(1.0) {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-16 * w.abs().max(1e-300) {
            return Ok(w);
        }
    }
    let residual = (w * w.exp() - x).abs();
    if residual <= 1e-12 * x.max(1.0) {
        Ok(w)
    } else {
        Err(BellError::NonConvergence(format!(
            "lambert_w({x}): residual {residual:e} after {LAMBERT_MAX_ITERS} iterations"
        )))
    }
}

/// A Lambert-W approximation of `B(p)`, with its measured ratio to the series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambertApprox {
    pub p: f64,
    pub w: f64,
    pub ln_value: f64,
    /// `approximation / B(p)` when the series is in range.
    pub series_ratio: Option<f64>,
}

impl LambertApprox {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

fn lambert_approx(p: f64, exponent: impl Fn(f64) -> f64) -> Result<LambertApprox> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(BellError::domain(format!(
            "Lambert approximation needs p >= 2, got {p}"
        )));
    }
    let w = lambert_w(p)?;
    let pw = p / w;
    let ln_value = -0.5 * p.ln() + exponent(p) * pw.ln() + pw - p - 1.0;
    let series_ratio = if p <= DEFAULT_P_MAX {
        let series = bell_dobinski(&BellQuery::new(p, 1.0)?, SERIES_TOL)?;
        Some((ln_value - series.log_value).exp())
    } else {
        None
    };
    Ok(LambertApprox {
        p,
        w,
        ln_value,
        series_ratio,
    })
}

/// `(1/√p) · (p/W(p)) · exp(p/W(p) − p − 1)`, exactly as printed.
pub fn bell_lambert_approx(p: f64) -> Result<LambertApprox> {
    lambert_approx(p, |_| 1.0)
}

/// `(1/√p) · (p/W(p))^{p + 1/2} · exp(p/W(p) − p − 1)`, the classical form.
pub fn bell_lambert_approx_corrected(p: f64) -> Result<LambertApprox> {
    lambert_approx(p, |p| p + 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn expansion_at_e_to_the_e() {
        let v = debruijn_expansion(E.powf(E)).unwrap();
        let expected = E - 2.0 + 2.0 / E + 1.0 / (2.0 * E * E);
        assert!((v.total - expected).abs() < 1e-12);
        assert!((v.total - 1.52171).abs() < 1e-5);
        assert_eq!(v.total, v.partial_terms.iter().sum::<f64>());
    }

    #[test]
    fn expansion_domain_edge() {
        assert!(debruijn_expansion(E).is_err());
        assert!(debruijn_expansion(2.0).is_err());
    }

    #[test]
    fn expansion_at_100() {
        let v = debruijn_expansion(100.0).unwrap();
        let (lp, llp) = (100f64.ln(), 100f64.ln().ln());
        let direct = lp - llp - 1.0 + llp / lp + 1.0 / lp + 0.5 * (llp / lp).powi(2);
        assert!((v.total - direct).abs() < 1e-14);
        assert!((v.total - 2.681_747_498).abs() < 1e-8, "{}", v.total);
        // Leading term dominates above e^e.
        for t in &v.partial_terms[1..] {
            assert!(t.abs() < v.partial_terms[0]);
        }
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w(2.0).unwrap() - 0.852_605_502_013_725_5).abs() < 1e-15);
        assert!(lambert_w(-0.1).is_err());
    }

    #[test]
    fn lambert_approximations_measured() {
        let a = bell_lambert_approx(10.0).unwrap();
        let ratio = a.series_ratio.unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
        // The classical form overshoots by a factor that shrinks slowly with p.
        let ratios: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&p| {
                bell_lambert_approx_corrected(p)
                    .unwrap()
                    .series_ratio
                    .unwrap()
            })
            .collect();
        assert!((ratios[0] - 1.277_04).abs() < 1e-4, "{ratios:?}");
        assert!(
            ratios.windows(2).all(|w| w[1] < w[0] && w[1] > 1.0),
            "{ratios:?}"
        );
        // The printed form is off by (p/W)^{p - 1/2} and collapses.
        assert!(ratio < 1e-6);
        assert!(bell_lambert_approx(1.5).is_err());
    }
}
