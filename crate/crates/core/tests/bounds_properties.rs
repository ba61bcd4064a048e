use bellbound_core::asymptotics::lambert_w;
use bellbound_core::bounds::{
    bound_report, k_plus, lambda0, lambda_stationarity_residual, ln_dobinski_term,
    lower_closed_form_largep, lower_h0_search, lower_h_continuous, normalized_relative_error,
    regime_lower_largebeta, regime_upper_largebeta, upper_closed_form_largep, upper_g_optimized,
    KMinusChoice, DEFAULT_OPT_TOL, SANDWICH_SLACK,
};
use bellbound_core::series::{bell_dobinski, mgf_bound_at_lambda, BellQuery, Regime};
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

fn q(p: f64, beta: f64) -> BellQuery {
    BellQuery::new(p, beta).unwrap()
}

fn series_root(query: &BellQuery) -> f64 {
    bell_dobinski(query, 1e-13).unwrap().pth_root(query.p())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `g_β(p)` without a search: the minimizer of the MGF bound solves
/// `λ e^λ = p/β`, so `λ* = W(p/β)`.
fn g_by_lambert(query: &BellQuery) -> f64 {
    let (p, beta) = (query.p(), query.beta());
    let w = lambert_w(query.ratio()).unwrap();
    ((p / (std::f64::consts::E * w)).ln() + beta * w.exp_m1() / p).exp()
}

#[test]
fn golden_section_agrees_with_lambert_minimizer() {
    for p in log_grid(1.0, 300.0, 15) {
        for beta in log_grid(0.1, 50.0, 9) {
            let query = q(p, beta);
            let g = upper_g_optimized(&query, DEFAULT_OPT_TOL).unwrap();
            let oracle = g_by_lambert(&query);
            let rel = (g.bound - oracle).abs() / oracle;
            assert!(
                rel < 1e-12,
                "p={p} beta={beta}: {} vs {oracle}, rel {rel:e}",
                g.bound
            );
            assert!(
                g.bound >= oracle * (1.0 - 1e-12),
                "p={p} beta={beta}: {} undercuts {oracle}",
                g.bound
            );
            let w = lambert_w(query.ratio()).unwrap();
            assert!((g.lambda_star - w).abs() / w < 1e-6, "p={p} beta={beta}");
        }
    }
}

#[test]
fn upper_domination_chain() {
    for p in log_grid(2.0, 200.0, 12) {
        for beta in log_grid(0.1, 50.0, 8) {
            let query = q(p, beta);
            let g = upper_g_optimized(&query, DEFAULT_OPT_TOL).unwrap().bound;
            let at_ratio = mgf_bound_at_lambda(&query, query.ratio()).unwrap();
            assert!(g <= at_ratio * (1.0 + 1e-12));
            if let Ok(l0) = lambda0(&query) {
                let at_l0 = mgf_bound_at_lambda(&query, l0).unwrap();
                assert!(g <= at_l0 * (1.0 + 1e-12));
            }
            if query.regime() == Regime::LargeP {
                let closed = upper_closed_form_largep(&query).unwrap();
                let at_l0 = mgf_bound_at_lambda(&query, lambda0(&query).unwrap()).unwrap();
                assert!(
                    (closed - at_l0).abs() / at_l0 < 1e-12,
                    "closed form equals mgf at lambda0"
                );
            }
        }
    }
}

#[test]
fn lower_domination_chain() {
    for p in log_grid(2.0, 200.0, 12) {
        for beta in log_grid(0.1, 50.0, 8) {
            let query = q(p, beta);
            let root = series_root(&query);
            let h0 = lower_h0_search(&query).unwrap().pth_root(p);
            assert!(h0 <= root * (1.0 + SANDWICH_SLACK));
            let hc = lower_h_continuous(&query, DEFAULT_OPT_TOL).unwrap().bound;
            assert!(
                hc <= root * (1.0 + SANDWICH_SLACK),
                "p={p} beta={beta}: {hc} > {root}"
            );
            if query.regime() == Regime::LargeP {
                let closed = lower_closed_form_largep(&query).unwrap();
                assert!(closed <= h0 * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn smoothed_term_never_exceeds_gamma_term() {
    // ζ(x) ≥ Γ(x + 1) for real x ≥ 1.
    for p in log_grid(1.0, 150.0, 10) {
        for beta in log_grid(0.1, 50.0, 6) {
            let query = q(p, beta);
            let c = lower_h_continuous(&query, DEFAULT_OPT_TOL).unwrap();
            let x = c.x_star;
            let gamma_term = (-beta + p * x.ln() + x * beta.ln() - ln_gamma(x + 1.0)) / p;
            assert!(c.bound.ln() <= gamma_term + 1e-12, "p={p} beta={beta}");
        }
    }
}

#[test]
fn witnesses_are_valid() {
    for p in log_grid(1.0, 300.0, 10) {
        for beta in log_grid(0.1, 50.0, 7) {
            let query = q(p, beta);
            let g = upper_g_optimized(&query, DEFAULT_OPT_TOL).unwrap();
            assert!(lambda_stationarity_residual(&query, g.lambda_star).abs() < DEFAULT_OPT_TOL);
            let h = lower_h0_search(&query).unwrap();
            let k = h.k_star;
            assert!(h.ln_bound >= ln_dobinski_term(&query, k + 1));
            if k > 1 {
                assert!(h.ln_bound >= ln_dobinski_term(&query, k - 1));
            }
        }
    }
}

#[test]
fn k_plus_identity_at_regime_boundary() {
    for &beta in &[0.5, 1.0, 3.0, 17.0] {
        let query = q(2.0 * beta, beta);
        let direct = mgf_bound_at_lambda(&query, 2.0).unwrap();
        let regime = regime_upper_largebeta(&query).unwrap();
        assert!((direct - regime).abs() / regime < 1e-12, "beta={beta}");
        assert!((regime / beta - k_plus()).abs() < 1e-12);
    }
}

#[test]
fn k_minus_is_flagged_never_violated_on_grid() {
    for p in log_grid(1.0, 100.0, 10) {
        for beta in log_grid(p / 2.0 * (1.0 + 1e-12), 50.0_f64.max(p), 5) {
            let query = q(p, beta);
            for choice in [KMinusChoice::Formula, KMinusChoice::Printed] {
                let k = regime_lower_largebeta(&query, choice).unwrap();
                assert_eq!(k.holds, Some(true), "p={p} beta={beta} {choice:?}");
            }
        }
    }
}

#[test]
fn report_sandwich_on_mixed_grid() {
    for p in log_grid(1.0, 400.0, 14) {
        for beta in log_grid(0.1, 50.0, 9) {
            let r = bound_report(&q(p, beta)).unwrap();
            assert!(r.lower.unwrap() <= r.upper.unwrap());
            assert_eq!(r.sandwich_holds(), Some(true), "{r:?}");
            assert!(!r.k_minus_violation);
        }
    }
}

#[test]
fn normalized_relative_error_is_bounded_on_dyadic_grid() {
    for &beta in &[0.5, 1.0, 4.0] {
        let values: Vec<f64> = (2..=9)
            .filter_map(|j| {
                let query = q(beta * 2f64.powi(j), beta);
                (query.p() <= 500.0)
                    .then(|| normalized_relative_error(&query, series_root(&query)))?
            })
            .collect();
        assert!(values.iter().all(|v| v.is_finite()));
        let tail = &values[values.len() - 3..];
        assert!(
            tail.windows(2).all(|w| w[1] <= w[0]),
            "beta={beta}: {values:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn g_optimized_sandwich(p in 1.0f64..200.0, beta in 0.05f64..80.0) {
        let query = q(p, beta);
        let g = upper_g_optimized(&query, DEFAULT_OPT_TOL).unwrap();
        prop_assert!(g.bound >= series_root(&query) * (1.0 - SANDWICH_SLACK));
        prop_assert!(!g.at_boundary);
    }
}
