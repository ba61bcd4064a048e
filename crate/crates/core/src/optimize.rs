//! Derivative-free scalar minimization on unimodal objectives.

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GROWTH_STEPS: usize = 200;
const MAX_GOLDEN_ITERS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Minimum {
    pub x: f64,
    pub fx: f64,
    /// The minimizer was pinned to one end of the admissible interval.
    pub at_boundary: bool,
}

/// Minimizes a unimodal `f` over `[lo, hi]`, bracketing outward from `seed`
/// by factors of `growth` before golden-section refinement to relative
/// width `rel_tol`.
pub(crate) fn minimize_unimodal<F>(
    f: F,
    seed: f64,
    lo: f64,
    hi: f64,
    growth: f64,
    rel_tol: f64,
) -> Minimum
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo < hi && growth > 1.0);
    let seed = seed.clamp(lo, hi);
    let f_seed = f(seed);

    // Walk right while the objective keeps decreasing.
    let (mut right, mut f_right) = (seed, f_seed);
    let mut moved_right = false;
    for _ in 0..MAX_GROWTH_STEPS {
        let x = (right * growth).min(hi);
        if x <= right {
            break;
        }
        let fx = f(x);
        if fx < f_right {
            moved_right = true;
            right = x;
            f_right = fx;
        } else {
            right = x;
            break;
        }
    }
    let mut left = seed;
    if moved_right {
        // The minimum lies beyond the last point that was still an improvement.
        left = (right / growth / growth).max(lo);
    } else {
        let mut f_left = f_seed;
        for _ in 0..MAX_GROWTH_STEPS {
            let x = (left / growth).max(lo);
            if x >= left {
                break;
            }
            let fx = f(x);
            if fx < f_left {
                left = x;
                f_left = fx;
            } else {
                left = x;
                break;
            }
        }
    }

    let best = golden_section(&f, left, right, rel_tol);
    let near = |end: f64| (best.x - end).abs() <= (8.0 * rel_tol).max(1e-9) * end.abs();
    let at_boundary = near(lo) || near(hi);
    Minimum {
        at_boundary,
        ..best
    }
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
pub(crate) fn golden_section<F>(f: &F, mut a: f64, mut b: f64, rel_tol: f64) -> Minimum
where
    F: Fn(f64) -> f64,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..MAX_GOLDEN_ITERS {
        if (b - a) <= rel_tol * 0.5 * (a.abs() + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    // The interval ends are candidates too when the minimum sits on them.
    let (fa, fb) = (f(a), f(b));
    let (x, fx) = if fa < fx { (a, fa) } else { (x, fx) };
    let (x, fx) = if fb < fx { (b, fb) } else { (x, fx) };
    Minimum {
        x,
        fx,
        at_boundary: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_quadratic_minimum() {
        let m = minimize_unimodal(|x| (x - 3.7).powi(2) + 1.0, 0.1, 1e-9, 1e6, 2.0, 1e-12);
        assert!((m.x - 3.7).abs() < 1e-6, "{m:?}");
        assert!(!m.at_boundary);
    }

    #[test]
    fn seed_right_of_minimum() {
        let m = minimize_unimodal(|x| x - x.ln(), 500.0, 1e-9, 1e6, 2.0, 1e-12);
        assert!((m.x - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn reports_boundary_minimum() {
        let m = minimize_unimodal(|x| x, 5.0, 1.0, 100.0, 2.0, 1e-12);
        assert!((m.x - 1.0).abs() < 1e-9);
        assert!(m.at_boundary);
        let m = minimize_unimodal(|x| -x, 5.0, 1.0, 100.0, 2.0, 1e-12);
        assert!((m.x - 100.0).abs() < 1e-9);
        assert!(m.at_boundary);
    }
}
