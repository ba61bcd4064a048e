//! Moment inequalities for sums of non-negative independent variables, with
//! enumeration and Monte Carlo oracles for `E(Σ η_j)^p`.

use std::fmt;
use std::str::FromStr;

use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BellError, Result};
use crate::series::{bell_dobinski, BellQuery};

/// Most atoms a [`DiscreteDist`] may carry.
pub const MAX_ATOMS: usize = 8;

/// Most outcome tuples [`exact_sum_moment`] will visit.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

/// Relative slack for inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-9;

const SERIES_TOL: f64 = 1e-13;
const MC_CHUNK: usize = 4096;

/// A finitely supported distribution on `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDist {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDist {
    /// Builds a distribution from `(value, probability)` pairs.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() > MAX_ATOMS {
            return Err(BellError::domain(format!(
                "a distribution needs 1..={MAX_ATOMS} atoms, got {}",
                atoms.len()
            )));
        }
        for &(v, pr) in &atoms {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(BellError::domain(format!(
                    "atom value must be >= 0, got {v}"
                )));
            }
            if !(pr > 0.0 && pr <= 1.0) {
                return Err(BellError::domain(format!(
                    "atom probability must lie in (0, 1], got {pr}"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(BellError::domain(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(DiscreteDist { atoms })
    }

    /// Point mass at `value`.
    pub fn point(value: f64) -> Result<Self> {
        Self::new(vec![(value, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `E η^p`.
    pub fn moment(&self, p: f64) -> f64 {
        self.atoms.iter().map(|&(v, pr)| pr * v.powf(p)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }

    /// Multiplies every atom value by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        DiscreteDist {
            atoms: self.atoms.iter().map(|&(v, pr)| (v * c, pr)).collect(),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(v, pr) in &self.atoms {
            acc += pr;
            if u < acc {
                return v;
            }
        }
        self.atoms.last().expect("non-empty").0
    }
}

/// Parses `v1:p1,v2:p2,...`.
impl FromStr for DiscreteDist {
    type Err = BellError;

    fn from_str(s: &str) -> Result<Self> {
        let atoms = s
            .split(',')
            .map(|pair| {
                let (v, pr) = pair.trim().split_once(':').ok_or_else(|| {
                    BellError::Parse(format!("expected value:prob, got {pair:?}"))
                })?;
                let v = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| BellError::Parse(format!("bad value {v:?}: {e}")))?;
                let pr = pr
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| BellError::Parse(format!("bad probability {pr:?}: {e}")))?;
                Ok((v, pr))
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteDist::new(atoms)
    }
}

impl fmt::Display for DiscreteDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, pr)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}:{pr}")?;
        }
        Ok(())
    }
}

/// Reads an instance file: one distribution per line, `#` comments and blank
/// lines ignored.
pub fn parse_instances(text: &str) -> Result<Vec<DiscreteDist>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            l.parse::<DiscreteDist>()
                .map_err(|e| BellError::Parse(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// Schechtman's class parameters: `Σ E η_j = a`, `Σ E η_j^p = b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalProblem {
    a: f64,
    b: f64,
    p: f64,
}

impl ExtremalProblem {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(BellError::domain(format!(
                "a and b must be finite and > 0, got a = {a}, b = {b}"
            )));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(BellError::domain(format!("p must be > 1, got {p}")));
        }
        Ok(ExtremalProblem { a, b, p })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `μ = a^{p/(p−1)} b^{1/(1−p)}`.
    pub fn mu(&self) -> f64 {
        self.ln_mu().exp()
    }

    fn ln_mu(&self) -> f64 {
        let p = self.p;
        (p * self.a.ln() - self.b.ln()) / (p - 1.0)
    }
}

/// `(b/a)^{p/(p−1)} · B(p, μ)`, the supremum of `E(Σ η_j)^p` over the class.
pub fn schechtman_extremal(prob: &ExtremalProblem) -> Result<f64> {
    let p = prob.p;
    let mu = prob.mu();
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(BellError::Overflow(format!("mu = {mu} is out of range")));
    }
    let series = bell_dobinski(&BellQuery::new(p, mu)?, SERIES_TOL)?;
    let ln_value = p / (p - 1.0) * (prob.b.ln() - prob.a.ln()) + series.log_value;
    let value = ln_value.exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(BellError::Overflow(format!(
            "extremal value exp({ln_value}) overflows f64"
        )))
    }
}

/// `B(p) · max{Σ E η^p, (Σ E η)^p}`, with `B(p) = B(p, 1)` unless `β` is
/// overridden.
pub fn rosenthal_bound(
    p: f64,
    sum_p_moments: f64,
    sum_means: f64,
    beta_override: Option<f64>,
) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(BellError::domain(format!("p must be >= 2, got {p}")));
    }
    for (name, v) in [
        ("sum of p-th moments", sum_p_moments),
        ("sum of means", sum_means),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(BellError::domain(format!(
                "{name} must be finite and > 0, got {v}"
            )));
        }
    }
    let beta = beta_override.unwrap_or(1.0);
    let series = bell_dobinski(&BellQuery::new(p, beta)?, SERIES_TOL)?;
    Ok(series.value() * sum_p_moments.max(sum_means.powf(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumMomentMethod {
    Enumeration,
    MonteCarlo,
}

/// An estimate of `E(Σ η_j)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumMomentResult {
    pub value: f64,
    pub method: SumMomentMethod,
    pub stderr: Option<f64>,
    pub n: usize,
}

/// Exact `E(Σ η_j)^p` by enumerating every outcome tuple.
pub fn exact_sum_moment(dists: &[DiscreteDist], p: f64) -> Result<SumMomentResult> {
    exact_sum_moment_with_budget(dists, p, ENUMERATION_BUDGET)
}

pub fn exact_sum_moment_with_budget(
    dists: &[DiscreteDist],
    p: f64,
    budget: u128,
) -> Result<SumMomentResult> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(BellError::domain(format!("p must be > 0, got {p}")));
    }
    if dists.is_empty() {
        return Err(BellError::domain("need at least one summand"));
    }
    let size = dists
        .iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d.atoms.len() as u128))
        .unwrap_or(u128::MAX);
    if size > budget {
        return Err(BellError::BudgetExceeded { size, budget });
    }

    fn walk(dists: &[DiscreteDist], p: f64, partial: f64, prob: f64, acc: &mut f64) {
        match dists.split_first() {
            None => *acc += prob * partial.powf(p),
            Some((head, rest)) => {
                for &(v, pr) in &head.atoms {
                    walk(rest, p, partial + v, prob * pr, acc);
                }
            }
        }
    }

    let mut value = 0.0;
    walk(dists, p, 0.0, 1.0, &mut value);
    Ok(SumMomentResult {
        value,
        method: SumMomentMethod::Enumeration,
        stderr: None,
        n: dists.len(),
    })
}

/// A summand for Monte Carlo sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Summand {
    Discrete(DiscreteDist),
    Poisson(f64),
}

/// Seeded Monte Carlo estimate of `E(Σ η_j)^p`. Samples are drawn in fixed
/// chunks, each from its own ChaCha stream, so the result does not depend on
/// thread scheduling.
pub fn mc_sum_moment(
    summands: &[Summand],
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<SumMomentResult> {
    if samples < 10_000 {
        return Err(BellError::domain(format!(
            "Monte Carlo needs at least 10000 samples, got {samples}"
        )));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(BellError::domain(format!("p must be > 0, got {p}")));
    }
    if summands.is_empty() {
        return Err(BellError::domain("need at least one summand"));
    }
    let poissons = summands
        .iter()
        .map(|s| match s {
            Summand::Poisson(beta) => Poisson::new(*beta)
                .map(Some)
                .map_err(|e| BellError::domain(format!("Poisson({beta}): {e}"))),
            Summand::Discrete(_) => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;

    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let total: f64 = summands
                    .iter()
                    .zip(&poissons)
                    .map(|(s, pois)| match (s, pois) {
                        (Summand::Discrete(d), _) => d.sample(&mut rng),
                        (Summand::Poisson(_), Some(dist)) => dist.sample(&mut rng),
                        (Summand::Poisson(_), None) => unreachable!(),
                    })
                    .sum();
                let x = total.powf(p);
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(SumMomentResult {
        value: mean,
        method: SumMomentMethod::MonteCarlo,
        stderr: Some((var / n).sqrt().max(f64::MIN_POSITIVE)),
        n: summands.len(),
    })
}

/// Both inequalities evaluated on one family at one `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyCheck {
    pub p: f64,
    pub exact: f64,
    pub sum_means: f64,
    pub sum_p_moments: f64,
    pub rosenthal: f64,
    pub schechtman: f64,
}

impl FamilyCheck {
    pub fn rosenthal_holds(&self) -> bool {
        self.exact <= self.rosenthal * (1.0 + INEQUALITY_SLACK)
    }

    pub fn schechtman_holds(&self) -> bool {
        self.exact <= self.schechtman * (1.0 + INEQUALITY_SLACK)
    }
}

/// Exact moment and both upper bounds for a family of summands.
pub fn check_family(dists: &[DiscreteDist], p: f64) -> Result<FamilyCheck> {
    let exact = exact_sum_moment(dists, p)?.value;
    let sum_means: f64 = dists.iter().map(DiscreteDist::mean).sum();
    let sum_p_moments: f64 = dists.iter().map(|d| d.moment(p)).sum();
    let rosenthal = rosenthal_bound(p, sum_p_moments, sum_means, None)?;
    let schechtman = schechtman_extremal(&ExtremalProblem::new(sum_means, sum_p_moments, p)?)?;
    Ok(FamilyCheck {
        p,
        exact,
        sum_means,
        sum_p_moments,
        rosenthal,
        schechtman,
    })
}

/// Parameters of a randomized inequality check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub p_set: Vec<f64>,
    pub n_max: usize,
    /// Largest outcome-tuple count per generated family.
    pub trial_budget: u128,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 1000,
            seed: 7,
            p_set: vec![2.0, 3.0, 4.0],
            n_max: 12,
            trial_budget: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub check: FamilyCheck,
}

/// Outcome of [`verify_inequalities`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub trials: usize,
    pub checks: usize,
    pub rosenthal_violations: Vec<Violation>,
    pub schechtman_violations: Vec<Violation>,
    /// Largest `exact / bound` seen for each inequality.
    pub max_ratio_rosenthal: f64,
    pub max_ratio_schechtman: f64,
    pub errors: Vec<String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.rosenthal_violations.is_empty()
            && self.schechtman_violations.is_empty()
            && self.errors.is_empty()
    }
}

/// A random family: `n` summands with 2–4 atoms, log-uniform values in
/// `[1e-2, 1e2]` and symmetric-Dirichlet probabilities, with atom counts
/// trimmed to keep the outcome count within `budget`.
pub fn random_family<R: Rng>(rng: &mut R, n_max: usize, budget: u128) -> Vec<DiscreteDist> {
    let n = rng.random_range(1..=n_max.max(1));
    let unit: Gamma<f64> = Gamma::new(1.0, 1.0).expect("valid gamma parameters");
    let (lo, hi) = (1e-2f64.ln(), 1e2f64.ln());
    let mut remaining = budget;
    (0..n)
        .map(|j| {
            // Leave room for two atoms in every later summand.
            let reserve = 1u128 << (n - j - 1).min(100);
            let cap = (remaining / reserve).clamp(2, 4) as usize;
            let atoms = rng.random_range(2..=4).min(cap);
            remaining /= atoms as u128;
            let weights: Vec<f64> = (0..atoms).map(|_| unit.sample(rng).max(1e-300)).collect();
            let total: f64 = weights.iter().sum();
            let mut pairs: Vec<(f64, f64)> = weights
                .iter()
                .map(|w| (rng.random_range(lo..hi).exp(), w / total))
                .collect();
            // Absorb rounding so the probabilities sum to one.
            let drift: f64 = 1.0 - pairs.iter().map(|a| a.1).sum::<f64>();
            let last = pairs.len() - 1;
            pairs[last].1 += drift;
            if pairs[last].1 <= 0.0 {
                pairs[last].1 = f64::MIN_POSITIVE;
            }
            DiscreteDist { atoms: pairs }
        })
        .collect()
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Checks both inequalities on `trials` random families at every `p` of the
/// configured set.
pub fn verify_inequalities(cfg: &VerifyConfig) -> InequalityReport {
    let per_trial: Vec<Vec<Result<FamilyCheck>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial as u64);
            let family = random_family(&mut rng, cfg.n_max, cfg.trial_budget);
            cfg.p_set
                .iter()
                .map(|&p| check_family(&family, p))
                .collect()
        })
        .collect();

    let mut report = InequalityReport {
        trials: cfg.trials,
        checks: 0,
        rosenthal_violations: Vec::new(),
        schechtman_violations: Vec::new(),
        max_ratio_rosenthal: 0.0,
        max_ratio_schechtman: 0.0,
        errors: Vec::new(),
    };
    for (trial, results) in per_trial.into_iter().enumerate() {
        for result in results {
            match result {
                Ok(check) => {
                    report.checks += 1;
                    report.max_ratio_rosenthal = report
                        .max_ratio_rosenthal
                        .max(check.exact / check.rosenthal);
                    report.max_ratio_schechtman = report
                        .max_ratio_schechtman
                        .max(check.exact / check.schechtman);
                    if !check.rosenthal_holds() {
                        report.rosenthal_violations.push(Violation { trial, check });
                    }
                    if !check.schechtman_holds() {
                        report
                            .schechtman_violations
                            .push(Violation { trial, check });
                    }
                }
                Err(e) => report.errors.push(format!("trial {trial}: {e}")),
            }
        }
    }
    report
}

/// How close an i.i.d. two-point family gets to the extremal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightnessDiagnostic {
    pub n: usize,
    pub p: f64,
    pub exact: f64,
    pub extremal: f64,
    pub ratio: f64,
}

/// `n` i.i.d. copies of `{0 w.p. 1 − rate/n, 1 w.p. rate/n}`: the sum tends to
/// Poisson(rate), the extremal configuration, as `n` grows.
pub fn extremal_tightness(n: usize, rate: f64, p: f64) -> Result<TightnessDiagnostic> {
    if n == 0 || !(rate > 0.0) || rate >= n as f64 {
        return Err(BellError::domain(format!(
            "need n >= 1 and 0 < rate < n, got n = {n}, rate = {rate}"
        )));
    }
    let q = rate / n as f64;
    let atom = DiscreteDist::new(vec![(0.0, 1.0 - q), (1.0, q)])?;
    let family = vec![atom; n];
    let check = check_family(&family, p)?;
    Ok(TightnessDiagnostic {
        n,
        p,
        exact: check.exact,
        extremal: check.schechtman,
        ratio: check.exact / check.schechtman,
    })
}
