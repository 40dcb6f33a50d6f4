//! Classical baselines: Clopper-Pearson, Wald and Wilson intervals for the
//! binomial case, the chi-square score region for general `d`, and numerical
//! checks of the Beta-Binomial and Dirichlet-Multinomial correspondences.

pub mod special;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::Rng;

use crate::error::{check_alpha, Error, Result};
use crate::math;
use crate::simplex::{
    enumerate_simplex, log_pmf_raw, LogFactorialTable, OutcomeVector, ProbabilityVector,
};

pub use special::{
    beta_quantile, chi2_cdf, chi2_quantile, chi2_survival, normal_cdf, normal_quantile,
    regularized_incomplete_beta, regularized_lower_gamma, regularized_upper_gamma,
    SpecialFunctionConfig,
};

/// A closed interval `[lower, upper]` inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::InvalidArgument(format!(
                "interval [{lower}, {upper}] is reversed"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lower <= t && t <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// An interval together with a flag raised when the method degenerates
/// because the observation sits on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlaggedInterval {
    pub interval: Interval,
    pub boundary: bool,
}

fn check_binomial(x1: u32, n: u32) -> Result<()> {
    if x1 > n {
        return Err(Error::InvalidCounts(format!("x1 = {x1} exceeds n = {n}")));
    }
    Ok(())
}

/// `ln C(n, i) + i ln t + (n - i) ln(1 - t)` with `0^0 = 1`.
fn binomial_log_term(n: u32, i: u32, t: f64) -> f64 {
    let ln_choose = math::ln_gamma(f64::from(n) + 1.0)
        - math::ln_gamma(f64::from(i) + 1.0)
        - math::ln_gamma(f64::from(n - i) + 1.0);
    let a = if i == 0 {
        0.0
    } else {
        f64::from(i) * math::ln(t)
    };
    let b = if i == n {
        0.0
    } else {
        f64::from(n - i) * math::ln1p(-t)
    };
    ln_choose + a + b
}

/// `P(X >= k)` for `X ~ Binomial(n, t)`.
pub fn binomial_upper_tail(k: u32, n: u32, t: f64) -> f64 {
    (k..=n)
        .map(|i| math::exp(binomial_log_term(n, i, t)))
        .sum::<f64>()
        .min(1.0)
}

/// `P(X <= k)` for `X ~ Binomial(n, t)`.
pub fn binomial_lower_tail(k: u32, n: u32, t: f64) -> f64 {
    (0..=k.min(n))
        .map(|i| math::exp(binomial_log_term(n, i, t)))
        .sum::<f64>()
        .min(1.0)
}

/// Two-sided exact interval for `p_1`, found by bisection on the exact
/// binomial tails. Endpoints are rounded outward to the bracket edge.
pub fn clopper_pearson_interval(x1: u32, n: u32, alpha: f64) -> Result<Interval> {
    clopper_pearson_interval_with(x1, n, alpha, &SpecialFunctionConfig::default())
}

pub fn clopper_pearson_interval_with(
    x1: u32,
    n: u32,
    alpha: f64,
    cfg: &SpecialFunctionConfig,
) -> Result<Interval> {
    check_binomial(x1, n)?;
    check_alpha(alpha)?;
    cfg.validate()?;
    let half = 0.5 * alpha;
    let lower = if x1 == 0 {
        0.0
    } else {
        special::bisect(0.0, 1.0, cfg, "Clopper-Pearson lower bisection", |t| {
            Ok(binomial_upper_tail(x1, n, t) >= half)
        })?
        .0
    };
    let upper = if x1 == n {
        1.0
    } else {
        special::bisect(0.0, 1.0, cfg, "Clopper-Pearson upper bisection", |t| {
            Ok(binomial_lower_tail(x1, n, t) < half)
        })?
        .1
    };
    Interval::new(lower, upper)
}

/// The same interval read off Beta quantiles: `Beta(x1, n - x1 + 1)` at
/// `alpha / 2` and `Beta(x1 + 1, n - x1)` at `1 - alpha / 2`.
pub fn clopper_pearson_interval_beta(
    x1: u32,
    n: u32,
    alpha: f64,
    cfg: &SpecialFunctionConfig,
) -> Result<Interval> {
    check_binomial(x1, n)?;
    check_alpha(alpha)?;
    let lower = if x1 == 0 {
        0.0
    } else {
        beta_quantile(f64::from(x1), f64::from(n - x1 + 1), 0.5 * alpha, cfg)?
    };
    let upper = if x1 == n {
        1.0
    } else {
        beta_quantile(f64::from(x1 + 1), f64::from(n - x1), 1.0 - 0.5 * alpha, cfg)?
    };
    Interval::new(lower, upper)
}

/// `|P(X >= k) - P(B <= p1)|` with `X ~ Binomial(n, p1)` and
/// `B ~ Beta(k, n - k + 1)`.
pub fn beta_binomial_identity_check(n: u32, k: u32, p1: f64) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::InvalidArgument(format!("p1 = {p1} outside [0, 1]")));
    }
    let tail = binomial_upper_tail(k, n, p1);
    let cdf = regularized_incomplete_beta(
        f64::from(k),
        f64::from(n - k + 1),
        p1,
        &SpecialFunctionConfig::default(),
    )?;
    Ok((tail - cdf).abs())
}

fn z_value(alpha: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    normal_quantile(1.0 - 0.5 * alpha, cfg)
}

fn wilson_lower(x1: u32, n: u32, z: f64) -> f64 {
    if x1 == 0 {
        return 0.0;
    }
    let nf = f64::from(n);
    let p = f64::from(x1) / nf;
    let z2 = z * z;
    let center = p + z2 / (2.0 * nf);
    let radius = z * math::sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf));
    ((center - radius) / (1.0 + z2 / nf)).max(0.0)
}

/// Wilson score interval. The upper endpoint is the reflection of the lower
/// endpoint of `n - x1`, so the construction is symmetric in the labels.
pub fn wilson_interval(x1: u32, n: u32, alpha: f64) -> Result<Interval> {
    check_binomial(x1, n)?;
    check_alpha(alpha)?;
    if n == 0 {
        return Interval::new(0.0, 1.0);
    }
    let z = z_value(alpha, &SpecialFunctionConfig::default())?;
    Interval::new(wilson_lower(x1, n, z), 1.0 - wilson_lower(n - x1, n, z))
}

fn wald_lower(x1: u32, n: u32, z: f64) -> f64 {
    let nf = f64::from(n);
    let p = f64::from(x1) / nf;
    (p - z * math::sqrt(p * (1.0 - p) / nf)).max(0.0)
}

/// Normal-approximation interval, clamped to `[0, 1]`. At `x1 = 0` or
/// `x1 = n` it collapses to a point and `boundary` is set.
pub fn wald_interval(x1: u32, n: u32, alpha: f64) -> Result<FlaggedInterval> {
    check_binomial(x1, n)?;
    check_alpha(alpha)?;
    if n == 0 {
        return Ok(FlaggedInterval {
            interval: Interval::new(0.0, 1.0)?,
            boundary: true,
        });
    }
    let z = z_value(alpha, &SpecialFunctionConfig::default())?;
    let interval = Interval::new(wald_lower(x1, n, z), 1.0 - wald_lower(n - x1, n, z))?;
    Ok(FlaggedInterval {
        interval,
        boundary: x1 == 0 || x1 == n,
    })
}

/// Pearson goodness-of-fit statistic `sum (x_i - n t_i)^2 / (n t_i)`.
///
/// A coordinate with `t_i = 0` contributes its limit: nothing when `x_i = 0`,
/// infinity otherwise. Terms are summed in sorted order so the value is
/// invariant under relabeling the categories.
pub fn pearson_statistic(theta: &ProbabilityVector, x: &OutcomeVector) -> Result<f64> {
    if theta.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            found: x.dim(),
        });
    }
    let mut terms = vec![0.0; x.dim()];
    pearson_terms(theta.entries(), x.counts(), f64::from(x.n()), &mut terms);
    Ok(math::canonical_sum(&mut terms))
}

fn pearson_terms(theta: &[f64], counts: &[u32], n: f64, out: &mut [f64]) {
    for ((o, &t), &c) in out.iter_mut().zip(theta).zip(counts) {
        let expected = n * t;
        *o = if expected > 0.0 {
            let diff = f64::from(c) - expected;
            diff * diff / expected
        } else if c == 0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
}

/// The chi-square score region `{t : statistic(t, x) <= chi2_{d-1}(1 - alpha)}`
/// traced on the simplex.
#[derive(Debug, Clone)]
pub struct ScoreRegion {
    observed: OutcomeVector,
    alpha: f64,
    critical: f64,
}

impl ScoreRegion {
    pub fn new(x: &OutcomeVector, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let critical = score_critical_value(x.dim(), alpha)?;
        Ok(Self {
            observed: x.clone(),
            alpha,
            critical,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn critical_value(&self) -> f64 {
        self.critical
    }

    pub fn observed(&self) -> &OutcomeVector {
        &self.observed
    }

    pub fn contains(&self, theta: &ProbabilityVector) -> Result<bool> {
        if self.observed.n() == 0 {
            return Ok(true);
        }
        Ok(pearson_statistic(theta, &self.observed)? <= self.critical)
    }
}

pub(crate) fn score_critical_value(d: usize, alpha: f64) -> Result<f64> {
    chi2_quantile(
        (d - 1) as u32,
        1.0 - alpha,
        &SpecialFunctionConfig::default(),
    )
}

/// Acceptance test for the score region with a precomputed critical value.
#[inline]
pub(crate) fn score_accepts(
    theta: &[f64],
    counts: &[u32],
    n: u32,
    critical: f64,
    scratch: &mut [f64],
) -> bool {
    if n == 0 {
        return true;
    }
    pearson_terms(theta, counts, f64::from(n), scratch);
    math::canonical_sum(&mut scratch[..counts.len()]) <= critical
}

pub fn score_region_contains(
    theta: &ProbabilityVector,
    x: &OutcomeVector,
    alpha: f64,
) -> Result<bool> {
    ScoreRegion::new(x, alpha)?.contains(theta)
}

/// Exact and simulated sides of the Dirichlet-Multinomial correspondence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// `P(X_1 >= k_1, X_1 + X_2 >= k_2, ...)` by enumeration.
    pub exact: f64,
    /// Monte-Carlo frequency of the matching Dirichlet event.
    pub estimate: f64,
    /// Binomial standard error of `estimate` under the exact probability.
    pub standard_error: f64,
}

impl IdentityCheck {
    pub fn z_score(&self) -> f64 {
        let diff = (self.exact - self.estimate).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.standard_error
        }
    }
}

fn uniform_open(rng: &mut (impl Rng + ?Sized)) -> f64 {
    // 53 random bits, shifted into (0, 1]
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Compares `P(X_1 >= k_1, ..., X_1 + ... + X_{d-1} >= k_{d-1})` for
/// `X ~ Multinomial(n, p)` with the probability that
/// `D ~ Dirichlet(k_1 - k_0, ..., k_d - k_{d-1})` (`k_0 = 0`, `k_d = n + 1`)
/// has partial sums `D_1 + ... + D_j <= p_1 + ... + p_j` for every `j < d`.
///
/// Zero block parameters give components that are identically zero. Gamma
/// variates with integer shape are drawn as sums of exponentials.
pub fn dirichlet_multinomial_identity_check<R: Rng + ?Sized>(
    p: &ProbabilityVector,
    n: u32,
    thresholds: &[u32],
    samples: usize,
    rng: &mut R,
) -> Result<IdentityCheck> {
    let d = p.dim();
    if thresholds.len() != d - 1 {
        return Err(Error::DimensionMismatch {
            expected: d - 1,
            found: thresholds.len(),
        });
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) || thresholds.iter().any(|&k| k > n) {
        return Err(Error::InvalidArgument(
            "thresholds must be non-decreasing and at most n".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }

    let simplex = enumerate_simplex(d, n)?;
    let lf = LogFactorialTable::new(n);
    let log_p = p.log_entries();
    let mut scratch = vec![0.0; d];
    let mut exact = 0.0;
    for x in &simplex {
        let mut partial = 0u32;
        let hit = x.counts()[..d - 1].iter().zip(thresholds).all(|(&c, &k)| {
            partial += c;
            partial >= k
        });
        if hit {
            exact += math::exp(log_pmf_raw(x.counts(), &log_p, &lf, &mut scratch));
        }
    }
    let exact = exact.min(1.0);

    let mut blocks = Vec::with_capacity(d);
    let mut previous = 0u32;
    for &k in thresholds {
        blocks.push(k - previous);
        previous = k;
    }
    blocks.push(n + 1 - previous);

    let mut cumulative_p = Vec::with_capacity(d - 1);
    let mut acc = 0.0;
    for &pi in &p.entries()[..d - 1] {
        acc += pi;
        cumulative_p.push(acc);
    }

    let mut gammas = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut total = 0.0;
        for (g, &shape) in gammas.iter_mut().zip(&blocks) {
            *g = (0..shape).map(|_| -math::ln(uniform_open(rng))).sum();
            total += *g;
        }
        let mut partial = 0.0;
        let inside = gammas[..d - 1]
            .iter()
            .zip(&cumulative_p)
            .all(|(g, &bound)| {
                partial += g / total;
                partial <= bound
            });
        if inside {
            hits += 1;
        }
    }
    let estimate = hits as f64 / samples as f64;
    let standard_error = math::sqrt(exact * (1.0 - exact) / samples as f64);
    Ok(IdentityCheck {
        exact,
        estimate,
        standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn ov(v: &[u32]) -> OutcomeVector {
        OutcomeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn clopper_pearson_examples() {
        assert_eq!(clopper_pearson_interval(0, 10, 0.05).unwrap().lower, 0.0);
        assert_eq!(clopper_pearson_interval(10, 10, 0.05).unwrap().upper, 1.0);
        // scipy.stats.beta.ppf(0.025, 8, 3), beta.ppf(0.975, 9, 2)
        let ci = clopper_pearson_interval(8, 10, 0.05).unwrap();
        assert!((ci.lower - 0.443_904_537_692_358_5).abs() < 1e-9, "{ci:?}");
        assert!((ci.upper - 0.974_789_273_673_166_6).abs() < 1e-9, "{ci:?}");
        assert!(clopper_pearson_interval(11, 10, 0.05).is_err());
        assert!(clopper_pearson_interval(1, 10, 1.0).is_err());
    }

    #[test]
    fn clopper_pearson_two_routes_agree() {
        let cfg = SpecialFunctionConfig::default();
        for n in 1..=30 {
            for x1 in 0..=n {
                let a = clopper_pearson_interval(x1, n, 0.05).unwrap();
                let b = clopper_pearson_interval_beta(x1, n, 0.05, &cfg).unwrap();
                assert!((a.lower - b.lower).abs() < 1e-8, "x1={x1} n={n}");
                assert!((a.upper - b.upper).abs() < 1e-8, "x1={x1} n={n}");
            }
        }
    }

    #[test]
    fn beta_quantile_matches_clopper_pearson_lower() {
        let cfg = SpecialFunctionConfig::default();
        let q = beta_quantile(8.0, 3.0, 0.025, &cfg).unwrap();
        let ci = clopper_pearson_interval(8, 10, 0.05).unwrap();
        assert!((q - ci.lower).abs() < 1e-8);
        let q = beta_quantile(9.0, 2.0, 0.975, &cfg).unwrap();
        assert!((q - ci.upper).abs() < 1e-8);
    }

    #[test]
    fn beta_binomial_examples() {
        assert_eq!(beta_binomial_identity_check(4, 1, 1.0).unwrap(), 0.0);
        assert!(beta_binomial_identity_check(10, 5, 0.5).unwrap() < 1e-10);
        assert!(beta_binomial_identity_check(30, 17, 0.3).unwrap() < 1e-10);
        assert!(beta_binomial_identity_check(5, 0, 0.3).is_err());
        assert!(beta_binomial_identity_check(5, 6, 0.3).is_err());
    }

    #[test]
    fn wilson_examples() {
        let ci = wilson_interval(5, 10, 0.05).unwrap();
        assert!((ci.lower - 0.236_593_090_512_564).abs() < 1e-8);
        assert!((ci.upper - 0.763_406_909_487_436_1).abs() < 1e-8);
        assert!((ci.lower - (1.0 - ci.upper)).abs() < 1e-15);
        assert_eq!(wilson_interval(0, 10, 0.05).unwrap().lower, 0.0);
        assert_eq!(wilson_interval(10, 10, 0.05).unwrap().upper, 1.0);
    }

    #[test]
    fn wald_examples() {
        let w = wald_interval(0, 10, 0.05).unwrap();
        assert!(w.boundary);
        assert_eq!(
            w.interval,
            Interval {
                lower: 0.0,
                upper: 0.0
            }
        );
        let w = wald_interval(5, 10, 0.05).unwrap();
        assert!(!w.boundary);
        assert!((w.interval.lower - 0.190_102_483_847_719_2).abs() < 1e-8);
        assert!((w.interval.upper - 0.809_897_516_152_280_8).abs() < 1e-8);
        let w = wald_interval(8, 10, 0.05).unwrap();
        assert!((w.interval.lower - 0.552_081_987_078_175_5).abs() < 1e-8);
        assert_eq!(w.interval.upper, 1.0);
    }

    #[test]
    fn score_region_examples() {
        let x = ov(&[3, 5, 2]);
        let mle = ProbabilityVector::from_counts(&x).unwrap();
        assert!(score_region_contains(&mle, &x, 0.05).unwrap());

        // statistic = (196 + 16 + 100) / 30 = 10.4
        let x = ov(&[8, 2, 0]);
        let third = pv(&[1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0]);
        let stat = pearson_statistic(&third, &x).unwrap();
        assert!((stat - 10.4).abs() < 1e-12, "{stat}");
        let region = ScoreRegion::new(&x, 0.05).unwrap();
        assert!((region.critical_value() - 5.991_464_547_107_979).abs() < 1e-8);
        assert!(!region.contains(&third).unwrap());
    }

    #[test]
    fn score_region_boundary_convention() {
        let x = ov(&[8, 2, 0]);
        let region = ScoreRegion::new(&x, 0.05).unwrap();
        assert!(region.contains(&pv(&[0.8, 0.2, 0.0])).unwrap());
        assert!(!region.contains(&pv(&[1.0, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn dirichlet_trivial_thresholds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = pv(&[0.3, 0.4, 0.3]);
        let check = dirichlet_multinomial_identity_check(&p, 6, &[0, 0], 1000, &mut rng).unwrap();
        assert!((check.exact - 1.0).abs() < 1e-12);
        assert_eq!(check.estimate, 1.0);
    }

    #[test]
    fn dirichlet_binomial_case_matches_incomplete_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = pv(&[0.35, 0.65]);
        let check = dirichlet_multinomial_identity_check(&p, 7, &[3], 10, &mut rng).unwrap();
        let cfg = SpecialFunctionConfig::default();
        let beta = regularized_incomplete_beta(3.0, 5.0, 0.35, &cfg).unwrap();
        assert!((check.exact - beta).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_trinomial_within_four_standard_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = pv(&[0.3, 0.4, 0.3]);
        let check =
            dirichlet_multinomial_identity_check(&p, 6, &[2, 4], 200_000, &mut rng).unwrap();
        assert!(check.z_score() < 4.0, "{check:?}");
    }

    #[test]
    fn dirichlet_rejects_bad_thresholds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = pv(&[0.3, 0.4, 0.3]);
        assert!(dirichlet_multinomial_identity_check(&p, 6, &[4, 2], 10, &mut rng).is_err());
        assert!(dirichlet_multinomial_identity_check(&p, 6, &[2], 10, &mut rng).is_err());
        assert!(dirichlet_multinomial_identity_check(&p, 6, &[2, 7], 10, &mut rng).is_err());
    }
}
