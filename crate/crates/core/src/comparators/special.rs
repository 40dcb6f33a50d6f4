//! Regularized incomplete beta and gamma functions, and the quantiles
//! obtained by bisecting them.

use crate::error::{Error, Result};
use crate::math;

/// Tolerances for the iterative special-function routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFunctionConfig {
    /// Bracket width at which quantile bisections stop.
    pub tolerance: f64,
    /// Iteration cap for bisections.
    pub max_iterations: usize,
    /// Relative size of the last continued-fraction or series update.
    pub series_epsilon: f64,
    /// Iteration cap for continued fractions and series.
    pub series_max_terms: usize,
}

impl Default for SpecialFunctionConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
            series_epsilon: 1e-16,
            series_max_terms: 10_000,
        }
    }
}

impl SpecialFunctionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !(self.series_epsilon > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }
}

const TINY: f64 = 1e-300;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    math::ln_gamma(a) + math::ln_gamma(b) - math::ln_gamma(a + b)
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=cfg.series_max_terms {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= cfg.series_epsilon {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        routine: "incomplete beta continued fraction",
        iterations: cfg.series_max_terms,
    })
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(
    a: f64,
    b: f64,
    x: f64,
    cfg: &SpecialFunctionConfig,
) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(
            "incomplete beta needs a, b > 0".into(),
        ));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(
            "incomplete beta needs x in [0, 1]".into(),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * math::ln(x) + b * math::ln1p(-x) - ln_beta(a, b);
    let front = math::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(a, b, x, cfg)? / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(b, a, 1.0 - x, cfg)? / b)
    }
}

fn lower_gamma_series(a: f64, x: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..cfg.series_max_terms {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * cfg.series_epsilon {
            return Ok(sum * math::exp(-x + a * math::ln(x) - math::ln_gamma(a)));
        }
    }
    Err(Error::NonConvergence {
        routine: "incomplete gamma series",
        iterations: cfg.series_max_terms,
    })
}

fn upper_gamma_fraction(a: f64, x: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=cfg.series_max_terms {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= cfg.series_epsilon {
            return Ok(math::exp(-x + a * math::ln(x) - math::ln_gamma(a)) * h);
        }
    }
    Err(Error::NonConvergence {
        routine: "incomplete gamma continued fraction",
        iterations: cfg.series_max_terms,
    })
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_lower_gamma(a: f64, x: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    Ok(1.0 - regularized_upper_gamma(a, x, cfg)?)
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn regularized_upper_gamma(a: f64, x: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    if !(a > 0.0) || !(x >= 0.0) {
        return Err(Error::InvalidArgument(
            "incomplete gamma needs a > 0 and x >= 0".into(),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - lower_gamma_series(a, x, cfg)?)
    } else {
        upper_gamma_fraction(a, x, cfg)
    }
}

/// Smallest point of `[lo, hi]` (to tolerance) where the non-decreasing
/// predicate becomes true. Returns the final bracket.
pub(crate) fn bisect(
    mut lo: f64,
    mut hi: f64,
    cfg: &SpecialFunctionConfig,
    routine: &'static str,
    mut above: impl FnMut(f64) -> Result<bool>,
) -> Result<(f64, f64)> {
    for _ in 0..cfg.max_iterations {
        if hi - lo <= cfg.tolerance * hi.abs().max(1.0) {
            return Ok((lo, hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok((lo, hi));
        }
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NonConvergence {
        routine,
        iterations: cfg.max_iterations,
    })
}

/// Value `t` with `I_t(a, b) = q`.
pub fn beta_quantile(a: f64, b: f64, q: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(
            "beta quantile needs a, b > 0".into(),
        ));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(
            "beta quantile needs q in (0, 1)".into(),
        ));
    }
    let (lo, hi) = bisect(0.0, 1.0, cfg, "beta quantile bisection", |t| {
        Ok(regularized_incomplete_beta(a, b, t, cfg)? >= q)
    })?;
    Ok(0.5 * (lo + hi))
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * math::erfc(-z / core::f64::consts::SQRT_2)
}

/// Standard normal quantile by bisection on [`normal_cdf`].
pub fn normal_quantile(q: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(
            "normal quantile needs q in (0, 1)".into(),
        ));
    }
    let (lo, hi) = bisect(-40.0, 40.0, cfg, "normal quantile bisection", |z| {
        Ok(normal_cdf(z) >= q)
    })?;
    Ok(0.5 * (lo + hi))
}

/// `P(T > t)` for a chi-square variable with `df` degrees of freedom.
pub fn chi2_survival(t: f64, df: u32, cfg: &SpecialFunctionConfig) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidArgument("chi-square needs df >= 1".into()));
    }
    if t <= 0.0 {
        return Ok(1.0);
    }
    regularized_upper_gamma(0.5 * f64::from(df), 0.5 * t, cfg)
}

pub fn chi2_cdf(t: f64, df: u32, cfg: &SpecialFunctionConfig) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidArgument("chi-square needs df >= 1".into()));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    regularized_lower_gamma(0.5 * f64::from(df), 0.5 * t, cfg)
}

/// Value `t` with `P(T <= t) = q`.
pub fn chi2_quantile(df: u32, q: f64, cfg: &SpecialFunctionConfig) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(
            "chi-square quantile needs q in (0, 1)".into(),
        ));
    }
    let mut hi = f64::from(df) + 10.0;
    let mut grow = 0;
    while chi2_cdf(hi, df, cfg)? < q {
        hi *= 2.0;
        grow += 1;
        if grow > 64 {
            return Err(Error::NonConvergence {
                routine: "chi-square quantile bracket",
                iterations: grow,
            });
        }
    }
    let (lo, hi) = bisect(0.0, hi, cfg, "chi-square quantile bisection", |t| {
        Ok(chi2_cdf(t, df, cfg)? >= q)
    })?;
    Ok(0.5 * (lo + hi))
}
