//! Points of the probability simplex and of the discrete simplex of counts,
//! plus exact multinomial probabilities in log space.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Largest number of lattice points [`enumerate_simplex`] and
/// [`simplex_grid`] will materialize unless told otherwise.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// A discrete distribution on `d >= 2` categories.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    entries: Vec<f64>,
}

impl ProbabilityVector {
    /// Maximum allowed deviation of the entry sum from one.
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidProbability(format!(
                "need at least 2 categories, got {}",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability(format!(
                "entry {bad} outside [0, 1]"
            )));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidProbability(format!("entries sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// Divides non-negative weights by their sum. This is the only place
    /// where inputs get renormalized.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidProbability(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidProbability("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Self::normalized(vec![1.0; d])
    }

    /// The maximum likelihood estimate `x / n`.
    pub fn from_counts(x: &OutcomeVector) -> Result<Self> {
        if x.n() == 0 {
            return Err(Error::InvalidCounts("no trials, x / n is undefined".into()));
        }
        let n = f64::from(x.n());
        Self::new(x.counts().iter().map(|&c| f64::from(c) / n).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.dim());
        Self {
            entries: perm.iter().map(|&i| self.entries[i]).collect(),
        }
    }

    pub(crate) fn log_entries(&self) -> Vec<f64> {
        self.entries.iter().map(|&p| math::ln(p)).collect()
    }
}

/// Category counts `x` with `x_1 + ... + x_d = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeVector {
    counts: Vec<u32>,
    n: u32,
}

impl OutcomeVector {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidCounts(format!(
                "need at least 2 categories, got {}",
                counts.len()
            )));
        }
        let n = counts
            .iter()
            .try_fold(0u32, |acc, &c| acc.checked_add(c))
            .ok_or_else(|| Error::InvalidCounts("total overflows".into()))?;
        Ok(Self { counts, n })
    }

    /// Like [`OutcomeVector::new`] but also checks the total against `n`.
    pub fn with_total(counts: Vec<u32>, n: u32) -> Result<Self> {
        let x = Self::new(counts)?;
        if x.n != n {
            return Err(Error::InvalidCounts(format!(
                "counts sum to {}, expected {n}",
                x.n
            )));
        }
        Ok(x)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        debug_assert_eq!(perm.len(), self.dim());
        Self {
            counts: perm.iter().map(|&i| self.counts[i]).collect(),
            n: self.n,
        }
    }
}

/// `ln k!` for `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFactorialTable {
    values: Vec<f64>,
}

impl LogFactorialTable {
    pub fn new(n: u32) -> Self {
        let mut values = Vec::with_capacity(n as usize + 1);
        values.push(0.0);
        for k in 1..=n {
            values.push(math::ln_gamma(f64::from(k) + 1.0));
        }
        // lgamma(2) may come back as a tiny nonzero
        if values.len() > 1 {
            values[1] = 0.0;
        }
        Self { values }
    }

    pub fn max_n(&self) -> u32 {
        (self.values.len() - 1) as u32
    }

    #[inline]
    pub fn get(&self, k: u32) -> f64 {
        self.values[k as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Log-probability of `counts` given `ln p` entries, with `0^0 = 1`.
///
/// Per-category terms are summed in sorted order, which makes the value
/// bit-identical under any simultaneous permutation of `counts` and `log_p`.
#[inline]
pub(crate) fn log_pmf_raw(
    counts: &[u32],
    log_p: &[f64],
    lf: &LogFactorialTable,
    scratch: &mut [f64],
) -> f64 {
    let mut n = 0u32;
    for (i, (&c, &lp)) in counts.iter().zip(log_p).enumerate() {
        n += c;
        scratch[i] = if c == 0 {
            0.0
        } else {
            f64::from(c) * lp - lf.get(c)
        };
    }
    lf.get(n) + math::canonical_sum(&mut scratch[..counts.len()])
}

/// `ln P(X = x)` for `X ~ Multinomial(n, p)`; negative infinity exactly when
/// some `p_i = 0` has `x_i > 0`.
pub fn log_pmf(p: &ProbabilityVector, x: &OutcomeVector, table: &LogFactorialTable) -> Result<f64> {
    if p.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: x.dim(),
        });
    }
    if table.max_n() < x.n() {
        return Err(Error::InvalidArgument(format!(
            "log-factorial table covers n <= {}, need {}",
            table.max_n(),
            x.n()
        )));
    }
    let mut scratch = vec![0.0; x.dim()];
    Ok(log_pmf_raw(
        x.counts(),
        &p.log_entries(),
        table,
        &mut scratch,
    ))
}

/// Number of compositions of `n` into `d` non-negative parts.
pub fn simplex_cardinality(d: usize, n: u32) -> Option<u128> {
    if d == 0 {
        return None;
    }
    math::binomial(u64::from(n) + d as u64 - 1, d as u64 - 1)
}

fn check_cap(d: usize, n: u32, cap: u128) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    let size = simplex_cardinality(d, n).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::ResourceCap {
            required: size,
            cap,
        });
    }
    Ok(size as usize)
}

/// All compositions of `n` into `d` parts in ascending lexicographic order.
fn compositions(d: usize, n: u32, size: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(size);
    let mut current = vec![0u32; d];
    current[d - 1] = n;
    loop {
        out.push(current.clone());
        // the successor raises the rightmost raisable coordinate before the last
        // one and pushes all remaining mass into the last coordinate
        let Some(i) = (0..d - 1)
            .rev()
            .find(|&i| current[i + 1..].iter().any(|&c| c > 0))
        else {
            break;
        };
        current[i] += 1;
        let rest: u32 = n - current[..=i].iter().sum::<u32>();
        for c in &mut current[i + 1..] {
            *c = 0;
        }
        current[d - 1] = rest;
    }
    out
}

/// The discrete simplex `{x in N^d : sum x = n}` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSimplex {
    d: usize,
    n: u32,
    outcomes: Vec<OutcomeVector>,
}

impl DiscreteSimplex {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[OutcomeVector] {
        &self.outcomes
    }

    pub fn iter(&self) -> core::slice::Iter<'_, OutcomeVector> {
        self.outcomes.iter()
    }

    /// Position of `counts` in the lexicographic order, computed
    /// combinatorially.
    pub fn position(&self, counts: &[u32]) -> Option<usize> {
        if counts.len() != self.d
            || counts.iter().map(|&c| u64::from(c)).sum::<u64>() != u64::from(self.n)
        {
            return None;
        }
        let mut rank: u128 = 0;
        let mut remaining = u64::from(self.n);
        for (i, &c) in counts[..self.d - 1].iter().enumerate() {
            let tail_parts = (self.d - i - 2) as u64;
            for v in 0..u64::from(c) {
                rank += math::binomial(remaining - v + tail_parts, tail_parts)?;
            }
            remaining -= u64::from(c);
        }
        Some(rank as usize)
    }

    pub fn contains(&self, x: &OutcomeVector) -> bool {
        self.position(x.counts()).is_some()
    }
}

impl<'a> IntoIterator for &'a DiscreteSimplex {
    type Item = &'a OutcomeVector;
    type IntoIter = core::slice::Iter<'a, OutcomeVector>;

    fn into_iter(self) -> Self::IntoIter {
        self.outcomes.iter()
    }
}

pub fn enumerate_simplex(d: usize, n: u32) -> Result<DiscreteSimplex> {
    enumerate_simplex_capped(d, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_simplex_capped(d: usize, n: u32, cap: u128) -> Result<DiscreteSimplex> {
    let size = check_cap(d, n, cap)?;
    let outcomes = compositions(d, n, size)
        .into_iter()
        .map(|counts| OutcomeVector { counts, n })
        .collect();
    Ok(DiscreteSimplex { d, n, outcomes })
}

/// The probability vectors `k / mesh` for every composition `k` of `mesh`,
/// in the same lexicographic order as [`enumerate_simplex`].
pub fn simplex_grid(d: usize, mesh: u32) -> Result<Vec<ProbabilityVector>> {
    simplex_grid_capped(d, mesh, DEFAULT_ENUMERATION_CAP)
}

pub fn simplex_grid_capped(d: usize, mesh: u32, cap: u128) -> Result<Vec<ProbabilityVector>> {
    if mesh == 0 {
        return Err(Error::InvalidArgument(
            "grid mesh must be at least 1".into(),
        ));
    }
    let size = check_cap(d, mesh, cap)?;
    let m = f64::from(mesh);
    Ok(compositions(d, mesh, size)
        .into_iter()
        .map(|k| ProbabilityVector {
            entries: k.into_iter().map(|c| f64::from(c) / m).collect(),
        })
        .collect())
}

/// `1 / (d - 1)!`, the volume of the simplex projected onto its first `d - 1`
/// coordinates.
pub fn projected_simplex_volume(d: usize) -> f64 {
    (1..d).fold(1.0, |acc, k| acc / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn ov(v: &[u32]) -> OutcomeVector {
        OutcomeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn degenerate_distribution_has_probability_one() {
        let t = LogFactorialTable::new(5);
        assert_eq!(log_pmf(&pv(&[1.0, 0.0]), &ov(&[5, 0]), &t).unwrap(), 0.0);
        assert_eq!(
            log_pmf(&pv(&[1.0, 0.0]), &ov(&[4, 1]), &t).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn boundary_parameter_with_zero_count() {
        // 45 * 0.8^8 * 0.2^2 = 0.30198988800000006...
        let t = LogFactorialTable::new(10);
        let lp = log_pmf(&pv(&[0.8, 0.2, 0.0]), &ov(&[8, 2, 0]), &t).unwrap();
        let exact = 45.0 * 0.8f64.powi(8) * 0.04;
        assert!((lp.exp() - exact).abs() < 1e-14, "{}", lp.exp());
        assert!((exact - 0.301_989_888).abs() < 1e-9);
    }

    #[test]
    fn fair_coin_two_trials() {
        let t = LogFactorialTable::new(2);
        let lp = log_pmf(&pv(&[0.5, 0.5]), &ov(&[1, 1]), &t).unwrap();
        assert!((lp - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_pmf_rejects_dimension_mismatch() {
        let t = LogFactorialTable::new(2);
        assert!(matches!(
            log_pmf(&pv(&[0.5, 0.5]), &ov(&[1, 1, 0]), &t),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn log_pmf_rejects_short_table() {
        let t = LogFactorialTable::new(1);
        assert!(log_pmf(&pv(&[0.5, 0.5]), &ov(&[1, 1]), &t).is_err());
    }

    #[test]
    fn log_factorial_table_shape() {
        let t = LogFactorialTable::new(20);
        assert_eq!(t.get(0), 0.0);
        assert_eq!(t.get(1), 0.0);
        assert!(t.values().windows(2).skip(1).all(|w| w[1] > w[0]));
        assert!((t.get(10) - 3_628_800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn simplex_sizes() {
        assert_eq!(enumerate_simplex(2, 5).unwrap().len(), 6);
        assert_eq!(enumerate_simplex(3, 10).unwrap().len(), 66);
        assert_eq!(enumerate_simplex(4, 26).unwrap().len(), 3654);
        assert_eq!(enumerate_simplex(3, 0).unwrap().len(), 1);
    }

    #[test]
    fn simplex_order_is_lexicographic() {
        let s = enumerate_simplex(2, 5).unwrap();
        assert_eq!(s.outcomes()[0].counts(), &[0, 5]);
        assert_eq!(s.outcomes()[5].counts(), &[5, 0]);
        let s = enumerate_simplex(3, 4).unwrap();
        assert!(s
            .outcomes()
            .windows(2)
            .all(|w| w[0].counts() < w[1].counts()));
        for (i, x) in s.iter().enumerate() {
            assert_eq!(s.position(x.counts()), Some(i));
        }
        assert_eq!(s.position(&[1, 1, 1]), None);
        assert_eq!(s.position(&[4, 0]), None);
    }

    #[test]
    fn simplex_cap_is_enforced() {
        assert!(matches!(
            enumerate_simplex_capped(4, 26, 1000),
            Err(Error::ResourceCap {
                required: 3654,
                cap: 1000
            })
        ));
        assert!(enumerate_simplex(1, 3).is_err());
    }

    #[test]
    fn grid_examples() {
        let g = simplex_grid(2, 2).unwrap();
        let entries: Vec<&[f64]> = g.iter().map(|p| p.entries()).collect();
        assert_eq!(entries, vec![&[0.0, 1.0][..], &[0.5, 0.5], &[1.0, 0.0]]);
        assert_eq!(simplex_grid(3, 100).unwrap().len(), 5151);
        assert_eq!(simplex_grid(4, 52).unwrap().len(), 26235);
        assert!(simplex_grid(3, 0).is_err());
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![1.0]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.5 + 5e-13]).is_ok());
        let p = ProbabilityVector::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.entries(), &[0.25, 0.75]);
        assert!(ProbabilityVector::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn outcome_vector_validation() {
        assert!(OutcomeVector::with_total(vec![3, 2], 5).is_ok());
        assert!(OutcomeVector::with_total(vec![3, 2], 6).is_err());
        assert!(OutcomeVector::new(vec![3]).is_err());
        let x = ov(&[8, 2, 0]);
        let p = ProbabilityVector::from_counts(&x).unwrap();
        assert_eq!(p.entries(), &[0.8, 0.2, 0.0]);
        assert!(ProbabilityVector::from_counts(&ov(&[0, 0])).is_err());
    }

    #[test]
    fn projected_volume() {
        assert_eq!(projected_simplex_volume(2), 1.0);
        assert_eq!(projected_simplex_volume(3), 0.5);
        assert!((projected_simplex_volume(4) - 1.0 / 6.0).abs() < 1e-16);
    }
}
