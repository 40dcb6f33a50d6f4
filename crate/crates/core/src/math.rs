//! Float helpers backed by `libm`, since `f64` methods are unavailable without std.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub(crate) fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Binomial coefficient as u128; `None` on overflow.
pub(crate) fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Sum of a short slice after sorting it, so the result depends only on the
/// multiset of terms and not on their order.
#[inline]
pub(crate) fn canonical_sum(terms: &mut [f64]) -> f64 {
    // insertion sort: d is small and this runs in the innermost loops
    for i in 1..terms.len() {
        let mut j = i;
        while j > 0 && terms[j - 1].total_cmp(&terms[j]).is_gt() {
            terms.swap(j - 1, j);
            j -= 1;
        }
    }
    terms.iter().sum()
}
