use alloc::vec::Vec;

use crate::comparators::{special, Interval, SpecialFunctionConfig};
use crate::error::Result;

/// Smallest interval of `t` in `[0, 1]` holding every member found by
/// scanning `t = i / scan` (and `anchor`), with both ends refined by
/// bisection against the neighbouring non-member scan point.
pub(crate) fn first_coordinate_bounds(
    mut member: impl FnMut(f64) -> Result<bool>,
    anchor: Option<f64>,
    scan: u32,
    cfg: &SpecialFunctionConfig,
) -> Result<Option<Interval>> {
    let scan = scan.max(1);
    let mut points: Vec<f64> = (0..=scan).map(|i| f64::from(i) / f64::from(scan)).collect();
    if let Some(a) = anchor {
        points.push(a.clamp(0.0, 1.0));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut first = None;
    let mut last = None;
    for (i, &t) in points.iter().enumerate() {
        if member(t)? {
            first.get_or_insert(i);
            last = Some(i);
        }
    }
    let (Some(first), Some(last)) = (first, last) else {
        return Ok(None);
    };
    let lower = if first == 0 {
        points[0]
    } else {
        special::bisect(
            points[first - 1],
            points[first],
            cfg,
            "region lower boundary",
            &mut member,
        )?
        .1
    };
    let upper = if last + 1 == points.len() {
        points[last]
    } else {
        special::bisect(
            points[last],
            points[last + 1],
            cfg,
            "region upper boundary",
            |t| Ok(!member(t)?),
        )?
        .0
    };
    Ok(Some(Interval::new(lower, upper)?))
}
