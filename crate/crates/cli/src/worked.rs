//! The two worked examples: a 2×2 independence table read as a
//! quadrinomial observation, and a trinomial susceptibility test.

use multiconf::comparators::{chi2_survival, Interval, SpecialFunctionConfig};
use multiconf::levelset::{region_grid, RegionGrid};
use multiconf::OutcomeVector;

use crate::error::CliError;

/// Pearson chi-square test of independence for a 2×2 table given as
/// `(n11, n12, n21, n22)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn independence_test(counts: &OutcomeVector) -> Result<IndependenceTest, CliError> {
    let c: Vec<f64> = table_counts(counts)?
        .iter()
        .map(|&v| f64::from(v))
        .collect();
    let n = c.iter().sum::<f64>();
    let rows = [c[0] + c[1], c[2] + c[3]];
    let cols = [c[0] + c[2], c[1] + c[3]];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return Err(CliError::Usage(
            "the table has an empty row or column".into(),
        ));
    }
    let mut statistic = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = rows[i] * cols[j] / n;
            let diff = c[2 * i + j] - expected;
            statistic += diff * diff / expected;
        }
    }
    let p_value = chi2_survival(statistic, 1, &SpecialFunctionConfig::default())?;
    Ok(IndependenceTest { statistic, p_value })
}

fn table_counts(counts: &OutcomeVector) -> Result<&[u32], CliError> {
    if counts.dim() != 4 {
        return Err(CliError::Usage(format!(
            "a 2x2 table needs 4 counts, got {}",
            counts.dim()
        )));
    }
    Ok(counts.counts())
}

/// Odds ratio `p1 p4 / (p2 p3)` bounds over the region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsRatioInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Point of the independence surface `(uv, (1-u)v, u(1-v), (1-u)(1-v))`.
pub fn independence_point(u: f64, v: f64) -> [f64; 4] {
    [u * v, (1.0 - u) * v, u * (1.0 - v), (1.0 - u) * (1.0 - v)]
}

fn max_norm(a: &[f64], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub test: IndependenceTest,
    pub grid: RegionGrid,
    /// Smallest max-norm distance from a region grid point to the surface.
    pub surface_distance: f64,
    /// The region reaches the surface at grid resolution.
    pub intersects_surface: bool,
    /// Over members with every coordinate at least `1 / mesh`.
    pub odds_ratio: Option<OddsRatioInterval>,
    pub interior_members: usize,
    pub boundary_members: usize,
}

/// Chi-square test, level-set region on the `mesh` grid, whether the region
/// meets the independence surface, and the odds-ratio range over it.
///
/// A grid point counts as meeting the surface when it lies within half a
/// cell of it. The distance is the smaller of two upper bounds: the surface
/// point with the same margins, at distance `|p1 p4 - p2 p3|`, and the
/// nearest point of the surface sampled at `u, v = i / mesh`.
pub fn independence_example(
    counts: &OutcomeVector,
    alpha: f64,
    mesh: u32,
) -> Result<IndependenceReport, CliError> {
    let test = independence_test(counts)?;
    let grid = region_grid(counts, alpha, mesh)?;
    let m = f64::from(mesh);
    let surface: Vec<[f64; 4]> = (0..=mesh)
        .flat_map(|i| {
            (0..=mesh).map(move |j| independence_point(f64::from(i) / m, f64::from(j) / m))
        })
        .collect();
    let mut surface_distance = f64::INFINITY;
    let mut odds: Option<OddsRatioInterval> = None;
    let (mut interior_members, mut boundary_members) = (0, 0);
    let floor = 1.0 / m - 1e-12;
    for p in grid.members() {
        let e = p.entries();
        let same_margins = (e[0] * e[3] - e[1] * e[2]).abs();
        let sampled = surface
            .iter()
            .map(|q| max_norm(e, q))
            .fold(f64::INFINITY, f64::min);
        surface_distance = surface_distance.min(same_margins).min(sampled);
        if e.iter().all(|&v| v >= floor) {
            interior_members += 1;
            let ratio = e[0] * e[3] / (e[1] * e[2]);
            odds = Some(match odds {
                None => OddsRatioInterval {
                    lower: ratio,
                    upper: ratio,
                },
                Some(o) => OddsRatioInterval {
                    lower: o.lower.min(ratio),
                    upper: o.upper.max(ratio),
                },
            });
        } else {
            boundary_members += 1;
        }
    }
    Ok(IndependenceReport {
        test,
        surface_distance,
        intersects_surface: surface_distance <= 0.5 / m,
        odds_ratio: odds,
        interior_members,
        boundary_members,
        grid,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityReport {
    pub grid: RegionGrid,
    /// Whether the vertex with every isolate in the first class is a member.
    pub contains_first_vertex: bool,
    /// Per-coordinate `[min, max]` over the region.
    pub bounds: Vec<Interval>,
}

/// Level-set region of a trinomial count vector on the `mesh` grid.
pub fn susceptibility_example(
    counts: &OutcomeVector,
    alpha: f64,
    mesh: u32,
) -> Result<SusceptibilityReport, CliError> {
    if counts.dim() != 3 {
        return Err(CliError::Usage(format!(
            "expected 3 counts, got {}",
            counts.dim()
        )));
    }
    let grid = region_grid(counts, alpha, mesh)?;
    let contains_first_vertex = grid
        .points
        .iter()
        .zip(&grid.membership)
        .any(|(p, &m)| m && p.entries()[0] == 1.0);
    let bounds = grid.coordinate_bounds.clone();
    Ok(SusceptibilityReport {
        grid,
        contains_first_vertex,
        bounds,
    })
}
