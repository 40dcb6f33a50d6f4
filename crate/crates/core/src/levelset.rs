//! Likelihood level-set regions.
//!
//! For a parameter `θ`, the acceptance set `K(θ, α)` is the smallest upper
//! level set `{x : μ_θ(x) >= u}` of the multinomial pmf whose mass reaches
//! `1 - α`. The region for an observation `x` collects every `θ` whose
//! acceptance set contains `x`, so its coverage is `μ_θ(K(θ, α)) >= 1 - α`
//! at every `θ`.
//!
//! Probabilities are compared in log space. Values within
//! [`TIE_TOLERANCE`] (relative, floored at one) of each other form a tie
//! tier, and a tier is always taken whole.

use alloc::vec;
use alloc::vec::Vec;

use crate::comparators::{Interval, SpecialFunctionConfig};
use crate::error::{check_alpha, Error, Result};
use crate::math;
use crate::par;
use crate::simplex::{
    enumerate_simplex, log_pmf_raw, projected_simplex_volume, simplex_cardinality,
    simplex_grid_capped, DiscreteSimplex, LogFactorialTable, OutcomeVector, ProbabilityVector,
    DEFAULT_ENUMERATION_CAP,
};

/// Relative tolerance for treating two log-probabilities as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Default cap on `grid points × |E_d|` for grid sweeps.
pub const DEFAULT_WORK_CAP: u128 = 4_000_000_000;

/// Smallest log-probability still tied with `lead`.
#[inline]
pub(crate) fn tie_floor(lead: f64) -> f64 {
    lead - TIE_TOLERANCE * lead.abs().max(1.0)
}

/// Enumerated data space with its log-factorials, shared by every `θ`.
#[derive(Debug, Clone)]
pub(crate) struct PmfKernel {
    simplex: DiscreteSimplex,
    table: LogFactorialTable,
}

/// Per-thread buffers for [`PmfKernel`].
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    log_theta: Vec<f64>,
    scratch: Vec<f64>,
    pub(crate) log_pmf: Vec<f64>,
    pub(crate) order: Vec<u32>,
}

/// The cut of the descending pmf order that defines `K(θ, α)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tier {
    pub(crate) log_threshold: f64,
    pub(crate) mass: f64,
    /// `K` is `order[..cut]`.
    pub(crate) cut: usize,
}

/// One-element swap `K \ {y} ∪ {w}` chosen by the refinement.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Swap {
    pub(crate) removed: u32,
    pub(crate) added: u32,
    pub(crate) mass: f64,
}

impl PmfKernel {
    pub(crate) fn new(d: usize, n: u32) -> Result<Self> {
        Ok(Self {
            simplex: enumerate_simplex(d, n)?,
            table: LogFactorialTable::new(n),
        })
    }

    pub(crate) fn simplex(&self) -> &DiscreteSimplex {
        &self.simplex
    }

    pub(crate) fn workspace(&self) -> Workspace {
        let d = self.simplex.dim();
        let len = self.simplex.len();
        Workspace {
            log_theta: vec![0.0; d],
            scratch: vec![0.0; d],
            log_pmf: vec![0.0; len],
            order: Vec::with_capacity(len),
        }
    }

    /// Fills `ws.log_pmf` with `ln μ_θ(x)` for every outcome.
    pub(crate) fn fill(&self, theta: &[f64], ws: &mut Workspace) {
        for (l, &t) in ws.log_theta.iter_mut().zip(theta) {
            *l = math::ln(t);
        }
        for (lp, x) in ws.log_pmf.iter_mut().zip(self.simplex.iter()) {
            *lp = log_pmf_raw(x.counts(), &ws.log_theta, &self.table, &mut ws.scratch);
        }
    }

    /// Sorts outcomes by decreasing pmf (ties by position) and finds the
    /// tier where the cumulative mass first reaches `1 - α`.
    pub(crate) fn level_cut(&self, theta: &[f64], alpha: f64, ws: &mut Workspace) -> Tier {
        self.fill(theta, ws);
        self.cut_filled(alpha, ws)
    }

    /// [`PmfKernel::level_cut`] on an already filled workspace.
    pub(crate) fn cut_filled(&self, alpha: f64, ws: &mut Workspace) -> Tier {
        let lp = &ws.log_pmf;
        ws.order.clear();
        ws.order.extend(0..lp.len() as u32);
        ws.order
            .sort_unstable_by(|&a, &b| lp[b as usize].total_cmp(&lp[a as usize]).then(a.cmp(&b)));
        let target = 1.0 - alpha;
        let mut cumulative = 0.0;
        let mut i = 0;
        let mut lead = f64::NEG_INFINITY;
        while i < ws.order.len() {
            lead = lp[ws.order[i] as usize];
            let floor = tie_floor(lead);
            while i < ws.order.len() && lp[ws.order[i] as usize] >= floor {
                cumulative += math::exp(lp[ws.order[i] as usize]);
                i += 1;
            }
            if cumulative >= target {
                break;
            }
        }
        Tier {
            log_threshold: lead,
            mass: cumulative,
            cut: i,
        }
    }

    /// Marks `accepted[i]` for the outcomes in `K(θ, α)`.
    pub(crate) fn accept(
        &self,
        theta: &[f64],
        alpha: f64,
        ws: &mut Workspace,
        accepted: &mut [bool],
    ) -> Tier {
        let tier = self.level_cut(theta, alpha, ws);
        accepted.iter_mut().for_each(|a| *a = false);
        for &i in &ws.order[..tier.cut] {
            accepted[i as usize] = true;
        }
        tier
    }

    /// Swap of the least likely member of `K` for the most likely outsider
    /// that keeps the mass at least `1 - α` and closest to it. Call after
    /// [`PmfKernel::level_cut`] on the same workspace.
    pub(crate) fn refine(&self, tier: &Tier, alpha: f64, ws: &Workspace) -> Option<Swap> {
        if tier.cut == 0 || tier.cut == ws.order.len() {
            return None;
        }
        let lp = &ws.log_pmf;
        let y = ws.order[tier.cut - 1];
        let mass_y = math::exp(lp[y as usize]);
        let target = 1.0 - alpha;
        let mut best: Option<usize> = None;
        for j in tier.cut..ws.order.len() {
            let mass_w = math::exp(lp[ws.order[j] as usize]);
            if mass_w >= mass_y {
                continue;
            }
            // masses only decrease along the order, so the last valid
            // candidate leaves the smallest excess over 1 - α
            if tier.mass - mass_y + mass_w >= target {
                best = Some(j);
            } else {
                break;
            }
        }
        let mut j = best?;
        // among outsiders tied with the pick, take the first in order
        let value_at = |k: usize| lp[ws.order[k] as usize];
        while j > tier.cut && value_at(j - 1) == value_at(j) {
            j -= 1;
        }
        let w = ws.order[j];
        let mass = tier.mass - mass_y + math::exp(lp[w as usize]);
        Some(Swap {
            removed: y,
            added: w,
            mass,
        })
    }
}

/// `u(θ, α) = sup{v : μ_θ({x : μ_θ(x) >= v}) >= 1 - α}`.
pub fn likelihood_threshold(theta: &ProbabilityVector, alpha: f64, n: u32) -> Result<f64> {
    Ok(acceptance_set(theta, alpha, n)?.threshold)
}

/// The level set `K(θ, α)` with its threshold and mass.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceSet {
    pub theta: ProbabilityVector,
    pub alpha: f64,
    /// `u(θ, α)`.
    pub threshold: f64,
    pub log_threshold: f64,
    /// Members in lexicographic order.
    pub members: Vec<OutcomeVector>,
    /// `μ_θ(K)`, at least `1 - α`.
    pub mass: f64,
    /// `1 - mass`, at most `α`.
    pub gamma: f64,
}

impl AcceptanceSet {
    pub fn contains(&self, x: &OutcomeVector) -> bool {
        self.members
            .binary_search_by(|m| m.counts().cmp(x.counts()))
            .is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn acceptance_set(theta: &ProbabilityVector, alpha: f64, n: u32) -> Result<AcceptanceSet> {
    check_alpha(alpha)?;
    let kernel = PmfKernel::new(theta.dim(), n)?;
    let mut ws = kernel.workspace();
    let tier = kernel.level_cut(theta.entries(), alpha, &mut ws);
    let mut positions: Vec<u32> = ws.order[..tier.cut].to_vec();
    positions.sort_unstable();
    let members = positions
        .iter()
        .map(|&i| kernel.simplex.outcomes()[i as usize].clone())
        .collect();
    Ok(AcceptanceSet {
        theta: theta.clone(),
        alpha,
        threshold: math::exp(tier.log_threshold),
        log_threshold: tier.log_threshold,
        members,
        mass: tier.mass,
        gamma: 1.0 - tier.mass,
    })
}

/// The level-set region of one observation, with the enumerated data space
/// cached for repeated membership queries.
#[derive(Debug, Clone)]
pub struct LevelSetRegion {
    observed: OutcomeVector,
    position: usize,
    alpha: f64,
    kernel: PmfKernel,
}

impl LevelSetRegion {
    pub fn new(x: &OutcomeVector, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let kernel = PmfKernel::new(x.dim(), x.n())?;
        let position = kernel
            .simplex
            .position(x.counts())
            .expect("x lies in its own simplex");
        Ok(Self {
            observed: x.clone(),
            position,
            alpha,
            kernel,
        })
    }

    pub fn observed(&self) -> &OutcomeVector {
        &self.observed
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check(&self, theta: &ProbabilityVector) -> Result<()> {
        if theta.dim() != self.observed.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.observed.dim(),
                found: theta.dim(),
            });
        }
        Ok(())
    }

    fn contains_with(&self, theta: &[f64], ws: &mut Workspace) -> bool {
        self.kernel.fill(theta, ws);
        if let Some(inside) = self.clear_membership(ws) {
            return inside;
        }
        let tier = self.kernel.cut_filled(self.alpha, ws);
        ws.log_pmf[self.position] >= tie_floor(tier.log_threshold)
    }

    /// Membership without sorting, when it is unambiguous.
    ///
    /// If no other log-probability lies within a window well above the tie
    /// tolerance of `ln μ_θ(x)`, then `x` leads its own tier and the tiers
    /// before it hold exactly the outcomes more likely than `x`, so `x` is
    /// in `K` iff their mass is below `1 - α`. Near-ties and masses too
    /// close to `1 - α` to call are left to the sorted path.
    fn clear_membership(&self, ws: &Workspace) -> Option<bool> {
        let lx = ws.log_pmf[self.position];
        if !lx.is_finite() {
            return None;
        }
        let window = 1e-9 * lx.abs().max(1.0);
        let mut above = 0.0;
        for &l in &ws.log_pmf {
            if l > lx {
                if l < lx + window {
                    return None;
                }
                above += math::exp(l);
            } else if l != lx && l > lx - window {
                return None;
            }
        }
        let target = 1.0 - self.alpha;
        if (above - target).abs() <= 1e-12 {
            return None;
        }
        Some(above < target)
    }

    pub fn contains(&self, theta: &ProbabilityVector) -> Result<bool> {
        self.check(theta)?;
        let mut ws = self.kernel.workspace();
        Ok(self.contains_with(theta.entries(), &mut ws))
    }

    /// Membership in the refined region `{θ : x ∈ L(θ, α)}`.
    pub fn refined_contains(&self, theta: &ProbabilityVector) -> Result<bool> {
        self.check(theta)?;
        let mut ws = self.kernel.workspace();
        let tier = self.kernel.level_cut(theta.entries(), self.alpha, &mut ws);
        let in_base = ws.log_pmf[self.position] >= tie_floor(tier.log_threshold);
        Ok(match self.kernel.refine(&tier, self.alpha, &ws) {
            Some(swap) if swap.removed as usize == self.position => false,
            Some(swap) if swap.added as usize == self.position => true,
            _ => in_base,
        })
    }
}

/// `θ ∈ R_α(x)`, i.e. `μ_θ(x) >= u(θ, α)` up to the tie tolerance.
pub fn region_contains(theta: &ProbabilityVector, x: &OutcomeVector, alpha: f64) -> Result<bool> {
    LevelSetRegion::new(x, alpha)?.contains(theta)
}

pub fn refined_region_contains(
    theta: &ProbabilityVector,
    x: &OutcomeVector,
    alpha: f64,
) -> Result<bool> {
    LevelSetRegion::new(x, alpha)?.refined_contains(theta)
}

/// Level-set region of one observation evaluated on `simplex_grid(d, mesh)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub observed: OutcomeVector,
    pub alpha: f64,
    pub mesh: u32,
    /// Grid points in lexicographic order.
    pub points: Vec<ProbabilityVector>,
    /// Membership flag per grid point.
    pub membership: Vec<bool>,
    pub member_count: usize,
    /// Member fraction times `1 / (d - 1)!`, the projected simplex volume.
    pub volume: f64,
    /// For `d = 2`, the spread of member abscissae `max p_1 - min p_1`.
    pub width: Option<f64>,
    /// Per-coordinate `[min, max]` over members; empty when there are none.
    pub coordinate_bounds: Vec<Interval>,
}

impl RegionGrid {
    pub fn members(&self) -> impl Iterator<Item = &ProbabilityVector> + '_ {
        self.points
            .iter()
            .zip(&self.membership)
            .filter(|(_, &m)| m)
            .map(|(p, _)| p)
    }
}

pub fn region_grid(x: &OutcomeVector, alpha: f64, mesh: u32) -> Result<RegionGrid> {
    region_grid_capped(x, alpha, mesh, DEFAULT_WORK_CAP)
}

pub fn region_grid_capped(
    x: &OutcomeVector,
    alpha: f64,
    mesh: u32,
    cap: u128,
) -> Result<RegionGrid> {
    let region = LevelSetRegion::new(x, alpha)?;
    let d = x.dim();
    let grid_size = simplex_cardinality(d, mesh).unwrap_or(u128::MAX);
    let work = grid_size.saturating_mul(region.kernel.simplex.len() as u128);
    if work > cap {
        return Err(Error::ResourceCap {
            required: work,
            cap,
        });
    }
    let points = simplex_grid_capped(d, mesh, DEFAULT_ENUMERATION_CAP.max(grid_size))?;
    let membership = par::map_indexed(
        points.len(),
        || region.kernel.workspace(),
        |ws, i| region.contains_with(points[i].entries(), ws),
    );
    Ok(summarize_grid(x, alpha, mesh, points, membership))
}

fn summarize_grid(
    x: &OutcomeVector,
    alpha: f64,
    mesh: u32,
    points: Vec<ProbabilityVector>,
    membership: Vec<bool>,
) -> RegionGrid {
    let d = x.dim();
    let member_count = membership.iter().filter(|&&m| m).count();
    let volume = member_count as f64 / points.len() as f64 * projected_simplex_volume(d);
    let mut coordinate_bounds: Vec<Interval> = Vec::new();
    for p in points
        .iter()
        .zip(&membership)
        .filter(|(_, &m)| m)
        .map(|(p, _)| p)
    {
        if coordinate_bounds.is_empty() {
            coordinate_bounds = p
                .entries()
                .iter()
                .map(|&v| Interval { lower: v, upper: v })
                .collect();
        } else {
            for (b, &v) in coordinate_bounds.iter_mut().zip(p.entries()) {
                b.lower = b.lower.min(v);
                b.upper = b.upper.max(v);
            }
        }
    }
    let width = (d == 2).then(|| coordinate_bounds.first().map_or(0.0, Interval::width));
    RegionGrid {
        observed: x.clone(),
        alpha,
        mesh,
        points,
        membership,
        member_count,
        volume,
        width,
        coordinate_bounds,
    }
}

/// For `d = 2`, the range of `p_1` covered by the level-set region: members
/// are located on the scan `p_1 = i / scan` and the outermost boundaries are
/// refined by bisection.
pub fn level_set_interval(
    x: &OutcomeVector,
    alpha: f64,
    scan: u32,
    cfg: &SpecialFunctionConfig,
) -> Result<Option<Interval>> {
    if x.dim() != 2 {
        return Err(Error::Inapplicable {
            method: "level-set interval".into(),
            d: x.dim(),
        });
    }
    let region = LevelSetRegion::new(x, alpha)?;
    let mut ws = region.kernel.workspace();
    let anchor = (x.n() > 0).then(|| f64::from(x.counts()[0]) / f64::from(x.n()));
    crate::bounds::first_coordinate_bounds(
        |t| Ok(region.contains_with(&[t, 1.0 - t], &mut ws)),
        anchor,
        scan,
        cfg,
    )
}

/// `L(θ, α) = K(θ, α) \ V ∪ W` with single-element `V` and `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedAcceptanceSet {
    pub base: AcceptanceSet,
    /// `V`: empty when no swap is valid, otherwise the least likely member of `K`.
    pub removed: Vec<OutcomeVector>,
    /// `W`: outsiders added in exchange, same size as `removed`.
    pub added: Vec<OutcomeVector>,
    /// `μ_θ(L)`, between `1 - α` and the base mass.
    pub mass: f64,
    /// `1 - mass`.
    pub delta: f64,
}

impl RefinedAcceptanceSet {
    pub fn is_refined(&self) -> bool {
        !self.removed.is_empty()
    }

    pub fn contains(&self, x: &OutcomeVector) -> bool {
        if self.removed.contains(x) {
            return false;
        }
        self.added.contains(x) || self.base.contains(x)
    }

    /// Members of `L` in lexicographic order.
    pub fn members(&self) -> Vec<OutcomeVector> {
        let mut out: Vec<OutcomeVector> = self
            .base
            .members
            .iter()
            .filter(|m| !self.removed.contains(m))
            .cloned()
            .collect();
        out.extend(self.added.iter().cloned());
        out.sort();
        out
    }
}

/// Trades the least likely member `y` of `K(θ, α)` for the most likely
/// outsider `w` that keeps the mass at least `1 - α`, choosing among the
/// outsiders (in decreasing pmf) the one leaving the smallest non-negative
/// excess. Returns the base set unchanged when no swap satisfies
/// `α - γ >= μ(y) - μ(w) > 0`.
pub fn refine_acceptance_set(
    theta: &ProbabilityVector,
    alpha: f64,
    n: u32,
) -> Result<RefinedAcceptanceSet> {
    check_alpha(alpha)?;
    let base = acceptance_set(theta, alpha, n)?;
    let kernel = PmfKernel::new(theta.dim(), n)?;
    let mut ws = kernel.workspace();
    let tier = kernel.level_cut(theta.entries(), alpha, &mut ws);
    let outcome = |i: u32| kernel.simplex.outcomes()[i as usize].clone();
    Ok(match kernel.refine(&tier, alpha, &ws) {
        Some(swap) => RefinedAcceptanceSet {
            removed: vec![outcome(swap.removed)],
            added: vec![outcome(swap.added)],
            mass: swap.mass,
            delta: 1.0 - swap.mass,
            base,
        },
        None => RefinedAcceptanceSet {
            mass: base.mass,
            delta: base.gamma,
            removed: Vec::new(),
            added: Vec::new(),
            base,
        },
    })
}
