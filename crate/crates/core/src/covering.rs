//! Covering collections: nested families `∅ = A_0 ⊂ A_1 ⊂ ... ⊂ A_κ = E`
//! of outcome sets, and the confidence regions obtained by inverting them.
//!
//! A collection is stored as a rank function on the discrete simplex: the
//! rank of `x` is the first index `k` with `x ∈ A_k`, so `A_k` is the set of
//! outcomes with rank at most `k`. Strict growth means every index in
//! `1..=κ` is the rank of at least one outcome.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::comparators::{Interval, SpecialFunctionConfig};
use crate::error::{check_alpha, Error, Result};
use crate::math;
use crate::simplex::{
    enumerate_simplex, log_pmf_raw, DiscreteSimplex, LogFactorialTable, OutcomeVector,
    ProbabilityVector,
};

/// How a collection was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectionKind {
    /// Grows by one outcome per index, following an explicit order.
    FullyGranular,
    /// `d = 2`: `A_{k+1} = {x : x_1 <= k}`.
    BottomToTop,
    /// `d = 2`: `A_{k+1} = {x : x_1 >= n - k}`.
    TopToBottom,
    /// `d = 3`: fully granular, traversing the simplex boundary inward ring by ring.
    SpiralD3,
    /// Arbitrary rank function.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoveringCollection {
    simplex: DiscreteSimplex,
    ranks: Vec<u32>,
    max_index: u32,
    kind: CollectionKind,
}

impl CoveringCollection {
    /// Builds a collection from the rank of every outcome, listed in the
    /// simplex's lexicographic order.
    pub fn from_ranks(simplex: DiscreteSimplex, ranks: Vec<u32>) -> Result<Self> {
        Self::with_kind(simplex, ranks, CollectionKind::Custom)
    }

    fn with_kind(simplex: DiscreteSimplex, ranks: Vec<u32>, kind: CollectionKind) -> Result<Self> {
        if ranks.len() != simplex.len() {
            return Err(Error::InvalidCollection(format!(
                "{} ranks for {} outcomes",
                ranks.len(),
                simplex.len()
            )));
        }
        if ranks.contains(&0) {
            return Err(Error::InvalidCollection(
                "A_0 must be empty, rank 0 is not allowed".into(),
            ));
        }
        let max_index = ranks.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; max_index as usize + 1];
        for &r in &ranks {
            seen[r as usize] = true;
        }
        if let Some(k) = (1..=max_index as usize).find(|&k| !seen[k]) {
            return Err(Error::InvalidCollection(format!(
                "A_{k} equals A_{} (growth must be strict)",
                k - 1
            )));
        }
        Ok(Self {
            simplex,
            ranks,
            max_index,
            kind,
        })
    }

    /// Fully granular collection adding the outcomes of `order` one at a time.
    pub fn fully_granular(d: usize, n: u32, order: &[OutcomeVector]) -> Result<Self> {
        let simplex = enumerate_simplex(d, n)?;
        if order.len() != simplex.len() {
            return Err(Error::InvalidCollection(format!(
                "order lists {} outcomes, the simplex has {}",
                order.len(),
                simplex.len()
            )));
        }
        let mut ranks = vec![0u32; simplex.len()];
        for (i, x) in order.iter().enumerate() {
            let pos = simplex.position(x.counts()).ok_or_else(|| {
                Error::InvalidCollection(format!("{:?} is not in the simplex", x.counts()))
            })?;
            if ranks[pos] != 0 {
                return Err(Error::InvalidCollection(format!(
                    "{:?} listed twice",
                    x.counts()
                )));
            }
            ranks[pos] = i as u32 + 1;
        }
        Self::with_kind(simplex, ranks, CollectionKind::FullyGranular)
    }

    /// Fully granular collection in lexicographic order.
    pub fn lexicographic(d: usize, n: u32) -> Result<Self> {
        let simplex = enumerate_simplex(d, n)?;
        let ranks = (1..=simplex.len() as u32).collect();
        Self::with_kind(simplex, ranks, CollectionKind::FullyGranular)
    }

    pub fn bottom_to_top(n: u32) -> Result<Self> {
        let simplex = enumerate_simplex(2, n)?;
        let ranks = simplex.iter().map(|x| x.counts()[0] + 1).collect();
        Self::with_kind(simplex, ranks, CollectionKind::BottomToTop)
    }

    pub fn top_to_bottom(n: u32) -> Result<Self> {
        let simplex = enumerate_simplex(2, n)?;
        let ranks = simplex.iter().map(|x| n - x.counts()[0] + 1).collect();
        Self::with_kind(simplex, ranks, CollectionKind::TopToBottom)
    }

    /// The spiral collection on `E_3`, see [`spiral_order`].
    pub fn spiral(n: u32) -> Result<Self> {
        let order = spiral_order(n);
        let mut c = Self::fully_granular(3, n, &order)?;
        c.kind = CollectionKind::SpiralD3;
        Ok(c)
    }

    /// `A'_k = E \ A_{κ - k}`, i.e. rank `κ - rank + 1`.
    pub fn reflected(&self) -> Self {
        let ranks = self.ranks.iter().map(|&r| self.max_index - r + 1).collect();
        let kind = match self.kind {
            CollectionKind::BottomToTop => CollectionKind::TopToBottom,
            CollectionKind::TopToBottom => CollectionKind::BottomToTop,
            CollectionKind::SpiralD3 => CollectionKind::FullyGranular,
            other => other,
        };
        Self {
            simplex: self.simplex.clone(),
            ranks,
            max_index: self.max_index,
            kind,
        }
    }

    pub fn kind(&self) -> CollectionKind {
        self.kind
    }

    pub fn simplex(&self) -> &DiscreteSimplex {
        &self.simplex
    }

    pub fn dim(&self) -> usize {
        self.simplex.dim()
    }

    pub fn n(&self) -> u32 {
        self.simplex.n()
    }

    /// `κ`, the largest index; `A_κ = E`.
    pub fn max_index(&self) -> u32 {
        self.max_index
    }

    /// Ranks in lexicographic outcome order.
    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    fn position(&self, x: &OutcomeVector) -> Result<usize> {
        self.simplex.position(x.counts()).ok_or_else(|| {
            Error::InvalidCounts(format!(
                "{:?} is outside E_{} with n = {}",
                x.counts(),
                self.simplex.dim(),
                self.simplex.n()
            ))
        })
    }

    /// Outcomes of `A_k`, in lexicographic order.
    pub fn members(&self, k: u32) -> impl Iterator<Item = &OutcomeVector> + '_ {
        self.simplex
            .iter()
            .zip(&self.ranks)
            .filter(move |(_, &r)| r <= k)
            .map(|(x, _)| x)
    }

    /// `μ_θ(A_k)`, summed exactly over the members.
    pub fn set_mass(&self, theta: &ProbabilityVector, k: u32) -> Result<f64> {
        if theta.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: theta.dim(),
            });
        }
        let lf = LogFactorialTable::new(self.n());
        let log_theta = theta.log_entries();
        let mut scratch = vec![0.0; self.dim()];
        Ok(self
            .members(k)
            .map(|x| math::exp(log_pmf_raw(x.counts(), &log_theta, &lf, &mut scratch)))
            .sum())
    }

    /// Whether `A_k` is mapped onto itself by every permutation of coordinates.
    pub fn invariant_indices(&self) -> Vec<u32> {
        // A_k is invariant iff no permutation orbit straddles k, i.e. k lies
        // outside [min rank, max rank) of every orbit
        let d = self.dim();
        let perms = generating_permutations(d);
        let mut orbit_max = self.ranks.clone();
        // propagate the max rank along generator edges until stable
        loop {
            let mut changed = false;
            for (pos, x) in self.simplex.iter().enumerate() {
                for perm in &perms {
                    let image = self
                        .simplex
                        .position(x.permuted(perm).counts())
                        .expect("permutation stays in E");
                    let m = orbit_max[pos].max(orbit_max[image]);
                    if orbit_max[pos] != m || orbit_max[image] != m {
                        orbit_max[pos] = m;
                        orbit_max[image] = m;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut straddled = vec![false; self.max_index as usize + 2];
        for (&r, &m) in self.ranks.iter().zip(&orbit_max) {
            for k in r..m {
                straddled[k as usize] = true;
            }
        }
        (0..=self.max_index)
            .filter(|&k| !straddled[k as usize])
            .collect()
    }

    /// One outcome per line as `c_1,...,c_d rank`, after a `#` header.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# covering-collection d={} n={} max_index={}",
            self.dim(),
            self.n(),
            self.max_index
        );
        for (x, r) in self.simplex.iter().zip(&self.ranks) {
            let mut first = true;
            for c in x.counts() {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{c}");
            }
            let _ = writeln!(out, " {r}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty input".into()))?;
        let mut d = None;
        let mut n = None;
        for field in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = field.strip_prefix("d=") {
                d = v.parse::<usize>().ok();
            } else if let Some(v) = field.strip_prefix("n=") {
                n = v.parse::<u32>().ok();
            }
        }
        let (d, n) = d
            .zip(n)
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
        let simplex = enumerate_simplex(d, n)?;
        let mut ranks = vec![0u32; simplex.len()];
        for line in lines {
            let (counts, rank) = line
                .trim()
                .split_once(' ')
                .ok_or_else(|| Error::Parse(format!("bad line {line:?}")))?;
            let counts: Vec<u32> = counts
                .split(',')
                .map(|c| c.trim().parse::<u32>())
                .collect::<core::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("bad counts in {line:?}: {e}")))?;
            let rank: u32 = rank
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad rank in {line:?}: {e}")))?;
            let pos = simplex
                .position(&counts)
                .ok_or_else(|| Error::Parse(format!("{counts:?} is not in the simplex")))?;
            if ranks[pos] != 0 {
                return Err(Error::Parse(format!("{counts:?} listed twice")));
            }
            if rank == 0 {
                return Err(Error::InvalidCollection("rank 0 is not allowed".into()));
            }
            ranks[pos] = rank;
        }
        if ranks.contains(&0) {
            return Err(Error::Parse("some outcomes have no rank".into()));
        }
        Self::from_ranks(simplex, ranks)
    }
}

/// `k_x`, the least index whose set contains `x`.
pub fn index_of(x: &OutcomeVector, c: &CoveringCollection) -> Result<u32> {
    Ok(c.ranks[c.position(x)?])
}

/// `θ ∈ R_α(x)` iff `μ_θ(A_{k_x}) >= α`.
pub fn region_membership(
    theta: &ProbabilityVector,
    x: &OutcomeVector,
    alpha: f64,
    c: &CoveringCollection,
) -> Result<bool> {
    check_alpha(alpha)?;
    let k = index_of(x, c)?;
    Ok(c.set_mass(theta, k)? >= alpha)
}

/// Diagnostic reverse region `μ_θ(A_{k_x}) <= 1 - α`; its coverage is at
/// most `1 - α`, so it is not a confidence region.
pub fn reverse_region_mass(
    theta: &ProbabilityVector,
    x: &OutcomeVector,
    alpha: f64,
    c: &CoveringCollection,
) -> Result<bool> {
    check_alpha(alpha)?;
    let k = index_of(x, c)?;
    Ok(c.set_mass(theta, k)? <= 1.0 - alpha)
}

/// An intensional confidence region: `θ` is a member iff every stored
/// outcome set has `μ_θ` mass of at least `level`.
#[derive(Debug, Clone)]
pub struct RegionPredicate {
    method: String,
    alpha: f64,
    observed: OutcomeVector,
    level: f64,
    sets: Vec<Vec<OutcomeVector>>,
    table: LogFactorialTable,
}

impl RegionPredicate {
    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn observed(&self) -> &OutcomeVector {
        &self.observed
    }

    /// Masses of the stored sets under `θ`.
    pub fn masses(&self, theta: &ProbabilityVector) -> Result<Vec<f64>> {
        if theta.dim() != self.observed.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.observed.dim(),
                found: theta.dim(),
            });
        }
        let log_theta = theta.log_entries();
        let mut scratch = vec![0.0; theta.dim()];
        Ok(self
            .sets
            .iter()
            .map(|set| {
                set.iter()
                    .map(|x| {
                        math::exp(log_pmf_raw(
                            x.counts(),
                            &log_theta,
                            &self.table,
                            &mut scratch,
                        ))
                    })
                    .sum()
            })
            .collect())
    }

    pub fn contains(&self, theta: &ProbabilityVector) -> Result<bool> {
        Ok(self.masses(theta)?.iter().all(|&m| m >= self.level))
    }

    /// For `d = 2`, the smallest interval of `p_1` values holding the region.
    ///
    /// Scans `p_1 = i / scan` (plus the point `x_1 / n`) for members, then
    /// bisects between the extreme members and their non-member neighbours.
    /// Assumes the region is an interval in `p_1`, which holds for the
    /// monotone bottom-to-top and top-to-bottom collections.
    pub fn first_coordinate_bounds(
        &self,
        scan: u32,
        cfg: &SpecialFunctionConfig,
    ) -> Result<Option<Interval>> {
        if self.observed.dim() != 2 {
            return Err(Error::Inapplicable {
                method: format!("{} interval extraction", self.method),
                d: self.observed.dim(),
            });
        }
        let anchor = (self.observed.n() > 0)
            .then(|| f64::from(self.observed.counts()[0]) / f64::from(self.observed.n()));
        crate::bounds::first_coordinate_bounds(
            |t| self.contains(&ProbabilityVector::new(vec![t, 1.0 - t])?),
            anchor,
            scan,
            cfg,
        )
    }
}

fn predicate(
    method: String,
    x: &OutcomeVector,
    alpha: f64,
    level: f64,
    sets: Vec<Vec<OutcomeVector>>,
) -> RegionPredicate {
    RegionPredicate {
        method,
        alpha,
        observed: x.clone(),
        level,
        sets,
        table: LogFactorialTable::new(x.n()),
    }
}

/// The one-sided region of a single collection as a predicate.
pub fn covering_region(
    x: &OutcomeVector,
    alpha: f64,
    c: &CoveringCollection,
) -> Result<RegionPredicate> {
    check_alpha(alpha)?;
    let k = index_of(x, c)?;
    let set = c.members(k).cloned().collect();
    Ok(predicate(
        format!("covering({:?})", c.kind),
        x,
        alpha,
        alpha,
        vec![set],
    ))
}

/// Intersection of the level-`α/2` regions of `c` and of its reflection,
/// a region with coverage at least `1 - α`.
pub fn symmetrized_region(
    x: &OutcomeVector,
    alpha: f64,
    c: &CoveringCollection,
) -> Result<RegionPredicate> {
    check_alpha(alpha)?;
    let reflected = c.reflected();
    let k = index_of(x, c)?;
    let k_reflected = index_of(x, &reflected)?;
    let sets = vec![
        c.members(k).cloned().collect(),
        reflected.members(k_reflected).cloned().collect(),
    ];
    Ok(predicate(
        format!("symmetrized({:?})", c.kind),
        x,
        alpha,
        0.5 * alpha,
        sets,
    ))
}

/// All permutations of `0..d` (Heap's algorithm), identity first.
pub fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..d).collect();
    let mut out = vec![current.clone()];
    let mut counters = vec![0usize; d];
    let mut i = 1;
    while i < d {
        if counters[i] < i {
            if i % 2 == 0 {
                current.swap(0, i);
            } else {
                current.swap(counters[i], i);
            }
            out.push(current.clone());
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    out
}

/// A transposition and a full cycle, which generate the symmetric group.
fn generating_permutations(d: usize) -> Vec<Vec<usize>> {
    let mut swap: Vec<usize> = (0..d).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..d).map(|i| (i + 1) % d).collect();
    vec![swap, cycle]
}

/// Whether every `A_k` is invariant under permutation of coordinates,
/// i.e. the rank function is constant on permutation orbits. Checks all
/// permutations for `d <= 4` and a generating pair otherwise.
pub fn is_equivariant(c: &CoveringCollection) -> bool {
    let d = c.dim();
    let perms = if d <= 4 {
        permutations(d)
    } else {
        generating_permutations(d)
    };
    c.simplex.iter().zip(&c.ranks).all(|(x, &r)| {
        perms.iter().all(|perm| {
            let image = c
                .simplex
                .position(x.permuted(perm).counts())
                .expect("permutation stays in E");
            c.ranks[image] == r
        })
    })
}

/// Order on `E_3` that walks the boundary of the simplex, then the boundary
/// of the inner simplex, and so on.
///
/// Ring `r` holds the outcomes whose smallest count is `r`. Each ring starts
/// at `(n - 2r, r, r)` and runs along the edge toward `(r, n - 2r, r)`, then
/// toward `(r, r, n - 2r)`, then back toward the start. The union of the
/// first rings is therefore permutation invariant.
pub fn spiral_order(n: u32) -> Vec<OutcomeVector> {
    let mut order = Vec::new();
    let mut r = 0u32;
    while 3 * r <= n {
        let side = n - 3 * r;
        let top = n - 2 * r;
        let push = |order: &mut Vec<OutcomeVector>, c: [u32; 3]| {
            order.push(OutcomeVector::new(c.to_vec()).expect("three categories"));
        };
        if side == 0 {
            push(&mut order, [r, r, r]);
        } else {
            for s in 0..side {
                push(&mut order, [top - s, r + s, r]);
            }
            for s in 0..side {
                push(&mut order, [r, top - s, r + s]);
            }
            for s in 0..side {
                push(&mut order, [r + s, r, top - s]);
            }
        }
        r += 1;
    }
    order
}

/// Indices `k` at which the spiral collection completes a ring.
pub fn spiral_ring_ends(n: u32) -> Vec<u32> {
    let mut ends = Vec::new();
    let mut total = 0u32;
    let mut r = 0u32;
    while 3 * r <= n {
        let side = n - 3 * r;
        total += if side == 0 { 1 } else { 3 * side };
        ends.push(total);
        r += 1;
    }
    ends
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

    fn first_coords(c: &CoveringCollection, k: u32) -> Vec<u32> {
        c.members(k).map(|x| x.counts()[0]).collect()
    }

    #[test]
    fn index_of_granular_starting_at_x() {
        let x = ov(&[1, 2, 0]);
        let mut order = vec![x.clone()];
        order.extend(
            enumerate_simplex(3, 3)
                .unwrap()
                .iter()
                .filter(|y| **y != x)
                .cloned(),
        );
        let c = CoveringCollection::fully_granular(3, 3, &order).unwrap();
        assert_eq!(index_of(&x, &c).unwrap(), 1);
    }

    #[test]
    fn index_of_one_sided_collections() {
        let x = ov(&[3, 2]);
        let up = CoveringCollection::bottom_to_top(5).unwrap();
        let k = index_of(&x, &up).unwrap();
        assert_eq!(first_coords(&up, k), vec![0, 1, 2, 3]);
        let down = CoveringCollection::top_to_bottom(5).unwrap();
        let k = index_of(&x, &down).unwrap();
        assert_eq!(first_coords(&down, k), vec![3, 4, 5]);
        assert!(index_of(&ov(&[3, 3]), &up).is_err());
    }

    #[test]
    fn membership_examples() {
        let c = CoveringCollection::bottom_to_top(5).unwrap();
        let x = ov(&[3, 2]);
        let theta = pv(&[0.9, 0.1]);
        // sum_{i <= 3} C(5, i) 0.9^i 0.1^(5 - i) = 0.08146
        let k = index_of(&x, &c).unwrap();
        assert!((c.set_mass(&theta, k).unwrap() - 0.08146).abs() < 1e-12);
        assert!(region_membership(&theta, &x, 0.05, &c).unwrap());
        assert!(!region_membership(&theta, &x, 0.09, &c).unwrap());
        assert!(reverse_region_mass(&theta, &x, 0.05, &c).unwrap());

        // A_{k_x} = E for the largest x
        let top = ov(&[5, 0]);
        let k = index_of(&top, &c).unwrap();
        assert_eq!(k, c.max_index());
        assert!(region_membership(&pv(&[0.0, 1.0]), &top, 0.5, &c).unwrap());
        assert!(!reverse_region_mass(&pv(&[0.0, 1.0]), &top, 0.05, &c).unwrap());
        assert!(region_membership(&theta, &x, 1.5, &c).is_err());
    }

    #[test]
    fn granular_singleton_at_vertex() {
        let x = ov(&[4, 0]);
        let mut order = vec![x.clone()];
        order.extend(
            enumerate_simplex(2, 4)
                .unwrap()
                .iter()
                .filter(|y| **y != x)
                .cloned(),
        );
        let c = CoveringCollection::fully_granular(2, 4, &order).unwrap();
        assert!(region_membership(&pv(&[1.0, 0.0]), &x, 0.05, &c).unwrap());
    }

    #[test]
    fn empty_set_has_zero_mass() {
        let c = CoveringCollection::bottom_to_top(5).unwrap();
        assert_eq!(c.set_mass(&pv(&[0.3, 0.7]), 0).unwrap(), 0.0);
    }

    #[test]
    fn reflection_is_an_involution_and_swaps_one_sided_kinds() {
        let up = CoveringCollection::bottom_to_top(6).unwrap();
        let down = CoveringCollection::top_to_bottom(6).unwrap();
        assert_eq!(up.reflected().ranks(), down.ranks());
        assert_eq!(up.reflected().reflected(), up);
    }

    #[test]
    fn symmetrized_bottom_to_top_is_clopper_pearson() {
        let c = CoveringCollection::bottom_to_top(10).unwrap();
        let pred = symmetrized_region(&ov(&[8, 2]), 0.05, &c).unwrap();
        let cfg = SpecialFunctionConfig {
            tolerance: 1e-13,
            ..Default::default()
        };
        let got = pred.first_coordinate_bounds(200, &cfg).unwrap().unwrap();
        let cp = crate::comparators::clopper_pearson_interval(8, 10, 0.05).unwrap();
        assert!((got.lower - cp.lower).abs() < 1e-8, "{got:?} {cp:?}");
        assert!((got.upper - cp.upper).abs() < 1e-8, "{got:?} {cp:?}");

        let pred = symmetrized_region(&ov(&[0, 10]), 0.05, &c).unwrap();
        assert_eq!(
            pred.first_coordinate_bounds(200, &cfg)
                .unwrap()
                .unwrap()
                .lower,
            0.0
        );
    }

    #[test]
    fn collection_validation() {
        let s = enumerate_simplex(2, 2).unwrap();
        assert!(CoveringCollection::from_ranks(s.clone(), vec![1, 1, 3]).is_err());
        assert!(CoveringCollection::from_ranks(s.clone(), vec![0, 1, 2]).is_err());
        assert!(CoveringCollection::from_ranks(s.clone(), vec![1, 2]).is_err());
        let c = CoveringCollection::from_ranks(s, vec![2, 1, 2]).unwrap();
        assert_eq!(c.max_index(), 2);
        let dup = vec![ov(&[0, 2]), ov(&[0, 2]), ov(&[2, 0])];
        assert!(CoveringCollection::fully_granular(2, 2, &dup).is_err());
    }

    #[test]
    fn equivariance_examples() {
        // ranks constant on orbits: {(1,1)} then the two vertices
        let s = enumerate_simplex(2, 2).unwrap();
        let c = CoveringCollection::from_ranks(s, vec![2, 1, 2]).unwrap();
        assert!(is_equivariant(&c));
        assert!(!is_equivariant(
            &CoveringCollection::bottom_to_top(5).unwrap()
        ));

        let spiral = CoveringCollection::spiral(4).unwrap();
        assert!(!is_equivariant(&spiral));
        let invariant = spiral.invariant_indices();
        for end in spiral_ring_ends(4) {
            assert!(invariant.contains(&end), "{end} in {invariant:?}");
        }
    }

    #[test]
    fn spiral_small_cases() {
        let order = spiral_order(1);
        let counts: Vec<&[u32]> = order.iter().map(|x| x.counts()).collect();
        assert_eq!(counts, vec![&[1, 0, 0][..], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(spiral_ring_ends(1), vec![3]);

        let order = spiral_order(2);
        assert_eq!(order.len(), 6);
        assert!(order.iter().all(|x| x.counts().contains(&0)));

        let order = spiral_order(3);
        assert_eq!(order.len(), 10);
        assert_eq!(spiral_ring_ends(3), vec![9, 10]);
        assert!(order[..9].iter().all(|x| x.counts().contains(&0)));
        assert_eq!(order[9].counts(), &[1, 1, 1]);
    }

    #[test]
    fn spiral_visits_every_outcome_once() {
        for n in 0..=12 {
            let c = CoveringCollection::spiral(n).unwrap();
            assert_eq!(c.max_index() as usize, c.simplex().len());
            assert_eq!(spiral_order(n)[0].counts(), &[n, 0, 0]);
        }
    }

    #[test]
    fn text_round_trip() {
        let c = CoveringCollection::spiral(3).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("# covering-collection d=3 n=3 max_index=10\n"));
        assert!(text.contains("\n3,0,0 1\n"));
        let back = CoveringCollection::from_text(&text).unwrap();
        assert_eq!(back.ranks(), c.ranks());
        assert!(CoveringCollection::from_text("# covering-collection d=2 n=1\n0,1 1\n").is_err());
        assert!(CoveringCollection::from_text("# nothing\n").is_err());
    }

    #[test]
    fn permutations_enumerates_symmetric_group() {
        let mut p = permutations(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p[0], vec![0, 1, 2, 3]);
        p.sort();
        p.dedup();
        assert_eq!(p.len(), 24);
    }
}
