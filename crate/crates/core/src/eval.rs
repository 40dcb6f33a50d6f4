//! Exact coverage and mean volume by enumeration.
//!
//! Every method is evaluated through its acceptance sets: for a parameter
//! `θ`, `C(θ) = {x : θ ∈ R(x)}`. Coverage at `p` is `μ_p(C(p))`. The volume
//! of each region `R(x)` is estimated on `simplex_grid(d, mesh)` by computing
//! `C(θ)` once per grid point and counting, per outcome, the grid points that
//! accept it. The mean volume at `p` is then `Σ μ_p(x) vol(R(x))`.
//!
//! Volumes use the Lebesgue measure of the projection onto the first `d - 1`
//! coordinates, so the whole simplex has volume `1 / (d - 1)!`. For `d = 2`
//! the volume is the interval width, taken from the extreme member abscissae.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::comparators::{
    clopper_pearson_interval, score_accepts, score_critical_value, wald_interval, wilson_interval,
    Interval,
};
use crate::covering::CoveringCollection;
use crate::error::{check_alpha, Error, Result};
use crate::levelset::{PmfKernel, Workspace, DEFAULT_WORK_CAP};
use crate::math;
use crate::par;
use crate::simplex::{
    projected_simplex_volume, simplex_cardinality, simplex_grid_capped, ProbabilityVector,
};

/// Default volume mesh for `d` categories.
pub fn default_mesh(d: usize) -> u32 {
    match d {
        0..=2 => 200,
        3 => 100,
        _ => 52,
    }
}

/// Outcome order generating the fully granular collection behind
/// [`MethodId::CpMultinomial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GranularOrder {
    Lexicographic,
    /// `d = 3` only.
    Spiral,
}

/// A confidence-region method under evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodId {
    LevelSet,
    LevelSetRefined,
    ClopperPearson,
    /// Symmetrized region of a fully granular collection. With the
    /// lexicographic order at `d = 2` this is Clopper-Pearson.
    CpMultinomial(GranularOrder),
    Wilson,
    Wald,
    Score,
    /// One-sided region `μ_θ(A_{k_x}) >= α` of a user collection.
    Covering(Box<CoveringCollection>),
}

impl MethodId {
    pub fn name(&self) -> String {
        match self {
            MethodId::LevelSet => "level-set".into(),
            MethodId::LevelSetRefined => "level-set-refined".into(),
            MethodId::ClopperPearson => "clopper-pearson".into(),
            MethodId::CpMultinomial(GranularOrder::Lexicographic) => {
                "cp-multinomial(lexicographic)".into()
            }
            MethodId::CpMultinomial(GranularOrder::Spiral) => "cp-multinomial(spiral)".into(),
            MethodId::Wilson => "wilson".into(),
            MethodId::Wald => "wald".into(),
            MethodId::Score => "score".into(),
            MethodId::Covering(_) => "covering(custom)".into(),
        }
    }

    /// Fails unless the method can produce regions for `d` categories and `n` draws.
    pub fn check_applicable(&self, d: usize, n: u32) -> Result<()> {
        let ok = match self {
            MethodId::ClopperPearson | MethodId::Wilson | MethodId::Wald => d == 2,
            MethodId::CpMultinomial(GranularOrder::Spiral) => d == 3,
            MethodId::Covering(c) => {
                if c.dim() == d && c.n() != n {
                    return Err(Error::InvalidCollection(format!(
                        "collection is for n = {}, not {n}",
                        c.n()
                    )));
                }
                c.dim() == d
            }
            _ => d >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Inapplicable {
                method: self.name(),
                d,
            })
        }
    }

    /// Whether the method commutes with relabeling the categories.
    pub fn is_equivariant(&self) -> bool {
        matches!(self, MethodId::LevelSet | MethodId::Score)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    /// Parses every method except custom collections, which need a file.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "level-set" => MethodId::LevelSet,
            "level-set-refined" => MethodId::LevelSetRefined,
            "clopper-pearson" => MethodId::ClopperPearson,
            "cp-multinomial" | "cp-multinomial(lexicographic)" | "cp-multinomial:lexicographic" => {
                MethodId::CpMultinomial(GranularOrder::Lexicographic)
            }
            "cp-multinomial(spiral)" | "cp-multinomial:spiral" => {
                MethodId::CpMultinomial(GranularOrder::Spiral)
            }
            "wilson" => MethodId::Wilson,
            "wald" => MethodId::Wald,
            "score" => MethodId::Score,
            other => return Err(Error::Parse(format!("unknown method {other:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
enum Acceptor {
    LevelSet {
        refined: bool,
    },
    /// Interval per `x_1`, tested against `θ_1`.
    Intervals(Vec<Interval>),
    Score {
        critical: f64,
    },
    Covering {
        ranks: Vec<u32>,
        max_index: u32,
        symmetric: bool,
    },
}

/// Per-thread buffers for [`Evaluator`].
#[derive(Debug, Clone)]
pub(crate) struct EvalWorkspace {
    inner: Workspace,
    accepted: Vec<bool>,
    scratch: Vec<f64>,
    by_rank: Vec<f64>,
}

/// A method bound to `(d, n, α)`, answering acceptance-set queries.
#[derive(Debug, Clone)]
pub struct Evaluator {
    method: MethodId,
    alpha: f64,
    kernel: PmfKernel,
    acceptor: Acceptor,
}

impl Evaluator {
    pub fn new(method: &MethodId, d: usize, n: u32, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        method.check_applicable(d, n)?;
        let kernel = PmfKernel::new(d, n)?;
        let intervals = |f: &dyn Fn(u32) -> Result<Interval>| -> Result<Acceptor> {
            Ok(Acceptor::Intervals((0..=n).map(f).collect::<Result<_>>()?))
        };
        let acceptor = match method {
            MethodId::LevelSet => Acceptor::LevelSet { refined: false },
            MethodId::LevelSetRefined => Acceptor::LevelSet { refined: true },
            MethodId::ClopperPearson => intervals(&|x1| clopper_pearson_interval(x1, n, alpha))?,
            MethodId::Wilson => intervals(&|x1| wilson_interval(x1, n, alpha))?,
            MethodId::Wald => intervals(&|x1| Ok(wald_interval(x1, n, alpha)?.interval))?,
            MethodId::Score => Acceptor::Score {
                critical: score_critical_value(d, alpha)?,
            },
            MethodId::CpMultinomial(order) => {
                let c = match order {
                    GranularOrder::Lexicographic => CoveringCollection::lexicographic(d, n)?,
                    GranularOrder::Spiral => CoveringCollection::spiral(n)?,
                };
                Acceptor::Covering {
                    ranks: c.ranks().to_vec(),
                    max_index: c.max_index(),
                    symmetric: true,
                }
            }
            MethodId::Covering(c) => Acceptor::Covering {
                ranks: c.ranks().to_vec(),
                max_index: c.max_index(),
                symmetric: false,
            },
        };
        Ok(Self {
            method: method.clone(),
            alpha,
            kernel,
            acceptor,
        })
    }

    pub fn method(&self) -> &MethodId {
        &self.method
    }

    pub fn dim(&self) -> usize {
        self.kernel.simplex().dim()
    }

    pub fn n(&self) -> u32 {
        self.kernel.simplex().n()
    }

    pub(crate) fn workspace(&self) -> EvalWorkspace {
        let max_index = match &self.acceptor {
            Acceptor::Covering { max_index, .. } => *max_index as usize,
            _ => 0,
        };
        EvalWorkspace {
            inner: self.kernel.workspace(),
            accepted: vec![false; self.kernel.simplex().len()],
            scratch: vec![0.0; self.dim()],
            by_rank: vec![0.0; max_index + 2],
        }
    }

    /// Fills `ws.accepted` with `C(θ)` and `ws.inner.log_pmf` with `ln μ_θ`.
    pub(crate) fn accept(&self, theta: &[f64], ws: &mut EvalWorkspace) {
        let simplex = self.kernel.simplex();
        match &self.acceptor {
            Acceptor::LevelSet { refined } => {
                let tier = self
                    .kernel
                    .accept(theta, self.alpha, &mut ws.inner, &mut ws.accepted);
                if *refined {
                    if let Some(swap) = self.kernel.refine(&tier, self.alpha, &ws.inner) {
                        ws.accepted[swap.removed as usize] = false;
                        ws.accepted[swap.added as usize] = true;
                    }
                }
            }
            Acceptor::Intervals(intervals) => {
                self.kernel.fill(theta, &mut ws.inner);
                for (a, x) in ws.accepted.iter_mut().zip(simplex.iter()) {
                    *a = intervals[x.counts()[0] as usize].contains(theta[0]);
                }
            }
            Acceptor::Score { critical } => {
                self.kernel.fill(theta, &mut ws.inner);
                for (a, x) in ws.accepted.iter_mut().zip(simplex.iter()) {
                    *a = score_accepts(theta, x.counts(), x.n(), *critical, &mut ws.scratch);
                }
            }
            Acceptor::Covering {
                ranks,
                max_index,
                symmetric,
            } => {
                self.kernel.fill(theta, &mut ws.inner);
                let kappa = *max_index as usize;
                let by_rank = &mut ws.by_rank;
                by_rank.iter_mut().for_each(|m| *m = 0.0);
                for (&r, &lp) in ranks.iter().zip(&ws.inner.log_pmf) {
                    by_rank[r as usize] += math::exp(lp);
                }
                // lower[k] = μ(A_k) and upper[k] = μ({rank >= k}), each summed
                // from its own small end
                let mut lower = vec![0.0; kappa + 2];
                let mut upper = vec![0.0; kappa + 2];
                for k in 1..=kappa {
                    lower[k] = lower[k - 1] + by_rank[k];
                }
                for k in (1..=kappa).rev() {
                    upper[k] = upper[k + 1] + by_rank[k];
                }
                for (a, &r) in ws.accepted.iter_mut().zip(ranks) {
                    let r = r as usize;
                    *a = if *symmetric {
                        lower[r] >= 0.5 * self.alpha && upper[r] >= 0.5 * self.alpha
                    } else {
                        lower[r] >= self.alpha
                    };
                }
            }
        }
    }

    fn coverage_with(&self, theta: &[f64], ws: &mut EvalWorkspace) -> f64 {
        self.accept(theta, ws);
        ws.accepted
            .iter()
            .zip(&ws.inner.log_pmf)
            .filter(|(&a, _)| a)
            .map(|(_, &lp)| math::exp(lp))
            .sum()
    }

    /// `Σ_x μ_p(x) 1[p ∈ R(x)]`.
    pub fn coverage(&self, p: &ProbabilityVector) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self.coverage_with(p.entries(), &mut self.workspace()))
    }

    /// `C(θ)` as flags over the simplex in lexicographic order.
    pub fn acceptance(&self, theta: &ProbabilityVector) -> Result<Vec<bool>> {
        self.check_dim(theta)?;
        let mut ws = self.workspace();
        self.accept(theta.entries(), &mut ws);
        Ok(ws.accepted)
    }

    fn check_dim(&self, p: &ProbabilityVector) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(())
    }

    /// Grid volume of every region `R(x)`, with the default work cap.
    pub fn volume_atlas(&self, mesh: u32) -> Result<VolumeAtlas> {
        self.volume_atlas_capped(mesh, DEFAULT_WORK_CAP)
    }

    pub fn volume_atlas_capped(&self, mesh: u32, cap: u128) -> Result<VolumeAtlas> {
        if mesh < 10 {
            return Err(Error::InvalidArgument(format!(
                "volume mesh must be at least 10, got {mesh}"
            )));
        }
        let d = self.dim();
        let len = self.kernel.simplex().len();
        let grid_size = simplex_cardinality(d, mesh).unwrap_or(u128::MAX);
        let work = grid_size.saturating_mul(len as u128);
        if work > cap {
            return Err(Error::ResourceCap {
                required: work,
                cap,
            });
        }
        let grid = simplex_grid_capped(d, mesh, grid_size)?;
        let mut counts = vec![0u64; len];
        let mut lo = vec![f64::INFINITY; len];
        let mut hi = vec![f64::NEG_INFINITY; len];
        // chunks bound the memory held by per-point acceptance flags
        const CHUNK: usize = 2048;
        for start in (0..grid.len()).step_by(CHUNK) {
            let end = (start + CHUNK).min(grid.len());
            let flags = par::map_indexed(
                end - start,
                || self.workspace(),
                |ws, i| {
                    self.accept(grid[start + i].entries(), ws);
                    ws.accepted.clone()
                },
            );
            for (theta, f) in grid[start..end].iter().zip(&flags) {
                let t = theta.entries()[0];
                for (j, _) in f.iter().enumerate().filter(|(_, &a)| a) {
                    counts[j] += 1;
                    lo[j] = lo[j].min(t);
                    hi[j] = hi[j].max(t);
                }
            }
        }
        let (scale, relative) = if d == 2 {
            let widths = (0..len)
                .map(|j| if counts[j] == 0 { 0.0 } else { hi[j] - lo[j] })
                .collect();
            (1.0, widths)
        } else {
            let g = grid.len() as f64;
            (
                projected_simplex_volume(d),
                counts.iter().map(|&c| c as f64 / g).collect(),
            )
        };
        Ok(VolumeAtlas {
            d,
            n: self.n(),
            mesh,
            grid_points: grid.len(),
            member_counts: counts,
            relative,
            scale,
        })
    }
}

/// Estimated volume of `R(x)` for every outcome `x`, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeAtlas {
    pub d: usize,
    pub n: u32,
    pub mesh: u32,
    pub grid_points: usize,
    /// Grid points accepting each outcome.
    pub member_counts: Vec<u64>,
    /// Member fraction per outcome, or the width when `d = 2`.
    relative: Vec<f64>,
    scale: f64,
}

impl VolumeAtlas {
    /// Estimated volume of `R(x)` per outcome.
    pub fn volumes(&self) -> Vec<f64> {
        self.relative.iter().map(|&r| r * self.scale).collect()
    }

    /// `Σ_x μ_p(x) vol(R(x))`.
    pub fn mean_volume(&self, p: &ProbabilityVector) -> Result<f64> {
        if p.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: p.dim(),
            });
        }
        let kernel = PmfKernel::new(self.d, self.n)?;
        let mut ws = kernel.workspace();
        Ok(self.mean_with(&kernel, p.entries(), &mut ws))
    }

    fn mean_with(&self, kernel: &PmfKernel, p: &[f64], ws: &mut Workspace) -> f64 {
        kernel.fill(p, ws);
        // dividing by the summed pmf keeps a constant volume exact
        let mut total = 0.0;
        let mut weighted = 0.0;
        for (&lp, &r) in ws.log_pmf.iter().zip(&self.relative) {
            let m = math::exp(lp);
            total += m;
            weighted += m * r;
        }
        weighted / total * self.scale
    }
}

pub fn exact_coverage(method: &MethodId, p: &ProbabilityVector, n: u32, alpha: f64) -> Result<f64> {
    Evaluator::new(method, p.dim(), n, alpha)?.coverage(p)
}

pub fn mean_volume(
    method: &MethodId,
    p: &ProbabilityVector,
    n: u32,
    alpha: f64,
    mesh: u32,
) -> Result<f64> {
    Evaluator::new(method, p.dim(), n, alpha)?
        .volume_atlas(mesh)?
        .mean_volume(p)
}

/// Grid of parameters for coverage curves: `p_1 = i / m` for `p_1 <= 1/2`
/// when `d = 2`, otherwise `simplex_grid(d, m)`, with `m = round(1 / step)`.
pub fn coverage_grid(d: usize, step: f64) -> Result<Vec<ProbabilityVector>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, 1], got {step}"
        )));
    }
    let mesh = math::round(1.0 / step) as u32;
    if d == 2 {
        let m = f64::from(mesh);
        (0..=mesh / 2)
            .map(|i| ProbabilityVector::new(vec![f64::from(i) / m, f64::from(mesh - i) / m]))
            .collect()
    } else {
        crate::simplex::simplex_grid(d, mesh)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub method: String,
    pub d: usize,
    pub n: u32,
    pub alpha: f64,
    pub points: Vec<ProbabilityVector>,
    /// Exact coverage per point.
    pub coverage: Vec<f64>,
}

impl CoverageReport {
    pub fn min(&self) -> f64 {
        self.coverage.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.coverage
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lower median.
    pub fn median(&self) -> f64 {
        let mut v = self.coverage.clone();
        v.sort_by(f64::total_cmp);
        v.get(v.len().saturating_sub(1) / 2)
            .copied()
            .unwrap_or(f64::NAN)
    }

    /// Points with coverage below `1 - α - tol`.
    pub fn violations(&self, tol: f64) -> usize {
        self.coverage
            .iter()
            .filter(|&&c| c < 1.0 - self.alpha - tol)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeReport {
    pub method: String,
    pub d: usize,
    pub n: u32,
    pub alpha: f64,
    pub mesh: u32,
    pub points: Vec<ProbabilityVector>,
    /// Mean volume per point; the mean width when `d = 2`.
    pub mean_volume: Vec<f64>,
}

impl VolumeReport {
    pub fn is_width(&self) -> bool {
        self.d == 2
    }
}

pub fn coverage_curve(
    method: &MethodId,
    d: usize,
    n: u32,
    alpha: f64,
    step: f64,
) -> Result<CoverageReport> {
    coverage_at(method, d, n, alpha, coverage_grid(d, step)?)
}

/// Exact coverage of `method` at each of `points`.
pub fn coverage_at(
    method: &MethodId,
    d: usize,
    n: u32,
    alpha: f64,
    points: Vec<ProbabilityVector>,
) -> Result<CoverageReport> {
    let ev = Evaluator::new(method, d, n, alpha)?;
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.dim(),
        });
    }
    let coverage = par::map_indexed(
        points.len(),
        || ev.workspace(),
        |ws, i| ev.coverage_with(points[i].entries(), ws),
    );
    Ok(CoverageReport {
        method: method.name(),
        d,
        n,
        alpha,
        points,
        coverage,
    })
}

pub fn volume_curve(
    method: &MethodId,
    d: usize,
    n: u32,
    alpha: f64,
    mesh: u32,
    points: Vec<ProbabilityVector>,
) -> Result<VolumeReport> {
    let ev = Evaluator::new(method, d, n, alpha)?;
    let atlas = ev.volume_atlas(mesh)?;
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.dim(),
        });
    }
    let mut ws = ev.kernel.workspace();
    let mean_volume = points
        .iter()
        .map(|p| atlas.mean_with(&ev.kernel, p.entries(), &mut ws))
        .collect();
    Ok(VolumeReport {
        method: method.name(),
        d,
        n,
        alpha,
        mesh,
        points,
        mean_volume,
    })
}

/// Coverage and mean volume of several methods on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub methods: Vec<String>,
    pub d: usize,
    pub n: u32,
    pub alpha: f64,
    pub mesh: u32,
    pub points: Vec<ProbabilityVector>,
    /// `coverage[m][i]` for method `m` at point `i`.
    pub coverage: Vec<Vec<f64>>,
    pub mean_volume: Vec<Vec<f64>>,
}

impl Comparison {
    /// Method index pairs `(a, b)` with `a < b`, in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let m = self.methods.len();
        (0..m)
            .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
            .collect()
    }

    /// `mean_volume[a][i] - mean_volume[b][i]` for every point.
    pub fn volume_difference(&self, a: usize, b: usize) -> Vec<f64> {
        self.mean_volume[a]
            .iter()
            .zip(&self.mean_volume[b])
            .map(|(x, y)| x - y)
            .collect()
    }

    pub fn coverage_difference(&self, a: usize, b: usize) -> Vec<f64> {
        self.coverage[a]
            .iter()
            .zip(&self.coverage[b])
            .map(|(x, y)| x - y)
            .collect()
    }

    pub fn coverage_report(&self, m: usize) -> CoverageReport {
        CoverageReport {
            method: self.methods[m].clone(),
            d: self.d,
            n: self.n,
            alpha: self.alpha,
            points: self.points.clone(),
            coverage: self.coverage[m].clone(),
        }
    }
}

/// Evaluates every method on the coverage grid of `step`, with volumes on
/// `simplex_grid(d, mesh)`. Fails before any work if a method is inapplicable.
pub fn compare(
    methods: &[MethodId],
    d: usize,
    n: u32,
    alpha: f64,
    step: f64,
    mesh: u32,
) -> Result<Comparison> {
    if methods.is_empty() {
        return Err(Error::InvalidArgument("no methods to compare".into()));
    }
    check_alpha(alpha)?;
    for m in methods {
        m.check_applicable(d, n)?;
    }
    let points = coverage_grid(d, step)?;
    let mut coverage = Vec::with_capacity(methods.len());
    let mut mean_volume = Vec::with_capacity(methods.len());
    for m in methods {
        coverage.push(coverage_at(m, d, n, alpha, points.clone())?.coverage);
        mean_volume.push(volume_curve(m, d, n, alpha, mesh, points.clone())?.mean_volume);
    }
    Ok(Comparison {
        methods: methods.iter().map(MethodId::name).collect(),
        d,
        n,
        alpha,
        mesh,
        points,
        coverage,
        mean_volume,
    })
}
