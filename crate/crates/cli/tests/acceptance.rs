//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs with its own harness so the verdicts print under plain `cargo test`.
//! The process fails if any criterion fails.

// `ensure!` negates its condition, which should also fail on NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic;
use std::time::{Duration, Instant};

use multiconf::comparators::{
    beta_binomial_identity_check, clopper_pearson_interval, dirichlet_multinomial_identity_check,
    score_region_contains, SpecialFunctionConfig,
};
use multiconf::covering::{is_equivariant, symmetrized_region, CoveringCollection};
use multiconf::eval::{coverage_curve, MethodId};
use multiconf::levelset::{acceptance_set, refine_acceptance_set, region_contains, LevelSetRegion};
use multiconf::{enumerate_simplex, log_pmf, LogFactorialTable, OutcomeVector, ProbabilityVector};
use multiconf_cli::worked::{independence_example, susceptibility_example};
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("level-set coverage guarantee, d=2", coverage_guarantee),
        ("coverage identity", coverage_identity),
        ("score coverage deficit", score_deficit),
        ("level-set coverage, d=3", trinomial_coverage),
        (
            "Clopper-Pearson from covering collections",
            clopper_pearson_reproduction,
        ),
        ("Beta-Binomial identity", beta_binomial),
        ("Dirichlet-Multinomial identity", dirichlet_multinomial),
        ("chi-square independence example", chi2_example),
        ("antibiotic example", antibiotic_example),
        ("MLE membership", mle_membership),
        ("minimal cardinality", minimal_cardinality),
        ("refinement sandwich", refinement_sandwich),
        ("equivariance", equivariance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name}: {detail} ({secs:.2} s)",
                i + 1
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {name}: {detail} ({secs:.2} s)",
                    i + 1
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

const ALPHA: f64 = 0.05;

fn pv(v: Vec<f64>) -> ProbabilityVector {
    ProbabilityVector::new(v).unwrap()
}

fn binomial_grid() -> Vec<ProbabilityVector> {
    (0..=50u32)
        .map(|i| pv(vec![f64::from(i) / 100.0, f64::from(100 - i) / 100.0]))
        .collect()
}

fn coverage_guarantee() -> Verdict {
    let start = Instant::now();
    let mut points = 0;
    let mut worst = f64::INFINITY;
    for n in [5, 10, 20, 30] {
        let r =
            coverage_curve(&MethodId::LevelSet, 2, n, ALPHA, 0.01).map_err(|e| e.to_string())?;
        ensure!(
            r.points.len() == 51,
            "expected 51 grid points, got {}",
            r.points.len()
        );
        ensure!(
            r.violations(1e-10) == 0,
            "n={n}: {} violations, min {}",
            r.violations(1e-10),
            r.min()
        );
        points += r.points.len();
        worst = worst.min(r.min());
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "0 violations over {points} points, min coverage {worst:.6}"
    ))
}

/// Sum of `μ_p(x)` over the outcomes whose own region contains `p`.
fn enumerated_coverage(p: &ProbabilityVector, n: u32) -> f64 {
    let table = LogFactorialTable::new(n);
    enumerate_simplex(p.dim(), n)
        .unwrap()
        .iter()
        .filter(|x| LevelSetRegion::new(x, ALPHA).unwrap().contains(p).unwrap())
        .map(|x| log_pmf(p, x, &table).unwrap().exp())
        .sum()
}

fn coverage_identity() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for n in [5, 10, 20, 30] {
        for p in binomial_grid() {
            let mass = acceptance_set(&p, ALPHA, n).unwrap().mass;
            let diff = (enumerated_coverage(&p, n) - mass).abs();
            ensure!(
                diff <= 1e-12,
                "n={n} p={:?}: difference {diff:e}",
                p.entries()
            );
            worst = worst.max(diff);
            points += 1;
        }
    }
    Ok(format!("{points} points, max difference {worst:.1e}"))
}

fn score_deficit() -> Verdict {
    let binomial =
        coverage_curve(&MethodId::Score, 2, 10, ALPHA, 0.01).map_err(|e| e.to_string())?;
    ensure!(binomial.min() < 0.95, "d=2 min coverage {}", binomial.min());
    let trinomial =
        coverage_curve(&MethodId::Score, 3, 5, ALPHA, 0.05).map_err(|e| e.to_string())?;
    ensure!(
        trinomial.min() < 0.95,
        "d=3 min coverage {}",
        trinomial.min()
    );
    Ok(format!(
        "min coverage {:.4} (d=2, n=10), {:.4} (d=3, n=5)",
        binomial.min(),
        trinomial.min()
    ))
}

fn trinomial_coverage() -> Verdict {
    let mut out = Vec::new();
    for n in [5, 10] {
        let r =
            coverage_curve(&MethodId::LevelSet, 3, n, ALPHA, 0.05).map_err(|e| e.to_string())?;
        ensure!(r.violations(1e-10) == 0, "n={n}: min {}", r.min());
        ensure!(r.max() <= 1.0 + 1e-10, "n={n}: max {}", r.max());
        ensure!(r.median() <= 0.99, "n={n}: median {}", r.median());
        out.push(format!("n={n} min {:.4} median {:.4}", r.min(), r.median()));
    }
    Ok(out.join(", "))
}

fn clopper_pearson_reproduction() -> Verdict {
    let cfg = SpecialFunctionConfig::default();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=30u32 {
        let c = CoveringCollection::bottom_to_top(n).unwrap();
        for x1 in 0..=n {
            let x = OutcomeVector::new(vec![x1, n - x1]).unwrap();
            let region = symmetrized_region(&x, ALPHA, &c).unwrap();
            let got = region
                .first_coordinate_bounds(1000, &cfg)
                .map_err(|e| e.to_string())?
                .ok_or("empty region")?;
            let cp = clopper_pearson_interval(x1, n, ALPHA).unwrap();
            let diff = (got.lower - cp.lower)
                .abs()
                .max((got.upper - cp.upper).abs());
            ensure!(diff <= 1e-8, "x1={x1} n={n}: {got:?} vs {cp:?}");
            worst = worst.max(diff);
            count += 1;
        }
    }
    Ok(format!(
        "{count} intervals, max endpoint difference {worst:.1e}"
    ))
}

fn beta_binomial() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=30u32 {
        for k in 1..=n {
            for j in 1..=19u32 {
                let p1 = f64::from(j) * 0.05;
                let diff = beta_binomial_identity_check(n, k, p1).map_err(|e| e.to_string())?;
                ensure!(diff < 1e-10, "n={n} k={k} p1={p1}: {diff:e}");
                worst = worst.max(diff);
                count += 1;
            }
        }
    }
    Ok(format!("{count} cases, max discrepancy {worst:.1e}"))
}

fn dirichlet_multinomial() -> Verdict {
    let cases: [(&[f64], u32, &[u32]); 10] = [
        (&[0.3, 0.7], 5, &[2]),
        (&[0.55, 0.45], 8, &[5]),
        (&[0.1, 0.9], 3, &[1]),
        (&[0.2, 0.3, 0.5], 6, &[1, 3]),
        (&[0.5, 0.25, 0.25], 8, &[4, 6]),
        (&[0.6, 0.1, 0.3], 4, &[2, 2]),
        (&[0.15, 0.35, 0.5], 7, &[0, 3]),
        (&[0.25, 0.25, 0.25, 0.25], 8, &[2, 4, 6]),
        (&[0.1, 0.2, 0.3, 0.4], 6, &[1, 2, 4]),
        (&[0.4, 0.05, 0.05, 0.5], 5, &[2, 3, 3]),
    ];
    let mut worst: f64 = 0.0;
    for (seed, (p, n, k)) in cases.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed as u64);
        let c = dirichlet_multinomial_identity_check(&pv(p.to_vec()), *n, k, 1_000_000, &mut rng)
            .map_err(|e| e.to_string())?;
        ensure!(
            c.z_score() <= 4.0,
            "case {seed}: exact {} estimate {} ({:.2} se)",
            c.exact,
            c.estimate,
            c.z_score()
        );
        worst = worst.max(c.z_score());
    }
    Ok(format!("10 cases of 10^6 samples, max |z| {worst:.2}"))
}

fn chi2_example() -> Verdict {
    let start = Instant::now();
    let x = OutcomeVector::new(vec![3, 8, 10, 5]).unwrap();
    let r = independence_example(&x, ALPHA, 52).map_err(|e| e.to_string())?;
    ensure!(
        (r.test.statistic - 3.9394).abs() <= 5e-4,
        "statistic {}",
        r.test.statistic
    );
    ensure!(
        (r.test.p_value - 0.047).abs() <= 1e-3,
        "p-value {}",
        r.test.p_value
    );
    ensure!(
        r.intersects_surface,
        "region misses H0 (distance {})",
        r.surface_distance
    );
    let or = r.odds_ratio.ok_or("no interior members")?;
    ensure!(
        (or.lower - 0.024).abs() <= 0.10,
        "odds-ratio lower {}",
        or.lower
    );
    ensure!(
        (or.upper - 1.712).abs() <= 0.20,
        "odds-ratio upper {}",
        or.upper
    );
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!(
        "statistic {:.4}, p-value {:.4}, meets H0, odds ratio [{:.4}, {:.4}]",
        r.test.statistic, r.test.p_value, or.lower, or.upper
    ))
}

fn antibiotic_example() -> Verdict {
    let x = OutcomeVector::new(vec![8, 2, 0]).unwrap();
    let r = susceptibility_example(&x, ALPHA, 100).map_err(|e| e.to_string())?;
    ensure!(
        !r.contains_first_vertex,
        "region holds the all-sensible vertex"
    );
    let resistant = r.bounds[2].upper;
    ensure!(
        (resistant - 0.30).abs() <= 0.05,
        "max resistant {resistant}"
    );
    Ok(format!(
        "all-sensible vertex excluded, max resistant {resistant:.2}"
    ))
}

fn mle_membership() -> Verdict {
    let e = enumerate_simplex(3, 10).unwrap();
    for alpha in [0.01, 0.05, 0.10] {
        for x in e.iter() {
            let mle = ProbabilityVector::from_counts(x).unwrap();
            ensure!(
                region_contains(&mle, x, alpha).unwrap(),
                "{:?} at alpha {alpha}",
                x.counts()
            );
        }
    }
    Ok(format!("{} outcomes at 3 levels", e.len()))
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// A random case small enough for subset enumeration, with no tie at the
/// threshold.
fn random_case(rng: &mut ChaCha8Rng) -> (ProbabilityVector, u32) {
    loop {
        let d = 2 + (rng.next_u64() % 2) as usize;
        let max_n = if d == 2 { 10 } else { 4 };
        let n = 1 + (rng.next_u64() % max_n) as u32;
        let w: Vec<f64> = (0..d).map(|_| uniform(rng) + 0.01).collect();
        let p = ProbabilityVector::normalized(w).unwrap();
        let k = acceptance_set(&p, ALPHA, n).unwrap();
        let table = LogFactorialTable::new(n);
        let tied = enumerate_simplex(d, n)
            .unwrap()
            .iter()
            .filter(|x| (log_pmf(&p, x, &table).unwrap() - k.log_threshold).abs() <= 1e-9)
            .count();
        if tied == 1 {
            return (p, n);
        }
    }
}

fn minimal_cardinality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut subsets = 0u64;
    for case in 0..50 {
        let (p, n) = random_case(&mut rng);
        let k = acceptance_set(&p, ALPHA, n).unwrap();
        let table = LogFactorialTable::new(n);
        let masses: Vec<f64> = enumerate_simplex(p.dim(), n)
            .unwrap()
            .iter()
            .map(|x| log_pmf(&p, x, &table).unwrap().exp())
            .collect();
        ensure!(
            masses.len() <= 16,
            "case {case}: {} outcomes is too many to enumerate",
            masses.len()
        );
        for mask in 0u32..(1 << masses.len()) {
            if (mask.count_ones() as usize) >= k.len() {
                continue;
            }
            subsets += 1;
            let mass: f64 = (0..masses.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| masses[i])
                .sum();
            ensure!(
                mass < 1.0 - ALPHA,
                "case {case}: subset of size {} has mass {mass} >= 1 - alpha, K has {}",
                mask.count_ones(),
                k.len()
            );
        }
    }
    Ok(format!(
        "50 cases, {subsets} smaller subsets all below 1 - alpha"
    ))
}

fn refinement_sandwich() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut refined = 0;
    let mut shapes = Vec::new();
    for case in 0..50 {
        let (p, n) = random_case(&mut rng);
        let r = refine_acceptance_set(&p, ALPHA, n).unwrap();
        ensure!(
            r.mass >= 1.0 - ALPHA - 1e-12,
            "case {case}: refined mass {}",
            r.mass
        );
        ensure!(
            r.mass <= r.base.mass + 1e-12,
            "case {case}: refined {} above base {}",
            r.mass,
            r.base.mass
        );
        refined += usize::from(r.is_refined());
        if !shapes.contains(&(p.dim(), n)) {
            shapes.push((p.dim(), n));
        }
    }
    for &(d, n) in &shapes {
        let c = coverage_curve(&MethodId::LevelSetRefined, d, n, ALPHA, 0.05)
            .map_err(|e| e.to_string())?;
        ensure!(
            c.violations(1e-10) == 0,
            "d={d} n={n}: refined coverage min {}",
            c.min()
        );
    }
    Ok(format!(
        "50 cases ({refined} refined), coverage held on {} (d, n) grids",
        shapes.len()
    ))
}

fn equivariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut members = 0;
    for trial in 0..20 {
        let d = 3 + (rng.next_u64() % 2) as usize;
        let n = 2 + (rng.next_u64() % 7) as u32;
        let e = enumerate_simplex(d, n).unwrap();
        let x = e.outcomes()[(rng.next_u64() % e.len() as u64) as usize].clone();
        // start from the MLE half the time so members are well represented
        let w: Vec<f64> = (0..d)
            .map(|i| {
                if trial % 2 == 0 {
                    f64::from(x.counts()[i]) + 0.5 * uniform(&mut rng)
                } else {
                    uniform(&mut rng)
                }
            })
            .map(|v| v + 1e-3)
            .collect();
        let theta = ProbabilityVector::normalized(w).unwrap();
        let mut perm: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            perm.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
        }
        let (tp, xp) = (theta.permuted(&perm), x.permuted(&perm));
        let level = region_contains(&theta, &x, ALPHA).unwrap();
        ensure!(
            level == region_contains(&tp, &xp, ALPHA).unwrap(),
            "level-set, trial {trial}"
        );
        let score = score_region_contains(&theta, &x, ALPHA).unwrap();
        ensure!(
            score == score_region_contains(&tp, &xp, ALPHA).unwrap(),
            "score, trial {trial}"
        );
        members += usize::from(level) + usize::from(score);
    }
    let control = CoveringCollection::bottom_to_top(6).unwrap();
    ensure!(
        !is_equivariant(&control),
        "bottom-to-top collection reported equivariant"
    );
    Ok(format!(
        "20 trials ({members} memberships), bottom-to-top control is not equivariant"
    ))
}
