use std::fs;
use std::path::Path;

use clap::ValueEnum as _;

use multiconf::comparators::{
    clopper_pearson_interval_beta, clopper_pearson_interval_with,
    dirichlet_multinomial_identity_check, wald_interval, wilson_interval, Interval,
    SpecialFunctionConfig,
};
use multiconf::covering::{symmetrized_region, CoveringCollection};
use multiconf::eval::{compare, default_mesh, Comparison, MethodId};
use multiconf::levelset::{level_set_interval, region_grid_capped, RegionGrid, DEFAULT_WORK_CAP};
use multiconf::{OutcomeVector, ProbabilityVector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cli::{
    AntibioticArgs, Chi2Args, Cli, Command, DirichletArgs, IntervalArgs, IntervalMethod,
    OutputArgs, RegionArgs, SweepArgs,
};
use crate::error::CliError;
use crate::output::{Cell, Report, Table};
use crate::worked::{independence_example, susceptibility_example};

/// What a subcommand produced: the report and any warnings for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub warnings: Vec<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self {
            report,
            warnings: Vec::new(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Interval(a) => interval(a),
        Command::Region(a) => region(a).map(Into::into),
        Command::Sweep(a) => sweep(a).map(Into::into),
        Command::Chi2Example(a) => chi2_example(a).map(Into::into),
        Command::AntibioticExample(a) => antibiotic_example(a).map(Into::into),
        Command::DirichletCheck(a) => dirichlet_check(a).map(Into::into),
    }
}

pub fn output_args(cli: &Cli) -> &OutputArgs {
    match &cli.command {
        Command::Interval(a) => &a.out,
        Command::Region(a) => &a.out,
        Command::Sweep(a) => &a.out,
        Command::Chi2Example(a) => &a.out,
        Command::AntibioticExample(a) => &a.out,
        Command::DirichletCheck(a) => &a.out,
    }
}

/// Renders the report to `--output` (printing the summary) or to stdout.
pub fn emit(outcome: &Outcome, out: &OutputArgs) -> Result<String, CliError> {
    let bytes = outcome.report.render(out.format)?;
    match &out.output {
        Some(path) => {
            fs::write(path, &bytes).map_err(|e| CliError::io(path, e))?;
            Ok(outcome.report.summary_text())
        }
        None => Ok(String::from_utf8(bytes).expect("reports are UTF-8")),
    }
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn counts(values: &[u32], d: Option<usize>, n: Option<u32>) -> Result<OutcomeVector, CliError> {
    if values.len() < 2 {
        return Err(CliError::Usage("need at least two counts".into()));
    }
    if let Some(d) = d.filter(|&d| d != values.len()) {
        return Err(CliError::Usage(format!(
            "--d {d} but {} counts were given",
            values.len()
        )));
    }
    let x = OutcomeVector::new(values.to_vec())?;
    if let Some(n) = n.filter(|&n| n != x.n()) {
        return Err(CliError::Usage(format!(
            "--n {n} but the counts sum to {}",
            x.n()
        )));
    }
    Ok(x)
}

fn interval(a: &IntervalArgs) -> Result<Outcome, CliError> {
    check_alpha(a.alpha)?;
    if a.x > a.n {
        return Err(CliError::Usage(format!("--x {} exceeds --n {}", a.x, a.n)));
    }
    let cfg = SpecialFunctionConfig::default();
    let x = OutcomeVector::new(vec![a.x, a.n - a.x])?;
    let mut warnings = Vec::new();
    let mut boundary = false;
    let ci: Interval = match a.method {
        IntervalMethod::ClopperPearson => clopper_pearson_interval_with(a.x, a.n, a.alpha, &cfg)?,
        IntervalMethod::ClopperPearsonBeta => {
            clopper_pearson_interval_beta(a.x, a.n, a.alpha, &cfg)?
        }
        IntervalMethod::Wilson => wilson_interval(a.x, a.n, a.alpha)?,
        IntervalMethod::Wald => {
            let w = wald_interval(a.x, a.n, a.alpha)?;
            if w.boundary {
                boundary = true;
                warnings
                    .push("observation on the boundary: the Wald interval is degenerate".into());
            }
            w.interval
        }
        IntervalMethod::LevelSet => level_set_interval(&x, a.alpha, a.scan, &cfg)?
            .ok_or_else(|| CliError::Usage("the region holds no scan point".into()))?,
        IntervalMethod::CpMultinomial => {
            let c = CoveringCollection::bottom_to_top(a.n)?;
            symmetrized_region(&x, a.alpha, &c)?
                .first_coordinate_bounds(a.scan, &cfg)?
                .ok_or_else(|| CliError::Usage("the region holds no scan point".into()))?
        }
    };
    let mut r = Report::default();
    r.put(
        "method",
        a.method
            .to_possible_value()
            .map(|v| v.get_name().to_owned())
            .unwrap_or_default(),
    );
    r.put("x", a.x);
    r.put("n", a.n);
    r.put("alpha", a.alpha);
    r.put("lower", ci.lower);
    r.put("upper", ci.upper);
    r.put("width", ci.width());
    r.put("boundary", boundary);
    Ok(Outcome {
        report: r,
        warnings,
    })
}

fn put_bounds(r: &mut Report, bounds: &[Interval]) {
    for (i, b) in bounds.iter().enumerate() {
        r.put(&format!("p{}_min", i + 1), b.lower);
        r.put(&format!("p{}_max", i + 1), b.upper);
    }
}

fn points_table(grid: &RegionGrid, members_only: bool) -> Table {
    let d = grid.observed.dim();
    let mut t = Table::new(
        (1..=d)
            .map(|i| format!("p{i}"))
            .chain(["member".to_owned()]),
    );
    for (p, &m) in grid.points.iter().zip(&grid.membership) {
        if members_only && !m {
            continue;
        }
        let mut row: Vec<Cell> = p.entries().iter().map(|&v| Cell::Num(v)).collect();
        row.push(Cell::Bool(m));
        t.push(row);
    }
    t
}

fn region(a: &RegionArgs) -> Result<Report, CliError> {
    check_alpha(a.alpha)?;
    let x = counts(&a.counts.0, a.d, a.n)?;
    let mesh = a.mesh.unwrap_or_else(|| default_mesh(x.dim()));
    let grid = region_grid_capped(&x, a.alpha, mesh, a.max_work.unwrap_or(DEFAULT_WORK_CAP))?;
    let mut r = Report::default();
    r.put("counts", join(x.counts()));
    r.put("alpha", a.alpha);
    r.put("mesh", mesh);
    r.put("grid_points", grid.points.len());
    r.put("members", grid.member_count);
    r.put("volume", grid.volume);
    if let Some(w) = grid.width {
        r.put("width", w);
    }
    put_bounds(&mut r, &grid.coordinate_bounds);
    r.tables
        .push(("points".into(), points_table(&grid, a.members_only)));
    Ok(r)
}

fn join(values: &[u32]) -> String {
    values
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_method(name: &str, collection: Option<&Path>) -> Result<MethodId, CliError> {
    if name == "covering" {
        let path = collection
            .ok_or_else(|| CliError::Usage("method covering needs --collection".into()))?;
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok(MethodId::Covering(Box::new(CoveringCollection::from_text(
            &text,
        )?)));
    }
    name.parse::<MethodId>()
        .map_err(|_| CliError::Usage(format!("unknown method {name:?}")))
}

fn sweep(a: &SweepArgs) -> Result<Report, CliError> {
    check_alpha(a.alpha)?;
    if a.d < 2 {
        return Err(CliError::Usage("--d must be at least 2".into()));
    }
    let methods: Vec<MethodId> = a
        .methods
        .0
        .iter()
        .map(|m| parse_method(m, a.collection.as_deref()))
        .collect::<Result<_, _>>()?;
    let step = a.step.unwrap_or(if a.d == 2 { 0.01 } else { 0.05 });
    let mesh = a.mesh.unwrap_or_else(|| default_mesh(a.d));
    let cmp = compare(&methods, a.d, a.n, a.alpha, step, mesh)?;
    Ok(sweep_report(&cmp, step))
}

fn sweep_report(cmp: &Comparison, step: f64) -> Report {
    let mut r = Report::default();
    r.put("d", cmp.d);
    r.put("n", cmp.n);
    r.put("alpha", cmp.alpha);
    r.put("step", step);
    r.put("mesh", cmp.mesh);
    r.put(
        "volume_measure",
        if cmp.d == 2 {
            "width"
        } else {
            "projected volume"
        },
    );
    for (m, name) in cmp.methods.iter().enumerate() {
        let c = cmp.coverage_report(m);
        r.put(&format!("{name} min_coverage"), c.min());
        r.put(&format!("{name} violations"), c.violations(1e-10));
    }
    let coords: Vec<String> = (1..=cmp.d).map(|i| format!("p{i}")).collect();
    let volume = if cmp.d == 2 {
        "mean_width"
    } else {
        "mean_volume"
    };
    let mut results = Table::new(coords.iter().cloned().chain([
        "method".into(),
        "coverage".into(),
        volume.into(),
    ]));
    for (i, p) in cmp.points.iter().enumerate() {
        for (m, name) in cmp.methods.iter().enumerate() {
            let mut row = coordinates(p);
            row.extend([
                Cell::from(name.as_str()),
                cmp.coverage[m][i].into(),
                cmp.mean_volume[m][i].into(),
            ]);
            results.push(row);
        }
    }
    r.tables.push(("results".into(), results));
    let pairs = cmp.pairs();
    if !pairs.is_empty() {
        let mut diffs = Table::new(
            coords.into_iter().chain(
                [
                    "method_a",
                    "method_b",
                    "coverage_difference",
                    "volume_difference",
                ]
                .map(String::from),
            ),
        );
        for &(a, b) in &pairs {
            let dc = cmp.coverage_difference(a, b);
            let dv = cmp.volume_difference(a, b);
            for (i, p) in cmp.points.iter().enumerate() {
                let mut row = coordinates(p);
                row.extend([
                    Cell::from(cmp.methods[a].as_str()),
                    Cell::from(cmp.methods[b].as_str()),
                    dc[i].into(),
                    dv[i].into(),
                ]);
                diffs.push(row);
            }
        }
        r.tables.push(("differences".into(), diffs));
    }
    r
}

fn coordinates(p: &ProbabilityVector) -> Vec<Cell> {
    p.entries().iter().map(|&v| Cell::Num(v)).collect()
}

fn chi2_example(a: &Chi2Args) -> Result<Report, CliError> {
    check_alpha(a.alpha)?;
    let x = counts(&a.counts.0, Some(4), None)?;
    let e = independence_example(&x, a.alpha, a.mesh)?;
    let mut r = Report::default();
    r.put("counts", join(x.counts()));
    r.put("statistic", e.test.statistic);
    r.put("df", 1u32);
    r.put("p_value", e.test.p_value);
    r.put("test_rejects", e.test.p_value < a.alpha);
    r.put("alpha", a.alpha);
    r.put("mesh", a.mesh);
    r.put("members", e.grid.member_count);
    r.put("volume", e.grid.volume);
    r.put("surface_distance", e.surface_distance);
    r.put("region_intersects_h0", e.intersects_surface);
    r.put("region_rejects", !e.intersects_surface);
    r.put("interior_members", e.interior_members);
    r.put("boundary_members", e.boundary_members);
    if let Some(o) = e.odds_ratio {
        r.put("odds_ratio_lower", o.lower);
        r.put("odds_ratio_upper", o.upper);
    }
    Ok(r)
}

fn antibiotic_example(a: &AntibioticArgs) -> Result<Report, CliError> {
    check_alpha(a.alpha)?;
    let x = counts(&a.counts.0, Some(3), None)?;
    let s = susceptibility_example(&x, a.alpha, a.mesh)?;
    let mut r = Report::default();
    r.put("counts", join(x.counts()));
    r.put("alpha", a.alpha);
    r.put("mesh", a.mesh);
    r.put("members", s.grid.member_count);
    r.put("volume", s.grid.volume);
    r.put("contains_all_sensible", s.contains_first_vertex);
    if let [sensible, intermediate, resistant] = s.bounds.as_slice() {
        r.put("sensible_min", sensible.lower);
        r.put("intermediate_max", intermediate.upper);
        r.put("resistant_max", resistant.upper);
    }
    put_bounds(&mut r, &s.bounds);
    if a.points {
        r.tables
            .push(("points".into(), points_table(&s.grid, true)));
    }
    Ok(r)
}

fn dirichlet_check(a: &DirichletArgs) -> Result<Report, CliError> {
    let p = ProbabilityVector::new(a.p.0.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let c = dirichlet_multinomial_identity_check(&p, a.n, &a.thresholds.0, a.samples, &mut rng)?;
    let mut r = Report::default();
    r.put("n", a.n);
    r.put("thresholds", join(&a.thresholds.0));
    r.put("samples", a.samples);
    r.put("seed", a.seed.to_string());
    r.put("exact", c.exact);
    r.put("estimate", c.estimate);
    r.put("standard_error", c.standard_error);
    r.put("z", c.z_score());
    r.put("within_4_se", c.z_score() <= 4.0);
    Ok(r)
}
