use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "multiconf",
    version,
    about = "Exact small-sample confidence regions for multinomial proportions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binomial interval for x successes out of n
    Interval(IntervalArgs),
    /// Level-set region of a count vector on a barycentric grid
    Region(RegionArgs),
    /// Exact coverage and mean volume of several methods over a parameter grid
    Sweep(SweepArgs),
    /// Independence test of a 2x2 table against its level-set region
    #[command(name = "chi2-example")]
    Chi2Example(Chi2Args),
    /// Level-set region for a trinomial susceptibility count
    #[command(name = "antibiotic-example")]
    AntibioticExample(AntibioticArgs),
    /// Monte-Carlo check of the Dirichlet-Multinomial tail identity
    #[command(name = "dirichlet-check")]
    DirichletCheck(DirichletArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report here and print only the summary
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntervalMethod {
    ClopperPearson,
    /// Clopper-Pearson through Beta quantiles
    ClopperPearsonBeta,
    Wilson,
    Wald,
    LevelSet,
    /// Symmetrized bottom-to-top covering collection
    CpMultinomial,
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[arg(long, value_enum)]
    pub method: IntervalMethod,
    #[arg(long)]
    pub n: u32,
    /// Successes in the first category
    #[arg(long)]
    pub x: u32,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Scan points used to locate region boundaries before bisection
    #[arg(long, default_value_t = 2000)]
    pub scan: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Comma-separated counts, e.g. 8,2,0
    #[arg(long, value_parser = parse_list::<u32>)]
    pub counts: List<u32>,
    /// Expected number of categories, checked against the counts
    #[arg(long)]
    pub d: Option<usize>,
    /// Expected sample size, checked against the counts
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Grid mesh; defaults to 200, 100 or 52 for d = 2, 3 or more
    #[arg(long)]
    pub mesh: Option<u32>,
    /// Emit only member grid points
    #[arg(long)]
    pub members_only: bool,
    /// Cap on grid points times outcomes
    #[arg(long)]
    pub max_work: Option<u128>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: u32,
    /// Comma-separated methods: level-set, level-set-refined, clopper-pearson,
    /// cp-multinomial, cp-multinomial(spiral), wilson, wald, score, covering
    #[arg(long, value_parser = parse_list::<String>)]
    pub methods: List<String>,
    /// Parameter grid step; defaults to 0.01 for d = 2 and 0.05 otherwise
    #[arg(long)]
    pub step: Option<f64>,
    /// Volume grid mesh; defaults to 200, 100 or 52 for d = 2, 3 or more
    #[arg(long)]
    pub mesh: Option<u32>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Covering collection file for the `covering` method
    #[arg(long)]
    pub collection: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Chi2Args {
    /// The 2x2 table row by row
    #[arg(long, value_parser = parse_list::<u32>, default_value = "3,8,10,5")]
    pub counts: List<u32>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 52)]
    pub mesh: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AntibioticArgs {
    /// Sensible, intermediate and resistant isolates
    #[arg(long, value_parser = parse_list::<u32>, default_value = "8,2,0")]
    pub counts: List<u32>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100)]
    pub mesh: u32,
    /// Include the member grid points
    #[arg(long)]
    pub points: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DirichletArgs {
    /// Multinomial probabilities
    #[arg(long, value_parser = parse_list::<f64>)]
    pub p: List<f64>,
    #[arg(long)]
    pub n: u32,
    /// Non-decreasing partial-sum thresholds, one fewer than the categories
    #[arg(long, value_parser = parse_list::<u32>)]
    pub thresholds: List<u32>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A comma-separated argument.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

pub fn parse_list<T: FromStr>(s: &str) -> Result<List<T>, String>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(items))
}
