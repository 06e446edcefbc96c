//! Ratio trials and timing runs shared by the command line and the tests.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, ParamError};
use crate::generate::{gen_gnp, gen_random_tree, gen_star_heavy, rng_from_seed, GenSpec};
use crate::graph::Graph;
use crate::oracle::{min_1star_partition, min_star_partition};
use crate::partition::count_1stars;
use crate::search::approx1;
use crate::verify::{verify, Constants, VerifyStatus};

/// Leading column of every CSV written here.
pub const CSV_FORMAT_VERSION: u32 = 1;

/// One ratio trial. Timing columns come last; everything before them is
/// deterministic for a given seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub format_version: u32,
    pub trial: usize,
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alg_stars: usize,
    pub alg_one_stars: usize,
    pub opt_stars: Option<usize>,
    pub opt_one_stars: Option<usize>,
    pub min_one_stars: Option<usize>,
    /// `alg_stars / opt_stars` in lowest terms.
    pub ratio: Option<String>,
    pub bound: String,
    pub within_bound: Option<bool>,
    pub verify_status: Option<String>,
    pub op1: u64,
    pub op2: u64,
    pub op3: u64,
    pub init_rescues: usize,
    pub init_secs: f64,
    pub solve_secs: f64,
    pub oracle_secs: Option<f64>,
}

/// Instance `trial` of a ratio experiment: a G(n, p) graph with a random
/// density, a random tree, or a sparse G(n, p), in rotation. `n` is drawn
/// from `[min(4, n_max), n_max]`.
pub fn trial_spec(seed: u64, trial: usize, n_max: usize) -> Result<GenSpec, ParamError> {
    if n_max == 0 {
        return Err(ParamError::Other("n-max must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    rng.set_stream(trial as u64);
    let n = rng.gen_range(n_max.min(4)..=n_max);
    let inst_seed = rng.gen::<u32>() as u64;
    let round = |p: f64| (p * 1000.0).round() / 1000.0;
    Ok(match trial % 3 {
        0 => GenSpec::Gnp {
            n,
            p: round(rng.gen_range(0.1..0.6)),
            seed: inst_seed,
        },
        1 => GenSpec::Tree { n, seed: inst_seed },
        _ => GenSpec::Gnp {
            n,
            p: round((rng.gen_range(1.0..3.0) / n as f64).min(1.0)),
            seed: inst_seed,
        },
    })
}

/// Runs the local search and, with `oracle`, both exact objectives and the
/// verifier against the optimal witness.
pub fn run_trial(
    trial: usize,
    instance: String,
    g: &Graph,
    k: usize,
    oracle: bool,
) -> Result<ExperimentRow, Error> {
    let constants = Constants::new(k)?;
    let (s, stats) = approx1(g, k)?;
    let mut row = ExperimentRow {
        format_version: CSV_FORMAT_VERSION,
        trial,
        instance,
        n: g.n(),
        m: g.m(),
        k,
        alg_stars: s.len(),
        alg_one_stars: count_1stars(&s),
        opt_stars: None,
        opt_one_stars: None,
        min_one_stars: None,
        ratio: None,
        bound: constants.ratio_bound.to_string(),
        within_bound: None,
        verify_status: None,
        op1: stats.op_counts[0],
        op2: stats.op_counts[1],
        op3: stats.op_counts[2],
        init_rescues: stats.init.rescues,
        init_secs: stats.init_time.as_secs_f64(),
        solve_secs: (stats.wall_time - stats.init_time).as_secs_f64(),
        oracle_secs: None,
    };
    if oracle {
        let start = Instant::now();
        let opt = min_star_partition(g, k)?;
        let min1 = min_1star_partition(g, k)?;
        row.oracle_secs = Some(start.elapsed().as_secs_f64());
        let report = verify(g, &s, &opt.witness, k)?;
        row.opt_stars = Some(opt.value);
        row.opt_one_stars = Some(count_1stars(&opt.witness));
        row.min_one_stars = Some(min1.value);
        if let Some(r) = &report.ratio {
            row.ratio = r.realized_ratio.as_ref().map(|x| x.to_string());
            row.within_bound = Some(r.ratio_ok);
        }
        row.verify_status = Some(
            match report.status {
                VerifyStatus::Pass => "pass",
                VerifyStatus::Violation => "violation",
                VerifyStatus::NotFixedPoint => "not_fixed_point",
            }
            .to_string(),
        );
    }
    Ok(row)
}

/// Least-squares slope of `ln t` against `ln n`. `None` with fewer than two
/// distinct sizes or a non-positive time.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(n, t)| n <= 0.0 || t <= 0.0) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !sxx.is_finite() || sxx <= 1e-12 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Size-parameterized instance family for timing runs:
/// `gnp-deg:D` (G(n, p) with expected degree D), `tree`,
/// `starheavy:L` (bridged copies of K_{1,L}, about n vertices), `empty`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BenchModel {
    GnpDegree(f64),
    Tree,
    StarHeavy(usize),
    Empty,
}

impl BenchModel {
    pub fn instance(&self, n: usize, seed: u64) -> Result<Graph, ParamError> {
        match *self {
            BenchModel::GnpDegree(d) => {
                let p = if n > 1 { (d / (n - 1) as f64).min(1.0) } else { 0.0 };
                gen_gnp(n, p, seed)
            }
            BenchModel::Tree => gen_random_tree(n.max(1), seed),
            BenchModel::StarHeavy(legs) => gen_star_heavy((n / (legs + 1)).max(1), legs, true, seed),
            BenchModel::Empty => Ok(Graph::empty(n)),
        }
    }
}

impl FromStr for BenchModel {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParamError::GeneratorSpec(s.to_string());
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["gnp-deg", d] => {
                let d: f64 = d.parse().map_err(|_| bad())?;
                if d.is_nan() || d < 0.0 {
                    return Err(bad());
                }
                Ok(BenchModel::GnpDegree(d))
            }
            ["tree"] => Ok(BenchModel::Tree),
            ["starheavy", l] => match l.parse() {
                Ok(l) if l > 0 => Ok(BenchModel::StarHeavy(l)),
                _ => Err(bad()),
            },
            ["empty"] => Ok(BenchModel::Empty),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for BenchModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchModel::GnpDegree(d) => write!(f, "gnp-deg:{d}"),
            BenchModel::Tree => f.write_str("tree"),
            BenchModel::StarHeavy(l) => write!(f, "starheavy:{l}"),
            BenchModel::Empty => f.write_str("empty"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub format_version: u32,
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub rep: usize,
    pub stars: usize,
    pub one_stars: usize,
    pub iterations: u64,
    pub init_secs: f64,
    pub solve_secs: f64,
    pub total_secs: f64,
}

pub fn bench_once(model: BenchModel, n: usize, k: usize, rep: usize, seed: u64) -> Result<BenchRow, Error> {
    let g = model.instance(n, seed.wrapping_add(rep as u64))?;
    let (s, stats) = approx1(&g, k)?;
    Ok(BenchRow {
        format_version: CSV_FORMAT_VERSION,
        model: model.to_string(),
        n: g.n(),
        m: g.m(),
        k,
        rep,
        stars: s.len(),
        one_stars: stats.one_star_count,
        iterations: stats.iterations,
        init_secs: stats.init_time.as_secs_f64(),
        solve_secs: (stats.wall_time - stats.init_time).as_secs_f64(),
        total_secs: stats.wall_time.as_secs_f64(),
    })
}
