//! Benchmark suites: a grid of networks and algorithms run in parallel,
//! reported in suite order.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_algorithm, Algorithm, NetSpec, RunOptions};
use crate::engine::{Round, RunConfig};
use crate::error::{Error, Result};
use crate::geometry::{ModelParams, Network};

/// Environment variable capping bench worker threads.
pub const THREADS_ENV: &str = "SINRCAST_THREADS";

/// A suite file: every network is run with every algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    /// Generator specs or paths to network files.
    pub networks: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub max_rounds: Option<Round>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl Suite {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One row of the benchmark table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BenchRecord {
    pub algorithm: String,
    pub n: usize,
    pub N: u32,
    pub D: usize,
    pub Delta: usize,
    pub g: f64,
    /// Rounds the run took, up to its terminating boundary or the budget.
    pub rounds: Round,
    pub informed: usize,
    /// Seconds.
    pub wall_time: f64,
}

/// Model parameters with optional overrides.
pub fn params_with(base: ModelParams, alpha: Option<f64>, epsilon: Option<f64>) -> Result<ModelParams> {
    let p = ModelParams { alpha: alpha.unwrap_or(base.alpha), epsilon: epsilon.unwrap_or(base.epsilon), ..base };
    p.validate()?;
    Ok(p)
}

/// Loads a network file, or builds one from a generator spec.
pub fn load_network(source: &str, alpha: Option<f64>, epsilon: Option<f64>) -> Result<Network> {
    if Path::new(source).is_file() {
        let mut net = Network::load(source)?;
        if alpha.is_some() || epsilon.is_some() {
            net.params = params_with(net.params, alpha, epsilon)?;
            net.validate()?;
        }
        Ok(net)
    } else {
        let spec: NetSpec = source.parse()?;
        spec.build(params_with(ModelParams::default(), alpha, epsilon)?)
    }
}

/// Runs one algorithm on one network and measures it.
pub fn bench_one(net: &Network, alg: Algorithm, max_rounds: Round) -> Result<BenchRecord> {
    let stats = net.stats()?;
    let opts = RunOptions { max_rounds, ..RunOptions::new(alg) };
    let start = Instant::now();
    let trace = run_algorithm(net, &opts)?;
    let wall = start.elapsed().as_secs_f64();
    Ok(BenchRecord {
        algorithm: alg.name().into(),
        n: stats.n,
        N: net.id_bound,
        D: stats.D,
        Delta: stats.Delta,
        g: stats.g,
        rounds: trace.rounds,
        informed: trace.informed_count(),
        wall_time: wall,
    })
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Runs the suite; rows come back in suite order (networks outer, algorithms inner).
pub fn bench(suite: &Suite) -> Result<Vec<Result<BenchRecord>>> {
    let nets: Vec<Network> =
        suite.networks.iter().map(|s| load_network(s, suite.alpha, suite.epsilon)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, Algorithm)> =
        (0..nets.len()).flat_map(|i| suite.algorithms.iter().map(move |&a| (i, a))).collect();
    let max_rounds = suite.max_rounds.unwrap_or(RunConfig::default().max_rounds);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|&(i, a)| bench_one(&nets[i], a, max_rounds)).collect()))
}
