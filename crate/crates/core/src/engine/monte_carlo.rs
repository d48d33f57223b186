use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::path::{run_path, PathResult, METRICS};
use super::{Scenario, ScenarioConfig};
use crate::error::ConfigError;

/// How independent paths are evaluated. Both give identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Rayon work-stealing; sequential when built without `parallel`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Independent generator for path `index`: the master seed picks the key,
/// the index picks the stream.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => (0..n).map(f).collect(),
    }
}

pub(crate) fn map_items<I, T, F>(items: &[I], exec: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(items.len(), exec, |i| f(&items[i]))
}

/// Runs `n_paths` paths; results are in path order regardless of `exec`.
pub fn simulate_paths(
    config: &ScenarioConfig,
    n_paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<PathResult>, ConfigError> {
    if n_paths == 0 {
        return Err(ConfigError::Validation(
            "paths must be at least 1".to_string(),
        ));
    }
    let scenario = Scenario::new(config)?;
    Ok(map_indexed(n_paths, exec, |i| {
        run_path(&scenario, &mut path_rng(seed, i))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl MetricStats {
    /// Summary of `values` summed in the given order.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                q05: f64::NAN,
                q50: f64::NAN,
                q95: f64::NAN,
            };
        }
        let (mean, std) = if sorted[0] == sorted[sorted.len() - 1] {
            (sorted[0], 0.0)
        } else {
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        Self {
            mean,
            std,
            q05: quantile(&sorted, 0.05),
            q50: quantile(&sorted, 0.50),
            q95: quantile(&sorted, 0.95),
        }
    }
}

/// Linear interpolation between order statistics of a sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMetric {
    pub name: String,
    #[serde(flatten)]
    pub stats: MetricStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlagRates {
    pub negative_price: f64,
    pub full_wipeout: f64,
    pub insolvent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_paths: usize,
    pub seed: u64,
    /// In the order of [`METRICS`].
    pub metrics: Vec<NamedMetric>,
    pub flag_rates: FlagRates,
    pub max_reconciliation_residual: f64,
}

impl RunSummary {
    pub fn from_paths(paths: &[PathResult], seed: u64) -> Self {
        let metrics = METRICS
            .iter()
            .map(|name| {
                let values: Vec<f64> = paths
                    .iter()
                    .map(|p| p.metric(name).expect("listed metric"))
                    .collect();
                NamedMetric {
                    name: name.to_string(),
                    stats: MetricStats::from_values(&values),
                }
            })
            .collect();
        let n = paths.len() as f64;
        let rate = |f: fn(&PathResult) -> bool| paths.iter().filter(|p| f(p)).count() as f64 / n;
        Self {
            n_paths: paths.len(),
            seed,
            metrics,
            flag_rates: FlagRates {
                negative_price: rate(|p| p.flags.negative_price),
                full_wipeout: rate(|p| p.flags.full_wipeout),
                insolvent: rate(|p| p.flags.insolvent),
            },
            max_reconciliation_residual: paths
                .iter()
                .map(|p| p.reconciliation_residual.abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn metric(&self, name: &str) -> Option<&MetricStats> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| &m.stats)
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        self.metric(name).map(|s| s.mean)
    }
}

pub fn run_monte_carlo(
    config: &ScenarioConfig,
    n_paths: usize,
    seed: u64,
) -> Result<RunSummary, ConfigError> {
    run_monte_carlo_with(config, n_paths, seed, Execution::default())
}

pub fn run_monte_carlo_with(
    config: &ScenarioConfig,
    n_paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<RunSummary, ConfigError> {
    let paths = simulate_paths(config, n_paths, seed, exec)?;
    Ok(RunSummary::from_paths(&paths, seed))
}
