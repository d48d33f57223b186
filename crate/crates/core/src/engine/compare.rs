use serde::Serialize;

use super::monte_carlo::{map_items, run_monte_carlo_with, Execution, RunSummary};
use super::path::METRICS;
use super::ScenarioConfig;
use crate::error::ConfigError;

/// Mean of each requested metric per scenario, all rows on the same seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

impl ComparisonTable {
    pub fn value(&self, row: &str, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|n| n == column)?;
        let r = self.rows.iter().find(|(id, _)| id == row)?;
        Some(r.1[c])
    }
}

/// Runs each scenario with the same seed and tabulates metric means.
/// Empty or unrecognized metric names are dropped.
pub fn compare_scenarios(
    scenarios: &[(String, ScenarioConfig)],
    metrics: &[&str],
    n_paths: usize,
    seed: u64,
) -> Result<ComparisonTable, ConfigError> {
    let columns: Vec<String> = metrics
        .iter()
        .filter(|m| METRICS.contains(m))
        .map(|m| m.to_string())
        .collect();
    let mut rows = Vec::with_capacity(scenarios.len());
    for (id, config) in scenarios {
        let summary = run_monte_carlo_with(config, n_paths, seed, Execution::default())?;
        let values = columns
            .iter()
            .map(|c| summary.mean(c).expect("listed metric"))
            .collect();
        rows.push((id.clone(), values));
    }
    Ok(ComparisonTable { columns, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub assignments: Vec<(String, String)>,
    pub summary: RunSummary,
}

/// Grid over one or two config keys. Every point is validated before any
/// path runs; points are reported in row-major order of `grid`.
pub fn sweep(
    base: &ScenarioConfig,
    grid: &[(String, Vec<String>)],
    n_paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SweepPoint>, ConfigError> {
    if grid.is_empty() || grid.len() > 2 {
        return Err(ConfigError::Validation(format!(
            "sweep takes one or two parameters, got {}",
            grid.len()
        )));
    }
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in grid {
        if values.is_empty() {
            return Err(ConfigError::Validation(format!("no values for `{key}`")));
        }
        points = points
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((key.clone(), v.clone()));
                    p
                })
            })
            .collect();
    }
    let configs = points
        .iter()
        .map(|assignments| {
            let mut c = base.clone();
            for (k, v) in assignments {
                if !ScenarioConfig::is_key(k) {
                    return Err(ConfigError::Field {
                        field: k.clone(),
                        message: "unknown key".to_string(),
                    });
                }
                c.set(k, v)?;
            }
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let inner = Execution::Sequential;
    let summaries = map_items(&configs, exec, |c| {
        run_monte_carlo_with(c, n_paths, seed, inner)
    });
    points
        .into_iter()
        .zip(summaries)
        .map(|(assignments, summary)| {
            Ok(SweepPoint {
                assignments,
                summary: summary?,
            })
        })
        .collect()
}
