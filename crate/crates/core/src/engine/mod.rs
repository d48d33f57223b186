//! Three-date paths, Monte Carlo aggregation and scenario comparison.

mod compare;
mod monte_carlo;
mod path;

pub use compare::{compare_scenarios, sweep, ComparisonTable, SweepPoint};
pub use monte_carlo::{
    path_rng, quantile, run_monte_carlo, run_monte_carlo_with, simulate_paths, Execution,
    FlagRates, MetricStats, NamedMetric, RunSummary,
};
pub use path::{run_path, PathFlags, PathResult, TradeRecord, METRICS};

pub use crate::config::{ScenarioConfig, Switches};

use crate::bank::Marks;
use crate::error::ConfigError;
use crate::instruments::{origination_fee, skin_in_game, CdsTerms, Project};
use crate::market::SentimentState;

/// A validated configuration with its derived per-loan quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub project: Project,
    pub fee: f64,
    pub skin: f64,
    pub terms: CdsTerms,
    pub marks: Marks,
    pub sentiment: SentimentState,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let project = config.project()?;
        let terms = config.cds_terms()?;
        Ok(Self {
            config: config.clone(),
            fee: origination_fee(&project, &config.fee_model)?,
            skin: skin_in_game(&project, &config.skin_model),
            marks: Marks::new(project.theta(), terms.lgd()),
            sentiment: config.sentiment()?,
            project,
            terms,
        })
    }

    /// Value of a claim on one loan, the price noise traders anchor on.
    pub fn fundamental(&self) -> f64 {
        self.marks.claim_value
    }

    pub fn spread(&self) -> f64 {
        self.terms.market_spread()
    }
}
