//! Scenario configuration and its flat `key = value` text form.
//!
//! Every key has a default; unknown keys are rejected. `emit` writes every
//! key so that a file fully determines a scenario.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bank::{RegulatoryParams, SettlementMode};
use crate::error::ConfigError;
use crate::instruments::{origination_fee, CdsTerms, FeeMode, FeeModel, Project, SkinModel};
use crate::market::{SentimentState, ShockDistribution, DEFAULT_PRICE_EPS};
use crate::strategy::IndifferencePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Switches {
    pub securitization: bool,
    pub leverage: bool,
    pub cds: bool,
    pub naked_cds: bool,
    pub foresight: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub theta: f64,
    pub payoff_good: f64,
    pub payoff_bad: f64,
    pub fee_model: FeeModel,
    pub skin_model: SkinModel,
    pub lgd: f64,
    /// Added to the zero-profit spread; drives the CDS basis.
    pub cds_mispricing_shock: f64,
    pub e0: f64,
    pub regulatory: RegulatoryParams,
    pub psi_1: f64,
    pub sigma: f64,
    pub shock: ShockDistribution,
    /// Level the date-2 increment is added to; `psi_1` when unset.
    pub psi_2_anchor: Option<f64>,
    pub price_eps: f64,
    pub switches: Switches,
    pub settlement: SettlementMode,
    pub indifference: IndifferencePolicy,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            theta: 0.2,
            payoff_good: 1.25,
            payoff_bad: 0.0,
            fee_model: FeeModel::default(),
            skin_model: SkinModel::default(),
            lgd: 1.0,
            cds_mispricing_shock: 0.0,
            e0: 1.0,
            regulatory: RegulatoryParams::default(),
            psi_1: 0.0,
            sigma: 0.1,
            shock: ShockDistribution::Normal,
            psi_2_anchor: None,
            price_eps: DEFAULT_PRICE_EPS,
            switches: Switches::default(),
            settlement: SettlementMode::Expectation,
            indifference: IndifferencePolicy::EvenSplit,
        }
    }
}

/// Recognized keys, in emit order.
pub const KEYS: &[&str] = &[
    "theta",
    "payoff_good",
    "payoff_bad",
    "fee_mode",
    "alpha",
    "skin_d0",
    "skin_d1",
    "skin_floor",
    "lgd",
    "cds_shock",
    "e0",
    "haircut",
    "e_req_1",
    "e_req_2",
    "g_1",
    "g_2",
    "payout_split",
    "psi_1",
    "psi_2",
    "sigma",
    "shock",
    "eps",
    "securitization",
    "leverage",
    "cds",
    "naked_cds",
    "foresight",
    "settlement",
    "indifference",
];

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_num(field: &str, value: &str) -> Result<f64, ConfigError> {
    let v =
        f64::from_str(value).map_err(|_| field_err(field, format!("not a number: `{value}`")))?;
    if !v.is_finite() {
        return Err(field_err(field, format!("not finite: `{value}`")));
    }
    Ok(v)
}

fn parse_bool(field: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(field_err(
            field,
            format!("expected true or false: `{value}`"),
        )),
    }
}

fn choice<T: Copy>(field: &str, value: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
    options
        .iter()
        .find(|(name, _)| *name == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            field_err(
                field,
                format!("`{value}` is not one of {}", names.join(", ")),
            )
        })
}

const FEE_MODES: &[(&str, FeeMode)] = &[
    ("expected_loss", FeeMode::ExpectedLoss),
    ("surplus_share", FeeMode::SurplusShare),
];
const SHOCKS: &[(&str, ShockDistribution)] = &[
    ("normal", ShockDistribution::Normal),
    ("uniform", ShockDistribution::Uniform),
    ("two_point", ShockDistribution::TwoPoint),
];
const SETTLEMENTS: &[(&str, SettlementMode)] = &[
    ("expectation", SettlementMode::Expectation),
    ("realized", SettlementMode::Realized),
];
const POLICIES: &[(&str, IndifferencePolicy)] = &[
    ("even_split", IndifferencePolicy::EvenSplit),
    ("front_load", IndifferencePolicy::FrontLoad),
    ("back_load", IndifferencePolicy::BackLoad),
];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], value: &T) -> &'static str {
    options
        .iter()
        .find(|(_, v)| v == value)
        .map(|(n, _)| *n)
        .expect("every variant is listed")
}

impl ScenarioConfig {
    pub fn is_key(key: &str) -> bool {
        KEYS.contains(&key)
    }

    /// Assigns one key from its text form. Range checks happen in `validate`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "theta" => self.theta = parse_num(key, value)?,
            "payoff_good" => self.payoff_good = parse_num(key, value)?,
            "payoff_bad" => self.payoff_bad = parse_num(key, value)?,
            "fee_mode" => self.fee_model.mode = choice(key, value, FEE_MODES)?,
            "alpha" => self.fee_model.alpha = parse_num(key, value)?,
            "skin_d0" => self.skin_model.d0 = parse_num(key, value)?,
            "skin_d1" => self.skin_model.d1 = parse_num(key, value)?,
            "skin_floor" => self.skin_model.floor = parse_num(key, value)?,
            "lgd" => self.lgd = parse_num(key, value)?,
            "cds_shock" => self.cds_mispricing_shock = parse_num(key, value)?,
            "e0" => self.e0 = parse_num(key, value)?,
            "haircut" => self.regulatory.haircut = parse_num(key, value)?,
            "e_req_1" => self.regulatory.e_req[0] = parse_num(key, value)?,
            "e_req_2" => self.regulatory.e_req[1] = parse_num(key, value)?,
            "g_1" => self.regulatory.g[0] = parse_num(key, value)?,
            "g_2" => self.regulatory.g[1] = parse_num(key, value)?,
            "payout_split" => self.regulatory.payout_split = parse_num(key, value)?,
            "psi_1" => self.psi_1 = parse_num(key, value)?,
            "psi_2" => {
                self.psi_2_anchor = match value {
                    "none" | "" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "sigma" => self.sigma = parse_num(key, value)?,
            "shock" => self.shock = choice(key, value, SHOCKS)?,
            "eps" => self.price_eps = parse_num(key, value)?,
            "securitization" => self.switches.securitization = parse_bool(key, value)?,
            "leverage" => self.switches.leverage = parse_bool(key, value)?,
            "cds" => self.switches.cds = parse_bool(key, value)?,
            "naked_cds" => self.switches.naked_cds = parse_bool(key, value)?,
            "foresight" => self.switches.foresight = parse_bool(key, value)?,
            "settlement" => self.settlement = choice(key, value, SETTLEMENTS)?,
            "indifference" => self.indifference = choice(key, value, POLICIES)?,
            _ => return Err(field_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Text form of one key's current value.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = match key {
            "theta" => self.theta.to_string(),
            "payoff_good" => self.payoff_good.to_string(),
            "payoff_bad" => self.payoff_bad.to_string(),
            "fee_mode" => name_of(FEE_MODES, &self.fee_model.mode).to_string(),
            "alpha" => self.fee_model.alpha.to_string(),
            "skin_d0" => self.skin_model.d0.to_string(),
            "skin_d1" => self.skin_model.d1.to_string(),
            "skin_floor" => self.skin_model.floor.to_string(),
            "lgd" => self.lgd.to_string(),
            "cds_shock" => self.cds_mispricing_shock.to_string(),
            "e0" => self.e0.to_string(),
            "haircut" => self.regulatory.haircut.to_string(),
            "e_req_1" => self.regulatory.e_req[0].to_string(),
            "e_req_2" => self.regulatory.e_req[1].to_string(),
            "g_1" => self.regulatory.g[0].to_string(),
            "g_2" => self.regulatory.g[1].to_string(),
            "payout_split" => self.regulatory.payout_split.to_string(),
            "psi_1" => self.psi_1.to_string(),
            "psi_2" => match self.psi_2_anchor {
                Some(v) => v.to_string(),
                None => "none".to_string(),
            },
            "sigma" => self.sigma.to_string(),
            "shock" => name_of(SHOCKS, &self.shock).to_string(),
            "eps" => self.price_eps.to_string(),
            "securitization" => self.switches.securitization.to_string(),
            "leverage" => self.switches.leverage.to_string(),
            "cds" => self.switches.cds.to_string(),
            "naked_cds" => self.switches.naked_cds.to_string(),
            "foresight" => self.switches.foresight.to_string(),
            "settlement" => name_of(SETTLEMENTS, &self.settlement).to_string(),
            "indifference" => name_of(POLICIES, &self.indifference).to_string(),
            _ => return None,
        };
        Some(s)
    }

    pub fn project(&self) -> Result<Project, ConfigError> {
        Ok(Project::new(self.theta, self.payoff_good, self.payoff_bad)?)
    }

    pub fn sentiment(&self) -> Result<SentimentState, ConfigError> {
        Ok(SentimentState::new(self.psi_1, self.sigma, self.shock)?)
    }

    pub fn cds_terms(&self) -> Result<CdsTerms, ConfigError> {
        Ok(CdsTerms::priced(
            &self.project()?,
            self.lgd,
            self.cds_mispricing_shock,
        )?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let project = self.project()?;
        origination_fee(&project, &self.fee_model)?;
        self.skin_model.validate()?;
        let terms = self.cds_terms()?;
        self.regulatory.validate()?;
        self.sentiment()?;
        if let Some(psi) = self.psi_2_anchor {
            SentimentState::new(psi, self.sigma, self.shock)?;
        }
        if self.e0.is_nan() || self.e0 <= 0.0 {
            return Err(ConfigError::Validation(format!(
                "e0 must be positive: {}",
                self.e0
            )));
        }
        if self.price_eps.is_nan() || self.price_eps < 0.0 {
            return Err(ConfigError::Validation(format!(
                "eps must be nonnegative: {}",
                self.price_eps
            )));
        }
        let sw = &self.switches;
        if sw.leverage {
            if !sw.securitization {
                return Err(ConfigError::Validation(
                    "leverage requires securitization".to_string(),
                ));
            }
            let h = self.regulatory.haircut;
            if h <= self.theta {
                return Err(ConfigError::Validation(format!(
                    "leverage requires h > θ (haircut above the default probability): h = {h}, θ = {}",
                    self.theta
                )));
            }
        }
        if sw.naked_cds {
            if !sw.cds {
                return Err(ConfigError::Validation(
                    "naked_cds requires cds".to_string(),
                ));
            }
            if terms.market_spread() == 0.0 {
                return Err(ConfigError::Validation(
                    "naked_cds requires a positive CDS spread".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`, then validates.
    pub fn parse_onto(mut self, text: &str) -> Result<Self, ConfigError> {
        for (line, key, value) in lines(text)? {
            if !Self::is_key(key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            self.set(key, value).map_err(|e| at_line(line, e))?;
        }
        self.validate()?;
        Ok(self)
    }

    /// Every key with its value, one per line, in `KEYS` order.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("listed key");
            writeln!(out, "{key} = {value}").expect("writing to a string");
        }
        out
    }
}

fn at_line(line: usize, err: ConfigError) -> ConfigError {
    match err {
        ConfigError::Field { field, message } => ConfigError::Parse {
            line,
            message: format!("`{field}`: {message}"),
        },
        other => other,
    }
}

/// Non-empty `(line number, key, value)` triples with `#` comments stripped.
fn lines(text: &str) -> Result<Vec<(usize, &str, &str)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: "missing key".to_string(),
            });
        }
        out.push((line, key, value.trim()));
    }
    Ok(out)
}

/// Parses a config file body over the defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    ScenarioConfig::default().parse_onto(text)
}

/// Applies `key=value` overrides, as given on a command line, then validates.
pub fn apply_overrides(
    mut config: ScenarioConfig,
    overrides: &[String],
) -> Result<ScenarioConfig, ConfigError> {
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| field_err(item, "expected key=value"))?;
        let key = key.trim();
        if !ScenarioConfig::is_key(key) {
            return Err(field_err(key, "unknown key"));
        }
        config.set(key, value)?;
    }
    config.validate()?;
    Ok(config)
}

pub const MANIFEST_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to repeat a run exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub label: String,
    pub seed: u64,
    pub paths: usize,
    pub version: String,
    pub config: ScenarioConfig,
}

impl RunManifest {
    pub fn emit(&self) -> String {
        let mut out = String::new();
        writeln!(out, "run.label = {}", self.label).expect("writing to a string");
        writeln!(out, "run.seed = {}", self.seed).expect("writing to a string");
        writeln!(out, "run.paths = {}", self.paths).expect("writing to a string");
        writeln!(out, "run.version = {}", self.version).expect("writing to a string");
        out.push_str(&self.config.emit());
        out
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut label = None;
        let mut seed = None;
        let mut paths = None;
        let mut version = None;
        let mut config = ScenarioConfig::default();
        for (line, key, value) in lines(text)? {
            let bad = |what: &str| ConfigError::Parse {
                line,
                message: format!("`{key}`: {what}: `{value}`"),
            };
            match key {
                "run.label" => label = Some(value.to_string()),
                "run.seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("not a seed"))?),
                "run.paths" => {
                    paths = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| bad("not a path count"))?,
                    )
                }
                "run.version" => version = Some(value.to_string()),
                k if ScenarioConfig::is_key(k) => {
                    config.set(k, value).map_err(|e| at_line(line, e))?
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        config.validate()?;
        let missing = |k: &str| ConfigError::Validation(format!("manifest is missing `{k}`"));
        Ok(Self {
            label: label.ok_or_else(|| missing("run.label"))?,
            seed: seed.ok_or_else(|| missing("run.seed"))?,
            paths: paths.ok_or_else(|| missing("run.paths"))?,
            version: version.unwrap_or_else(|| MANIFEST_VERSION.to_string()),
            config,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.theta, 0.2);
        assert_eq!(c.lgd, 1.0);
        assert_eq!(c.regulatory.haircut, 0.2);
        assert_eq!(c.regulatory.g, [1.0, 1.0]);
        assert_eq!(c.sigma, 0.1);
        assert_eq!(c.psi_1, 0.0);
    }

    #[test]
    fn comments_and_whitespace() {
        let c =
            parse_config("# scenario\n\n  theta = 0.3  # riskier\nsecuritization=true\n").unwrap();
        assert_eq!(c.theta, 0.3);
        assert!(c.switches.securitization);
    }

    #[test]
    fn theta_out_of_range() {
        let err = parse_config("theta = 1.5").unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)));
        assert!(err.to_string().contains("theta out of [0,1]"));
    }

    #[test]
    fn leverage_needs_haircut_above_theta() {
        let err =
            parse_config("securitization = true\nleverage = true\nhaircut = 0.1\ntheta = 0.2")
                .unwrap_err();
        assert!(err.to_string().contains("h > θ"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse_config("theta = 0.2\nthetaa = 0.3"),
            Err(ConfigError::UnknownKey {
                line: 2,
                key: "thetaa".into()
            })
        );
        assert!(matches!(
            parse_config("\n\ntheta = abc"),
            Err(ConfigError::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_config("theta 0.2"),
            Err(ConfigError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("settlement = maybe"),
            Err(ConfigError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn emit_round_trips() {
        let mut c = ScenarioConfig {
            theta: 0.1 + 0.2,
            ..Default::default()
        };
        c.psi_2_anchor = Some(-0.123456789012345);
        c.switches.cds = true;
        c.switches.naked_cds = true;
        c.settlement = SettlementMode::Realized;
        c.indifference = IndifferencePolicy::BackLoad;
        c.shock = ShockDistribution::TwoPoint;
        c.fee_model.mode = FeeMode::SurplusShare;
        c.fee_model.alpha = 0.3;
        assert_eq!(parse_config(&c.emit()).unwrap(), c);
    }

    #[test]
    fn overrides() {
        let c = apply_overrides(ScenarioConfig::default(), &["psi_1=-0.9".into()]).unwrap();
        assert_eq!(c.psi_1, -0.9);
        assert!(apply_overrides(ScenarioConfig::default(), &["nope=1".into()]).is_err());
        assert!(apply_overrides(ScenarioConfig::default(), &["theta".into()]).is_err());
    }

    #[test]
    fn naked_cds_needs_cds_and_spread() {
        assert!(parse_config("naked_cds = true").is_err());
        assert!(parse_config("cds = true\nnaked_cds = true\ntheta = 0").is_err());
        assert!(parse_config("cds = true\nnaked_cds = true").is_ok());
    }

    #[test]
    fn manifest_round_trips() {
        let m = RunManifest {
            label: "baseline".into(),
            seed: 42,
            paths: 10,
            version: MANIFEST_VERSION.into(),
            config: ScenarioConfig::default(),
        };
        assert_eq!(RunManifest::parse(&m.emit()).unwrap(), m);
        assert!(RunManifest::parse("run.seed = 1\nrun.paths = 1").is_err());
    }
}
