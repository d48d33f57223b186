//! Named scenarios covering each combination of date-1 and date-2 pricing
//! regimes, leverage, and the CDS cases.

use crate::config::ScenarioConfig;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    /// What the scenario represents.
    pub case: &'static str,
    /// Outcome the engine is expected to reproduce.
    pub expected: &'static str,
    overrides: &'static [(&'static str, &'static str)],
}

impl Preset {
    pub fn overrides(&self) -> &'static [(&'static str, &'static str)] {
        self.overrides
    }

    pub fn config(&self) -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        for (k, v) in self.overrides {
            c.set(k, v).expect("preset keys are valid");
        }
        c
    }
}

const CALM: &[(&str, &str)] = &[("sigma", "0"), ("psi_1", "0"), ("psi_2", "0")];

macro_rules! overrides {
    ($($k:literal => $v:literal),* $(,)?) => { &[$(($k, $v)),*] };
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "baseline",
        case: "fair prices at both dates, loans held to maturity",
        expected: "x = 0.5, cyclicity 0",
        overrides: CALM,
    },
    Preset {
        name: "securitization-fair",
        case: "fair prices at both dates with securitization available",
        expected: "x = 0.5, E0/d loans financed in total",
        overrides: overrides!["sigma" => "0", "psi_1" => "0", "psi_2" => "0", "securitization" => "true"],
    },
    Preset {
        name: "overpricing-t1",
        case: "optimism at date 1 large enough to beat the origination cost, fair date 2",
        expected: "x = 1, everything originated and sold at date 1",
        overrides: overrides!["sigma" => "0", "psi_1" => "-0.9", "psi_2" => "0", "securitization" => "true"],
    },
    Preset {
        name: "overpricing-t2",
        case: "fair date 1, profitable optimism at date 2, foreseen by the bank",
        expected: "x = 0, everything originated and sold at date 2",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "0", "psi_2" => "-0.9",
            "securitization" => "true", "foresight" => "true",
        ],
    },
    Preset {
        name: "overpricing-both",
        case: "equally profitable optimism at both dates, foreseen",
        expected: "x = 1, ties resolved toward date 1",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "-0.9", "psi_2" => "-0.9",
            "securitization" => "true", "foresight" => "true",
        ],
    },
    Preset {
        name: "underpricing-t1",
        case: "pessimism at date 1, fair date 2",
        expected: "no sales at date 1; loans held; x = 0.5",
        overrides: overrides!["sigma" => "0", "psi_1" => "0.3", "psi_2" => "0", "securitization" => "true"],
    },
    Preset {
        name: "underpricing-t2-a",
        case: "fair date 1, pessimism at date 2, bank lends everything early",
        expected: "x = 1, no reserves left to buy distressed securities",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "0", "psi_2" => "0.3",
            "securitization" => "true", "indifference" => "front_load",
        ],
    },
    Preset {
        name: "underpricing-t2-b",
        case: "fair date 1, pessimism at date 2, half the funds kept in reserve",
        expected: "reserves buy underpriced securities at date 2, the rest is lent",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "0", "psi_2" => "0.3",
            "securitization" => "true", "indifference" => "even_split",
        ],
    },
    Preset {
        name: "underpricing-t2-c",
        case: "fair date 1, pessimism at date 2, bank waits",
        expected: "x = 0, loans held at date 2",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "0", "psi_2" => "0.3",
            "securitization" => "true", "indifference" => "back_load",
        ],
    },
    Preset {
        name: "underpricing-both-a",
        case: "pessimism at both dates, bank lends everything early",
        expected: "x = 1, loans held, no sales",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "0.3", "psi_2" => "0.3",
            "securitization" => "true", "indifference" => "front_load",
        ],
    },
    Preset {
        name: "underpricing-both-b",
        case: "pessimism at both dates, even split",
        expected: "x = 0.5, loans held, no sales",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "0.3", "psi_2" => "0.3",
            "securitization" => "true", "indifference" => "even_split",
        ],
    },
    Preset {
        name: "underpricing-both-c",
        case: "pessimism at both dates, bank waits",
        expected: "x = 0, loans held, no sales",
        overrides: overrides![
            "sigma" => "0", "psi_1" => "0.3", "psi_2" => "0.3",
            "securitization" => "true", "indifference" => "back_load",
        ],
    },
    Preset {
        name: "boom-bust",
        case: "overvaluation at date 1 followed by undervaluation at date 2",
        expected: "x = 1; all origination and sales at date 1, no lending at date 2",
        overrides: overrides!["sigma" => "0", "psi_1" => "-0.9", "psi_2" => "0.3", "securitization" => "true"],
    },
    Preset {
        name: "bust-boom",
        case: "undervaluation at date 1 followed by overvaluation at date 2",
        expected: "loans held at date 1 are securitized into date-2 optimism",
        overrides: overrides!["sigma" => "0", "psi_1" => "0.3", "psi_2" => "-0.9", "securitization" => "true"],
    },
    Preset {
        name: "leverage-firesale",
        case: "levered securitization at fair date-1 prices, price drop at date 2",
        expected: "N = 25 E0 at date 1, forced sale S > 0 at date 2, P2 < P",
        overrides: overrides![
            "theta" => "0.05", "skin_d0" => "0.2", "skin_d1" => "0", "haircut" => "0.2",
            "securitization" => "true", "leverage" => "true", "indifference" => "front_load",
            "sigma" => "0", "psi_1" => "0", "psi_2" => "0.05",
        ],
    },
    Preset {
        name: "cds-fair",
        case: "CDS traded at the zero-profit spread",
        expected: "lending and selling protection tie; the bank lends",
        overrides: overrides!["cds" => "true"],
    },
    Preset {
        name: "cds-positive-basis",
        case: "CDS spread above the loan fee",
        expected: "selling protection beats lending",
        overrides: overrides!["cds" => "true", "cds_shock" => "0.05"],
    },
    Preset {
        name: "cds-negative-basis",
        case: "CDS spread below the loan fee with naked protection allowed",
        expected: "capital moves into naked protection, E0/s contracts, lending falls",
        overrides: overrides!["cds" => "true", "naked_cds" => "true", "cds_shock" => "-0.1"],
    },
    Preset {
        name: "naked-cds-stress",
        case: "pessimism at both dates with a deeply negative basis",
        expected: "naked protection crowds out lending at both dates",
        overrides: overrides![
            "cds" => "true", "naked_cds" => "true", "cds_shock" => "-0.15",
            "securitization" => "true", "psi_1" => "0.2", "psi_2" => "0.4",
        ],
    },
    Preset {
        name: "hedge-vs-securitize",
        case: "mild overpricing with fairly priced CDS and thin retention",
        expected: "the bank keeps and hedges its loans instead of selling them",
        overrides: overrides![
            "securitization" => "true", "cds" => "true", "skin_d0" => "0.1", "skin_d1" => "0",
            "sigma" => "0", "psi_1" => "-0.1", "psi_2" => "-0.1",
        ],
    },
];

pub fn preset(name: &str) -> Result<&'static Preset, ConfigError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

pub fn preset_config(name: &str) -> Result<ScenarioConfig, ConfigError> {
    Ok(preset(name)?.config())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for p in PRESETS {
            p.config()
                .validate()
                .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), PRESETS.len());
    }

    #[test]
    fn unknown_preset() {
        assert_eq!(
            preset_config("nope"),
            Err(ConfigError::UnknownPreset("nope".into()))
        );
    }
}
