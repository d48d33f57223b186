//! Price formation for the securitized-loan market.
//!
//! Noise traders demand `(P - psi) / P_t` units, the bank demands
//! `deployed / P_t`, and the unit supply clears the market. The bank can only
//! lean against pessimism with the capital it has, and against optimism by
//! selling securities it already holds: it cannot short.

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ModelResult};

pub const UNIT_SUPPLY: f64 = 1.0;
pub const DEFAULT_PRICE_EPS: f64 = 1e-9;

/// Distribution of the sentiment increment between periods 1 and 2.
/// All variants are symmetric with zero mean and standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShockDistribution {
    #[default]
    Normal,
    Uniform,
    TwoPoint,
}

/// Noise-trader sentiment. `psi > 0` is pessimism, `psi < 0` optimism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentState {
    pub psi: f64,
    pub sigma: f64,
    pub distribution: ShockDistribution,
}

impl SentimentState {
    pub fn new(psi: f64, sigma: f64, distribution: ShockDistribution) -> ModelResult<Self> {
        if !psi.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "sentiment must be finite: {psi}"
            )));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "sigma must be nonnegative: {sigma}"
            )));
        }
        Ok(Self {
            psi,
            sigma,
            distribution,
        })
    }

    /// Draws one zero-mean increment from the configured distribution.
    pub fn draw_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        match self.distribution {
            ShockDistribution::Normal => Normal::new(0.0, self.sigma)
                .expect("sigma validated as finite and nonnegative")
                .sample(rng),
            ShockDistribution::Uniform => {
                let half_width = self.sigma * 3f64.sqrt();
                Uniform::new_inclusive(-half_width, half_width)
                    .expect("half width is positive")
                    .sample(rng)
            }
            ShockDistribution::TwoPoint => {
                if rng.random::<bool>() {
                    self.sigma
                } else {
                    -self.sigma
                }
            }
        }
    }

    /// Sentiment one period later, starting from `from` (normally `self.psi`).
    pub fn evolve<R: Rng + ?Sized>(&self, from: f64, rng: &mut R) -> SentimentState {
        SentimentState {
            psi: from + self.draw_increment(rng),
            ..*self
        }
    }
}

/// Outcome of clearing the unit supply at one date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub fundamental: f64,
    pub psi: f64,
    pub cleared_price: f64,
    /// Bank capital spent buying against pessimism.
    pub deployed_capital: f64,
    /// Value of bank inventory sold into optimism.
    pub sold_value: f64,
    pub supply: f64,
}

impl MarketState {
    pub fn bank_units_bought(&self) -> f64 {
        if self.deployed_capital == 0.0 {
            0.0
        } else {
            self.deployed_capital / self.cleared_price
        }
    }

    pub fn bank_units_sold(&self) -> f64 {
        if self.sold_value == 0.0 {
            0.0
        } else {
            self.sold_value / self.cleared_price
        }
    }

    /// Noise-trader plus net bank demand at the cleared price.
    pub fn total_demand(&self) -> ModelResult<f64> {
        let noise = noise_trader_demand(self.fundamental, self.psi, self.cleared_price)?;
        let bought = bank_demand(self.deployed_capital, self.cleared_price)?;
        let sold = bank_demand(self.sold_value, self.cleared_price)?;
        Ok(noise + bought - sold)
    }

    pub fn gap(&self) -> f64 {
        self.cleared_price - self.fundamental
    }
}

pub fn noise_trader_demand(fundamental: f64, psi: f64, price: f64) -> ModelResult<f64> {
    if price == 0.0 {
        return Err(ModelError::ZeroPrice);
    }
    Ok((fundamental - psi) / price)
}

pub fn bank_demand(deployed: f64, price: f64) -> ModelResult<f64> {
    if price == 0.0 {
        return Err(ModelError::ZeroPrice);
    }
    Ok(deployed / price)
}

/// Clears the market for one security.
///
/// `capacity` is the capital the bank is willing to commit to buying
/// under pessimism; `inventory` is the number of units it could sell under
/// optimism. Bank trades never push the price past its fundamental value.
pub fn clear_market(
    fundamental: f64,
    psi: f64,
    capacity: f64,
    inventory: f64,
) -> ModelResult<MarketState> {
    if capacity < 0.0 || inventory < 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "capacity and inventory must be nonnegative: {capacity}, {inventory}"
        )));
    }
    let mut state = MarketState {
        fundamental,
        psi,
        cleared_price: fundamental,
        deployed_capital: 0.0,
        sold_value: 0.0,
        supply: UNIT_SUPPLY,
    };
    if psi > 0.0 {
        let deployed = capacity.min(psi);
        let price = fundamental - psi + deployed;
        if price < 0.0 {
            return Err(ModelError::NegativePrice { price });
        }
        state.deployed_capital = deployed;
        state.cleared_price = price;
    } else if psi < 0.0 {
        let unlevered_price = fundamental - psi;
        // units sold, V / P_t, may not exceed the inventory
        let max_sale = inventory * unlevered_price / (1.0 + inventory);
        let sold = max_sale.min(-psi);
        state.sold_value = sold;
        state.cleared_price = unlevered_price - sold;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeTag {
    Overpriced,
    Fair,
    Underpriced,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::Overpriced => "overpriced",
            RegimeTag::Fair => "fair",
            RegimeTag::Underpriced => "underpriced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `|P_t - P|`.
    pub magnitude: f64,
}

impl Regime {
    pub fn fair() -> Self {
        Regime {
            tag: RegimeTag::Fair,
            magnitude: 0.0,
        }
    }

    pub fn is_overpriced(&self) -> bool {
        self.tag == RegimeTag::Overpriced
    }

    pub fn is_underpriced(&self) -> bool {
        self.tag == RegimeTag::Underpriced
    }
}

pub fn classify_regime(price: f64, fundamental: f64, eps: f64) -> Regime {
    let gap = price - fundamental;
    let tag = if gap > eps {
        RegimeTag::Overpriced
    } else if -gap > eps {
        RegimeTag::Underpriced
    } else {
        RegimeTag::Fair
    };
    Regime {
        tag,
        magnitude: gap.abs(),
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn noise_demand_cases() {
        assert_eq!(noise_trader_demand(0.8, 0.0, 0.8).unwrap(), 1.0);
        assert!((noise_trader_demand(0.8, 0.3, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((noise_trader_demand(0.8, -0.2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            noise_trader_demand(0.8, 0.1, 0.0),
            Err(ModelError::ZeroPrice)
        );
    }

    #[test]
    fn bank_demand_cases() {
        assert_eq!(bank_demand(0.0, 0.7).unwrap(), 0.0);
        assert!((bank_demand(0.1, 0.5).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(bank_demand(0.6, 0.6).unwrap(), 1.0);
        assert_eq!(bank_demand(0.6, 0.0), Err(ModelError::ZeroPrice));
    }

    #[test]
    fn clearing_cases() {
        let neutral = clear_market(0.8, 0.0, 3.0, 2.0).unwrap();
        assert_eq!(neutral.cleared_price, 0.8);

        let limited = clear_market(0.8, 0.3, 0.1, 0.0).unwrap();
        assert!((limited.cleared_price - 0.6).abs() < 1e-15);
        assert_eq!(limited.deployed_capital, 0.1);

        let capped = clear_market(0.8, 0.3, 0.5, 0.0).unwrap();
        assert_eq!(capped.deployed_capital, 0.3);
        assert!((capped.cleared_price - 0.8).abs() < 1e-15);
    }

    #[test]
    fn optimism_without_inventory_persists() {
        let m = clear_market(0.8, -0.5, 10.0, 0.0).unwrap();
        assert!((m.cleared_price - 1.3).abs() < 1e-15);
        assert_eq!(m.sold_value, 0.0);
    }

    #[test]
    fn optimism_sales_never_exceed_inventory() {
        let m = clear_market(0.8, -0.5, 0.0, 0.1).unwrap();
        assert!(m.bank_units_sold() <= 0.1 + 1e-15);
        assert!(m.cleared_price > 0.8 && m.cleared_price < 1.3);
        assert!((m.total_demand().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_price_rejected() {
        assert!(matches!(
            clear_market(0.2, 0.5, 0.1, 0.0),
            Err(ModelError::NegativePrice { .. })
        ));
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(0.9, 0.8, 1e-9).tag, RegimeTag::Overpriced);
        assert_eq!(classify_regime(0.8, 0.8, 1e-9).tag, RegimeTag::Fair);
        assert_eq!(classify_regime(0.8 + 1e-12, 0.8, 1e-9).tag, RegimeTag::Fair);
        let under = classify_regime(0.5, 0.8, 1e-9);
        assert_eq!(under.tag, RegimeTag::Underpriced);
        assert!((under.magnitude - 0.3).abs() < 1e-15);
    }

    #[test]
    fn shocks_are_symmetric_around_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dist in [
            ShockDistribution::Normal,
            ShockDistribution::Uniform,
            ShockDistribution::TwoPoint,
        ] {
            let s = SentimentState::new(0.0, 0.2, dist).unwrap();
            let n = 20_000;
            let draws: Vec<f64> = (0..n).map(|_| s.draw_increment(&mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(
                mean.abs() < 4.0 * 0.2 / (n as f64).sqrt(),
                "{dist:?} mean {mean}"
            );
            assert!(
                (var.sqrt() - 0.2).abs() < 0.01,
                "{dist:?} sd {}",
                var.sqrt()
            );
        }
    }

    #[test]
    fn zero_sigma_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SentimentState::new(0.25, 0.0, ShockDistribution::Normal).unwrap();
        assert_eq!(s.evolve(0.25, &mut rng).psi, 0.25);
    }
}
