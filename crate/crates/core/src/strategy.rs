//! Decision rules of the bank: which use of capital to pick in a period and
//! how to split lending between dates 1 and 2.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ModelResult};
use crate::instruments::{CdsTerms, Project};
use crate::market::{MarketState, Regime, RegimeTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    LendHold,
    LendSecuritize,
    LendHedge,
    SellCds,
    BuyNakedCds,
    BuySecuritized,
    HoldCash,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::LendHold => "lend_hold",
            Action::LendSecuritize => "lend_securitize",
            Action::LendHedge => "lend_hedge",
            Action::SellCds => "sell_cds",
            Action::BuyNakedCds => "buy_naked_cds",
            Action::BuySecuritized => "buy_securitized",
            Action::HoldCash => "hold_cash",
        }
    }

    pub fn is_lending(&self) -> bool {
        matches!(
            self,
            Action::LendHold | Action::LendSecuritize | Action::LendHedge
        )
    }

    /// Tie-break order, lower wins: real lending before trading, trading
    /// before derivatives, cash last.
    fn priority(&self) -> u8 {
        match self {
            Action::LendSecuritize => 0,
            Action::LendHold => 1,
            Action::LendHedge => 2,
            Action::BuySecuritized => 3,
            Action::SellCds => 4,
            Action::BuyNakedCds => 5,
            Action::HoldCash => 6,
        }
    }
}

/// Per-position economics of one action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyQuote {
    pub action: Action,
    /// Total expected profit of one position (loan, contract or unit),
    /// including the date-3 payoff.
    pub expected_profit: f64,
    /// Equity tied up by one position.
    pub capital_required: f64,
    /// Profit booked in the trading period alone: fees, premia and price
    /// gaps, ignoring expected date-3 losses.
    pub period_income: f64,
    pub notes: &'static str,
}

impl StrategyQuote {
    pub fn expected_profit_per_unit_capital(&self) -> f64 {
        if self.capital_required == 0.0 {
            0.0
        } else {
            self.expected_profit / self.capital_required
        }
    }
}

/// Which actions the configuration allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSet {
    pub securitization: bool,
    pub cds: bool,
    pub naked_cds: bool,
    /// Haircut applied to securitized lending when leverage is on.
    pub leverage_haircut: Option<f64>,
}

impl ActionSet {
    pub fn everything() -> Self {
        Self {
            securitization: true,
            cds: true,
            naked_cds: true,
            leverage_haircut: None,
        }
    }
}

pub fn securitization_profitable(price: f64, fundamental: f64, fee: f64) -> bool {
    price - fundamental > 1.0 - fee
}

/// Quotes every action allowed by `allowed` at the current market price.
///
/// `market.fundamental` is the value of a claim on one loan; it equals
/// `1 - theta` when the loss given default is 1.
pub fn quote_actions(
    market: &MarketState,
    project: &Project,
    terms: &CdsTerms,
    fee: f64,
    skin: f64,
    allowed: &ActionSet,
) -> ModelResult<Vec<StrategyQuote>> {
    let theta = project.theta();
    let w = terms.lgd();
    let s = terms.market_spread();
    let expected_loss = theta * w;
    let price = market.cleared_price;
    let value = market.fundamental;

    let mut quotes = vec![StrategyQuote {
        action: Action::LendHold,
        expected_profit: fee - expected_loss,
        capital_required: 1.0,
        period_income: fee,
        notes: "fee less expected loss on a loan kept unhedged",
    }];
    if allowed.securitization {
        let gain = (price - value) * (1.0 - skin);
        quotes.push(StrategyQuote {
            action: Action::LendSecuritize,
            expected_profit: fee - 1.0 + price * (1.0 - skin) + (1.0 - expected_loss) * skin,
            capital_required: match allowed.leverage_haircut {
                Some(h) => skin * h,
                None => skin,
            },
            period_income: fee + gain,
            notes: "fee, sale of 1-d at the market price, retained d at fundamentals",
        });
    }
    if price < value {
        quotes.push(StrategyQuote {
            action: Action::BuySecuritized,
            expected_profit: value - price,
            capital_required: price,
            period_income: value - price,
            notes: "fundamental value less purchase price",
        });
    }
    if allowed.cds {
        quotes.push(StrategyQuote {
            action: Action::LendHedge,
            expected_profit: fee - 1.0 - s + 1.0,
            capital_required: 1.0 + s,
            period_income: fee - s,
            notes: "fee less premium; the hedged loan repays 1 for sure",
        });
        quotes.push(StrategyQuote {
            action: Action::SellCds,
            expected_profit: s - expected_loss,
            capital_required: 1.0,
            period_income: s,
            notes: "premium less expected payout, one unit of collateral",
        });
        if allowed.naked_cds {
            if s == 0.0 {
                return Err(ModelError::ZeroSpread);
            }
            quotes.push(StrategyQuote {
                action: Action::BuyNakedCds,
                expected_profit: expected_loss - s,
                capital_required: s,
                period_income: -s,
                notes: "expected protection payment less premium",
            });
        }
    }
    quotes.push(StrategyQuote {
        action: Action::HoldCash,
        expected_profit: 0.0,
        capital_required: 0.0,
        period_income: 0.0,
        notes: "idle",
    });
    Ok(quotes)
}

/// Contracts affordable when all of `capital` buys protection at spread `s`.
pub fn naked_cds_contracts(capital: f64, spread: f64) -> ModelResult<f64> {
    if spread == 0.0 {
        return Err(ModelError::ZeroSpread);
    }
    Ok(capital / spread)
}

/// Highest expected profit per unit of capital, ties broken toward lending.
pub fn best_action<'a>(
    quotes: &'a [StrategyQuote],
    candidates: &[Action],
) -> Option<&'a StrategyQuote> {
    quotes
        .iter()
        .filter(|q| candidates.contains(&q.action))
        .fold(None, |best: Option<&StrategyQuote>, q| match best {
            None => Some(q),
            Some(b) => {
                let (qr, br) = (
                    q.expected_profit_per_unit_capital(),
                    b.expected_profit_per_unit_capital(),
                );
                if qr > br || (qr == br && q.action.priority() < b.action.priority()) {
                    Some(q)
                } else {
                    Some(b)
                }
            }
        })
}

/// Keep the loan and hedge it, or securitize it, in an overpriced market.
///
/// Compares the securitization gain `(P_t - P)(1 - d)` with the hedged
/// payoff `1 - s / w`. Equality keeps the loan.
pub fn hedge_or_securitize(
    price: f64,
    fundamental: f64,
    skin: f64,
    spread: f64,
    lgd: f64,
) -> Action {
    let securitize = (price - fundamental) * (1.0 - skin);
    let hedge = 1.0 - spread / lgd;
    if securitize > hedge {
        Action::LendSecuritize
    } else {
        Action::LendHedge
    }
}

/// Use of reserves in an underpriced market at date 2: lend at fee `f`,
/// buy distressed securities earning `P - P_2`, or (with CDS) sell
/// protection for premium `s`. Ties go to lending.
pub fn reserve_deployment(fee: f64, fundamental: f64, price: f64, spread: Option<f64>) -> Action {
    let purchase = fundamental - price;
    let mut best = (Action::LendHold, fee);
    if purchase > best.1 {
        best = (Action::BuySecuritized, purchase);
    }
    if let Some(s) = spread {
        if s > best.1 {
            best = (Action::SellCds, s);
        }
    }
    best.0
}

/// Resolution of the bank's indifference between lending dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IndifferencePolicy {
    #[default]
    EvenSplit,
    FrontLoad,
    BackLoad,
}

impl IndifferencePolicy {
    pub fn share(&self) -> f64 {
        match self {
            IndifferencePolicy::EvenSplit => 0.5,
            IndifferencePolicy::FrontLoad => 1.0,
            IndifferencePolicy::BackLoad => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedTrade {
    pub period: u8,
    pub action: Action,
    /// Share of initial funds.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    /// Share of funds deployed at date 1.
    pub x: f64,
    pub trade_plan: Vec<PlannedTrade>,
    pub foresight: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationRules {
    pub policy: IndifferencePolicy,
    pub securitization: bool,
}

fn lending_action(regime: Option<&Regime>, securitization: bool) -> Action {
    match regime {
        Some(r) if securitization && r.tag != RegimeTag::Underpriced => Action::LendSecuritize,
        None if securitization => Action::LendSecuritize,
        _ => Action::LendHold,
    }
}

/// Splits lending between dates 1 and 2.
///
/// A profitable overpricing (gap above `1 - f`) concentrates all
/// originate-to-distribute activity in one date. Without such an
/// opportunity the bank is indifferent and `rules.policy` decides.
/// `expected_t2` is `None` unless the bank has foresight.
pub fn choose_allocation(
    regime_t1: &Regime,
    expected_t2: Option<&Regime>,
    fee: f64,
    foresight: bool,
    rules: AllocationRules,
) -> AllocationPlan {
    let bar = 1.0 - fee;
    let profitable = |r: &Regime| rules.securitization && r.is_overpriced() && r.magnitude > bar;
    let known_t2 = if foresight { expected_t2 } else { None };

    let p1 = profitable(regime_t1);
    let p2 = known_t2.map(profitable).unwrap_or(false);
    let x = match (p1, p2) {
        (true, true) => {
            let m2 = known_t2.map(|r| r.magnitude).unwrap_or(0.0);
            if regime_t1.magnitude >= m2 {
                1.0
            } else {
                0.0
            }
        }
        (true, false) => 1.0,
        (false, true) => 0.0,
        (false, false) => rules.policy.share(),
    };

    let mut trade_plan = Vec::new();
    if x > 0.0 {
        trade_plan.push(PlannedTrade {
            period: 1,
            action: lending_action(Some(regime_t1), rules.securitization),
            share: x,
        });
    }
    if x < 1.0 {
        trade_plan.push(PlannedTrade {
            period: 2,
            action: lending_action(known_t2, rules.securitization),
            share: 1.0 - x,
        });
    }
    AllocationPlan {
        x,
        trade_plan,
        foresight,
    }
}
