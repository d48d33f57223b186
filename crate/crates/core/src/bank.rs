//! Balance-sheet mechanics of the representative bank.
//!
//! Quantities are tracked in par units and valued through [`Marks`]: a loan
//! or securitized claim is worth its expected repayment, a CDS its expected
//! payment. Borrowing is collateralized by the par value `J` of securities
//! held and keeps the haircut `E / (E + L) = h`, i.e. `L = (1 - h) * J`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ModelResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FundingMode {
    Hold,
    Securitize,
    SecuritizeLevered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SettlementMode {
    #[default]
    Expectation,
    Realized,
}

/// Capital requirement, distribution ratio and haircut, per period where the
/// rules allow them to differ between dates 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegulatoryParams {
    pub e_req: [f64; 2],
    pub g: [f64; 2],
    pub payout_split: f64,
    pub haircut: f64,
}

impl Default for RegulatoryParams {
    fn default() -> Self {
        Self {
            e_req: [0.01, 0.01],
            g: [1.0, 1.0],
            payout_split: 0.5,
            haircut: 0.2,
        }
    }
}

impl RegulatoryParams {
    pub fn validate(&self) -> ModelResult<()> {
        if !(self.haircut > 0.0 && self.haircut <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "haircut out of (0,1]: {}",
                self.haircut
            )));
        }
        for (i, g) in self.g.iter().enumerate() {
            if !(0.0..=1.0).contains(g) {
                return Err(ModelError::InvalidParameter(format!(
                    "g_{} out of [0,1]: {g}",
                    i + 1
                )));
            }
        }
        for (i, e) in self.e_req.iter().enumerate() {
            if !(*e > 0.0 && *e <= 1.0) {
                return Err(ModelError::InvalidParameter(format!(
                    "e_req_{} out of (0,1]: {e}",
                    i + 1
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.payout_split) {
            return Err(ModelError::InvalidParameter(format!(
                "payout_split out of [0,1]: {}",
                self.payout_split
            )));
        }
        Ok(())
    }
}

/// Per-unit values used to mark the book.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marks {
    /// Expected repayment of one unit of loan or securitized claim.
    pub claim_value: f64,
    /// Expected payment on one CDS contract.
    pub expected_payment: f64,
}

impl Marks {
    pub fn new(theta: f64, lgd: f64) -> Self {
        let expected_payment = theta * lgd;
        Self {
            claim_value: 1.0 - expected_payment,
            expected_payment,
        }
    }

    /// Everything at par, no expected losses.
    pub fn par() -> Self {
        Self {
            claim_value: 1.0,
            expected_payment: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BankState {
    pub period: u8,
    pub cash: f64,
    /// Unhedged loans kept on the book.
    pub loans_held: f64,
    /// Loans kept on the book with a CDS bought against each.
    pub hedged_loans: f64,
    /// Securitized claims held, at par: retained skin plus purchases.
    pub securities_held: f64,
    pub borrowing: f64,
    pub cds_sold: f64,
    /// Naked protection; hedges are tracked through `hedged_loans`.
    pub cds_bought_naked: f64,
    /// Equity set aside as collateral, one unit per CDS sold.
    pub cds_collateral: f64,
}

impl BankState {
    pub fn new(equity: f64) -> ModelResult<Self> {
        if !(equity.is_finite() && equity >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "initial equity must be nonnegative: {equity}"
            )));
        }
        Ok(Self {
            period: 1,
            cash: equity,
            ..Default::default()
        })
    }

    /// Book equity with positions valued at `marks`.
    pub fn equity(&self, marks: &Marks) -> f64 {
        self.cash
            + self.cds_collateral
            + (self.loans_held + self.securities_held) * marks.claim_value
            + self.hedged_loans
            + (self.cds_bought_naked - self.cds_sold) * marks.expected_payment
            - self.borrowing
    }

    pub fn cds_bought(&self) -> f64 {
        self.cds_bought_naked + self.hedged_loans
    }

    /// Collateral value at par.
    pub fn collateral(&self) -> f64 {
        self.securities_held
    }

    pub fn has_positions(&self) -> bool {
        self.loans_held != 0.0
            || self.hedged_loans != 0.0
            || self.securities_held != 0.0
            || self.cds_sold != 0.0
            || self.cds_bought_naked != 0.0
            || self.borrowing != 0.0
    }
}

pub fn max_borrowing(collateral_value: f64, haircut: f64) -> f64 {
    (1.0 - haircut) * collateral_value
}

/// Projects fundable with equity `e0` under each funding mode.
pub fn max_projects(e0: f64, skin: f64, haircut: f64, mode: FundingMode) -> f64 {
    match mode {
        FundingMode::Hold => e0,
        FundingMode::Securitize => e0 / skin,
        FundingMode::SecuritizeLevered => e0 / skin / haircut,
    }
}

/// Largest book `N` with `E / N >= e_req`.
pub fn capital_ratio_cap(equity: f64, e_req: f64) -> f64 {
    if equity <= 0.0 {
        return 0.0;
    }
    equity / e_req
}

/// Fraction of collateral that must be sold at `p2` to restore the haircut.
pub fn liquidation_fraction(haircut: f64, p2: f64) -> ModelResult<f64> {
    if !(haircut > 0.0 && haircut <= 1.0) {
        return Err(ModelError::InvalidParameter(format!(
            "haircut out of (0,1]: {haircut}"
        )));
    }
    if !(p2 > 0.0 && p2 <= 1.0) {
        return Err(ModelError::InvalidParameter(format!(
            "collateral price out of (0,1]: {p2}"
        )));
    }
    if haircut == 1.0 {
        return Ok(0.0);
    }
    let floor = 1.0 - haircut;
    if p2 < floor {
        return Err(ModelError::FullWipeout { price: p2, floor });
    }
    if p2 == floor {
        return Ok(1.0);
    }
    let q = ((1.0 - p2) / p2) * ((1.0 - haircut) / haircut);
    Ok(q.clamp(0.0, 1.0))
}

/// Units `S = J * Q` to sell so that selling at `p2` and repaying `S * p2`
/// of debt restores `E2 / (E2 + L2) = h`, for a book with `L1 = (1 - h) J1`.
pub fn required_liquidation(collateral: f64, haircut: f64, p2: f64) -> ModelResult<f64> {
    Ok(collateral * liquidation_fraction(haircut, p2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Payout {
    pub dividends: f64,
    pub bonuses: f64,
    pub retained: f64,
}

impl Payout {
    pub fn distributed(&self) -> f64 {
        self.dividends + self.bonuses
    }

    /// What equity holders receive now or as capital gains later.
    pub fn shareholder_total(&self) -> f64 {
        self.dividends + self.retained
    }
}

/// Splits period profits `b + fee_income`: a share `g` is paid out, divided
/// between dividends and bonuses by `split`, and the rest is retained.
pub fn payout(b: f64, fee_income: f64, g: f64, split: f64) -> Payout {
    let profit = b + fee_income;
    let distributed = profit * g;
    let dividends = distributed * split;
    Payout {
        dividends,
        bonuses: distributed - dividends,
        retained: profit - distributed,
    }
}

/// Expected or realized cash flows of period-3 settlement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Settlement {
    pub loan_repayments: f64,
    pub hedged_repayments: f64,
    pub security_payoffs: f64,
    pub cds_sold_payouts: f64,
    pub cds_bought_receipts: f64,
    pub debt_repaid: f64,
    pub terminal_equity: f64,
}

impl Settlement {
    /// Change in book equity caused by settlement.
    pub fn pnl(&self, before: &BankState, marks: &Marks) -> f64 {
        self.terminal_equity - before.equity(marks)
    }
}

fn defaulted_quantity<R: Rng + ?Sized>(quantity: f64, theta: f64, rng: &mut R) -> f64 {
    // one independent draw per whole unit, one more for the fractional rest
    let whole = quantity.floor();
    let mut defaulted = 0.0;
    for _ in 0..whole as u64 {
        if rng.random::<f64>() < theta {
            defaulted += 1.0;
        }
    }
    let rest = quantity - whole;
    if rest > 0.0 && rng.random::<f64>() < theta {
        defaulted += rest;
    }
    defaulted
}

/// Closes every position at date 3 and repays all borrowing.
///
/// Returns the closed state (only cash remains, equal to terminal equity)
/// and the settlement cash flows. Terminal equity below zero is reported as
/// [`ModelError::InsolventBank`].
#[allow(clippy::result_large_err)]
pub fn settle_period3<R: Rng + ?Sized>(
    state: &BankState,
    theta: f64,
    lgd: f64,
    mode: SettlementMode,
    rng: &mut R,
) -> Result<(BankState, Settlement), (BankState, Settlement, ModelError)> {
    let loss_units = |quantity: f64, rng: &mut R| -> f64 {
        match mode {
            SettlementMode::Expectation => quantity * theta,
            SettlementMode::Realized => defaulted_quantity(quantity, theta, rng),
        }
    };
    let loan_defaults = loss_units(state.loans_held, rng);
    let security_defaults = loss_units(state.securities_held, rng);
    let sold_defaults = loss_units(state.cds_sold, rng);
    let bought_defaults = loss_units(state.cds_bought_naked, rng);

    let mut s = Settlement {
        loan_repayments: state.loans_held - lgd * loan_defaults,
        hedged_repayments: state.hedged_loans,
        security_payoffs: state.securities_held - lgd * security_defaults,
        cds_sold_payouts: lgd * sold_defaults,
        cds_bought_receipts: lgd * bought_defaults,
        debt_repaid: state.borrowing,
        terminal_equity: 0.0,
    };
    let cash = state.cash
        + s.loan_repayments
        + s.hedged_repayments
        + s.security_payoffs
        + state.cds_collateral
        - s.cds_sold_payouts
        + s.cds_bought_receipts
        - s.debt_repaid;
    s.terminal_equity = cash;
    let closed = BankState {
        period: 3,
        cash,
        ..Default::default()
    };
    if cash < 0.0 {
        return Err((closed, s, ModelError::InsolventBank { equity: cash }));
    }
    Ok((closed, s))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn borrowing_limits() {
        assert_eq!(max_borrowing(3.0, 1.0), 0.0);
        assert_eq!(max_borrowing(10.0, 0.2), 8.0);
        assert_eq!(max_borrowing(0.0, 0.2), 0.0);
    }

    #[test]
    fn project_capacity_by_mode() {
        assert_eq!(max_projects(1.0, 0.2, 0.2, FundingMode::Hold), 1.0);
        assert_eq!(max_projects(1.0, 0.2, 0.2, FundingMode::Securitize), 5.0);
        assert_eq!(
            max_projects(1.0, 0.2, 0.2, FundingMode::SecuritizeLevered),
            25.0
        );
    }

    #[test]
    fn levered_book_satisfies_haircut() {
        let (e0, d, h) = (1.0, 0.2, 0.2);
        let n = max_projects(e0, d, h, FundingMode::SecuritizeLevered);
        let collateral = n * d;
        let debt = max_borrowing(collateral, h);
        assert!((e0 / (e0 + debt) - h).abs() < 1e-12);
        assert!((collateral - (e0 + debt)).abs() < 1e-12);
    }

    #[test]
    fn capital_ratio() {
        assert_eq!(capital_ratio_cap(1.0, 1.0), 1.0);
        assert_eq!(capital_ratio_cap(1.0, 0.1), 10.0);
        assert_eq!(capital_ratio_cap(0.0, 0.1), 0.0);
    }

    #[test]
    fn liquidation_polar_cases() {
        assert_eq!(required_liquidation(5.0, 1.0, 0.4).unwrap(), 0.0);
        let h = 0.2;
        assert_eq!(required_liquidation(5.0, h, 1.0 - h).unwrap(), 5.0);
        assert!(matches!(
            required_liquidation(5.0, h, 0.7),
            Err(ModelError::FullWipeout { .. })
        ));
        assert_eq!(required_liquidation(5.0, h, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn liquidation_interior() {
        let s = required_liquidation(5.0, 0.2, 0.9).unwrap();
        assert!((s - 20.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn payout_rules() {
        let p = payout(0.3, 0.2, 0.0, 0.5);
        assert_eq!(p.retained, 0.5);
        assert_eq!(p.distributed(), 0.0);

        let early = payout(0.6, 0.4, 0.2, 0.5);
        assert!((early.shareholder_total() - 0.9).abs() < 1e-12);
        let late = payout(0.6, 0.4, 0.4, 0.5);
        assert!((late.shareholder_total() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn settlement_identity_without_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = BankState::new(2.5).unwrap();
        let (closed, s) =
            settle_period3(&state, 0.2, 1.0, SettlementMode::Expectation, &mut rng).unwrap();
        assert_eq!(closed.cash, 2.5);
        assert_eq!(s.pnl(&state, &Marks::new(0.2, 1.0)), 0.0);
    }

    #[test]
    fn settlement_expected_loan_and_cds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let loan = BankState {
            loans_held: 1.0,
            ..Default::default()
        };
        let (_, s) =
            settle_period3(&loan, 0.2, 1.0, SettlementMode::Expectation, &mut rng).unwrap();
        assert!((s.loan_repayments - 0.8).abs() < 1e-15);

        let naked = BankState {
            cds_bought_naked: 1.0,
            ..Default::default()
        };
        let (closed, s) =
            settle_period3(&naked, 0.2, 1.0, SettlementMode::Expectation, &mut rng).unwrap();
        assert!((s.cds_bought_receipts - 0.2).abs() < 1e-15);
        assert!((closed.cash - 0.2).abs() < 1e-15);

        let hedged = BankState {
            hedged_loans: 1.0,
            ..Default::default()
        };
        let (closed, _) =
            settle_period3(&hedged, 0.9, 1.0, SettlementMode::Realized, &mut rng).unwrap();
        assert_eq!(closed.cash, 1.0);
    }

    #[test]
    fn expectation_settlement_preserves_marked_equity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = BankState {
            period: 2,
            cash: 0.7,
            loans_held: 2.0,
            hedged_loans: 1.5,
            securities_held: 3.0,
            borrowing: 2.4,
            cds_sold: 1.0,
            cds_bought_naked: 4.0,
            cds_collateral: 1.0,
        };
        let marks = Marks::new(0.25, 0.6);
        let (_, s) =
            settle_period3(&state, 0.25, 0.6, SettlementMode::Expectation, &mut rng).unwrap();
        assert!(s.pnl(&state, &marks).abs() < 1e-12);
        let par = BankState {
            loans_held: 1.0,
            ..Default::default()
        };
        assert_eq!(par.equity(&Marks::par()), 1.0);
    }

    #[test]
    fn insolvency_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = BankState {
            securities_held: 5.0,
            borrowing: 4.9,
            ..Default::default()
        };
        let err =
            settle_period3(&state, 0.2, 1.0, SettlementMode::Expectation, &mut rng).unwrap_err();
        assert!(matches!(err.2, ModelError::InsolventBank { .. }));
        assert!((err.0.cash - (4.0 - 4.9)).abs() < 1e-12);
    }

    #[test]
    fn realized_defaults_average_to_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let state = BankState {
            loans_held: 10_000.0,
            ..Default::default()
        };
        let (_, s) = settle_period3(&state, 0.3, 1.0, SettlementMode::Realized, &mut rng).unwrap();
        let default_rate = 1.0 - s.loan_repayments / 10_000.0;
        assert!((default_rate - 0.3).abs() < 4.0 * (0.3f64 * 0.7 / 10_000.0).sqrt());
    }

    #[test]
    fn regulatory_validation() {
        assert!(RegulatoryParams::default().validate().is_ok());
        let bad = RegulatoryParams {
            haircut: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RegulatoryParams {
            g: [1.2, 0.5],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
