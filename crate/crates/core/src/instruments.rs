//! Closed-form values of the contracts traded in the model: the entrepreneur's
//! project, the bank loan fee, the securitized claim and the CDS.
//!
//! Every function here is pure. Units are euros per project; a project always
//! costs exactly 1.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ModelResult};

/// Cost of one project, and the face value of the loan that funds it.
pub const PROJECT_COST: f64 = 1.0;

/// An investment opportunity: pays `payoff_good` with probability `1 - theta`
/// and `payoff_bad` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Project {
    theta: f64,
    payoff_good: f64,
    payoff_bad: f64,
}

impl Project {
    pub fn new(theta: f64, payoff_good: f64, payoff_bad: f64) -> ModelResult<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(ModelError::InvalidParameter(format!(
                "theta out of [0,1]: {theta}"
            )));
        }
        if !payoff_good.is_finite() || payoff_good < PROJECT_COST {
            return Err(ModelError::InvalidParameter(format!(
                "payoff_good must be at least the project cost 1: {payoff_good}"
            )));
        }
        if !payoff_bad.is_finite() || payoff_bad > payoff_good {
            return Err(ModelError::InvalidParameter(format!(
                "payoff_bad must not exceed payoff_good: {payoff_bad}"
            )));
        }
        Ok(Self {
            theta,
            payoff_good,
            payoff_bad,
        })
    }

    /// Project with the bad-state payoff fixed at zero.
    pub fn with_default_probability(theta: f64, payoff_good: f64) -> ModelResult<Self> {
        Self::new(theta, payoff_good, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn payoff_good(&self) -> f64 {
        self.payoff_good
    }

    pub fn payoff_bad(&self) -> f64 {
        self.payoff_bad
    }

    pub fn cost(&self) -> f64 {
        PROJECT_COST
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeeMode {
    /// Fee equals the expected loss on the €1 loan with full loss given default.
    ExpectedLoss,
    /// Expected loss plus a share `alpha` of the expected surplus over cost.
    SurplusShare,
}

/// How the bank prices the origination fee. `alpha` measures how little
/// competition there is in banking (0 = perfectly competitive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeeModel {
    pub alpha: f64,
    pub mode: FeeMode,
}

impl Default for FeeModel {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            mode: FeeMode::ExpectedLoss,
        }
    }
}

impl FeeModel {
    pub fn validate(&self) -> ModelResult<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ModelError::InvalidParameter(format!(
                "alpha out of [0,1]: {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Retention schedule `d(theta) = clamp(d0 + d1 * theta, floor, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkinModel {
    pub d0: f64,
    pub d1: f64,
    pub floor: f64,
}

impl Default for SkinModel {
    fn default() -> Self {
        Self {
            d0: 0.1,
            d1: 0.5,
            floor: 0.05,
        }
    }
}

impl SkinModel {
    pub fn validate(&self) -> ModelResult<()> {
        if !(self.floor > 0.0 && self.floor <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "skin floor out of (0,1]: {}",
                self.floor
            )));
        }
        if !(0.0..=1.0).contains(&self.d0) {
            return Err(ModelError::InvalidParameter(format!(
                "skin d0 out of [0,1]: {}",
                self.d0
            )));
        }
        if !(self.d1.is_finite() && self.d1 >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "skin slope d1 must be nonnegative: {}",
                self.d1
            )));
        }
        Ok(())
    }
}

/// A fully collateralized CDS on one unit of a reference loan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdsTerms {
    lgd: f64,
    market_spread: f64,
}

impl CdsTerms {
    pub fn new(lgd: f64, market_spread: f64) -> ModelResult<Self> {
        if !(lgd > 0.0 && lgd <= 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "loss given default out of (0,1]: {lgd}"
            )));
        }
        if !(market_spread.is_finite() && market_spread >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "market spread must be nonnegative: {market_spread}"
            )));
        }
        Ok(Self { lgd, market_spread })
    }

    /// Terms trading at the zero-profit spread plus `shock`, floored at zero.
    pub fn priced(project: &Project, lgd: f64, shock: f64) -> ModelResult<Self> {
        let fair = project.theta() * lgd;
        Self::new(lgd, (fair + shock).max(0.0))
    }

    pub fn lgd(&self) -> f64 {
        self.lgd
    }

    pub fn market_spread(&self) -> f64 {
        self.market_spread
    }

    pub fn notional(&self) -> f64 {
        1.0
    }

    /// One unit of equity backs each contract sold.
    pub fn fully_collateralized(&self) -> bool {
        true
    }
}

pub fn expected_project_value(project: &Project) -> f64 {
    (1.0 - project.theta) * project.payoff_good + project.theta * project.payoff_bad
}

/// Upfront fee charged to the entrepreneur. Must stay below the €1 cost,
/// otherwise the entrepreneur would self-finance.
pub fn origination_fee(project: &Project, model: &FeeModel) -> ModelResult<f64> {
    model.validate()?;
    let theta = project.theta;
    let fee = match model.mode {
        FeeMode::ExpectedLoss => theta * PROJECT_COST,
        FeeMode::SurplusShare => {
            let surplus_share = model.alpha * (project.payoff_good - PROJECT_COST);
            if surplus_share >= 1.0 {
                // fee would no longer rise with theta
                return Err(ModelError::InvalidParameter(format!(
                    "alpha * (payoff_good - 1) must be below 1: {surplus_share}"
                )));
            }
            theta + (1.0 - theta) * surplus_share
        }
    };
    if fee >= PROJECT_COST {
        return Err(ModelError::FeeTooLarge { fee });
    }
    Ok(fee)
}

/// Rational price of a securitized €1 loan: its repayment probability.
pub fn fundamental_price(project: &Project) -> f64 {
    1.0 - project.theta
}

/// Zero-profit CDS spread.
pub fn fair_cds_spread(project: &Project, terms: &CdsTerms) -> f64 {
    project.theta * terms.lgd
}

/// CDS basis `s - f`. Positive in calm markets, negative under stress.
pub fn cds_basis(terms: &CdsTerms, fee: f64) -> f64 {
    terms.market_spread - fee
}

pub fn skin_in_game(project: &Project, model: &SkinModel) -> f64 {
    (model.d0 + model.d1 * project.theta).clamp(model.floor, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn project(theta: f64, good: f64) -> Project {
        Project::with_default_probability(theta, good).unwrap()
    }

    #[test]
    fn expected_value_cases() {
        assert_eq!(expected_project_value(&project(0.0, 1.2)), 1.2);
        assert_eq!(expected_project_value(&project(1.0, 1.2)), 0.0);
        assert!((expected_project_value(&project(0.2, 1.5)) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed_projects() {
        assert!(Project::new(1.5, 1.2, 0.0).is_err());
        assert!(Project::new(-0.1, 1.2, 0.0).is_err());
        assert!(Project::new(0.2, 0.9, 0.0).is_err());
        assert!(Project::new(0.2, 1.2, 1.3).is_err());
    }

    #[test]
    fn fee_modes() {
        let el = FeeModel::default();
        assert_eq!(origination_fee(&project(0.2, 1.2), &el).unwrap(), 0.2);
        assert_eq!(origination_fee(&project(0.0, 1.2), &el).unwrap(), 0.0);

        let competitive = FeeModel {
            alpha: 0.0,
            mode: FeeMode::SurplusShare,
        };
        assert_eq!(
            origination_fee(&project(0.0, 1.4), &competitive).unwrap(),
            0.0
        );

        let share = FeeModel {
            alpha: 0.5,
            mode: FeeMode::SurplusShare,
        };
        let fee = origination_fee(&project(0.1, 1.4), &share).unwrap();
        assert!((fee - 0.28).abs() < 1e-15);
    }

    #[test]
    fn fee_too_large_for_sure_default() {
        let err = origination_fee(&project(1.0, 1.2), &FeeModel::default()).unwrap_err();
        assert_eq!(err, ModelError::FeeTooLarge { fee: 1.0 });
    }

    #[test]
    fn surplus_share_must_keep_fee_increasing() {
        let greedy = FeeModel {
            alpha: 1.0,
            mode: FeeMode::SurplusShare,
        };
        assert!(origination_fee(&project(0.1, 2.5), &greedy).is_err());
    }

    #[test]
    fn fundamental_prices() {
        assert_eq!(fundamental_price(&project(0.0, 1.2)), 1.0);
        assert_eq!(fundamental_price(&project(0.01, 1.2)), 0.99);
        assert!((fundamental_price(&project(0.90, 1.2)) - 0.10).abs() < 1e-15);
    }

    #[test]
    fn cds_spread_and_basis() {
        let fair = |theta: f64, w: f64| {
            let p = project(theta, 1.2);
            fair_cds_spread(&p, &CdsTerms::new(w, 0.0).unwrap())
        };
        assert_eq!(fair(0.0, 1.0), 0.0);
        assert_eq!(fair(0.2, 1.0), 0.2);
        assert!((fair(0.5, 0.6) - 0.3).abs() < 1e-15);

        let basis = |s: f64, f: f64| cds_basis(&CdsTerms::new(1.0, s).unwrap(), f);
        assert_eq!(basis(0.2, 0.2), 0.0);
        assert!((basis(0.25, 0.2) - 0.05).abs() < 1e-15);
        assert!((basis(0.10, 0.2) + 0.10).abs() < 1e-15);
    }

    #[test]
    fn cds_terms_validation() {
        assert!(CdsTerms::new(0.0, 0.1).is_err());
        assert!(CdsTerms::new(1.1, 0.1).is_err());
        assert!(CdsTerms::new(1.0, -0.1).is_err());
        let shocked = CdsTerms::priced(&project(0.1, 1.2), 1.0, -0.5).unwrap();
        assert_eq!(shocked.market_spread(), 0.0);
    }

    #[test]
    fn skin_schedule() {
        let m = SkinModel::default();
        assert!((skin_in_game(&project(0.0, 1.2), &m) - 0.10).abs() < 1e-15);
        assert!((skin_in_game(&project(0.2, 1.2), &m) - 0.20).abs() < 1e-15);
        assert!(skin_in_game(&project(1.0, 1.2), &m) <= 1.0);
        let steep = SkinModel {
            d0: 0.5,
            d1: 2.0,
            floor: 0.05,
        };
        assert_eq!(skin_in_game(&project(1.0, 1.2), &steep), 1.0);
        let tiny = SkinModel {
            d0: 0.0,
            d1: 0.1,
            floor: 0.05,
        };
        assert_eq!(skin_in_game(&project(0.0, 1.2), &tiny), 0.05);
    }

    #[test]
    fn fair_spread_matches_expected_loss_fee() {
        for i in 0..=99 {
            let theta = i as f64 / 100.0;
            let p = project(theta, 1.2);
            let fee = origination_fee(&p, &FeeModel::default()).unwrap();
            let terms = CdsTerms::priced(&p, 1.0, 0.0).unwrap();
            assert_eq!(cds_basis(&terms, fee), 0.0);
            assert_eq!(fundamental_price(&p) + p.theta(), 1.0);
        }
    }
}
