use rand::Rng;
use serde::Serialize;

use super::Scenario;
use crate::bank::{
    capital_ratio_cap, max_borrowing, max_projects, payout, required_liquidation, settle_period3,
    BankState, FundingMode, Payout,
};
use crate::error::ModelError;
use crate::instruments::expected_project_value;
use crate::market::{classify_regime, clear_market, MarketState, Regime, RegimeTag};
use crate::strategy::{
    best_action, choose_allocation, hedge_or_securitize, naked_cds_contracts, quote_actions,
    reserve_deployment, Action, ActionSet, AllocationRules,
};

/// One trade executed on a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeRecord {
    pub period: u8,
    pub action: Action,
    /// Loans, contracts or security units.
    pub quantity: f64,
    /// Equity committed to the trade.
    pub capital: f64,
}

/// Outcomes that end a path abnormally without failing the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PathFlags {
    pub negative_price: bool,
    pub full_wipeout: bool,
    pub insolvent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathResult {
    /// Share of lending capital committed at date 1.
    pub x: f64,
    pub planned_x: f64,
    pub cyclicity: f64,
    /// Loans originated at dates 1 and 2.
    pub projects: [f64; 2],
    pub lending_capital: [f64; 2],
    pub output_proxy: f64,
    /// Prices after the bank's trades.
    pub prices: [f64; 2],
    pub psi: [f64; 2],
    /// Regimes set by sentiment alone, before the bank trades.
    pub regimes: [RegimeTag; 2],
    pub liquidation: f64,
    pub actions: Vec<TradeRecord>,
    /// Securitized units sold to noise traders, per date.
    pub units_sold: [f64; 2],
    pub units_bought: f64,
    pub cds_sold: f64,
    pub cds_bought: f64,
    pub hedged_loans: f64,
    pub fee_income: f64,
    pub period_profit: [f64; 2],
    pub dividends: f64,
    pub bonuses: f64,
    pub retained: f64,
    pub settlement_pnl: f64,
    pub e3: f64,
    pub flags: PathFlags,
    /// Marked equity before settlement less `E0 + retained + distributions owed`.
    pub reconciliation_residual: f64,
}

/// Scalar metrics aggregated across paths, in report order.
pub const METRICS: &[&str] = &[
    "x",
    "cyclicity",
    "projects_t1",
    "projects_t2",
    "projects_total",
    "output_proxy",
    "price_t1",
    "price_t2",
    "psi_t1",
    "psi_t2",
    "psi_increment",
    "liquidation",
    "units_sold",
    "units_bought",
    "cds_sold",
    "cds_bought",
    "hedged_loans",
    "fee_income",
    "dividends",
    "bonuses",
    "retained",
    "e3",
];

impl PathResult {
    pub fn total_projects(&self) -> f64 {
        self.projects[0] + self.projects[1]
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        let v = match name {
            "x" => self.x,
            "cyclicity" => self.cyclicity,
            "projects_t1" => self.projects[0],
            "projects_t2" => self.projects[1],
            "projects_total" => self.total_projects(),
            "output_proxy" => self.output_proxy,
            "price_t1" => self.prices[0],
            "price_t2" => self.prices[1],
            "psi_t1" => self.psi[0],
            "psi_t2" => self.psi[1],
            "psi_increment" => self.psi[1] - self.psi[0],
            "liquidation" => self.liquidation,
            "units_sold" => self.units_sold[0] + self.units_sold[1],
            "units_bought" => self.units_bought,
            "cds_sold" => self.cds_sold,
            "cds_bought" => self.cds_bought,
            "hedged_loans" => self.hedged_loans,
            "fee_income" => self.fee_income,
            "dividends" => self.dividends,
            "bonuses" => self.bonuses,
            "retained" => self.retained,
            "e3" => self.e3,
            _ => return None,
        };
        Some(v)
    }

    /// Main action of a date, by committed capital.
    pub fn primary_action(&self, period: u8) -> Option<Action> {
        self.actions
            .iter()
            .filter(|a| a.period == period)
            .fold(None, |best: Option<&TradeRecord>, a| match best {
                Some(b) if b.capital >= a.capital => Some(b),
                _ => Some(a),
            })
            .map(|a| a.action)
    }
}

fn clear(fundamental: f64, psi: f64, capacity: f64, inventory: f64) -> Result<MarketState, f64> {
    match clear_market(fundamental, psi, capacity, inventory) {
        Ok(m) => Ok(m),
        Err(ModelError::NegativePrice { price }) => Err(price),
        Err(e) => unreachable!("capacity and inventory are nonnegative: {e}"),
    }
}

struct Run<'a> {
    sc: &'a Scenario,
    bank: BankState,
    /// Equity not committed to any position.
    free: f64,
    /// Securitized units held by noise traders.
    outstanding: f64,
    projects: [f64; 2],
    lending_capital: [f64; 2],
    profit: [f64; 2],
    fees: [f64; 2],
    actions: Vec<TradeRecord>,
    units_sold: [f64; 2],
    units_bought: f64,
    liquidation: f64,
    paid: Payout,
    flags: PathFlags,
}

impl<'a> Run<'a> {
    fn new(sc: &'a Scenario) -> Self {
        let e0 = sc.config.e0;
        Self {
            sc,
            bank: BankState::new(e0).expect("e0 validated"),
            free: e0,
            outstanding: 0.0,
            projects: [0.0; 2],
            lending_capital: [0.0; 2],
            profit: [0.0; 2],
            fees: [0.0; 2],
            actions: Vec::new(),
            units_sold: [0.0; 2],
            units_bought: 0.0,
            liquidation: 0.0,
            paid: Payout::default(),
            flags: PathFlags::default(),
        }
    }

    fn record(&mut self, t: usize, action: Action, quantity: f64, capital: f64) {
        if quantity > 0.0 {
            self.actions.push(TradeRecord {
                period: t as u8 + 1,
                action,
                quantity,
                capital,
            });
        }
    }

    /// Equity net of distributions already owed.
    fn net_equity(&self) -> f64 {
        self.bank.equity(&self.sc.marks) - self.paid.distributed()
    }

    fn loss_rate(&self) -> f64 {
        self.sc.marks.expected_payment
    }

    fn lending_action(
        &self,
        market: &MarketState,
        regime: &Regime,
        quotes: &[crate::strategy::StrategyQuote],
    ) -> Action {
        let sw = &self.sc.config.switches;
        if sw.securitization && !regime.is_underpriced() {
            if sw.cds && regime.is_overpriced() {
                hedge_or_securitize(
                    market.cleared_price,
                    market.fundamental,
                    self.sc.skin,
                    self.sc.spread(),
                    self.sc.terms.lgd(),
                )
            } else {
                Action::LendSecuritize
            }
        } else if sw.cds {
            best_action(quotes, &[Action::LendHold, Action::LendHedge])
                .map(|q| q.action)
                .unwrap_or(Action::LendHold)
        } else {
            Action::LendHold
        }
    }

    /// Commits `budget` to the best lending or CDS action at `market`.
    fn deploy(&mut self, t: usize, budget: f64, market: &MarketState, loan_cap: f64) -> f64 {
        if budget <= 0.0 {
            return 0.0;
        }
        let cfg = &self.sc.config;
        let sw = cfg.switches;
        let regime = classify_regime(market.cleared_price, market.fundamental, cfg.price_eps);
        let allowed = ActionSet {
            securitization: sw.securitization && !regime.is_underpriced(),
            cds: sw.cds,
            naked_cds: sw.naked_cds,
            leverage_haircut: sw.leverage.then_some(cfg.regulatory.haircut),
        };
        let quotes = quote_actions(
            market,
            &self.sc.project,
            &self.sc.terms,
            self.sc.fee,
            self.sc.skin,
            &allowed,
        )
        .expect("naked protection requires a positive spread, checked at validation");
        let mut candidates = vec![self.lending_action(market, &regime, &quotes)];
        if sw.cds {
            candidates.push(Action::SellCds);
        }
        if sw.naked_cds {
            candidates.push(Action::BuyNakedCds);
        }
        let chosen = best_action(&quotes, &candidates)
            .map(|q| q.action)
            .unwrap_or(Action::HoldCash);
        match chosen {
            Action::SellCds => self.sell_cds(t, budget),
            Action::BuyNakedCds => self.buy_naked_cds(t, budget),
            a if a.is_lending() => self.lend(t, a, budget, market.cleared_price, loan_cap),
            _ => 0.0,
        }
    }

    fn lend(&mut self, t: usize, action: Action, budget: f64, price: f64, loan_cap: f64) -> f64 {
        let f = self.sc.fee;
        let d = self.sc.skin;
        let el = self.loss_rate();
        let value = self.sc.fundamental();
        let h = self.sc.config.regulatory.haircut;
        let levered = self.sc.config.switches.leverage;
        let (n, capital) = match action {
            Action::LendHold => {
                let n = budget.min(loan_cap);
                self.bank.cash -= n * (1.0 - f);
                self.bank.loans_held += n;
                self.profit[t] += n * (f - el);
                (n, n)
            }
            Action::LendSecuritize => {
                let mode = if levered {
                    FundingMode::SecuritizeLevered
                } else {
                    FundingMode::Securitize
                };
                let uncapped = max_projects(budget, d, h, mode);
                let n = uncapped.min(loan_cap);
                let capital = if n == uncapped {
                    budget
                } else if levered {
                    n * d * h
                } else {
                    n * d
                };
                let sold = n * (1.0 - d);
                self.bank.cash += sold * price - n * (1.0 - f);
                self.bank.securities_held += n * d;
                if levered {
                    let debt = max_borrowing(n * d, h);
                    self.bank.cash += debt;
                    self.bank.borrowing += debt;
                }
                self.outstanding += sold;
                self.units_sold[t] += sold;
                self.profit[t] += n * (f - el) + sold * (price - value);
                (n, capital)
            }
            Action::LendHedge => {
                let s = self.sc.spread();
                let n = (budget / (1.0 + s)).min(loan_cap);
                self.bank.cash -= n * (1.0 - f + s);
                self.bank.hedged_loans += n;
                self.profit[t] += n * (f - s);
                (
                    n,
                    if n * (1.0 + s) >= budget {
                        budget
                    } else {
                        n * (1.0 + s)
                    },
                )
            }
            _ => unreachable!("not a lending action"),
        };
        self.projects[t] += n;
        self.lending_capital[t] += capital;
        self.fees[t] += n * f;
        self.record(t, action, n, capital);
        capital
    }

    fn sell_cds(&mut self, t: usize, budget: f64) -> f64 {
        let s = self.sc.spread();
        let contracts = budget;
        self.bank.cash += contracts * s - contracts;
        self.bank.cds_collateral += contracts;
        self.bank.cds_sold += contracts;
        self.profit[t] += contracts * (s - self.loss_rate());
        self.record(t, Action::SellCds, contracts, budget);
        budget
    }

    fn buy_naked_cds(&mut self, t: usize, budget: f64) -> f64 {
        let s = self.sc.spread();
        let contracts = naked_cds_contracts(budget, s).expect("spread checked at validation");
        self.bank.cash -= budget;
        self.bank.cds_bought_naked += contracts;
        self.profit[t] += contracts * (self.loss_rate() - s);
        self.record(t, Action::BuyNakedCds, contracts, budget);
        budget
    }

    /// Buys back underpriced units; returns the market after the purchase.
    fn buy_securities(&mut self, psi: f64, budget: f64, pre: &MarketState) -> (MarketState, f64) {
        let value = self.sc.fundamental();
        let capacity = budget.min(self.outstanding * pre.cleared_price);
        let m = clear(value, psi, capacity, 0.0).expect("buying only raises the price");
        let units = m.bank_units_bought();
        let spent = m.deployed_capital;
        self.bank.cash -= spent;
        self.bank.securities_held += units;
        self.outstanding -= units;
        self.units_bought += units;
        self.profit[1] += units * (value - m.cleared_price);
        self.record(1, Action::BuySecuritized, units, spent);
        (m, spent)
    }

    /// Securitizes held loans into optimism; returns the market after the sale.
    fn sell_inventory(&mut self, psi: f64) -> MarketState {
        let value = self.sc.fundamental();
        let d = self.sc.skin;
        let inventory = self.bank.loans_held * (1.0 - d);
        let m = clear(value, psi, 0.0, inventory).expect("optimism prices are positive");
        let units = m.bank_units_sold();
        if units > 0.0 {
            let loans = (units / (1.0 - d)).min(self.bank.loans_held);
            self.bank.loans_held -= loans;
            self.bank.securities_held += loans * d;
            self.bank.cash += units * m.cleared_price;
            self.outstanding += units;
            self.units_sold[1] += units;
            self.profit[1] += units * (m.cleared_price - value);
        }
        m
    }

    /// Sells collateral at `price` until the haircut holds again.
    fn force_liquidation(&mut self, price: f64) {
        let value = self.sc.fundamental();
        let h = self.sc.config.regulatory.haircut;
        let collateral = self.bank.securities_held;
        let units = if price >= 1.0 {
            0.0
        } else if price <= 0.0 {
            self.flags.full_wipeout = true;
            collateral
        } else {
            match required_liquidation(collateral, h, price) {
                Ok(s) => s,
                Err(ModelError::FullWipeout { .. }) => {
                    self.flags.full_wipeout = true;
                    collateral
                }
                Err(e) => unreachable!("haircut and price validated: {e}"),
            }
        };
        if units <= 0.0 {
            return;
        }
        let proceeds = units * price;
        let repaid = proceeds.min(self.bank.borrowing);
        self.bank.securities_held -= units;
        self.bank.cash += proceeds - repaid;
        self.bank.borrowing -= repaid;
        self.outstanding += units;
        self.liquidation = units;
        let loss = units * (price - value);
        self.profit[1] += loss;
        self.free += loss;
    }

    fn close_period(&mut self, t: usize) {
        let cfg = &self.sc.config;
        let base = self.profit[t];
        let p = if base > 0.0 {
            payout(
                base - self.fees[t],
                self.fees[t],
                cfg.regulatory.g[t],
                cfg.regulatory.payout_split,
            )
        } else {
            Payout {
                dividends: 0.0,
                bonuses: 0.0,
                retained: base,
            }
        };
        self.paid.dividends += p.dividends;
        self.paid.bonuses += p.bonuses;
        self.paid.retained += p.retained;
        self.free += p.retained;
    }
}

/// Simulates one three-date path.
///
/// The date-2 sentiment increment is drawn first, so the draw sequence does
/// not depend on the configured switches.
pub fn run_path<R: Rng + ?Sized>(sc: &Scenario, rng: &mut R) -> PathResult {
    let cfg = &sc.config;
    let value = sc.fundamental();
    let eps = cfg.price_eps;
    let psi1 = sc.sentiment.psi;
    let psi2 = sc
        .sentiment
        .evolve(cfg.psi_2_anchor.unwrap_or(psi1), rng)
        .psi;
    let mut run = Run::new(sc);

    // date 1
    let m1 = clear(value, psi1, 0.0, 0.0);
    let p1 = match &m1 {
        Ok(m) => m.cleared_price,
        Err(price) => *price,
    };
    let r1 = classify_regime(p1, value, eps);
    let foreseen = if cfg.switches.foresight {
        clear(value, psi2, 0.0, 0.0)
            .ok()
            .map(|m| classify_regime(m.cleared_price, value, eps))
    } else {
        None
    };
    let plan = choose_allocation(
        &r1,
        foreseen.as_ref(),
        sc.fee,
        cfg.switches.foresight,
        AllocationRules {
            policy: cfg.indifference,
            securitization: cfg.switches.securitization,
        },
    );
    match &m1 {
        Ok(m) => {
            let cap = capital_ratio_cap(cfg.e0, cfg.regulatory.e_req[0]);
            let used = run.deploy(0, plan.x * cfg.e0, m, cap);
            run.free -= used;
        }
        Err(_) => run.flags.negative_price = true,
    }
    run.close_period(0);

    // date 2
    let pre = clear(value, psi2, 0.0, 0.0);
    let (r2, p2) = match pre {
        Err(price) => {
            run.flags.negative_price = true;
            (classify_regime(price, value, eps), price)
        }
        Ok(pre) => {
            let r2 = classify_regime(pre.cleared_price, value, eps);
            if cfg.switches.leverage && run.bank.borrowing > 0.0 && pre.cleared_price < p1 {
                run.force_liquidation(pre.cleared_price);
            }
            let cap = capital_ratio_cap(run.net_equity(), cfg.regulatory.e_req[1]);
            let mut budget = run.free.min(run.bank.cash).max(0.0);
            let mut market = pre;
            match r2.tag {
                RegimeTag::Underpriced if budget > 0.0 && run.outstanding > 0.0 => {
                    let spread = cfg.switches.cds.then(|| sc.spread());
                    match reserve_deployment(sc.fee, value, pre.cleared_price, spread) {
                        Action::BuySecuritized => {
                            let (after, spent) = run.buy_securities(psi2, budget, &pre);
                            run.free -= spent;
                            budget -= spent;
                            market = after;
                        }
                        Action::SellCds => {
                            run.free -= run.sell_cds(1, budget);
                            budget = 0.0;
                        }
                        _ => {}
                    }
                }
                RegimeTag::Overpriced if cfg.switches.securitization => {
                    market = run.sell_inventory(psi2);
                }
                _ => {}
            }
            let used = run.deploy(1, budget, &market, cap);
            run.free -= used;
            (r2, market.cleared_price)
        }
    };
    run.close_period(1);

    // date 3
    let marks = sc.marks;
    let before = run.bank;
    let owed = run.paid.distributed();
    let residual = (before.equity(&marks) - owed) - (cfg.e0 + run.paid.retained);
    let (theta, lgd) = (sc.project.theta(), sc.terms.lgd());
    let settlement = match settle_period3(&before, theta, lgd, cfg.settlement, rng) {
        Ok((_, s)) => s,
        Err((_, s, _)) => {
            run.flags.insolvent = true;
            s
        }
    };
    let e3 = settlement.terminal_equity - owed;
    if e3 < 0.0 {
        run.flags.insolvent = true;
    }

    let lc = run.lending_capital;
    let x = if lc[0] + lc[1] > 0.0 {
        lc[0] / (lc[0] + lc[1])
    } else {
        plan.x
    };
    PathResult {
        x,
        planned_x: plan.x,
        cyclicity: (2.0 * x - 1.0).abs(),
        projects: run.projects,
        lending_capital: lc,
        output_proxy: expected_project_value(&sc.project) * (run.projects[0] + run.projects[1]),
        prices: [p1, p2],
        psi: [psi1, psi2],
        regimes: [r1.tag, r2.tag],
        liquidation: run.liquidation,
        units_sold: run.units_sold,
        units_bought: run.units_bought,
        cds_sold: before.cds_sold,
        cds_bought: before.cds_bought_naked,
        hedged_loans: before.hedged_loans,
        fee_income: run.fees[0] + run.fees[1],
        period_profit: run.profit,
        dividends: run.paid.dividends,
        bonuses: run.paid.bonuses,
        retained: run.paid.retained,
        settlement_pnl: settlement.pnl(&before, &marks),
        e3,
        flags: run.flags,
        reconciliation_residual: residual,
        actions: run.actions,
    }
}
