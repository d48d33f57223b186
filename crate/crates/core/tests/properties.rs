use proptest::prelude::*;

use credit_cycles::bank::{liquidation_fraction, max_projects, payout, FundingMode};
use credit_cycles::config::parse_config;
use credit_cycles::engine::{path_rng, run_path, Scenario, ScenarioConfig};
use credit_cycles::instruments::{cds_basis, CdsTerms, Project};
use credit_cycles::market::{clear_market, Regime, RegimeTag};
use credit_cycles::strategy::{
    choose_allocation, quote_actions, Action, ActionSet, AllocationRules, IndifferencePolicy,
    StrategyQuote,
};

fn quote(quotes: &[StrategyQuote], action: Action) -> f64 {
    quotes
        .iter()
        .find(|q| q.action == action)
        .unwrap()
        .expected_profit
}

fn policy() -> impl Strategy<Value = IndifferencePolicy> {
    prop_oneof![
        Just(IndifferencePolicy::EvenSplit),
        Just(IndifferencePolicy::FrontLoad),
        Just(IndifferencePolicy::BackLoad),
    ]
}

fn random_config() -> impl Strategy<Value = ScenarioConfig> {
    (
        (0.02..0.45f64, 0.0..0.5f64, 0.0..0.6f64, 0.1..1.0f64),
        (-1.5..0.8f64, -1.0..0.8f64, 0.0..0.3f64, -0.15..0.15f64),
        (0.1..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.5..1.0f64),
        any::<[bool; 6]>(),
        (0..3usize, 0..3usize),
    )
        .prop_map(|(a, b, c, sw, (shock, ind))| {
            let (theta, d0, d1, lgd) = a;
            let (psi_1, psi_2, sigma, cds_shock) = b;
            let (haircut, g_1, g_2, split) = c;
            let mut cfg = ScenarioConfig::default();
            let pairs = [
                ("theta", theta.to_string()),
                ("skin_d0", d0.to_string()),
                ("skin_d1", d1.to_string()),
                ("lgd", lgd.to_string()),
                ("psi_1", psi_1.to_string()),
                ("sigma", sigma.to_string()),
                ("cds_shock", cds_shock.to_string()),
                ("haircut", haircut.to_string()),
                ("g_1", g_1.to_string()),
                ("g_2", g_2.to_string()),
                ("payout_split", split.to_string()),
                ("securitization", sw[0].to_string()),
                ("leverage", sw[1].to_string()),
                ("cds", sw[2].to_string()),
                ("naked_cds", sw[3].to_string()),
                ("foresight", sw[4].to_string()),
                (
                    "shock",
                    ["normal", "uniform", "two_point"][shock].to_string(),
                ),
                (
                    "indifference",
                    ["even_split", "front_load", "back_load"][ind].to_string(),
                ),
            ];
            for (k, v) in pairs {
                cfg.set(k, &v).unwrap();
            }
            if sw[5] {
                cfg.set("psi_2", &psi_2.to_string()).unwrap();
            }
            cfg
        })
}

proptest! {
    #[test]
    fn clearing_meets_unit_supply(
        fund in 0.05..1.0f64,
        psi_frac in -2.0..1.0f64,
        capacity in 0.0..2.0f64,
        inventory in 0.0..10.0f64,
    ) {
        let psi = psi_frac * fund;
        let m = clear_market(fund, psi, capacity, inventory).unwrap();
        prop_assert!((m.total_demand().unwrap() - 1.0).abs() < 1e-9);
        prop_assert!(m.gap().abs() <= psi.abs() + 1e-12);
        if psi > 0.0 {
            prop_assert!(m.cleared_price <= fund + 1e-12);
        }
        if psi < 0.0 {
            prop_assert!(m.cleared_price >= fund - 1e-12);
        }
        prop_assert!(m.bank_units_sold() <= inventory + 1e-9);
    }

    #[test]
    fn liquidation_is_monotone(h in 0.01..1.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64, dh in 0.0..0.5f64) {
        let floor = 1.0 - h;
        let (lo, hi) = (floor + (1.0 - floor) * a.min(b), floor + (1.0 - floor) * a.max(b));
        prop_assume!(lo > 0.0);
        let q_lo = liquidation_fraction(h, lo).unwrap();
        let q_hi = liquidation_fraction(h, hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&q_lo));
        prop_assert!(q_hi <= q_lo);
        let h2 = (h + dh).min(1.0);
        prop_assert!(liquidation_fraction(h2, hi).unwrap() <= q_hi + 1e-12);
    }

    #[test]
    fn projects_fall_with_skin_and_haircut(
        e0 in 0.1..10.0f64,
        d in 0.01..1.0f64,
        dd in 0.0..0.5f64,
        h in 0.01..1.0f64,
        dh in 0.0..0.5f64,
    ) {
        let d2 = (d + dd).min(1.0);
        let h2 = (h + dh).min(1.0);
        let lev = FundingMode::SecuritizeLevered;
        prop_assert!(max_projects(e0, d2, h, FundingMode::Securitize) <= max_projects(e0, d, h, FundingMode::Securitize));
        prop_assert!(max_projects(e0, d2, h, lev) <= max_projects(e0, d, h, lev));
        prop_assert!(max_projects(e0, d, h2, lev) <= max_projects(e0, d, h, lev));
        prop_assert!(max_projects(e0, d, h, FundingMode::Hold) <= max_projects(e0, d, h, FundingMode::Securitize));
    }

    #[test]
    fn fair_prices_make_lending_modes_equal(
        theta in 0.01..0.9f64,
        skin in 0.0..1.0f64,
        lgd in 0.05..1.0f64,
        fee in 0.0..1.0f64,
    ) {
        let project = Project::with_default_probability(theta, 1.25).unwrap();
        let terms = CdsTerms::new(lgd, theta * lgd).unwrap();
        let market = clear_market(1.0 - theta * lgd, 0.0, 0.0, 0.0).unwrap();
        let q = quote_actions(&market, &project, &terms, fee, skin, &ActionSet::everything()).unwrap();
        let hold = quote(&q, Action::LendHold);
        prop_assert!((quote(&q, Action::LendSecuritize) - hold).abs() < 1e-12);
        prop_assert!(quote(&q, Action::SellCds).abs() < 1e-12);
        prop_assert!(quote(&q, Action::BuyNakedCds).abs() < 1e-12);
    }

    #[test]
    fn basis_sign_picks_the_cds_side(theta in 0.02..0.8f64, shock in 0.001..0.2f64) {
        let project = Project::with_default_probability(theta, 1.25).unwrap();
        let market = clear_market(1.0 - theta, 0.0, 0.0, 0.0).unwrap();
        let fee = theta;

        let wide = CdsTerms::priced(&project, 1.0, shock).unwrap();
        prop_assert!(cds_basis(&wide, fee) > 0.0);
        let q = quote_actions(&market, &project, &wide, fee, 0.2, &ActionSet::everything()).unwrap();
        prop_assert!(quote(&q, Action::SellCds) > quote(&q, Action::LendHold));

        let s = theta - shock;
        prop_assume!(s > 0.0);
        let tight = CdsTerms::new(1.0, s).unwrap();
        prop_assert!(cds_basis(&tight, fee) < 0.0);
        let q = quote_actions(&market, &project, &tight, fee, 0.2, &ActionSet::everything()).unwrap();
        prop_assert!(quote(&q, Action::BuyNakedCds) > 0.0);
    }

    #[test]
    fn payout_conserves_profit(b in -5.0..5.0f64, f in 0.0..2.0f64, g in 0.0..1.0f64, split in 0.0..1.0f64) {
        let p = payout(b, f, g, split);
        prop_assert!((p.dividends + p.bonuses + p.retained - (b + f)).abs() < 1e-12);
        prop_assert!((p.distributed() - g * (b + f)).abs() < 1e-12);
    }

    #[test]
    fn one_profitable_date_gives_extreme_x(
        fee in 0.0..0.6f64,
        excess in 0.001..1.0f64,
        other in 0.0..1.0f64,
        policy in policy(),
        early in any::<bool>(),
    ) {
        let hot = Regime { tag: RegimeTag::Overpriced, magnitude: 1.0 - fee + excess };
        let cold = Regime { tag: RegimeTag::Overpriced, magnitude: (1.0 - fee) * other };
        let rules = AllocationRules { policy, securitization: true };
        let (t1, t2) = if early { (hot, cold) } else { (cold, hot) };
        let plan = choose_allocation(&t1, Some(&t2), fee, true, rules);
        prop_assert_eq!(plan.x, if early { 1.0 } else { 0.0 });
    }

    #[test]
    fn config_text_round_trips(cfg in random_config()) {
        prop_assume!(cfg.validate().is_ok());
        prop_assert_eq!(parse_config(&cfg.emit()).unwrap(), cfg);
    }

    #[test]
    fn paths_reconcile(cfg in random_config(), seed in any::<u64>(), index in 0..1000usize) {
        let Ok(sc) = Scenario::new(&cfg) else { return Ok(()); };
        let p = run_path(&sc, &mut path_rng(seed, index));
        prop_assert!(p.reconciliation_residual.abs() < 1e-9, "residual {}", p.reconciliation_residual);
        prop_assert!((0.0..=1.0).contains(&p.cyclicity));
        prop_assert!((0.0..=1.0).contains(&p.x));
        prop_assert!(p.output_proxy >= 0.0);
        prop_assert!(p.projects.iter().all(|n| *n >= 0.0));
        if !p.flags.insolvent {
            prop_assert!(p.e3 >= -1e-9);
        }
        let again = run_path(&sc, &mut path_rng(seed, index));
        prop_assert_eq!(p, again);
    }

    #[test]
    fn planned_share_ignores_equity_scale(cfg in random_config(), e0 in 0.05..20.0f64) {
        let Ok(base) = Scenario::new(&cfg) else { return Ok(()); };
        let mut scaled = cfg.clone();
        scaled.set("e0", &e0.to_string()).unwrap();
        let scaled = Scenario::new(&scaled).unwrap();
        let a = run_path(&base, &mut path_rng(3, 0));
        let b = run_path(&scaled, &mut path_rng(3, 0));
        prop_assert_eq!(a.planned_x, b.planned_x);
    }
}
