use ledgerlint_core::loan::{
    build_schedule, implied_monthly_rate, verify_schedule, Discrepancy, LoanSpec, PublishedTable,
};
use ledgerlint_core::PeriodicConvention;
use proptest::prelude::*;

fn spec(principal: f64, annual: f64, convention: PeriodicConvention, term: u32, holiday: u32) -> LoanSpec<f64> {
    LoanSpec {
        principal,
        quoted_annual: annual,
        convention,
        term_months: term,
        holiday_months: holiday,
    }
}

#[test]
fn holiday_capitalizes_interest() {
    let s = build_schedule(&spec(10_000.0, 0.12, PeriodicConvention::UsNominalDivide, 24, 3)).unwrap();
    assert_eq!(s.monthly_rate, 0.01);
    assert!((s.rows[3].opening - 10_303.01).abs() < 1e-9);
    assert!(s.rows[..3].iter().all(|r| r.payment == 0.0));
    let repaid: f64 = s.rows.iter().map(|r| r.principal_paid).sum();
    assert!((repaid - 10_303.01).abs() < 1e-6);
}

#[test]
fn invalid_specs() {
    assert!(build_schedule(&spec(0.0, 0.1, PeriodicConvention::UkEffectiveRoot, 12, 0)).is_err());
    assert!(build_schedule(&spec(1.0, 0.1, PeriodicConvention::UkEffectiveRoot, 0, 0)).is_err());
    assert!(build_schedule(&spec(1.0, 0.1, PeriodicConvention::UkEffectiveRoot, 12, 12)).is_err());
    assert!(build_schedule(&spec(1.0, -1.0, PeriodicConvention::UkEffectiveRoot, 12, 0)).is_err());
}

#[test]
fn us_and_uk_tables_disagree() {
    let eff = 1.01f64.powi(12) - 1.0;
    let uk = build_schedule(&spec(10_000.0, eff, PeriodicConvention::UkEffectiveRoot, 12, 0)).unwrap();
    let us = build_schedule(&spec(10_000.0, eff, PeriodicConvention::UsNominalDivide, 12, 0)).unwrap();
    let found = verify_schedule(&uk, &PublishedTable::from(&us), 0.005);
    assert_eq!(found.len(), 12);
    match &found[0] {
        Discrepancy::Row { month, deltas } => {
            assert_eq!(*month, 1);
            assert!(deltas.iter().all(|d| d.delta == d.candidate - d.published));
        }
        other => panic!("{other:?}"),
    }
    let csv = {
        let mut out = Vec::new();
        uk.write_csv(&mut out).unwrap();
        out
    };
    let published = PublishedTable::read_csv(csv.as_slice()).unwrap();
    assert!(verify_schedule(&uk, &published, 1e-9).is_empty());
    let short = PublishedTable {
        rows: published.rows[..11].to_vec(),
    };
    assert!(matches!(
        verify_schedule(&uk, &short, 0.005)[0],
        Discrepancy::RowCount { candidate: 12, published: 11 }
    ));
}

fn arb_convention() -> impl Strategy<Value = PeriodicConvention> {
    prop_oneof![
        Just(PeriodicConvention::UsNominalDivide),
        Just(PeriodicConvention::UkEffectiveRoot)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn implied_rate_round_trips(
        principal in 100.0f64..1e6,
        annual in 0.001f64..0.4,
        convention in arb_convention(),
        term in 2u32..360,
        holiday_frac in 0.0f64..0.5,
    ) {
        let holiday = (term as f64 * holiday_frac) as u32;
        let s = build_schedule(&spec(principal, annual, convention, term, holiday)).unwrap();
        let implied = implied_monthly_rate(&s).unwrap();
        prop_assert!((implied.monthly - s.monthly_rate).abs() < 1e-8);
    }

    #[test]
    fn balances_are_conserved(
        principal in 100.0f64..1e6,
        annual in 0.0f64..0.4,
        convention in arb_convention(),
        term in 1u32..360,
        holiday_frac in 0.0f64..0.5,
    ) {
        let holiday = (term as f64 * holiday_frac) as u32;
        let s = build_schedule(&spec(principal, annual, convention, term, holiday)).unwrap();
        prop_assert_eq!(s.rows.len() as u32, term);
        prop_assert_eq!(s.rows.last().unwrap().closing, 0.0);
        let mut opening = principal;
        let mut interest = 0.0;
        for (k, row) in s.rows.iter().enumerate() {
            prop_assert_eq!(row.month, k as u32 + 1);
            prop_assert_eq!(row.opening, opening);
            if row.month <= holiday {
                prop_assert_eq!(row.payment, 0.0);
                prop_assert_eq!(row.principal_paid, 0.0);
                prop_assert_eq!(row.closing, row.opening + row.interest);
            } else {
                prop_assert!((row.payment - row.interest - row.principal_paid).abs() <= 1e-9 * principal);
            }
            opening = row.closing;
            interest += row.interest;
        }
        let paid: f64 = s.rows.iter().map(|r| r.payment).sum();
        prop_assert!((paid - (principal + interest)).abs() <= 1e-8 * principal);
        prop_assert!(verify_schedule(&s, &PublishedTable::from(&s), 0.0).is_empty());
    }

    #[test]
    fn payment_rises_with_rate(
        principal in 100.0f64..1e6,
        a in 0.0f64..0.4,
        b in 0.0f64..0.4,
        term in 2u32..360,
    ) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let conv = PeriodicConvention::UkEffectiveRoot;
        let p_lo = build_schedule(&spec(principal, lo, conv, term, 0)).unwrap().level_payment().unwrap();
        let p_hi = build_schedule(&spec(principal, hi, conv, term, 0)).unwrap().level_payment().unwrap();
        prop_assert!(p_hi > p_lo);
        let us = build_schedule(&spec(principal, hi, PeriodicConvention::UsNominalDivide, term, 0))
            .unwrap()
            .level_payment()
            .unwrap();
        prop_assert!(us > p_hi);
    }
}
