mod common;

use common::date;
use ledgerlint_core::cashflow::{npv_legacy, npv_t0, pmt, xnpv, CashFlowSeries};
use ledgerlint_core::Date;
use proptest::prelude::*;

#[test]
fn worked_examples() {
    let legacy = npv_legacy(0.10_f64, &[-1000.0, 600.0, 600.0]).unwrap();
    let t0 = npv_t0(0.10_f64, &[-1000.0, 600.0, 600.0]).unwrap();
    assert!((legacy - 37.565_740_045_078_89).abs() < 1e-9);
    assert!((t0 - 41.322_314_049_586_78).abs() < 1e-9);
    assert!((t0 / legacy - 1.1).abs() < 1e-12);

    let series = CashFlowSeries::dated(
        vec![-1000.0, 1100.0],
        vec![date("2024-01-01"), date("2025-01-01")],
    )
    .unwrap();
    let v: f64 = xnpv(0.10, &series).unwrap();
    // 366 days over 365
    assert!((v - (-1000.0 + 1100.0 / 1.1f64.powf(366.0 / 365.0))).abs() < 1e-12);
}

#[test]
fn csv_series() {
    let s = CashFlowSeries::<f64>::read_csv("date,value\n2024-01-01,-100\n2024-06-30,110\n".as_bytes()).unwrap();
    assert_eq!(s.values(), &[-100.0, 110.0]);
    assert_eq!(s.dates().unwrap()[1], date("2024-06-30"));
    let s = CashFlowSeries::<f64>::read_csv("-5\n6\n".as_bytes()).unwrap();
    assert_eq!(s.values(), &[-5.0, 6.0]);
    assert!(s.dates().is_none());
}

fn arb_series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e6f64..1e6, 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conventions_differ_by_one_period(rate in -0.5f64..1.0, v in arb_series()) {
        prop_assert_eq!(npv_t0(rate, &v).unwrap(), v[0] + npv_legacy(rate, &v[1..]).unwrap());
        let mut shifted = vec![0.0];
        shifted.extend_from_slice(&v);
        prop_assert_eq!(npv_legacy(rate, &v).unwrap(), npv_t0(rate, &shifted).unwrap());
    }

    #[test]
    fn xnpv_on_whole_years_matches_t0(rate in 0.0f64..0.5, v in arb_series()) {
        // 2001-01-01 plus multiples of 365 days never crosses a Feb 29 boundary mismatch:
        // the exponent is days/365 exactly
        let start = date("2001-01-01").to_serial();
        let dates: Vec<Date> = (0..v.len())
            .map(|k| Date::from_serial(start + 365 * k as i64).unwrap())
            .collect();
        let series = CashFlowSeries::dated(v.clone(), dates).unwrap();
        let x = xnpv(rate, &series).unwrap();
        let t0 = npv_t0(rate, &v).unwrap();
        let scale: f64 = v.iter().map(|c| c.abs()).sum::<f64>().max(1.0);
        prop_assert!((x - t0).abs() <= 1e-9 * scale);
    }

    #[test]
    fn pmt_amortizes_to_zero(rate in 0.0f64..0.1, n in 1u32..480, pv in 1.0f64..1e7) {
        let p = pmt(rate, n, pv).unwrap();
        prop_assert!(p < 0.0);
        let present: f64 = (1..=n).map(|k| -p / (1.0 + rate).powi(k as i32)).sum();
        prop_assert!((present - pv).abs() <= 1e-9 * pv);
    }
}
