//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use common::{arb_ast, arb_cell_input, date, fixture, TRAPS};
use ledgerlint_core::audit::{run_rules, Finding, RuleConfig, RuleId};
use ledgerlint_core::cashflow::{npv_legacy, npv_t0};
use ledgerlint_core::daycount::days_between;
use ledgerlint_core::depreciation::{db_schedule, reconcile};
use ledgerlint_core::formula::{load_workbook, parse, CellAddr, ErrorKind, Sheet};
use ledgerlint_core::loan::{build_schedule, implied_monthly_rate};
use ledgerlint_core::rates::{accrint, advertised_apr, effective_rate, nominal_rate};
use ledgerlint_core::{DayCountBasis, DepreciationSpec, LoanSpec, PeriodicConvention, PrecisionMode};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn property<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn apr_rounding() -> Outcome {
    let adv = advertised_apr(0.11995_f64).map_err(|e| e.to_string())?;
    ensure(adv == 0.119, || format!("advertised_apr(0.11995) = {adv}"))
}

fn db_reconciliation_shock() -> Outcome {
    let (cost, salvage, life) = (1_000_000.0_f64, 100_000.0, 6);
    let spec = DepreciationSpec::new(cost, salvage, life).unwrap();

    let compat = db_schedule(&spec, PrecisionMode::Compat).unwrap();
    let compat_final = compat.final_book_value().unwrap();
    ensure((compat_final - salvage).abs() > 100.0, || {
        format!("compat final book value {compat_final} within 100 of salvage")
    })?;
    ensure(reconcile(&compat, &spec).flagged, || "compat gap not flagged".into())?;

    // summation with the unrounded rate
    let rate = 1.0 - (salvage / cost).powf(1.0 / life as f64);
    let mut book = cost;
    let mut oracle = Vec::new();
    for _ in 0..life {
        let d = book * rate;
        oracle.push(d);
        book -= d;
    }
    let exact = db_schedule(&spec, PrecisionMode::Exact).unwrap();
    for (row, want) in exact.rows.iter().zip(&oracle) {
        ensure((row.depreciation - want).abs() <= 1e-6 * cost, || {
            format!("period {}: {} vs oracle {want}", row.period, row.depreciation)
        })?;
    }
    let exact_final = exact.final_book_value().unwrap();
    ensure((exact_final - salvage).abs() <= 1e-6 * cost, || {
        format!("exact final book value {exact_final}")
    })?;
    ensure((book - salvage).abs() <= 1e-6 * cost, || format!("oracle final {book}"))
}

fn month_extra_period() -> Outcome {
    let spec = DepreciationSpec::with_month(1_000_000.0_f64, 100_000.0, 6, 7).unwrap();
    for mode in [PrecisionMode::Compat, PrecisionMode::Exact] {
        let s = db_schedule(&spec, mode).unwrap();
        ensure(s.rows.len() == 7, || format!("{mode:?}: {} rows", s.rows.len()))?;
        let six: f64 = s.rows[..6].iter().map(|r| r.depreciation).sum();
        let all = s.total_depreciation();
        ensure(six < all, || format!("{mode:?}: six periods {six} vs all {all}"))?;
    }
    Ok(())
}

fn too_high_trap() -> Outcome {
    let effective = 1.01_f64.powi(12) - 1.0;
    let schedule = |convention| {
        build_schedule(&LoanSpec {
            principal: 10_000.0,
            quoted_annual: effective,
            convention,
            term_months: 60,
            holiday_months: 0,
        })
        .unwrap()
    };
    let us = schedule(PeriodicConvention::UsNominalDivide);
    let uk = schedule(PeriodicConvention::UkEffectiveRoot);
    let (pay_us, pay_uk) = (us.level_payment().unwrap(), uk.level_payment().unwrap());
    ensure(pay_us > pay_uk, || format!("US payment {pay_us} vs UK {pay_uk}"))?;
    for (s, want) in [(&us, 0.010_568_752_510_997_477), (&uk, 0.01)] {
        let got = implied_monthly_rate(s).unwrap().monthly;
        ensure((got - want).abs() <= 1e-8, || format!("implied {got} vs {want}"))?;
    }
    Ok(())
}

fn npv_identities() -> Outcome {
    let strategy = (-0.5f64..1.0, prop::collection::vec(-1e6f64..1e6, 1..40));
    property(200, strategy, |(rate, v)| {
        prop_assert_eq!(npv_t0(rate, &v).unwrap(), v[0] + npv_legacy(rate, &v[1..]).unwrap());
        let mut shifted = vec![0.0];
        shifted.extend_from_slice(&v);
        prop_assert_eq!(npv_legacy(rate, &v).unwrap(), npv_t0(rate, &shifted).unwrap());
        Ok(())
    })
}

fn day_count_divergence() -> Outcome {
    let (start, end) = (date("2024-01-15"), date("2024-03-31"));
    // US keeps day 31 when the start day is below 30; European caps it at 30
    let us_oracle = (3 - 1) * 30 + (31 - 15);
    let eur_oracle = (3 - 1) * 30 + (30 - 15);
    let us = days_between(start, end, DayCountBasis::Us30_360).unwrap();
    let eur = days_between(start, end, DayCountBasis::Eur30_360).unwrap();
    ensure((us, eur) == (76, 75) && (us, eur) == (us_oracle, eur_oracle), || {
        format!("US {us}, European {eur}")
    })?;
    let (rate, par) = (0.08_f64, 1000.0);
    let a_us = accrint(start, end, rate, par, DayCountBasis::Us30_360).unwrap();
    let a_eur = accrint(start, end, rate, par, DayCountBasis::Eur30_360).unwrap();
    let want_us = par * rate * 76.0 / 360.0;
    let want_eur = par * rate * 75.0 / 360.0;
    ensure((a_us - want_us).abs() < 1e-9 && (a_eur - want_eur).abs() < 1e-9, || {
        format!("accrint US {a_us}, European {a_eur}")
    })?;
    ensure(((a_us - a_eur) - par * rate / 360.0).abs() < 1e-9, || {
        format!("accrint gap {}", a_us - a_eur)
    })
}

fn effective_nominal_round_trip() -> Outcome {
    for n in [1u32, 2, 4, 12, 52, 365, 8760] {
        for i in 0..=200 {
            let r = -0.5 + i as f64 * 0.0125;
            let back = nominal_rate(effective_rate(r, n).unwrap(), n).unwrap();
            ensure((back - r).abs() <= 1e-12, || format!("r={r} n={n} back={back}"))?;
        }
    }
    property(500, (-0.9f64..2.0, 1u32..=400), |(r, n)| {
        let back = nominal_rate(effective_rate(r, n).unwrap(), n).unwrap();
        prop_assert!((back - r).abs() <= 1e-12, "r={} n={} back={}", r, n, back);
        Ok(())
    })
}

fn keys(findings: &[Finding]) -> Vec<String> {
    findings.iter().map(|f| format!("{f:?}")).collect()
}

fn audit_fixtures() -> Outcome {
    let mut sheets = Vec::new();
    for (file, rule, cell) in TRAPS {
        let sheet = load_workbook(fixture(file)).map_err(|e| e.to_string())?;
        let got: Vec<(RuleId, String)> = run_rules(&sheet, &RuleConfig::default())
            .iter()
            .map(|f| (f.rule_id, f.cell.to_string()))
            .collect();
        ensure(got == vec![(rule, cell.to_string())], || format!("{file}: {got:?}"))?;
        sheets.push(sheet);
    }
    let clean = load_workbook(fixture("clean.csv")).map_err(|e| e.to_string())?;
    let findings = run_rules(&clean, &RuleConfig::default());
    ensure(findings.is_empty(), || format!("clean corpus: {findings:?}"))?;
    sheets.push(clean);

    for mask in 0u32..256 {
        let subset: BTreeSet<RuleId> = RuleId::ALL
            .into_iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, r)| r)
            .collect();
        for sheet in &sheets {
            let full = run_rules(sheet, &RuleConfig::default());
            let part = run_rules(sheet, &RuleConfig::only(subset.iter().copied()));
            let expected: Vec<Finding> = full.into_iter().filter(|f| subset.contains(&f.rule_id)).collect();
            ensure(keys(&part) == keys(&expected), || format!("subset {subset:?}"))?;
        }
    }
    Ok(())
}

fn parser_robustness() -> Outcome {
    property(500, arb_ast(), |ast| {
        let text = ast.to_formula();
        let reparsed = parse(&text);
        prop_assert_eq!(reparsed.as_ref(), Ok(&ast), "{}", text);
        Ok(())
    })?;

    let grids = prop::collection::vec(prop::collection::vec(arb_cell_input(), 1..5), 1..5);
    property(200, grids, |grid| {
        let sheet = Sheet::from_grid(grid.clone()).unwrap();
        for (r, row) in grid.iter().enumerate() {
            for (c, text) in row.iter().enumerate() {
                let value = sheet.value(CellAddr::new(c as u32, r as u32));
                prop_assert_eq!(value.is_some(), !text.is_empty());
            }
        }
        Ok(())
    })?;

    let sheet = load_workbook(fixture("cycle.csv")).map_err(|e| e.to_string())?;
    let members: BTreeSet<String> = ["A1", "B1", "C1", "A2"].map(String::from).into();
    for (addr, _) in sheet.cells() {
        let is_cycle = sheet
            .value(addr)
            .and_then(|v| v.as_error())
            .is_some_and(|e| e.kind == ErrorKind::Cycle);
        let name = addr.to_string();
        ensure(is_cycle == members.contains(&name), || {
            format!("{name}: {:?}", sheet.value(addr))
        })?;
    }
    Ok(())
}

fn loan_holiday() -> Outcome {
    let s = build_schedule(&LoanSpec {
        principal: 10_000.0_f64,
        quoted_annual: 0.12,
        convention: PeriodicConvention::UsNominalDivide,
        term_months: 24,
        holiday_months: 3,
    })
    .unwrap();
    ensure(s.monthly_rate == 0.01, || format!("monthly rate {}", s.monthly_rate))?;
    let capitalized = s.rows[3].opening;
    ensure((capitalized - 10_303.01).abs() < 1e-9, || format!("capitalized {capitalized}"))?;
    let repaid: f64 = s.rows.iter().map(|r| r.principal_paid).sum();
    ensure((repaid - 10_303.01).abs() < 1e-6, || format!("principal repaid {repaid}"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("apr_rounding_replication", apr_rounding),
        ("db_reconciliation_shock", db_reconciliation_shock),
        ("month_argument_extra_period", month_extra_period),
        ("too_high_trap", too_high_trap),
        ("npv_convention_identity", npv_identities),
        ("day_count_divergence", day_count_divergence),
        ("effective_nominal_round_trip", effective_nominal_round_trip),
        ("audit_fixture_suite", audit_fixtures),
        ("parser_robustness", parser_robustness),
        ("loan_holiday_capitalization", loan_holiday),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(()) => println!("PASS {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
