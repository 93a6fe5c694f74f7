#![allow(dead_code)]

use std::path::PathBuf;

use ledgerlint_core::formula::{BinaryOp, CellAddr, CellRange, FormulaNode, UnaryOp};
use ledgerlint_core::audit::RuleId;
use ledgerlint_core::Date;
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

/// Trap fixtures with the rule each must raise and the cell it sits in.
pub const TRAPS: [(&str, RuleId, &str); 8] = [
    ("r1_npv_period0.csv", RuleId::R1, "B1"),
    ("r2_rate_div_12.csv", RuleId::R2, "B1"),
    ("r3_intrate_compound.csv", RuleId::R3, "B1"),
    ("r4_db_month.csv", RuleId::R4, "B1"),
    ("r5_rate_magnitude.csv", RuleId::R5, "B1"),
    ("r6_date_as_arithmetic.csv", RuleId::R6, "B1"),
    ("r7_basis_default.csv", RuleId::R7, "B1"),
    ("r8_divisor_360.csv", RuleId::R8, "B1"),
];

pub fn date(s: &str) -> Date {
    s.parse().unwrap()
}

/// Calendar stepping that shares nothing with the library's day arithmetic.
fn leap(y: i32) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn month_len(y: i32, m: u32) -> u32 {
    const LEN: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    if m == 2 && leap(y) {
        29
    } else {
        LEN[m as usize - 1]
    }
}

/// Days from `a` to `b` (a ≤ b) by walking the calendar one day at a time.
pub fn brute_force_days(a: (i32, u32, u32), b: (i32, u32, u32)) -> i64 {
    let (mut y, mut m, mut d) = a;
    let mut n = 0;
    while (y, m, d) < b {
        d += 1;
        if d > month_len(y, m) {
            d = 1;
            m += 1;
            if m > 12 {
                m = 1;
                y += 1;
            }
        }
        n += 1;
    }
    n
}

pub fn arb_date(years: std::ops::RangeInclusive<i32>) -> impl Strategy<Value = Date> {
    (years, 1u32..=12, 1u32..=31).prop_map(|(y, m, d)| {
        let d = d.min(month_len(y, m));
        Date::new(y, m, d).unwrap()
    })
}

pub fn tuple(d: Date) -> (i32, u32, u32) {
    (d.year(), d.month(), d.day())
}

fn arb_addr() -> impl Strategy<Value = CellAddr> {
    (0u32..800, 0u32..2000).prop_map(|(c, r)| CellAddr::new(c, r))
}

fn arb_number() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..1000).prop_map(f64::from),
        (0u64..10_000_000).prop_map(|n| n as f64 / 1000.0),
        Just(0.1),
        Just(1e-7),
        Just(123_456_789.0),
    ]
}

fn leaf() -> impl Strategy<Value = FormulaNode> {
    prop_oneof![
        arb_number().prop_map(FormulaNode::Number),
        arb_number().prop_map(FormulaNode::Percent),
        "[a-z \"0-9]{0,6}".prop_map(FormulaNode::Text),
        arb_addr().prop_map(FormulaNode::Ref),
        (arb_addr(), arb_addr()).prop_map(|(a, b)| FormulaNode::Range(CellRange::new(a, b))),
    ]
}

const BINARY_OPS: [BinaryOp; 12] = [
    BinaryOp::Add,
    BinaryOp::Sub,
    BinaryOp::Mul,
    BinaryOp::Div,
    BinaryOp::Pow,
    BinaryOp::Concat,
    BinaryOp::Eq,
    BinaryOp::Ne,
    BinaryOp::Lt,
    BinaryOp::Le,
    BinaryOp::Gt,
    BinaryOp::Ge,
];

const NAMES: [&str; 6] = ["SUM", "NPV", "DB", "ACCRINT", "DAYS360", "FOO"];

/// Arbitrary well-formed trees, restricted to the shapes the printer can
/// express unambiguously: `x%` on a bare number is a percent literal, and a
/// lone empty argument is indistinguishable from no arguments.
pub fn arb_ast() -> impl Strategy<Value = FormulaNode> {
    leaf().prop_recursive(5, 48, 4, |inner| {
        prop_oneof![
            (prop_oneof![Just(UnaryOp::Neg), Just(UnaryOp::Plus)], inner.clone())
                .prop_map(|(op, c)| FormulaNode::unary(op, c)),
            inner
                .clone()
                .prop_filter("bare number percent", |c| !matches!(c, FormulaNode::Number(_)))
                .prop_map(|c| FormulaNode::unary(UnaryOp::Percent, c)),
            (0..BINARY_OPS.len(), inner.clone(), inner.clone())
                .prop_map(|(i, l, r)| FormulaNode::binary(BINARY_OPS[i], l, r)),
            (
                0..NAMES.len(),
                prop::collection::vec(
                    prop_oneof![3 => inner.clone(), 1 => Just(FormulaNode::EmptyArg)],
                    0..4
                )
            )
                .prop_map(|(i, args)| FormulaNode::call(NAMES[i], args))
                .prop_filter("lone empty argument", |n| match n {
                    FormulaNode::Call { args, .. } => args.as_slice() != [FormulaNode::EmptyArg],
                    _ => true,
                }),
        ]
    })
}

/// Cell input text for fuzzed workbooks: literals, plausible formulas and
/// junk.
pub fn arb_cell_input() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        (-1000i32..1000).prop_map(|n| n.to_string()),
        "[0-9]{1,3}%",
        Just("2024-02-29".to_string()),
        Just("01/01/80".to_string()),
        "[a-z ]{1,8}",
        arb_ast().prop_map(|n| n.to_formula()),
        "=[A-D][1-4]([+*/^&-][A-D][1-4]){0,3}",
        "=(SUM|NPV|DB|PMT|XNPV|ACCRINT|INTRATE|DAYS360|EFFECT)\\(([A-D][1-4](:[A-D][1-4])?|[0-9.]{1,4}|)(,([A-D][1-4]|[0-9.]{1,4}|)){0,6}\\)",
        "=[ -~]{0,16}",
    ]
}
