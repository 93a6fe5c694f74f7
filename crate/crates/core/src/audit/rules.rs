use super::{Evidence, RuleConfig, RuleId};
use crate::daycount::{year_fraction, Date, DayCountBasis};
use crate::formula::{evaluate, BinaryOp, CellValue, FormulaNode, Sheet};

pub(super) struct Hit {
    pub message: String,
    pub evidence: Vec<Evidence>,
}

/// Argument index holding a rate, per function.
fn rate_position(name: &str, arity: usize) -> Option<usize> {
    match name {
        "NPV" | "XNPV" | "PMT" | "EFFECT" | "NOMINAL" => Some(0),
        "ACCRINT" if arity >= 6 => Some(3),
        "ACCRINT" => Some(2),
        _ => None,
    }
}

/// Argument index holding the day-count basis, per function.
fn basis_position(name: &str, arity: usize) -> Option<usize> {
    match name {
        "INTRATE" => Some(4),
        "ACCRINT" if arity >= 6 => Some(6),
        "ACCRINT" => Some(4),
        "DAYS360" => Some(2),
        _ => None,
    }
}

/// Calls `visit(node, parent)` for every node, pre-order.
fn visit_with_parent<'a>(
    node: &'a FormulaNode,
    parent: Option<&'a FormulaNode>,
    visit: &mut impl FnMut(&'a FormulaNode, Option<&'a FormulaNode>),
) {
    visit(node, parent);
    match node {
        FormulaNode::Unary(_, child) => visit_with_parent(child, Some(node), visit),
        FormulaNode::Binary(_, l, r) => {
            visit_with_parent(l, Some(node), visit);
            visit_with_parent(r, Some(node), visit);
        }
        FormulaNode::Call { args, .. } => {
            for arg in args {
                visit_with_parent(arg, Some(node), visit);
            }
        }
        _ => {}
    }
}

fn calls<'a>(root: &'a FormulaNode, wanted: &[&str]) -> Vec<(&'a FormulaNode, Option<&'a FormulaNode>)> {
    let mut out = Vec::new();
    visit_with_parent(root, None, &mut |node, parent| {
        if let FormulaNode::Call { name, .. } = node {
            if wanted.contains(&name.as_str()) {
                out.push((node, parent));
            }
        }
    });
    out
}

fn call_parts(node: &FormulaNode) -> (&str, &[FormulaNode]) {
    match node {
        FormulaNode::Call { name, args } => (name, args),
        _ => ("", &[]),
    }
}

fn evidence_for(sheet: &Sheet, node: &FormulaNode) -> Vec<Evidence> {
    let mut out = Vec::new();
    node.walk(&mut |n| {
        if let FormulaNode::Ref(cell) = n {
            if let Some(value) = sheet.value(*cell) {
                out.push(Evidence {
                    cell: *cell,
                    value: value.clone(),
                });
            }
        }
    });
    out
}

fn number(sheet: &Sheet, node: &FormulaNode) -> Option<f64> {
    evaluate(node, sheet).as_number()
}

fn date(sheet: &Sheet, node: &FormulaNode) -> Option<Date> {
    match evaluate(node, sheet) {
        CellValue::Date(d) => Some(d),
        CellValue::Number(n) if n.is_finite() => Date::from_serial(n.floor() as i64).ok(),
        _ => None,
    }
}

fn integer_literal(node: &FormulaNode) -> Option<i64> {
    match node {
        FormulaNode::Number(n) if n.fract() == 0.0 && n.abs() < 1e6 => Some(*n as i64),
        _ => None,
    }
}

pub(super) fn check(rule: RuleId, sheet: &Sheet, config: &RuleConfig, root: &FormulaNode) -> Vec<Hit> {
    match rule {
        RuleId::R1 => npv_period0(sheet, root),
        RuleId::R2 => rate_div_12(sheet, root),
        RuleId::R3 => intrate_compound(sheet, config, root),
        RuleId::R4 => db_month(sheet, root),
        RuleId::R5 => rate_magnitude(sheet, config, root),
        RuleId::R6 => date_as_arithmetic(root),
        RuleId::R7 => basis_default(root),
        RuleId::R8 => divisor_360(sheet, root),
    }
}

/// First numeric value NPV would discount, with the cell it came from.
fn first_npv_value(sheet: &Sheet, args: &[FormulaNode]) -> Option<(Option<Evidence>, f64)> {
    for arg in args.iter().skip(1) {
        match arg {
            FormulaNode::Range(range) => {
                let first = sheet
                    .cells()
                    .filter(|(cell, _)| range.contains(*cell))
                    .find_map(|(cell, _)| match sheet.value(cell) {
                        Some(v @ CellValue::Number(n)) => Some((cell, v.clone(), *n)),
                        _ => None,
                    });
                if let Some((cell, value, n)) = first {
                    return Some((Some(Evidence { cell, value }), n));
                }
            }
            FormulaNode::EmptyArg => {}
            FormulaNode::Ref(cell) => {
                if let Some(v @ CellValue::Number(n)) = sheet.value(*cell) {
                    return Some((
                        Some(Evidence {
                            cell: *cell,
                            value: v.clone(),
                        }),
                        *n,
                    ));
                }
            }
            other => {
                if let Some(n) = number(sheet, other) {
                    return Some((None, n));
                }
            }
        }
    }
    None
}

fn npv_period0(sheet: &Sheet, root: &FormulaNode) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (call, parent) in calls(root, &["NPV"]) {
        let additive = matches!(
            parent,
            Some(FormulaNode::Binary(BinaryOp::Add | BinaryOp::Sub, ..))
        );
        if additive {
            continue;
        }
        let (_, args) = call_parts(call);
        if let Some((evidence, first)) = first_npv_value(sheet, args) {
            if first < 0.0 {
                let at = evidence
                    .as_ref()
                    .map(|e| format!(" ({} = {first})", e.cell))
                    .unwrap_or_else(|| format!(" ({first})"));
                hits.push(Hit {
                    message: format!(
                        "first NPV value is negative{at}: an initial investment inside NPV is discounted one period; add it outside the call"
                    ),
                    evidence: evidence.into_iter().collect(),
                });
            }
        }
    }
    hits
}

fn rate_div_12(sheet: &Sheet, root: &FormulaNode) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (call, _) in calls(root, &["NPV", "PMT"]) {
        let (name, args) = call_parts(call);
        let Some(FormulaNode::Binary(BinaryOp::Div, numerator, divisor)) = args.first() else {
            continue;
        };
        if **divisor != FormulaNode::Number(12.0) {
            continue;
        }
        // already converted to a nominal rate
        if matches!(&**numerator, FormulaNode::Call { name, .. } if name == "NOMINAL") {
            continue;
        }
        hits.push(Hit {
            message: format!(
                "{name} rate is {}: dividing by 12 is only right for a nominal rate; convert an effective rate with (1+r)^(1/12)-1",
                args[0]
            ),
            evidence: evidence_for(sheet, &args[0]),
        });
    }
    hits
}

fn intrate_compound(sheet: &Sheet, config: &RuleConfig, root: &FormulaNode) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (call, _) in calls(root, &["INTRATE"]) {
        let (_, args) = call_parts(call);
        let (Some(s), Some(m)) = (call.arg(0), call.arg(1)) else {
            continue;
        };
        let (Some(settlement), Some(maturity)) = (date(sheet, s), date(sheet, m)) else {
            continue;
        };
        let basis = match call.arg(4) {
            None => Some(DayCountBasis::default()),
            Some(b) => number(sheet, b).and_then(|n| DayCountBasis::from_code(n.trunc() as i64)),
        };
        let Some(basis) = basis else { continue };
        let Ok(years) = year_fraction::<f64>(settlement, maturity, basis) else {
            continue;
        };
        if years > config.intrate_year_fraction {
            let mut evidence = evidence_for(sheet, &args[0]);
            evidence.extend(evidence_for(sheet, &args[1]));
            hits.push(Hit {
                message: format!(
                    "INTRATE over {years:.4} years ({settlement} to {maturity}) is a simple-interest rate; it overstates the compound annual yield"
                ),
                evidence,
            });
        }
    }
    hits
}

fn db_month(sheet: &Sheet, root: &FormulaNode) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (call, _) in calls(root, &["DB"]) {
        let Some(month_arg) = call.arg(4) else { continue };
        let Some(month) = number(sheet, month_arg) else {
            continue;
        };
        if month < 12.0 {
            hits.push(Hit {
                message: format!(
                    "DB month argument is {month}: the schedule needs an extra period (life + 1) and will not reconcile to salvage"
                ),
                evidence: evidence_for(sheet, month_arg),
            });
        }
    }
    hits
}

fn rate_magnitude(sheet: &Sheet, config: &RuleConfig, root: &FormulaNode) -> Vec<Hit> {
    let mut hits = Vec::new();
    for (call, _) in calls(root, &["NPV", "XNPV", "PMT", "EFFECT", "NOMINAL", "ACCRINT"]) {
        let (name, args) = call_parts(call);
        let Some(index) = rate_position(name, args.len()) else {
            continue;
        };
        let Some(arg) = call.arg(index) else { continue };
        let Some(rate) = number(sheet, arg) else { continue };
        if rate >= config.rate_magnitude {
            hits.push(Hit {
                message: format!(
                    "{name} rate {arg} evaluates to {rate}, i.e. {}% per period; a percentage was probably typed as a whole number",
                    rate * 100.0
                ),
                evidence: evidence_for(sheet, arg),
            });
        }
    }
    hits
}

fn is_date_shape(a: i64, b: i64, c: i64) -> bool {
    let day = |v: i64| (1..=31).contains(&v);
    let month = |v: i64| (1..=12).contains(&v);
    let year = (0..=99).contains(&c) || (1900..=2199).contains(&c);
    year && ((day(a) && month(b)) || (month(a) && day(b)))
}

fn date_as_arithmetic(root: &FormulaNode) -> Vec<Hit> {
    let mut hits = Vec::new();
    root.walk(&mut |node| {
        let FormulaNode::Binary(BinaryOp::Div, inner, c) = node else {
            return;
        };
        let FormulaNode::Binary(BinaryOp::Div, a, b) = &**inner else {
            return;
        };
        let (Some(a), Some(b), Some(c)) = (integer_literal(a), integer_literal(b), integer_literal(c))
        else {
            return;
        };
        if is_date_shape(a, b, c) {
            let value = a as f64 / b as f64 / c as f64;
            hits.push(Hit {
                message: format!(
                    "{a}/{b}/{c} is a division chain worth {value}, not a date; enter the date in ISO form in its own cell"
                ),
                evidence: Vec::new(),
            });
        }
    });
    hits
}

fn basis_default(root: &FormulaNode) -> Vec<Hit> {
    calls(root, &["ACCRINT", "INTRATE", "DAYS360"])
        .into_iter()
        .filter_map(|(call, _)| {
            let (name, args) = call_parts(call);
            let index = basis_position(name, args.len())?;
            if call.arg(index).is_some() {
                return None;
            }
            let what = if name == "DAYS360" { "method" } else { "basis" };
            Some(Hit {
                message: format!("{name} {what} omitted: defaults silently to US 30/360"),
                evidence: Vec::new(),
            })
        })
        .collect()
}

/// Factors of a product, flattening nested `*`.
fn factors<'a>(node: &'a FormulaNode, out: &mut Vec<&'a FormulaNode>) {
    match node {
        FormulaNode::Binary(BinaryOp::Mul, l, r) => {
            factors(l, out);
            factors(r, out);
        }
        other => out.push(other),
    }
}

fn divisor_360(sheet: &Sheet, root: &FormulaNode) -> Vec<Hit> {
    let mut hits = Vec::new();
    root.walk(&mut |node| {
        let FormulaNode::Binary(BinaryOp::Div, numerator, divisor) = node else {
            return;
        };
        if **divisor != FormulaNode::Number(360.0) {
            return;
        }
        let mut parts = Vec::new();
        factors(numerator, &mut parts);
        let day_difference = parts.into_iter().find(|part| match part {
            FormulaNode::Binary(BinaryOp::Sub, a, b) => {
                matches!(evaluate(a, sheet), CellValue::Date(_))
                    && matches!(evaluate(b, sheet), CellValue::Date(_))
            }
            _ => false,
        });
        if let Some(diff) = day_difference {
            hits.push(Hit {
                message: format!(
                    "actual day count {diff} divided by 360 overstates the year fraction by 365/360"
                ),
                evidence: evidence_for(sheet, diff),
            });
        }
    });
    hits
}
