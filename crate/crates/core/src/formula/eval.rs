use std::collections::BTreeMap;

use super::address::{CellAddr, CellRange};
use super::ast::{BinaryOp, FormulaNode, UnaryOp};
use super::sheet::Sheet;
use super::value::{CellError, CellValue, ErrorKind};
use crate::cashflow::{npv_legacy, pmt, xnpv, CashFlowSeries};
use crate::daycount::{days_between, Date, DayCountBasis};
use crate::depreciation::{db_period, sln, DepreciationSpec, PrecisionMode};
use crate::error::Error;
use crate::rates::{accrint, effective_rate, intrate, nominal_rate};

/// Functions the evaluator knows.
pub const FUNCTIONS: &[&str] = &[
    "ACCRINT", "DAYS360", "DB", "EFFECT", "INTRATE", "NOMINAL", "NPV", "PMT", "SLN", "SUM", "XNPV",
];

pub(crate) type Values = BTreeMap<CellAddr, CellValue>;

type Eval<T> = Result<T, CellError>;

/// Evaluates `node` against the computed values of `sheet`. Financial
/// functions run in compat mode.
pub fn evaluate(node: &FormulaNode, sheet: &Sheet) -> CellValue {
    evaluate_in(node, sheet.values())
}

pub(crate) fn evaluate_in(node: &FormulaNode, values: &Values) -> CellValue {
    Evaluator { values }
        .scalar(node)
        .unwrap_or_else(CellValue::Error)
}

fn module_error(function: &str, err: Error) -> CellError {
    let kind = match err {
        Error::Domain(_)
        | Error::Ordering { .. }
        | Error::PeriodOutOfRange { .. }
        | Error::Validation(_)
        | Error::InvalidDate(_)
        | Error::DateOutOfRange(_)
        | Error::NoSolution(_) => ErrorKind::Num,
        _ => ErrorKind::Value,
    };
    CellError::new(kind, format!("{function}: {err}"))
}

fn number_result(function: &str, result: Result<f64, Error>) -> Eval<CellValue> {
    let n = result.map_err(|e| module_error(function, e))?;
    if n.is_finite() {
        Ok(CellValue::Number(n))
    } else {
        Err(CellError::new(ErrorKind::Num, format!("{function}: result is not finite")))
    }
}

struct Evaluator<'a> {
    values: &'a Values,
}

struct Call<'a> {
    name: &'a str,
    args: &'a [FormulaNode],
}

impl<'a> Call<'a> {
    fn arity(&self, min: usize, max: usize) -> Eval<()> {
        let n = self.args.len();
        if n < min || n > max {
            let expected = if min == max {
                min.to_string()
            } else {
                format!("{min} to {max}")
            };
            return Err(CellError::new(
                ErrorKind::Argument,
                format!("{} expects {expected} arguments, got {n}", self.name),
            ));
        }
        Ok(())
    }

    fn required(&self, index: usize, param: &str) -> Eval<&'a FormulaNode> {
        match self.args.get(index) {
            Some(FormulaNode::EmptyArg) | None => Err(CellError::new(
                ErrorKind::Argument,
                format!("{}: missing argument `{param}`", self.name),
            )),
            Some(node) => Ok(node),
        }
    }

    fn optional(&self, index: usize) -> Option<&'a FormulaNode> {
        self.args.get(index).filter(|n| **n != FormulaNode::EmptyArg)
    }

    fn bad(&self, param: &str, what: &str) -> CellError {
        CellError::new(
            ErrorKind::Argument,
            format!("{}: argument `{param}` {what}", self.name),
        )
    }
}

impl<'a> Evaluator<'a> {
    fn lookup(&self, addr: CellAddr) -> Eval<Option<&'a CellValue>> {
        match self.values.get(&addr) {
            Some(CellValue::Error(e)) => Err(propagate(e, addr)),
            other => Ok(other),
        }
    }

    fn range_cells(&self, range: CellRange) -> impl Iterator<Item = (CellAddr, &'a CellValue)> {
        self.values
            .range(range.start..=range.end)
            .filter(move |(addr, _)| range.contains(**addr))
            .map(|(addr, value)| (*addr, value))
    }

    fn scalar(&self, node: &FormulaNode) -> Eval<CellValue> {
        match node {
            FormulaNode::Number(n) => Ok(CellValue::Number(*n)),
            FormulaNode::Percent(p) => Ok(CellValue::Number(p / 100.0)),
            FormulaNode::Text(s) => Ok(CellValue::Text(s.clone())),
            FormulaNode::Ref(addr) => Ok(self
                .lookup(*addr)?
                .cloned()
                .unwrap_or(CellValue::Number(0.0))),
            FormulaNode::Range(range) => Err(CellError::new(
                ErrorKind::Value,
                format!("range {range} used where a single value is expected"),
            )),
            FormulaNode::EmptyArg => Err(CellError::new(
                ErrorKind::Value,
                "empty argument outside a call",
            )),
            FormulaNode::Unary(op, child) => {
                let v = self.number(child)?;
                let out = match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Plus => v,
                    UnaryOp::Percent => v / 100.0,
                };
                Ok(CellValue::Number(out))
            }
            FormulaNode::Binary(op, left, right) => self.binary(*op, left, right),
            FormulaNode::Call { name, args } => self.call(&Call { name, args }),
        }
    }

    fn number(&self, node: &FormulaNode) -> Eval<f64> {
        match self.scalar(node)? {
            CellValue::Number(n) => Ok(n),
            CellValue::Date(d) => Ok(d.to_serial() as f64),
            CellValue::Text(s) => Err(CellError::new(
                ErrorKind::Value,
                format!("text \"{s}\" used in arithmetic"),
            )),
            CellValue::Error(e) => Err(e),
        }
    }

    fn binary(&self, op: BinaryOp, left: &FormulaNode, right: &FormulaNode) -> Eval<CellValue> {
        match op {
            BinaryOp::Concat => {
                let l = self.scalar(left)?;
                let r = self.scalar(right)?;
                return Ok(CellValue::Text(format!("{l}{r}")));
            }
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                let l = self.scalar(left)?;
                let r = self.scalar(right)?;
                let ordering = compare(&l, &r);
                let truth = match op {
                    BinaryOp::Eq => ordering.is_eq(),
                    BinaryOp::Ne => ordering.is_ne(),
                    BinaryOp::Lt => ordering.is_lt(),
                    BinaryOp::Le => ordering.is_le(),
                    BinaryOp::Gt => ordering.is_gt(),
                    _ => ordering.is_ge(),
                };
                return Ok(CellValue::Number(if truth { 1.0 } else { 0.0 }));
            }
            _ => {}
        }
        let l = self.number(left)?;
        let r = self.number(right)?;
        let out = match op {
            BinaryOp::Add => l + r,
            BinaryOp::Sub => l - r,
            BinaryOp::Mul => l * r,
            BinaryOp::Div if r == 0.0 => {
                return Err(CellError::new(ErrorKind::Div0, "division by zero"));
            }
            BinaryOp::Div => l / r,
            BinaryOp::Pow if l == 0.0 && r < 0.0 => {
                return Err(CellError::new(ErrorKind::Div0, "zero raised to a negative power"));
            }
            _ => l.powf(r),
        };
        if out.is_finite() {
            Ok(CellValue::Number(out))
        } else {
            Err(CellError::new(
                ErrorKind::Num,
                format!("{l}{}{r} is not a finite number", op.symbol()),
            ))
        }
    }

    fn arg_number(&self, call: &Call, index: usize, param: &str) -> Eval<f64> {
        let node = call.required(index, param)?;
        match self.scalar(node)? {
            CellValue::Number(n) => Ok(n),
            CellValue::Date(d) => Ok(d.to_serial() as f64),
            CellValue::Text(_) => Err(call.bad(param, "expects a number, got text")),
            CellValue::Error(e) => Err(e),
        }
    }

    fn arg_count(&self, call: &Call, index: usize, param: &str) -> Eval<u32> {
        let n = self.arg_number(call, index, param)?.trunc();
        if !(0.0..=f64::from(u32::MAX)).contains(&n) {
            return Err(CellError::new(
                ErrorKind::Num,
                format!("{}: argument `{param}` = {n} is not a valid count", call.name),
            ));
        }
        Ok(n as u32)
    }

    fn to_date(&self, call: &Call, param: &str, value: &CellValue) -> Eval<Date> {
        match value {
            CellValue::Date(d) => Ok(*d),
            CellValue::Number(n) => Date::from_serial(n.floor() as i64).map_err(|_| {
                CellError::new(
                    ErrorKind::Num,
                    format!("{}: argument `{param}` = {n} is not a valid date", call.name),
                )
            }),
            CellValue::Text(_) => Err(call.bad(param, "expects a date, got text")),
            CellValue::Error(e) => Err(e.clone()),
        }
    }

    fn arg_date(&self, call: &Call, index: usize, param: &str) -> Eval<Date> {
        let value = self.scalar(call.required(index, param)?)?;
        self.to_date(call, param, &value)
    }

    fn arg_basis(&self, call: &Call, index: usize) -> Eval<DayCountBasis> {
        if call.optional(index).is_none() {
            return Ok(DayCountBasis::default());
        }
        let code = self.arg_number(call, index, "basis")?.trunc();
        DayCountBasis::from_code(code as i64)
            .filter(|_| code.is_finite())
            .ok_or_else(|| {
                CellError::new(
                    ErrorKind::Num,
                    format!("{}: basis {code} is not one of 0..4", call.name),
                )
            })
    }

    /// Numbers from a value list argument: ranges contribute their numeric
    /// and date cells and skip text.
    fn arg_list(&self, call: &Call, index: usize, param: &str, out: &mut Vec<f64>) -> Eval<()> {
        match call.args.get(index) {
            Some(FormulaNode::Range(range)) => {
                for (addr, value) in self.range_cells(*range) {
                    match value {
                        CellValue::Number(n) => out.push(*n),
                        CellValue::Date(d) => out.push(d.to_serial() as f64),
                        CellValue::Text(_) => {}
                        CellValue::Error(e) => return Err(propagate(e, addr)),
                    }
                }
                Ok(())
            }
            _ => {
                out.push(self.arg_number(call, index, param)?);
                Ok(())
            }
        }
    }

    fn arg_dates(&self, call: &Call, index: usize, param: &str) -> Eval<Vec<Date>> {
        match call.args.get(index) {
            Some(FormulaNode::Range(range)) => self
                .range_cells(*range)
                .map(|(addr, value)| match value {
                    CellValue::Error(e) => Err(propagate(e, addr)),
                    other => self.to_date(call, param, other),
                })
                .collect(),
            _ => Ok(vec![self.arg_date(call, index, param)?]),
        }
    }

    fn call(&self, call: &Call) -> Eval<CellValue> {
        let name = call.name;
        match name {
            "SUM" => {
                call.arity(1, 255)?;
                let mut values = Vec::new();
                for i in 0..call.args.len() {
                    if call.optional(i).is_some() {
                        self.arg_list(call, i, "number", &mut values)?;
                    }
                }
                Ok(CellValue::Number(values.iter().sum()))
            }
            "NPV" => {
                call.arity(2, 255)?;
                let rate = self.arg_number(call, 0, "rate")?;
                let mut values = Vec::new();
                for i in 1..call.args.len() {
                    self.arg_list(call, i, "value", &mut values)?;
                }
                number_result(name, npv_legacy(rate, &values))
            }
            "XNPV" => {
                call.arity(3, 3)?;
                let rate = self.arg_number(call, 0, "rate")?;
                let mut values = Vec::new();
                self.arg_list(call, 1, "values", &mut values)?;
                let dates = self.arg_dates(call, 2, "dates")?;
                let series =
                    CashFlowSeries::dated(values, dates).map_err(|e| module_error(name, e))?;
                number_result(name, xnpv(rate, &series))
            }
            "DB" => {
                call.arity(4, 5)?;
                let cost = self.arg_number(call, 0, "cost")?;
                let salvage = self.arg_number(call, 1, "salvage")?;
                let life = self.arg_count(call, 2, "life")?;
                let period = self.arg_count(call, 3, "period")?;
                let month = match call.optional(4) {
                    Some(_) => self.arg_count(call, 4, "month")?,
                    None => 12,
                };
                let spec = DepreciationSpec {
                    cost,
                    salvage,
                    life,
                    month,
                };
                number_result(name, db_period(&spec, period, PrecisionMode::Compat))
            }
            "SLN" => {
                call.arity(3, 3)?;
                let cost = self.arg_number(call, 0, "cost")?;
                let salvage = self.arg_number(call, 1, "salvage")?;
                let life = self.arg_count(call, 2, "life")?;
                number_result(name, sln(cost, salvage, life))
            }
            "EFFECT" => {
                call.arity(2, 2)?;
                let rate = self.arg_number(call, 0, "nominal_rate")?;
                let n = self.arg_count(call, 1, "npery")?;
                number_result(name, effective_rate(rate, n))
            }
            "NOMINAL" => {
                call.arity(2, 2)?;
                let rate = self.arg_number(call, 0, "effect_rate")?;
                let n = self.arg_count(call, 1, "npery")?;
                number_result(name, nominal_rate(rate, n))
            }
            "INTRATE" => {
                call.arity(4, 5)?;
                let settlement = self.arg_date(call, 0, "settlement")?;
                let maturity = self.arg_date(call, 1, "maturity")?;
                let investment = self.arg_number(call, 2, "investment")?;
                let redemption = self.arg_number(call, 3, "redemption")?;
                let basis = self.arg_basis(call, 4)?;
                number_result(
                    name,
                    intrate(settlement, maturity, investment, redemption, basis),
                )
            }
            "ACCRINT" => {
                call.arity(4, 8)?;
                let layout = AccrintLayout::for_arity(call.args.len());
                let issue = self.arg_date(call, 0, "issue")?;
                if layout == AccrintLayout::Spreadsheet {
                    self.arg_date(call, 1, "first_interest")?;
                    self.arg_number(call, 5, "frequency")?;
                }
                let settlement = self.arg_date(call, layout.settlement(), "settlement")?;
                let rate = self.arg_number(call, layout.rate(), "rate")?;
                let par = self.arg_number(call, layout.rate() + 1, "par")?;
                let basis = self.arg_basis(call, layout.basis())?;
                number_result(name, accrint(issue, settlement, rate, par, basis))
            }
            "PMT" => {
                call.arity(3, 3)?;
                let rate = self.arg_number(call, 0, "rate")?;
                let nper = self.arg_count(call, 1, "nper")?;
                let pv = self.arg_number(call, 2, "pv")?;
                number_result(name, pmt(rate, nper, pv))
            }
            "DAYS360" => {
                call.arity(2, 3)?;
                let start = self.arg_date(call, 0, "start_date")?;
                let end = self.arg_date(call, 1, "end_date")?;
                let european = match call.optional(2) {
                    Some(_) => self.arg_number(call, 2, "method")? != 0.0,
                    None => false,
                };
                let basis = if european {
                    DayCountBasis::Eur30_360
                } else {
                    DayCountBasis::Us30_360
                };
                number_result(name, days_between(start, end, basis).map(|d| d as f64))
            }
            other => Err(CellError::new(
                ErrorKind::UnknownFunction,
                format!("unknown function {other}"),
            )),
        }
    }
}

/// `ACCRINT` accepts a short form `(issue, settlement, rate, par, [basis])`
/// and the spreadsheet form `(issue, first_interest, settlement, rate, par,
/// frequency, [basis], [calc_method])`, told apart by argument count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AccrintLayout {
    Short,
    Spreadsheet,
}

impl AccrintLayout {
    pub(crate) fn for_arity(n: usize) -> Self {
        if n >= 6 {
            Self::Spreadsheet
        } else {
            Self::Short
        }
    }

    fn settlement(self) -> usize {
        match self {
            Self::Short => 1,
            Self::Spreadsheet => 2,
        }
    }

    pub(crate) fn rate(self) -> usize {
        match self {
            Self::Short => 2,
            Self::Spreadsheet => 3,
        }
    }

    pub(crate) fn basis(self) -> usize {
        match self {
            Self::Short => 4,
            Self::Spreadsheet => 6,
        }
    }
}

fn propagate(err: &CellError, from: CellAddr) -> CellError {
    match err.kind {
        ErrorKind::Cycle | ErrorKind::Propagated => CellError::new(
            ErrorKind::Propagated,
            format!("depends on {from}, which is on or behind a circular reference"),
        ),
        _ => err.clone(),
    }
}

fn compare(l: &CellValue, r: &CellValue) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let rank = |v: &CellValue| match v {
        CellValue::Number(_) | CellValue::Date(_) => 0,
        CellValue::Text(_) => 1,
        CellValue::Error(_) => 2,
    };
    let num = |v: &CellValue| match v {
        CellValue::Number(n) => *n,
        CellValue::Date(d) => d.to_serial() as f64,
        _ => 0.0,
    };
    match (l, r) {
        (CellValue::Text(a), CellValue::Text(b)) => a.to_lowercase().cmp(&b.to_lowercase()),
        _ if rank(l) == 0 && rank(r) == 0 => num(l).partial_cmp(&num(r)).unwrap_or(Ordering::Equal),
        _ => rank(l).cmp(&rank(r)),
    }
}
