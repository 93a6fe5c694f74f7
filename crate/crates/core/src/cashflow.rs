//! Present values and annuity payments.
//!
//! [`npv_legacy`] discounts every value it is given, the first by one full
//! period, exactly like the spreadsheet `NPV`. An initial outlay that is
//! already at today's value must be left out of it and added separately;
//! [`npv_t0`] does that for you by treating the first value as period 0.

use std::io::Read;

use crate::daycount::{days_between, Date, DayCountBasis};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Signed cash flows, optionally dated.
#[derive(Debug, Clone, PartialEq)]
pub struct CashFlowSeries<T> {
    values: Vec<T>,
    dates: Option<Vec<Date>>,
}

impl<T: Scalar> CashFlowSeries<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("cash-flow series is empty".into()));
        }
        Ok(Self {
            values,
            dates: None,
        })
    }

    /// A dated series; dates must be strictly increasing.
    pub fn dated(values: Vec<T>, dates: Vec<Date>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("cash-flow series is empty".into()));
        }
        if values.len() != dates.len() {
            return Err(Error::Validation(format!(
                "{} values but {} dates",
                values.len(),
                dates.len()
            )));
        }
        if let Some(pair) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "dates must be strictly increasing: {} is followed by {}",
                pair[0], pair[1]
            )));
        }
        Ok(Self {
            values,
            dates: Some(dates),
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dates(&self) -> Option<&[Date]> {
        self.dates.as_deref()
    }

    /// Loads `date,value` or `value` rows. A first row whose value column is
    /// not numeric is taken as a header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut dates = Vec::new();
        let mut width = None;
        for (index, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let value_field = record.get(record.len() - 1).unwrap_or("");
            let value: T = match value_field.parse() {
                Ok(v) => v,
                Err(_) if index == 0 => continue,
                Err(_) => {
                    return Err(Error::Validation(format!(
                        "row {}: `{value_field}` is not a number",
                        index + 1
                    )))
                }
            };
            match (record.len(), *width.get_or_insert(record.len())) {
                (1, 1) => {}
                (2, 2) => dates.push(record[0].parse::<Date>()?),
                (n, w) => {
                    return Err(Error::Validation(format!(
                        "row {}: expected {w} column(s), found {n}",
                        index + 1
                    )))
                }
            }
            values.push(value);
        }
        if dates.is_empty() {
            Self::new(values)
        } else {
            Self::dated(values, dates)
        }
    }
}

fn check_rate<T: Scalar>(rate: T) -> Result<()> {
    if !rate.is_finite() || rate <= -T::one() {
        Err(Error::Domain(format!(
            "discount rate must be finite and > -1, got {rate}"
        )))
    } else {
        Ok(())
    }
}

/// `Σ values[i] / (1+rate)^(i+1)`: every value is discounted, the first by
/// one period. An empty slice is worth zero.
pub fn npv_legacy<T: Scalar>(rate: T, values: &[T]) -> Result<T> {
    check_rate(rate)?;
    let base = T::one() + rate;
    Ok(values
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, &v)| acc + v / base.powi(i as i32 + 1)))
}

/// `values[0] + npv_legacy(rate, values[1..])`: the first value is at
/// period 0 and is not discounted.
pub fn npv_t0<T: Scalar>(rate: T, values: &[T]) -> Result<T> {
    check_rate(rate)?;
    match values.split_first() {
        Some((&first, rest)) => Ok(first + npv_legacy(rate, rest)?),
        None => Ok(T::zero()),
    }
}

/// Dated present value at `dates[0]`; exponents are actual days over a fixed
/// 365, whatever the leap years.
pub fn xnpv<T: Scalar>(rate: T, series: &CashFlowSeries<T>) -> Result<T> {
    check_rate(rate)?;
    let dates = series
        .dates()
        .ok_or_else(|| Error::Validation("xnpv needs a dated series".into()))?;
    let origin = dates[0];
    let base = T::one() + rate;
    let year = T::lit(365.0);
    series
        .values()
        .iter()
        .zip(dates)
        .try_fold(T::zero(), |acc, (&v, &date)| {
            let days = days_between(origin, date, DayCountBasis::Actual365)?;
            Ok(acc + v / base.powf(T::lit(days as f64) / year))
        })
}

/// Level payment that amortizes `pv` over `nper` periods; its sign is
/// opposite to `pv`.
pub fn pmt<T: Scalar>(rate: T, nper: u32, pv: T) -> Result<T> {
    if nper == 0 {
        return Err(Error::Domain("nper must be at least 1".into()));
    }
    check_rate(rate)?;
    let n = T::from_count(nper);
    if rate == T::zero() {
        return Ok(-pv / n);
    }
    let discount = T::one() - (-n * rate.ln_1p()).exp();
    Ok(-pv * rate / discount)
}
