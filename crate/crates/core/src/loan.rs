//! Amortization schedules, payment holidays and table verification.
//!
//! During a payment holiday no payments are made and each month's interest
//! is added to the balance. The term is held fixed, so the remaining level
//! payments grow to cover the capitalized interest.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::cashflow::pmt;
use crate::error::{Error, Result};
use crate::rates::{periodic_rate, PeriodicConvention};
use crate::scalar::Scalar;

/// Bisection bracket for implied monthly rates.
pub const IMPLIED_RATE_BRACKET: (f64, f64) = (-0.5, 1.0);
pub const IMPLIED_RATE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoanSpec<T> {
    pub principal: T,
    /// Annual rate as quoted; read through `convention`.
    pub quoted_annual: T,
    pub convention: PeriodicConvention,
    pub term_months: u32,
    pub holiday_months: u32,
}

impl<T: Scalar> LoanSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.principal.is_finite() || self.principal <= T::zero() {
            return Err(Error::Validation(format!(
                "principal must be positive, got {}",
                self.principal
            )));
        }
        if !self.quoted_annual.is_finite() || self.quoted_annual <= -T::one() {
            return Err(Error::Validation(format!(
                "quoted rate must be > -1, got {}",
                self.quoted_annual
            )));
        }
        if self.term_months == 0 {
            return Err(Error::Validation("term must be at least one month".into()));
        }
        if self.holiday_months >= self.term_months {
            return Err(Error::Validation(format!(
                "holiday of {} months leaves no repayments in a {}-month term",
                self.holiday_months, self.term_months
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleRow<T> {
    pub month: u32,
    pub opening: T,
    pub interest: T,
    pub principal_paid: T,
    pub payment: T,
    pub closing: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmortizationSchedule<T> {
    pub rows: Vec<ScheduleRow<T>>,
    pub monthly_rate: T,
}

impl<T: Scalar> AmortizationSchedule<T> {
    pub fn principal(&self) -> T {
        self.rows.first().map_or(T::zero(), |r| r.opening)
    }

    /// The level payment: the first non-zero payment.
    pub fn level_payment(&self) -> Option<T> {
        self.rows
            .iter()
            .map(|r| r.payment)
            .find(|&p| p != T::zero())
    }

    pub fn payments(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.payment).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "month",
            "opening",
            "interest",
            "principal_paid",
            "payment",
            "closing",
        ])?;
        for r in &self.rows {
            writer.write_record([
                r.month.to_string(),
                r.opening.to_string(),
                r.interest.to_string(),
                r.principal_paid.to_string(),
                r.payment.to_string(),
                r.closing.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn build_schedule<T: Scalar>(spec: &LoanSpec<T>) -> Result<AmortizationSchedule<T>> {
    spec.validate()?;
    let rate = periodic_rate(spec.quoted_annual, 12, spec.convention)?;
    let mut rows = Vec::with_capacity(spec.term_months as usize);
    let mut balance = spec.principal;

    for month in 1..=spec.holiday_months {
        let interest = balance * rate;
        rows.push(ScheduleRow {
            month,
            opening: balance,
            interest,
            principal_paid: T::zero(),
            payment: T::zero(),
            closing: balance + interest,
        });
        balance += interest;
    }

    let remaining = spec.term_months - spec.holiday_months;
    let level = -pmt(rate, remaining, balance)?;
    for month in spec.holiday_months + 1..=spec.term_months {
        let interest = balance * rate;
        let (payment, closing) = if month == spec.term_months {
            (balance + interest, T::zero())
        } else {
            (level, balance + interest - level)
        };
        rows.push(ScheduleRow {
            month,
            opening: balance,
            interest,
            principal_paid: payment - interest,
            payment,
            closing,
        });
        balance = closing;
    }

    Ok(AmortizationSchedule {
        rows,
        monthly_rate: rate,
    })
}

/// A repayment table as published; absent columns are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow<T> {
    pub month: u32,
    pub opening: Option<T>,
    pub interest: Option<T>,
    pub payment: Option<T>,
    pub closing: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublishedTable<T> {
    pub rows: Vec<PublishedRow<T>>,
}

impl<T: Scalar> From<&AmortizationSchedule<T>> for PublishedTable<T> {
    fn from(schedule: &AmortizationSchedule<T>) -> Self {
        Self {
            rows: schedule
                .rows
                .iter()
                .map(|r| PublishedRow {
                    month: r.month,
                    opening: Some(r.opening),
                    interest: Some(r.interest),
                    payment: Some(r.payment),
                    closing: Some(r.closing),
                })
                .collect(),
        }
    }
}

impl<T: Scalar> PublishedTable<T> {
    /// Reads CSV with a `month` column and any of `opening`, `interest`,
    /// `payment`, `closing`. Other columns are ignored.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: HashMap<String, usize> = rdr
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_ascii_lowercase(), i))
            .collect();
        let month_col = *headers
            .get("month")
            .ok_or_else(|| Error::Validation("published table has no `month` column".into()))?;
        let col = |name: &str| headers.get(name).copied();
        let (opening, interest, payment, closing) =
            (col("opening"), col("interest"), col("payment"), col("closing"));

        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |idx: Option<usize>, name: &str| -> Result<Option<T>> {
                match idx.and_then(|i| record.get(i)) {
                    None | Some("") => Ok(None),
                    Some(text) => text.parse().map(Some).map_err(|_| {
                        Error::Validation(format!(
                            "row {}: {name} `{text}` is not a number",
                            line + 2
                        ))
                    }),
                }
            };
            let month_text = record.get(month_col).unwrap_or("");
            let month = month_text.parse().map_err(|_| {
                Error::Validation(format!("row {}: bad month `{month_text}`", line + 2))
            })?;
            rows.push(PublishedRow {
                month,
                opening: field(opening, "opening")?,
                interest: field(interest, "interest")?,
                payment: field(payment, "payment")?,
                closing: field(closing, "closing")?,
            });
        }
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleField {
    Payment,
    Interest,
    Closing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldDelta<T> {
    pub field: ScheduleField,
    pub candidate: T,
    pub published: T,
    /// `candidate − published`.
    pub delta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discrepancy<T> {
    RowCount { candidate: usize, published: usize },
    Row { month: u32, deltas: Vec<FieldDelta<T>> },
}

/// Compares the payment, interest and closing columns row by row. An empty
/// result means the candidate replicates the published table.
pub fn verify_schedule<T: Scalar>(
    candidate: &AmortizationSchedule<T>,
    published: &PublishedTable<T>,
    tolerance: T,
) -> Vec<Discrepancy<T>> {
    let mut found = Vec::new();
    if candidate.rows.len() != published.rows.len() {
        found.push(Discrepancy::RowCount {
            candidate: candidate.rows.len(),
            published: published.rows.len(),
        });
    }
    for (ours, theirs) in candidate.rows.iter().zip(&published.rows) {
        let pairs = [
            (ScheduleField::Payment, ours.payment, theirs.payment),
            (ScheduleField::Interest, ours.interest, theirs.interest),
            (ScheduleField::Closing, ours.closing, theirs.closing),
        ];
        let deltas: Vec<_> = pairs
            .into_iter()
            .filter_map(|(field, c, p)| {
                let p = p?;
                let delta = c - p;
                // NaN in a published cell counts as a mismatch
                let within = delta.abs() <= tolerance;
                (!within).then_some(FieldDelta {
                    field,
                    candidate: c,
                    published: p,
                    delta,
                })
            })
            .collect();
        if !deltas.is_empty() {
            found.push(Discrepancy::Row {
                month: ours.month,
                deltas,
            });
        }
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpliedRate<T> {
    pub monthly: T,
    /// `(1 + monthly)^12 − 1`.
    pub effective_annual: T,
}

/// Solves `Σ payments[k] / (1+r)^(k+1) = principal` for `r` by bisection.
pub fn implied_rate_for_payments<T: Scalar>(principal: T, payments: &[T]) -> Result<ImpliedRate<T>> {
    if payments.iter().all(|&p| p == T::zero()) {
        return Err(Error::NoSolution("table has no repayments".into()));
    }
    let residual = |r: T| {
        let base = T::one() + r;
        payments
            .iter()
            .enumerate()
            .fold(-principal, |acc, (k, &p)| acc + p / base.powi(k as i32 + 1))
    };
    let (mut lo, mut hi) = (
        T::lit(IMPLIED_RATE_BRACKET.0),
        T::lit(IMPLIED_RATE_BRACKET.1),
    );
    let (mut f_lo, f_hi) = (residual(lo), residual(hi));
    if f_lo == T::zero() {
        hi = lo;
    } else if f_hi == T::zero() {
        lo = hi;
    } else if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSolution(format!(
            "no sign change of the present-value residual on ({}, {})",
            IMPLIED_RATE_BRACKET.0, IMPLIED_RATE_BRACKET.1
        )));
    }
    let tolerance = T::lit(IMPLIED_RATE_TOLERANCE);
    let two = T::lit(2.0);
    while hi - lo > tolerance {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = residual(mid);
        if f_mid == T::zero() {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let monthly = (lo + hi) / two;
    Ok(ImpliedRate {
        monthly,
        effective_annual: (T::lit(12.0) * monthly.ln_1p()).exp_m1(),
    })
}

/// The monthly rate behind a schedule's payments and opening balance.
pub fn implied_monthly_rate<T: Scalar>(schedule: &AmortizationSchedule<T>) -> Result<ImpliedRate<T>> {
    if schedule.rows.is_empty() {
        return Err(Error::NoSolution("empty schedule".into()));
    }
    implied_rate_for_payments(schedule.principal(), &schedule.payments())
}
