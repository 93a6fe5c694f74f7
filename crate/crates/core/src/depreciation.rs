//! Fixed-declining-balance and straight-line depreciation.
//!
//! In [`PrecisionMode::Compat`] the declining-balance rate is rounded to three
//! decimals before use, as legacy spreadsheets do, so a schedule generally
//! does not land on the salvage value. [`reconcile`] reports that gap.
//! Schedule amounts are never rounded to cents.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    /// Reproduces the spreadsheet, including its 3-decimal rate.
    Compat,
    #[default]
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepreciationSpec<T> {
    pub cost: T,
    pub salvage: T,
    /// Number of periods (accounting years when `month` is used).
    pub life: u32,
    /// Months in service during the first period.
    pub month: u32,
}

impl<T: Scalar> DepreciationSpec<T> {
    pub fn new(cost: T, salvage: T, life: u32) -> Result<Self> {
        Self::with_month(cost, salvage, life, 12)
    }

    pub fn with_month(cost: T, salvage: T, life: u32, month: u32) -> Result<Self> {
        let spec = Self {
            cost,
            salvage,
            life,
            month,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.cost.is_finite() || self.cost <= T::zero() {
            return Err(Error::Domain(format!("cost must be positive, got {}", self.cost)));
        }
        if !self.salvage.is_finite() || self.salvage < T::zero() {
            return Err(Error::Domain(format!(
                "salvage must be non-negative, got {}",
                self.salvage
            )));
        }
        if self.salvage > self.cost {
            return Err(Error::Domain(format!(
                "salvage {} exceeds cost {}",
                self.salvage, self.cost
            )));
        }
        if self.life == 0 {
            return Err(Error::Domain("life must be at least one period".into()));
        }
        if !(1..=12).contains(&self.month) {
            return Err(Error::Domain(format!(
                "month must be in 1..=12, got {}",
                self.month
            )));
        }
        Ok(())
    }

    /// Number of depreciation periods: `life`, plus one trailing partial
    /// period when the asset entered service part way through year one.
    pub fn periods(&self) -> u32 {
        if self.month < 12 {
            self.life + 1
        } else {
            self.life
        }
    }
}

/// A declining-balance rate together with its degeneracy flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbRate<T> {
    pub rate: T,
    /// Set when salvage is zero and the rate saturates at 1 (full write-off).
    pub saturated: bool,
}

/// `1 − (salvage/cost)^(1/life)`, rounded half away from zero to three
/// decimals in compat mode.
pub fn db_rate<T: Scalar>(spec: &DepreciationSpec<T>, mode: PrecisionMode) -> Result<DbRate<T>> {
    spec.validate()?;
    if spec.salvage == T::zero() {
        return Ok(DbRate {
            rate: T::one(),
            saturated: true,
        });
    }
    let raw = T::one() - (spec.salvage / spec.cost).powf(T::one() / T::from_count(spec.life));
    let rate = match mode {
        PrecisionMode::Exact => raw,
        PrecisionMode::Compat => round_to_thousandths(raw),
    };
    Ok(DbRate {
        rate,
        saturated: false,
    })
}

fn round_to_thousandths<T: Scalar>(x: T) -> T {
    let k = T::lit(1000.0);
    (x * k).round() / k
}

fn period_amount<T: Scalar>(spec: &DepreciationSpec<T>, rate: T, period: u32, accumulated: T) -> T {
    let twelve = T::lit(12.0);
    if period == 1 {
        spec.cost * rate * T::from_count(spec.month) / twelve
    } else if period <= spec.life {
        (spec.cost - accumulated) * rate
    } else {
        (spec.cost - accumulated) * rate * T::from_count(12 - spec.month) / twelve
    }
}

/// Depreciation for one period.
pub fn db_period<T: Scalar>(
    spec: &DepreciationSpec<T>,
    period: u32,
    mode: PrecisionMode,
) -> Result<T> {
    let rate = db_rate(spec, mode)?.rate;
    let max = spec.periods();
    if period == 0 || period > max {
        return Err(Error::PeriodOutOfRange {
            period,
            max,
            reason: if spec.month < 12 {
                "a part-year first period adds one extra period at life + 1"
            } else {
                "without a month argument there are exactly `life` periods"
            },
        });
    }
    let mut accumulated = T::zero();
    for p in 1..period {
        accumulated += period_amount(spec, rate, p, accumulated);
    }
    Ok(period_amount(spec, rate, period, accumulated))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepreciationRow<T> {
    pub period: u32,
    pub depreciation: T,
    pub book_value_end: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepreciationSchedule<T> {
    pub rows: Vec<DepreciationRow<T>>,
    pub mode: PrecisionMode,
    pub rate: T,
    pub saturated: bool,
}

impl<T: Scalar> DepreciationSchedule<T> {
    /// Rolls the declining-balance recurrence at an explicit `rate`.
    pub fn from_rate(spec: &DepreciationSpec<T>, rate: T, mode: PrecisionMode) -> Result<Self> {
        spec.validate()?;
        let mut rows = Vec::with_capacity(spec.periods() as usize);
        let mut accumulated = T::zero();
        let mut book = spec.cost;
        for period in 1..=spec.periods() {
            let depreciation = period_amount(spec, rate, period, accumulated);
            accumulated += depreciation;
            book -= depreciation;
            rows.push(DepreciationRow {
                period,
                depreciation,
                book_value_end: book,
            });
        }
        Ok(Self {
            rows,
            mode,
            rate,
            saturated: false,
        })
    }

    pub fn total_depreciation(&self) -> T {
        self.rows
            .iter()
            .fold(T::zero(), |acc, row| acc + row.depreciation)
    }

    pub fn final_book_value(&self) -> Option<T> {
        self.rows.last().map(|row| row.book_value_end)
    }

    /// Writes `period,depreciation,book_value_end` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["period", "depreciation", "book_value_end"])?;
        for row in &self.rows {
            writer.write_record([
                row.period.to_string(),
                row.depreciation.to_string(),
                row.book_value_end.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn db_schedule<T: Scalar>(
    spec: &DepreciationSpec<T>,
    mode: PrecisionMode,
) -> Result<DepreciationSchedule<T>> {
    let rate = db_rate(spec, mode)?;
    let mut schedule = DepreciationSchedule::from_rate(spec, rate.rate, mode)?;
    schedule.saturated = rate.saturated;
    Ok(schedule)
}

/// Straight-line depreciation per period.
pub fn sln<T: Scalar>(cost: T, salvage: T, life: u32) -> Result<T> {
    if life == 0 {
        return Err(Error::Domain("life must be at least one period".into()));
    }
    if salvage > cost {
        return Err(Error::Domain(format!(
            "salvage {salvage} exceeds cost {cost}"
        )));
    }
    Ok((cost - salvage) / T::from_count(life))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconciliation<T> {
    pub total_depreciation: T,
    pub residual_book_value: T,
    /// `(cost − Σ depreciation) − salvage`, signed.
    pub gap: T,
    pub tolerance: T,
    /// `|gap| > tolerance`.
    pub flagged: bool,
}

/// Relative (to cost) tolerance used by [`reconcile`].
pub const RECONCILE_RELATIVE_TOLERANCE: f64 = 1e-6;

pub fn reconcile<T: Scalar>(
    schedule: &DepreciationSchedule<T>,
    spec: &DepreciationSpec<T>,
) -> Reconciliation<T> {
    reconcile_with_tolerance(
        schedule,
        spec,
        spec.cost * T::lit(RECONCILE_RELATIVE_TOLERANCE),
    )
}

pub fn reconcile_with_tolerance<T: Scalar>(
    schedule: &DepreciationSchedule<T>,
    spec: &DepreciationSpec<T>,
    tolerance: T,
) -> Reconciliation<T> {
    let total_depreciation = schedule.total_depreciation();
    let residual_book_value = spec.cost - total_depreciation;
    let gap = residual_book_value - spec.salvage;
    Reconciliation {
        total_depreciation,
        residual_book_value,
        gap,
        tolerance,
        flagged: gap.abs() > tolerance,
    }
}
