//! Calendar dates and day-count bases.
//!
//! The two 30/360 variants differ only in how day 31 is adjusted:
//!
//! * US (NASD): a start day of 31 becomes 30; an end day of 31 becomes 30
//!   only when the adjusted start day is 30. No February end-of-month rule.
//! * European: day 31 becomes 30 on both dates, unconditionally.
//!
//! Both count `360·Δy + 30·Δm + Δd` on the adjusted days.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2199;

/// Serial day number of 1899-12-30, the zero of spreadsheet date serials.
const SERIAL_EPOCH: i64 = -25_569;

/// A proleptic Gregorian calendar date in 1900-01-01..=2199-12-31.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Date {
    year: i32,
    month: u32,
    day: u32,
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

pub fn days_in_year(year: i32) -> u32 {
    if is_leap_year(year) {
        366
    } else {
        365
    }
}

impl Date {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return Err(Error::InvalidDate(format!("{year:04}-{month:02}-{day:02}")));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(Error::DateOutOfRange(format!(
                "{year:04}-{month:02}-{day:02}"
            )));
        }
        Ok(Self { year, month, day })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    /// Days since 1970-01-01.
    pub fn day_number(&self) -> i64 {
        // Howard Hinnant's days_from_civil.
        let y = i64::from(self.year) - i64::from(self.month <= 2);
        let era = y.div_euclid(400);
        let yoe = y - era * 400;
        let m = i64::from(self.month);
        let mp = if m > 2 { m - 3 } else { m + 9 };
        let doy = (153 * mp + 2) / 5 + i64::from(self.day) - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        era * 146_097 + doe - 719_468
    }

    pub fn from_day_number(days: i64) -> Result<Self> {
        let z = days + 719_468;
        let era = z.div_euclid(146_097);
        let doe = z - era * 146_097;
        let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
        let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        let mp = (5 * doy + 2) / 153;
        let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
        let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
        let year = yoe + era * 400 + i64::from(month <= 2);
        let year = i32::try_from(year).map_err(|_| Error::DateOutOfRange(days.to_string()))?;
        Self::new(year, month, day)
    }

    /// Spreadsheet date serial (1899-12-30 = 0). No phantom 1900-02-29 is
    /// inserted, so serials before 1900-03-01 are one higher than a legacy
    /// spreadsheet shows.
    pub fn to_serial(&self) -> i64 {
        self.day_number() - SERIAL_EPOCH
    }

    pub fn from_serial(serial: i64) -> Result<Self> {
        Self::from_day_number(serial + SERIAL_EPOCH)
    }

    pub fn succ(&self) -> Option<Self> {
        Self::from_day_number(self.day_number() + 1).ok()
    }

    fn tuple(&self) -> (i32, u32, u32) {
        (self.year, self.month, self.day)
    }
}

impl Ord for Date {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tuple().cmp(&other.tuple())
    }
}

impl PartialOrd for Date {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for Date {
    type Err = Error;

    /// Parses ISO 8601 `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDate(s.to_string());
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return Err(bad());
        }
        let digits = |r: std::ops::Range<usize>| -> Result<u32> {
            let part = &s[r];
            if !part.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            part.parse().map_err(|_| bad())
        };
        let year = digits(0..4)? as i32;
        let month = digits(5..7)?;
        let day = digits(8..10)?;
        Date::new(year, month, day)
    }
}

impl Serialize for Date {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Date {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum DayCountBasis {
    /// US (NASD) 30/360, the default of the accrual functions.
    #[default]
    Us30_360,
    Eur30_360,
    ActualActual,
    Actual360,
    Actual365,
}

impl DayCountBasis {
    pub const ALL: [DayCountBasis; 5] = [
        DayCountBasis::Us30_360,
        DayCountBasis::Eur30_360,
        DayCountBasis::ActualActual,
        DayCountBasis::Actual360,
        DayCountBasis::Actual365,
    ];

    /// Maps the spreadsheet `basis` argument (0..=4) onto a variant.
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(Self::Us30_360),
            1 => Some(Self::ActualActual),
            2 => Some(Self::Actual360),
            3 => Some(Self::Actual365),
            4 => Some(Self::Eur30_360),
            _ => None,
        }
    }

    pub fn code(self) -> i64 {
        match self {
            Self::Us30_360 => 0,
            Self::ActualActual => 1,
            Self::Actual360 => 2,
            Self::Actual365 => 3,
            Self::Eur30_360 => 4,
        }
    }

    pub fn is_actual(self) -> bool {
        matches!(self, Self::ActualActual | Self::Actual360 | Self::Actual365)
    }
}

fn check_order(start: Date, end: Date) -> Result<()> {
    if start > end {
        Err(Error::Ordering { start, end })
    } else {
        Ok(())
    }
}

fn thirty_360(start: Date, end: Date, european: bool) -> i64 {
    let d1 = start.day.min(30);
    let d2 = if european || d1 == 30 {
        end.day.min(30)
    } else {
        end.day
    };
    360 * i64::from(end.year - start.year)
        + 30 * (i64::from(end.month) - i64::from(start.month))
        + (i64::from(d2) - i64::from(d1))
}

/// Day count between two dates under `basis`.
pub fn days_between(start: Date, end: Date, basis: DayCountBasis) -> Result<i64> {
    check_order(start, end)?;
    Ok(match basis {
        DayCountBasis::Us30_360 => thirty_360(start, end, false),
        DayCountBasis::Eur30_360 => thirty_360(start, end, true),
        _ => end.day_number() - start.day_number(),
    })
}

/// Actual/actual denominator: 366 when the span (inclusive) holds a
/// February 29 and is at most one year long, 365 otherwise; longer spans use
/// the mean length of the calendar years touched.
fn actual_actual_denominator(start: Date, end: Date) -> f64 {
    let one_year_on = {
        let y = start.year + 1;
        let d = start.day.min(days_in_month(y, start.month));
        (y, start.month, d)
    };
    if end.tuple() <= one_year_on {
        let holds_leap_day = (start.year..=end.year)
            .filter(|&y| is_leap_year(y))
            .any(|y| start.tuple() <= (y, 2, 29) && (y, 2, 29) <= end.tuple());
        if holds_leap_day {
            366.0
        } else {
            365.0
        }
    } else {
        let years = start.year..=end.year;
        let count = years.clone().count() as f64;
        years.map(|y| f64::from(days_in_year(y))).sum::<f64>() / count
    }
}

/// Elapsed time between two dates, in years, under `basis`.
pub fn year_fraction<T: Scalar>(start: Date, end: Date, basis: DayCountBasis) -> Result<T> {
    let days = days_between(start, end, basis)?;
    let denominator = match basis {
        DayCountBasis::Us30_360 | DayCountBasis::Eur30_360 | DayCountBasis::Actual360 => 360.0,
        DayCountBasis::Actual365 => 365.0,
        DayCountBasis::ActualActual => actual_actual_denominator(start, end),
    };
    Ok(T::lit(days as f64) / T::lit(denominator))
}
