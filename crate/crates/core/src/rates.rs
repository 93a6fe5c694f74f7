//! Interest-rate conversions and simple-interest accrual.
//!
//! Rates are fractions per stated period (`0.12` is 12%). An annual rate
//! can be turned into a monthly one by dividing by twelve, which is only
//! right when the annual figure is nominal; UK lenders quote effective annual
//! rates, for which the monthly rate is the twelfth root. See
//! [`PeriodicConvention`].

use serde::{Deserialize, Serialize};

use crate::daycount::{year_fraction, Date, DayCountBasis};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absolute tolerance for rate comparisons in verdicts.
pub const RATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PeriodicConvention {
    /// Annual rate is nominal: periodic = annual / n.
    UsNominalDivide,
    /// Annual rate is effective: periodic = (1 + annual)^(1/n) − 1.
    #[default]
    UkEffectiveRoot,
}

fn check_periods(periods_per_year: u32) -> Result<()> {
    if periods_per_year == 0 {
        Err(Error::Domain("periods per year must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_rate<T: Scalar>(rate: T, what: &str) -> Result<()> {
    if !rate.is_finite() || rate <= -T::one() {
        Err(Error::Domain(format!("{what} must be finite and > -1, got {rate}")))
    } else {
        Ok(())
    }
}

/// Effective annual rate of a nominal rate compounded `periods_per_year` times.
pub fn effective_rate<T: Scalar>(nominal: T, periods_per_year: u32) -> Result<T> {
    check_periods(periods_per_year)?;
    check_rate(nominal, "nominal rate")?;
    if periods_per_year == 1 {
        return Ok(nominal);
    }
    let n = T::from_count(periods_per_year);
    check_rate(nominal / n, "periodic rate")?;
    Ok((n * (nominal / n).ln_1p()).exp_m1())
}

/// Inverse of [`effective_rate`].
pub fn nominal_rate<T: Scalar>(effective: T, periods_per_year: u32) -> Result<T> {
    check_periods(periods_per_year)?;
    check_rate(effective, "effective rate")?;
    if periods_per_year == 1 {
        return Ok(effective);
    }
    let n = T::from_count(periods_per_year);
    Ok(n * (effective.ln_1p() / n).exp_m1())
}

pub fn periodic_rate<T: Scalar>(
    annual: T,
    periods_per_year: u32,
    convention: PeriodicConvention,
) -> Result<T> {
    check_periods(periods_per_year)?;
    check_rate(annual, "annual rate")?;
    let n = T::from_count(periods_per_year);
    Ok(match convention {
        PeriodicConvention::UsNominalDivide => annual / n,
        PeriodicConvention::UkEffectiveRoot => (annual.ln_1p() / n).exp_m1(),
    })
}

/// Largest `k/1000` (computed in `T`) not above `rate`.
fn floor_to_tenth_percent<T: Scalar>(rate: T) -> T {
    let thousand = T::lit(1000.0);
    let mut k = (rate * thousand).floor();
    // the product can land one step either side of the true quotient
    if k / thousand > rate {
        k -= T::one();
    }
    if (k + T::one()) / thousand <= rate {
        k += T::one();
    }
    k / thousand
}

/// The rate a UK lender may advertise: the percentage truncated to one
/// decimal place (11.995% is advertised as 11.9%).
pub fn advertised_apr<T: Scalar>(exact_annual: T) -> Result<T> {
    if !exact_annual.is_finite() || exact_annual < T::zero() {
        return Err(Error::Domain(format!(
            "advertised rate needs a non-negative rate, got {exact_annual}"
        )));
    }
    Ok(floor_to_tenth_percent(exact_annual))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AprStatus {
    Compliant,
    /// Advertised above what the truncation rule yields.
    Overstated,
    /// Advertised below what the truncation rule allows.
    UnderstatedBeyondRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprVerdict<T> {
    pub status: AprStatus,
    pub expected: T,
    /// `exact − advertised`, in basis points.
    pub gap_bp: T,
}

impl<T> AprVerdict<T> {
    pub fn is_compliant(&self) -> bool {
        self.status == AprStatus::Compliant
    }
}

pub fn verify_advertised<T: Scalar>(exact_annual: T, advertised: T) -> AprVerdict<T> {
    let expected = floor_to_tenth_percent(exact_annual);
    let tolerance = T::lit(RATE_TOLERANCE);
    let status = if (advertised - expected).abs() <= tolerance {
        AprStatus::Compliant
    } else if advertised > expected {
        AprStatus::Overstated
    } else {
        AprStatus::UnderstatedBeyondRule
    };
    AprVerdict {
        status,
        expected,
        gap_bp: (exact_annual - advertised) * T::lit(10_000.0),
    }
}

/// Simple-interest annual rate implied by an investment and its redemption.
/// Over spans other than one year this is not the compound rate.
pub fn intrate<T: Scalar>(
    settlement: Date,
    maturity: Date,
    investment: T,
    redemption: T,
    basis: DayCountBasis,
) -> Result<T> {
    if settlement >= maturity {
        return Err(Error::Ordering {
            start: settlement,
            end: maturity,
        });
    }
    if !investment.is_finite() || investment <= T::zero() {
        return Err(Error::Domain(format!(
            "investment must be positive, got {investment}"
        )));
    }
    let years: T = year_fraction(settlement, maturity, basis)?;
    if years <= T::zero() {
        return Err(Error::Domain(format!(
            "{settlement}..{maturity} has no length under {basis:?}"
        )));
    }
    Ok((redemption - investment) / investment / years)
}

/// Accrued interest over a single accrual period: `par · rate · yearfrac`.
pub fn accrint<T: Scalar>(
    issue: Date,
    settlement: Date,
    annual_rate: T,
    par: T,
    basis: DayCountBasis,
) -> Result<T> {
    if !par.is_finite() || par <= T::zero() {
        return Err(Error::Domain(format!("par must be positive, got {par}")));
    }
    if !annual_rate.is_finite() || annual_rate < T::zero() {
        return Err(Error::Domain(format!(
            "rate must be non-negative, got {annual_rate}"
        )));
    }
    let years: T = year_fraction(issue, settlement, basis)?;
    Ok(par * annual_rate * years)
}

/// Moves the decimal point of a plain decimal literal two places left.
fn shift_percent(body: &str) -> Option<String> {
    let (sign, digits) = match body.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", body.strip_prefix('+').unwrap_or(body)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().chain(frac.bytes()).all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let padded = format!("{int:0>2}");
    let (head, tail) = padded.split_at(padded.len() - 2);
    Some(format!("{sign}{}.{tail}{frac}", if head.is_empty() { "0" } else { head }))
}

/// Parses `"0.119"` or `"11.9%"`; the percent form is scaled by 1/100 once.
pub fn parse_rate<T: Scalar>(text: &str) -> Result<T> {
    let bad = || Error::InvalidRate(text.to_string());
    let trimmed = text.trim();
    let value: f64 = match trimmed.strip_suffix('%') {
        Some(body) => match shift_percent(body.trim()) {
            Some(shifted) => shifted.parse().map_err(|_| bad())?,
            None => body.trim().parse::<f64>().map_err(|_| bad())? / 100.0,
        },
        None => trimmed.parse().map_err(|_| bad())?,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    T::from_f64(value).ok_or_else(bad)
}
