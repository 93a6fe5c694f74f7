//! Spreadsheet-compatible financial functions, each with a *compat* mode that
//! reproduces spreadsheet behaviour and an *exact* full-precision mode, plus a
//! formula engine and an auditor for common financial-function mistakes.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, the spreadsheet's own precision.

pub mod audit;
pub mod cashflow;
pub mod daycount;
pub mod depreciation;
pub mod error;
pub mod formula;
pub mod loan;
pub mod rates;
pub mod scalar;

pub use daycount::{Date, DayCountBasis};
pub use depreciation::PrecisionMode;
pub use error::{Error, Result};
pub use rates::PeriodicConvention;
pub use scalar::Scalar;

/// Money and rates, at spreadsheet precision.
pub type Money = f64;

pub type DepreciationSpec = depreciation::DepreciationSpec<Money>;
pub type DepreciationSchedule = depreciation::DepreciationSchedule<Money>;
pub type Reconciliation = depreciation::Reconciliation<Money>;
pub type CashFlowSeries = cashflow::CashFlowSeries<Money>;
pub type LoanSpec = loan::LoanSpec<Money>;
pub type AmortizationSchedule = loan::AmortizationSchedule<Money>;
pub type PublishedTable = loan::PublishedTable<Money>;
pub type Discrepancy = loan::Discrepancy<Money>;
pub type AprVerdict = rates::AprVerdict<Money>;
