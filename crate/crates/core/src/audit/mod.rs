//! Lint rules for financial-function misuse in a workbook.

mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::formula::{CellAddr, CellValue, Sheet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        Self::R1,
        Self::R2,
        Self::R3,
        Self::R4,
        Self::R5,
        Self::R6,
        Self::R7,
        Self::R8,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Self::R1 => "R1",
            Self::R2 => "R2",
            Self::R3 => "R3",
            Self::R4 => "R4",
            Self::R5 => "R5",
            Self::R6 => "R6",
            Self::R7 => "R7",
            Self::R8 => "R8",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::R1 => "NPV-PERIOD0",
            Self::R2 => "RATE-DIV-12",
            Self::R3 => "INTRATE-COMPOUND",
            Self::R4 => "DB-MONTH",
            Self::R5 => "RATE-MAGNITUDE",
            Self::R6 => "DATE-AS-ARITHMETIC",
            Self::R7 => "BASIS-DEFAULT",
            Self::R8 => "DIVISOR-360",
        }
    }

    pub fn default_severity(self) -> Severity {
        match self {
            Self::R1 | Self::R3 | Self::R4 => Severity::Warning,
            Self::R5 | Self::R6 => Severity::Error,
            Self::R2 | Self::R7 | Self::R8 => Severity::Info,
        }
    }

    pub fn explanation(self) -> &'static str {
        match self {
            Self::R1 => {
                "NPV discounts every value it is given, starting one full period out, so an initial \
                 investment placed in the value list is discounted as if it happened at the end of \
                 period 1. Keep the period-0 flow outside the call: =A1+NPV(rate, A2:A10). XNPV \
                 leaves its first value undiscounted and needs a date for every value; its \
                 documentation calls the first payment \"optional\", which is ambiguous, so always \
                 supply the period-0 flow explicitly (0 if there is none). This is a heuristic: a \
                 series whose first period-1 flow is genuinely negative is flagged too."
            }
            Self::R2 => {
                "Dividing an annual rate by 12 is only right when the annual rate is a nominal rate \
                 compounded monthly. An effective annual rate (such as a UK APR) must be converted \
                 with (1+r)^(1/12)-1 instead. Use EFFECT(nominal, 12) to go from a nominal to an \
                 effective rate and NOMINAL(effective, 12) to go back, then divide the nominal rate \
                 by 12."
            }
            Self::R3 => {
                "INTRATE computes a simple-interest rate: (redemption - investment) / investment \
                 divided by the year fraction. Over terms longer than a year interest compounds, so \
                 the simple rate overstates the true annual yield. Use ((redemption/investment)^(1/t))-1 \
                 for a compound rate over t years."
            }
            Self::R4 => {
                "DB with a month argument below 12 depreciates only part of the first year, so the \
                 schedule needs an extra final period (life + 1) for the remaining months. Without \
                 it the depreciation total will not reconcile to cost minus salvage; even with it, \
                 DB's three-decimal rate leaves a residual gap."
            }
            Self::R5 => {
                "A rate argument of 1 or more means 100% or more per period, which almost always \
                 indicates a percentage typed as a whole number (12 instead of 12% or 0.12). The \
                 result is off by a factor of a hundred. Enter 12% or 0.12."
            }
            Self::R6 => {
                "A chain like 01/01/80 inside a formula is arithmetic, not a date: it computes \
                 (1/1)/80 = 0.0125. Put the date in its own cell in ISO form (1980-01-01) and \
                 reference that cell."
            }
            Self::R7 => {
                "The basis argument was omitted, so the function silently uses the US (NASD) 30/360 \
                 default. The European 30/360 method differs when a date falls on the 31st, and the \
                 actual-day bases differ whenever months are not 30 days long. State the basis \
                 explicitly (0 = US 30/360, 1 = actual/actual, 2 = actual/360, 3 = actual/365, \
                 4 = European 30/360; DAYS360 takes a non-zero third argument for the European method)."
            }
            Self::R8 => {
                "Dividing an actual day count (a difference of two dates) by 360 mixes bases: an \
                 actual/360 year fraction exceeds the actual/365 one by about 1.4%, which inflates \
                 interest in the lender's favour. Divide by 365 (or use an actual/actual year fraction) \
                 unless the contract really specifies actual/360, and disclose it."
            }
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    /// Accepts the code (`R1`) or the name (`NPV-PERIOD0`), in any case.
    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim();
        Self::ALL
            .into_iter()
            .find(|r| r.code().eq_ignore_ascii_case(wanted) || r.name().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| Error::UnknownRule(s.to_string()))
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Info => "info",
            Self::Warning => "warning",
            Self::Error => "error",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub cell: CellAddr,
    pub value: CellValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub rule_id: RuleId,
    pub rule_name: &'static str,
    pub severity: Severity,
    pub cell: CellAddr,
    pub message: String,
    pub evidence: Vec<Evidence>,
}

impl fmt::Display for Finding {
    /// `CELL RULE severity NAME: message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}: {}",
            self.cell, self.rule_id, self.severity, self.rule_name, self.message
        )
    }
}

/// Which rules run, their thresholds and severities.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleConfig {
    pub enabled: BTreeSet<RuleId>,
    /// R5 fires when a rate argument is at least this.
    pub rate_magnitude: f64,
    /// R3 fires when INTRATE's term in years exceeds this.
    pub intrate_year_fraction: f64,
    pub severity: BTreeMap<RuleId, Severity>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            enabled: RuleId::ALL.into_iter().collect(),
            rate_magnitude: 1.0,
            intrate_year_fraction: 1.0,
            severity: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    enabled: Option<Vec<RuleId>>,
    #[serde(default)]
    disabled: Vec<RuleId>,
    #[serde(default)]
    thresholds: RawThresholds,
    #[serde(default)]
    severity: BTreeMap<RuleId, Severity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    rate_magnitude: Option<f64>,
    intrate_year_fraction: Option<f64>,
}

impl RuleConfig {
    /// Only the given rules, default thresholds.
    pub fn only(rules: impl IntoIterator<Item = RuleId>) -> Self {
        Self {
            enabled: rules.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn without(mut self, rule: RuleId) -> Self {
        self.enabled.remove(&rule);
        self
    }

    pub fn is_enabled(&self, rule: RuleId) -> bool {
        self.enabled.contains(&rule)
    }

    pub fn severity_of(&self, rule: RuleId) -> Severity {
        self.severity
            .get(&rule)
            .copied()
            .unwrap_or_else(|| rule.default_severity())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rate_magnitude", self.rate_magnitude),
            ("intrate_year_fraction", self.intrate_year_fraction),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("threshold {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Reads a TOML rule file:
    ///
    /// ```toml
    /// disabled = ["R8"]            # or: enabled = ["R1", "R5"]
    /// [thresholds]
    /// rate_magnitude = 1.0
    /// intrate_year_fraction = 1.0
    /// [severity]
    /// R7 = "warning"
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut config = Self::default();
        if let Some(enabled) = raw.enabled {
            config.enabled = enabled.into_iter().collect();
        }
        for rule in raw.disabled {
            config.enabled.remove(&rule);
        }
        if let Some(v) = raw.thresholds.rate_magnitude {
            config.rate_magnitude = v;
        }
        if let Some(v) = raw.thresholds.intrate_year_fraction {
            config.intrate_year_fraction = v;
        }
        config.severity = raw.severity;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }
}

/// Runs every enabled rule over the sheet's formulas. Findings are ordered
/// by cell, then rule.
pub fn run_rules(sheet: &Sheet, config: &RuleConfig) -> Vec<Finding> {
    let mut findings = Vec::new();
    for (cell, _, node) in sheet.formulas() {
        let Some(node) = node else { continue };
        for rule in &config.enabled {
            for hit in rules::check(*rule, sheet, config, node) {
                findings.push(Finding {
                    rule_id: *rule,
                    rule_name: rule.name(),
                    severity: config.severity_of(*rule),
                    cell,
                    message: hit.message,
                    evidence: hit.evidence,
                });
            }
        }
    }
    findings.sort_by_key(|f| (f.cell, f.rule_id));
    findings
}

pub fn explain_rule(rule_id: &str) -> Result<&'static str> {
    Ok(rule_id.parse::<RuleId>()?.explanation())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for rule in RuleId::ALL {
            assert_eq!(rule.code().parse::<RuleId>().unwrap(), rule);
            assert_eq!(rule.name().to_lowercase().parse::<RuleId>().unwrap(), rule);
            assert!(!rule.explanation().is_empty());
        }
        assert!(matches!(explain_rule("R99"), Err(Error::UnknownRule(_))));
    }

    #[test]
    fn config_from_toml() {
        let c = RuleConfig::from_toml_str(
            "disabled = [\"R8\", \"rate-div-12\"]\n[thresholds]\nrate_magnitude = 0.5\n[severity]\nR7 = \"warning\"\n",
        )
        .unwrap();
        assert!(!c.is_enabled(RuleId::R8));
        assert!(!c.is_enabled(RuleId::R2));
        assert!(c.is_enabled(RuleId::R1));
        assert_eq!(c.rate_magnitude, 0.5);
        assert_eq!(c.severity_of(RuleId::R7), Severity::Warning);
        assert_eq!(c.severity_of(RuleId::R6), Severity::Error);

        let only = RuleConfig::from_toml_str("enabled = [\"R1\"]").unwrap();
        assert_eq!(only.enabled, BTreeSet::from([RuleId::R1]));

        assert!(RuleConfig::from_toml_str("[thresholds]\nrate_magnitude = 0").is_err());
        assert!(RuleConfig::from_toml_str("disabled = [\"R42\"]").is_err());
        assert!(RuleConfig::from_toml_str("bogus = 1").is_err());
    }
}
