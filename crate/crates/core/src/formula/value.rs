use std::fmt;

use serde::Serialize;

use crate::daycount::Date;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Parse,
    Div0,
    Value,
    Num,
    Argument,
    UnknownFunction,
    Cycle,
    /// Depends on a cell that sits on a circular reference.
    Propagated,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            Self::Parse => "#PARSE!",
            Self::Div0 => "#DIV/0!",
            Self::Value => "#VALUE!",
            Self::Num => "#NUM!",
            Self::Argument => "#ARG!",
            Self::UnknownFunction => "#NAME?",
            Self::Cycle => "#CYCLE!",
            Self::Propagated => "#PROPAGATED!",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CellError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for CellError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.code(), self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum CellValue {
    Number(f64),
    Date(Date),
    Text(String),
    Error(CellError),
}

impl CellValue {
    pub fn error(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self::Error(CellError::new(kind, message))
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Self::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_error(&self) -> Option<&CellError> {
        match self {
            Self::Error(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Self::Error(_))
    }

    /// Reads literal (non-formula) cell text: a number, `12%`, an ISO date,
    /// or else text. Slash-form dates stay text.
    pub fn from_literal(text: &str) -> Self {
        let trimmed = text.trim();
        if let Some(n) = parse_number(trimmed) {
            return Self::Number(n);
        }
        if let Some(n) = trimmed.strip_suffix('%').and_then(|b| parse_number(b.trim_end())) {
            return Self::Number(n / 100.0);
        }
        if let Ok(date) = trimmed.parse::<Date>() {
            return Self::Date(date);
        }
        Self::Text(text.to_string())
    }
}

fn parse_number(text: &str) -> Option<f64> {
    let looks_numeric = text
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    if text.is_empty() || !looks_numeric {
        return None;
    }
    text.parse::<f64>().ok().filter(|n| n.is_finite())
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Number(n) => write!(f, "{n}"),
            Self::Date(d) => write!(f, "{d}"),
            Self::Text(s) => f.write_str(s),
            Self::Error(e) => write!(f, "{e}"),
        }
    }
}
