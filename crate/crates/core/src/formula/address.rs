use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::Error;

pub const MAX_COLUMNS: u32 = 16_384;
pub const MAX_ROWS: u32 = 1_048_576;

/// A cell position; both indices are zero based. Orders row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellAddr {
    pub row: u32,
    pub col: u32,
}

impl CellAddr {
    pub fn new(col: u32, row: u32) -> Self {
        Self { row, col }
    }

    /// Parses `A1`-style text: one to three letters then a row number.
    pub fn parse(text: &str) -> Option<Self> {
        let letters = text.bytes().take_while(u8::is_ascii_alphabetic).count();
        if !(1..=3).contains(&letters) {
            return None;
        }
        let (col_text, row_text) = text.split_at(letters);
        if row_text.is_empty() || !row_text.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let col = col_text
            .bytes()
            .fold(0u32, |acc, b| acc * 26 + u32::from(b.to_ascii_uppercase() - b'A' + 1));
        let row: u32 = row_text.parse().ok()?;
        if row == 0 || row > MAX_ROWS || col > MAX_COLUMNS {
            return None;
        }
        Some(Self::new(col - 1, row - 1))
    }

    pub fn column_name(&self) -> String {
        let mut n = self.col + 1;
        let mut name = Vec::new();
        while n > 0 {
            let rem = (n - 1) % 26;
            name.push(b'A' + rem as u8);
            n = (n - 1) / 26;
        }
        name.reverse();
        String::from_utf8(name).expect("ascii")
    }
}

impl fmt::Display for CellAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.column_name(), self.row + 1)
    }
}

impl FromStr for CellAddr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::parse(s).ok_or_else(|| Error::Validation(format!("bad cell address `{s}`")))
    }
}

impl Serialize for CellAddr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A rectangular range, normalized so `start` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellRange {
    pub start: CellAddr,
    pub end: CellAddr,
}

impl CellRange {
    pub fn new(a: CellAddr, b: CellAddr) -> Self {
        Self {
            start: CellAddr::new(a.col.min(b.col), a.row.min(b.row)),
            end: CellAddr::new(a.col.max(b.col), a.row.max(b.row)),
        }
    }

    pub fn contains(&self, addr: CellAddr) -> bool {
        (self.start.row..=self.end.row).contains(&addr.row)
            && (self.start.col..=self.end.col).contains(&addr.col)
    }
}

impl fmt::Display for CellRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_notation() {
        let cases = [("A1", 0, 0), ("Z9", 25, 8), ("AA10", 26, 9), ("xfd3", 16_383, 2)];
        for (text, col, row) in cases {
            let addr = CellAddr::parse(text).unwrap();
            assert_eq!((addr.col, addr.row), (col, row));
            assert_eq!(addr.to_string(), text.to_ascii_uppercase());
        }
        for bad in ["A0", "1A", "ABCD1", "A", "", "A1B", "XFE1", "A1048577"] {
            assert!(CellAddr::parse(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn ranges_normalize() {
        let r = CellRange::new(CellAddr::parse("C5").unwrap(), CellAddr::parse("A2").unwrap());
        assert_eq!(r.to_string(), "A2:C5");
        assert!(r.contains(CellAddr::parse("B3").unwrap()));
        assert!(!r.contains(CellAddr::parse("D3").unwrap()));
    }

    #[test]
    fn row_major_order() {
        let a2 = CellAddr::parse("A2").unwrap();
        let b1 = CellAddr::parse("B1").unwrap();
        assert!(b1 < a2);
    }
}
