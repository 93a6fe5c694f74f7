use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::Read;
use std::path::Path;

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use super::address::{CellAddr, CellRange, MAX_COLUMNS, MAX_ROWS};
use super::ast::FormulaNode;
use super::eval::{evaluate_in, Values};
use super::parser::parse;
use super::value::{CellError, CellValue, ErrorKind};
use super::ParseError;
use crate::error::{Error, Result};

/// Largest number of non-empty cells a workbook may hold.
pub const MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum CellContent {
    Literal(CellValue),
    Formula {
        source: String,
        parsed: std::result::Result<FormulaNode, ParseError>,
    },
}

impl CellContent {
    pub fn from_input(text: &str) -> Self {
        if text.starts_with('=') {
            Self::Formula {
                source: text.to_string(),
                parsed: parse(text),
            }
        } else {
            Self::Literal(CellValue::from_literal(text))
        }
    }

    pub fn formula(&self) -> Option<&FormulaNode> {
        match self {
            Self::Formula { parsed: Ok(node), .. } => Some(node),
            _ => None,
        }
    }
}

/// A single sheet of cells with cached computed values.
#[derive(Debug, Clone, Default)]
pub struct Sheet {
    cells: BTreeMap<CellAddr, CellContent>,
    values: Values,
}

impl Sheet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sheet from rows of cell text; row 0 column 0 is `A1`. Empty
    /// strings are empty cells.
    pub fn from_grid<R, C>(rows: R) -> Result<Self>
    where
        R: IntoIterator<Item = C>,
        C: IntoIterator,
        C::Item: AsRef<str>,
    {
        let mut sheet = Self::new();
        for (r, row) in rows.into_iter().enumerate() {
            for (c, text) in row.into_iter().enumerate() {
                let text = text.as_ref();
                if text.is_empty() {
                    continue;
                }
                let addr = checked_addr(c, r)?;
                if sheet.cells.len() >= MAX_CELLS {
                    return Err(Error::Validation(format!(
                        "workbook has more than {MAX_CELLS} cells"
                    )));
                }
                sheet.cells.insert(addr, CellContent::from_input(text));
            }
        }
        sheet.recalculate();
        Ok(sheet)
    }

    pub fn read_csv<Rd: Read>(reader: Rd) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut rows = Vec::new();
        let mut count = 0usize;
        for record in csv.records() {
            let record = record?;
            count += record.iter().filter(|f| !f.is_empty()).count();
            if count > MAX_CELLS {
                return Err(Error::Validation(format!(
                    "workbook has more than {MAX_CELLS} cells"
                )));
            }
            rows.push(record.iter().map(str::to_string).collect::<Vec<_>>());
        }
        Self::from_grid(rows)
    }

    /// Sets one cell from input text (a formula if it starts with `=`) and
    /// recalculates. Empty text clears the cell.
    pub fn set(&mut self, addr: CellAddr, text: &str) {
        if text.is_empty() {
            self.cells.remove(&addr);
        } else {
            self.cells.insert(addr, CellContent::from_input(text));
        }
        self.recalculate();
    }

    pub fn content(&self, addr: CellAddr) -> Option<&CellContent> {
        self.cells.get(&addr)
    }

    /// Computed value; `None` for an empty cell.
    pub fn value(&self, addr: CellAddr) -> Option<&CellValue> {
        self.values.get(&addr)
    }

    pub(crate) fn values(&self) -> &Values {
        &self.values
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellAddr, &CellContent)> {
        self.cells.iter().map(|(a, c)| (*a, c))
    }

    /// Formula cells in row-major order with their source text and, when it
    /// parsed, their tree.
    pub fn formulas(&self) -> impl Iterator<Item = (CellAddr, &str, Option<&FormulaNode>)> {
        self.cells.iter().filter_map(|(addr, content)| match content {
            CellContent::Formula { source, parsed } => {
                Some((*addr, source.as_str(), parsed.as_ref().ok()))
            }
            CellContent::Literal(_) => None,
        })
    }

    /// `(columns, rows)` spanned by non-empty cells.
    pub fn dimensions(&self) -> (u32, u32) {
        self.cells.keys().fold((0, 0), |(c, r), addr| {
            (c.max(addr.col + 1), r.max(addr.row + 1))
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn is_formula(&self, addr: &CellAddr) -> bool {
        matches!(self.cells.get(addr), Some(CellContent::Formula { parsed: Ok(_), .. }))
    }

    fn dependencies(&self, node: &FormulaNode) -> BTreeSet<CellAddr> {
        let mut deps = BTreeSet::new();
        node.walk(&mut |n| match n {
            FormulaNode::Ref(addr) if self.is_formula(addr) => {
                deps.insert(*addr);
            }
            FormulaNode::Range(range) => deps.extend(self.formulas_in(*range)),
            _ => {}
        });
        deps
    }

    fn formulas_in(&self, range: CellRange) -> impl Iterator<Item = CellAddr> + '_ {
        self.cells
            .range(range.start..=range.end)
            .filter(move |(addr, _)| range.contains(**addr) && self.is_formula(addr))
            .map(|(addr, _)| *addr)
    }

    /// Recomputes every cell: literals, then formulas in dependency order.
    /// Cells on a circular reference become `Cycle` errors; cells that only
    /// depend on one become `Propagated`.
    pub fn recalculate(&mut self) {
        self.values.clear();
        let mut graph = DiGraphMap::<CellAddr, ()>::new();
        for (addr, content) in &self.cells {
            match content {
                CellContent::Literal(v) => {
                    self.values.insert(*addr, v.clone());
                }
                CellContent::Formula { parsed: Err(e), .. } => {
                    self.values
                        .insert(*addr, CellValue::error(ErrorKind::Parse, e.to_string()));
                }
                CellContent::Formula { parsed: Ok(node), .. } => {
                    graph.add_node(*addr);
                    for dep in self.dependencies(node) {
                        graph.add_edge(*addr, dep, ());
                    }
                }
            }
        }

        // dependencies come out before their dependents
        for component in tarjan_scc(&graph) {
            let cyclic = component.len() > 1 || graph.contains_edge(component[0], component[0]);
            if cyclic {
                let members: BTreeSet<CellAddr> = component.iter().copied().collect();
                for addr in &component {
                    let path = cycle_path(&graph, &members, *addr);
                    self.values.insert(
                        *addr,
                        CellValue::Error(CellError::new(
                            ErrorKind::Cycle,
                            format!("circular reference: {path}"),
                        )),
                    );
                }
                continue;
            }
            let addr = component[0];
            if let Some(node) = self.cells.get(&addr).and_then(CellContent::formula) {
                let value = evaluate_in(node, &self.values);
                self.values.insert(addr, value);
            }
        }
    }
}

/// Shortest path `addr -> ... -> addr` inside one strongly connected component.
fn cycle_path(
    graph: &DiGraphMap<CellAddr, ()>,
    members: &BTreeSet<CellAddr>,
    addr: CellAddr,
) -> String {
    let mut parent: HashMap<CellAddr, CellAddr> = HashMap::new();
    let mut queue = VecDeque::from([addr]);
    let mut closing = None;
    'search: while let Some(at) = queue.pop_front() {
        for next in graph.neighbors(at) {
            if !members.contains(&next) {
                continue;
            }
            if next == addr {
                closing = Some(at);
                break 'search;
            }
            if let Entry::Vacant(slot) = parent.entry(next) {
                slot.insert(at);
                queue.push_back(next);
            }
        }
    }
    let mut path = vec![addr];
    let mut at = closing.unwrap_or(addr);
    while at != addr {
        path.push(at);
        at = parent[&at];
    }
    path.push(addr);
    let last = path.len() - 1;
    path[1..last].reverse();
    path.iter()
        .map(CellAddr::to_string)
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn checked_addr(col: usize, row: usize) -> Result<CellAddr> {
    if col >= MAX_COLUMNS as usize || row >= MAX_ROWS as usize {
        return Err(Error::Validation(format!(
            "cell at row {} column {} is outside the sheet",
            row + 1,
            col + 1
        )));
    }
    Ok(CellAddr::new(col as u32, row as u32))
}

/// Loads a CSV grid. Formula parse failures become per-cell errors.
pub fn load_workbook(path: impl AsRef<Path>) -> Result<Sheet> {
    let path = path.as_ref();
    let load_error = |reason: String| Error::Load {
        path: path.to_path_buf(),
        reason,
    };
    let file = std::fs::File::open(path).map_err(|e| load_error(e.to_string()))?;
    Sheet::read_csv(std::io::BufReader::new(file)).map_err(|e| load_error(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> CellAddr {
        s.parse().unwrap()
    }

    fn grid(rows: &[&[&str]]) -> Sheet {
        Sheet::from_grid(rows.iter().map(|r| r.iter().copied())).unwrap()
    }

    fn kind(sheet: &Sheet, addr: &str) -> Option<ErrorKind> {
        sheet.value(a(addr)).and_then(|v| v.as_error()).map(|e| e.kind)
    }

    #[test]
    fn literals_and_formulas() {
        let s = grid(&[&["=1+1", "2024-01-31", "hello", "=A1*B3"], &["", "", "", ""], &["", "4"]]);
        assert_eq!(s.value(a("A1")), Some(&CellValue::Number(2.0)));
        assert_eq!(
            s.value(a("B1")),
            Some(&CellValue::Date("2024-01-31".parse().unwrap()))
        );
        assert_eq!(s.value(a("C1")), Some(&CellValue::Text("hello".into())));
        assert_eq!(s.value(a("D1")), Some(&CellValue::Number(8.0)));
        assert_eq!(s.value(a("A2")), None);
        assert_eq!(s.dimensions(), (4, 3));
    }

    #[test]
    fn forward_references_resolve() {
        let s = grid(&[&["=B1+1", "=C1*2", "=5"]]);
        assert_eq!(s.value(a("A1")), Some(&CellValue::Number(11.0)));
    }

    #[test]
    fn mutual_references_are_cycles() {
        let s = grid(&[&["=B1", "=A1", "=A1+1", "=7"]]);
        assert_eq!(kind(&s, "A1"), Some(ErrorKind::Cycle));
        assert_eq!(kind(&s, "B1"), Some(ErrorKind::Cycle));
        assert_eq!(kind(&s, "C1"), Some(ErrorKind::Propagated));
        assert_eq!(s.value(a("D1")), Some(&CellValue::Number(7.0)));
        let msg = &s.value(a("A1")).unwrap().as_error().unwrap().message;
        assert_eq!(msg, "circular reference: A1 -> B1 -> A1");
    }

    #[test]
    fn self_reference_and_range_cycles() {
        let s = grid(&[&["=A1+1"], &["=SUM(A3:A4)"], &["=A2"], &["=SUM(A3)"]]);
        assert_eq!(kind(&s, "A1"), Some(ErrorKind::Cycle));
        assert_eq!(
            s.value(a("A1")).unwrap().as_error().unwrap().message,
            "circular reference: A1 -> A1"
        );
        assert_eq!(kind(&s, "A2"), Some(ErrorKind::Cycle));
        assert_eq!(kind(&s, "A3"), Some(ErrorKind::Cycle));
        assert_eq!(kind(&s, "A4"), Some(ErrorKind::Cycle));
    }

    #[test]
    fn parse_failures_are_per_cell() {
        let s = grid(&[&["=1+", "=A1", "=(1"]]);
        assert_eq!(kind(&s, "A1"), Some(ErrorKind::Parse));
        assert_eq!(kind(&s, "B1"), Some(ErrorKind::Parse));
        assert_eq!(kind(&s, "C1"), Some(ErrorKind::Parse));
    }

    #[test]
    fn set_recalculates() {
        let mut s = grid(&[&["1", "=A1*10"]]);
        s.set(a("A1"), "3");
        assert_eq!(s.value(a("B1")), Some(&CellValue::Number(30.0)));
        s.set(a("A1"), "=B1");
        assert_eq!(kind(&s, "B1"), Some(ErrorKind::Cycle));
        s.set(a("A1"), "");
        assert_eq!(s.value(a("B1")), Some(&CellValue::Number(0.0)));
    }

    #[test]
    fn csv_quoting() {
        let s = Sheet::read_csv("\"=SUM(A2,B2)\",x\n1,\"2\"\n".as_bytes()).unwrap();
        assert_eq!(s.value(a("A1")), Some(&CellValue::Number(3.0)));
    }

    #[test]
    fn missing_file_is_a_load_error() {
        assert!(matches!(
            load_workbook("/nonexistent/book.csv"),
            Err(Error::Load { .. })
        ));
    }
}
