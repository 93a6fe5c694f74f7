use std::fmt;

use super::address::{CellAddr, CellRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
    /// Postfix `%` on anything other than a bare number literal.
    Percent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Add => "+",
            Self::Sub => "-",
            Self::Mul => "*",
            Self::Div => "/",
            Self::Pow => "^",
            Self::Concat => "&",
            Self::Eq => "=",
            Self::Ne => "<>",
            Self::Lt => "<",
            Self::Le => "<=",
            Self::Gt => ">",
            Self::Ge => ">=",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            Self::Eq | Self::Ne | Self::Lt | Self::Le | Self::Gt | Self::Ge => 1,
            Self::Concat => 2,
            Self::Add | Self::Sub => 3,
            Self::Mul | Self::Div => 4,
            Self::Pow => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FormulaNode {
    Number(f64),
    /// `12%`, holding 12.
    Percent(f64),
    Text(String),
    Ref(CellAddr),
    Range(CellRange),
    Unary(UnaryOp, Box<FormulaNode>),
    Binary(BinaryOp, Box<FormulaNode>, Box<FormulaNode>),
    /// Canonical upper-case name; omitted arguments are [`FormulaNode::EmptyArg`].
    Call { name: String, args: Vec<FormulaNode> },
    EmptyArg,
}

const PREFIX: u8 = 5;
const POSTFIX: u8 = 7;
const PRIMARY: u8 = 8;

impl FormulaNode {
    pub fn binary(op: BinaryOp, left: FormulaNode, right: FormulaNode) -> Self {
        Self::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn unary(op: UnaryOp, child: FormulaNode) -> Self {
        Self::Unary(op, Box::new(child))
    }

    pub fn call(name: &str, args: Vec<FormulaNode>) -> Self {
        Self::Call {
            name: name.to_ascii_uppercase(),
            args,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Self::Binary(op, ..) => op.precedence(),
            Self::Unary(UnaryOp::Neg | UnaryOp::Plus, _) => PREFIX,
            Self::Unary(UnaryOp::Percent, _) | Self::Percent(_) => POSTFIX,
            _ => PRIMARY,
        }
    }

    /// The argument at `index` unless it is absent or an empty slot.
    pub fn arg(&self, index: usize) -> Option<&FormulaNode> {
        match self {
            Self::Call { args, .. } => args.get(index).filter(|a| **a != Self::EmptyArg),
            _ => None,
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a FormulaNode)) {
        visit(self);
        match self {
            Self::Unary(_, child) => child.walk(visit),
            Self::Binary(_, left, right) => {
                left.walk(visit);
                right.walk(visit);
            }
            Self::Call { args, .. } => args.iter().for_each(|a| a.walk(visit)),
            _ => {}
        }
    }

    /// Canonical source text including the leading `=`.
    pub fn to_formula(&self) -> String {
        format!("={self}")
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let wrap = self.precedence() < min;
        if wrap {
            f.write_str("(")?;
        }
        match self {
            Self::Number(v) => write!(f, "{v}")?,
            Self::Percent(v) => write!(f, "{v}%")?,
            Self::Text(s) => write!(f, "\"{}\"", s.replace('"', "\"\""))?,
            Self::Ref(addr) => write!(f, "{addr}")?,
            Self::Range(range) => write!(f, "{range}")?,
            Self::EmptyArg => {}
            Self::Unary(UnaryOp::Percent, child) => {
                child.write_at(f, POSTFIX)?;
                f.write_str("%")?;
            }
            Self::Unary(op, child) => {
                f.write_str(if *op == UnaryOp::Neg { "-" } else { "+" })?;
                child.write_at(f, PREFIX)?;
            }
            Self::Binary(BinaryOp::Pow, left, right) => {
                left.write_at(f, POSTFIX)?;
                f.write_str("^")?;
                right.write_at(f, PREFIX)?;
            }
            Self::Binary(op, left, right) => {
                let p = op.precedence();
                left.write_at(f, p)?;
                f.write_str(op.symbol())?;
                right.write_at(f, p + 1)?;
            }
            Self::Call { name, args } => {
                write!(f, "{name}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    arg.write_at(f, 0)?;
                }
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Canonical printer: upper-case names, no whitespace, minimal parentheses.
impl fmt::Display for FormulaNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
