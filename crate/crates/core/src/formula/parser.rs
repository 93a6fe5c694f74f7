use super::address::CellRange;
use super::ast::{BinaryOp, FormulaNode, UnaryOp};
use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;

/// Longest accepted formula, in characters.
pub const MAX_FORMULA_LEN: usize = 8192;
/// Deepest accepted expression tree.
pub const MAX_DEPTH: usize = 200;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        token
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(message, self.here()))
    }

    fn descend(&mut self) -> Result<(), ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_DEPTH {
            return self.error("formula is nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<FormulaNode, ParseError> {
        self.comparison()
    }

    fn left_assoc(
        &mut self,
        next: fn(&mut Self) -> Result<FormulaNode, ParseError>,
        op_of: fn(&TokenKind) -> Option<BinaryOp>,
    ) -> Result<FormulaNode, ParseError> {
        let mut left = next(self)?;
        while let Some(op) = self.peek().and_then(op_of) {
            self.bump();
            let right = next(self)?;
            left = FormulaNode::binary(op, left, right);
        }
        Ok(left)
    }

    fn comparison(&mut self) -> Result<FormulaNode, ParseError> {
        self.left_assoc(Self::concat, |k| match k {
            TokenKind::Eq => Some(BinaryOp::Eq),
            TokenKind::Ne => Some(BinaryOp::Ne),
            TokenKind::Lt => Some(BinaryOp::Lt),
            TokenKind::Le => Some(BinaryOp::Le),
            TokenKind::Gt => Some(BinaryOp::Gt),
            TokenKind::Ge => Some(BinaryOp::Ge),
            _ => None,
        })
    }

    fn concat(&mut self) -> Result<FormulaNode, ParseError> {
        self.left_assoc(Self::additive, |k| {
            matches!(k, TokenKind::Amp).then_some(BinaryOp::Concat)
        })
    }

    fn additive(&mut self) -> Result<FormulaNode, ParseError> {
        self.left_assoc(Self::multiplicative, |k| match k {
            TokenKind::Plus => Some(BinaryOp::Add),
            TokenKind::Minus => Some(BinaryOp::Sub),
            _ => None,
        })
    }

    fn multiplicative(&mut self) -> Result<FormulaNode, ParseError> {
        self.left_assoc(Self::unary, |k| match k {
            TokenKind::Star => Some(BinaryOp::Mul),
            TokenKind::Slash => Some(BinaryOp::Div),
            _ => None,
        })
    }

    fn unary(&mut self) -> Result<FormulaNode, ParseError> {
        let op = match self.peek() {
            Some(TokenKind::Minus) => UnaryOp::Neg,
            Some(TokenKind::Plus) => UnaryOp::Plus,
            _ => return self.power(),
        };
        self.bump();
        self.descend()?;
        let child = self.unary()?;
        self.nesting -= 1;
        Ok(FormulaNode::unary(op, child))
    }

    fn power(&mut self) -> Result<FormulaNode, ParseError> {
        let base = self.postfix()?;
        if self.peek() != Some(&TokenKind::Caret) {
            return Ok(base);
        }
        self.bump();
        self.descend()?;
        let exponent = self.unary()?;
        self.nesting -= 1;
        Ok(FormulaNode::binary(BinaryOp::Pow, base, exponent))
    }

    fn postfix(&mut self) -> Result<FormulaNode, ParseError> {
        let mut node = self.primary()?;
        while self.peek() == Some(&TokenKind::Percent) {
            self.bump();
            node = match node {
                FormulaNode::Number(v) => FormulaNode::Percent(v),
                other => FormulaNode::unary(UnaryOp::Percent, other),
            };
        }
        Ok(node)
    }

    fn primary(&mut self) -> Result<FormulaNode, ParseError> {
        let at = self.here();
        let Some(token) = self.bump() else {
            return Err(ParseError::new("unexpected end of formula", at));
        };
        match token.kind {
            TokenKind::Number(v) => Ok(FormulaNode::Number(v)),
            TokenKind::Text(s) => Ok(FormulaNode::Text(s)),
            TokenKind::Ref(start) => {
                if self.peek() != Some(&TokenKind::Colon) {
                    return Ok(FormulaNode::Ref(start));
                }
                self.bump();
                match self.bump().map(|t| t.kind) {
                    Some(TokenKind::Ref(end)) => Ok(FormulaNode::Range(CellRange::new(start, end))),
                    _ => {
                        self.pos -= 1;
                        self.error("malformed range: expected a cell after `:`")
                    }
                }
            }
            TokenKind::Ident(name) => {
                if self.peek() != Some(&TokenKind::LParen) {
                    return Err(ParseError::new(format!("unknown name `{name}`"), at));
                }
                self.bump();
                self.descend()?;
                let args = self.arguments()?;
                self.nesting -= 1;
                Ok(FormulaNode::Call { name, args })
            }
            TokenKind::LParen => {
                self.descend()?;
                let inner = self.expr()?;
                self.nesting -= 1;
                if self.bump().map(|t| t.kind) != Some(TokenKind::RParen) {
                    self.pos -= 1;
                    return self.error("unbalanced parentheses: expected `)`");
                }
                Ok(inner)
            }
            TokenKind::RParen => Err(ParseError::new("unbalanced parentheses: unexpected `)`", at)),
            TokenKind::Colon => Err(ParseError::new("malformed range: unexpected `:`", at)),
            other => Err(ParseError::new(
                format!("expected an operand, found {}", describe(&other)),
                at,
            )),
        }
    }

    /// After the opening paren of a call.
    fn arguments(&mut self) -> Result<Vec<FormulaNode>, ParseError> {
        let mut args = Vec::new();
        if self.peek() == Some(&TokenKind::RParen) {
            self.bump();
            return Ok(args);
        }
        loop {
            if self.peek() == Some(&TokenKind::EmptyArg) {
                self.bump();
                args.push(FormulaNode::EmptyArg);
            } else {
                args.push(self.expr()?);
            }
            match self.bump().map(|t| t.kind) {
                Some(TokenKind::Comma) => continue,
                Some(TokenKind::RParen) => return Ok(args),
                None => {
                    return self.error("unbalanced parentheses: call is not closed");
                }
                Some(other) => {
                    self.pos -= 1;
                    return self.error(format!(
                        "expected `,` or `)` in argument list, found {}",
                        describe(&other)
                    ));
                }
            }
        }
    }
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Number(v) => format!("number {v}"),
        TokenKind::Text(_) => "text".into(),
        TokenKind::Ref(a) => format!("reference {a}"),
        TokenKind::Ident(n) => format!("name {n}"),
        TokenKind::EmptyArg => "empty argument".into(),
        TokenKind::Percent => "`%`".into(),
        TokenKind::Colon => "`:`".into(),
        TokenKind::Comma => "`,`".into(),
        TokenKind::LParen => "`(`".into(),
        TokenKind::RParen => "`)`".into(),
        TokenKind::Plus => "`+`".into(),
        TokenKind::Minus => "`-`".into(),
        TokenKind::Star => "`*`".into(),
        TokenKind::Slash => "`/`".into(),
        TokenKind::Caret => "`^`".into(),
        TokenKind::Amp => "`&`".into(),
        TokenKind::Eq => "`=`".into(),
        TokenKind::Ne => "`<>`".into(),
        TokenKind::Lt => "`<`".into(),
        TokenKind::Le => "`<=`".into(),
        TokenKind::Gt => "`>`".into(),
        TokenKind::Ge => "`>=`".into(),
    }
}

/// Depth of the tree, without recursion.
fn depth(node: &FormulaNode) -> usize {
    let mut deepest = 0;
    let mut stack = vec![(node, 1usize)];
    while let Some((n, d)) = stack.pop() {
        deepest = deepest.max(d);
        match n {
            FormulaNode::Unary(_, c) => stack.push((c, d + 1)),
            FormulaNode::Binary(_, l, r) => {
                stack.push((l, d + 1));
                stack.push((r, d + 1));
            }
            FormulaNode::Call { args, .. } => stack.extend(args.iter().map(|a| (a, d + 1))),
            _ => {}
        }
    }
    deepest
}

/// Parses formula text beginning with `=`.
pub fn parse(text: &str) -> Result<FormulaNode, ParseError> {
    let len = text.chars().count();
    if len > MAX_FORMULA_LEN {
        return Err(ParseError::new(
            format!("formula longer than {MAX_FORMULA_LEN} characters"),
            MAX_FORMULA_LEN,
        ));
    }
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError::new("empty formula", len));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: len,
        nesting: 0,
    };
    let node = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        let token = &parser.tokens[parser.pos];
        let message = match token.kind {
            TokenKind::RParen => "unbalanced parentheses: unexpected `)`".to_string(),
            ref other => format!("unexpected {}", describe(other)),
        };
        return Err(ParseError::new(message, token.pos));
    }
    if depth(&node) > MAX_DEPTH {
        return Err(ParseError::new("formula is nested too deeply", 0));
    }
    Ok(node)
}
