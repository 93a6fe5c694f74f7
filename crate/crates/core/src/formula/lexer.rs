use super::address::CellAddr;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(f64),
    /// Postfix `%`.
    Percent,
    Text(String),
    Ref(CellAddr),
    /// Function or other bare name, upper-cased.
    Ident(String),
    Colon,
    Comma,
    LParen,
    RParen,
    /// An omitted argument between `(`/`,` and `,`/`)` of a call.
    EmptyArg,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Amp,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Character offset into the formula text.
    pub pos: usize,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    tokens: Vec<Token>,
    /// One entry per open paren: whether it opened a call.
    parens: Vec<bool>,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn next_significant(&self) -> Option<char> {
        self.chars[self.pos..]
            .iter()
            .copied()
            .find(|c| !c.is_whitespace())
    }

    fn push(&mut self, kind: TokenKind, pos: usize) {
        self.tokens.push(Token { kind, pos });
    }

    fn in_call(&self) -> bool {
        self.parens.last().copied().unwrap_or(false)
    }

    fn number(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = usize::from(matches!(self.peek_at(1), Some('+' | '-')));
            if matches!(self.peek_at(1 + sign), Some(c) if c.is_ascii_digit()) {
                self.pos += 1 + sign;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::new(format!("malformed number `{text}`"), start))?;
        if !value.is_finite() {
            return Err(ParseError::new(format!("number `{text}` is out of range"), start));
        }
        self.push(TokenKind::Number(value), start);
        Ok(())
    }

    fn text(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(ParseError::new("unterminated string", start)),
                Some('"') if self.peek_at(1) == Some('"') => {
                    out.push('"');
                    self.pos += 2;
                }
                Some('"') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        self.push(TokenKind::Text(out), start);
        Ok(())
    }

    fn word(&mut self) {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        if self.next_significant() != Some('(') {
            if let Some(addr) = CellAddr::parse(&word) {
                self.push(TokenKind::Ref(addr), start);
                return;
            }
        }
        self.push(TokenKind::Ident(word.to_ascii_uppercase()), start);
    }

    fn empty_arg_follows(&mut self) {
        if self.in_call() && matches!(self.next_significant(), Some(',' | ')')) {
            let at = self.pos;
            self.push(TokenKind::EmptyArg, at);
        }
    }

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.pos += 1;
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && matches!(self.peek_at(1), Some(d) if d.is_ascii_digit()))
            {
                self.number()?;
                continue;
            }
            if c == '"' {
                self.text()?;
                continue;
            }
            if c.is_ascii_alphabetic() {
                self.word();
                continue;
            }
            let two = |s: &Self, next: char| s.peek_at(1) == Some(next);
            let (kind, width) = match c {
                '%' => (TokenKind::Percent, 1),
                ':' => (TokenKind::Colon, 1),
                ',' => (TokenKind::Comma, 1),
                '(' => (TokenKind::LParen, 1),
                ')' => (TokenKind::RParen, 1),
                '+' => (TokenKind::Plus, 1),
                '-' => (TokenKind::Minus, 1),
                '*' => (TokenKind::Star, 1),
                '/' => (TokenKind::Slash, 1),
                '^' => (TokenKind::Caret, 1),
                '&' => (TokenKind::Amp, 1),
                '=' => (TokenKind::Eq, 1),
                '<' if two(&self, '=') => (TokenKind::Le, 2),
                '<' if two(&self, '>') => (TokenKind::Ne, 2),
                '<' => (TokenKind::Lt, 1),
                '>' if two(&self, '=') => (TokenKind::Ge, 2),
                '>' => (TokenKind::Gt, 1),
                other => {
                    return Err(ParseError::new(
                        format!("illegal character `{other}`"),
                        start,
                    ))
                }
            };
            self.pos += width;
            match kind {
                TokenKind::LParen => {
                    let call = matches!(
                        self.tokens.last(),
                        Some(Token {
                            kind: TokenKind::Ident(_),
                            ..
                        })
                    );
                    self.parens.push(call);
                    self.push(kind, start);
                    if call && self.next_significant() == Some(',') {
                        let at = self.pos;
                        self.push(TokenKind::EmptyArg, at);
                    }
                }
                TokenKind::RParen => {
                    self.parens.pop();
                    self.push(kind, start);
                }
                TokenKind::Comma => {
                    self.push(kind, start);
                    self.empty_arg_follows();
                }
                _ => self.push(kind, start),
            }
        }
        Ok(self.tokens)
    }
}

/// Splits formula text (which must start with `=`) into tokens.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.first() != Some(&'=') {
        return Err(ParseError::new("formula must begin with `=`", 0));
    }
    Lexer {
        chars,
        pos: 1,
        tokens: Vec::new(),
        parens: Vec::new(),
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn r(s: &str) -> TokenKind {
        Ref(CellAddr::parse(s).unwrap())
    }

    #[test]
    fn npv_call_with_range() {
        assert_eq!(
            kinds("=NPV(B1,A2:A10)+A1"),
            vec![
                Ident("NPV".into()),
                LParen,
                r("B1"),
                Comma,
                r("A2"),
                Colon,
                r("A10"),
                RParen,
                Plus,
                r("A1"),
            ]
        );
    }

    #[test]
    fn percent_is_postfix() {
        assert_eq!(kinds("=12%"), vec![Number(12.0), Percent]);
    }

    #[test]
    fn empty_slots_are_explicit() {
        let k = kinds("=DB(C1,C2,C3,1,)");
        assert_eq!(&k[k.len() - 3..], &[Comma, EmptyArg, RParen]);
        assert_eq!(
            kinds("=F(,)"),
            vec![Ident("F".into()), LParen, EmptyArg, Comma, EmptyArg, RParen]
        );
        assert_eq!(kinds("=F()"), vec![Ident("F".into()), LParen, RParen]);
        // grouping parens never get empty slots
        assert_eq!(kinds("=(1,)"), vec![LParen, Number(1.0), Comma, RParen]);
    }

    #[test]
    fn names_with_digits_are_functions_before_a_paren() {
        assert_eq!(kinds("=days360(A1)")[0], Ident("DAYS360".into()));
        assert_eq!(kinds("=AB12")[0], r("AB12"));
        assert_eq!(kinds("=TRUE")[0], Ident("TRUE".into()));
    }

    #[test]
    fn operators_and_literals() {
        assert_eq!(
            kinds("=1.5e3<=\"a\"\"b\"<>.5"),
            vec![Number(1500.0), Le, Text("a\"b".into()), Ne, Number(0.5)]
        );
        assert_eq!(kinds("=01/01/80"), vec![Number(1.0), Slash, Number(1.0), Slash, Number(80.0)]);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(tokenize("=1+$A$1").unwrap_err().position, 3);
        assert_eq!(tokenize("1+1").unwrap_err().position, 0);
        assert_eq!(tokenize("=\"abc").unwrap_err().position, 1);
        assert!(tokenize("=1e999").is_err());
    }
}
