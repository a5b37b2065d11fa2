use super::{ParseDiagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Ident(String),
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Equals,
    Minus,
    Plus,
    Slash,
    Arrow,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("'{s}'"),
            TokenKind::Number(s) => format!("number {s}"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Semi => "';'".into(),
            TokenKind::Equals => "'='".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Arrow => "'->'".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

/// Splits `text` into tokens; `Err` carries the first lexical error. The
/// returned end position is where an "unexpected end of input" diagnostic points.
pub(crate) fn tokenize(text: &str) -> Result<(Vec<Token>, SourceSpan), ParseDiagnostic> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let span = |len: usize| SourceSpan::new(line, column, len);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let single = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ',' => Some(TokenKind::Comma),
            ';' => Some(TokenKind::Semi),
            '=' => Some(TokenKind::Equals),
            '+' => Some(TokenKind::Plus),
            '/' => Some(TokenKind::Slash),
            _ => None,
        };
        if let Some(kind) = single {
            cur.bump();
            tokens.push(Token {
                kind,
                span: span(1),
            });
            continue;
        }
        if c == '-' {
            cur.bump();
            if cur.peek() == Some('>') {
                cur.bump();
                tokens.push(Token {
                    kind: TokenKind::Arrow,
                    span: span(2),
                });
            } else {
                tokens.push(Token {
                    kind: TokenKind::Minus,
                    span: span(1),
                });
            }
            continue;
        }
        if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut len = 1;
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(ParseDiagnostic::error(span(len), "unterminated string"));
                    }
                    Some('"') => {
                        len += 1;
                        break;
                    }
                    Some('\\') => {
                        len += 1;
                        match cur.peek() {
                            Some(e @ ('"' | '\\')) => {
                                cur.bump();
                                value.push(e);
                                len += 1;
                            }
                            next => {
                                let width = if matches!(next, None | Some('\n')) {
                                    1
                                } else {
                                    2
                                };
                                return Err(ParseDiagnostic::error(
                                    SourceSpan::new(line, column + len - 1, width),
                                    "invalid escape in string",
                                ));
                            }
                        }
                    }
                    Some(other) => {
                        value.push(other);
                        len += 1;
                    }
                }
            }
            tokens.push(Token {
                kind: TokenKind::Str(value),
                span: span(len),
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut raw = String::new();
            while let Some(d) = cur.peek() {
                if d.is_ascii_digit() || d == '.' {
                    raw.push(d);
                    cur.bump();
                } else if (d == 'e' || d == 'E') && !raw.is_empty() {
                    raw.push(d);
                    cur.bump();
                    if let Some(s @ ('+' | '-')) = cur.peek() {
                        raw.push(s);
                        cur.bump();
                    }
                } else {
                    break;
                }
            }
            let len = raw.chars().count();
            if raw.parse::<f64>().is_err() {
                return Err(ParseDiagnostic::error(
                    span(len),
                    format!("malformed number '{raw}'"),
                ));
            }
            tokens.push(Token {
                kind: TokenKind::Number(raw),
                span: span(len),
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut raw = String::new();
            while let Some(d) = cur.peek() {
                if d.is_alphanumeric() || d == '_' {
                    raw.push(d);
                    cur.bump();
                } else {
                    break;
                }
            }
            let len = raw.chars().count();
            tokens.push(Token {
                kind: TokenKind::Ident(raw),
                span: span(len),
            });
            continue;
        }
        return Err(ParseDiagnostic::error(
            span(1),
            format!("unexpected character '{}'", c.escape_debug()),
        ));
    }
    Ok((tokens, SourceSpan::new(cur.line, cur.column, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text)
            .unwrap()
            .0
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn rule_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds("(a-, b+) -> R # comment"),
            vec![
                LParen,
                Ident("a".into()),
                Minus,
                Comma,
                Ident("b".into()),
                Plus,
                RParen,
                Arrow,
                Ident("R".into()),
            ]
        );
    }

    #[test]
    fn numbers_and_positions() {
        let (toks, end) = tokenize("ratio 1.5e-3\n  1/sqrt2").unwrap();
        assert_eq!(toks[1].kind, TokenKind::Number("1.5e-3".into()));
        assert_eq!(toks[1].span, SourceSpan::new(1, 7, 6));
        assert_eq!(toks[2].span, SourceSpan::new(2, 3, 1));
        assert_eq!(toks[4].kind, TokenKind::Ident("sqrt2".into()));
        assert_eq!(end, SourceSpan::new(2, 10, 0));
    }

    #[test]
    fn lexical_errors() {
        assert_eq!(
            tokenize("\"abc").unwrap_err().message,
            "unterminated string"
        );
        let e = tokenize("x\n  @").unwrap_err();
        assert_eq!(e.span, SourceSpan::new(2, 3, 1));
        assert!(tokenize("1.2.3").is_err());
    }
}
