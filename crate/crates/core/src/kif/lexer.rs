use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    /// Unescaped contents of a double-quoted literal.
    Str(String),
    /// Any maximal run of non-delimiter characters.
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

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

    fn span_from(&self, line: u32, column: u32, length: u32) -> SourceSpan {
        SourceSpan::new(line, column, length.max(1))
    }
}

/// Split KIF text into parenthesis, string and word tokens. Comments run from
/// `;` to end of line and are dropped.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor::new(text);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        match c {
            ';' => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            '(' | ')' => {
                cur.bump();
                let kind = if c == '(' { TokenKind::LParen } else { TokenKind::RParen };
                tokens.push(Token {
                    kind,
                    span: cur.span_from(line, column, 1),
                });
            }
            '"' => {
                cur.bump();
                let mut value = String::new();
                let mut length = 1u32;
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    length += 1;
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => {
                            let Some(escaped) = cur.bump() else { break };
                            length += 1;
                            value.push(escaped);
                        }
                        _ => value.push(c),
                    }
                }
                if !closed {
                    return Err(ParseError::UnterminatedString(cur.span_from(line, column, 1)));
                }
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    span: cur.span_from(line, column, length),
                });
            }
            c if c.is_whitespace() => {
                cur.bump();
            }
            c if c.is_control() => {
                return Err(ParseError::IllegalCharacter {
                    span: cur.span_from(line, column, 1),
                    ch: c,
                });
            }
            _ => {
                let mut word = String::new();
                while let Some(c) = cur.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    if c.is_control() {
                        return Err(ParseError::IllegalCharacter {
                            span: cur.span_from(cur.line, cur.column, 1),
                            ch: c,
                        });
                    }
                    word.push(c);
                    cur.bump();
                }
                let length = word.chars().count() as u32;
                tokens.push(Token {
                    kind: TokenKind::Word(word),
                    span: cur.span_from(line, column, length),
                });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn subclass_axiom_has_five_tokens() {
        let toks = kinds("(subclass Bakery Business)");
        assert_eq!(
            toks,
            vec![
                TokenKind::LParen,
                TokenKind::Word("subclass".into()),
                TokenKind::Word("Bakery".into()),
                TokenKind::Word("Business".into()),
                TokenKind::RParen,
            ]
        );
    }

    #[test]
    fn empty_and_comment_only() {
        assert!(kinds("").is_empty());
        assert!(kinds("; comment only\n").is_empty());
        assert!(kinds(";no newline").is_empty());
    }

    #[test]
    fn comment_inside_string_is_kept() {
        assert_eq!(kinds("\"a ; b\""), vec![TokenKind::Str("a ; b".into())]);
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let toks = tokenize("(a\n  bc)").unwrap();
        assert_eq!(toks[1].span, SourceSpan::new(1, 2, 1));
        assert_eq!(toks[2].span, SourceSpan::new(2, 3, 2));
        assert_eq!(toks[3].span, SourceSpan::new(2, 5, 1));
    }

    #[test]
    fn unterminated_string() {
        let err = tokenize("(documentation X \"open").unwrap_err();
        assert_eq!(err, ParseError::UnterminatedString(SourceSpan::new(1, 18, 1)));
    }

    #[test]
    fn control_character_rejected() {
        let err = tokenize("(a \u{7} b)").unwrap_err();
        assert!(matches!(err, ParseError::IllegalCharacter { ch: '\u{7}', .. }));
        // but allowed inside strings
        assert!(tokenize("\"\u{7}\"").is_ok());
    }

    #[test]
    fn escaped_quote_in_string() {
        assert_eq!(kinds(r#""say \"hi\"""#), vec![TokenKind::Str("say \"hi\"".into())]);
    }
}
