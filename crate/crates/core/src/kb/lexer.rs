use super::ast::Span;
use super::KbError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Minus,
    /// `~=`
    Approx,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(v) => format!("number {v}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Approx => "`~=`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, KbError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let ch = chars[i];
        let span = Span { line, col };
        let single = match ch {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, span });
            i += 1;
            col += 1;
            continue;
        }
        match ch {
            '\n' => {
                out.push(Token {
                    tok: Tok::Newline,
                    span,
                });
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            '~' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Token {
                        tok: Tok::Approx,
                        span,
                    });
                    i += 2;
                    col += 2;
                } else {
                    return Err(KbError::Lex {
                        pos: span,
                        msg: "expected `~=`".into(),
                    });
                }
            }
            '-' if !chars
                .get(i + 1)
                .is_some_and(|c| c.is_ascii_digit() || *c == '.') =>
            {
                out.push(Token {
                    tok: Tok::Minus,
                    span,
                });
                i += 1;
                col += 1;
            }
            c if c == '-' || c == '.' || c.is_ascii_digit() => {
                let start = i;
                i += 1;
                while i < chars.len() {
                    let c = chars[i];
                    let exp_sign = (c == '+' || c == '-') && matches!(chars[i - 1], 'e' | 'E');
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text.parse().map_err(|_| KbError::Lex {
                    pos: span,
                    msg: format!("malformed number `{text}`"),
                })?;
                col += i - start;
                out.push(Token {
                    tok: Tok::Number(value),
                    span,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    span,
                });
            }
            other => {
                return Err(KbError::Lex {
                    pos: span,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}
