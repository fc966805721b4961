use std::sync::Arc;

use crate::model::SourceSpan;

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    At,
    Eq,
    Semi,
    Comma,
    Colon,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    DotDot,
    Lt,
    Gt,
    /// `<<`
    Reactant,
    /// `>>`
    Product,
    /// `(+)`
    Activator,
    /// `(-)`
    Inhibitor,
    /// `(.)`
    Modifier,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(v) => format!("number `{v}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    pub fn spelling(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "identifier",
            Tok::Number(_) => "number",
            Tok::At => "@",
            Tok::Eq => "=",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::DotDot => "..",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Reactant => "<<",
            Tok::Product => ">>",
            Tok::Activator => "(+)",
            Tok::Inhibitor => "(-)",
            Tok::Modifier => "(.)",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn tokenize(text: &str, file: &Arc<str>) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, column, length| SourceSpan { file: file.clone(), line, column, length };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        let three: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, len) = if three == "(+)" {
            (Tok::Activator, 3)
        } else if three == "(-)" {
            (Tok::Inhibitor, 3)
        } else if three == "(.)" {
            (Tok::Modifier, 3)
        } else if two == "<<" {
            (Tok::Reactant, 2)
        } else if two == ">>" {
            (Tok::Product, 2)
        } else if two == ".." {
            (Tok::DotDot, 2)
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j < chars.len() && chars[j] == '.' && chars.get(j + 1) != Some(&'.') {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let value: f64 = text.parse().map_err(|_| ParseError {
                span: span(line, start_col, j - i),
                message: format!("malformed number `{text}`"),
                expected: vec![],
            })?;
            if !value.is_finite() {
                return Err(ParseError {
                    span: span(line, start_col, j - i),
                    message: format!("number `{text}` is out of range"),
                    expected: vec![],
                });
            }
            (Tok::Number(value), j - i)
        } else {
            let tok = match c {
                '@' => Tok::At,
                '=' => Tok::Eq,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                other => {
                    return Err(ParseError {
                        span: span(line, start_col, 1),
                        message: format!("unexpected character `{other}`"),
                        expected: vec![],
                    })
                }
            };
            (tok, 1)
        };
        out.push(Token { tok, span: span(line, start_col, len) });
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, span: span(line, col, 0) });
    Ok(out)
}
