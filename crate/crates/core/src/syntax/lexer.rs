use super::{Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident { text: String, quoted: bool },
    Var(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Lt,
    Minus,
    Equals,
    Turnstile,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident { text, .. } => format!("`{text}`"),
            Tok::Var(v) => format!("`?{v}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Turnstile => "`:-`".into(),
        }
    }

    /// An unquoted identifier equal to `kw`.
    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self, Tok::Ident { text, quoted: false } if text == kw)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn lex(src: &str, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let span_to = |end_col: usize| SourceSpan { line: start.0, column: start.1, end_column: end_col };
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '<' => Some(Tok::Lt),
            '-' => Some(Tok::Minus),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, span: span_to(col + 1) });
            i += 1;
            col += 1;
            continue;
        }
        if c == ':' {
            if chars.get(i + 1) == Some(&'-') {
                out.push(Token { tok: Tok::Turnstile, span: span_to(col + 2) });
                i += 2;
                col += 2;
            } else {
                diags.push(Diagnostic::new(span_to(col + 1), "expected `:-`"));
                i += 1;
                col += 1;
            }
            continue;
        }
        if c == '"' {
            let mut text = String::new();
            let mut j = i + 1;
            let mut ccol = col + 1;
            let mut closed = false;
            while j < chars.len() && chars[j] != '\n' {
                if chars[j] == '\\' && j + 1 < chars.len() && chars[j + 1] != '\n' {
                    text.push(chars[j + 1]);
                    j += 2;
                    ccol += 2;
                    continue;
                }
                if chars[j] == '"' {
                    closed = true;
                    j += 1;
                    ccol += 1;
                    break;
                }
                text.push(chars[j]);
                j += 1;
                ccol += 1;
            }
            if !closed {
                diags.push(Diagnostic::new(span_to(ccol), "unterminated quoted name"));
            } else if text.is_empty() {
                diags.push(Diagnostic::new(span_to(ccol), "empty quoted name"));
            } else {
                out.push(Token { tok: Tok::Ident { text, quoted: true }, span: span_to(ccol) });
            }
            i = j;
            col = ccol;
            continue;
        }
        if c == '?' {
            let mut j = i + 1;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let name: String = chars[i + 1..j].iter().collect();
            let end = col + (j - i);
            if name.is_empty() {
                diags.push(Diagnostic::new(span_to(end), "expected a variable name after `?`"));
            } else {
                out.push(Token { tok: Tok::Var(name), span: span_to(end) });
            }
            col = end;
            i = j;
            continue;
        }
        if is_ident_char(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let end = col + (j - i);
            out.push(Token { tok: Tok::Ident { text, quoted: false }, span: span_to(end) });
            col = end;
            i = j;
            continue;
        }
        diags.push(Diagnostic::new(span_to(col + 1), format!("unexpected character `{c}`")));
        i += 1;
        col += 1;
    }
    out
}
