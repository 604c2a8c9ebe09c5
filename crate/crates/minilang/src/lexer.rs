//! Tokenizer for MiniLang source text.

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, DiagnosticCode, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    IntLiteral,
    StringLiteral,
    Keyword,
    Punctuation,
    Operator,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.is(TokenKind::Keyword, kw)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.kind, TokenKind::Punctuation | TokenKind::Operator) && self.text == p
    }
}

pub const KEYWORDS: &[&str] = &[
    "let", "var", "func", "class", "init", "if", "else", "while", "return", "true", "false", "this", "open",
    "override", "public", "private", "println",
];

/// A token sequence plus the text it was read from.
///
/// The gaps between token spans hold the whitespace and comments, so the
/// original text can always be rebuilt from the stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub source: String,
}

impl TokenStream {
    /// Tokens excluding the trailing end-of-input marker.
    pub fn significant(&self) -> &[Token] {
        match self.tokens.last() {
            Some(t) if t.kind == TokenKind::Eof => &self.tokens[..self.tokens.len() - 1],
            _ => &self.tokens,
        }
    }

    /// Rebuild the text from token lexemes and the recorded inter-token gaps.
    pub fn reassemble(&self) -> String {
        let mut out = String::with_capacity(self.source.len());
        let mut cursor = 0;
        for tok in &self.tokens {
            out.push_str(&self.source[cursor..tok.span.start]);
            out.push_str(&tok.text);
            cursor = tok.span.end;
        }
        out.push_str(&self.source[cursor..]);
        out
    }

    pub fn text(&self) -> &str {
        &self.source
    }
}

pub fn lex(source: &str) -> Result<TokenStream, Diagnostic> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            if KEYWORDS.contains(&&source[start..i]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(Diagnostic::new(
                    DiagnosticCode::Lex,
                    "malformed integer literal",
                    Span::new(start, i + 1),
                ));
            }
            TokenKind::IntLiteral
        } else if c == b'"' {
            i += 1;
            loop {
                match bytes.get(i) {
                    None | Some(b'\n') => {
                        return Err(Diagnostic::new(
                            DiagnosticCode::Lex,
                            "unterminated string literal",
                            Span::new(start, i),
                        ))
                    }
                    Some(b'"') => {
                        i += 1;
                        break;
                    }
                    Some(b'\\') => match bytes.get(i + 1) {
                        Some(b'n' | b't' | b'"' | b'\\') => i += 2,
                        _ => {
                            return Err(Diagnostic::new(
                                DiagnosticCode::Lex,
                                "invalid escape sequence",
                                Span::new(i, (i + 2).min(bytes.len())),
                            ))
                        }
                    },
                    Some(_) => i += 1,
                }
            }
            TokenKind::StringLiteral
        } else {
            let two = source.get(i..i + 2).unwrap_or("");
            if matches!(two, "==" | "!=" | "<=" | ">=" | "&&" | "||" | "<:") {
                i += 2;
                TokenKind::Operator
            } else {
                match c {
                    b'+' | b'-' | b'*' | b'/' | b'%' | b'<' | b'>' | b'!' | b'=' => {
                        i += 1;
                        TokenKind::Operator
                    }
                    b'(' | b')' | b'{' | b'}' | b',' | b';' | b':' | b'.' => {
                        i += 1;
                        TokenKind::Punctuation
                    }
                    _ => {
                        let ch = source[i..].chars().next().unwrap_or('?');
                        return Err(Diagnostic::new(
                            DiagnosticCode::Lex,
                            format!("unrecognized character {ch:?}"),
                            Span::new(i, i + ch.len_utf8()),
                        ));
                    }
                }
            }
        };
        tokens.push(Token {
            kind,
            text: source[start..i].to_string(),
            span: Span::new(start, i),
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        span: Span::new(source.len(), source.len()),
    });
    Ok(TokenStream {
        tokens,
        source: source.to_string(),
    })
}

/// Decode the body of a string literal token (quotes included in `text`).
pub fn unescape(text: &str) -> String {
    let inner = &text[1..text.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
