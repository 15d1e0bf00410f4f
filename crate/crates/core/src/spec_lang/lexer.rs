//! Tokenizer shared by the model, formula and relation grammars.

use super::{Pos, SpecError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Arrow,
    Colon,
    Comma,
    Eq,
    LParen,
    RParen,
    LCoop,
    RCoop,
    Bang,
    Amp,
    Pipe,
    Tilde,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Arrow => "`->`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LCoop => "`<<`".into(),
            Tok::RCoop => "`>>`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Tilde => "`~`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// One logical line: its tokens and the position just past its last character.
#[derive(Debug, Clone)]
pub(crate) struct Line {
    pub tokens: Vec<Token>,
    pub end: Pos,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `text` into lines of tokens. `%` starts a comment running to the end
/// of the line; blank and comment-only lines are dropped.
pub(crate) fn lex_lines(text: &str) -> Result<Vec<Line>, SpecError> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = lex_line(raw, line_no)?;
        if !tokens.is_empty() {
            let end = Pos::new(line_no, raw.chars().count() + 1);
            lines.push(Line { tokens, end });
        }
    }
    Ok(lines)
}

fn lex_line(raw: &str, line: usize) -> Result<Vec<Token>, SpecError> {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, i + 1);
        if c == '%' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_char(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('<', Some('<')) => (Tok::LCoop, 2),
            ('>', Some('>')) => (Tok::RCoop, 2),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            ('=', _) => (Tok::Eq, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('!', _) => (Tok::Bang, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Pipe, 1),
            ('~', _) => (Tok::Tilde, 1),
            _ => {
                return Err(SpecError::Syntax {
                    pos,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { tok, pos });
        i += width;
    }
    Ok(out)
}

/// Cursor over a token slice with an end position for "unexpected end" errors.
pub(crate) struct Cursor<'a> {
    tokens: &'a [Token],
    at: usize,
    end: Pos,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(tokens: &'a [Token], end: Pos) -> Self {
        Cursor { tokens, at: 0, end }
    }

    pub(crate) fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.at)
    }

    pub(crate) fn peek_tok(&self) -> Option<&'a Tok> {
        self.peek().map(|t| &t.tok)
    }

    pub(crate) fn pos(&self) -> Pos {
        self.peek().map(|t| t.pos).unwrap_or(self.end)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.at >= self.tokens.len()
    }

    pub(crate) fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.at);
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn error(&self, expected: &str) -> SpecError {
        let found = match self.peek() {
            Some(t) => t.tok.describe(),
            None => "end of line".to_string(),
        };
        SpecError::Syntax {
            pos: self.pos(),
            message: format!("expected {expected}, found {found}"),
        }
    }

    pub(crate) fn expect(&mut self, tok: Tok, expected: &str) -> Result<Pos, SpecError> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.at += 1;
                Ok(t.pos)
            }
            _ => Err(self.error(expected)),
        }
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn ident(&mut self, expected: &str) -> Result<(String, Pos), SpecError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                pos,
            }) => {
                self.at += 1;
                Ok((s.clone(), *pos))
            }
            _ => Err(self.error(expected)),
        }
    }

    /// Comma-separated identifier list; at least one element.
    pub(crate) fn ident_list(&mut self, expected: &str) -> Result<Vec<(String, Pos)>, SpecError> {
        let mut out = vec![self.ident(expected)?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident(expected)?);
        }
        Ok(out)
    }

    pub(crate) fn finish(&self) -> Result<(), SpecError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("end of line"))
        }
    }
}
