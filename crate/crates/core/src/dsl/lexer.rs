//! Indentation-aware tokenizer.

use crate::span::SourceSpan;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Number(f64),
    Name(String),
    /// A string literal; only legal as a whole statement (docstring-style comment).
    Str,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Assign,
    AugAssign(super::ast::BinOp),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    indents: Vec<usize>,
    brackets: Vec<(char, SourceSpan)>,
}

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        indents: vec![0],
        brackets: Vec::new(),
    };
    lx.run()?;
    Ok(lx.tokens)
}

fn err<T>(span: SourceSpan, message: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError { span, message: message.into() })
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> SourceSpan {
        SourceSpan::new(self.line, self.col)
    }

    fn push(&mut self, tok: Tok, span: SourceSpan) {
        self.tokens.push(Token { tok, span });
    }

    fn skip_to_eol(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        let mut line_start = true;
        loop {
            if line_start && self.brackets.is_empty() {
                line_start = false;
                if !self.handle_indentation()? {
                    line_start = true;
                    continue;
                }
            }
            let Some(c) = self.peek() else { break };
            let span = self.here();
            match c {
                ' ' | '\t' | '\r' | '\x0c' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    if self.brackets.is_empty() {
                        if !matches!(self.tokens.last().map(|t| &t.tok), None | Some(Tok::Newline)) {
                            self.push(Tok::Newline, span);
                        }
                        line_start = true;
                    }
                }
                '#' => self.skip_to_eol(),
                '\\' => return err(span, "line continuation is not supported"),
                '"' | '\'' => {
                    self.string(span)?;
                    self.push(Tok::Str, span);
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) => {
                    let n = self.number(span)?;
                    self.push(Tok::Number(n), span);
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if !name.is_ascii() {
                        return err(span, format!("non-ASCII identifier `{name}`"));
                    }
                    if matches!(self.peek(), Some('"' | '\'')) {
                        return err(span, "prefixed string literals are not supported");
                    }
                    self.push(Tok::Name(name), span);
                }
                _ => self.operator(c, span)?,
            }
        }
        if let Some((open, span)) = self.brackets.last() {
            return err(*span, format!("unclosed `{open}`"));
        }
        let end = self.here();
        if !matches!(self.tokens.last().map(|t| &t.tok), None | Some(Tok::Newline)) {
            self.push(Tok::Newline, end);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, end);
        }
        self.push(Tok::Eof, end);
        Ok(())
    }

    /// Measures leading indentation and emits INDENT/DEDENT.
    /// Returns false if the line was blank or comment-only and has been consumed.
    fn handle_indentation(&mut self) -> Result<bool, SyntaxError> {
        let mut width = 0usize;
        while let Some(c) = self.peek() {
            match c {
                ' ' => width += 1,
                '\t' => return err(self.here(), "bad indentation: tabs are not supported"),
                '\r' | '\x0c' => {}
                _ => break,
            }
            self.bump();
        }
        match self.peek() {
            None => return Ok(true),
            Some('\n') => {
                self.bump();
                return Ok(false);
            }
            Some('#') => {
                self.skip_to_eol();
                if self.peek().is_some() {
                    self.bump();
                }
                return Ok(false);
            }
            _ => {}
        }
        let span = self.here();
        let current = *self.indents.last().expect("indent stack never empty");
        if width > current {
            self.indents.push(width);
            self.push(Tok::Indent, span);
        } else if width < current {
            while width < *self.indents.last().expect("indent stack never empty") {
                self.indents.pop();
                self.push(Tok::Dedent, span);
            }
            if width != *self.indents.last().expect("indent stack never empty") {
                return err(span, "bad indentation: dedent does not match any outer block");
            }
        }
        Ok(true)
    }

    fn string(&mut self, span: SourceSpan) -> Result<(), SyntaxError> {
        let quote = self.bump().expect("quote present");
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        loop {
            match self.bump() {
                None => return err(span, "unterminated string literal"),
                Some('\\') => {
                    self.bump();
                }
                Some('\n') if !triple => return err(span, "unterminated string literal"),
                Some(c) if c == quote => {
                    if !triple {
                        return Ok(());
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(());
                    }
                }
                Some(_) => {}
            }
        }
    }

    fn number(&mut self, span: SourceSpan) -> Result<f64, SyntaxError> {
        let mut text = String::new();
        let digits = |lx: &mut Lexer, text: &mut String| {
            while let Some(c) = lx.peek().filter(|c| c.is_ascii_digit()) {
                text.push(c);
                lx.bump();
            }
        };
        digits(self, &mut text);
        if self.peek() == Some('.') {
            text.push('.');
            self.bump();
            digits(self, &mut text);
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let sign = self.peek_at(1);
            let has_digit = match sign {
                Some('+' | '-') => self.peek_at(2).is_some_and(|c| c.is_ascii_digit()),
                Some(c) => c.is_ascii_digit(),
                None => false,
            };
            if has_digit {
                text.push('e');
                self.bump();
                if matches!(sign, Some('+' | '-')) {
                    text.push(self.bump().expect("sign"));
                }
                digits(self, &mut text);
            }
        }
        if self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '.') {
            return err(span, "invalid numeric literal");
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => err(span, format!("invalid numeric literal `{text}`")),
        }
    }

    fn operator(&mut self, c: char, span: SourceSpan) -> Result<(), SyntaxError> {
        use super::ast::BinOp;
        self.bump();
        let next = self.peek();
        let tok = match (c, next) {
            ('*', Some('*')) => return err(span, "unsupported operator `**`"),
            ('/', Some('/')) => return err(span, "unsupported operator `//`"),
            ('=', Some('=')) | ('!', Some('=')) | ('<', _) | ('>', _) => {
                return err(span, "comparisons are not supported")
            }
            ('+', Some('=')) | ('-', Some('=')) | ('*', Some('=')) | ('/', Some('=')) => {
                self.bump();
                Tok::AugAssign(match c {
                    '+' => BinOp::Add,
                    '-' => BinOp::Sub,
                    '*' => BinOp::Mul,
                    _ => BinOp::Div,
                })
            }
            ('+', _) => Tok::Plus,
            ('-', _) => Tok::Minus,
            ('*', _) => Tok::Star,
            ('/', _) => Tok::Slash,
            ('=', _) => Tok::Assign,
            (',', _) => Tok::Comma,
            (':', _) => Tok::Colon,
            ('.', _) => Tok::Dot,
            ('(' | '[', _) => {
                self.brackets.push((c, span));
                if c == '(' {
                    Tok::LParen
                } else {
                    Tok::LBracket
                }
            }
            (')' | ']', _) => {
                let want = if c == ')' { '(' } else { '[' };
                match self.brackets.pop() {
                    Some((open, _)) if open == want => {}
                    Some((open, open_span)) => {
                        return err(span, format!("`{c}` does not match `{open}` opened at {open_span}"))
                    }
                    None => return err(span, format!("unmatched `{c}`")),
                }
                if c == ')' {
                    Tok::RParen
                } else {
                    Tok::RBracket
                }
            }
            ('{' | '}', _) => return err(span, "dictionaries and sets are not supported"),
            _ => return err(span, format!("unexpected character `{c}`")),
        };
        self.push(tok, span);
        Ok(())
    }
}
