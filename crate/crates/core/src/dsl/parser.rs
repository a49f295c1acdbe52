//! Recursive-descent parser producing a [`Program`].

use crate::span::SourceSpan;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

/// Python keywords and literals outside the supported subset.
const REJECTED_WORDS: &[&str] = &[
    "if", "elif", "else", "while", "def", "class", "import", "from", "return", "lambda", "try",
    "except", "finally", "with", "pass", "break", "continue", "global", "nonlocal", "assert", "del",
    "yield", "raise", "async", "await", "and", "or", "not", "is", "True", "False", "None",
];

pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let statements = p.block_until_eof()?;
    Ok(Program { statements })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

fn err<T>(span: SourceSpan, message: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError { span, message: message.into() })
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Number(n) => format!("number `{n}`"),
        Tok::Name(n) => format!("`{n}`"),
        Tok::Str => "string literal".into(),
        Tok::Newline => "end of line".into(),
        Tok::Indent => "indented block".into(),
        Tok::Dedent => "dedent".into(),
        Tok::Eof => "end of input".into(),
        other => format!("`{}`", symbol(other)),
    }
}

fn symbol(tok: &Tok) -> &'static str {
    match tok {
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Comma => ",",
        Tok::Colon => ":",
        Tok::Dot => ".",
        Tok::Assign => "=",
        Tok::AugAssign(op) => match op {
            BinOp::Add => "+=",
            BinOp::Sub => "-=",
            BinOp::Mul => "*=",
            BinOp::Div => "/=",
        },
        _ => "?",
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_tok_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, context: &str) -> Result<Token, SyntaxError> {
        let t = self.peek().clone();
        if t.tok == want {
            Ok(self.advance())
        } else {
            err(t.span, format!("expected {} {context}, found {}", describe(&want), describe(&t.tok)))
        }
    }

    fn expect_name(&mut self, context: &str) -> Result<(String, SourceSpan), SyntaxError> {
        let t = self.advance();
        match t.tok {
            Tok::Name(n) => Ok((n, t.span)),
            other => err(t.span, format!("expected a name {context}, found {}", describe(&other))),
        }
    }

    fn block_until_eof(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let mut stmts = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Eof => return Ok(stmts),
                Tok::Newline => {
                    self.advance();
                }
                Tok::Indent => return err(self.peek().span, "bad indentation: unexpected indent"),
                _ => stmts.extend(self.statement(0)?),
            }
        }
    }

    fn statement(&mut self, depth: usize) -> Result<Option<Stmt>, SyntaxError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Name(n) if n == "for" => self.for_range(depth).map(Some),
            Tok::Name(n) if REJECTED_WORDS.contains(&n.as_str()) => {
                err(t.span, format!("unsupported construct `{n}`"))
            }
            Tok::Str => {
                self.advance();
                match self.peek().tok {
                    Tok::Newline | Tok::Eof | Tok::Dedent => {
                        if self.peek().tok == Tok::Newline {
                            self.advance();
                        }
                        Ok(None)
                    }
                    _ => err(t.span, "string literals are not supported"),
                }
            }
            Tok::Name(name) if matches!(self.peek_tok_at(1), Tok::Assign | Tok::AugAssign(_)) => {
                let name = name.clone();
                self.check_assign_target(&name, t.span)?;
                self.advance();
                let op = self.advance();
                let rhs = self.expr()?;
                let value = match op.tok {
                    Tok::AugAssign(bin) => Spanned::new(
                        ExprKind::Binary {
                            op: bin,
                            lhs: Box::new(Spanned::new(ExprKind::Name(name.clone()), t.span)),
                            rhs: Box::new(rhs),
                        },
                        op.span,
                    ),
                    _ => rhs,
                };
                self.end_of_statement()?;
                Ok(Some(Spanned::new(StmtKind::Assign { name, value }, t.span)))
            }
            _ => {
                let e = self.expr()?;
                if matches!(self.peek().tok, Tok::Assign | Tok::AugAssign(_)) {
                    return err(self.peek().span, "only plain names can be assigned to");
                }
                if matches!(self.peek().tok, Tok::Comma) {
                    return err(self.peek().span, "tuples are not supported");
                }
                self.end_of_statement()?;
                Ok(Some(Spanned::new(StmtKind::Expr(e), t.span)))
            }
        }
    }

    fn check_assign_target(&self, name: &str, span: SourceSpan) -> Result<(), SyntaxError> {
        if name == API_NAMESPACE || name == "for" || name == "in" || name == "range" {
            return err(span, format!("cannot assign to `{name}`"));
        }
        Ok(())
    }

    fn end_of_statement(&mut self) -> Result<(), SyntaxError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Newline => {
                self.advance();
                Ok(())
            }
            Tok::Eof | Tok::Dedent => Ok(()),
            other => err(t.span, format!("expected end of line, found {}", describe(&other))),
        }
    }

    fn for_range(&mut self, depth: usize) -> Result<Stmt, SyntaxError> {
        let for_tok = self.advance();
        if depth + 1 > MAX_LOOP_NESTING {
            return err(for_tok.span, format!("loops nested deeper than {MAX_LOOP_NESTING} levels"));
        }
        let (var, var_span) = self.expect_name("after `for`")?;
        if REJECTED_WORDS.contains(&var.as_str()) || var == "in" {
            return err(var_span, format!("unsupported construct `{var}`"));
        }
        self.check_assign_target(&var, var_span)?;
        let in_tok = self.advance();
        if in_tok.tok != Tok::Name("in".into()) {
            return err(in_tok.span, format!("expected `in`, found {}", describe(&in_tok.tok)));
        }
        let range_tok = self.advance();
        if range_tok.tok != Tok::Name("range".into()) {
            return err(range_tok.span, "only `for <name> in range(<count>)` loops are supported");
        }
        self.expect(Tok::LParen, "after `range`")?;
        let count = self.expr()?;
        if self.peek().tok == Tok::Comma {
            return err(self.peek().span, "range() takes exactly one argument");
        }
        self.expect(Tok::RParen, "to close `range(`")?;
        self.expect(Tok::Colon, "after loop header")?;
        let nl = self.peek().clone();
        if nl.tok != Tok::Newline {
            return err(nl.span, "loop body must start on a new line");
        }
        self.advance();
        let indent = self.peek().clone();
        if indent.tok != Tok::Indent {
            return err(indent.span, "bad indentation: expected an indented loop body");
        }
        self.advance();
        let mut body = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Dedent => {
                    self.advance();
                    break;
                }
                Tok::Eof => break,
                Tok::Newline => {
                    self.advance();
                }
                Tok::Indent => return err(self.peek().span, "bad indentation: unexpected indent"),
                _ => body.extend(self.statement(depth + 1)?),
            }
        }
        if body.is_empty() {
            return err(for_tok.span, "loop body has no statements");
        }
        Ok(Spanned::new(StmtKind::ForRange { var, count, body }, for_tok.span))
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let op_span = self.advance().span;
            let rhs = self.term()?;
            lhs = Spanned::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, op_span);
        }
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let op_span = self.advance().span;
            let rhs = self.unary()?;
            lhs = Spanned::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, op_span);
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().tok {
            Tok::Minus => {
                let span = self.advance().span;
                let operand = self.unary()?;
                Ok(Spanned::new(ExprKind::Unary { op: UnaryOp::Neg, operand: Box::new(operand) }, span))
            }
            Tok::Plus => {
                self.advance();
                self.unary()
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.atom()?;
        loop {
            match self.peek().tok {
                Tok::LBracket => {
                    let span = self.advance().span;
                    let index = self.expr()?;
                    if self.peek().tok == Tok::Colon {
                        return err(self.peek().span, "slices are not supported");
                    }
                    self.expect(Tok::RBracket, "to close index")?;
                    e = Spanned::new(ExprKind::Index { target: Box::new(e), index: Box::new(index) }, span);
                }
                Tok::LParen => return err(self.peek().span, "only named functions can be called"),
                Tok::Dot => return err(self.peek().span, "attribute access is only supported on `aw`"),
                _ => return Ok(e),
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect(Tok::LParen, "to open argument list")?;
        let mut args = Vec::new();
        if self.peek().tok == Tok::RParen {
            self.advance();
            return Ok(args);
        }
        loop {
            if matches!(self.peek().tok, Tok::Name(_)) && *self.peek_tok_at(1) == Tok::Assign {
                return err(self.peek().span, "keyword arguments are not supported");
            }
            args.push(self.expr()?);
            match self.peek().tok {
                Tok::Comma => {
                    self.advance();
                    if self.peek().tok == Tok::RParen {
                        self.advance();
                        return Ok(args);
                    }
                }
                Tok::RParen => {
                    self.advance();
                    return Ok(args);
                }
                _ => {
                    let t = self.peek().clone();
                    return err(t.span, format!("expected `,` or `)`, found {}", describe(&t.tok)));
                }
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.advance();
        match t.tok {
            Tok::Number(n) => Ok(Spanned::new(ExprKind::Number(n), t.span)),
            Tok::Str => err(t.span, "string literals are not supported"),
            Tok::Name(name) => {
                if REJECTED_WORDS.contains(&name.as_str()) || name == "for" || name == "in" {
                    return err(t.span, format!("unsupported construct `{name}`"));
                }
                if name == API_NAMESPACE {
                    self.expect(Tok::Dot, "after `aw`")?;
                    let (api, _) = self.expect_name("after `aw.`")?;
                    if self.peek().tok != Tok::LParen {
                        return err(self.peek().span, format!("`aw.{api}` must be called"));
                    }
                    let args = self.args()?;
                    return Ok(Spanned::new(ExprKind::Call { callee: Callee::Api(api), args }, t.span));
                }
                match self.peek().tok {
                    Tok::LParen => {
                        let Some(f) = MathFn::from_name(&name) else {
                            return err(t.span, format!("unsupported function `{name}`"));
                        };
                        let args = self.args()?;
                        Ok(Spanned::new(ExprKind::Call { callee: Callee::Math(f), args }, t.span))
                    }
                    Tok::Dot => err(self.peek().span, format!("attribute access on `{name}` is not supported")),
                    _ => Ok(Spanned::new(ExprKind::Name(name), t.span)),
                }
            }
            Tok::LParen => {
                if self.peek().tok == Tok::RParen {
                    return err(t.span, "tuples are not supported");
                }
                let inner = self.expr()?;
                if self.peek().tok == Tok::Comma {
                    return err(self.peek().span, "tuples are not supported");
                }
                self.expect(Tok::RParen, "to close `(`")?;
                Ok(inner)
            }
            Tok::LBracket => {
                let mut items = Vec::new();
                loop {
                    if self.peek().tok == Tok::RBracket {
                        self.advance();
                        break;
                    }
                    items.push(self.expr()?);
                    match self.peek().tok {
                        Tok::Comma => {
                            self.advance();
                        }
                        Tok::RBracket => {
                            self.advance();
                            break;
                        }
                        _ => {
                            let t = self.peek().clone();
                            return err(t.span, format!("expected `,` or `]`, found {}", describe(&t.tok)));
                        }
                    }
                }
                Ok(Spanned::new(ExprKind::List(items), t.span))
            }
            other => err(t.span, format!("unexpected {}", describe(&other))),
        }
    }
}
