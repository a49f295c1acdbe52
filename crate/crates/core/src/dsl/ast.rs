//! Syntax tree of the robot-control language.
//!
//! Every node carries the [`SourceSpan`] it was parsed from. Equality on
//! [`Spanned`] ignores spans, so two programs compare equal when they have the
//! same structure regardless of layout.

use std::fmt;

use crate::span::SourceSpan;

#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub span: SourceSpan,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: SourceSpan) -> Self {
        Self { node, span }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

pub type Stmt = Spanned<StmtKind>;
pub type Expr = Spanned<ExprKind>;

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign { name: String, value: Expr },
    Expr(Expr),
    ForRange { var: String, count: Expr, body: Vec<Stmt> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Name(String),
    List(Vec<Expr>),
    Index { target: Box<Expr>, index: Box<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { callee: Callee, args: Vec<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Prefix every robot API call is written with.
pub const API_NAMESPACE: &str = "aw";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Callee {
    /// `aw.<name>(...)`, resolved against the robot profile at run time.
    Api(String),
    Math(MathFn),
}

impl fmt::Display for Callee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Callee::Api(name) => write!(f, "{API_NAMESPACE}.{name}"),
            Callee::Math(m) => f.write_str(m.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MathFn {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Radians,
    Degrees,
    Abs,
}

impl MathFn {
    pub const ALL: [MathFn; 7] =
        [Self::Sin, Self::Cos, Self::Tan, Self::Sqrt, Self::Radians, Self::Degrees, Self::Abs];

    pub fn name(self) -> &'static str {
        match self {
            MathFn::Sin => "sin",
            MathFn::Cos => "cos",
            MathFn::Tan => "tan",
            MathFn::Sqrt => "sqrt",
            MathFn::Radians => "radians",
            MathFn::Degrees => "degrees",
            MathFn::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// Name of the built-in constant π.
pub const PI_NAME: &str = "pi";

/// Maximum nesting depth of `for` loops.
pub const MAX_LOOP_NESTING: usize = 4;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub statements: Vec<Stmt>,
}

impl Program {
    /// Number of statements, counting loop bodies recursively.
    pub fn statement_count(&self) -> usize {
        fn count(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match &s.node {
                    StmtKind::ForRange { body, .. } => 1 + count(body),
                    _ => 1,
                })
                .sum()
        }
        count(&self.statements)
    }
}
