//! The restricted robot-control language: parsing, canonical printing,
//! comment stripping and interpretation.
//!
//! The surface syntax is a small Python subset: assignments, arithmetic,
//! list literals and indexing, a fixed set of math functions, the constant
//! `pi`, `for <name> in range(<count>):` loops and `aw.<api>(...)` calls.

mod ast;
mod extract;
mod interp;
mod lexer;
mod parser;
mod pretty;
mod strip;

use std::sync::Arc;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::sim::{RobotProfile, SimError, Trajectory};
use crate::span::SourceSpan;

pub use ast::{
    BinOp, Callee, Expr, ExprKind, MathFn, Program, Spanned, Stmt, StmtKind, UnaryOp, API_NAMESPACE,
    MAX_LOOP_NESTING, PI_NAME,
};
pub use extract::extract_code;
pub use interp::{execute, interpret, Execution, Limits};
pub use parser::parse;
pub use pretty::{expr_text, pretty};
pub use strip::strip_comments;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {span}: {message}")]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeErrorKind {
    #[error("undefined name `{0}`")]
    UndefinedName(String),
    #[error("index {index} out of range for list of length {len}")]
    IndexOutOfRange { index: i64, len: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("type error: {0}")]
    Type(String),
    #[error("arithmetic produced a non-finite value")]
    NonFinite,
    #[error("step limit of {0} statements exceeded")]
    StepLimit(usize),
    #[error("loop count {count} exceeds the cap of {cap}")]
    LoopLimit { count: usize, cap: usize },
    #[error("{0}")]
    Sim(SimError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("runtime error at {span}: {kind}")]
pub struct RuntimeError {
    pub span: SourceSpan,
    pub kind: RuntimeErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

impl DslError {
    pub fn span(&self) -> SourceSpan {
        match self {
            DslError::Syntax(e) => e.span,
            DslError::Runtime(e) => e.span,
        }
    }
}

/// Parses and runs `source` on a fresh simulator, failing on the first error.
pub fn run_source<S: Scalar>(source: &str, profile: Arc<RobotProfile>, limits: Limits) -> Result<Trajectory<S>, DslError> {
    let program = parse(source)?;
    let execution = execute(&program, profile, limits);
    match execution.error {
        Some(e) => Err(e.into()),
        None => Ok(execution.trajectory),
    }
}

/// Parses and runs `source`, keeping whatever trajectory was produced before a
/// failure. A syntax error yields an empty trajectory.
pub fn execute_source<S: Scalar>(source: &str, profile: Arc<RobotProfile>, limits: Limits) -> (Trajectory<S>, Option<DslError>) {
    match parse(source) {
        Ok(program) => {
            let ex = execute(&program, profile, limits);
            (ex.trajectory, ex.error.map(DslError::from))
        }
        Err(e) => {
            let traj = Trajectory::empty(profile.name.clone(), profile.start_pose());
            (traj, Some(e.into()))
        }
    }
}
