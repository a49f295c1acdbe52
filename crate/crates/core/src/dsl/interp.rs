//! Tree-walking interpreter routing API calls into a [`Simulator`].

use std::collections::HashMap;
use std::sync::Arc;

use crate::scalar::Scalar;
use crate::sim::{ApiCall, RobotProfile, Simulator, Trajectory};
use crate::span::SourceSpan;
use crate::value::Value;

use super::ast::*;
use super::{RuntimeError, RuntimeErrorKind};

/// Evaluation bounds guarding against runaway programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of evaluated statements.
    pub max_steps: usize,
    /// Maximum iteration count of a single `for` loop.
    pub max_loop_count: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_steps: 10_000, max_loop_count: 1_000 }
    }
}

/// Trajectory recorded up to completion or up to the first runtime error.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution<S> {
    pub trajectory: Trajectory<S>,
    pub error: Option<RuntimeError>,
    pub warnings: Vec<String>,
}

impl<S: Scalar> Execution<S> {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs `program` on `sim`, which should be freshly reset.
pub fn interpret<S: Scalar>(
    program: &Program,
    sim: &mut Simulator<S>,
    limits: Limits,
) -> Result<Trajectory<S>, RuntimeError> {
    Interpreter::new(sim, limits).run(program)?;
    Ok(sim.trajectory())
}

/// Runs `program` on a fresh simulator for `profile`, keeping the partial
/// trajectory when evaluation fails.
pub fn execute<S: Scalar>(program: &Program, profile: Arc<RobotProfile>, limits: Limits) -> Execution<S> {
    let mut sim = Simulator::new(profile);
    let error = Interpreter::new(&mut sim, limits).run(program).err();
    Execution { trajectory: sim.trajectory(), error, warnings: sim.warnings().to_vec() }
}

struct Interpreter<'a, S> {
    sim: &'a mut Simulator<S>,
    env: HashMap<String, Value<S>>,
    steps: usize,
    limits: Limits,
}

fn fail<T>(span: SourceSpan, kind: RuntimeErrorKind) -> Result<T, RuntimeError> {
    Err(RuntimeError { span, kind })
}

impl<'a, S: Scalar> Interpreter<'a, S> {
    fn new(sim: &'a mut Simulator<S>, limits: Limits) -> Self {
        Self { sim, env: HashMap::new(), steps: 0, limits }
    }

    fn run(&mut self, program: &Program) -> Result<(), RuntimeError> {
        self.block(&program.statements)
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<(), RuntimeError> {
        stmts.iter().try_for_each(|s| self.stmt(s))
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<(), RuntimeError> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return fail(stmt.span, RuntimeErrorKind::StepLimit(self.limits.max_steps));
        }
        match &stmt.node {
            StmtKind::Assign { name, value } => {
                let v = self.eval(value)?;
                self.env.insert(name.clone(), v);
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
            StmtKind::ForRange { var, count, body } => {
                let n = self.number(count)?;
                if n.fract() != S::zero() {
                    return fail(count.span, RuntimeErrorKind::Type(format!("range() needs an integer, got {n}")));
                }
                let n = if n < S::zero() { 0 } else { n.to_usize().unwrap_or(usize::MAX) };
                if n > self.limits.max_loop_count {
                    return fail(
                        count.span,
                        RuntimeErrorKind::LoopLimit { count: n, cap: self.limits.max_loop_count },
                    );
                }
                for i in 0..n {
                    let index = S::from_usize(i).expect("loop index fits scalar");
                    self.env.insert(var.clone(), Value::Number(index));
                    self.block(body)?;
                }
            }
        }
        Ok(())
    }

    fn number(&mut self, e: &Expr) -> Result<S, RuntimeError> {
        match self.eval(e)? {
            Value::Number(n) => Ok(n),
            Value::List(_) => fail(e.span, RuntimeErrorKind::Type("expected a number, got a list".into())),
        }
    }

    fn finite(span: SourceSpan, v: S) -> Result<Value<S>, RuntimeError> {
        if v.is_finite() {
            Ok(Value::Number(v))
        } else {
            fail(span, RuntimeErrorKind::NonFinite)
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value<S>, RuntimeError> {
        match &e.node {
            ExprKind::Number(n) => Ok(Value::Number(S::of(*n))),
            ExprKind::Name(name) => match self.env.get(name) {
                Some(v) => Ok(v.clone()),
                None if name == PI_NAME => Ok(Value::Number(S::PI())),
                None => fail(e.span, RuntimeErrorKind::UndefinedName(name.clone())),
            },
            ExprKind::List(items) => Ok(Value::List(items.iter().map(|i| self.eval(i)).collect::<Result<_, _>>()?)),
            ExprKind::Index { target, index } => {
                let t = self.eval(target)?;
                let i = self.number(index)?;
                let Value::List(items) = t else {
                    return fail(target.span, RuntimeErrorKind::Type("only lists can be indexed".into()));
                };
                if i.fract() != S::zero() {
                    return fail(index.span, RuntimeErrorKind::Type(format!("list index must be an integer, got {i}")));
                }
                let len = items.len() as i64;
                let raw = i.to_i64().unwrap_or(i64::MAX);
                let idx = if raw < 0 { raw + len } else { raw };
                if idx < 0 || idx >= len {
                    return fail(index.span, RuntimeErrorKind::IndexOutOfRange { index: raw, len: items.len() });
                }
                Ok(items[idx as usize].clone())
            }
            ExprKind::Unary { op: UnaryOp::Neg, operand } => {
                let v = self.number(operand)?;
                Ok(Value::Number(-v))
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.number(lhs)?;
                let b = self.number(rhs)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == S::zero() {
                            return fail(e.span, RuntimeErrorKind::DivisionByZero);
                        }
                        a / b
                    }
                };
                Self::finite(e.span, v)
            }
            ExprKind::Call { callee: Callee::Math(f), args } => {
                if args.len() != 1 {
                    return fail(
                        e.span,
                        RuntimeErrorKind::Type(format!("{}() takes 1 argument, got {}", f.name(), args.len())),
                    );
                }
                let x = self.number(&args[0])?;
                let v = match f {
                    MathFn::Sin => x.sin(),
                    MathFn::Cos => x.cos(),
                    MathFn::Tan => x.tan(),
                    MathFn::Sqrt => {
                        if x < S::zero() {
                            return fail(e.span, RuntimeErrorKind::NonFinite);
                        }
                        x.sqrt()
                    }
                    MathFn::Radians => x.to_radians(),
                    MathFn::Degrees => x.to_degrees(),
                    MathFn::Abs => x.abs(),
                };
                Self::finite(e.span, v)
            }
            ExprKind::Call { callee: Callee::Api(name), args } => {
                let args = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                let call = ApiCall { name: name.clone(), args, span: e.span };
                let value = self
                    .sim
                    .call(&call)
                    .map_err(|err| RuntimeError { span: err.span, kind: RuntimeErrorKind::Sim(err.kind) })?;
                // Actions evaluate to an empty list when used as values.
                Ok(value.unwrap_or(Value::List(Vec::new())))
            }
        }
    }
}
