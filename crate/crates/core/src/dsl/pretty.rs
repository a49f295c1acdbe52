//! Canonical text form: LF line endings, 4-space indentation, minimal parentheses.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    write_block(&mut out, &program.statements, 0);
    out
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for stmt in stmts {
        for _ in 0..depth {
            out.push_str(INDENT);
        }
        match &stmt.node {
            StmtKind::Assign { name, value } => {
                let _ = writeln!(out, "{name} = {}", expr_text(value));
            }
            StmtKind::Expr(e) => {
                let _ = writeln!(out, "{}", expr_text(e));
            }
            StmtKind::ForRange { var, count, body } => {
                let _ = writeln!(out, "for {var} in range({}):", expr_text(count));
                write_block(out, body, depth + 1);
            }
        }
    }
}

const PREC_UNARY: u8 = 3;
const PREC_POSTFIX: u8 = 4;

fn precedence(e: &ExprKind) -> u8 {
    match e {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } => PREC_UNARY,
        _ => PREC_POSTFIX,
    }
}

pub fn expr_text(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let parens = precedence(&e.node) < min_prec;
    if parens {
        out.push('(');
    }
    match &e.node {
        ExprKind::Number(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Name(n) => out.push_str(n),
        ExprKind::List(items) => {
            out.push('[');
            write_list(out, items);
            out.push(']');
        }
        ExprKind::Index { target, index } => {
            write_expr(out, target, PREC_POSTFIX);
            out.push('[');
            write_expr(out, index, 0);
            out.push(']');
        }
        ExprKind::Unary { op: UnaryOp::Neg, operand } => {
            out.push('-');
            write_expr(out, operand, PREC_UNARY);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            write_expr(out, lhs, p);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, p + 1);
        }
        ExprKind::Call { callee, args } => {
            let _ = write!(out, "{callee}(");
            write_list(out, args);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, item, 0);
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn single_call() {
        let p = parse("aw.takeoff( )").unwrap();
        assert_eq!(pretty(&p), "aw.takeoff()\n");
    }

    #[test]
    fn nested_loops_indent_four_spaces() {
        let p = parse("for i in range(2):\n  for j in range(3):\n   aw.set_yaw(90*j)\n  aw.land()\n").unwrap();
        assert_eq!(
            pretty(&p),
            "for i in range(2):\n    for j in range(3):\n        aw.set_yaw(90 * j)\n    aw.land()\n"
        );
    }

    #[test]
    fn parentheses_only_where_needed() {
        let p = parse("x = (a - (b - c)) * -(d + 1) / (2 * e)\ny = (a + b) + c\n").unwrap();
        assert_eq!(pretty(&p), "x = (a - (b - c)) * -(d + 1) / (2 * e)\ny = a + b + c\n");
        assert_eq!(parse(&pretty(&p)).unwrap(), p);
    }
}
