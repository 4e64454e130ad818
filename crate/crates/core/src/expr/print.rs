use std::fmt::{self, Write};

use super::{BinaryOp, Node, UnaryOp};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Const(c) if *c < 0.0 || c.is_sign_negative() => PREC_NEG,
        Node::Const(_) | Node::Var { .. } => PREC_ATOM,
        Node::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Node::Unary(..) => PREC_ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_MUL,
        Node::Pow(..) => PREC_POW,
    }
}

fn write_wrapped(f: &mut dyn Write, node: &Node, wrap: bool) -> fmt::Result {
    if wrap {
        f.write_char('(')?;
        write_node(f, node)?;
        f.write_char(')')
    } else {
        write_node(f, node)
    }
}

/// Prints with the minimal parentheses that reparse to the same tree.
pub(super) fn write_node(f: &mut dyn Write, node: &Node) -> fmt::Result {
    match node {
        Node::Const(c) => write!(f, "{c}"),
        Node::Var { name, .. } => f.write_str(name),
        Node::Unary(UnaryOp::Neg, a) => {
            f.write_char('-')?;
            write_wrapped(f, a, precedence(a) < PREC_NEG)
        }
        Node::Unary(op, a) => {
            f.write_str(op.function_name().unwrap_or("?"))?;
            write_wrapped(f, a, true)
        }
        Node::Binary(op, a, b) => {
            let (prec, sym) = match op {
                BinaryOp::Add => (PREC_ADD, " + "),
                BinaryOp::Sub => (PREC_ADD, " - "),
                BinaryOp::Mul => (PREC_MUL, "*"),
                BinaryOp::Div => (PREC_MUL, "/"),
            };
            write_wrapped(f, a, precedence(a) < prec)?;
            f.write_str(sym)?;
            write_wrapped(f, b, precedence(b) <= prec)
        }
        Node::Pow(a, e) => {
            write_wrapped(f, a, precedence(a) < PREC_ATOM)?;
            if *e < 0.0 || e.is_sign_negative() {
                write!(f, "^({e})")
            } else {
                write!(f, "^{e}")
            }
        }
    }
}
