use std::collections::HashMap;

use super::{BinaryOp, ExprError, Node, UnaryOp};

/// Number-like values the evaluator can propagate through a tree.
///
/// Every elementary function goes through [`Scalar::chain`], which receives
/// the function's value and first two derivatives at the current value; the
/// jet types apply the chain rule from those.
pub trait Scalar: Clone {
    /// Whether this type carries derivatives. Points where a function is
    /// continuous but not differentiable are only rejected when it does.
    const DIFFERENTIATED: bool;

    fn constant(c: f64, dim: usize) -> Self;
    fn value(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Quotient; the caller has already rejected a zero denominator.
    fn div(&self, rhs: &Self) -> Self {
        let w = rhs.value();
        self.mul(&rhs.chain(1.0 / w, -1.0 / (w * w), 2.0 / (w * w * w)))
    }
    /// `phi(self)` where `d0 = phi(v)`, `d1 = phi'(v)`, `d2 = phi''(v)`.
    fn chain(&self, d0: f64, d1: f64, d2: f64) -> Self;
}

impl Scalar for f64 {
    const DIFFERENTIATED: bool = false;

    fn constant(c: f64, _dim: usize) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn chain(&self, d0: f64, _d1: f64, _d2: f64) -> Self {
        d0
    }
}

fn domain(node: &Node, reason: &'static str) -> ExprError {
    ExprError::Domain {
        node: node.to_string(),
        reason,
    }
}

pub(super) fn eval_node<S: Scalar>(node: &Node, vars: &[S]) -> Result<S, ExprError> {
    let lookup = |name: &str, index: usize| {
        vars.get(index).cloned().ok_or_else(|| ExprError::Unbound {
            name: name.to_string(),
            index,
            bound: vars.len(),
        })
    };
    eval_inner(node, &lookup, vars.len())
}

pub(super) fn eval_named(node: &Node, values: &HashMap<String, f64>) -> Result<f64, ExprError> {
    let lookup = |name: &str, index: usize| {
        values.get(name).copied().ok_or_else(|| ExprError::Unbound {
            name: name.to_string(),
            index,
            bound: values.len(),
        })
    };
    eval_inner(node, &lookup, 0)
}

fn eval_inner<S: Scalar>(
    node: &Node,
    lookup: &dyn Fn(&str, usize) -> Result<S, ExprError>,
    dim: usize,
) -> Result<S, ExprError> {
    match node {
        Node::Const(c) => Ok(S::constant(*c, dim)),
        Node::Var { name, index } => lookup(name, *index),
        Node::Unary(op, a) => {
            let x = eval_inner(a, lookup, dim)?;
            let v = x.value();
            Ok(match op {
                UnaryOp::Neg => x.chain(-v, -1.0, 0.0),
                UnaryOp::Exp => {
                    let e = v.exp();
                    x.chain(e, e, e)
                }
                UnaryOp::Log => {
                    if v <= 0.0 {
                        return Err(domain(node, "logarithm of a non-positive value"));
                    }
                    x.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
                }
                UnaryOp::Sin => x.chain(v.sin(), v.cos(), -v.sin()),
                UnaryOp::Cos => x.chain(v.cos(), -v.sin(), -v.cos()),
                UnaryOp::Sqrt => {
                    if v < 0.0 {
                        return Err(domain(node, "square root of a negative value"));
                    }
                    if v == 0.0 {
                        if S::DIFFERENTIATED {
                            return Err(domain(node, "square root is not differentiable at zero"));
                        }
                        return Ok(S::constant(0.0, dim));
                    }
                    let s = v.sqrt();
                    x.chain(s, 0.5 / s, -0.25 / (s * v))
                }
                UnaryOp::Tanh => {
                    let t = v.tanh();
                    let d1 = 1.0 - t * t;
                    x.chain(t, d1, -2.0 * t * d1)
                }
            })
        }
        Node::Binary(op, a, b) => {
            let x = eval_inner(a, lookup, dim)?;
            let y = eval_inner(b, lookup, dim)?;
            Ok(match op {
                BinaryOp::Add => x.add(&y),
                BinaryOp::Sub => x.sub(&y),
                BinaryOp::Mul => x.mul(&y),
                BinaryOp::Div => {
                    let w = y.value();
                    if w == 0.0 {
                        return Err(domain(node, "division by zero"));
                    }
                    x.div(&y)
                }
            })
        }
        Node::Pow(a, e) => {
            let x = eval_inner(a, lookup, dim)?;
            let v = x.value();
            let e = *e;
            if e == 0.0 {
                return Ok(S::constant(1.0, dim));
            }
            let integer = e.fract() == 0.0;
            if v < 0.0 && !integer {
                return Err(domain(node, "negative base with a non-integer exponent"));
            }
            if v == 0.0 && e < 0.0 {
                return Err(domain(node, "zero raised to a negative power"));
            }
            if v == 0.0 && !integer && e < 2.0 && S::DIFFERENTIATED {
                return Err(domain(node, "power is not twice differentiable at zero"));
            }
            let d0 = pow(v, e);
            let d1 = e * pow(v, e - 1.0);
            let d2 = e * (e - 1.0) * pow(v, e - 2.0);
            Ok(x.chain(d0, d1, d2))
        }
    }
}

fn pow(v: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
        v.powi(e as i32)
    } else {
        v.powf(e)
    }
}
