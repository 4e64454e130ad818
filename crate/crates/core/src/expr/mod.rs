//! Scalar expressions over an ordered list of named coordinates.
//!
//! Every function handled by the library (Hamiltonians, contact-form
//! coefficients, section components) is an [`Expr`]. Expressions are parsed
//! once against a coordinate list, after which each variable node carries the
//! index of its coordinate. Evaluation is generic over [`Scalar`], so the same
//! tree yields plain values, gradients ([`Jet1`]) or gradients and Hessians
//! ([`Jet2`]) without any symbolic differentiation.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;          (* exponent must be constant *)
//! primary = number | ident | func "(" expr ")" | "(" expr ")" ;
//! func    = "exp" | "log" | "sin" | "cos" | "sqrt" | "tanh" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ exponent ] ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`, and it is right
//! associative. The exponent is folded to a real constant at parse time.

mod eval;
mod jet;
mod parse;
mod print;
mod random;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::Scalar;
pub use jet::{Jet1, Jet2};
pub use random::random_polynomial;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
    #[error("variable `{name}` is not bound (index {index}, {bound} values supplied)")]
    Unbound { name: String, index: usize, bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Tanh,
}

impl UnaryOp {
    pub(crate) fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Log => Some("log"),
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Sqrt => Some("sqrt"),
            UnaryOp::Tanh => Some("tanh"),
        }
    }

    pub(crate) fn from_function_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sqrt" => UnaryOp::Sqrt,
            "tanh" => UnaryOp::Tanh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A node of the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var { name: String, index: usize },
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    /// Power with a constant real exponent.
    Pow(Box<Node>, f64),
}

/// An immutable parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
}

impl Expr {
    /// Parses `source` against the ordered coordinate list `coords`.
    pub fn parse<S: AsRef<str>>(source: &str, coords: &[S]) -> Result<Self, ExprError> {
        let names: Vec<&str> = coords.iter().map(|s| s.as_ref()).collect();
        parse::parse(source, &names).map(|root| Expr { root })
    }

    pub fn from_node(root: Node) -> Self {
        Expr { root }
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn constant(c: f64) -> Self {
        Expr { root: Node::Const(c) }
    }

    pub fn var(name: impl Into<String>, index: usize) -> Self {
        Expr {
            root: Node::Var {
                name: name.into(),
                index,
            },
        }
    }

    pub fn powf(self, exponent: f64) -> Self {
        Expr {
            root: Node::Pow(Box::new(self.root), exponent),
        }
    }

    fn binary(self, op: BinaryOp, rhs: Expr) -> Self {
        Expr {
            root: Node::Binary(op, Box::new(self.root), Box::new(rhs.root)),
        }
    }

    /// True when the tree is the literal constant `c`.
    pub fn is_constant(&self, c: f64) -> bool {
        matches!(self.root, Node::Const(v) if v == c)
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_vars(&self.root, &mut out);
        out
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        fn walk(node: &Node) -> Option<usize> {
            match node {
                Node::Const(_) => None,
                Node::Var { index, .. } => Some(*index),
                Node::Unary(_, a) | Node::Pow(a, _) => walk(a),
                Node::Binary(_, a, b) => match (walk(a), walk(b)) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                },
            }
        }
        walk(&self.root)
    }

    /// Evaluates at `point`, given in coordinate order.
    pub fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        eval::eval_node(&self.root, point)
    }

    /// Evaluates with variables looked up by name.
    pub fn eval_named(
        &self,
        values: &std::collections::HashMap<String, f64>,
    ) -> Result<f64, ExprError> {
        eval::eval_named(&self.root, values)
    }

    /// Value and gradient at `point`.
    pub fn eval_jet1(&self, point: &[f64]) -> Result<Jet1, ExprError> {
        let vars: Vec<Jet1> = (0..point.len())
            .map(|i| Jet1::variable(i, point.len(), point[i]))
            .collect();
        eval::eval_node(&self.root, &vars)
    }

    /// Value, gradient and Hessian at `point`.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, ExprError> {
        let vars: Vec<Jet2> = (0..point.len())
            .map(|i| Jet2::variable(i, point.len(), point[i]))
            .collect();
        eval::eval_node(&self.root, &vars)
    }

    /// Generic evaluation with caller-seeded variable values.
    pub fn eval_with<S: Scalar>(&self, vars: &[S]) -> Result<S, ExprError> {
        eval::eval_node(&self.root, vars)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            root: Node::Unary(UnaryOp::Neg, Box::new(self.root)),
        }
    }
}

macro_rules! binary_ops {
    ($($trait:ident $method:ident $op:ident),*) => {$(
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.binary(BinaryOp::$op, rhs)
            }
        }
    )*};
}

binary_ops!(Add add Add, Sub sub Sub, Mul mul Mul, Div div Div);

fn collect_vars(node: &Node, out: &mut BTreeSet<String>) {
    match node {
        Node::Const(_) => {}
        Node::Var { name, .. } => {
            out.insert(name.clone());
        }
        Node::Unary(_, a) | Node::Pow(a, _) => collect_vars(a, out),
        Node::Binary(_, a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_node(f, &self.root)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_node(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QPZ: [&str; 3] = ["q", "p", "z"];

    #[test]
    fn single_identifier() {
        let e = Expr::parse("p", &QPZ).unwrap();
        assert_eq!(
            e.node(),
            &Node::Var {
                name: "p".into(),
                index: 1
            }
        );
    }

    #[test]
    fn eta_coefficient_structure() {
        let e = Expr::parse("z - p*q", &QPZ).unwrap();
        let expected = Expr::var("z", 2) - Expr::var("p", 1) * Expr::var("q", 0);
        assert_eq!(e, expected);
    }

    #[test]
    fn lifted_hamiltonian() {
        let coords = ["q", "p", "z", "r"];
        let e = Expr::parse("-(r*p)", &coords).unwrap();
        let expected = -(Expr::var("r", 3) * Expr::var("p", 1));
        assert_eq!(e, expected);
        assert_eq!(e.eval(&[2.0, 3.0, 5.0, 7.0]).unwrap(), -21.0);
    }

    #[test]
    fn evaluates_variable() {
        let e = Expr::parse("p", &QPZ).unwrap();
        assert_eq!(e.eval(&[2.0, 3.0, 5.0]).unwrap(), 3.0);
    }

    #[test]
    fn log_of_zero_is_domain_error() {
        let e = Expr::parse("log(z)", &QPZ).unwrap();
        let err = e.eval(&[2.0, 3.0, 0.0]).unwrap_err();
        match err {
            ExprError::Domain { node, .. } => assert_eq!(node, "log(z)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_names_node() {
        let e = Expr::parse("q/(p-3)", &QPZ).unwrap();
        let err = e.eval(&[1.0, 3.0, 0.0]).unwrap_err();
        assert!(matches!(err, ExprError::Domain { ref node, .. } if node == "q/(p - 3)"));
    }

    #[test]
    fn bilinear_jet() {
        let e = Expr::parse("p*q", &QPZ).unwrap();
        let j = e.eval_jet2(&[2.0, 3.0, 5.0]).unwrap();
        assert_eq!(j.value, 6.0);
        assert_eq!(j.grad, vec![3.0, 2.0, 0.0]);
        for a in 0..3 {
            for b in 0..3 {
                let expected = if (a, b) == (0, 1) || (a, b) == (1, 0) { 1.0 } else { 0.0 };
                assert_eq!(j.hessian(a, b), expected);
            }
        }
    }

    #[test]
    fn coordinate_jet() {
        let e = Expr::parse("z", &QPZ).unwrap();
        let j = e.eval_jet2(&[2.0, 3.0, 5.0]).unwrap();
        assert_eq!(j.grad, vec![0.0, 0.0, 1.0]);
        assert!(j.hess.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn free_variable_sets() {
        let vars = |s: &str| Expr::parse(s, &QPZ).unwrap().free_variables();
        assert_eq!(vars("p"), BTreeSet::from(["p".to_string()]));
        assert_eq!(
            vars("z - p*q"),
            BTreeSet::from(["q".to_string(), "p".to_string(), "z".to_string()])
        );
        assert!(vars("3").is_empty());
    }

    #[test]
    fn unknown_identifier_reports_name() {
        let err = Expr::parse("p + w", &QPZ).unwrap_err();
        assert_eq!(
            err,
            ExprError::UnknownIdentifier {
                name: "w".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = Expr::parse("p * (q + ", &QPZ).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 9, .. }), "{err:?}");
        let err = Expr::parse("p $ q", &QPZ).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 2, .. }), "{err:?}");
        assert!(matches!(
            Expr::parse("", &QPZ),
            Err(ExprError::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            Expr::parse("q^p", &QPZ),
            Err(ExprError::Syntax { .. })
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        let at = [2.0, 3.0, 5.0];
        let v = |s: &str| Expr::parse(s, &QPZ).unwrap().eval(&at).unwrap();
        assert_eq!(v("-q^2"), -4.0);
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("z - p - q"), 0.0);
        assert_eq!(v("z / p / q"), 5.0 / 3.0 / 2.0);
        assert_eq!(v("q^-1"), 0.5);
        assert_eq!(v("q^(1/2)"), 2f64.sqrt());
        assert_eq!(v("1.5e1 + .5"), 15.5);
    }

    #[test]
    fn printer_round_trips() {
        for src in [
            "z - p*q",
            "-(r*p)",
            "a - (b - c)",
            "(a + b)*c",
            "a/(b*c)",
            "--a",
            "-a^2",
            "(-a)^2",
            "(a^2)^3",
            "exp(-a)*sin(b)/sqrt(c + 1)",
            "a^(-0.5)",
            "0.1 + 1e-7*a",
        ] {
            let coords = ["a", "b", "c", "p", "q", "r", "z"];
            let e = Expr::parse(src, &coords).unwrap();
            let printed = e.to_string();
            let again = Expr::parse(&printed, &coords).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }
}
