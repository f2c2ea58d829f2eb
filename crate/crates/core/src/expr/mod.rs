//! Real-valued expressions of chart coordinates.
//!
//! Expressions are parsed once against a symbol table of variables and
//! parameters and evaluated into second-order jets, so the value, gradient and
//! Hessian come out exact up to rounding.

mod jet;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

pub use jet::Jet2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl UnaryOp {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Constant(f64),
    Variable(usize),
    Parameter(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

impl Node {
    fn depends_on_variables(&self) -> bool {
        match self {
            Node::Constant(_) | Node::Parameter(_) => false,
            Node::Variable(_) => true,
            Node::Unary(_, c) => c.depends_on_variables(),
            Node::Binary(_, l, r) => l.depends_on_variables() || r.depends_on_variables(),
        }
    }
}

/// A parsed expression together with its symbol table.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    variables: Vec<String>,
    parameters: Vec<String>,
}

/// Parse `text` with the given variable and parameter names.
pub fn parse_expression(text: &str, variables: &[&str], parameters: &[&str]) -> Result<Expression> {
    Expression::parse(text, variables, parameters)
}

impl Expression {
    pub fn parse<S: AsRef<str>, P: AsRef<str>>(
        text: &str,
        variables: &[S],
        parameters: &[P],
    ) -> Result<Self> {
        let variables: Vec<String> = variables.iter().map(|s| s.as_ref().to_string()).collect();
        let parameters: Vec<String> = parameters.iter().map(|s| s.as_ref().to_string()).collect();
        if variables.is_empty() {
            return Err(Error::Invalid("expression needs at least one variable".into()));
        }
        let root = parser::Parser::new(text, &variables, &parameters).parse()?;
        Ok(Expression {
            root,
            variables,
            parameters,
        })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    /// Resolve the parameter values in declaration order.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
        self.parameters
            .iter()
            .map(|p| {
                params
                    .get(p)
                    .copied()
                    .ok_or_else(|| Error::UnboundParameter(p.clone()))
            })
            .collect()
    }

    pub fn eval_jet2(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Jet2> {
        let bound = self.bind(params)?;
        self.eval_bound(point, &bound)
    }

    /// Evaluate with parameters already resolved by [`Expression::bind`].
    pub fn eval_bound(&self, point: &[f64], params: &[f64]) -> Result<Jet2> {
        if point.len() != self.variables.len() {
            return Err(Error::DimensionMismatch {
                expected: self.variables.len(),
                got: point.len(),
            });
        }
        if params.len() != self.parameters.len() {
            return Err(Error::DimensionMismatch {
                expected: self.parameters.len(),
                got: params.len(),
            });
        }
        eval_node(&self.root, point, params)
    }

    /// Plain value, without derivatives.
    pub fn eval_value(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<f64> {
        Ok(self.eval_jet2(point, params)?.value)
    }
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn eval_node(node: &Node, point: &[f64], params: &[f64]) -> Result<Jet2> {
    let n = point.len();
    Ok(match node {
        Node::Constant(c) => Jet2::constant(n, *c),
        Node::Variable(i) => Jet2::variable(n, *i, point[*i]),
        Node::Parameter(i) => Jet2::constant(n, params[*i]),
        Node::Unary(op, child) => {
            let a = eval_node(child, point, params)?;
            match op {
                UnaryOp::Neg => -a,
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Tan => {
                    if a.value.cos().abs() < 1e-300 {
                        return Err(domain("tan at a pole"));
                    }
                    a.tan()
                }
                UnaryOp::Exp => a.exp(),
                UnaryOp::Ln => {
                    if a.value <= 0.0 {
                        return Err(domain(format!("ln of non-positive value {}", a.value)));
                    }
                    a.ln()
                }
                UnaryOp::Sqrt => {
                    if a.value < 0.0 {
                        return Err(domain(format!("sqrt of negative value {}", a.value)));
                    }
                    if a.value == 0.0 {
                        return Err(domain("sqrt at zero is not twice differentiable"));
                    }
                    a.sqrt()
                }
                UnaryOp::Sinh => a.sinh(),
                UnaryOp::Cosh => a.cosh(),
                UnaryOp::Tanh => a.tanh(),
            }
        }
        Node::Binary(op, l, r) => {
            let a = eval_node(l, point, params)?;
            match op {
                BinaryOp::Add => a + eval_node(r, point, params)?,
                BinaryOp::Sub => a - eval_node(r, point, params)?,
                BinaryOp::Mul => a * eval_node(r, point, params)?,
                BinaryOp::Div => {
                    let b = eval_node(r, point, params)?;
                    if b.value == 0.0 {
                        return Err(domain("division by zero"));
                    }
                    a / b
                }
                BinaryOp::Pow => {
                    let b = eval_node(r, point, params)?;
                    if !r.depends_on_variables() {
                        let e = b.value;
                        let integer = e.fract() == 0.0 && e.abs() < 1024.0;
                        if integer {
                            if a.value == 0.0 && e < 0.0 {
                                return Err(domain("zero raised to a negative power"));
                            }
                        } else if a.value <= 0.0 {
                            return Err(domain(format!(
                                "non-positive base {} with non-integer exponent {}",
                                a.value, e
                            )));
                        }
                        a.powf(e)
                    } else {
                        if a.value <= 0.0 {
                            return Err(domain(format!(
                                "non-positive base {} with variable exponent",
                                a.value
                            )));
                        }
                        (b * a.ln()).exp()
                    }
                }
            }
        }
    })
}

struct Printer<'a> {
    node: &'a Node,
    variables: &'a [String],
    parameters: &'a [String],
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Printer {
            node,
            variables: self.variables,
            parameters: self.parameters,
        };
        match self.node {
            Node::Constant(c) if *c < 0.0 => write!(f, "(-{})", -c),
            Node::Constant(c) => write!(f, "{c}"),
            Node::Variable(i) => write!(f, "{}", self.variables[*i]),
            Node::Parameter(i) => write!(f, "{}", self.parameters[*i]),
            Node::Unary(UnaryOp::Neg, c) => write!(f, "(-{})", sub(c)),
            Node::Unary(op, c) => write!(f, "{}({})", op.name(), sub(c)),
            Node::Binary(op, l, r) => write!(f, "({}{}{})", sub(l), op.symbol(), sub(r)),
        }
    }
}

impl fmt::Display for Expression {
    /// Fully parenthesized form; parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            node: &self.root,
            variables: &self.variables,
            parameters: &self.parameters,
        }
        .fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn parses_product_of_functions() {
        let e = parse_expression("cos(u1)*sin(u2)", &["u1", "u2"], &[]).unwrap();
        assert_eq!(
            e.root(),
            &Node::Binary(
                BinaryOp::Mul,
                Box::new(Node::Unary(UnaryOp::Cos, Box::new(Node::Variable(0)))),
                Box::new(Node::Unary(UnaryOp::Sin, Box::new(Node::Variable(1)))),
            )
        );
    }

    #[test]
    fn incomplete_input_reports_offset() {
        let err = parse_expression("u1 + ", &["u1"], &[]).unwrap_err();
        assert!(matches!(err, Error::Syntax { offset: 5, .. }), "{err:?}");
    }

    #[test]
    fn parameter_lookup() {
        let e = parse_expression("r*cos(u1)", &["u1"], &["r"]).unwrap();
        match e.root() {
            Node::Binary(BinaryOp::Mul, l, _) => assert_eq!(**l, Node::Parameter(0)),
            other => panic!("unexpected tree {other:?}"),
        }
        let mut p = no_params();
        assert!(matches!(
            e.eval_jet2(&[0.0], &p),
            Err(Error::UnboundParameter(_))
        ));
        p.insert("r".into(), 2.0);
        assert_eq!(e.eval_value(&[0.0], &p).unwrap(), 2.0);
    }

    #[test]
    fn unknown_identifier_and_arity() {
        assert!(matches!(
            parse_expression("u1 + w", &["u1"], &[]),
            Err(Error::UnknownIdentifier { offset: 5, .. })
        ));
        assert!(matches!(
            parse_expression("sin + 1", &["u1"], &[]),
            Err(Error::Arity { .. })
        ));
        assert!(matches!(
            parse_expression("u1(2)", &["u1"], &[]),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn polynomial_jet() {
        let e = parse_expression("u1^2*u2", &["u1", "u2"], &[]).unwrap();
        let j = e.eval_jet2(&[3.0, 2.0], &no_params()).unwrap();
        assert_eq!(j.value, 18.0);
        assert_eq!(j.gradient, vec![12.0, 9.0]);
        assert_eq!(j.hessian_matrix(), vec![vec![4.0, 6.0], vec![6.0, 0.0]]);
    }

    #[test]
    fn sine_at_origin() {
        let e = parse_expression("sin(u1)", &["u1"], &[]).unwrap();
        let j = e.eval_jet2(&[0.0], &no_params()).unwrap();
        assert_eq!((j.value, j.gradient[0], j.hessian(0, 0)), (0.0, 1.0, 0.0));
    }

    #[test]
    fn precedence() {
        let e = parse_expression("2+3*4^2", &["u1"], &[]).unwrap();
        assert_eq!(e.eval_value(&[0.0], &no_params()).unwrap(), 50.0);
        let e = parse_expression("-u1^2", &["u1"], &[]).unwrap();
        assert_eq!(e.eval_value(&[3.0], &no_params()).unwrap(), -9.0);
        let e = parse_expression("2^3^2", &["u1"], &[]).unwrap();
        assert_eq!(e.eval_value(&[0.0], &no_params()).unwrap(), 512.0);
        let e = parse_expression("8/2/2", &["u1"], &[]).unwrap();
        assert_eq!(e.eval_value(&[0.0], &no_params()).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors() {
        let p = no_params();
        for (text, x) in [
            ("sqrt(u1)", -1.0),
            ("ln(u1)", 0.0),
            ("1/u1", 0.0),
            ("u1^0.5", -2.0),
            ("u1^u1", -1.0),
        ] {
            let e = parse_expression(text, &["u1"], &[]).unwrap();
            assert!(matches!(e.eval_jet2(&[x], &p), Err(Error::Domain(_))), "{text}");
        }
        // integer exponent of a negative base is fine
        let e = parse_expression("u1^3", &["u1"], &[]).unwrap();
        assert_eq!(e.eval_value(&[-2.0], &p).unwrap(), -8.0);
    }

    #[test]
    fn variable_exponent_uses_exp_ln() {
        // x^x at 2: value 4, d = x^x (ln x + 1), d2 = x^x((ln x + 1)^2 + 1/x)
        let e = parse_expression("u1^u1", &["u1"], &[]).unwrap();
        let j = e.eval_jet2(&[2.0], &no_params()).unwrap();
        let l = 2f64.ln() + 1.0;
        assert!((j.value - 4.0).abs() < 1e-14);
        assert!((j.gradient[0] - 4.0 * l).abs() < 1e-13);
        assert!((j.hessian(0, 0) - 4.0 * (l * l + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn print_parse_round_trip() {
        let vars = ["u1", "u2"];
        for text in [
            "cos(u1)*sin(u2)",
            "-u1^2 + 2.5e-3*u2",
            "(u1+u2)/(1+u1^2)^0.5",
            "exp(-u1)*tanh(u2) - sqrt(2+u1^2)",
        ] {
            let e = parse_expression(text, &vars, &[]).unwrap();
            let printed = e.to_string();
            let again = parse_expression(&printed, &vars, &[]).unwrap();
            assert_eq!(e, again, "{text} -> {printed}");
        }
    }
}
