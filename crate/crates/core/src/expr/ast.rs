use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Tanh,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "exp" => Function::Exp,
            "ln" => Function::Ln,
            "sqrt" => Function::Sqrt,
            "tanh" => Function::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Sqrt => "sqrt",
            Function::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }
}

/// Expression tree node. Coordinates are referenced by index into the
/// owning [`Expression`]'s coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(f64),
    Constant(Constant),
    Coordinate(usize),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Function, Box<Node>),
    /// Base raised to a literal exponent.
    Pow(Box<Node>, f64),
}

/// A parsed scalar field on a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    coords: Arc<[String]>,
}

impl Expression {
    pub(crate) fn new(root: Node, coords: Arc<[String]>) -> Self {
        Self { root, coords }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coords
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    /// Plain value at a point, without derivatives.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, super::EvalError> {
        if point.len() != self.dimension() {
            return Err(super::EvalError::DimensionMismatch {
                expected: self.dimension(),
                got: point.len(),
            });
        }
        eval_value(&self.root, point)
    }

    /// True when the tree contains no coordinate references.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Number(_) | Node::Constant(_) => true,
                Node::Coordinate(_) => false,
                Node::Neg(a) | Node::Call(_, a) | Node::Pow(a, _) => walk(a),
                Node::Binary(_, a, b) => walk(a) && walk(b),
            }
        }
        walk(&self.root)
    }
}

pub(crate) fn eval_value(node: &Node, point: &[f64]) -> Result<f64, super::EvalError> {
    use super::EvalError;
    let v = match node {
        Node::Number(v) => *v,
        Node::Constant(c) => c.value(),
        Node::Coordinate(i) => point[*i],
        Node::Neg(a) => -eval_value(a, point)?,
        Node::Binary(op, a, b) => {
            let a = eval_value(a, point)?;
            let b = eval_value(b, point)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::Domain {
                            function: "division",
                            value: b,
                        });
                    }
                    a / b
                }
            }
        }
        Node::Call(f, a) => {
            let a = eval_value(a, point)?;
            super::jet::check_domain(*f, a)?;
            match f {
                Function::Sin => a.sin(),
                Function::Cos => a.cos(),
                Function::Tan => a.tan(),
                Function::Exp => a.exp(),
                Function::Ln => a.ln(),
                Function::Sqrt => a.sqrt(),
                Function::Tanh => a.tanh(),
            }
        }
        Node::Pow(a, p) => {
            let a = eval_value(a, point)?;
            super::jet::check_pow_domain(a, *p)?;
            super::jet::powf_literal(a, *p)
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow {
            context: "expression value",
        })
    }
}

struct Printer<'a> {
    node: &'a Node,
    coords: &'a [String],
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Printer {
            node,
            coords: self.coords,
        };
        match self.node {
            Node::Number(v) => write!(f, "{v}"),
            Node::Constant(Constant::Pi) => f.write_str("pi"),
            Node::Constant(Constant::E) => f.write_str("e"),
            Node::Coordinate(i) => f.write_str(&self.coords[*i]),
            Node::Neg(a) => write!(f, "(-{})", sub(a)),
            Node::Binary(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
            Node::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
            Node::Pow(a, p) => {
                if matches!(**a, Node::Pow(..)) {
                    write!(f, "({})", sub(a))?;
                } else {
                    write!(f, "{}", sub(a))?;
                }
                if *p < 0.0 {
                    write!(f, "^({p})")
                } else {
                    write!(f, "^{p}")
                }
            }
        }
    }
}

/// Fully parenthesized rendering that reparses to an identical tree.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            node: &self.root,
            coords: &self.coords,
        }
        .fmt(f)
    }
}
