use super::ast::{BinaryOp, Expression, Function, Node};
use super::EvalError;

/// Value, gradient and Hessian of a scalar field at one point.
///
/// The Hessian is stored as a full row-major `n × n` array but only ever
/// written through [`Jet2::set_hessian`], which mirrors each entry, so
/// `hessian(a, b) == hessian(b, a)` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, n: usize) -> Self {
        Self {
            value,
            gradient: vec![0.0; n],
            hessian: vec![0.0; n * n],
        }
    }

    /// The coordinate function `x_index`.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut j = Self::constant(value, n);
        j.gradient[index] = 1.0;
        j
    }

    /// Builds a jet from raw parts; the Hessian is symmetrized from its upper triangle.
    pub fn from_parts(value: f64, gradient: Vec<f64>, hessian: &[f64]) -> Self {
        let n = gradient.len();
        assert_eq!(hessian.len(), n * n, "hessian must be n x n");
        let mut j = Self {
            value,
            gradient,
            hessian: vec![0.0; n * n],
        };
        for a in 0..n {
            for b in a..n {
                j.set_hessian(a, b, hessian[a * n + b]);
            }
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    pub fn hessian(&self, a: usize, b: usize) -> f64 {
        self.hessian[a * self.dim() + b]
    }

    /// Row-major `n × n` Hessian.
    pub fn hessian_matrix(&self) -> &[f64] {
        &self.hessian
    }

    fn set_hessian(&mut self, a: usize, b: usize, v: f64) {
        let n = self.dim();
        self.hessian[a * n + b] = v;
        self.hessian[b * n + a] = v;
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|v| v.is_finite())
            && self.hessian.iter().all(|v| v.is_finite())
    }

    fn add(&self, o: &Self, sign: f64) -> Self {
        Self {
            value: self.value + sign * o.value,
            gradient: self
                .gradient
                .iter()
                .zip(&o.gradient)
                .map(|(a, b)| a + sign * b)
                .collect(),
            hessian: self
                .hessian
                .iter()
                .zip(&o.hessian)
                .map(|(a, b)| a + sign * b)
                .collect(),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.dim();
        let mut out = Self::constant(self.value * o.value, n);
        for a in 0..n {
            out.gradient[a] = self.gradient[a] * o.value + self.value * o.gradient[a];
        }
        for a in 0..n {
            for b in a..n {
                let h = self.hessian(a, b) * o.value
                    + self.value * o.hessian(a, b)
                    + self.gradient[a] * o.gradient[b]
                    + self.gradient[b] * o.gradient[a];
                out.set_hessian(a, b, h);
            }
        }
        out
    }

    /// Composes a univariate function with known value and first two
    /// derivatives at `self.value`.
    fn compose(&self, f: f64, df: f64, d2f: f64) -> Self {
        let n = self.dim();
        let mut out = Self::constant(f, n);
        for a in 0..n {
            out.gradient[a] = df * self.gradient[a];
        }
        for a in 0..n {
            for b in a..n {
                let h = df * self.hessian(a, b) + d2f * self.gradient[a] * self.gradient[b];
                out.set_hessian(a, b, h);
            }
        }
        out
    }

    fn scale(&self, s: f64) -> Self {
        Self {
            value: s * self.value,
            gradient: self.gradient.iter().map(|v| s * v).collect(),
            hessian: self.hessian.iter().map(|v| s * v).collect(),
        }
    }
}

pub(crate) fn check_domain(f: Function, a: f64) -> Result<(), EvalError> {
    let bad = match f {
        Function::Ln => a <= 0.0,
        Function::Sqrt => a < 0.0,
        Function::Tan => a.cos() == 0.0,
        _ => false,
    };
    if bad {
        Err(EvalError::Domain {
            function: f.name(),
            value: a,
        })
    } else {
        Ok(())
    }
}

fn is_integer(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() < 1e9
}

pub(crate) fn check_pow_domain(a: f64, p: f64) -> Result<(), EvalError> {
    if (!is_integer(p) && a < 0.0) || (a == 0.0 && p < 0.0) {
        Err(EvalError::Domain {
            function: "power",
            value: a,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn powf_literal(a: f64, p: f64) -> f64 {
    if is_integer(p) {
        a.powi(p as i32)
    } else {
        a.powf(p)
    }
}

fn jet(node: &Node, point: &[f64]) -> Result<Jet2, EvalError> {
    let n = point.len();
    let out = match node {
        Node::Number(v) => Jet2::constant(*v, n),
        Node::Constant(c) => Jet2::constant(c.value(), n),
        Node::Coordinate(i) => Jet2::variable(point[*i], *i, n),
        Node::Neg(a) => jet(a, point)?.scale(-1.0),
        Node::Binary(op, a, b) => {
            let a = jet(a, point)?;
            let b = jet(b, point)?;
            match op {
                BinaryOp::Add => a.add(&b, 1.0),
                BinaryOp::Sub => a.add(&b, -1.0),
                BinaryOp::Mul => a.mul(&b),
                BinaryOp::Div => {
                    let t = b.value;
                    if t == 0.0 {
                        return Err(EvalError::Domain {
                            function: "division",
                            value: t,
                        });
                    }
                    let recip = b.compose(1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t));
                    a.mul(&recip)
                }
            }
        }
        Node::Call(f, a) => {
            let a = jet(a, point)?;
            let t = a.value;
            check_domain(*f, t)?;
            let (v, d1, d2) = match f {
                Function::Sin => (t.sin(), t.cos(), -t.sin()),
                Function::Cos => (t.cos(), -t.sin(), -t.cos()),
                Function::Tan => {
                    let v = t.tan();
                    let sec2 = 1.0 + v * v;
                    (v, sec2, 2.0 * v * sec2)
                }
                Function::Exp => {
                    let v = t.exp();
                    (v, v, v)
                }
                Function::Ln => (t.ln(), 1.0 / t, -1.0 / (t * t)),
                Function::Sqrt => {
                    let v = t.sqrt();
                    (v, 0.5 / v, -0.25 / (v * t))
                }
                Function::Tanh => {
                    let v = t.tanh();
                    let s = 1.0 - v * v;
                    (v, s, -2.0 * v * s)
                }
            };
            a.compose(v, d1, d2)
        }
        Node::Pow(a, p) => {
            let a = jet(a, point)?;
            let t = a.value;
            check_pow_domain(t, *p)?;
            let p = *p;
            if p == 0.0 {
                Jet2::constant(1.0, n)
            } else if p == 1.0 {
                a
            } else {
                let v = powf_literal(t, p);
                let d1 = p * powf_literal(t, p - 1.0);
                let d2 = if p == 2.0 {
                    2.0
                } else {
                    p * (p - 1.0) * powf_literal(t, p - 2.0)
                };
                a.compose(v, d1, d2)
            }
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(EvalError::Overflow {
            context: "expression jet",
        })
    }
}

/// Evaluates `e` and its exact first and second partial derivatives at `point`.
pub fn evaluate_jet2(e: &Expression, point: &[f64]) -> Result<Jet2, EvalError> {
    if point.len() != e.dimension() {
        return Err(EvalError::DimensionMismatch {
            expected: e.dimension(),
            got: point.len(),
        });
    }
    jet(e.root(), point)
}

impl Expression {
    pub fn jet2(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        evaluate_jet2(self, point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn jet_of(src: &str, coords: &[&str], point: &[f64]) -> Jet2 {
        evaluate_jet2(&parse_expression(src, coords).unwrap(), point).unwrap()
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let j = jet_of("5", &["x1", "x2"], &[0.3, -1.0]);
        assert_eq!(j.value(), 5.0);
        assert!(j.gradient().iter().all(|&g| g == 0.0));
        assert!(j.hessian_matrix().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn bilinear() {
        let j = jet_of("x1*x2", &["x1", "x2"], &[2.0, 3.0]);
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.gradient(), &[3.0, 2.0]);
        assert_eq!(j.hessian(0, 1), 1.0);
        assert_eq!(j.hessian(1, 0), 1.0);
        assert_eq!(j.hessian(0, 0), 0.0);
        assert_eq!(j.hessian(1, 1), 0.0);
    }

    #[test]
    fn quotient_and_powers() {
        // f = x / y at (1, 2): f_x = 1/2, f_y = -1/4, f_xy = -1/4, f_yy = 2x/y^3 = 1/4
        let j = jet_of("x/y", &["x", "y"], &[1.0, 2.0]);
        assert_eq!(j.value(), 0.5);
        assert_eq!(j.gradient(), &[0.5, -0.25]);
        assert_eq!(j.hessian(0, 0), 0.0);
        assert_eq!(j.hessian(0, 1), -0.25);
        assert_eq!(j.hessian(1, 1), 0.25);
        // x^-2 at 2: -2/8, 6/16
        let j = jet_of("x^-2", &["x"], &[2.0]);
        assert_eq!(j.value(), 0.25);
        assert_eq!(j.gradient(), &[-0.25]);
        assert_eq!(j.hessian(0, 0), 0.375);
        // x^0.5 matches sqrt
        let a = jet_of("x^0.5", &["x"], &[3.0]);
        let b = jet_of("sqrt(x)", &["x"], &[3.0]);
        assert!((a.value() - b.value()).abs() < 1e-15);
        assert!((a.gradient()[0] - b.gradient()[0]).abs() < 1e-15);
        assert!((a.hessian(0, 0) - b.hessian(0, 0)).abs() < 1e-15);
    }

    #[test]
    fn negative_base_integer_power() {
        let j = jet_of("x^3", &["x"], &[-2.0]);
        assert_eq!(j.value(), -8.0);
        assert_eq!(j.gradient(), &[12.0]);
        assert_eq!(j.hessian(0, 0), -12.0);
    }

    #[test]
    fn domain_errors() {
        let e = parse_expression("ln(x)", &["x"]).unwrap();
        assert!(matches!(
            evaluate_jet2(&e, &[0.0]),
            Err(EvalError::Domain { function: "ln", .. })
        ));
        let e = parse_expression("sqrt(x)", &["x"]).unwrap();
        assert!(matches!(
            evaluate_jet2(&e, &[-1.0]),
            Err(EvalError::Domain { function: "sqrt", .. })
        ));
        // sqrt at 0 has an infinite derivative
        assert!(matches!(
            evaluate_jet2(&e, &[0.0]),
            Err(EvalError::Overflow { .. })
        ));
        let e = parse_expression("x^0.5", &["x"]).unwrap();
        assert!(evaluate_jet2(&e, &[-1.0]).is_err());
        let e = parse_expression("1/x", &["x"]).unwrap();
        assert!(evaluate_jet2(&e, &[0.0]).is_err());
        let e = parse_expression("exp(x)", &["x"]).unwrap();
        assert!(matches!(
            evaluate_jet2(&e, &[1000.0]),
            Err(EvalError::Overflow { .. })
        ));
        assert!(matches!(
            evaluate_jet2(&e, &[1.0, 2.0]),
            Err(EvalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hessian_is_symmetric_bitwise() {
        let j = jet_of(
            "sin(x*y)*exp(z/(1+x^2)) - tanh(x*z)",
            &["x", "y", "z"],
            &[0.3, -0.7, 1.1],
        );
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(j.hessian(a, b).to_bits(), j.hessian(b, a).to_bits());
            }
        }
    }
}
