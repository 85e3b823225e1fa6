use super::{EvalError, Expression, Jet2};

/// Step sizes for the central-difference oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub gradient: f64,
    pub hessian: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            gradient: 1e-6,
            hessian: 1e-4,
        }
    }
}

/// Central-difference jet with one step size for both orders.
pub fn finite_difference_jet2(e: &Expression, point: &[f64], step: f64) -> Result<Jet2, EvalError> {
    finite_difference_jet2_with(
        e,
        point,
        FdSteps {
            gradient: step,
            hessian: step,
        },
    )
}

/// Central-difference approximation of value, gradient and Hessian.
///
/// Gradient: `(f(x+h e_a) - f(x-h e_a)) / 2h`. Hessian diagonal:
/// `(f(x+h) - 2 f(x) + f(x-h)) / h²`; off-diagonal: the four-point stencil
/// `(f(++) - f(+-) - f(-+) + f(--)) / 4h²`. The value is evaluated exactly.
pub fn finite_difference_jet2_with(
    e: &Expression,
    point: &[f64],
    steps: FdSteps,
) -> Result<Jet2, EvalError> {
    for h in [steps.gradient, steps.hessian] {
        if !(h > 0.0 && h.is_finite()) {
            return Err(EvalError::InvalidStep(h));
        }
    }
    let n = point.len();
    let f0 = e.evaluate(point)?;
    let mut x = point.to_vec();
    let mut at = |delta: &[(usize, f64)]| -> Result<f64, EvalError> {
        x.copy_from_slice(point);
        for &(i, d) in delta {
            x[i] += d;
        }
        e.evaluate(&x)
    };

    let h = steps.gradient;
    let mut gradient = vec![0.0; n];
    for a in 0..n {
        gradient[a] = (at(&[(a, h)])? - at(&[(a, -h)])?) / (2.0 * h);
    }

    let h = steps.hessian;
    let mut hessian = vec![0.0; n * n];
    for a in 0..n {
        hessian[a * n + a] = (at(&[(a, h)])? - 2.0 * f0 + at(&[(a, -h)])?) / (h * h);
        for b in a + 1..n {
            let v = (at(&[(a, h), (b, h)])? - at(&[(a, h), (b, -h)])? - at(&[(a, -h), (b, h)])?
                + at(&[(a, -h), (b, -h)])?)
                / (4.0 * h * h);
            hessian[a * n + b] = v;
        }
    }
    Ok(Jet2::from_parts(f0, gradient, &hessian))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate_jet2, parse_expression};

    #[test]
    fn constant_gradient_vanishes() {
        let e = parse_expression("3.5", &["x1", "x2"]).unwrap();
        let j = finite_difference_jet2(&e, &[0.2, 0.9], 1e-4).unwrap();
        assert!(j.gradient().iter().all(|g| g.abs() <= 1e-10));
    }

    #[test]
    fn square_is_exact_up_to_rounding() {
        let e = parse_expression("x1^2", &["x1"]).unwrap();
        let j = finite_difference_jet2(&e, &[3.0], 1e-4).unwrap();
        assert!((j.gradient()[0] - 6.0).abs() <= 1e-7);
        assert!((j.hessian(0, 0) - 2.0).abs() <= 1e-5);
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn matches_ad_for_sin_and_exp() {
        for (src, x) in [("sin(x1)", 0.7), ("exp(x1)", 1.0)] {
            let e = parse_expression(src, &["x1"]).unwrap();
            let ad = evaluate_jet2(&e, &[x]).unwrap();
            let fd = finite_difference_jet2_with(&e, &[x], FdSteps::default()).unwrap();
            assert_eq!(ad.value(), fd.value());
            assert!(rel_close(fd.gradient()[0], ad.gradient()[0], 1e-6), "{src}");
            assert!(rel_close(fd.hessian(0, 0), ad.hessian(0, 0), 1e-6), "{src}");
        }
    }

    #[test]
    fn rejects_bad_step() {
        let e = parse_expression("x1", &["x1"]).unwrap();
        assert!(matches!(
            finite_difference_jet2(&e, &[0.0], 0.0),
            Err(EvalError::InvalidStep(_))
        ));
        assert!(finite_difference_jet2(&e, &[0.0], -1e-3).is_err());
    }

    #[test]
    fn stencil_domain_errors_propagate() {
        let e = parse_expression("ln(x1)", &["x1"]).unwrap();
        assert!(matches!(
            finite_difference_jet2(&e, &[1e-5], 1e-4),
            Err(EvalError::Domain { .. })
        ));
    }
}
