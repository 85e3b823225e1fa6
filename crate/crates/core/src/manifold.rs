//! Chart descriptions and their evaluated second-order data at a point.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{evaluate_jet2, parse_expression, EvalError, Expression, Jet2, ParseError};
use crate::tensor::{DenseTensor, MetricPair, TensorError, Variance};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifoldError {
    #[error("format error: {0}")]
    Format(String),
    #[error("{matrix}[{row}][{col}]: {source}")]
    Syntax {
        matrix: &'static str,
        row: usize,
        col: usize,
        #[source]
        source: ParseError,
    },
    #[error("dimension {0} is odd; a trace-free almost product structure needs an even-dimensional manifold")]
    OddDimension(usize),
    #[error("{matrix}[{row}][{col}] at point {point:?}: {source}")]
    Evaluation {
        matrix: &'static str,
        row: usize,
        col: usize,
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("metric at point {point:?}: {source}")]
    Metric {
        point: Vec<f64>,
        #[source]
        source: TensorError,
    },
}

/// On-disk form of a chart description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    pub metric: Vec<Vec<String>>,
    pub structure: Vec<Vec<String>>,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// A validated, parsed chart description.
#[derive(Debug, Clone)]
pub struct ManifoldSpec {
    pub name: Option<String>,
    pub coordinates: Vec<String>,
    /// `g_ij` component functions.
    pub metric: Vec<Vec<Expression>>,
    /// Mixed components `P^i_j`: row `i`, column `j`.
    pub structure: Vec<Vec<Expression>>,
    pub sample_points: Vec<Vec<f64>>,
    pub tolerance: f64,
}

impl ManifoldSpec {
    pub fn dimension(&self) -> usize {
        self.coordinates.len()
    }
}

/// Parses and structurally checks a JSON chart description.
pub fn load_spec(text: &str) -> Result<ManifoldSpec, ManifoldError> {
    let file: SpecFile =
        serde_json::from_str(text).map_err(|e| ManifoldError::Format(e.to_string()))?;
    spec_from_file(file)
}

pub fn spec_from_file(file: SpecFile) -> Result<ManifoldSpec, ManifoldError> {
    let n = file.dimension;
    if n == 0 {
        return Err(ManifoldError::Format("dimension must be positive".into()));
    }
    if n % 2 == 1 {
        return Err(ManifoldError::OddDimension(n));
    }
    if file.coordinates.len() != n {
        return Err(ManifoldError::Format(format!(
            "{} coordinates declared for dimension {n}",
            file.coordinates.len()
        )));
    }
    crate::expr::check_coordinates(&file.coordinates)
        .map_err(|e| ManifoldError::Format(e.to_string()))?;
    let metric = parse_matrix("metric", &file.metric, &file.coordinates, n)?;
    let structure = parse_matrix("structure", &file.structure, &file.coordinates, n)?;
    if file.points.is_empty() {
        return Err(ManifoldError::Format("at least one sample point is required".into()));
    }
    for (k, p) in file.points.iter().enumerate() {
        if p.len() != n {
            return Err(ManifoldError::Format(format!(
                "point {k} has {} coordinates, expected {n}",
                p.len()
            )));
        }
    }
    let tolerance = file.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(ManifoldError::Format(format!(
            "tolerance must be positive and finite, got {tolerance}"
        )));
    }
    Ok(ManifoldSpec {
        name: file.name,
        coordinates: file.coordinates,
        metric,
        structure,
        sample_points: file.points,
        tolerance,
    })
}

fn parse_matrix(
    matrix: &'static str,
    rows: &[Vec<String>],
    coords: &[String],
    n: usize,
) -> Result<Vec<Vec<Expression>>, ManifoldError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let shape: Vec<usize> = rows.iter().map(Vec::len).collect();
        // A square matrix of odd size is reported by the rule it breaks.
        if rows.len() % 2 == 1 && shape.iter().all(|&c| c == rows.len()) {
            return Err(ManifoldError::OddDimension(rows.len()));
        }
        return Err(ManifoldError::Format(format!(
            "{matrix} must be {n}x{n}, got {} rows with lengths {shape:?}",
            rows.len()
        )));
    }
    rows.iter()
        .enumerate()
        .map(|(row, r)| {
            r.iter()
                .enumerate()
                .map(|(col, text)| {
                    parse_expression(text, coords).map_err(|source| ManifoldError::Syntax {
                        matrix,
                        row,
                        col,
                        source,
                    })
                })
                .collect()
        })
        .collect()
}

/// Residuals of the almost product axioms at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `max |P² - I|`
    pub involution: f64,
    /// `max |Pᵀ g P - g|`
    pub compatibility: f64,
    /// `|tr P|`
    pub trace: f64,
    /// `max |g_ij - g_ji|` before symmetrization
    pub metric_symmetry: f64,
    /// Smallest eigenvalue of the symmetrized metric.
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Set when the expressions could not be evaluated at the point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ValidationReport {
    fn failed(error: String, tolerance: f64) -> Self {
        Self {
            involution: f64::NAN,
            compatibility: f64::NAN,
            trace: f64::NAN,
            metric_symmetry: f64::NAN,
            min_eigenvalue: f64::NAN,
            tolerance,
            pass: false,
            error: Some(error),
        }
    }

    /// Human-readable names of the violated axioms.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(e) = &self.error {
            v.push(format!("evaluation failed: {e}"));
            return v;
        }
        let tol = self.tolerance;
        if !(self.involution <= tol) {
            v.push(format!("P^2 != I (residual {:e})", self.involution));
        }
        if !(self.compatibility <= tol) {
            v.push(format!("g(Px,Py) != g(x,y) (residual {:e})", self.compatibility));
        }
        if !(self.trace <= tol) {
            v.push(format!("tr P != 0 (|tr P| = {:e})", self.trace));
        }
        if !(self.metric_symmetry <= tol) {
            v.push(format!("metric not symmetric (residual {:e})", self.metric_symmetry));
        }
        if !(self.min_eigenvalue > tol) {
            v.push(format!(
                "metric not positive definite (min eigenvalue {:e})",
                self.min_eigenvalue
            ));
        }
        v
    }
}

fn eval_matrix(
    name: &'static str,
    m: &[Vec<Expression>],
    point: &[f64],
) -> Result<DMatrix<f64>, ManifoldError> {
    let n = m.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = m[i][j].evaluate(point).map_err(|source| ManifoldError::Evaluation {
                matrix: name,
                row: i,
                col: j,
                point: point.to_vec(),
                source,
            })?;
        }
    }
    Ok(out)
}

/// Checks `P² = I`, `g(Px,Py) = g(x,y)`, `tr P = 0` and positive definiteness at `point`.
///
/// Failures are recorded in the report rather than returned as errors.
pub fn validate_structure(spec: &ManifoldSpec, point: &[f64], tol: f64) -> ValidationReport {
    let n = spec.dimension();
    if point.len() != n {
        return ValidationReport::failed(
            format!("point has {} coordinates, expected {n}", point.len()),
            tol,
        );
    }
    let g_raw = match eval_matrix("metric", &spec.metric, point) {
        Ok(g) => g,
        Err(e) => return ValidationReport::failed(e.to_string(), tol),
    };
    let p = match eval_matrix("structure", &spec.structure, point) {
        Ok(p) => p,
        Err(e) => return ValidationReport::failed(e.to_string(), tol),
    };
    let metric_symmetry = (&g_raw - g_raw.transpose()).amax();
    let g = (&g_raw + g_raw.transpose()) * 0.5;
    let id = DMatrix::<f64>::identity(n, n);
    let involution = (&p * &p - &id).amax();
    let compatibility = (p.transpose() * &g * &p - &g).amax();
    let trace = p.trace().abs();
    let min_eigenvalue = SymmetricEigen::new(g.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    let pass = involution <= tol
        && compatibility <= tol
        && trace <= tol
        && metric_symmetry <= tol
        && min_eigenvalue > tol;
    ValidationReport {
        involution,
        compatibility,
        trace,
        metric_symmetry,
        min_eigenvalue,
        tolerance: tol,
        pass,
        error: None,
    }
}

/// Fully evaluated second-order chart data at one point.
///
/// Derivative arrays put the differentiation indices first:
/// `dg[h,i,j] = ∂_h g_ij`, `ddg[a,b,i,j] = ∂_a ∂_b g_ij`, and likewise
/// `dp[h,k,j] = ∂_h P^k_j`, `ddp[a,b,k,j]`.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub point: Vec<f64>,
    pub metric: MetricPair,
    pub dg: DenseTensor,
    pub ddg: DenseTensor,
    /// Mixed components `P^k_j` (row `k`, column `j`).
    pub p: DMatrix<f64>,
    pub dp: DenseTensor,
    pub ddp: DenseTensor,
    /// `P_ij = g_ik P^k_j`.
    pub p_lower: DMatrix<f64>,
}

impl PointFrame {
    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.metric.g
    }

    pub fn g_inv(&self) -> &DMatrix<f64> {
        &self.metric.g_inv
    }
}

fn jet_at(
    matrix: &'static str,
    e: &Expression,
    row: usize,
    col: usize,
    point: &[f64],
) -> Result<Jet2, ManifoldError> {
    evaluate_jet2(e, point).map_err(|source| ManifoldError::Evaluation {
        matrix,
        row,
        col,
        point: point.to_vec(),
        source,
    })
}

/// Builds value, first and second derivative arrays from per-entry jets.
fn assemble(
    n: usize,
    mut entry: impl FnMut(usize, usize) -> Result<Jet2, ManifoldError>,
    symmetric: bool,
) -> Result<(DMatrix<f64>, DenseTensor, DenseTensor), ManifoldError> {
    use Variance::Covariant as C;
    let mut v = DMatrix::zeros(n, n);
    let mut d1 = DenseTensor::zeros(n, &[C, C, C]);
    let mut d2 = DenseTensor::zeros(n, &[C, C, C, C]);
    for i in 0..n {
        let j0 = if symmetric { i } else { 0 };
        for j in j0..n {
            let jet = entry(i, j)?;
            let mirror: &[(usize, usize)] = if symmetric && i != j {
                &[(i, j), (j, i)]
            } else {
                &[(i, j)]
            };
            for &(r, c) in mirror {
                v[(r, c)] = jet.value();
                for a in 0..n {
                    d1.set(&[a, r, c], jet.gradient()[a]);
                    for b in 0..n {
                        d2.set(&[a, b, r, c], jet.hessian(a, b));
                    }
                }
            }
        }
    }
    Ok((v, d1, d2))
}

/// Evaluates every component jet at `point`.
///
/// Only the upper triangle of the metric is evaluated and mirrored, so `g`
/// is exactly symmetric as stored.
pub fn evaluate_frame(spec: &ManifoldSpec, point: &[f64]) -> Result<PointFrame, ManifoldError> {
    let n = spec.dimension();
    if point.len() != n {
        return Err(ManifoldError::Format(format!(
            "point has {} coordinates, expected {n}",
            point.len()
        )));
    }
    let (g, dg, ddg) = assemble(
        n,
        |i, j| jet_at("metric", &spec.metric[i][j], i, j, point),
        true,
    )?;
    let (p, dp, ddp) = assemble(
        n,
        |i, j| jet_at("structure", &spec.structure[i][j], i, j, point),
        false,
    )?;
    let metric = MetricPair::new(g).map_err(|source| ManifoldError::Metric {
        point: point.to_vec(),
        source,
    })?;
    let p_lower = &metric.g * &p;
    Ok(PointFrame {
        point: point.to_vec(),
        metric,
        dg,
        ddg,
        p,
        dp,
        ddp,
        p_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_json(n: usize, metric: &[&[&str]], structure: &[&[&str]], points: &[&[f64]]) -> String {
        let coords: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        serde_json::json!({
            "dimension": n,
            "coordinates": coords,
            "metric": metric,
            "structure": structure,
            "points": points,
        })
        .to_string()
    }

    fn flat_product() -> String {
        spec_json(
            4,
            &[
                &["1", "0", "0", "0"],
                &["0", "1", "0", "0"],
                &["0", "0", "1", "0"],
                &["0", "0", "0", "1"],
            ],
            &[
                &["1", "0", "0", "0"],
                &["0", "1", "0", "0"],
                &["0", "0", "-1", "0"],
                &["0", "0", "0", "-1"],
            ],
            &[&[0.0, 0.0, 0.0, 0.0]],
        )
    }

    fn rotating_2d() -> ManifoldSpec {
        load_spec(&spec_json(
            2,
            &[&["1", "0"], &["0", "1"]],
            &[&["cos(x1)", "sin(x1)"], &["sin(x1)", "-cos(x1)"]],
            &[&[0.0, 0.0], &[0.4, -1.3]],
        ))
        .unwrap()
    }

    #[test]
    fn loads_flat_product() {
        let spec = load_spec(&flat_product()).unwrap();
        assert_eq!(spec.dimension(), 4);
        assert_eq!(spec.tolerance, DEFAULT_TOLERANCE);
    }

    #[test]
    fn odd_dimension_rejected() {
        let text = spec_json(
            3,
            &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "1"]],
            &[&["1", "0", "0"], &["0", "1", "0"], &["0", "0", "-1"]],
            &[&[0.0, 0.0, 0.0]],
        );
        let err = load_spec(&text).unwrap_err();
        assert_eq!(err, ManifoldError::OddDimension(3));
        assert!(err.to_string().contains("even-dimensional manifold"));
    }

    #[test]
    fn odd_metric_under_even_dimension_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&flat_product()).unwrap();
        v["metric"] = serde_json::json!([["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]);
        assert_eq!(
            load_spec(&v.to_string()).unwrap_err(),
            ManifoldError::OddDimension(3)
        );
    }

    #[test]
    fn syntax_error_carries_matrix_position() {
        let mut v: serde_json::Value = serde_json::from_str(&flat_product()).unwrap();
        v["structure"][0][0] = serde_json::json!("x1 +");
        match load_spec(&v.to_string()).unwrap_err() {
            ManifoldError::Syntax {
                matrix, row, col, ..
            } => assert_eq!((matrix, row, col), ("structure", 0, 0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn format_errors() {
        assert!(matches!(load_spec("{"), Err(ManifoldError::Format(_))));
        let mut v: serde_json::Value = serde_json::from_str(&flat_product()).unwrap();
        v["points"] = serde_json::json!([[0.0, 1.0]]);
        assert!(matches!(load_spec(&v.to_string()), Err(ManifoldError::Format(_))));
        let mut v: serde_json::Value = serde_json::from_str(&flat_product()).unwrap();
        v["tolerance"] = serde_json::json!(-1.0);
        assert!(matches!(load_spec(&v.to_string()), Err(ManifoldError::Format(_))));
        let mut v: serde_json::Value = serde_json::from_str(&flat_product()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(load_spec(&v.to_string()), Err(ManifoldError::Format(_))));
    }

    #[test]
    fn flat_product_validates_with_zero_residuals() {
        let spec = load_spec(&flat_product()).unwrap();
        let r = validate_structure(&spec, &[0.0; 4], 1e-9);
        assert!(r.pass);
        assert_eq!(r.involution, 0.0);
        assert_eq!(r.compatibility, 0.0);
        assert_eq!(r.trace, 0.0);
        assert_eq!(r.min_eigenvalue, 1.0);
    }

    #[test]
    fn rotating_2d_validates() {
        let spec = rotating_2d();
        for x in [-2.0, 0.0, 0.3, 1.7, 3.1] {
            let r = validate_structure(&spec, &[x, 0.5], 1e-9);
            assert!(r.pass);
            assert!(r.involution <= 1e-12 && r.compatibility <= 1e-12 && r.trace <= 1e-12);
        }
    }

    #[test]
    fn nonzero_trace_fails() {
        let mut v: serde_json::Value = serde_json::from_str(&flat_product()).unwrap();
        v["structure"][3][3] = serde_json::json!("-0.5");
        let spec = load_spec(&v.to_string()).unwrap();
        let r = validate_structure(&spec, &[0.0; 4], 1e-9);
        assert!(!r.pass);
        assert_eq!(r.trace, 0.5);
        assert!(r.violations().iter().any(|s| s.contains("tr P")));
    }

    #[test]
    fn flat_frame_has_vanishing_derivatives() {
        let spec = load_spec(&flat_product()).unwrap();
        let f = evaluate_frame(&spec, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(f.dg.max_abs(), 0.0);
        assert_eq!(f.ddg.max_abs(), 0.0);
        assert_eq!(f.dp.max_abs(), 0.0);
        assert_eq!(f.ddp.max_abs(), 0.0);
    }

    #[test]
    fn rotating_2d_derivative_of_p() {
        let f = evaluate_frame(&rotating_2d(), &[0.0, 0.0]).unwrap();
        // d/dθ [[cos, sin], [sin, -cos]] at 0 = [[0, 1], [1, 0]]
        let want = [[0.0, 1.0], [1.0, 0.0]];
        for k in 0..2 {
            for j in 0..2 {
                assert_eq!(f.dp.get(&[0, k, j]), want[k][j]);
                assert_eq!(f.dp.get(&[1, k, j]), 0.0);
            }
        }
    }

    #[test]
    fn warped_metric_derivative() {
        let text = spec_json(
            4,
            &[
                &["1", "0", "0", "0"],
                &["0", "1", "0", "0"],
                &["0", "0", "1 + x1^2", "0"],
                &["0", "0", "0", "1 + x1^2"],
            ],
            &[
                &["1", "0", "0", "0"],
                &["0", "1", "0", "0"],
                &["0", "0", "-1", "0"],
                &["0", "0", "0", "-1"],
            ],
            &[&[0.7, 0.0, 0.0, 0.0]],
        );
        let spec = load_spec(&text).unwrap();
        let f = evaluate_frame(&spec, &[0.7, 0.0, 0.0, 0.0]).unwrap();
        assert!((f.dg.get(&[0, 2, 2]) - 1.4).abs() < 1e-15);
        let fd = crate::expr::finite_difference_jet2(&spec.metric[2][2], &[0.7, 0.0, 0.0, 0.0], 1e-6)
            .unwrap();
        assert!((fd.gradient()[0] - f.dg.get(&[0, 2, 2])).abs() <= 1e-6 * 2.4);
    }

    #[test]
    fn metric_is_exactly_symmetric_in_frame() {
        let text = spec_json(
            2,
            &[&["2 + sin(x1)", "0.1*x2"], &["x2/10", "1 + x1^2"]],
            &[&["1", "0"], &["0", "-1"]],
            &[&[0.3, 0.9]],
        );
        let spec = load_spec(&text).unwrap();
        let f = evaluate_frame(&spec, &[0.3, 0.9]).unwrap();
        assert_eq!(f.g()[(0, 1)], f.g()[(1, 0)]);
    }
}
