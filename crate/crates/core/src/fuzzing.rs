//! Entry points shared by the fuzz targets and the corpus replay test.
//!
//! Each function accepts arbitrary bytes, drives one parser or decoder, and
//! panics only if an invariant of the result is violated.

use crate::expr::{parse_expression, Expression, ParseError};
use crate::manifold::{evaluate_frame, load_spec, validate_structure};

const COORDS: [&str; 4] = ["x1", "x2", "x3", "x4"];

fn check_parse(text: &str, result: &Result<Expression, ParseError>) {
    match result {
        Ok(e) => {
            let printed = e.to_string();
            let again = parse_expression(&printed, &COORDS)
                .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
            assert_eq!(again.root(), e.root(), "round trip changed `{text}`");
        }
        Err(err) => {
            if let Some(pos) = err.position() {
                assert!(pos <= text.len(), "error position {pos} beyond input of {} bytes", text.len());
            }
        }
    }
}

/// Parses the input as an expression over `x1..x4`; successful parses must
/// survive a print/reparse round trip and errors must point inside the input.
pub fn parse_expression_input(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let result = parse_expression(text, &COORDS);
    check_parse(text, &result);
}

/// Loads the input as a spec file; accepted specs are validated and
/// evaluated at their first sample point without panicking.
pub fn load_spec_input(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = load_spec(text) else {
        return;
    };
    // Keep the work per input bounded.
    if spec.dimension() > 6 {
        return;
    }
    let p = &spec.sample_points[0];
    let _ = validate_structure(&spec, p, spec.tolerance);
    if let Ok(frame) = evaluate_frame(&spec, p) {
        assert_eq!(frame.dim(), spec.dimension());
    }
}

/// Splits the input into an expression and a point: the first 32 bytes are
/// four little-endian `f64` coordinates, the rest is the expression text.
/// Successful jets must have an exactly symmetric Hessian.
pub fn eval_jet_input(data: &[u8]) {
    if data.len() < 32 {
        return;
    }
    let (head, tail) = data.split_at(32);
    let point: Vec<f64> = head
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let Ok(text) = std::str::from_utf8(tail) else {
        return;
    };
    let Ok(e) = parse_expression(text, &COORDS) else {
        return;
    };
    if let Ok(j) = e.jet2(&point) {
        assert!(j.value().is_finite());
        for a in 0..4 {
            assert!(j.gradient()[a].is_finite());
            for b in 0..4 {
                assert_eq!(j.hessian(a, b).to_bits(), j.hessian(b, a).to_bits());
            }
        }
    }
}
