//! Spec files, fixtures, the residual report and the command implementations
//! behind the `papm` binary.
//!
//! Commands write to caller-supplied streams and return the process exit
//! code: `0` success, `1` a check or validation failed, `2` the input could
//! not be read, parsed or evaluated.

pub mod catalogue;
pub mod fixtures;
pub mod oracles;
pub mod pipeline;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::manifold::{load_spec, validate_structure, ManifoldError, ManifoldSpec};
use catalogue::Status;
pub use pipeline::{analyze_point, build_report, Faults, PointAnalysis, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Tolerance used by `selftest`.
pub const SELFTEST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("point index {index} out of range: the spec has {count} sample points")]
    PointIndex { index: usize, count: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("validation failed at point {index}: {}", violations.join("; "))]
    Invalid {
        index: usize,
        violations: Vec<String>,
    },
}

fn read_text(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_spec(path: &Path) -> Result<(String, ManifoldSpec), HarnessError> {
    let text = read_text(path)?;
    let spec = load_spec(&text)?;
    Ok((text, spec))
}

fn spec_label(spec: &ManifoldSpec, path: &Path) -> String {
    spec.name
        .clone()
        .unwrap_or_else(|| path.display().to_string())
}

fn error_exit(err: &mut dyn Write, e: &HarnessError) -> i32 {
    let _ = writeln!(err, "error: {e}");
    EXIT_ERROR
}

/// `papm validate`: checks the almost product axioms at every sample point.
pub fn cmd_validate(path: &Path, tol: Option<f64>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (_, spec) = match read_spec(path) {
        Ok(s) => s,
        Err(e) => return error_exit(err, &e),
    };
    let tol = match pipeline::resolve_tolerance(tol, &spec) {
        Ok(t) => t,
        Err(e) => return error_exit(err, &e),
    };
    let _ = writeln!(
        out,
        "spec {} ({} points, tolerance {tol:e})",
        spec_label(&spec, path),
        spec.sample_points.len()
    );
    let _ = writeln!(
        out,
        "{:>5}  {:>11}  {:>13}  {:>11}  {:>15}  {:>14}  status",
        "point", "involution", "compatibility", "trace", "metric_symmetry", "min_eigenvalue"
    );
    let mut failed = 0;
    for (i, p) in spec.sample_points.iter().enumerate() {
        let v = validate_structure(&spec, p, tol);
        let _ = writeln!(
            out,
            "{i:>5}  {:>11.3e}  {:>13.3e}  {:>11.3e}  {:>15.3e}  {:>14.6e}  {}",
            v.involution,
            v.compatibility,
            v.trace,
            v.metric_symmetry,
            v.min_eigenvalue,
            if v.pass { "pass" } else { "fail" }
        );
        if !v.pass {
            failed += 1;
            for msg in v.violations() {
                let _ = writeln!(out, "       violation: {msg}");
            }
        }
    }
    if failed == 0 {
        let _ = writeln!(out, "validation passed");
        EXIT_OK
    } else {
        let _ = writeln!(
            out,
            "validation failed at {failed} of {} points",
            spec.sample_points.len()
        );
        EXIT_FAIL
    }
}

/// `papm classify`: prints the W0/W3/L1/L2 flags with residuals.
pub fn cmd_classify(path: &Path, tol: Option<f64>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let run = || -> Result<(ManifoldSpec, f64, Vec<PointAnalysis>), HarnessError> {
        let (_, spec) = read_spec(path)?;
        let tol = pipeline::resolve_tolerance(tol, &spec)?;
        let mut rows = Vec::new();
        for (index, p) in spec.sample_points.iter().enumerate() {
            let a = analyze_point(&spec, p, tol, &Faults::none())?;
            if !a.validation.pass {
                return Err(HarnessError::Invalid {
                    index,
                    violations: a.validation.violations(),
                });
            }
            rows.push(a);
        }
        Ok((spec, tol, rows))
    };
    let (spec, tol, rows) = match run() {
        Ok(r) => r,
        Err(e) => return error_exit(err, &e),
    };
    let _ = writeln!(
        out,
        "spec {} ({} points, tolerance {tol:e})",
        spec_label(&spec, path),
        rows.len()
    );
    let _ = writeln!(out, "{:>5}  {:<16}  {:<16}  {:<16}  {:<16}", "point", "W0", "W3", "L1", "L2");
    let cell = |c: &crate::pconnection::ClassResult| {
        format!("{:<5} {:.3e}", if c.flag { "yes" } else { "no" }, c.residual)
    };
    for (i, a) in rows.iter().enumerate() {
        let f = &a.flags;
        let _ = writeln!(
            out,
            "{i:>5}  {:<16}  {:<16}  {:<16}  {:<16}",
            cell(&f.w0),
            cell(&f.w3),
            cell(&f.l1),
            cell(&f.l2)
        );
    }
    EXIT_OK
}

/// `papm report`: writes the JSON residual report to `out_path` or `out`.
pub fn cmd_report(
    path: &Path,
    out_path: Option<&Path>,
    point: Option<usize>,
    tol: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let report = match read_text(path).and_then(|t| build_report(&t, point, tol, &Faults::none())) {
        Ok(r) => r,
        Err(e) => return error_exit(err, &e),
    };
    let json = report.to_json();
    let s = &report.summary;
    let line = format!(
        "{} checks: {} pass, {} fail, {} hypothesis_not_met",
        s.checks, s.pass, s.fail, s.hypothesis_not_met
    );
    match out_path {
        Some(dest) => {
            if let Err(source) = std::fs::write(dest, json) {
                let e = HarnessError::Io {
                    path: dest.to_path_buf(),
                    source,
                };
                return error_exit(err, &e);
            }
            let _ = writeln!(out, "wrote {}: {line}", dest.display());
        }
        None => {
            let _ = out.write_all(json.as_bytes());
            let _ = writeln!(err, "{line}");
        }
    }
    for f in &s.failed {
        let _ = writeln!(err, "fail {f}");
    }
    if s.fail == 0 {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

/// One failed item of a self-test run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelftestFailure {
    pub id: String,
    pub context: String,
}

#[derive(Debug, Clone, Default)]
pub struct SelftestOutcome {
    pub lines: Vec<String>,
    /// Sorted by catalogue position; ids outside the catalogue come last.
    pub failures: Vec<SelftestFailure>,
}

impl SelftestOutcome {
    pub fn first_failure(&self) -> Option<&SelftestFailure> {
        self.failures.first()
    }

    pub fn failed(&self, id: &str) -> bool {
        self.failures.iter().any(|f| f.id == id)
    }
}

/// Runs every shipped fixture through the report pipeline together with
/// the finite-difference and looped-contraction oracles.
pub fn run_selftest(faults: &Faults) -> SelftestOutcome {
    let mut outcome = SelftestOutcome::default();
    let started = Instant::now();
    for fx in fixtures::FIXTURES {
        let spec = fx.spec();
        let before = outcome.failures.len();
        let mut checks = 0;
        let mut fail = |id: &str, context: String| {
            outcome.failures.push(SelftestFailure {
                id: id.to_string(),
                context,
            })
        };
        for (i, p) in spec.sample_points.iter().enumerate() {
            let here = format!("{} point {i}", fx.name);
            let v = validate_structure(&spec, p, SELFTEST_TOLERANCE);
            if !v.pass {
                fail("fixture.validation", format!("{here}: {}", v.violations().join("; ")));
            }
            match oracles::ad_vs_fd(&spec, p) {
                Ok(gap) if gap.within_bounds() => {}
                Ok(gap) => fail("oracle.ad_fd", format!("{here}: {gap:?}")),
                Err(e) => fail("oracle.ad_fd", format!("{here}: {e}")),
            }
            let a = match analyze_point(&spec, p, SELFTEST_TOLERANCE, faults) {
                Ok(a) => a,
                Err(e) => {
                    fail("fixture.evaluation", format!("{here}: {e}"));
                    continue;
                }
            };
            for c in &a.checks {
                checks += 1;
                if c.status == Status::Fail {
                    fail(c.id, format!("{here}: residual {:?} > {:e}", c.residual, c.tolerance));
                }
            }
            let mismatched = fx.expected[i].mismatches(&a.flags);
            if !mismatched.is_empty() {
                fail("fixture.expected_flags", format!("{here}: {}", mismatched.join(", ")));
            }
            let gap = oracles::naive_loop_gap(&a);
            if !(gap.gap <= oracles::LOOP_TOL) {
                fail("oracle.naive_loops", format!("{here}: {} gap {:e}", gap.quantity, gap.gap));
            }
        }
        let n_fail = outcome.failures.len() - before;
        outcome.lines.push(format!(
            "{} {:<22} {} points, {checks} checks{}",
            if n_fail == 0 { "ok  " } else { "FAIL" },
            fx.name,
            spec.sample_points.len(),
            if n_fail == 0 {
                String::new()
            } else {
                format!(", {n_fail} failures")
            }
        ));
    }
    outcome.lines.push(format!(
        "elapsed {:.3} s",
        started.elapsed().as_secs_f64()
    ));
    outcome
        .failures
        .sort_by_key(|f| pipeline::catalogue_rank(&f.id));
    outcome
}

/// `papm selftest`.
pub fn cmd_selftest(out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    cmd_selftest_with(&Faults::none(), out, err)
}

pub fn cmd_selftest_with(faults: &Faults, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcome = run_selftest(faults);
    for l in &outcome.lines {
        let _ = writeln!(out, "{l}");
    }
    match outcome.first_failure() {
        None => {
            let _ = writeln!(out, "selftest passed");
            EXIT_OK
        }
        Some(f) => {
            for x in &outcome.failures {
                let _ = writeln!(out, "  fail {} ({})", x.id, x.context);
            }
            let _ = writeln!(out, "selftest failed: {} ({})", f.id, f.context);
            let _ = writeln!(
                err,
                "first failing check: {} ({} failures in total)",
                f.id,
                outcome.failures.len()
            );
            EXIT_FAIL
        }
    }
}
