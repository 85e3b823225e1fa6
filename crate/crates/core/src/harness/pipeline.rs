//! Per-point analysis and report assembly.

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::catalogue::{self, Gate, Status, Tolerance, CATALOGUE, CATALOGUE_VERSION};
use super::HarnessError;
use crate::geometry::{
    christoffel, curvature_symmetry, f_symmetry, metric_compatibility_residual, nabla_f,
    ricci_identity_residual, riemann, structure_tensors, w3_derivative_residual, w3_identity_check, CurvatureData,
    LeviCivitaData, StructureTensors,
};
use crate::manifold::{
    evaluate_frame, load_spec, validate_structure, ManifoldError, ManifoldSpec, PointFrame,
    ValidationReport,
};
use crate::normalized;
use crate::pconnection::{
    build_p_connection_signed, class_tests, connection_residuals, decomposition_4d, k_tensor,
    l1_relations, p_curvature, p_tensor_check, p_tensor_criterion_residual, scalar_relations,
    ClassFlags, PConnectionData, PCurvatureData, Scalars,
};
use crate::tensor::DenseTensor;

pub const TOOL: &str = "papm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Deliberate corruptions used to show that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Faults {
    /// Build the connection as `Γ - Q` instead of `Γ + Q`.
    pub flip_q: bool,
    /// Multiply `K` by this factor everywhere downstream.
    pub k_scale: f64,
}

impl Default for Faults {
    fn default() -> Self {
        Self {
            flip_q: false,
            k_scale: 1.0,
        }
    }
}

impl Faults {
    pub fn none() -> Self {
        Self::default()
    }
}

/// Truth values of every gate at one point.
///
/// The `W3` gate asks for the class condition to first order: the cyclic
/// sums of `F` and of `∇F` both vanish. The identities it guards are
/// obtained by differentiating the condition, so a point where only `F`
/// happens to satisfy it (for instance where `F = 0` but `∇F ≠ 0`) does
/// not qualify.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypotheses {
    #[serde(rename = "W3")]
    pub w3: bool,
    /// Residual of the differentiated W₃ condition.
    #[serde(rename = "W3_derivative_residual")]
    pub w3_derivative_residual: f64,
    #[serde(rename = "L1")]
    pub l1: bool,
    #[serde(rename = "L2")]
    pub l2: bool,
    #[serde(rename = "R'_p_tensor")]
    pub r_prime_p_tensor: bool,
    #[serde(rename = "H_p_tensor")]
    pub h_p_tensor: bool,
    #[serde(rename = "Dim4")]
    pub dim4: bool,
}

impl Hypotheses {
    pub fn holds(&self, gate: Gate) -> bool {
        match gate {
            Gate::W3 => self.w3,
            Gate::L1 => self.l1,
            Gate::L2 => self.l2,
            Gate::RPrimePTensor => self.r_prime_p_tensor,
            Gate::HPTensor => self.h_p_tensor,
            Gate::Dim4 => self.dim4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unmet_hypotheses: Vec<Gate>,
}

/// Everything computed at one sample point.
#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub validation: ValidationReport,
    pub frame: PointFrame,
    pub lc: LeviCivitaData,
    pub cd: CurvatureData,
    pub st: StructureTensors,
    pub nabla_f: DenseTensor,
    pub pc: PConnectionData,
    pub pcd: PCurvatureData,
    pub flags: ClassFlags,
    pub hypotheses: Hypotheses,
    pub scalars: Scalars,
    pub checks: Vec<CheckResult>,
}

impl PointAnalysis {
    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Lowered Nijenhuis tensor from the mixed four-term form
/// `N^k_ij = (∇_i P)^k_s P^s_j - P^s_i (∇_s P)^k_j + (∇_j P)^k_s P^s_i - P^s_j (∇_s P)^k_i`.
fn nijenhuis_mixed(frame: &PointFrame, st: &StructureTensors) -> DenseTensor {
    let n = frame.dim();
    let p = &frame.p;
    let g = frame.g();
    let np = |i: usize, k: usize, j: usize| st.nabla_p.get(&[i, k, j]);
    DenseTensor::covariant_from_fn(n, 3, |ix| {
        let (i, j, l) = (ix[0], ix[1], ix[2]);
        let mut acc = 0.0;
        for k in 0..n {
            let mut up = 0.0;
            for s in 0..n {
                up += np(i, k, s) * p[(s, j)] - p[(s, i)] * np(s, k, j) + np(j, k, s) * p[(s, i)]
                    - p[(s, j)] * np(s, k, i);
            }
            acc += g[(l, k)] * up;
        }
        acc
    })
}

fn flag(b: bool) -> f64 {
    if b {
        0.0
    } else {
        1.0
    }
}

/// Runs the full pipeline at `point` and evaluates every catalogue check.
pub fn analyze_point(
    spec: &ManifoldSpec,
    point: &[f64],
    tol: f64,
    faults: &Faults,
) -> Result<PointAnalysis, ManifoldError> {
    let validation = validate_structure(spec, point, tol);
    let frame = evaluate_frame(spec, point)?;
    let lc = christoffel(&frame);
    let cd = riemann(&lc, &frame);
    let st = structure_tensors(&frame, &lc);
    let nf = nabla_f(&frame, &lc, &st);
    let sign = if faults.flip_q { -1.0 } else { 1.0 };
    let pc = build_p_connection_signed(&frame, &lc, &st, sign);
    let k = k_tensor(&st).scale(faults.k_scale);
    let pcd = p_curvature(&frame, &cd, &pc, k);
    let p = &frame.p;
    let flags = class_tests(&st, &cd, p, tol);
    let rp_check = p_tensor_check(&pcd.r_prime_direct, p);
    let k_check = p_tensor_check(&pcd.k, p);
    let h_check = p_tensor_check(&pcd.h, p);
    let w3_derivative = w3_derivative_residual(&nf);
    let hypotheses = Hypotheses {
        w3: flags.w3.flag && w3_derivative <= tol,
        w3_derivative_residual: w3_derivative,
        l1: flags.l1.flag,
        l2: flags.l2.flag,
        r_prime_p_tensor: rp_check.is_p_tensor(tol),
        h_p_tensor: h_check.is_p_tensor(tol),
        dim4: frame.dim() == 4,
    };
    let scalars = Scalars::collect(&cd, &st, &pcd);

    let v = &validation;
    let finite = |x: f64| if x.is_nan() { None } else { Some(x) };
    let r_sym = curvature_symmetry(&cd.r);
    let f_sym = f_symmetry(&st.f, p);
    let n_mixed = nijenhuis_mixed(&frame, &st);
    let (w3_r1, w3_r2) = w3_identity_check(&st, &cd);
    let conn = connection_residuals(&frame, &st, &pc);
    let rel = scalar_relations(&frame, &cd, &pcd, &scalars, tol);
    let dec = decomposition_4d(&frame, &pcd, &scalars);
    let l1 = l1_relations(&frame, &cd, &pcd, &scalars);
    let gamma = &lc.gamma;
    let k_bianchi = curvature_symmetry(&pcd.k).bianchi;

    let residuals: Vec<(&'static str, Option<f64>)> = vec![
        ("axioms.involution", finite(v.involution)),
        ("axioms.compatibility", finite(v.compatibility)),
        ("axioms.trace", finite(v.trace)),
        ("axioms.metric_symmetry", finite(v.metric_symmetry)),
        ("axioms.metric_positive", finite(v.min_eigenvalue).map(|e| flag(e > tol))),
        ("lc.christoffel_symmetry", Some(gamma.sub(&gamma.permute(&[0, 2, 1])).max_abs())),
        ("lc.metric_compat", Some(metric_compatibility_residual(&frame, gamma))),
        ("curv.antisymmetry", Some(r_sym.antisymmetry)),
        ("curv.bianchi", Some(r_sym.bianchi)),
        ("F.symmetry_yz", Some(f_sym.symmetric)),
        ("F.p_twist", Some(f_sym.p_twist)),
        ("F.p_swap", Some(f_sym.p_swap)),
        (
            "F.nijenhuis_formula",
            Some(normalized(st.nijenhuis.max_abs_diff(&n_mixed), st.nijenhuis.max_abs())),
        ),
        ("F.ricci_identity", Some(ricci_identity_residual(&nf, &cd.r, p))),
        ("F.w3_norm_identity", Some(w3_r1)),
        ("F.w3_tau_identity", Some(w3_r2)),
        ("F.w3_l1_implies_w0", Some(st.norm_nabla_p.abs())),
        ("class.l1_implies_l2", Some(flag(!flags.l1.flag || flags.l2.flag))),
        (
            "thm.curvature_form",
            Some(normalized(
                pcd.r_prime_direct.max_abs_diff(&pcd.r_prime_formula),
                pcd.r_prime_direct.max_abs(),
            )),
        ),
        ("thm.r_prime_symmetries", Some(rp_check.antisymmetry.max(rp_check.p_compat))),
        ("thm.k_symmetries", Some(k_check.antisymmetry.max(k_check.p_compat))),
        (
            "thm.p_tensor_criterion",
            Some(p_tensor_criterion_residual(&cd.r, &pcd.k, &pcd.r_prime_direct, p)),
        ),
        (
            "thm.l2_equivalence",
            Some(flag((rp_check.bianchi <= tol) == (k_bianchi <= tol))),
        ),
        (
            "thm.h_p_tensor",
            Some(h_check.antisymmetry.max(h_check.bianchi).max(h_check.p_compat)),
        ),
        ("conn.q_formula", Some(conn.q_formula)),
        ("conn.q_antisymmetry", Some(conn.q_antisymmetry)),
        ("conn.torsion_formula", Some(conn.torsion_formula)),
        ("conn.torsion_antisymmetry", Some(conn.torsion_antisymmetry)),
        ("conn.torsion_cyclic", Some(conn.torsion_cyclic)),
        ("conn.metric_parallel", Some(conn.metric_parallel)),
        ("conn.structure_parallel", Some(conn.structure_parallel)),
        ("scalar.eq3_1", Some(rel.ricci_relation)),
        ("scalar.eq3_2", Some(rel.tau_sum)),
        ("scalar.eq3_3", Some(rel.tau_via_norm)),
        ("scalar.eq3_4", Some(rel.tau_k_norm)),
        ("scalar.eq3_5", Some(rel.tau_prime_norm)),
        ("scalar.prop_chain", Some(rel.chain)),
        ("scalar.cor_equivalences", Some(rel.equivalences)),
        ("dim4.decomposition", dec.map(|d| d.decomposition)),
        ("dim4.tau_h", dec.map(|d| d.tau_h)),
        ("dim4.tau_star_h", dec.map(|d| d.tau_star_h)),
        ("dim4.proposition", dec.map(|d| d.proposition)),
        ("L1.curvature", Some(l1.curvature)),
        ("L1.tau", Some(l1.tau)),
        ("L1.tau_star", Some(l1.tau_star)),
        ("L1.dim4_tau", l1.dim4_tau),
        ("L1.dim4_tau_star", l1.dim4_tau_star),
    ];
    debug_assert_eq!(residuals.len(), CATALOGUE.len());

    let checks = residuals
        .into_iter()
        .zip(CATALOGUE)
        .map(|((id, residual), spec)| {
            assert_eq!(id, spec.id, "residual list out of catalogue order");
            let tolerance = match spec.tolerance {
                Tolerance::Run => tol,
                Tolerance::Fixed(t) => t,
            };
            let unmet: Vec<Gate> = spec
                .gates
                .iter()
                .copied()
                .filter(|g| !hypotheses.holds(*g))
                .collect();
            CheckResult {
                id,
                residual,
                tolerance,
                status: Status::decide(residual, tolerance, unmet.is_empty()),
                unmet_hypotheses: unmet,
            }
        })
        .collect();

    Ok(PointAnalysis {
        validation,
        frame,
        lc,
        cd,
        st,
        nabla_f: nf,
        pc,
        pcd,
        flags,
        hypotheses,
        scalars,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub index: usize,
    pub point: Vec<f64>,
    pub validation: ValidationReport,
    pub classes: ClassFlags,
    pub hypotheses: Hypotheses,
    pub scalars: Scalars,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub points: usize,
    pub checks: usize,
    pub pass: usize,
    pub fail: usize,
    pub hypothesis_not_met: usize,
    /// `"<point index>:<check id>"` for every failing check.
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub catalogue_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_name: Option<String>,
    /// SHA-256 of the spec file text, hex encoded.
    pub spec_digest: String,
    pub tolerance: f64,
    pub points: Vec<PointReport>,
    pub summary: Summary,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

pub fn spec_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Run tolerance: an explicit value wins over the spec file's (whose own
/// default is `1e-9`).
pub fn resolve_tolerance(explicit: Option<f64>, spec: &ManifoldSpec) -> Result<f64, HarnessError> {
    match explicit {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(HarnessError::Tolerance(t)),
        Some(t) => Ok(t),
        None => Ok(spec.tolerance),
    }
}

pub fn point_report(index: usize, a: PointAnalysis) -> PointReport {
    PointReport {
        index,
        point: a.frame.point,
        validation: a.validation,
        classes: a.flags,
        hypotheses: a.hypotheses,
        scalars: a.scalars,
        checks: a.checks,
    }
}

/// Builds the report for a spec text. `point` restricts it to one sample point.
pub fn build_report(
    text: &str,
    point: Option<usize>,
    tol: Option<f64>,
    faults: &Faults,
) -> Result<Report, HarnessError> {
    let spec = load_spec(text)?;
    let tolerance = resolve_tolerance(tol, &spec)?;
    let count = spec.sample_points.len();
    let indices: Vec<usize> = match point {
        Some(i) if i >= count => return Err(HarnessError::PointIndex { index: i, count }),
        Some(i) => vec![i],
        None => (0..count).collect(),
    };
    let mut points = Vec::with_capacity(indices.len());
    for i in indices {
        let a = analyze_point(&spec, &spec.sample_points[i], tolerance, faults)?;
        points.push(point_report(i, a));
    }
    let mut summary = Summary {
        points: points.len(),
        checks: 0,
        pass: 0,
        fail: 0,
        hypothesis_not_met: 0,
        failed: Vec::new(),
    };
    for p in &points {
        for c in &p.checks {
            summary.checks += 1;
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::HypothesisNotMet => summary.hypothesis_not_met += 1,
                Status::Fail => {
                    summary.fail += 1;
                    summary.failed.push(format!("{}:{}", p.index, c.id));
                }
            }
        }
    }
    Ok(Report {
        tool: TOOL,
        version: VERSION,
        catalogue_version: CATALOGUE_VERSION,
        spec_name: spec.name.clone(),
        spec_digest: spec_digest(text),
        tolerance,
        points,
        summary,
    })
}

/// Catalogue position of a check id; unknown ids sort last.
pub fn catalogue_rank(id: &str) -> usize {
    catalogue::lookup(id).map(|(i, _)| i).unwrap_or(usize::MAX)
}
