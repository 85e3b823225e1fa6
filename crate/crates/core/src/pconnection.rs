//! The P-connection `∇'_x y = ∇_x y - ½(∇_x P)P y` and everything built on it:
//! the tensors `Q`, `T`, `K`, `H`, the curvature `R'` computed two ways,
//! Riemannian P-tensor tests, the class tests `W₀, W₃, L₁, L₂`, scalar
//! invariants and the identities relating them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::geometry::{
    curvature_symmetry, curvature_tensor, metric_compatibility_residual,
    structure_parallel_residual, traces, twist_last_pair, CurvatureData, LeviCivitaData,
    StructureTensors, Traces,
};
use crate::manifold::PointFrame;
use crate::normalized;
use crate::tensor::{DenseTensor, MetricPair, Variance};

use Variance::{Contravariant as UP, Covariant as DN};

#[derive(Debug, Clone)]
pub struct PConnectionData {
    /// `q_mixed[k,i,j] = Q^k_ij = -½ (∇_i P)^k_s P^s_j`
    pub q_mixed: DenseTensor,
    /// `Q_ijl = g_lk Q^k_ij`
    pub q: DenseTensor,
    pub gamma_prime: DenseTensor,
    pub dgamma_prime: DenseTensor,
    /// `T_ijl = g_lk (Γ'^k_ij - Γ'^k_ji)`
    pub torsion: DenseTensor,
}

pub fn build_p_connection(
    frame: &PointFrame,
    lc: &LeviCivitaData,
    st: &StructureTensors,
) -> PConnectionData {
    build_p_connection_signed(frame, lc, st, 1.0)
}

/// `Γ' = Γ + sign·Q`. Any sign other than `+1` builds a wrong connection and
/// exists for fault injection.
pub(crate) fn build_p_connection_signed(
    frame: &PointFrame,
    lc: &LeviCivitaData,
    st: &StructureTensors,
    sign: f64,
) -> PConnectionData {
    let n = frame.dim();
    let p = &frame.p;
    let g = frame.g();
    let np = &st.nabla_p;

    let q_mixed = DenseTensor::from_fn(n, &[UP, DN, DN], |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        -0.5 * (0..n).map(|s| np.get(&[i, k, s]) * p[(s, j)]).sum::<f64>()
    });
    let dq = DenseTensor::from_fn(n, &[DN, UP, DN, DN], |ix| {
        let (h, k, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        -0.5 * (0..n)
            .map(|s| {
                st.d_nabla_p.get(&[h, i, k, s]) * p[(s, j)]
                    + np.get(&[i, k, s]) * frame.dp.get(&[h, s, j])
            })
            .sum::<f64>()
    });
    let gamma_prime = lc.gamma.add(&q_mixed.scale(sign));
    let dgamma_prime = lc.dgamma.add(&dq.scale(sign));

    let lower = |t: &DenseTensor| {
        DenseTensor::covariant_from_fn(n, 3, |ix| {
            let (i, j, l) = (ix[0], ix[1], ix[2]);
            (0..n).map(|k| g[(l, k)] * t.get(&[k, i, j])).sum()
        })
    };
    let q = lower(&q_mixed);
    let torsion_mixed = DenseTensor::from_fn(n, &[UP, DN, DN], |ix| {
        let (k, i, j) = (ix[0], ix[1], ix[2]);
        gamma_prime.get(&[k, i, j]) - gamma_prime.get(&[k, j, i])
    });
    let torsion = lower(&torsion_mixed);
    PConnectionData {
        q_mixed,
        q,
        gamma_prime,
        dgamma_prime,
        torsion,
    }
}

/// `Q(x,y,z) = -½ F(x,Py,z)`, assembled from `F` alone.
pub fn q_from_f(f: &DenseTensor, p: &DMatrix<f64>) -> DenseTensor {
    f.transform_slot(1, p).expect("rank 3").scale(-0.5)
}

/// `T(x,y,z) = -½{F(x,Py,z) - F(y,Px,z)}`.
pub fn torsion_formula(f: &DenseTensor, p: &DMatrix<f64>) -> DenseTensor {
    let a = f.transform_slot(1, p).expect("rank 3");
    a.sub(&a.permute(&[1, 0, 2])).scale(-0.5)
}

/// Residuals of the unconditional connection-level identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionResiduals {
    /// `Q` from `∇P` versus `Q` from `F`.
    pub q_formula: f64,
    /// `Q(x,y,z) + Q(x,z,y)`
    pub q_antisymmetry: f64,
    /// torsion from `Γ'` versus the closed form in `F`.
    pub torsion_formula: f64,
    /// `T(x,y,z) + T(y,x,z)`
    pub torsion_antisymmetry: f64,
    /// cyclic sum of `T(x,y,Pz)` over `x,y,z`
    pub torsion_cyclic: f64,
    /// `∇'g`
    pub metric_parallel: f64,
    /// `∇'P`
    pub structure_parallel: f64,
}

pub fn connection_residuals(
    frame: &PointFrame,
    st: &StructureTensors,
    pc: &PConnectionData,
) -> ConnectionResiduals {
    let p = &frame.p;
    let q2 = q_from_f(&st.f, p);
    let t2 = torsion_formula(&st.f, p);
    let t = &pc.torsion;
    let tp = t.transform_slot(2, p).expect("rank 3");
    ConnectionResiduals {
        q_formula: normalized(pc.q.max_abs_diff(&q2), pc.q.max_abs()),
        q_antisymmetry: normalized(pc.q.add(&pc.q.permute(&[0, 2, 1])).max_abs(), pc.q.max_abs()),
        torsion_formula: normalized(t.max_abs_diff(&t2), t.max_abs()),
        torsion_antisymmetry: normalized(t.add(&t.permute(&[1, 0, 2])).max_abs(), t.max_abs()),
        torsion_cyclic: normalized(
            tp.cyclic_sum_rank3().expect("rank 3").max_abs(),
            tp.max_abs(),
        ),
        metric_parallel: metric_compatibility_residual(frame, &pc.gamma_prime),
        structure_parallel: structure_parallel_residual(frame, &pc.gamma_prime),
    }
}

/// Curvature of `∇'` assembled from `Γ'` and `∂Γ'`.
pub fn curvature_direct(pc: &PConnectionData, g: &DMatrix<f64>) -> DenseTensor {
    curvature_tensor(&pc.gamma_prime, &pc.dgamma_prime, g)
}

/// `K(x,y,z,w) = -g((∇_x P)z, (∇_y P)w) + g((∇_y P)z, (∇_x P)w)`.
pub fn k_tensor(st: &StructureTensors) -> DenseTensor {
    let gm = &st.gram;
    DenseTensor::covariant_from_fn(st.f.dim(), 4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        -gm.get(&[i, k, j, l]) + gm.get(&[j, k, i, l])
    })
}

/// `R' = ¼{2R(x,y,z,w) + 2R(x,y,Pz,Pw) + K(x,y,z,w)}`.
pub fn r_prime_formula(r: &DenseTensor, k: &DenseTensor, p: &DMatrix<f64>) -> DenseTensor {
    r.scale(2.0)
        .add(&twist_last_pair(r, p).scale(2.0))
        .add(k)
        .scale(0.25)
}

/// `H(x,y,z,w) = R(x,y,z,w) + R(x,y,Pz,Pw)`.
pub fn h_tensor(r: &DenseTensor, p: &DMatrix<f64>) -> DenseTensor {
    r.add(&twist_last_pair(r, p))
}

/// Residuals of the Riemannian P-tensor conditions, each normalized by `1 + max|L|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PTensorResiduals {
    pub antisymmetry: f64,
    pub bianchi: f64,
    /// `L(x,y,Pz,Pw) - L(x,y,z,w)`
    pub p_compat: f64,
}

impl PTensorResiduals {
    pub fn is_p_tensor(&self, tol: f64) -> bool {
        self.antisymmetry <= tol && self.bianchi <= tol && self.p_compat <= tol
    }
}

pub fn p_tensor_check(l: &DenseTensor, p: &DMatrix<f64>) -> PTensorResiduals {
    let sym = curvature_symmetry(l);
    PTensorResiduals {
        antisymmetry: sym.antisymmetry,
        bianchi: sym.bianchi,
        p_compat: normalized(twist_last_pair(l, p).max_abs_diff(l), l.max_abs()),
    }
}

/// Curvature-level data of the P-connection at one point.
#[derive(Debug, Clone)]
pub struct PCurvatureData {
    pub r_prime_direct: DenseTensor,
    pub r_prime_formula: DenseTensor,
    pub k: DenseTensor,
    pub h: DenseTensor,
    pub r_prime_traces: Traces,
    pub k_traces: Traces,
    pub h_traces: Traces,
}

/// Assembles the curvature package. `k` is passed in so a caller can supply
/// a perturbed tensor.
pub fn p_curvature(
    frame: &PointFrame,
    cd: &CurvatureData,
    pc: &PConnectionData,
    k: DenseTensor,
) -> PCurvatureData {
    let p = &frame.p;
    let r_prime_direct = curvature_direct(pc, frame.g());
    let r_prime_formula = r_prime_formula(&cd.r, &k, p);
    let h = h_tensor(&cd.r, p);
    PCurvatureData {
        r_prime_traces: scalar_invariants(&r_prime_direct, &frame.metric, p),
        k_traces: scalar_invariants(&k, &frame.metric, p),
        h_traces: scalar_invariants(&h, &frame.metric, p),
        r_prime_direct,
        r_prime_formula,
        k,
        h,
    }
}

/// `ρ(L)`, `τ(L)`, `ρ*(L)`, `τ*(L)` and the doubly twisted trace, with the
/// same pattern as for `R`.
pub fn scalar_invariants(l: &DenseTensor, metric: &MetricPair, p: &DMatrix<f64>) -> Traces {
    traces(l, metric, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassResult {
    pub flag: bool,
    pub residual: f64,
}

impl ClassResult {
    fn new(residual: f64, tol: f64) -> Self {
        Self {
            flag: residual <= tol,
            residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassFlags {
    #[serde(rename = "W0")]
    pub w0: ClassResult,
    #[serde(rename = "W3")]
    pub w3: ClassResult,
    #[serde(rename = "L1")]
    pub l1: ClassResult,
    #[serde(rename = "L2")]
    pub l2: ClassResult,
}

/// Class membership at one point.
///
/// Residuals: `W₀` is `max|F|`; `W₃` is `max|σF| / (1 + max|F|)`; `L₂` is
/// `max|σ R(x,y,Pz,Pw)| / (1 + max|R|)`; `L₁` is
/// `max|R(x,y,Pz,Pw) - R| / (1 + max|R|)`.
pub fn class_tests(st: &StructureTensors, cd: &CurvatureData, p: &DMatrix<f64>, tol: f64) -> ClassFlags {
    let f = &st.f;
    let r = &cd.r;
    let r_pp = twist_last_pair(r, p);
    let w3 = normalized(f.cyclic_sum_rank3().expect("rank 3").max_abs(), f.max_abs());
    let l2 = normalized(r_pp.cyclic_sum_3().expect("rank 4").max_abs(), r.max_abs());
    let l1 = normalized(r_pp.max_abs_diff(r), r.max_abs());
    ClassFlags {
        w0: ClassResult::new(f.max_abs(), tol),
        w3: ClassResult::new(w3, tol),
        l1: ClassResult::new(l1, tol),
        l2: ClassResult::new(l2, tol),
    }
}

/// The three tensors spanning 4-dimensional Riemannian P-tensors:
/// `π₁ = g(y,z)g(x,w) - g(x,z)g(y,w)`,
/// `π₂ = g(y,Pz)g(x,Pw) - g(x,Pz)g(y,Pw)`,
/// `π₃ = g(y,z)g(x,Pw) - g(x,z)g(y,Pw) + g(y,Pz)g(x,w) - g(x,Pz)g(y,w)`.
pub fn pi_basis(g: &DMatrix<f64>, p_lower: &DMatrix<f64>) -> [DenseTensor; 3] {
    let n = g.nrows();
    let q = p_lower;
    let pi1 = DenseTensor::covariant_from_fn(n, 4, |ix| {
        let (x, y, z, w) = (ix[0], ix[1], ix[2], ix[3]);
        g[(y, z)] * g[(x, w)] - g[(x, z)] * g[(y, w)]
    });
    let pi2 = DenseTensor::covariant_from_fn(n, 4, |ix| {
        let (x, y, z, w) = (ix[0], ix[1], ix[2], ix[3]);
        q[(y, z)] * q[(x, w)] - q[(x, z)] * q[(y, w)]
    });
    let pi3 = DenseTensor::covariant_from_fn(n, 4, |ix| {
        let (x, y, z, w) = (ix[0], ix[1], ix[2], ix[3]);
        g[(y, z)] * q[(x, w)] - g[(x, z)] * q[(y, w)] + q[(y, z)] * g[(x, w)]
            - q[(x, z)] * g[(y, w)]
    });
    [pi1, pi2, pi3]
}

/// All scalar quantities entering the relations, gathered at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scalars {
    pub tau: f64,
    pub tau_star: f64,
    pub tau_star_star: f64,
    pub tau_prime: f64,
    pub tau_prime_star: f64,
    pub tau_k: f64,
    pub tau_star_k: f64,
    pub tau_h: f64,
    pub tau_star_h: f64,
    pub nu_h: f64,
    pub nu_star_h: f64,
    pub norm_nabla_p: f64,
}

impl Scalars {
    pub fn collect(cd: &CurvatureData, st: &StructureTensors, pcd: &PCurvatureData) -> Self {
        Self {
            tau: cd.tau,
            tau_star: cd.tau_star,
            tau_star_star: cd.tau_star_star,
            tau_prime: pcd.r_prime_traces.tau,
            tau_prime_star: pcd.r_prime_traces.tau_star,
            tau_k: pcd.k_traces.tau,
            tau_star_k: pcd.k_traces.tau_star,
            tau_h: pcd.h_traces.tau,
            tau_star_h: pcd.h_traces.tau_star,
            nu_h: pcd.h_traces.tau / 8.0,
            nu_star_h: pcd.h_traces.tau_star / 8.0,
            norm_nabla_p: st.norm_nabla_p,
        }
    }
}

/// `|a - b| / (1 + max(|a|, |b|))`
fn scalar_gap(a: f64, b: f64) -> f64 {
    normalized((a - b).abs(), a.abs().max(b.abs()))
}

/// Residuals of the scalar and Ricci-level relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRelations {
    /// `ρ(y,z) + ρ*(y,Pz) - 2ρ'(y,z) + ½ρ(K)(y,z)`
    pub ricci_relation: f64,
    /// `τ + τ** = 2τ' - ½τ(K)`
    pub tau_sum: f64,
    /// `τ = τ' - ¼(τ(K) - ‖∇P‖)`
    pub tau_via_norm: f64,
    /// `τ(K) = ½‖∇P‖`
    pub tau_k_norm: f64,
    /// `τ = τ' + ⅛‖∇P‖`
    pub tau_prime_norm: f64,
    /// `‖∇P‖ = -8(τ' - τ) = (8/3)(τ' - τ**) = 2τ(K)`, worst link
    pub chain: f64,
    /// `0` when the four degenerate assertions `‖∇P‖ = 0`, `τ' = τ`,
    /// `τ' = τ**`, `τ(K) = 0` are all true or all false at `tol`, else `1`.
    pub equivalences: f64,
}

pub fn scalar_relations(
    frame: &PointFrame,
    cd: &CurvatureData,
    pcd: &PCurvatureData,
    s: &Scalars,
    tol: f64,
) -> ScalarRelations {
    let p = &frame.p;
    // ρ*(y,Pz) = g^{ij} R(e_i,y,Pz,Pe_j) is the Ricci trace of R(x,y,Pz,Pw).
    let rho_star_p = traces(&twist_last_pair(&cd.r, p), &frame.metric, p).rho;
    let lhs = cd.rho.add(&rho_star_p);
    let rhs = pcd
        .r_prime_traces
        .rho
        .scale(2.0)
        .sub(&pcd.k_traces.rho.scale(0.5));
    let scale = cd
        .rho
        .max_abs()
        .max(rho_star_p.max_abs())
        .max(pcd.r_prime_traces.rho.max_abs())
        .max(pcd.k_traces.rho.max_abs());
    let norm = s.norm_nabla_p;
    let chain = scalar_gap(norm, -8.0 * (s.tau_prime - s.tau))
        .max(scalar_gap(norm, 8.0 / 3.0 * (s.tau_prime - s.tau_star_star)))
        .max(scalar_gap(norm, 2.0 * s.tau_k));
    let assertions = [
        norm.abs() <= tol,
        scalar_gap(s.tau_prime, s.tau) <= tol,
        scalar_gap(s.tau_prime, s.tau_star_star) <= tol,
        normalized(s.tau_k.abs(), 0.0) <= tol,
    ];
    let agree = assertions.iter().all(|&a| a == assertions[0]);
    ScalarRelations {
        ricci_relation: normalized(lhs.max_abs_diff(&rhs), scale),
        tau_sum: scalar_gap(s.tau + s.tau_star_star, 2.0 * s.tau_prime - 0.5 * s.tau_k),
        tau_via_norm: scalar_gap(s.tau, s.tau_prime - 0.25 * (s.tau_k - norm)),
        tau_k_norm: scalar_gap(s.tau_k, 0.5 * norm),
        tau_prime_norm: scalar_gap(s.tau, s.tau_prime + norm / 8.0),
        chain,
        equivalences: if agree { 0.0 } else { 1.0 },
    }
}

/// Residuals of the 4-dimensional decomposition of `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition4d {
    /// `‖H - ν(H)(π₁+π₂) - ν*(H)π₃‖`, normalized by `1 + max|H|`
    pub decomposition: f64,
    /// `τ(H) = (4τ' - τ(K))/2`
    pub tau_h: f64,
    /// `τ*(H) = (4τ'* - τ*(K))/2`
    pub tau_star_h: f64,
    /// The decomposition with the coefficients rewritten through `τ'`, `τ(K)`.
    pub proposition: f64,
}

/// `ν(π₁+π₂) + ν*π₃`.
pub fn decomposition_model(pi: &[DenseTensor; 3], nu: f64, nu_star: f64) -> DenseTensor {
    pi[0].add(&pi[1]).scale(nu).add(&pi[2].scale(nu_star))
}

/// Returns `None` unless `n = 4`.
///
/// The symmetric combination `π₁+π₂` is used: `π₁ - π₂` changes sign under
/// `(z,w) ↦ (Pz,Pw)` and so cannot appear in the expansion of a P-tensor,
/// while `τ(π₁+π₂) = 8` matches the normalization `ν = τ(H)/8`.
pub fn decomposition_4d(frame: &PointFrame, pcd: &PCurvatureData, s: &Scalars) -> Option<Decomposition4d> {
    if frame.dim() != 4 {
        return None;
    }
    let pi = pi_basis(frame.g(), &frame.p_lower);
    let h = &pcd.h;
    let scale = h.max_abs();
    let model = decomposition_model(&pi, s.nu_h, s.nu_star_h);
    let nu_p = (4.0 * s.tau_prime - s.tau_k) / 16.0;
    let nu_star_p = (4.0 * s.tau_prime_star - s.tau_star_k) / 16.0;
    let prop = decomposition_model(&pi, nu_p, nu_star_p);
    Some(Decomposition4d {
        decomposition: normalized(h.max_abs_diff(&model), scale),
        tau_h: scalar_gap(s.tau_h, (4.0 * s.tau_prime - s.tau_k) / 2.0),
        tau_star_h: scalar_gap(s.tau_star_h, (4.0 * s.tau_prime_star - s.tau_star_k) / 2.0),
        proposition: normalized(h.max_abs_diff(&prop), scale),
    })
}

/// Residuals of the consequences of `R(x,y,Pz,Pw) = R(x,y,z,w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Relations {
    /// `R = R' - ¼K`
    pub curvature: f64,
    /// `τ = τ' - ¼τ(K)`
    pub tau: f64,
    /// `τ* = τ'* - ¼τ*(K)`
    pub tau_star: f64,
    /// `τ = ½τ(H)`, reported for `n = 4`
    pub dim4_tau: Option<f64>,
    /// `τ* = ½τ*(H)`, reported for `n = 4`
    pub dim4_tau_star: Option<f64>,
}

pub fn l1_relations(frame: &PointFrame, cd: &CurvatureData, pcd: &PCurvatureData, s: &Scalars) -> L1Relations {
    let rhs = pcd.r_prime_direct.sub(&pcd.k.scale(0.25));
    let dim4 = frame.dim() == 4;
    L1Relations {
        curvature: normalized(cd.r.max_abs_diff(&rhs), cd.r.max_abs().max(rhs.max_abs())),
        tau: scalar_gap(s.tau, s.tau_prime - 0.25 * s.tau_k),
        tau_star: scalar_gap(s.tau_star, s.tau_prime_star - 0.25 * s.tau_star_k),
        dim4_tau: dim4.then(|| scalar_gap(s.tau, 0.5 * s.tau_h)),
        dim4_tau_star: dim4.then(|| scalar_gap(s.tau_star, 0.5 * s.tau_star_h)),
    }
}

/// Bianchi defect of `R'` against `¼(2σR(x,y,Pz,Pw) + σK)`, normalized.
pub fn p_tensor_criterion_residual(r: &DenseTensor, k: &DenseTensor, r_prime: &DenseTensor, p: &DMatrix<f64>) -> f64 {
    let cs = |t: &DenseTensor| t.cyclic_sum_3().expect("rank 4");
    let lhs = cs(r_prime);
    let rhs = cs(&twist_last_pair(r, p))
        .scale(2.0)
        .add(&cs(k))
        .scale(0.25);
    normalized(lhs.max_abs_diff(&rhs), r_prime.max_abs().max(r.max_abs()).max(k.max_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{christoffel, riemann, structure_tensors};
    use crate::manifold::{evaluate_frame, load_spec};

    fn frame(metric: serde_json::Value, structure: serde_json::Value, point: &[f64]) -> PointFrame {
        let n = point.len();
        let coords: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let text = serde_json::json!({
            "dimension": n, "coordinates": coords, "metric": metric,
            "structure": structure, "points": [point],
        })
        .to_string();
        evaluate_frame(&load_spec(&text).unwrap(), point).unwrap()
    }

    fn identity(n: usize) -> serde_json::Value {
        serde_json::json!((0..n)
            .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>())
            .collect::<Vec<_>>())
    }

    fn rotating(theta: f64) -> PointFrame {
        frame(
            identity(2),
            serde_json::json!([["cos(x1)", "sin(x1)"], ["sin(x1)", "-cos(x1)"]]),
            &[theta, 0.0],
        )
    }

    fn s3_line(point: &[f64]) -> PointFrame {
        frame(
            serde_json::json!([
                ["1/4", "0", "0", "0"],
                ["0", "1/4", "cos(x1)/4", "0"],
                ["0", "cos(x1)/4", "1/4", "0"],
                ["0", "0", "0", "1"]
            ]),
            serde_json::json!([
                ["1", "0", "0", "0"],
                ["0", "1", "0", "0"],
                ["0", "-2*cos(x1)", "-1", "0"],
                ["0", "0", "0", "-1"]
            ]),
            point,
        )
    }

    struct All {
        f: PointFrame,
        cd: CurvatureData,
        st: StructureTensors,
        pc: PConnectionData,
        pcd: PCurvatureData,
    }

    fn all(f: PointFrame) -> All {
        let lc = christoffel(&f);
        let cd = riemann(&lc, &f);
        let st = structure_tensors(&f, &lc);
        let pc = build_p_connection(&f, &lc, &st);
        let k = k_tensor(&st);
        let pcd = p_curvature(&f, &cd, &pc, k);
        All { f, cd, st, pc, pcd }
    }

    #[test]
    fn rotating_2d_q_values() {
        let a = all(rotating(0.0));
        assert_eq!(a.pc.q.get(&[0, 0, 1]), -0.5);
        assert_eq!(a.pc.q.get(&[0, 1, 0]), 0.5);
        for j in 0..2 {
            for k in 0..2 {
                assert_eq!(a.pc.q.get(&[1, j, k]), 0.0);
            }
        }
        let res = connection_residuals(&a.f, &a.st, &a.pc);
        assert!(res.q_formula <= 1e-12 && res.q_antisymmetry <= 1e-12);
        assert_eq!(a.pcd.r_prime_direct.max_abs(), 0.0);
        assert_eq!(a.pcd.k.max_abs(), 0.0);
    }

    #[test]
    fn flat_product_is_trivial() {
        let a = all(frame(
            identity(4),
            serde_json::json!([["1","0","0","0"],["0","1","0","0"],["0","0","-1","0"],["0","0","0","-1"]]),
            &[0.3, -0.2, 0.1, 0.5],
        ));
        assert_eq!(a.pc.q.max_abs(), 0.0);
        assert_eq!(a.pc.torsion.max_abs(), 0.0);
        assert_eq!(a.pcd.r_prime_direct.max_abs(), 0.0);
        assert_eq!(a.pcd.h.max_abs(), 0.0);
        let s = Scalars::collect(&a.cd, &a.st, &a.pcd);
        let d = decomposition_4d(&a.f, &a.pcd, &s).unwrap();
        assert_eq!((d.decomposition, d.tau_h, d.tau_star_h, d.proposition), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn s3_line_theorem_and_w3_identities() {
        for pt in [[0.9, 0.3, -0.4, 0.0], [1.7, 2.0, 0.5, -1.0]] {
            let a = all(s3_line(&pt));
            let flags = class_tests(&a.st, &a.cd, &a.f.p, 1e-9);
            assert!(flags.w3.flag, "W3 residual {}", flags.w3.residual);
            assert!(!flags.w0.flag);
            let diff = a.pcd.r_prime_direct.max_abs_diff(&a.pcd.r_prime_formula);
            assert!(normalized(diff, a.pcd.r_prime_direct.max_abs()) <= 1e-12);
            assert!(a.pcd.k.max_abs() > 0.1);
            let s = Scalars::collect(&a.cd, &a.st, &a.pcd);
            assert!(s.norm_nabla_p > 0.1);
            let rel = scalar_relations(&a.f, &a.cd, &a.pcd, &s, 1e-9);
            assert!(rel.tau_k_norm <= 1e-12, "{rel:?}");
            assert!(rel.tau_prime_norm <= 1e-12, "{rel:?}");
            assert!(rel.ricci_relation <= 1e-12 && rel.tau_sum <= 1e-12);
            let res = connection_residuals(&a.f, &a.st, &a.pc);
            assert!(res.metric_parallel <= 1e-12 && res.structure_parallel <= 1e-12, "{res:?}");
            assert!(res.torsion_formula <= 1e-12 && res.torsion_cyclic <= 1e-12, "{res:?}");
        }
    }

    #[test]
    fn r_prime_and_k_are_p_invariant_curvature_pairs() {
        let a = all(s3_line(&[1.1, 0.0, 0.0, 0.0]));
        for t in [&a.pcd.r_prime_direct, &a.pcd.k] {
            let r = p_tensor_check(t, &a.f.p);
            assert!(r.antisymmetry <= 1e-12 && r.p_compat <= 1e-12, "{r:?}");
        }
        let crit = p_tensor_criterion_residual(&a.cd.r, &a.pcd.k, &a.pcd.r_prime_direct, &a.f.p);
        assert!(crit <= 1e-12);
    }

    #[test]
    fn pi_basis_traces_in_dimension_four() {
        let g = DMatrix::<f64>::identity(4, 4);
        let p = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0]));
        let metric = MetricPair::identity(4);
        let pi = pi_basis(&g, &p);
        let tr: Vec<Traces> = pi.iter().map(|t| traces(t, &metric, &p)).collect();
        assert_eq!(tr[0].tau, 12.0);
        assert_eq!(tr[1].tau, -4.0);
        assert_eq!(tr[2].tau, 0.0);
        assert_eq!(tr[0].tau_star, 0.0);
        assert_eq!(tr[1].tau_star, 0.0);
        assert_eq!(tr[2].tau_star, 8.0);
        assert_eq!(pi[0].get(&[0, 1, 1, 0]), 1.0);
        // π₁ ↔ π₂ under (z,w) ↦ (Pz,Pw); π₃ is invariant
        assert_eq!(twist_last_pair(&pi[0], &p), pi[1]);
        assert_eq!(twist_last_pair(&pi[2], &p), pi[2]);
    }

    #[test]
    fn pi_two_with_identity_is_pi_one() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let pi = pi_basis(&g, &g);
        assert_eq!(pi[0], pi[1]);
    }
}
