//! The versioned list of report checks.
//!
//! Every point of a report carries exactly one entry per catalogue item, in
//! catalogue order. A check passes iff its residual is within its tolerance
//! and every gating hypothesis holds; if a gate fails its status is
//! `hypothesis_not_met` whatever the residual.

use serde::Serialize;

pub const CATALOGUE_VERSION: &str = "1.0";

/// A hypothesis that a conditional identity depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gate {
    /// cyclic sum of `F` vanishes
    W3,
    /// `R(x,y,Pz,Pw) = R(x,y,z,w)`
    L1,
    /// cyclic sum of `R(x,y,Pz,Pw)` vanishes
    L2,
    /// the curvature of the P-connection is a Riemannian P-tensor
    #[serde(rename = "R'_p_tensor")]
    RPrimePTensor,
    /// `H` is a Riemannian P-tensor
    #[serde(rename = "H_p_tensor")]
    HPTensor,
    /// the manifold is 4-dimensional
    Dim4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// The run tolerance (`--tol`, `PAPM_TOL`, the spec file, or `1e-9`).
    Run,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub id: &'static str,
    pub tolerance: Tolerance,
    pub gates: &'static [Gate],
    pub statement: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisNotMet,
}

impl Status {
    /// A missing or NaN residual never passes.
    pub fn decide(residual: Option<f64>, tolerance: f64, gates_hold: bool) -> Status {
        if !gates_hold {
            return Status::HypothesisNotMet;
        }
        match residual {
            Some(r) if r <= tolerance => Status::Pass,
            _ => Status::Fail,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisNotMet => "hypothesis_not_met",
        }
    }
}

use Gate::*;
use Tolerance::{Fixed, Run};

const fn check(
    id: &'static str,
    tolerance: Tolerance,
    gates: &'static [Gate],
    statement: &'static str,
) -> CheckSpec {
    CheckSpec {
        id,
        tolerance,
        gates,
        statement,
    }
}

const SCALAR_GATES: &[Gate] = &[W3, L2, RPrimePTensor];
const DIM4_GATES: &[Gate] = &[Dim4, HPTensor];

pub const CATALOGUE: &[CheckSpec] = &[
    check("axioms.involution", Run, &[], "P^2 = I"),
    check("axioms.compatibility", Run, &[], "g(Px,Py) = g(x,y)"),
    check("axioms.trace", Run, &[], "tr P = 0"),
    check("axioms.metric_symmetry", Run, &[], "g_ij = g_ji"),
    check("axioms.metric_positive", Fixed(0.0), &[], "smallest eigenvalue of g exceeds the run tolerance (0/1)"),
    check("lc.christoffel_symmetry", Fixed(0.0), &[], "Γ^k_ij = Γ^k_ji"),
    check("lc.metric_compat", Fixed(1e-10), &[], "∇g = 0"),
    check("curv.antisymmetry", Fixed(1e-9), &[], "R(x,y,z,w) = -R(y,x,z,w) = -R(x,y,w,z)"),
    check("curv.bianchi", Fixed(1e-9), &[], "cyclic sum of R(x,y,z,w) over x,y,z vanishes"),
    check("F.symmetry_yz", Fixed(1e-10), &[], "F(x,y,z) = F(x,z,y)"),
    check("F.p_twist", Fixed(1e-10), &[], "F(x,y,z) = -F(x,Py,Pz)"),
    check("F.p_swap", Fixed(1e-10), &[], "F(x,y,Pz) = -F(x,Py,z)"),
    check("F.nijenhuis_formula", Fixed(1e-10), &[], "lowered Nijenhuis tensor equals the mixed four-term assembly"),
    check("F.ricci_identity", Fixed(1e-8), &[], "(∇_x F)(y,z,w) - (∇_y F)(x,z,w) = R(x,y,Pz,w) - R(x,y,z,Pw)"),
    check("F.w3_norm_identity", Fixed(1e-8), &[W3], "‖∇P‖ = -2 g^ij g^ks g((∇_i P)e_k, (∇_s P)e_j)"),
    check("F.w3_tau_identity", Fixed(1e-8), &[W3], "‖∇P‖ = 2(τ - τ**)"),
    check("F.w3_l1_implies_w0", Fixed(1e-8), &[W3, L1], "‖∇P‖ = 0"),
    check("class.l1_implies_l2", Fixed(0.0), &[], "the L1 flag implies the L2 flag (0/1)"),
    check("thm.curvature_form", Fixed(1e-8), &[], "R' = ¼{2R(x,y,z,w) + 2R(x,y,Pz,Pw) + K(x,y,z,w)}"),
    check("thm.r_prime_symmetries", Fixed(1e-9), &[], "R' is antisymmetric in (x,y), (z,w) and R'(x,y,Pz,Pw) = R'(x,y,z,w)"),
    check("thm.k_symmetries", Fixed(1e-9), &[], "K is antisymmetric in (x,y), (z,w) and K(x,y,Pz,Pw) = K(x,y,z,w)"),
    check("thm.p_tensor_criterion", Fixed(1e-8), &[], "cyclic sum of R' equals ¼(2σR(x,y,Pz,Pw) + σK)"),
    check("thm.l2_equivalence", Fixed(0.0), &[L2], "R' is a P-tensor iff K satisfies the first Bianchi identity (0/1)"),
    check("thm.h_p_tensor", Fixed(1e-8), &[L2, RPrimePTensor], "H = R + R(x,y,Pz,Pw) is a Riemannian P-tensor"),
    check("conn.q_formula", Fixed(1e-10), &[], "Q from -½(∇P)P equals Q(x,y,z) = -½F(x,Py,z)"),
    check("conn.q_antisymmetry", Fixed(1e-10), &[], "Q(x,y,z) = -Q(x,z,y)"),
    check("conn.torsion_formula", Fixed(1e-10), &[], "T(x,y,z) = -½{F(x,Py,z) - F(y,Px,z)}"),
    check("conn.torsion_antisymmetry", Fixed(1e-10), &[], "T(x,y,z) = -T(y,x,z)"),
    check("conn.torsion_cyclic", Fixed(1e-9), &[], "cyclic sum of T(x,y,Pz) vanishes"),
    check("conn.metric_parallel", Fixed(1e-9), &[], "∇'g = 0"),
    check("conn.structure_parallel", Fixed(1e-9), &[], "∇'P = 0"),
    check("scalar.eq3_1", Fixed(1e-8), SCALAR_GATES, "ρ(y,z) + ρ*(y,Pz) = 2ρ'(y,z) - ½ρ(K)(y,z)"),
    check("scalar.eq3_2", Fixed(1e-8), SCALAR_GATES, "τ + τ** = 2τ' - ½τ(K)"),
    check("scalar.eq3_3", Fixed(1e-8), SCALAR_GATES, "τ = τ' - ¼(τ(K) - ‖∇P‖)"),
    check("scalar.eq3_4", Fixed(1e-8), &[W3], "τ(K) = ½‖∇P‖"),
    check("scalar.eq3_5", Fixed(1e-8), SCALAR_GATES, "τ = τ' + ⅛‖∇P‖"),
    check("scalar.prop_chain", Fixed(1e-8), SCALAR_GATES, "‖∇P‖ = -8(τ' - τ) = (8/3)(τ' - τ**) = 2τ(K)"),
    check("scalar.cor_equivalences", Fixed(0.0), SCALAR_GATES, "‖∇P‖ = 0, τ' = τ, τ' = τ**, τ(K) = 0 hold or fail together (0/1)"),
    check("dim4.decomposition", Fixed(1e-8), DIM4_GATES, "H = ν(H)(π₁+π₂) + ν*(H)π₃, ν = τ(H)/8, ν* = τ*(H)/8"),
    check("dim4.tau_h", Fixed(1e-8), DIM4_GATES, "τ(H) = (4τ' - τ(K))/2"),
    check("dim4.tau_star_h", Fixed(1e-8), DIM4_GATES, "τ*(H) = (4τ'* - τ*(K))/2"),
    check("dim4.proposition", Fixed(1e-8), DIM4_GATES, "H = (4τ' - τ(K))/16 (π₁+π₂) + (4τ'* - τ*(K))/16 π₃"),
    check("L1.curvature", Fixed(1e-8), &[W3, L1], "R = R' - ¼K"),
    check("L1.tau", Fixed(1e-8), &[W3, L1], "τ = τ' - ¼τ(K)"),
    check("L1.tau_star", Fixed(1e-8), &[W3, L1], "τ* = τ'* - ¼τ*(K)"),
    check("L1.dim4_tau", Fixed(1e-8), &[W3, L1, Dim4], "τ = ½τ(H)"),
    check("L1.dim4_tau_star", Fixed(1e-8), &[W3, L1, Dim4], "τ* = ½τ*(H)"),
];

pub fn lookup(id: &str) -> Option<(usize, &'static CheckSpec)> {
    CATALOGUE.iter().enumerate().find(|(_, c)| c.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        for (i, c) in CATALOGUE.iter().enumerate() {
            assert_eq!(lookup(c.id).unwrap().0, i, "{} listed twice", c.id);
        }
    }

    #[test]
    fn status_rules() {
        assert_eq!(Status::decide(Some(0.0), 0.0, true), Status::Pass);
        assert_eq!(Status::decide(Some(1e-9), 1e-10, true), Status::Fail);
        assert_eq!(Status::decide(Some(1e-9), 1e-10, false), Status::HypothesisNotMet);
        assert_eq!(Status::decide(Some(0.0), 1e-10, false), Status::HypothesisNotMet);
        assert_eq!(Status::decide(None, 1.0, true), Status::Fail);
        assert_eq!(Status::decide(Some(f64::NAN), 1.0, true), Status::Fail);
        assert_eq!(Status::decide(None, 1.0, false), Status::HypothesisNotMet);
    }
}
