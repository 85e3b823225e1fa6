//! Independent oracles: central finite differences for the jets, and plain
//! index loops for every contraction-based scalar.

use nalgebra::DMatrix;

use super::pipeline::PointAnalysis;
use crate::expr::{finite_difference_jet2_with, EvalError, Expression, FdSteps};
use crate::manifold::ManifoldSpec;
use crate::tensor::DenseTensor;

/// Componentwise bound on `|AD - FD| / (1 + |AD|)` for gradients.
pub const GRADIENT_TOL: f64 = 1e-6;
/// Componentwise bound on `|AD - FD| / (1 + |AD|)` for Hessians.
pub const HESSIAN_TOL: f64 = 1e-4;
/// Bound on `|contracted - looped| / (1 + |contracted|)`.
pub const LOOP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdFdGap {
    pub gradient: f64,
    pub hessian: f64,
}

impl AdFdGap {
    pub fn within_bounds(&self) -> bool {
        self.gradient <= GRADIENT_TOL && self.hessian <= HESSIAN_TOL
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs())
}

pub fn expression_gap(e: &Expression, point: &[f64]) -> Result<AdFdGap, EvalError> {
    let ad = e.jet2(point)?;
    let fd = finite_difference_jet2_with(e, point, FdSteps::default())?;
    let n = point.len();
    let mut gap = AdFdGap::default();
    for a in 0..n {
        gap.gradient = gap.gradient.max(rel(ad.gradient()[a], fd.gradient()[a]));
        for b in 0..n {
            gap.hessian = gap.hessian.max(rel(ad.hessian(a, b), fd.hessian(a, b)));
        }
    }
    Ok(gap)
}

/// Worst AD/FD gap over every metric and structure entry at `point`.
pub fn ad_vs_fd(spec: &ManifoldSpec, point: &[f64]) -> Result<AdFdGap, EvalError> {
    let mut worst = AdFdGap::default();
    for e in spec.metric.iter().chain(&spec.structure).flatten() {
        let g = expression_gap(e, point)?;
        worst.gradient = worst.gradient.max(g.gradient);
        worst.hessian = worst.hessian.max(g.hessian);
    }
    Ok(worst)
}

/// `(τ, τ*, τ**)` of a covariant rank-4 tensor by explicit sums.
pub fn naive_traces(l: &DenseTensor, g_inv: &DMatrix<f64>, p: &DMatrix<f64>) -> [f64; 3] {
    let n = l.dim();
    let mut tau = 0.0;
    let mut tau_star = 0.0;
    let mut tau_ss = 0.0;
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let w = g_inv[(i, j)] * g_inv[(a, b)];
                    tau += w * l.get(&[a, i, j, b]);
                    for s in 0..n {
                        tau_star += w * l.get(&[a, i, j, s]) * p[(s, b)];
                        for t in 0..n {
                            // g^{ij} g^{ab} L(e_i, e_a, Pe_b, Pe_j)
                            tau_ss += w * l.get(&[i, a, s, t]) * p[(s, b)] * p[(t, j)];
                        }
                    }
                }
            }
        }
    }
    [tau, tau_star, tau_ss]
}

/// `g^{ij} g^{ks} g_ab (∇_i P)^a_k (∇_j P)^b_s` by explicit sums.
pub fn naive_norm_nabla_p(nabla_p: &DenseTensor, g: &DMatrix<f64>, g_inv: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for s in 0..n {
                    let w = g_inv[(i, j)] * g_inv[(k, s)];
                    for a in 0..n {
                        for b in 0..n {
                            acc += w * g[(a, b)] * nabla_p.get(&[i, a, k]) * nabla_p.get(&[j, b, s]);
                        }
                    }
                }
            }
        }
    }
    acc
}

/// `max |R(x,y,Pz,Pw) - R(x,y,z,w)| / (1 + max|R|)` by explicit sums.
pub fn naive_l1_residual(r: &DenseTensor, p: &DMatrix<f64>) -> f64 {
    let n = r.dim();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for w in 0..n {
                    let mut twisted = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            twisted += r.get(&[x, y, a, b]) * p[(a, z)] * p[(b, w)];
                        }
                    }
                    let v = r.get(&[x, y, z, w]);
                    worst = worst.max((twisted - v).abs());
                    scale = scale.max(v.abs());
                }
            }
        }
    }
    worst / (1.0 + scale)
}

/// A named disagreement between a contracted value and its looped oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopGap {
    pub quantity: &'static str,
    pub gap: f64,
}

/// Worst relative disagreement over every scalar of the analysis.
pub fn naive_loop_gap(a: &PointAnalysis) -> LoopGap {
    let gi = a.frame.g_inv();
    let p = &a.frame.p;
    let mut worst = LoopGap {
        quantity: "none",
        gap: 0.0,
    };
    let mut note = |quantity: &'static str, contracted: f64, looped: f64| {
        let gap = rel(contracted, looped);
        if !(gap <= worst.gap) {
            worst = LoopGap { quantity, gap };
        }
    };
    let s = &a.scalars;
    let r = naive_traces(&a.cd.r, gi, p);
    note("tau", s.tau, r[0]);
    note("tau_star", s.tau_star, r[1]);
    note("tau_star_star", s.tau_star_star, r[2]);
    let rp = naive_traces(&a.pcd.r_prime_direct, gi, p);
    note("tau_prime", s.tau_prime, rp[0]);
    note("tau_prime_star", s.tau_prime_star, rp[1]);
    let k = naive_traces(&a.pcd.k, gi, p);
    note("tau_k", s.tau_k, k[0]);
    note("tau_star_k", s.tau_star_k, k[1]);
    let h = naive_traces(&a.pcd.h, gi, p);
    note("tau_h", s.tau_h, h[0]);
    note("tau_star_h", s.tau_star_h, h[1]);
    note(
        "norm_nabla_p",
        s.norm_nabla_p,
        naive_norm_nabla_p(&a.st.nabla_p, a.frame.g(), gi),
    );
    note("L1 residual", a.flags.l1.residual, naive_l1_residual(&a.cd.r, p));
    worst
}
