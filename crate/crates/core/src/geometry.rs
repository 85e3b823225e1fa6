//! Levi-Civita level objects: Christoffel symbols, curvature and its traces,
//! the structure tensor `F(x,y,z) = g((∇_x P)y, z)`, its covariant derivative,
//! the Nijenhuis tensor and the square norm `‖∇P‖`.
//!
//! Index conventions. `gamma[k,i,j] = Γ^k_ij` with `∇_{e_i} e_j = Γ^k_ij e_k`;
//! `dgamma[h,k,i,j] = ∂_h Γ^k_ij`. The curvature operator is
//! `R(x,y)z = ∇_x∇_y z - ∇_y∇_x z - ∇_[x,y] z` and `R(x,y,z,w) = g(R(x,y)z, w)`,
//! so that `R_ijkl = g_lm (∂_i Γ^m_jk - ∂_j Γ^m_ik + Γ^m_is Γ^s_jk - Γ^m_js Γ^s_ik)`.
//! With this sign the unit sphere has scalar curvature `+2`.

use nalgebra::DMatrix;

use crate::manifold::PointFrame;
use crate::normalized;
use crate::tensor::{DenseTensor, MetricPair, Variance};

use Variance::{Contravariant as UP, Covariant as DN};

#[derive(Debug, Clone)]
pub struct LeviCivitaData {
    pub gamma: DenseTensor,
    pub dgamma: DenseTensor,
}

/// Christoffel symbols and their first derivatives.
///
/// `∂g^{-1}` enters analytically as `-g^{-1} ∂g g^{-1}`.
pub fn christoffel(frame: &PointFrame) -> LeviCivitaData {
    let n = frame.dim();
    let gi = frame.g_inv();
    let dg = &frame.dg;
    let ddg = &frame.ddg;

    // first kind: c[l,i,j] = ½(∂_i g_lj + ∂_j g_li - ∂_l g_ij)
    let c = DenseTensor::covariant_from_fn(n, 3, |ix| {
        let (l, i, j) = (ix[0], ix[1], ix[2]);
        0.5 * (dg.get(&[i, l, j]) + dg.get(&[j, l, i]) - dg.get(&[l, i, j]))
    });
    let dc = DenseTensor::covariant_from_fn(n, 4, |ix| {
        let (h, l, i, j) = (ix[0], ix[1], ix[2], ix[3]);
        0.5 * (ddg.get(&[h, i, l, j]) + ddg.get(&[h, j, l, i]) - ddg.get(&[h, l, i, j]))
    });
    // dginv[h,k,l] = ∂_h g^{kl}
    let dginv = DenseTensor::from_fn(n, &[DN, UP, UP], |ix| {
        let (h, k, l) = (ix[0], ix[1], ix[2]);
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc -= gi[(k, a)] * dg.get(&[h, a, b]) * gi[(b, l)];
            }
        }
        acc
    });

    let mut gamma = DenseTensor::zeros(n, &[UP, DN, DN]);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += gi[(k, l)] * c.get(&[l, i, j]);
                }
                gamma.set(&[k, i, j], acc);
                gamma.set(&[k, j, i], acc);
            }
        }
    }
    let mut dgamma = DenseTensor::zeros(n, &[DN, UP, DN, DN]);
    for h in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += dginv.get(&[h, k, l]) * c.get(&[l, i, j])
                            + gi[(k, l)] * dc.get(&[h, l, i, j]);
                    }
                    dgamma.set(&[h, k, i, j], acc);
                    dgamma.set(&[h, k, j, i], acc);
                }
            }
        }
    }
    LeviCivitaData { gamma, dgamma }
}

/// `max |(∇_i g)_jk|` for the connection `gamma`, normalized by `1 + max|∂g|`.
pub fn metric_compatibility_residual(frame: &PointFrame, gamma: &DenseTensor) -> f64 {
    let n = frame.dim();
    let g = frame.g();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = frame.dg.get(&[i, j, k]);
                for s in 0..n {
                    v -= gamma.get(&[s, i, j]) * g[(s, k)] + gamma.get(&[s, i, k]) * g[(j, s)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    normalized(worst, frame.dg.max_abs())
}

/// `max |(∇_i P)^k_j|` computed with connection `gamma`, normalized by `1 + max|∂P|`.
pub fn structure_parallel_residual(frame: &PointFrame, gamma: &DenseTensor) -> f64 {
    let n = frame.dim();
    let p = &frame.p;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                let mut v = frame.dp.get(&[i, k, j]);
                for s in 0..n {
                    v += gamma.get(&[k, i, s]) * p[(s, j)] - gamma.get(&[s, i, j]) * p[(k, s)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    normalized(worst, frame.dp.max_abs())
}

/// Lowered curvature of a connection given by `gamma` and its derivatives.
///
/// Valid for any (possibly torsionful) connection because coordinate vector
/// fields commute.
pub fn curvature_tensor(gamma: &DenseTensor, dgamma: &DenseTensor, g: &DMatrix<f64>) -> DenseTensor {
    let n = gamma.dim();
    // mixed r[m,i,j,k] = R^m_ijk
    let mut mixed = vec![0.0; n * n * n * n];
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = dgamma.get(&[i, m, j, k]) - dgamma.get(&[j, m, i, k]);
                    for s in 0..n {
                        v += gamma.get(&[m, i, s]) * gamma.get(&[s, j, k])
                            - gamma.get(&[m, j, s]) * gamma.get(&[s, i, k]);
                    }
                    mixed[((m * n + i) * n + j) * n + k] = v;
                }
            }
        }
    }
    DenseTensor::covariant_from_fn(n, 4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = 0.0;
        for m in 0..n {
            acc += g[(l, m)] * mixed[((m * n + i) * n + j) * n + k];
        }
        acc
    })
}

/// Ricci-type traces of a `(0,4)` tensor `L`.
#[derive(Debug, Clone)]
pub struct Traces {
    /// `ρ(y,z) = g^{ij} L(e_i,y,z,e_j)`
    pub rho: DenseTensor,
    pub tau: f64,
    /// `ρ*(y,z) = g^{ij} L(e_i,y,z,Pe_j)`
    pub rho_star: DenseTensor,
    pub tau_star: f64,
    /// `g^{ij} g^{ks} L(e_i,e_k,Pe_s,Pe_j)`
    pub tau_star_star: f64,
}

pub fn traces(l: &DenseTensor, metric: &MetricPair, p: &DMatrix<f64>) -> Traces {
    let contract = |t: &DenseTensor, a, b| {
        t.contract(a, b, Some(metric))
            .expect("covariant rank-4 input")
    };
    let rho = contract(l, 0, 3);
    let tau = contract(&rho, 0, 1).value();
    let l_p4 = l.transform_slot(3, p).expect("rank-4 input");
    let rho_star = contract(&l_p4, 0, 3);
    let tau_star = contract(&rho_star, 0, 1).value();
    let l_pp = l_p4.transform_slot(2, p).expect("rank-4 input");
    let tau_star_star = contract(&contract(&l_pp, 0, 3), 0, 1).value();
    Traces {
        rho,
        tau,
        rho_star,
        tau_star,
        tau_star_star,
    }
}

/// `L(x,y,Pz,Pw)`.
pub fn twist_last_pair(l: &DenseTensor, p: &DMatrix<f64>) -> DenseTensor {
    l.transform_slot(2, p)
        .and_then(|t| t.transform_slot(3, p))
        .expect("rank-4 input")
}

#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub r: DenseTensor,
    pub rho: DenseTensor,
    pub tau: f64,
    pub rho_star: DenseTensor,
    pub tau_star: f64,
    pub tau_star_star: f64,
}

pub fn riemann(lc: &LeviCivitaData, frame: &PointFrame) -> CurvatureData {
    let r = curvature_tensor(&lc.gamma, &lc.dgamma, frame.g());
    let t = traces(&r, &frame.metric, &frame.p);
    CurvatureData {
        r,
        rho: t.rho,
        tau: t.tau,
        rho_star: t.rho_star,
        tau_star: t.tau_star,
        tau_star_star: t.tau_star_star,
    }
}

/// Residuals of the curvature-like symmetries of a `(0,4)` tensor, each
/// normalized by `1 + max|L|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSymmetry {
    /// `max(|L(x,y,z,w) + L(y,x,z,w)|, |L(x,y,z,w) + L(x,y,w,z)|)`
    pub antisymmetry: f64,
    /// `max |cyclic sum over x,y,z|`
    pub bianchi: f64,
}

pub fn curvature_symmetry(l: &DenseTensor) -> CurvatureSymmetry {
    let scale = l.max_abs();
    let swap_xy = l.permute(&[1, 0, 2, 3]);
    let swap_zw = l.permute(&[0, 1, 3, 2]);
    let anti = l.add(&swap_xy).max_abs().max(l.add(&swap_zw).max_abs());
    let bianchi = l.cyclic_sum_3().expect("rank-4 input").max_abs();
    CurvatureSymmetry {
        antisymmetry: normalized(anti, scale),
        bianchi: normalized(bianchi, scale),
    }
}

#[derive(Debug, Clone)]
pub struct StructureTensors {
    /// `nabla_p[i,k,j] = (∇_i P)^k_j`
    pub nabla_p: DenseTensor,
    /// `d_nabla_p[h,i,k,j] = ∂_h (∇_i P)^k_j`
    pub d_nabla_p: DenseTensor,
    /// `F_ijk = g_ks (∇_i P)^s_j`
    pub f: DenseTensor,
    /// `N(e_i,e_j,e_l) = g(N(e_i,e_j), e_l)`
    pub nijenhuis: DenseTensor,
    /// `gram[i,k,j,s] = g((∇_i P)e_k, (∇_j P)e_s)`
    pub gram: DenseTensor,
    /// `‖∇P‖ = g^{ij} g^{ks} g((∇_i P)e_k, (∇_j P)e_s)`
    pub norm_nabla_p: f64,
    /// `g^{ij} g^{ks} g((∇_i P)e_k, (∇_s P)e_j)`
    pub swapped_norm: f64,
}

pub fn structure_tensors(frame: &PointFrame, lc: &LeviCivitaData) -> StructureTensors {
    let n = frame.dim();
    let p = &frame.p;
    let g = frame.g();
    let gamma = &lc.gamma;
    let dgamma = &lc.dgamma;

    let nabla_p = DenseTensor::from_fn(n, &[DN, UP, DN], |ix| {
        let (i, k, j) = (ix[0], ix[1], ix[2]);
        let mut v = frame.dp.get(&[i, k, j]);
        for s in 0..n {
            v += gamma.get(&[k, i, s]) * p[(s, j)] - gamma.get(&[s, i, j]) * p[(k, s)];
        }
        v
    });
    let d_nabla_p = DenseTensor::from_fn(n, &[DN, DN, UP, DN], |ix| {
        let (h, i, k, j) = (ix[0], ix[1], ix[2], ix[3]);
        let mut v = frame.ddp.get(&[h, i, k, j]);
        for s in 0..n {
            v += dgamma.get(&[h, k, i, s]) * p[(s, j)]
                + gamma.get(&[k, i, s]) * frame.dp.get(&[h, s, j])
                - dgamma.get(&[h, s, i, j]) * p[(k, s)]
                - gamma.get(&[s, i, j]) * frame.dp.get(&[h, k, s]);
        }
        v
    });
    let f = DenseTensor::covariant_from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        (0..n).map(|s| g[(k, s)] * nabla_p.get(&[i, s, j])).sum()
    });
    // N(x,y,z) = F(x,Py,z) - F(Px,y,z) + F(y,Px,z) - F(Py,x,z)
    let f_p2 = f.transform_slot(1, p).expect("rank 3");
    let f_p1 = f.transform_slot(0, p).expect("rank 3");
    let nijenhuis = DenseTensor::covariant_from_fn(n, 3, |ix| {
        let (i, j, l) = (ix[0], ix[1], ix[2]);
        f_p2.get(&[i, j, l]) - f_p1.get(&[i, j, l]) + f_p2.get(&[j, i, l]) - f_p1.get(&[j, i, l])
    });
    // gram[i,k,j,s] = Σ_a (∇_i P)^a_k F_{j s a}
    let gram = DenseTensor::covariant_from_fn(n, 4, |ix| {
        let (i, k, j, s) = (ix[0], ix[1], ix[2], ix[3]);
        (0..n)
            .map(|a| nabla_p.get(&[i, a, k]) * f.get(&[j, s, a]))
            .sum()
    });
    let m = &frame.metric;
    let full = |t: &DenseTensor, a, b| t.contract(a, b, Some(m)).expect("covariant");
    let norm_nabla_p = full(&full(&gram, 0, 2), 0, 1).value();
    let swapped_norm = full(&full(&gram, 0, 3), 0, 1).value();
    StructureTensors {
        nabla_p,
        d_nabla_p,
        f,
        nijenhuis,
        gram,
        norm_nabla_p,
        swapped_norm,
    }
}

/// Residuals of the three identities satisfied by `F`, normalized by `1 + max|F|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FSymmetry {
    /// `F(x,y,z) - F(x,z,y)`
    pub symmetric: f64,
    /// `F(x,y,z) + F(x,Py,Pz)`
    pub p_twist: f64,
    /// `F(x,y,Pz) + F(x,Py,z)`
    pub p_swap: f64,
}

pub fn f_symmetry(f: &DenseTensor, p: &DMatrix<f64>) -> FSymmetry {
    let scale = f.max_abs();
    let sym = f.sub(&f.permute(&[0, 2, 1])).max_abs();
    let f_py = f.transform_slot(1, p).expect("rank 3");
    let f_pypz = f_py.transform_slot(2, p).expect("rank 3");
    let f_pz = f.transform_slot(2, p).expect("rank 3");
    FSymmetry {
        symmetric: normalized(sym, scale),
        p_twist: normalized(f.add(&f_pypz).max_abs(), scale),
        p_swap: normalized(f_pz.add(&f_py).max_abs(), scale),
    }
}

/// `(∇F)[h,i,j,k] = (∇_{e_h} F)(e_i, e_j, e_k)`.
pub fn nabla_f(frame: &PointFrame, lc: &LeviCivitaData, st: &StructureTensors) -> DenseTensor {
    let n = frame.dim();
    let g = frame.g();
    let gamma = &lc.gamma;
    let f = &st.f;
    DenseTensor::covariant_from_fn(n, 4, |ix| {
        let (h, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        // ∂_h F_ijk = ∂_h g_ks (∇_i P)^s_j + g_ks ∂_h (∇_i P)^s_j
        let mut v = 0.0;
        for s in 0..n {
            v += frame.dg.get(&[h, k, s]) * st.nabla_p.get(&[i, s, j])
                + g[(k, s)] * st.d_nabla_p.get(&[h, i, s, j]);
        }
        for s in 0..n {
            v -= gamma.get(&[s, h, i]) * f.get(&[s, j, k])
                + gamma.get(&[s, h, j]) * f.get(&[i, s, k])
                + gamma.get(&[s, h, k]) * f.get(&[i, j, s]);
        }
        v
    })
}

/// `(∇_x F)(y,z,w) - (∇_y F)(x,z,w) - R(x,y,Pz,w) + R(x,y,z,Pw)`, normalized.
pub fn ricci_identity_residual(nabla_f: &DenseTensor, r: &DenseTensor, p: &DMatrix<f64>) -> f64 {
    let lhs = nabla_f.sub(&nabla_f.permute(&[1, 0, 2, 3]));
    let rhs = r
        .transform_slot(2, p)
        .expect("rank 4")
        .sub(&r.transform_slot(3, p).expect("rank 4"));
    normalized(lhs.max_abs_diff(&rhs), nabla_f.max_abs().max(r.max_abs()))
}

/// `max |σ_{x,y,z} (∇_h F)(x,y,z)| / (1 + max|∇F|)`: the W₃ condition
/// differentiated once. Identities derived by differentiating the class
/// condition need this as well as the pointwise cyclic sum.
pub fn w3_derivative_residual(nabla_f: &DenseTensor) -> f64 {
    let cyc = nabla_f
        .add(&nabla_f.permute(&[0, 3, 1, 2]))
        .add(&nabla_f.permute(&[0, 2, 3, 1]));
    normalized(cyc.max_abs(), nabla_f.max_abs())
}

/// Residual pair of the W₃ norm identity:
/// `r1 = |‖∇P‖ + 2·swapped|`, `r2 = |‖∇P‖ - 2(τ - τ**)|`, both normalized.
pub fn w3_identity_check(st: &StructureTensors, cd: &CurvatureData) -> (f64, f64) {
    let norm = st.norm_nabla_p;
    let r1 = normalized(
        (norm + 2.0 * st.swapped_norm).abs(),
        norm.abs().max(st.swapped_norm.abs()),
    );
    let rhs = 2.0 * (cd.tau - cd.tau_star_star);
    let r2 = normalized((norm - rhs).abs(), norm.abs().max(rhs.abs()));
    (r1, r2)
}
