//! Fixed-design diagnostics: eigenpairs, worst-case harmonic loads and responses,
//! time histories, and residual checks of the response identities.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use faer::Mat;

use crate::fem::StructuralPencil;
use crate::linalg::{self, SymPinv};
use crate::model::FrameProblem;
use crate::{Error, Result};

/// Relative area below which elements are dropped before an analysis.
pub const ANALYSIS_PRUNE_RATIO: f64 = 1e-9;

/// Relative eigenvalue cutoff of the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenResult {
    /// Ascending, in rad^2/s^2.
    pub eigenvalues: Vec<f64>,
    /// Mass-normalized eigenvectors on the reduced DOFs.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Dimension of the mass kernel on the retained DOFs.
    pub kernel_dim: usize,
}

impl EigenResult {
    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| libm::sqrt(l.max(0.0)) / (2.0 * PI)).collect()
    }
}

fn pruned(a: &[f64]) -> Result<Vec<f64>> {
    if a.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidProblem("design must be nonnegative".into()));
    }
    let max = a.iter().fold(0.0f64, |m, v| m.max(*v));
    if max == 0.0 {
        return Err(Error::ZeroDesign);
    }
    Ok(a.iter().map(|&v| if v >= ANALYSIS_PRUNE_RATIO * max { v } else { 0.0 }).collect())
}

/// Indices of rows that are not identically zero in any of the matrices.
fn active_rows(ms: &[&Mat<f64>]) -> Vec<usize> {
    let n = ms[0].nrows();
    (0..n).filter(|&i| ms.iter().any(|m| (0..n).any(|j| m[(i, j)] != 0.0))).collect()
}

fn restrict(m: &Mat<f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// `k` smallest eigenpairs of `K w = lambda M w` outside the kernel of `M`,
/// with kernel components eliminated by condensation.
pub fn generalized_eigen(k_mat: &Mat<f64>, m_mat: &Mat<f64>, k: usize) -> Result<EigenResult> {
    let n_full = k_mat.nrows();
    let idx = active_rows(&[k_mat, m_mat]);
    if idx.is_empty() {
        return Err(Error::ZeroDesign);
    }
    let kk = restrict(k_mat, &idx);
    let mm = restrict(m_mat, &idx);
    let n = idx.len();
    let (mvals, mvecs) = linalg::sym_eigen(mm.as_ref())?;
    let mmax = mvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(&neg) = mvals.iter().find(|&&v| v < -PINV_CUTOFF * mmax) {
        return Err(Error::IndefiniteMass(neg));
    }
    let range: Vec<usize> = (0..n).filter(|&i| mvals[i] > PINV_CUTOFF * mmax).collect();
    let kernel: Vec<usize> = (0..n).filter(|&i| mvals[i] <= PINV_CUTOFF * mmax).collect();
    let vr = Mat::from_fn(n, range.len(), |i, j| mvecs[(i, range[j])]);
    let vk = Mat::from_fn(n, kernel.len(), |i, j| mvecs[(i, kernel[j])]);
    let krr = vr.transpose() * &kk * &vr;
    let krk = vr.transpose() * &kk * &vk;
    let kkk = vk.transpose() * &kk * &vk;
    // Kernel coordinates follow the range ones: x_k = -Kkk^+ Kkr x_r.
    let elim = if kernel.is_empty() {
        Mat::zeros(0, range.len())
    } else {
        let p = SymPinv::new(kkk.as_ref(), PINV_CUTOFF)?;
        Mat::from_fn(kernel.len(), range.len(), |i, j| {
            let col: Vec<f64> = (0..kernel.len()).map(|r| krk[(j, r)]).collect();
            -p.apply(&col).x[i]
        })
    };
    let cond = &krr + krk.as_ref() * &elim;
    let s: Vec<f64> = range.iter().map(|&i| 1.0 / libm::sqrt(mvals[i])).collect();
    let mut c = Mat::from_fn(range.len(), range.len(), |i, j| s[i] * cond[(i, j)] * s[j]);
    linalg::symmetrize(&mut c);
    let (vals, vecs) = linalg::sym_eigen(c.as_ref())?;
    let take = k.min(vals.len());
    let mut eigenvectors = Vec::with_capacity(take);
    for p in 0..take {
        let xr: Vec<f64> = (0..range.len()).map(|i| s[i] * vecs[(i, p)]).collect();
        let xk = linalg::mat_vec(elim.as_ref(), &xr);
        let w_local: Vec<f64> = (0..n)
            .map(|i| (0..range.len()).map(|j| vr[(i, j)] * xr[j]).sum::<f64>() + (0..kernel.len()).map(|j| vk[(i, j)] * xk[j]).sum::<f64>())
            .collect();
        let mut w = vec![0.0; n_full];
        for (i, &g) in idx.iter().enumerate() {
            w[g] = w_local[i];
        }
        let (imax, _) = w.iter().enumerate().fold((0, 0.0f64), |b, (i, v)| if v.abs() > b.1.abs() { (i, *v) } else { b });
        if w[imax] < 0.0 {
            w.iter_mut().for_each(|v| *v = -*v);
        }
        eigenvectors.push(w);
    }
    Ok(EigenResult { eigenvalues: vals[..take].to_vec(), eigenvectors, kernel_dim: kernel.len() })
}

/// The `k` smallest eigenpairs of the pencil at design `a`.
pub fn eigenpairs(pencil: &StructuralPencil, a: &[f64], k: usize) -> Result<EigenResult> {
    let a = pruned(a)?;
    let km = pencil.stiffness.evaluate(&a)?;
    let mm = pencil.mass.evaluate(&a)?;
    generalized_eigen(&km, &mm, k)
}

/// Force at one loaded node of the worst-case load.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodalLoad {
    pub node: usize,
    pub force: [f64; 2],
    pub magnitude: f64,
    /// Counterclockwise from the global x axis, in degrees.
    pub angle_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WorstCaseReport {
    pub omega: f64,
    /// `A = Q^T [K - omega^2 M]^+ Q`.
    pub gram: Vec<Vec<f64>>,
    pub lambda_max: f64,
    /// Canonical top eigenvector of `A`.
    pub r_q: Vec<f64>,
    /// Every unit eigenvector within relative tolerance of `lambda_max`.
    pub top_eigenvectors: Vec<Vec<f64>>,
    pub f_r: Vec<f64>,
    pub u_r: Vec<f64>,
    pub v_r: Vec<f64>,
    pub d_r: f64,
    pub p_r: f64,
    pub loads: Vec<NodalLoad>,
}

/// A loaded node and the column indices of `Q` acting on it.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedNode {
    pub node: usize,
    /// Reduced DOF of the x and y translations, if free.
    pub dofs: [Option<usize>; 2],
}

/// Moore-Penrose pseudoinverse applied to `x`, with the range check.
pub fn pseudo_inverse_apply(s: &Mat<f64>, x: &[f64], cutoff: f64) -> Result<linalg::PinvApply> {
    linalg::pseudo_inverse_apply(s.as_ref(), x, cutoff)
}

fn canonical_sign(v: &mut [f64]) {
    let (imax, _) = v.iter().enumerate().fold((0, 0.0f64), |b, (i, x)| if x.abs() > b.1.abs() + 1e-12 { (i, *x) } else { b });
    if v.get(imax).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Worst-case load over the ellipsoid `{Q r : |r| <= 1}` and the responses it causes.
pub fn worst_case(pencil: &StructuralPencil, a: &[f64], q: &[Vec<f64>], omega: f64, nodes: &[LoadedNode]) -> Result<WorstCaseReport> {
    let n = pencil.n_dof();
    if q.is_empty() {
        return Err(Error::InvalidProblem("load has no columns".into()));
    }
    for c in q {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
    }
    let a = pruned(a)?;
    let km = pencil.stiffness.evaluate(&a)?;
    let mm = pencil.mass.evaluate(&a)?;
    let omega2 = omega * omega;
    if omega > 0.0 {
        let eig = generalized_eigen(&km, &mm, 1)?;
        let lmin = eig.eigenvalues.first().copied().unwrap_or(f64::INFINITY);
        if omega2 > lmin * (1.0 + 1e-8) {
            return Err(Error::Superresonant { omega2, lambda_min: lmin });
        }
    }
    let s = &km - omega2 * &mm;
    let pinv = SymPinv::new(s.as_ref(), PINV_CUTOFF)?;
    let mut x = Vec::with_capacity(q.len());
    for c in q {
        let r = pinv.apply(c);
        if !r.in_range {
            return Err(Error::RangeViolation(r.range_residual));
        }
        x.push(r.x);
    }
    let nq = q.len();
    let mut gram = Mat::from_fn(nq, nq, |i, j| linalg::dot(&q[i], &x[j]));
    linalg::symmetrize(&mut gram);
    let (vals, vecs) = linalg::sym_eigen(gram.as_ref())?;
    let lambda_max = vals[nq - 1];
    let mut top_eigenvectors = Vec::new();
    for p in (0..nq).rev() {
        if lambda_max - vals[p] <= 1e-8 * lambda_max.abs().max(f64::MIN_POSITIVE) {
            let mut v: Vec<f64> = (0..nq).map(|i| vecs[(i, p)]).collect();
            canonical_sign(&mut v);
            top_eigenvectors.push(v);
        }
    }
    let r_q = top_eigenvectors[0].clone();
    let mut f_r = vec![0.0; n];
    let mut u_r = vec![0.0; n];
    for (k, &r) in r_q.iter().enumerate() {
        for i in 0..n {
            f_r[i] += q[k][i] * r;
            u_r[i] += x[k][i] * r;
        }
    }
    let v_r: Vec<f64> = u_r.iter().map(|u| omega * u).collect();
    let d_r = lambda_max;
    let p_r = 0.5 * omega * d_r;
    let loads = nodes
        .iter()
        .map(|ln| {
            let fx = ln.dofs[0].map_or(0.0, |d| f_r[d]);
            let fy = ln.dofs[1].map_or(0.0, |d| f_r[d]);
            NodalLoad { node: ln.node, force: [fx, fy], magnitude: libm::hypot(fx, fy), angle_deg: libm::atan2(fy, fx).to_degrees() }
        })
        .collect();
    Ok(WorstCaseReport {
        omega,
        gram: (0..nq).map(|i| (0..nq).map(|j| gram[(i, j)]).collect()).collect(),
        lambda_max,
        r_q,
        top_eigenvectors,
        f_r,
        u_r,
        v_r,
        d_r,
        p_r,
        loads,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeHistory {
    pub t: Vec<f64>,
    /// Instantaneous force-displacement product.
    pub d: Vec<f64>,
    /// Instantaneous force-velocity product.
    pub p: Vec<f64>,
    /// First time of maximal `d(t)` in `[0, pi/omega)`.
    pub t_peak_d: f64,
    /// First time of maximal `|p(t)|` in `[0, pi/(2 omega))`.
    pub t_peak_p: f64,
}

/// Samples `d(t)` and `p(t)` on `[0, horizon]`.
pub fn time_histories(d_r: f64, p_r: f64, omega: f64, phase: (f64, f64), n_samples: usize, horizon: f64) -> Result<TimeHistory> {
    let (c1, c2) = phase;
    if (c1 * c1 + c2 * c2 - 1.0).abs() > 1e-9 {
        return Err(Error::PhaseNotNormalized(c1 * c1 + c2 * c2));
    }
    if !(omega > 0.0) {
        return Err(Error::ZeroFrequency);
    }
    let t: Vec<f64> = (0..n_samples).map(|k| if n_samples > 1 { horizon * k as f64 / (n_samples - 1) as f64 } else { 0.0 }).collect();
    let d = t
        .iter()
        .map(|&t| {
            let s = c1 * libm::cos(omega * t) + c2 * libm::sin(omega * t);
            d_r * s * s
        })
        .collect();
    let p =
        t.iter().map(|&t| p_r * ((c2 * c2 - c1 * c1) * libm::sin(2.0 * omega * t) + 2.0 * c1 * c2 * libm::cos(2.0 * omega * t))).collect();
    let t_peak_d = wrap(libm::atan2(c2, c1), PI) / omega;
    // (c2^2 - c1^2) sin 2wt + 2 c1 c2 cos 2wt = sin(2wt + phi); |.| peaks where 2wt + phi = pi/2 mod pi.
    let phi = libm::atan2(2.0 * c1 * c2, c2 * c2 - c1 * c1);
    let t_peak_p = wrap(0.5 * PI - phi, PI) / (2.0 * omega);
    Ok(TimeHistory { t, d, p, t_peak_d, t_peak_p })
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = libm::fmod(x, period);
    if r < 0.0 {
        r + period
    } else {
        r
    }
}

/// Relative residuals of the identities linking displacement, velocity,
/// the augmented pencil and the two response measures.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RelationResiduals {
    /// `|v_R - omega u_R| / |v_R|`.
    pub velocity: f64,
    /// `|K u - omega^2 (M + Q Q^T/(omega^2 d)) u| / (|K| |u|)`.
    pub augmented_eigen: f64,
    /// `|lambda_min(augmented) - omega^2| / omega^2`.
    pub smallest_eigenvalue: f64,
    /// `|d - 2 p / omega| / d`.
    pub power: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        self.velocity.max(self.augmented_eigen).max(self.smallest_eigenvalue).max(self.power)
    }
}

pub fn verify_relations(pencil: &StructuralPencil, a: &[f64], q: &[Vec<f64>], report: &WorstCaseReport) -> Result<RelationResiduals> {
    let omega = report.omega;
    if !(omega > 0.0) {
        return Err(Error::ZeroFrequency);
    }
    let a = pruned(a)?;
    let km = pencil.stiffness.evaluate(&a)?;
    let mut mm = pencil.mass.evaluate(&a)?;
    let omega2 = omega * omega;
    let n = km.nrows();
    let s = 1.0 / (omega2 * report.d_r);
    for c in q {
        for i in 0..n {
            if c[i] != 0.0 {
                for j in 0..n {
                    mm[(i, j)] += s * c[i] * c[j];
                }
            }
        }
    }
    let u = &report.u_r;
    let ku = linalg::mat_vec(km.as_ref(), u);
    let mu = linalg::mat_vec(mm.as_ref(), u);
    let res: Vec<f64> = ku.iter().zip(&mu).map(|(k, m)| k - omega2 * m).collect();
    let un = linalg::norm(u);
    let augmented_eigen = if un > 0.0 { linalg::norm(&res) / (linalg::frobenius(km.as_ref()) * un) } else { 0.0 };
    let aug = generalized_eigen(&km, &mm, 1)?;
    let lmin = aug.eigenvalues.first().copied().unwrap_or(f64::INFINITY);
    let vn = linalg::norm(&report.v_r);
    let velocity = if vn > 0.0 {
        let diff: Vec<f64> = report.v_r.iter().zip(u).map(|(v, u)| v - omega * u).collect();
        linalg::norm(&diff) / vn
    } else {
        0.0
    };
    Ok(RelationResiduals {
        velocity,
        augmented_eigen,
        smallest_eigenvalue: (lmin - omega2).abs() / omega2,
        power: (report.d_r - 2.0 * report.p_r / omega).abs() / report.d_r,
    })
}

/// Distinct nodes carrying load columns, in order of first appearance.
pub fn loaded_nodes(problem: &FrameProblem, pencil: &StructuralPencil) -> Vec<LoadedNode> {
    let mut out: Vec<LoadedNode> = Vec::new();
    let Some(load) = &problem.load else { return out };
    let nodes = load.columns.iter().map(|c| c.node).chain(load.amplitude.iter().flatten().map(|f| f.node));
    for node in nodes {
        if out.iter().all(|l| l.node != node) {
            out.push(LoadedNode { node, dofs: [pencil.dof_map.dof(node, 0), pencil.dof_map.dof(node, 1)] });
        }
    }
    out
}
