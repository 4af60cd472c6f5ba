//! Primal-dual interior-point method (HKM direction, Mehrotra
//! predictor-corrector) for block LMI problems.
//!
//! The Schur complement `B_kl = tr(A_k S^-1 A_l Z)` is formed from a factored
//! representation `A_k = sum s u_left u_right^T` of every data matrix, where
//! the vectors `u` come from a per-block dictionary. For Kronecker blocks the
//! dictionary is `e_i (x) v_p` with `v_p` the eigenvectors of the coefficient
//! matrices, so the cost scales with the number of rank-one atoms rather than
//! with the dense block size.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use faer::{Mat, MatRef};

use super::{zeros, BlockData, SdpProblem, SdpSolution, SolveStatus};
use crate::linalg;
use crate::{Error, Result};

/// Iterations without a 10% merit improvement before a nearly converged run stops.
const STALL_ITERATIONS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct IpmOptions {
    /// Relative tolerance on gap and infeasibilities.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial `S = Z = xi I`.
    pub initial_scale: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions { tolerance: 1e-8, max_iterations: 120, initial_scale: 100.0, step_fraction: 0.95 }
    }
}

/// Dictionary of a block: the identity or sparse columns.
enum Dictionary {
    Identity(usize),
    /// Kronecker dictionary: `outer` copies of the dense `inner x rank` matrix `v`.
    Kron {
        outer: usize,
        v: Mat<f64>,
    },
}

impl Dictionary {
    fn size(&self) -> usize {
        match self {
            Dictionary::Identity(n) => *n,
            Dictionary::Kron { outer, v } => outer * v.ncols(),
        }
    }

    /// `U^T M U` stored densely (symmetric, so row and column order agree).
    fn project(&self, m: MatRef<'_, f64>) -> Vec<f64> {
        match self {
            Dictionary::Identity(n) => {
                let mut out = vec![0.0; n * n];
                for j in 0..*n {
                    for i in 0..*n {
                        out[j * n + i] = m[(i, j)];
                    }
                }
                out
            }
            Dictionary::Kron { outer, v } => {
                let d = v.nrows();
                let r = v.ncols();
                let nd = outer * r;
                // MU: column block j is M[:, jD..(j+1)D] * V.
                let mut mu = Mat::<f64>::zeros(m.nrows(), nd);
                for j in 0..*outer {
                    let prod = m.subcols(j * d, d) * v.as_ref();
                    mu.subcols_mut(j * r, r).copy_from(&prod);
                }
                let mut out = vec![0.0; nd * nd];
                for i in 0..*outer {
                    let prod = v.transpose() * mu.subrows(i * d, d);
                    for c in 0..nd {
                        for p in 0..r {
                            out[c * nd + i * r + p] = prod[(p, c)];
                        }
                    }
                }
                out
            }
        }
    }
}

/// Rank-one atoms of one block sorted by variable.
struct Atoms {
    var: Vec<u32>,
    left: Vec<u32>,
    right: Vec<u32>,
    scale: Vec<f64>,
}

struct PreparedBlock {
    dim: usize,
    dict: Dictionary,
    atoms: Atoms,
    constant: Mat<f64>,
}

fn sorted_atoms(mut raw: Vec<(u32, u32, u32, f64)>) -> Atoms {
    raw.sort_by_key(|a| (a.0, a.1, a.2));
    Atoms {
        var: raw.iter().map(|a| a.0).collect(),
        left: raw.iter().map(|a| a.1).collect(),
        right: raw.iter().map(|a| a.2).collect(),
        scale: raw.iter().map(|a| a.3).collect(),
    }
}

fn prepare(problem: &SdpProblem) -> Result<Vec<PreparedBlock>> {
    let mut out = Vec::with_capacity(problem.blocks.len());
    for block in &problem.blocks {
        let dim = block.dim();
        let mut constant = Mat::zeros(dim, dim);
        block.accumulate(&zeros(problem.num_vars), true, &mut constant);
        let mut raw = Vec::new();
        let dict = match &block.data {
            BlockData::Sparse(s) => {
                for e in &s.entries {
                    if let Some(k) = e.var {
                        raw.push((k as u32, e.row as u32, e.col as u32, e.value));
                        if e.row != e.col {
                            raw.push((k as u32, e.col as u32, e.row as u32, e.value));
                        }
                    }
                }
                Dictionary::Identity(dim)
            }
            BlockData::Kron(kb) if kb.inner == 1 => {
                for (t, g) in kb.terms.iter().enumerate() {
                    let gv = g.get(0, 0);
                    if gv == 0.0 {
                        continue;
                    }
                    for i in 0..kb.outer {
                        for j in 0..kb.outer {
                            if let Some(k) = kb.var(t, i, j) {
                                raw.push((k as u32, i as u32, j as u32, gv));
                            }
                        }
                    }
                }
                Dictionary::Identity(dim)
            }
            BlockData::Kron(kb) => {
                // Eigen-factor every coefficient on its support.
                let mut columns: Vec<Vec<(usize, f64)>> = Vec::new();
                let mut term_pairs: Vec<Vec<(usize, f64)>> = Vec::new();
                for g in &kb.terms {
                    let support = g.support();
                    let mut pairs = Vec::new();
                    let has_var = (0..kb.outer).any(|i| (0..kb.outer).any(|j| kb.var(term_pairs.len(), i, j).is_some()));
                    if !support.is_empty() && has_var {
                        let k = support.len();
                        let local = Mat::from_fn(k, k, |i, j| g.get(support[i], support[j]));
                        let (vals, vecs) = linalg::sym_eigen(local.as_ref())?;
                        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        for (p, &lam) in vals.iter().enumerate() {
                            if lam.abs() > 1e-13 * max {
                                let col = support.iter().enumerate().map(|(i, &r)| (r, vecs[(i, p)])).collect();
                                pairs.push((columns.len(), lam));
                                columns.push(col);
                            }
                        }
                    }
                    term_pairs.push(pairs);
                }
                let r = columns.len();
                let mut v = Mat::<f64>::zeros(kb.inner, r);
                for (c, col) in columns.iter().enumerate() {
                    for &(row, val) in col {
                        v[(row, c)] = val;
                    }
                }
                for (t, pairs) in term_pairs.iter().enumerate() {
                    for i in 0..kb.outer {
                        for j in 0..kb.outer {
                            if let Some(k) = kb.var(t, i, j) {
                                for &(p, lam) in pairs {
                                    raw.push((k as u32, (i * r + p) as u32, (j * r + p) as u32, lam));
                                }
                            }
                        }
                    }
                }
                Dictionary::Kron { outer: kb.outer, v }
            }
        };
        log::debug!("block {}: dim {dim}, {} atoms, dictionary {}", block.label, raw.len(), dict.size());
        out.push(PreparedBlock { dim, dict, atoms: sorted_atoms(raw), constant });
    }
    Ok(out)
}

/// Adds this block's contribution to the upper triangle of `B`.
fn schur_block(blk: &PreparedBlock, xinv: MatRef<'_, f64>, z: MatRef<'_, f64>, m: usize, bmat: &mut [f64]) {
    let nd = blk.dict.size();
    let xp = blk.dict.project(xinv);
    let zp = blk.dict.project(z);
    let a = &blk.atoms;
    let n = a.var.len();
    let mut first = 0;
    for k in 0..n {
        let vk = a.var[k] as usize;
        if a.var[first] as usize != vk {
            first = k;
        }
        let row_b = &mut bmat[vk * m..(vk + 1) * m];
        let xrow = &xp[a.right[k] as usize * nd..(a.right[k] as usize + 1) * nd];
        let zrow = &zp[a.left[k] as usize * nd..(a.left[k] as usize + 1) * nd];
        let sk = a.scale[k];
        for l in first..n {
            let v = sk * a.scale[l] * xrow[a.left[l] as usize] * zrow[a.right[l] as usize];
            row_b[a.var[l] as usize] += v;
        }
    }
}

struct State {
    y: Vec<f64>,
    s: Vec<Mat<f64>>,
    z: Vec<Mat<f64>>,
}

fn inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(i, j)];
        }
    }
    acc
}

fn sym_part(m: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Largest `alpha` with `X + alpha dX >= 0`, given the inverse Cholesky factor of `X`.
fn max_step(linv: &Mat<f64>, dx: &Mat<f64>) -> Result<f64> {
    let mut t = linv * dx * linv.transpose();
    linalg::symmetrize(&mut t);
    let lmin = linalg::min_eigenvalue(t.as_ref())?;
    Ok(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

/// Solves the problem; `y` holds the free variables in problem order.
pub fn solve(problem: &SdpProblem, options: &IpmOptions) -> Result<SdpSolution> {
    let m = problem.num_vars;
    if problem.objective.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: problem.objective.len() });
    }
    let blocks = prepare(problem)?;
    let total_dim: usize = blocks.iter().map(|b| b.dim).sum();
    let cnorm = libm::sqrt(blocks.iter().map(|b| inner(&b.constant, &b.constant)).sum::<f64>());
    let bnorm = linalg::norm(&problem.objective);
    let xi = options.initial_scale;
    let mut st = State {
        y: zeros(m),
        s: blocks.iter().map(|b| Mat::<f64>::identity(b.dim, b.dim) * faer::Scale(xi)).collect(),
        z: blocks.iter().map(|b| Mat::<f64>::identity(b.dim, b.dim) * faer::Scale(xi)).collect(),
    };

    let apply = |w: &[f64], constant: bool| -> Vec<Mat<f64>> {
        problem
            .blocks
            .iter()
            .map(|b| {
                let mut out = Mat::zeros(b.dim(), b.dim());
                b.accumulate(w, constant, &mut out);
                out
            })
            .collect()
    };
    let adjoint = |w: &[Mat<f64>]| -> (Vec<f64>, f64) {
        let mut out = zeros(m);
        let mut c = 0.0;
        for (b, wb) in problem.blocks.iter().zip(w) {
            c += b.adjoint(wb, &mut out);
        }
        (out, c)
    };

    let mut best: Option<SdpSolution> = None;
    let mut status = SolveStatus::NumericalTrouble;
    let mut iterations = 0;
    let mut prev_step = 0.0f64;
    let mut stall = 0usize;
    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY, 0.0, 0.0);
    for iter in 0..options.max_iterations {
        iterations = iter;
        let fy = apply(&st.y, true);
        let rp: Vec<Mat<f64>> = fy.iter().zip(&st.s).map(|(f, s)| f - s).collect();
        let (atz, ctz) = adjoint(&st.z);
        let rd: Vec<f64> = problem.objective.iter().zip(&atz).map(|(b, a)| b - a).collect();
        let pobj = problem.objective_value(&st.y);
        let dobj = problem.objective_offset - ctz;
        let pinf = libm::sqrt(rp.iter().map(|r| inner(r, r)).sum::<f64>()) / (1.0 + cnorm);
        let dinf = linalg::norm(&rd) / (1.0 + bnorm);
        let gap = (pobj - dobj).abs() / (1.0 + 0.5 * (pobj.abs() + dobj.abs()));
        let mu = st.s.iter().zip(&st.z).map(|(s, z)| inner(s, z)).sum::<f64>() / total_dim as f64;
        log::debug!("ipm {iter:3} pobj {pobj:.10e} dobj {dobj:.10e} pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e} mu {mu:.2e}");
        last = (pinf, dinf, gap, pobj, dobj);
        let current = SdpSolution {
            y: st.y.clone(),
            primal_objective: pobj,
            dual_objective: dobj,
            status: SolveStatus::NearOptimal,
            iterations: iter,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            relative_gap: gap,
        };
        let tol = options.tolerance;
        if pinf < tol && dinf < tol && gap < tol {
            status = SolveStatus::Optimal;
            best = Some(current);
            break;
        }
        let merit = pinf.max(dinf).max(gap);
        let best_merit = best.as_ref().map_or(f64::INFINITY, |b| b.primal_infeasibility.max(b.dual_infeasibility).max(b.relative_gap));
        if merit <= best_merit {
            best = Some(current);
        }
        // Round-off in the dual residual can stall progress near the optimum.
        stall = if merit < 0.9 * best_merit { 0 } else { stall + 1 };
        if stall >= STALL_ITERATIONS && best_merit.min(merit) < 1e-4 {
            log::debug!("ipm stalled at merit {:.2e}", best_merit.min(merit));
            break;
        }
        // Dual unbounded ray: Z grows while the dual stays feasible and its
        // objective diverges, so the LMI system has no solution.
        if dinf < 1e-6 && pinf > 1e-3 && dobj > 1e8 * (1.0 + pobj.abs()).max(1.0) {
            status = SolveStatus::Infeasible;
            break;
        }
        if pinf < 1e-6 && pobj < -1e12 {
            status = SolveStatus::Unbounded;
            break;
        }

        let mut ls_inv = Vec::with_capacity(blocks.len());
        let mut lz_inv = Vec::with_capacity(blocks.len());
        let mut sinv = Vec::with_capacity(blocks.len());
        for (s, z) in st.s.iter().zip(&st.z) {
            let (Some(ls), Some(lz)) = (linalg::cholesky(s.as_ref()), linalg::cholesky(z.as_ref())) else { break };
            let li = linalg::lower_inverse(ls.as_ref());
            let mut inv = li.transpose() * &li;
            linalg::symmetrize(&mut inv);
            ls_inv.push(li);
            lz_inv.push(linalg::lower_inverse(lz.as_ref()));
            sinv.push(inv);
        }
        if sinv.len() < blocks.len() {
            log::warn!("iterate lost definiteness at iteration {iter}");
            break;
        }

        let mut bmat = vec![0.0; m * m];
        for (b, blk) in blocks.iter().enumerate() {
            schur_block(blk, sinv[b].as_ref(), st.z[b].as_ref(), m, &mut bmat);
        }
        let mut bm = Mat::from_fn(m, m, |i, j| if i <= j { bmat[i * m + j] } else { bmat[j * m + i] });
        let bfac = {
            let maxd = (0..m).fold(0.0f64, |a, i| a.max(bm[(i, i)].abs())).max(1e-300);
            let mut reg = 0.0;
            let mut fac = None;
            for _ in 0..12 {
                if let Ok(f) = bm.as_ref().llt(faer::Side::Lower) {
                    fac = Some(f);
                    break;
                }
                reg = if reg == 0.0 { 1e-14 * maxd } else { reg * 100.0 };
                for i in 0..m {
                    bm[(i, i)] += reg;
                }
            }
            fac.ok_or_else(|| Error::Solver("Schur complement is singular".into()))?
        };
        let solve_b = |rhs: Vec<f64>| -> Vec<f64> {
            use faer::linalg::solvers::Solve;
            let mut col = Mat::from_fn(m, 1, |i, _| rhs[i]);
            bfac.solve_in_place(col.as_mut());
            (0..m).map(|i| col[(i, 0)]).collect()
        };

        // Products reused by both directions.
        let srpz: Vec<Mat<f64>> = (0..blocks.len()).map(|b| &sinv[b] * &rp[b] * &st.z[b]).collect();
        let direction = |sigma_mu: f64, corr: Option<&Vec<Mat<f64>>>| -> (Vec<f64>, Vec<Mat<f64>>, Vec<Mat<f64>>) {
            let w: Vec<Mat<f64>> = (0..blocks.len())
                .map(|b| {
                    let mut w = &sinv[b] * faer::Scale(sigma_mu) - &st.z[b] - &srpz[b];
                    if let Some(c) = corr {
                        w -= &c[b];
                    }
                    sym_part(&w)
                })
                .collect();
            let (atw, _) = adjoint(&w);
            let rhs: Vec<f64> = atw.iter().zip(&rd).map(|(a, r)| a - r).collect();
            let mut dy = solve_b(rhs.clone());
            let mut ady = apply(&dy, false);
            // Iterative refinement against the exact operator.
            for _ in 0..2 {
                let bdy: Vec<Mat<f64>> = (0..blocks.len()).map(|b| sym_part(&(&sinv[b] * &ady[b] * &st.z[b]))).collect();
                let (bx, _) = adjoint(&bdy);
                let res: Vec<f64> = rhs.iter().zip(&bx).map(|(r, b)| r - b).collect();
                if linalg::norm(&res) <= 1e-14 * linalg::norm(&rhs) {
                    break;
                }
                let corr_y = solve_b(res);
                dy.iter_mut().zip(&corr_y).for_each(|(d, c)| *d += c);
                ady = apply(&dy, false);
            }
            let ds: Vec<Mat<f64>> = ady.iter().zip(&rp).map(|(a, r)| a + r).collect();
            let dz: Vec<Mat<f64>> = (0..blocks.len())
                .map(|b| {
                    let mut t = &sinv[b] * faer::Scale(sigma_mu) - &st.z[b] - &sinv[b] * &ds[b] * &st.z[b];
                    if let Some(c) = corr {
                        t -= &c[b];
                    }
                    sym_part(&t)
                })
                .collect();
            (dy, ds, dz)
        };
        let steps = |ds: &Vec<Mat<f64>>, dz: &Vec<Mat<f64>>| -> Result<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for b in 0..blocks.len() {
                ap = ap.min(max_step(&ls_inv[b], &ds[b])?);
                ad = ad.min(max_step(&lz_inv[b], &dz[b])?);
            }
            Ok((ap, ad))
        };

        let (_, ds_a, dz_a) = direction(0.0, None);
        let Ok((ap_a, ad_a)) = steps(&ds_a, &dz_a) else {
            log::warn!("step computation failed at iteration {iter}");
            break;
        };
        let ap_a = ap_a.min(1.0);
        let ad_a = ad_a.min(1.0);
        let mu_aff = (0..blocks.len())
            .map(|b| inner(&(&st.s[b] + &ds_a[b] * faer::Scale(ap_a)), &(&st.z[b] + &dz_a[b] * faer::Scale(ad_a))))
            .sum::<f64>()
            / total_dim as f64;
        let min_aff = ap_a.min(ad_a);
        let expon = if mu > 1e-6 && min_aff < 1.0 / libm::sqrt(3.0) { 1.0 } else { (3.0 * min_aff * min_aff).clamp(1.0, 3.0) };
        let sigma = libm::pow((mu_aff / mu).clamp(0.0, 1.0), expon);
        let corr: Vec<Mat<f64>> = (0..blocks.len()).map(|b| &sinv[b] * &ds_a[b] * &dz_a[b]).collect();
        let (dy, ds, dz) = direction(sigma * mu, Some(&corr));
        let Ok((ap, ad)) = steps(&ds, &dz) else {
            log::warn!("step computation failed at iteration {iter}");
            break;
        };
        let gamma = options.step_fraction.min(0.9 + 0.09 * prev_step);
        let mut ap = (gamma * ap).min(1.0);
        let mut ad = (gamma * ad).min(1.0);
        // Guard against eigenvalue round-off near the cone boundary.
        for _ in 0..30 {
            let ok = (0..blocks.len()).all(|b| linalg::cholesky((&st.s[b] + &ds[b] * faer::Scale(ap)).as_ref()).is_some());
            if ok {
                break;
            }
            ap *= 0.8;
        }
        for _ in 0..30 {
            let ok = (0..blocks.len()).all(|b| linalg::cholesky((&st.z[b] + &dz[b] * faer::Scale(ad)).as_ref()).is_some());
            if ok {
                break;
            }
            ad *= 0.8;
        }
        prev_step = ap.min(ad);
        log::debug!("     sigma {sigma:.2e} aff ({ap_a:.2e}, {ad_a:.2e}) step ({ap:.2e}, {ad:.2e})");
        for k in 0..m {
            st.y[k] += ap * dy[k];
        }
        for b in 0..blocks.len() {
            st.s[b] += &ds[b] * faer::Scale(ap);
            st.z[b] += &dz[b] * faer::Scale(ad);
            linalg::symmetrize(&mut st.s[b]);
            linalg::symmetrize(&mut st.z[b]);
        }
        if ap < 1e-10 && ad < 1e-10 {
            break;
        }
    }
    let mut sol = best.ok_or_else(|| Error::Solver(format!("no iterate produced (last residuals {last:?})")))?;
    sol.iterations = iterations;
    sol.status = match status {
        SolveStatus::Optimal => SolveStatus::Optimal,
        SolveStatus::Infeasible | SolveStatus::Unbounded => status,
        _ => {
            if sol.primal_infeasibility < 1e-5 && sol.dual_infeasibility < 1e-5 && sol.relative_gap < 1e-5 {
                SolveStatus::NearOptimal
            } else {
                SolveStatus::NumericalTrouble
            }
        }
    };
    Ok(sol)
}
