//! Global bounds: feasible designs by scaling, local refinement, and the
//! relaxation loop that certifies relative optimality gaps.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use faer::Mat;

use crate::constraints::{compactification_lmis, response_lmis, PolyLmi};
use crate::fem::{assemble_pencil, structural_weight, StructuralPencil};
use crate::linalg;
use crate::model::FrameProblem;
use crate::poly::{Monomial, PolynomialMatrix, SymSparse};
use crate::relaxation::{build_relaxation, extract_first_moments, min_order, RelaxationOptions};
use crate::sdp::{self, BlockData, IpmOptions, KronBlock, SdpBlock, SdpProblem, SolveStatus, SparseBlock, SparseEntry};
use crate::{Error, Result};

/// Largest scaling factor tried before a design is declared unscalable.
pub const MAX_SCALING: f64 = 1.152_921_504_606_847e18;

/// Areas below this fraction of the largest area are treated as removed.
pub const PRUNE_RATIO: f64 = 1e-6;

/// Default feasibility tolerance on the normalized margin.
pub const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Feasibility {
    pub feasible: bool,
    /// Least normalized eigenvalue over all constraint blocks.
    pub margin: f64,
    pub block_margins: Vec<f64>,
}

/// Zeroes areas below `PRUNE_RATIO` times the largest one.
pub fn prune_design(a: &[f64]) -> Vec<f64> {
    let max = a.iter().fold(0.0f64, |m, v| m.max(*v));
    a.iter().map(|&v| if v > PRUNE_RATIO * max { v } else { 0.0 }).collect()
}

/// `lambda_min(D G D) / (1 + |D G D|_F)` with `D` the Jacobi scaling of `G(a)`,
/// after dropping rows that are exactly zero (DOFs touched only by removed members).
pub fn block_margin(g: &PolynomialMatrix, a: &[f64]) -> Result<f64> {
    let m = g.evaluate(a)?;
    let n = m.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| m[(i, j)] != 0.0)).collect();
    if keep.is_empty() {
        return Ok(0.0);
    }
    // Every nonzero diagonal is scaled to one in magnitude, however small: the
    // congruence keeps the inertia, so a negative diagonal stays visible.
    let d: Vec<f64> = keep.iter().map(|&i| m[(i, i)].abs()).map(|v| if v > 0.0 { 1.0 / libm::sqrt(v) } else { 1.0 }).collect();
    let k = keep.len();
    let e = Mat::from_fn(k, k, |i, j| d[i] * m[(keep[i], keep[j])] * d[j]);
    let lmin = linalg::min_eigenvalue(e.as_ref())?;
    Ok(lmin / (1.0 + linalg::frobenius(e.as_ref())))
}

/// Evaluates every constraint at `a`; feasible when the margin is at least `-tol`.
pub fn check_feasible(lmis: &[PolyLmi], a: &[f64], tol: f64) -> Result<Feasibility> {
    let mut block_margins = Vec::with_capacity(lmis.len());
    for l in lmis {
        block_margins.push(block_margin(&l.matrix, a)?);
    }
    let margin = block_margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Feasibility { feasible: margin >= -tol, margin, block_margins })
}

fn scaled(a: &[f64], d: f64) -> Vec<f64> {
    a.iter().map(|v| v * d).collect()
}

fn feasible_at(lmis: &[PolyLmi], a: &[f64], d: f64, tol: f64) -> Result<bool> {
    Ok(check_feasible(lmis, &scaled(a, d), tol)?.feasible)
}

fn bisect(lmis: &[PolyLmi], a: &[f64], mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    while (hi - lo) > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible_at(lmis, a, mid, tol)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_design(a: &[f64]) -> Result<()> {
    if a.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidProblem("design must be finite and nonnegative".into()));
    }
    if a.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroDesign);
    }
    Ok(())
}

/// Smallest `delta >= 1` with `delta a` feasible, by doubling then bisection.
pub fn scale_to_feasible(lmis: &[PolyLmi], a: &[f64], tol: f64) -> Result<(f64, Vec<f64>)> {
    check_design(a)?;
    let a = prune_design(a);
    if feasible_at(lmis, &a, 1.0, tol)? {
        return Ok((1.0, a));
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while !feasible_at(lmis, &a, hi, tol)? {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_SCALING {
            return Err(Error::NoFeasibleScaling);
        }
    }
    let d = bisect(lmis, &a, lo, hi, tol)?;
    Ok((d, scaled(&a, d)))
}

/// Smallest positive `delta` with `delta a` feasible, searching both directions.
pub fn minimal_scaling(lmis: &[PolyLmi], a: &[f64], tol: f64) -> Result<(f64, Vec<f64>)> {
    check_design(a)?;
    let a = prune_design(a);
    if !feasible_at(lmis, &a, 1.0, tol)? {
        return scale_to_feasible(lmis, &a, tol);
    }
    let mut hi = 1.0;
    let mut lo = 0.5;
    while feasible_at(lmis, &a, lo, tol)? {
        hi = lo;
        lo *= 0.5;
        if lo < 1.0 / MAX_SCALING {
            return Ok((hi, scaled(&a, hi)));
        }
    }
    let d = bisect(lmis, &a, lo, hi, tol)?;
    Ok((d, scaled(&a, d)))
}

/// A feasible starting design and its weight. The seed defaults to equal
/// areas of 1 cm^2; it is scaled to the smallest feasible multiple.
pub fn initial_feasible(pencil: &StructuralPencil, lmis: &[PolyLmi], seed: Option<&[f64]>) -> Result<(Vec<f64>, f64)> {
    if lmis.is_empty() {
        return Err(Error::NoConstraints);
    }
    let seed = match seed {
        Some(s) if s.len() != pencil.n_vars() => return Err(Error::DimensionMismatch { expected: pencil.n_vars(), found: s.len() }),
        Some(s) => s.to_vec(),
        None => vec![1e-4; pencil.n_vars()],
    };
    let (_, a) = minimal_scaling(lmis, &seed, FEASIBILITY_TOL)?;
    let w = structural_weight(pencil, &a);
    Ok((a, w))
}

/// Replaces every pure power `a_v^k` by its tangent at `a0`, giving a matrix affine in `a`.
/// For `a, a0 >= 0` the difference `G(a) - L(a)` is PSD whenever the coefficients of
/// powers `k >= 2` are PSD.
pub fn tangent_linearization(g: &PolynomialMatrix, a0: &[f64]) -> Result<PolynomialMatrix> {
    let n = g.n_vars();
    let mut out = PolynomialMatrix::zero(g.dim(), n);
    let one = Monomial::one(n);
    for (m, c) in g.terms() {
        if m.is_one() {
            out.add_term(one.clone(), c);
            continue;
        }
        let (v, k) = m.as_pure().ok_or(Error::Unsupported)?;
        let lin = Monomial::pure(n, v, 1);
        if k == 1 {
            out.add_term(lin, c);
        } else {
            let x = a0[v];
            let kf = k as f64;
            let pk = libm::pow(x, kf);
            let slope = kf * libm::pow(x, kf - 1.0);
            if pk != 0.0 {
                out.add_term(one.clone(), &c.scaled(pk - slope * x));
            }
            if slope != 0.0 {
                out.add_term(lin, &c.scaled(slope));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOptions {
    pub max_iterations: usize,
    /// Stop once the relative weight decrease of an iteration falls below this.
    pub tolerance: f64,
    pub ipm: IpmOptions,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { max_iterations: 100, tolerance: 1e-8, ipm: IpmOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub design: Vec<f64>,
    pub weight: f64,
    pub iterations: usize,
    /// Weight after each accepted iteration, starting with the initial weight.
    pub weights: Vec<f64>,
}

/// Affine block `sum_t coef_t terms[t]` in scaled variables, equilibrated and normalized.
fn affine_block(l: &PolynomialMatrix, var_scale: f64, label: &str) -> SdpBlock {
    let n = l.n_vars();
    let dim = l.dim();
    let mut terms: Vec<(Option<usize>, SymSparse)> = Vec::new();
    for (m, c) in l.terms() {
        if m.is_one() {
            terms.push((None, c.clone()));
        } else if let Some((v, 1)) = m.as_pure() {
            terms.push((Some(v), c.scaled(var_scale)));
        }
    }
    debug_assert!(terms.iter().all(|(v, _)| v.is_none_or(|v| v < n)));
    let mut diag = vec![0.0; dim];
    for (_, c) in &terms {
        for (k, d) in diag.iter_mut().enumerate() {
            *d += c.get(k, k).abs();
        }
    }
    let d = linalg::jacobi_scaling(&diag);
    let mut max = 0.0f64;
    for (_, c) in terms.iter_mut() {
        *c = c.diag_congruence(&d);
        max = max.max(c.max_abs());
    }
    let norm = if max > 0.0 { 1.0 / max } else { 1.0 };
    SdpBlock {
        label: String::from(label),
        data: BlockData::Kron(KronBlock {
            outer: 1,
            inner: dim,
            vars: terms.iter().map(|(v, _)| *v).collect(),
            terms: terms.into_iter().map(|(_, c)| c.scaled(norm)).collect(),
        }),
    }
}

/// Linearized subproblem around `a0` with move limits `[lo, hi]`, in variables `x = a / s`.
fn linearized_sdp(pencil: &StructuralPencil, lmis: &[PolyLmi], a0: &[f64], lo: &[f64], hi: &[f64], s: f64) -> Result<SdpProblem> {
    let n = pencil.n_vars();
    let mut blocks = Vec::with_capacity(lmis.len() + 1);
    for l in lmis {
        let lin = tangent_linearization(&l.matrix, a0)?;
        blocks.push(affine_block(&lin, s, &l.label));
    }
    let mut entries = Vec::with_capacity(4 * n);
    for v in 0..n {
        entries.push(SparseEntry { var: None, row: 2 * v, col: 2 * v, value: -lo[v] / s });
        entries.push(SparseEntry { var: Some(v), row: 2 * v, col: 2 * v, value: 1.0 });
        entries.push(SparseEntry { var: None, row: 2 * v + 1, col: 2 * v + 1, value: hi[v] / s });
        entries.push(SparseEntry { var: Some(v), row: 2 * v + 1, col: 2 * v + 1, value: -1.0 });
    }
    blocks.push(SdpBlock { label: String::from("move limits"), data: BlockData::Sparse(SparseBlock { dim: 2 * n, entries }) });
    let coef: Vec<f64> = pencil.weights.iter().map(|w| w * s).collect();
    let cmax = coef.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    Ok(SdpProblem { num_vars: n, objective: coef.iter().map(|c| c / cmax).collect(), objective_offset: 0.0, blocks })
}

/// Sequential linearized SDP descent from a feasible design. Every accepted
/// iterate is feasible and strictly lighter than the previous one.
pub fn local_refine(pencil: &StructuralPencil, lmis: &[PolyLmi], a_start: &[f64], options: &RefineOptions) -> Result<Refinement> {
    check_design(a_start)?;
    let mut a = prune_design(a_start);
    if !check_feasible(lmis, &a, FEASIBILITY_TOL)?.feasible {
        return Err(Error::InfeasibleDesign(check_feasible(lmis, &a, FEASIBILITY_TOL)?.margin));
    }
    let mut w = structural_weight(pencil, &a);
    let mut weights = vec![w];
    let mut iterations = 0;
    for it in 0..options.max_iterations {
        iterations = it + 1;
        let amax = a.iter().fold(0.0f64, |m, v| m.max(*v));
        let lo: Vec<f64> = a.iter().map(|&v| (v - (0.5 * v).max(0.05 * amax)).max(0.0)).collect();
        let hi: Vec<f64> = a.iter().map(|&v| v + (0.5 * v).max(0.05 * amax)).collect();
        let sdp = linearized_sdp(pencil, lmis, &a, &lo, &hi, amax)?;
        let sol = match sdp::solve(&sdp, &options.ipm) {
            Ok(s) if s.is_usable() || s.status == SolveStatus::NumericalTrouble => s,
            Ok(s) => {
                log::warn!("refinement subproblem ended with status {:?}", s.status);
                break;
            }
            Err(e) => {
                log::warn!("refinement subproblem failed: {e}");
                break;
            }
        };
        let cand: Vec<f64> = sol.y.iter().zip(&lo).zip(&hi).map(|((x, l), h)| (x * amax).clamp(*l, *h)).collect();
        let cand = match scale_to_feasible(lmis, &cand, FEASIBILITY_TOL) {
            Ok((_, c)) => c,
            Err(e) => {
                log::warn!("refinement candidate could not be made feasible: {e}");
                break;
            }
        };
        let wc = structural_weight(pencil, &cand);
        log::debug!("refine iteration {}: weight {wc} (status {:?})", it + 1, sol.status);
        if !(wc < w) {
            break;
        }
        let decrease = (w - wc) / w;
        a = cand;
        w = wc;
        weights.push(w);
        if decrease < options.tolerance {
            break;
        }
    }
    Ok(Refinement { design: a, weight: w, iterations, weights })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    GloballyEpsOptimal,
    GapRemaining,
    Failed,
}

/// One relaxation solve of the loop.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HistoryRow {
    pub order: usize,
    /// Lower bound of this solve (kg); `None` when the solver failed.
    pub lower_bound: Option<f64>,
    /// Best feasible weight known after this step (kg).
    pub upper_bound: f64,
    /// Weight cap used in the compactification (kg).
    pub weight_cap: f64,
    pub relative_gap: Option<f64>,
    /// Block structure `(count, dim)`.
    pub blocks: Vec<(usize, usize)>,
    pub n_moments: usize,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Weight of the scaled first moments before refinement (kg).
    pub scaled_weight: Option<f64>,
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub eps: f64,
    pub verdict: Verdict,
    pub lower_bound: f64,
    pub best_weight: f64,
    pub best_design: Vec<f64>,
    pub initial_weight: f64,
    pub history: Vec<HistoryRow>,
}

impl Certificate {
    pub fn relative_gap(&self) -> f64 {
        (self.best_weight - self.lower_bound) / self.lower_bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOptions {
    pub eps: f64,
    /// First order; defaults to the smallest admissible one.
    pub r_min: Option<usize>,
    pub r_max: usize,
    /// Maximum number of relaxation solves.
    pub max_relaxations: usize,
    /// Re-solves at one order after cap tightening.
    pub max_tightenings: usize,
    /// Relative improvement of the upper bound that triggers tightening.
    pub tighten_threshold: f64,
    pub seed: Option<Vec<f64>>,
    pub relaxation: RelaxationOptions,
    pub ipm: IpmOptions,
    pub refine: RefineOptions,
    /// Locally refine the initial design before the first relaxation.
    pub refine_initial: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            eps: 1e-2,
            r_min: None,
            r_max: 3,
            max_relaxations: 20,
            max_tightenings: 3,
            tighten_threshold: 1e-6,
            seed: None,
            relaxation: RelaxationOptions::default(),
            ipm: IpmOptions::default(),
            refine: RefineOptions::default(),
            refine_initial: true,
        }
    }
}

pub fn certify_loop(problem: &FrameProblem, options: &CertifyOptions) -> Result<Certificate> {
    certify_loop_with_clock(problem, options, None)
}

/// The global solution loop. `clock` returns seconds and only feeds the history.
pub fn certify_loop_with_clock(problem: &FrameProblem, options: &CertifyOptions, clock: Option<&dyn Fn() -> f64>) -> Result<Certificate> {
    if !(options.eps > 0.0) {
        return Err(Error::InvalidProblem(format!("eps must be positive, got {}", options.eps)));
    }
    let pencil = assemble_pencil(problem)?;
    let lmis = response_lmis(problem, &pencil)?;
    let rmin = options.r_min.unwrap_or(0).max(min_order(&lmis)).max(1);
    if options.r_max < rmin {
        return Err(Error::OrderTooLow { order: options.r_max, min: rmin });
    }

    let (a0, w0) = initial_feasible(&pencil, &lmis, options.seed.as_deref())?;
    log::info!("initial feasible design: {w0} kg");
    let (mut best, mut best_w) = (a0, w0);
    if options.refine_initial {
        let refined = local_refine(&pencil, &lmis, &best, &options.refine)?;
        if refined.weight < best_w {
            log::info!("refined initial design: {} kg", refined.weight);
            best = refined.design;
            best_w = refined.weight;
        }
    }
    if let Some(cap) = problem.weight_cap {
        if cap < best_w {
            log::info!("using the problem weight cap {cap} kg");
        }
    }
    let mut cap = problem.weight_cap.map_or(best_w, |c| c.min(best_w));
    let mut lb = f64::NEG_INFINITY;
    let mut history = Vec::new();
    let mut r = rmin;
    let mut tightenings = 0;
    let finish = |verdict, lb: f64, best: Vec<f64>, best_w, history| {
        Ok(Certificate {
            eps: options.eps,
            verdict,
            lower_bound: if lb.is_finite() { lb } else { 0.0 },
            best_weight: best_w,
            best_design: best,
            initial_weight: w0,
            history,
        })
    };

    while history.len() < options.max_relaxations {
        let start = clock.map(|c| c());
        let mut all = lmis.clone();
        all.extend(compactification_lmis(&pencil, cap)?);
        let relax = build_relaxation(&pencil, &all, r, &options.relaxation)?;
        let sol = sdp::solve(&relax.sdp, &options.ipm)?;
        let mut row = HistoryRow {
            order: r,
            lower_bound: None,
            upper_bound: best_w,
            weight_cap: cap,
            relative_gap: None,
            blocks: relax.block_stats(),
            n_moments: relax.n_moments(),
            status: sol.status,
            iterations: sol.iterations,
            scaled_weight: None,
            seconds: None,
        };
        if !sol.is_usable() {
            log::warn!("relaxation at order {r} ended with status {:?}", sol.status);
            row.seconds = clock.zip(start).map(|(c, s)| c() - s);
            history.push(row);
            return finish(Verdict::Failed, lb, best, best_w, history);
        }
        let lb_r = relax.lower_bound(&sol);
        lb = lb.max(lb_r);
        row.lower_bound = Some(lb_r);

        let moments = extract_first_moments(&sol, &relax);
        let mut improved = false;
        if moments.iter().any(|v| *v > 0.0) {
            match scale_to_feasible(&lmis, &moments, FEASIBILITY_TOL) {
                Ok((_, a_ub)) => {
                    row.scaled_weight = Some(structural_weight(&pencil, &a_ub));
                    let refined = local_refine(&pencil, &lmis, &a_ub, &options.refine)?;
                    log::info!("order {r}: lb {lb_r} kg, scaled {} kg, refined {} kg", row.scaled_weight.unwrap_or(0.0), refined.weight);
                    if refined.weight < best_w {
                        improved = refined.weight < cap * (1.0 - options.tighten_threshold);
                        best = refined.design;
                        best_w = refined.weight;
                    }
                }
                Err(e) => log::warn!("first moments at order {r} could not be scaled: {e}"),
            }
        }
        row.upper_bound = best_w;
        let gap = (best_w - lb) / lb;
        row.relative_gap = Some(gap);
        row.seconds = clock.zip(start).map(|(c, s)| c() - s);
        history.push(row);

        if improved && tightenings < options.max_tightenings {
            tightenings += 1;
            cap = best_w;
            continue;
        }
        cap = cap.min(best_w);
        if lb > 0.0 && gap <= options.eps {
            return finish(Verdict::GloballyEpsOptimal, lb, best, best_w, history);
        }
        if r >= options.r_max {
            return finish(Verdict::GapRemaining, lb, best, best_w, history);
        }
        r += 1;
        tightenings = 0;
    }
    finish(Verdict::GapRemaining, lb, best, best_w, history)
}
