//! Moment relaxations of polynomial matrix inequality problems.
//!
//! Variables are rescaled `a_v = s_v x_v` with `s_v` the box bound of each
//! variable, and each localizing block is equilibrated by a diagonal
//! congruence, which leaves the feasible set of every block unchanged.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::constraints::PolyLmi;
use crate::fem::StructuralPencil;
use crate::linalg;
use crate::poly::{Monomial, PolynomialMatrix, SymSparse};
use crate::sdp::{BlockData, KronBlock, SdpBlock, SdpProblem, SdpSolution};
use crate::{Error, Result};

/// Monomial basis of a relaxation block.
#[derive(Clone, Debug, PartialEq)]
pub struct NmtBasis {
    pub n_vars: usize,
    pub order: usize,
    pub monomials: Vec<Monomial>,
}

impl NmtBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

/// `[1, a_1, ..., a_n, a_1^2, ..., a_n^d]`: pure powers only.
pub fn nmt_basis(n_vars: usize, order: usize) -> NmtBasis {
    let mut monomials = vec![Monomial::one(n_vars)];
    for k in 1..=order {
        for v in 0..n_vars {
            monomials.push(Monomial::pure(n_vars, v, k as u8));
        }
    }
    NmtBasis { n_vars, order, monomials }
}

/// All monomials of degree at most `order`, graded and lexicographic within a grade.
pub fn full_basis(n_vars: usize, order: usize) -> NmtBasis {
    fn rec(n: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Monomial>) {
        if prefix.len() == n {
            if left == 0 {
                out.push(Monomial::from_exponents(prefix.clone()));
            }
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(n, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut monomials = Vec::new();
    for d in 0..=order {
        rec(n_vars, d, &mut Vec::new(), &mut monomials);
    }
    NmtBasis { n_vars, order, monomials }
}

/// Pseudo-moment numbering; the constant monomial is id 0.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentIndexer {
    ids: BTreeMap<Monomial, usize>,
    list: Vec<Monomial>,
}

impl MomentIndexer {
    pub fn new(n_vars: usize) -> Self {
        let one = Monomial::one(n_vars);
        let mut ids = BTreeMap::new();
        ids.insert(one.clone(), 0);
        MomentIndexer { ids, list: vec![one] }
    }

    pub fn id_or_insert(&mut self, m: &Monomial) -> usize {
        if let Some(&id) = self.ids.get(m) {
            return id;
        }
        let id = self.list.len();
        self.ids.insert(m.clone(), id);
        self.list.push(m.clone());
        id
    }

    pub fn get(&self, m: &Monomial) -> Option<usize> {
        self.ids.get(m).copied()
    }

    pub fn monomial(&self, id: usize) -> &Monomial {
        &self.list[id]
    }

    /// Number of pseudo-moments including `y_0`.
    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// SDP variable of a moment id: `y_0 = 1` is eliminated.
fn sdp_var(id: usize) -> Option<usize> {
    id.checked_sub(1)
}

/// Block `L_y(b b^T (x) G)` with entry `((i,k),(j,l)) = sum_alpha G_alpha[k,l] y[alpha + b_i + b_j]`.
pub fn localizing_block(g: &PolynomialMatrix, basis: &NmtBasis, indexer: &mut MomentIndexer) -> KronBlock {
    let nb = basis.len();
    let terms: Vec<(&Monomial, &SymSparse)> = g.terms().collect();
    let mut vars = vec![None; terms.len() * nb * nb];
    for i in 0..nb {
        for j in i..nb {
            let bij = basis.monomials[i].mul(&basis.monomials[j]);
            for (t, (alpha, _)) in terms.iter().enumerate() {
                let id = indexer.id_or_insert(&bij.mul(alpha));
                vars[(t * nb + i) * nb + j] = sdp_var(id);
                vars[(t * nb + j) * nb + i] = sdp_var(id);
            }
        }
    }
    KronBlock { outer: nb, inner: g.dim(), terms: terms.into_iter().map(|(_, c)| c.clone()).collect(), vars }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Nmt,
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxationOptions {
    pub basis: BasisKind,
    /// Rescale variables by their box bounds and equilibrate blocks.
    pub scaling: bool,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        RelaxationOptions { basis: BasisKind::Nmt, scaling: true }
    }
}

/// An order-`r` relaxation in scaled variables `x_v = a_v / s_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub order: usize,
    pub sdp: SdpProblem,
    pub indexer: MomentIndexer,
    pub var_scale: Vec<f64>,
    /// The SDP objective times this factor is the weight (kg).
    pub objective_scale: f64,
}

impl Relaxation {
    /// Number of free pseudo-moments (`y_0` excluded).
    pub fn n_moments(&self) -> usize {
        self.indexer.len() - 1
    }

    pub fn block_stats(&self) -> Vec<(usize, usize)> {
        self.sdp.block_stats()
    }

    /// Moment vector in original variables from an SDP solution, `y_0` included.
    pub fn moments(&self, sdp_y: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.indexer.len());
        y.push(1.0);
        for id in 1..self.indexer.len() {
            let m = self.indexer.monomial(id);
            let s: f64 = m.exponents().iter().zip(&self.var_scale).map(|(&e, &s)| libm::pow(s, e as f64)).product();
            y.push(sdp_y[id - 1] * s);
        }
        y
    }

    /// SDP variables (scaled) of the Dirac measure at `a`.
    pub fn dirac(&self, a: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = a.iter().zip(&self.var_scale).map(|(a, s)| a / s).collect();
        (1..self.indexer.len()).map(|id| self.indexer.monomial(id).eval(&x)).collect()
    }

    pub fn lower_bound(&self, sol: &SdpSolution) -> f64 {
        sol.dual_objective * self.objective_scale
    }
}

/// Smallest relaxation order admissible for all constraints.
pub fn min_order(lmis: &[PolyLmi]) -> usize {
    lmis.iter().map(|l| l.min_order()).max().unwrap_or(1).max(1)
}

fn variable_scale(n_vars: usize, lmis: &[PolyLmi]) -> Vec<f64> {
    let mut s = vec![0.0f64; n_vars];
    for l in lmis {
        if let Some((v, ub)) = l.bound {
            if ub > 0.0 && ub.is_finite() {
                s[v] = s[v].max(ub);
            }
        }
    }
    s.into_iter().map(|v| if v > 0.0 { v } else { 1.0 }).collect()
}

/// `G(s x)` with each row/column equilibrated and the result normalized to unit max entry.
fn scaled_matrix(g: &PolynomialMatrix, scale: &[f64], equilibrate: bool) -> PolynomialMatrix {
    let n = g.dim();
    let mut out = PolynomialMatrix::zero(n, g.n_vars());
    let mut diag = vec![0.0; n];
    let mut scaled: Vec<(Monomial, SymSparse)> = Vec::new();
    for (m, c) in g.terms() {
        let f: f64 = m.exponents().iter().zip(scale).map(|(&e, &s)| libm::pow(s, e as f64)).product();
        let c = c.scaled(f);
        for (k, d) in diag.iter_mut().enumerate() {
            *d += c.get(k, k).abs();
        }
        scaled.push((m.clone(), c));
    }
    let d = if equilibrate && n > 1 { linalg::jacobi_scaling(&diag) } else { vec![1.0; n] };
    let mut max = 0.0f64;
    for (_, c) in scaled.iter_mut() {
        *c = c.diag_congruence(&d);
        max = max.max(c.max_abs());
    }
    let norm = if max > 0.0 { 1.0 / max } else { 1.0 };
    for (m, c) in scaled {
        out.add_term(m, &c.scaled(norm));
    }
    out
}

/// Builds the order-`r` relaxation: one moment block, then one localizing
/// block per constraint in input order.
pub fn build_relaxation(pencil: &StructuralPencil, lmis: &[PolyLmi], r: usize, options: &RelaxationOptions) -> Result<Relaxation> {
    let n = pencil.n_vars();
    let rmin = min_order(lmis);
    if r < rmin {
        return Err(Error::OrderTooLow { order: r, min: rmin });
    }
    for l in lmis {
        if l.matrix.n_vars() != n {
            return Err(Error::DimensionMismatch { expected: n, found: l.matrix.n_vars() });
        }
    }
    let var_scale = if options.scaling { variable_scale(n, lmis) } else { vec![1.0; n] };
    let make_basis = |d: usize| match options.basis {
        BasisKind::Nmt => nmt_basis(n, d),
        BasisKind::Full => full_basis(n, d),
    };

    let mut indexer = MomentIndexer::new(n);
    let mut blocks = Vec::with_capacity(lmis.len() + 1);
    let one = PolynomialMatrix::constant(
        {
            let mut c = SymSparse::new(1);
            c.add(0, 0, 1.0);
            c
        },
        n,
    );
    blocks.push(SdpBlock { label: String::from("moment"), data: BlockData::Kron(localizing_block(&one, &make_basis(r), &mut indexer)) });
    for l in lmis {
        let d = l.basis_order(r).ok_or(Error::OrderTooLow { order: r, min: l.min_order() })?;
        let g = if options.scaling { scaled_matrix(&l.matrix, &var_scale, true) } else { l.matrix.clone() };
        blocks.push(SdpBlock { label: l.label.clone(), data: BlockData::Kron(localizing_block(&g, &make_basis(d), &mut indexer)) });
    }
    let mut objective = vec![0.0; indexer.len() - 1];
    let coef: Vec<f64> = pencil.weights.iter().zip(&var_scale).map(|(w, s)| w * s).collect();
    let objective_scale = if options.scaling { coef.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300) } else { 1.0 };
    for v in 0..n {
        let id = indexer.id_or_insert(&Monomial::pure(n, v, 1));
        if id > objective.len() {
            objective.resize(id, 0.0);
        }
        objective[id - 1] += coef[v] / objective_scale;
    }
    let sdp = SdpProblem { num_vars: indexer.len() - 1, objective, objective_offset: 0.0, blocks };
    Ok(Relaxation { order: r, sdp, indexer, var_scale, objective_scale })
}

/// `L_y(p)` of a scalar polynomial given by its terms, with `y` in original variables.
pub fn riesz_apply(terms: &[(Monomial, f64)], y: &[f64], indexer: &MomentIndexer) -> Result<f64> {
    let mut acc = 0.0;
    for (m, c) in terms {
        let id = indexer.get(m).ok_or_else(|| Error::UnindexedMonomial(format!("{m}")))?;
        acc += c * y[id];
    }
    Ok(acc)
}

/// First-order moments `a_v = y[e_v]` in original variables, clamped at zero.
pub fn extract_first_moments(sol: &SdpSolution, relax: &Relaxation) -> Vec<f64> {
    let n = relax.var_scale.len();
    (0..n)
        .map(|v| {
            let id = relax.indexer.get(&Monomial::pure(n, v, 1)).expect("first-order moments are always indexed");
            (sol.y[id - 1] * relax.var_scale[v]).max(0.0)
        })
        .collect()
}
