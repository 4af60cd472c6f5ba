//! Block-diagonal linear matrix inequality problems and their solution.
//!
//! A problem is `min c^T y + offset` subject to `F_b(y) = C_b + sum_k y_k A_{b,k} >= 0`
//! for every block `b`, with free scalar variables `y`.

mod ipm;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use faer::Mat;

use crate::poly::SymSparse;

pub use ipm::{solve, IpmOptions};

/// One coefficient of a sparse block: `var = None` is the constant term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseEntry {
    pub var: Option<usize>,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Explicit upper-triangle coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseBlock {
    pub dim: usize,
    pub entries: Vec<SparseEntry>,
}

/// `sum_t sum_{i,j} coef(vars[t][i][j]) E_ij (x) terms[t]` with an
/// `outer x outer` pattern of `inner x inner` symmetric coefficient matrices.
/// A `None` variable stands for the constant 1. `vars` is symmetric in `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KronBlock {
    pub outer: usize,
    pub inner: usize,
    pub terms: Vec<SymSparse>,
    pub vars: Vec<Option<usize>>,
}

impl KronBlock {
    pub fn var(&self, t: usize, i: usize, j: usize) -> Option<usize> {
        self.vars[(t * self.outer + i) * self.outer + j]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockData {
    Sparse(SparseBlock),
    Kron(KronBlock),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpBlock {
    pub label: String,
    pub data: BlockData,
}

impl SdpBlock {
    pub fn dim(&self) -> usize {
        match &self.data {
            BlockData::Sparse(s) => s.dim,
            BlockData::Kron(k) => k.outer * k.inner,
        }
    }

    /// Adds `sum_k w_k A_k` (plus the constant when `constant` is set) to `out`.
    pub fn accumulate(&self, w: &[f64], constant: bool, out: &mut Mat<f64>) {
        fn add(out: &mut Mat<f64>, i: usize, j: usize, v: f64) {
            out[(i, j)] += v;
            if i != j {
                out[(j, i)] += v;
            }
        }
        match &self.data {
            BlockData::Sparse(s) => {
                for e in &s.entries {
                    let c = match e.var {
                        Some(k) => w[k],
                        None if constant => 1.0,
                        None => continue,
                    };
                    add(out, e.row, e.col, c * e.value);
                }
            }
            BlockData::Kron(kb) => {
                let d = kb.inner;
                for (t, g) in kb.terms.iter().enumerate() {
                    for i in 0..kb.outer {
                        for j in i..kb.outer {
                            let c = match kb.var(t, i, j) {
                                Some(k) => w[k],
                                None if constant => 1.0,
                                None => continue,
                            };
                            if c == 0.0 {
                                continue;
                            }
                            for (k, l, v) in g.upper() {
                                let cv = c * v;
                                if i == j {
                                    add(out, i * d + k, j * d + l, cv);
                                } else {
                                    out[(i * d + k, j * d + l)] += cv;
                                    out[(j * d + l, i * d + k)] += cv;
                                    if k != l {
                                        out[(i * d + l, j * d + k)] += cv;
                                        out[(j * d + k, i * d + l)] += cv;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// `out[k] += <A_k, Z>` for symmetric `z`; returns `<C, Z>`.
    pub fn adjoint(&self, z: &Mat<f64>, out: &mut [f64]) -> f64 {
        let mut constant = 0.0;
        match &self.data {
            BlockData::Sparse(s) => {
                for e in &s.entries {
                    let f = if e.row == e.col { 1.0 } else { 2.0 };
                    let v = f * e.value * z[(e.row, e.col)];
                    match e.var {
                        Some(k) => out[k] += v,
                        None => constant += v,
                    }
                }
            }
            BlockData::Kron(kb) => {
                let d = kb.inner;
                for (t, g) in kb.terms.iter().enumerate() {
                    for i in 0..kb.outer {
                        for j in i..kb.outer {
                            let var = kb.var(t, i, j);
                            let mut acc = 0.0;
                            for (k, l, v) in g.upper() {
                                let zz =
                                    if k == l { z[(i * d + k, j * d + l)] } else { z[(i * d + k, j * d + l)] + z[(i * d + l, j * d + k)] };
                                acc += v * zz;
                            }
                            if i != j {
                                acc *= 2.0;
                            }
                            match var {
                                Some(k) => out[k] += acc,
                                None => constant += acc,
                            }
                        }
                    }
                }
            }
        }
        constant
    }

    /// Aggregated upper-triangle triplets `(var, row, col, value)`, sorted
    /// by variable (constant first), then row and column.
    pub fn triplets(&self) -> Vec<(Option<usize>, usize, usize, f64)> {
        let mut map: BTreeMap<(Option<usize>, usize, usize), f64> = BTreeMap::new();
        let mut put = |var: Option<usize>, i: usize, j: usize, v: f64| {
            let key = if i <= j { (var, i, j) } else { (var, j, i) };
            *map.entry(key).or_insert(0.0) += v;
        };
        match &self.data {
            BlockData::Sparse(s) => {
                for e in &s.entries {
                    put(e.var, e.row, e.col, e.value);
                }
            }
            BlockData::Kron(kb) => {
                let d = kb.inner;
                for (t, g) in kb.terms.iter().enumerate() {
                    for i in 0..kb.outer {
                        for j in i..kb.outer {
                            let var = kb.var(t, i, j);
                            for (k, l, v) in g.upper() {
                                put(var, i * d + k, j * d + l, v);
                                if i != j && k != l {
                                    put(var, i * d + l, j * d + k, v);
                                }
                            }
                        }
                    }
                }
            }
        }
        map.into_iter().filter(|(_, v)| *v != 0.0).map(|((var, i, j), v)| (var, i, j, v)).collect()
    }

    pub fn to_sparse(&self) -> SparseBlock {
        SparseBlock {
            dim: self.dim(),
            entries: self.triplets().into_iter().map(|(var, row, col, value)| SparseEntry { var, row, col, value }).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub blocks: Vec<SdpBlock>,
}

impl SdpProblem {
    /// Value of block `b` at `y`.
    pub fn evaluate_block(&self, b: usize, y: &[f64]) -> Mat<f64> {
        let block = &self.blocks[b];
        let n = block.dim();
        let mut out = Mat::zeros(n, n);
        block.accumulate(y, true, &mut out);
        out
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(y).map(|(c, v)| c * v).sum::<f64>()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim()).collect()
    }

    /// Block structure as `(count, dim)` pairs in first-appearance order of each size.
    pub fn block_stats(&self) -> Vec<(usize, usize)> {
        let mut stats: Vec<(usize, usize)> = Vec::new();
        for d in self.block_dims() {
            match stats.iter_mut().find(|(_, dd)| *dd == d) {
                Some(s) => s.0 += 1,
                None => stats.push((1, d)),
            }
        }
        stats
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SdpSolution {
    pub y: Vec<f64>,
    pub primal_objective: f64,
    /// Objective of the dual problem: a lower bound when dual feasible.
    pub dual_objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
}

impl SdpSolution {
    pub fn is_usable(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

pub(crate) fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}
