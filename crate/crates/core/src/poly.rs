//! Monomials, sparse symmetric matrices and matrix-valued polynomials.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use faer::Mat;

use crate::{Error, Result};

/// Exponent vector of a monomial in the design variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monomial(Vec<u8>);

impl Monomial {
    pub fn one(n_vars: usize) -> Self {
        Monomial(vec![0; n_vars])
    }

    /// The pure power `a_var^power`.
    pub fn pure(n_vars: usize, var: usize, power: u8) -> Self {
        let mut e = vec![0; n_vars];
        e[var] = power;
        Monomial(e)
    }

    pub fn from_exponents(exponents: Vec<u8>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn n_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `Some((var, power))` when the monomial is a pure power of one variable.
    pub fn as_pure(&self) -> Option<(usize, u8)> {
        let mut found = None;
        for (v, &e) in self.0.iter().enumerate() {
            if e > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some((v, e));
            }
        }
        found
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, a: &[f64]) -> f64 {
        self.0.iter().zip(a).filter(|(e, _)| **e > 0).map(|(&e, &x)| libm::pow(x, e as f64)).product()
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for (v, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "a{}", v + 1)?;
            } else {
                write!(f, "a{}^{}", v + 1, e)?;
            }
        }
        Ok(())
    }
}

/// Sparse symmetric matrix stored by its upper triangle.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SymSparse {
    dim: usize,
    upper: BTreeMap<(usize, usize), f64>,
}

impl SymSparse {
    pub fn new(dim: usize) -> Self {
        SymSparse { dim, upper: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` to entries (i,j) and (j,i); diagonal entries are added once.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.dim && j < self.dim, "index out of range");
        if value == 0.0 {
            return;
        }
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.upper.entry(key).or_insert(0.0) += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.upper.get(&key).copied().unwrap_or(0.0)
    }

    /// Upper-triangle entries `(i, j, v)` with `i <= j`, in row-major order.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.upper.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn nnz_upper(&self) -> usize {
        self.upper.len()
    }

    pub fn is_zero(&self) -> bool {
        self.upper.values().all(|&v| v == 0.0)
    }

    pub fn prune(&mut self) {
        self.upper.retain(|_, v| *v != 0.0);
    }

    pub fn scaled(&self, s: f64) -> SymSparse {
        let mut out = self.clone();
        out.upper.values_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add_scaled(&mut self, other: &SymSparse, s: f64) {
        assert_eq!(self.dim, other.dim);
        for (i, j, v) in other.upper() {
            self.add(i, j, s * v);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sorted list of row/column indices that carry a nonzero entry.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.upper.keys().flat_map(|&(i, j)| [i, j]).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        self.add_to_dense(&mut m, 1.0);
        m
    }

    pub fn add_to_dense(&self, m: &mut Mat<f64>, s: f64) {
        for (i, j, v) in self.upper() {
            m[(i, j)] += s * v;
            if i != j {
                m[(j, i)] += s * v;
            }
        }
    }

    pub fn from_dense(m: &Mat<f64>, drop_below: f64) -> SymSparse {
        let n = m.nrows();
        let mut out = SymSparse::new(n);
        for j in 0..n {
            for i in 0..=j {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if v.abs() > drop_below {
                    out.add(i, j, v);
                }
            }
        }
        out
    }

    /// Congruence `D A D` with diagonal `D`.
    pub fn diag_congruence(&self, d: &[f64]) -> SymSparse {
        let mut out = self.clone();
        for (&(i, j), v) in out.upper.iter_mut() {
            *v *= d[i] * d[j];
        }
        out
    }

    /// Embeds the matrix at offset `at` inside a larger zero matrix.
    pub fn embedded(&self, dim: usize, at: usize) -> SymSparse {
        assert!(at + self.dim <= dim);
        let mut out = SymSparse::new(dim);
        for (i, j, v) in self.upper() {
            out.add(i + at, j + at, v);
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (i, j, v) in self.upper() {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }
}

/// Symmetric-matrix-valued polynomial `sum_alpha C_alpha a^alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialMatrix {
    dim: usize,
    n_vars: usize,
    terms: BTreeMap<Monomial, SymSparse>,
}

impl PolynomialMatrix {
    pub fn zero(dim: usize, n_vars: usize) -> Self {
        PolynomialMatrix { dim, n_vars, terms: BTreeMap::new() }
    }

    pub fn constant(c: SymSparse, n_vars: usize) -> Self {
        let mut p = Self::zero(c.dim(), n_vars);
        p.add_term(Monomial::one(n_vars), &c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn add_term(&mut self, m: Monomial, c: &SymSparse) {
        assert_eq!(m.n_vars(), self.n_vars, "monomial arity");
        assert_eq!(c.dim(), self.dim, "coefficient dimension");
        let slot = self.terms.entry(m).or_insert_with(|| SymSparse::new(self.dim));
        slot.add_scaled(c, 1.0);
    }

    /// Adds a single entry to the coefficient of `m`.
    pub fn add_entry(&mut self, m: &Monomial, i: usize, j: usize, v: f64) {
        let dim = self.dim;
        self.terms.entry(m.clone()).or_insert_with(|| SymSparse::new(dim)).add(i, j, v);
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &SymSparse)> {
        self.terms.iter().filter(|(_, c)| !c.is_zero())
    }

    pub fn term(&self, m: &Monomial) -> Option<&SymSparse> {
        self.terms.get(m)
    }

    pub fn constant_term(&self) -> SymSparse {
        self.terms.get(&Monomial::one(self.n_vars)).cloned().unwrap_or_else(|| SymSparse::new(self.dim))
    }

    pub fn degree(&self) -> usize {
        self.terms().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms().count()
    }

    /// `self + s * other`.
    pub fn add_scaled(&mut self, other: &PolynomialMatrix, s: f64) {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.n_vars, other.n_vars);
        for (m, c) in other.terms() {
            self.add_term(m.clone(), &c.scaled(s));
        }
        self.prune();
    }

    pub fn scaled(&self, s: f64) -> PolynomialMatrix {
        let mut out = Self::zero(self.dim, self.n_vars);
        out.add_scaled(self, s);
        out
    }

    fn prune(&mut self) {
        for c in self.terms.values_mut() {
            c.prune();
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    /// Embeds every coefficient at offset `at` of a `dim`-dimensional matrix.
    pub fn embedded(&self, dim: usize, at: usize) -> PolynomialMatrix {
        let mut out = Self::zero(dim, self.n_vars);
        for (m, c) in self.terms() {
            out.add_term(m.clone(), &c.embedded(dim, at));
        }
        out
    }

    pub fn evaluate(&self, a: &[f64]) -> Result<Mat<f64>> {
        if a.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: a.len() });
        }
        let mut out = Mat::zeros(self.dim, self.dim);
        for (m, c) in self.terms() {
            let w = m.eval(a);
            if w != 0.0 {
                c.add_to_dense(&mut out, w);
            }
        }
        Ok(out)
    }

    /// Exact value of the scalar polynomial in a 1x1 matrix.
    pub fn evaluate_scalar(&self, a: &[f64]) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        Ok(self.evaluate(a)?[(0, 0)])
    }
}
