#![allow(dead_code)]

use dynframe_core::model::{
    CrossSectionLaw, FrameProblem, HarmonicLoadSpec, LoadColumn, Material, PointMass, Segment, Support, Thresholds,
};

pub const STEEL: Material = Material { young_modulus: 210e9, density: 7850.0 };

/// Dense symmetric matrix stored row-major.
#[derive(Clone, Debug)]
pub struct Dense {
    pub n: usize,
    pub v: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, v: vec![0.0; n * n] }
    }
    pub fn from_faer(m: &faer::Mat<f64>) -> Self {
        let n = m.nrows();
        let mut d = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                d.v[i * n + j] = m[(i, j)];
            }
        }
        d
    }
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.n + j]
    }
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.v[i * self.n + j] = x;
    }
    pub fn add_scaled(&self, o: &Dense, s: f64) -> Dense {
        Dense { n: self.n, v: self.v.iter().zip(&o.v).map(|(a, b)| a + s * b).collect() }
    }
    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.at(i, j) * x[j]).sum()).collect()
    }
}

/// Cyclic Jacobi eigenvalue iteration; eigenvalues ascending, eigenvectors as columns.
pub fn jacobi_eigen(m: &Dense) -> (Vec<f64>, Dense) {
    let n = m.n;
    let mut a = m.clone();
    let mut v = Dense::zeros(n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a.at(i, j).powi(2)).sum();
        let total: f64 = a.v.iter().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| a.at(x, x).partial_cmp(&a.at(y, y)).unwrap());
    let vals = idx.iter().map(|&i| a.at(i, i)).collect();
    let mut vecs = Dense::zeros(n);
    for (c, &i) in idx.iter().enumerate() {
        for k in 0..n {
            vecs.set(k, c, v.at(k, i));
        }
    }
    (vals, vecs)
}

pub fn min_eig(m: &Dense) -> f64 {
    jacobi_eigen(m).0[0]
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.n;
    let mut m = a.v.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().partial_cmp(&m[j * n + col].abs()).unwrap()).unwrap();
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r * n + k] * x[k]).sum();
        x[r] = (x[r] - s) / m[r * n + r];
    }
    x
}

/// Horizontal cantilever of `n_seg` segments of length `len / n_seg`, clamped at node 0,
/// each segment with its own area variable.
pub fn cantilever(n_seg: usize, len: f64, mesh: usize, section: CrossSectionLaw) -> FrameProblem {
    FrameProblem {
        name: "cantilever".into(),
        nodes: (0..=n_seg).map(|k| [len * k as f64 / n_seg as f64, 0.0]).collect(),
        segments: (0..n_seg).map(|k| Segment { start: k, end: k + 1, material: STEEL, section, elements: mesh, design_var: k }).collect(),
        supports: vec![Support::clamped(0)],
        masses: vec![],
        load: None,
        thresholds: Thresholds::default(),
        weight_cap: None,
    }
}

/// Two-segment cantilever with a tip mass and a frequency bound: 2 variables, 6 DOFs with one element per segment.
pub fn tiny_free_vibration(fmin_hz: f64) -> FrameProblem {
    let mut p = cantilever(2, 1.0, 1, CrossSectionLaw::Circular);
    p.masses = vec![PointMass { node: 2, mass: 5.0 }];
    let w = 2.0 * std::f64::consts::PI * fmin_hz;
    p.thresholds.lambda_bar = Some(w * w);
    p
}

/// Tip-loaded cantilever with an ellipsoidal harmonic load.
pub fn tiny_dynamic(omega: f64, radius: f64) -> FrameProblem {
    let mut p = cantilever(2, 1.0, 1, CrossSectionLaw::Circular);
    p.load = Some(
        HarmonicLoadSpec::new(
            omega,
            (1.0, 0.0),
            vec![
                LoadColumn { node: 2, direction: [1.0, 0.0], scale: radius },
                LoadColumn { node: 2, direction: [0.0, 1.0], scale: radius },
            ],
        )
        .unwrap(),
    );
    p
}
