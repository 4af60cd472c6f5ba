//! Euler-Bernoulli frame elements and assembly of the polynomial pencil.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{CrossSectionLaw, FrameProblem, Material};
use crate::poly::{Monomial, PolynomialMatrix, SymSparse};
use crate::{Error, Result};

pub type Mat6 = [[f64; 6]; 6];

/// Per-unit-area element coefficients in global coordinates.
///
/// The element stiffness is `a * axial + a^d * bending` with `d = bending_degree`
/// and the element mass is `a * mass`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementMatrices {
    pub axial: Mat6,
    pub bending: Mat6,
    pub bending_degree: u8,
    pub mass: Mat6,
}

fn rotate(local: &Mat6, c: f64, s: f64) -> Mat6 {
    let mut r = [[0.0; 6]; 6];
    for k in [0, 3] {
        r[k][k] = c;
        r[k][k + 1] = s;
        r[k + 1][k] = -s;
        r[k + 1][k + 1] = c;
        r[k + 2][k + 2] = 1.0;
    }
    let mut tmp = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            tmp[i][j] = (0..6).map(|k| local[i][k] * r[k][j]).sum();
        }
    }
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = (0..6).map(|k| r[k][i] * tmp[k][j]).sum();
        }
    }
    out
}

/// Element coefficient set for a member of length `l` along unit vector `orientation`.
pub fn element_matrices(l: f64, material: Material, law: CrossSectionLaw, orientation: [f64; 2]) -> Result<ElementMatrices> {
    if !(l > 0.0) {
        return Err(Error::NonPositiveLength { segment: 0 });
    }
    let e = material.young_modulus;
    let rho = material.density;
    let ax = [0, 3];
    let bd = [1, 2, 4, 5];

    let mut k1 = [[0.0; 6]; 6];
    let ka = [[1.0, -1.0], [-1.0, 1.0]];
    for (p, &i) in ax.iter().enumerate() {
        for (q, &j) in ax.iter().enumerate() {
            k1[i][j] = e / l * ka[p][q];
        }
    }

    let ci = law.inertia_coefficient() * e / (l * l * l);
    let kb = [
        [12.0, 6.0 * l, -12.0, 6.0 * l],
        [6.0 * l, 4.0 * l * l, -6.0 * l, 2.0 * l * l],
        [-12.0, -6.0 * l, 12.0, -6.0 * l],
        [6.0 * l, 2.0 * l * l, -6.0 * l, 4.0 * l * l],
    ];
    let mut kbend = [[0.0; 6]; 6];
    for (p, &i) in bd.iter().enumerate() {
        for (q, &j) in bd.iter().enumerate() {
            kbend[i][j] = ci * kb[p][q];
        }
    }

    let mut m1 = [[0.0; 6]; 6];
    let ma = [[2.0, 1.0], [1.0, 2.0]];
    for (p, &i) in ax.iter().enumerate() {
        for (q, &j) in ax.iter().enumerate() {
            m1[i][j] = rho * l / 6.0 * ma[p][q];
        }
    }
    let mt = [
        [156.0, 22.0 * l, 54.0, -13.0 * l],
        [22.0 * l, 4.0 * l * l, 13.0 * l, -3.0 * l * l],
        [54.0, 13.0 * l, 156.0, -22.0 * l],
        [-13.0 * l, -3.0 * l * l, -22.0 * l, 4.0 * l * l],
    ];
    for (p, &i) in bd.iter().enumerate() {
        for (q, &j) in bd.iter().enumerate() {
            m1[i][j] = rho * l / 420.0 * mt[p][q];
        }
    }

    let [c, s] = orientation;
    Ok(ElementMatrices {
        axial: rotate(&k1, c, s),
        bending: rotate(&kbend, c, s),
        bending_degree: law.bending_degree(),
        mass: rotate(&m1, c, s),
    })
}

/// A finite element after meshing: node indices into [`DofMap::coords`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub nodes: [usize; 2],
    pub segment: usize,
    pub design_var: usize,
    pub length: f64,
}

/// Numbering of the meshed nodes and their free degrees of freedom.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    /// Coordinates of problem nodes followed by generated interior nodes.
    pub coords: Vec<[f64; 2]>,
    /// Reduced index of global DOF `3 * node + k`, `None` when supported.
    pub free_index: Vec<Option<usize>>,
    pub n_free: usize,
}

impl DofMap {
    pub fn dof(&self, node: usize, k: usize) -> Option<usize> {
        self.free_index[3 * node + k]
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }
}

/// Global stiffness `K(a)` and mass `M(a)` on the free DOFs.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralPencil {
    pub stiffness: PolynomialMatrix,
    pub mass: PolynomialMatrix,
    pub dof_map: DofMap,
    pub elements: Vec<Element>,
    /// Weight per unit area of each design variable (kg/m^2).
    pub weights: Vec<f64>,
}

impl StructuralPencil {
    pub fn n_vars(&self) -> usize {
        self.weights.len()
    }

    pub fn n_dof(&self) -> usize {
        self.dof_map.n_free
    }

    /// Highest bending degree present in the stiffness.
    pub fn stiffness_degree(&self) -> usize {
        self.stiffness.degree()
    }

    /// Constant (nonstructural) part of the mass matrix.
    pub fn nonstructural_mass(&self) -> SymSparse {
        self.mass.constant_term()
    }

    /// The structural part `M(a) - M0`.
    pub fn structural_mass(&self) -> PolynomialMatrix {
        let mut m = self.mass.clone();
        m.add_scaled(&PolynomialMatrix::constant(self.nonstructural_mass(), self.n_vars()), -1.0);
        m
    }
}

pub fn evaluate(p: &PolynomialMatrix, a: &[f64]) -> Result<faer::Mat<f64>> {
    p.evaluate(a)
}

pub fn structural_weight(pencil: &StructuralPencil, a: &[f64]) -> f64 {
    pencil.weights.iter().zip(a).map(|(w, x)| w * x).sum()
}

/// Meshes the segments and assembles `K(a)` and `M(a)` with supports removed.
pub fn assemble_pencil(problem: &FrameProblem) -> Result<StructuralPencil> {
    problem.validate()?;
    let nv = problem.n_vars();
    let mut coords = problem.nodes.clone();
    let mut elements = Vec::new();
    for (si, seg) in problem.segments.iter().enumerate() {
        let p = problem.nodes[seg.start];
        let q = problem.nodes[seg.end];
        let n = seg.elements;
        let mut ids = vec![seg.start];
        for k in 1..n {
            let t = k as f64 / n as f64;
            coords.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            ids.push(coords.len() - 1);
        }
        ids.push(seg.end);
        let l = problem.segment_length(si) / n as f64;
        for w in ids.windows(2) {
            elements.push(Element { nodes: [w[0], w[1]], segment: si, design_var: seg.design_var, length: l });
        }
    }

    let nn = coords.len();
    let mut fixed = vec![false; 3 * nn];
    for s in &problem.supports {
        for k in 0..3 {
            fixed[3 * s.node + k] |= s.fixed[k];
        }
    }
    let mut free_index = vec![None; 3 * nn];
    let mut n_free = 0;
    for (g, f) in fixed.iter().enumerate() {
        if !f {
            free_index[g] = Some(n_free);
            n_free += 1;
        }
    }
    if n_free == 0 {
        return Err(Error::InvalidProblem("every degree of freedom is supported".into()));
    }
    let dof_map = DofMap { coords, free_index, n_free };

    let mut stiffness = PolynomialMatrix::zero(n_free, nv);
    let mut mass = PolynomialMatrix::zero(n_free, nv);
    let mut weights = vec![0.0; nv];
    for el in &elements {
        let seg = &problem.segments[el.segment];
        let [i, j] = el.nodes;
        let pi = dof_map.coords[i];
        let pj = dof_map.coords[j];
        let dir = [(pj[0] - pi[0]) / el.length, (pj[1] - pi[1]) / el.length];
        let em = element_matrices(el.length, seg.material, seg.section, dir)?;
        let glob = [3 * i, 3 * i + 1, 3 * i + 2, 3 * j, 3 * j + 1, 3 * j + 2];
        let v = el.design_var;
        let lin = Monomial::pure(nv, v, 1);
        let bend = Monomial::pure(nv, v, em.bending_degree);
        for p in 0..6 {
            let Some(rp) = dof_map.free_index[glob[p]] else { continue };
            for q in p..6 {
                let Some(rq) = dof_map.free_index[glob[q]] else { continue };
                // add() mirrors off-diagonal entries, so visit each pair once.
                stiffness.add_entry(&lin, rp, rq, em.axial[p][q]);
                stiffness.add_entry(&bend, rp, rq, em.bending[p][q]);
                mass.add_entry(&lin, rp, rq, em.mass[p][q]);
            }
        }
        weights[v] += seg.material.density * el.length;
    }
    let one = Monomial::one(nv);
    for m in &problem.masses {
        for k in 0..2 {
            if let Some(d) = dof_map.dof(m.node, k) {
                mass.add_entry(&one, d, d, m.mass);
            }
        }
    }
    Ok(StructuralPencil { stiffness, mass, dof_map, elements, weights })
}

/// Reduced load vector of nodal forces; forces on supported DOFs are dropped.
pub fn load_vector(dofs: &DofMap, forces: impl IntoIterator<Item = (usize, [f64; 2])>) -> Vec<f64> {
    let mut f = vec![0.0; dofs.n_free];
    for (node, force) in forces {
        for k in 0..2 {
            if let Some(d) = dofs.dof(node, k) {
                f[d] += force[k];
            }
        }
    }
    f
}
