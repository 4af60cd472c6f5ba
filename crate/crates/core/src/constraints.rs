//! Polynomial matrix inequalities `G(a) >= 0` for every constraint family.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use faer::Mat;

use crate::fem::{load_vector, StructuralPencil};
use crate::linalg;
use crate::model::FrameProblem;
use crate::poly::{Monomial, PolynomialMatrix, SymSparse};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LmiKind {
    FreeVibration,
    StaticCompliance,
    DynCompliance,
    PeakPower,
    /// Quadratic box `a_v (u_v - a_v) >= 0`.
    Box,
    /// Linear bound `a_v - l_v >= 0`.
    BoxLower,
    /// Linear bound `u_v - a_v >= 0`.
    BoxUpper,
    WeightCap,
}

impl LmiKind {
    /// Scalar compactification constraints use basis order `r - 1`.
    pub fn is_scalar_bound(&self) -> bool {
        matches!(self, LmiKind::Box | LmiKind::BoxLower | LmiKind::BoxUpper | LmiKind::WeightCap)
    }
}

/// Data of a bordered block `[[c I_q, -Q^T], [-Q, K - omega^2 M]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Border {
    /// Columns of `Q` on the reduced DOFs.
    pub columns: Vec<Vec<f64>>,
    pub omega: f64,
    /// Corner value `c`: the compliance bound, or `2 p / omega` for power.
    pub corner: f64,
}

impl Border {
    pub fn q(&self) -> usize {
        self.columns.len()
    }
}

/// A polynomial matrix inequality together with its physical parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyLmi {
    pub kind: LmiKind,
    pub matrix: PolynomialMatrix,
    /// Eigenvalue bound (free vibration) or `omega^2` (bordered kinds).
    pub lambda: f64,
    pub border: Option<Border>,
    /// `(variable, bound)` for the box kinds.
    pub bound: Option<(usize, f64)>,
    pub label: String,
}

impl PolyLmi {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn degree(&self) -> usize {
        self.matrix.degree()
    }

    /// Minimum relaxation order needed to build a localizing block.
    pub fn min_order(&self) -> usize {
        let d = self.degree();
        if self.kind.is_scalar_bound() {
            1.max(d.div_ceil(2))
        } else {
            d.div_ceil(2)
        }
    }

    /// Basis order of the localizing block at relaxation order `r`.
    pub fn basis_order(&self, r: usize) -> Option<usize> {
        let drop = if self.kind.is_scalar_bound() { 1.max(self.degree().div_ceil(2)) } else { self.degree().div_ceil(2) };
        r.checked_sub(drop)
    }
}

/// `K(a) - lambda M(a)`.
fn pencil_combination(pencil: &StructuralPencil, lambda: f64) -> PolynomialMatrix {
    let mut g = pencil.stiffness.clone();
    g.add_scaled(&pencil.mass, -lambda);
    g
}

pub fn free_vibration_lmi(pencil: &StructuralPencil, lambda_bar: f64) -> Result<PolyLmi> {
    if !(lambda_bar >= 0.0 && lambda_bar.is_finite()) {
        return Err(Error::InvalidProblem(format!("eigenvalue bound must be nonnegative, got {lambda_bar}")));
    }
    Ok(PolyLmi {
        kind: LmiKind::FreeVibration,
        matrix: pencil_combination(pencil, lambda_bar),
        lambda: lambda_bar,
        border: None,
        bound: None,
        label: String::from("free-vibration"),
    })
}

fn bordered(pencil: &StructuralPencil, mass: &PolynomialMatrix, border: Border, kind: LmiKind) -> Result<PolyLmi> {
    let n = pencil.n_dof();
    for c in &border.columns {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
    }
    let q = border.q();
    let omega2 = border.omega * border.omega;
    let mut inner = pencil.stiffness.clone();
    inner.add_scaled(mass, -omega2);
    let mut g = inner.embedded(q + n, q);
    let one = Monomial::one(pencil.n_vars());
    for (k, col) in border.columns.iter().enumerate() {
        g.add_entry(&one, k, k, border.corner);
        for (i, &v) in col.iter().enumerate() {
            if v != 0.0 {
                g.add_entry(&one, k, q + i, -v);
            }
        }
    }
    Ok(PolyLmi {
        kind,
        matrix: g,
        lambda: omega2,
        border: Some(border),
        bound: None,
        label: String::from(match kind {
            LmiKind::StaticCompliance => "static-compliance",
            LmiKind::PeakPower => "peak-power",
            _ => "dyn-compliance",
        }),
    })
}

/// `[[c, -f^T], [-f, K(a)]] >= 0`.
pub fn static_compliance_lmi(pencil: &StructuralPencil, f: &[f64], cbar: f64) -> Result<PolyLmi> {
    robust_static_compliance_lmi(pencil, &[f.to_vec()], cbar)
}

/// `[[c I, -Q^T], [-Q, K(a)]] >= 0`.
pub fn robust_static_compliance_lmi(pencil: &StructuralPencil, q: &[Vec<f64>], cbar: f64) -> Result<PolyLmi> {
    positive("cbar", cbar)?;
    let border = Border { columns: q.to_vec(), omega: 0.0, corner: cbar };
    bordered(pencil, &pencil.mass, border, LmiKind::StaticCompliance)
}

pub fn robust_dyn_compliance_lmi(pencil: &StructuralPencil, q: &[Vec<f64>], omega: f64, dbar: f64) -> Result<PolyLmi> {
    positive("dbar", dbar)?;
    if !(omega >= 0.0) {
        return Err(Error::InvalidProblem(format!("omega must be nonnegative, got {omega}")));
    }
    let border = Border { columns: q.to_vec(), omega, corner: dbar };
    bordered(pencil, &pencil.mass, border, LmiKind::DynCompliance)
}

pub fn robust_peak_power_lmi(pencil: &StructuralPencil, q: &[Vec<f64>], omega: f64, pbar: f64) -> Result<PolyLmi> {
    positive("pbar", pbar)?;
    if !(omega > 0.0) {
        return Err(Error::ZeroFrequency);
    }
    let border = Border { columns: q.to_vec(), omega, corner: 2.0 * pbar / omega };
    bordered(pencil, &pencil.mass, border, LmiKind::PeakPower)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("{name} must be positive, got {v}")))
    }
}

/// Quadratic boxes `a_v (w/(rho l)_v - a_v) >= 0` and the cap `w - sum (rho l)_v a_v >= 0`.
pub fn compactification_lmis(pencil: &StructuralPencil, wbar: f64) -> Result<Vec<PolyLmi>> {
    positive("weight cap", wbar)?;
    let nv = pencil.n_vars();
    let mut out = Vec::with_capacity(nv + 1);
    for v in 0..nv {
        let ub = wbar / pencil.weights[v];
        let mut g = PolynomialMatrix::zero(1, nv);
        g.add_entry(&Monomial::pure(nv, v, 1), 0, 0, ub);
        g.add_entry(&Monomial::pure(nv, v, 2), 0, 0, -1.0);
        out.push(PolyLmi {
            kind: LmiKind::Box,
            matrix: g,
            lambda: 0.0,
            border: None,
            bound: Some((v, ub)),
            label: format!("box a{}", v + 1),
        });
    }
    let mut g = PolynomialMatrix::zero(1, nv);
    g.add_entry(&Monomial::one(nv), 0, 0, wbar);
    for v in 0..nv {
        g.add_entry(&Monomial::pure(nv, v, 1), 0, 0, -pencil.weights[v]);
    }
    out.push(PolyLmi { kind: LmiKind::WeightCap, matrix: g, lambda: 0.0, border: None, bound: None, label: String::from("weight cap") });
    Ok(out)
}

/// Rewrites a bordered response constraint as the free-vibration constraint
/// `K - omega^2 (M + Q Q^T / (omega^2 c)) >= 0`, returning the augmented
/// nonstructural mass as well.
pub fn to_augmented_pencil(pencil: &StructuralPencil, lmi: &PolyLmi) -> Result<(PolyLmi, SymSparse)> {
    let border = lmi.border.as_ref().ok_or_else(|| Error::InvalidProblem("only bordered constraints have an augmented pencil".into()))?;
    if !(border.omega > 0.0) {
        return Err(Error::ZeroFrequency);
    }
    let omega2 = border.omega * border.omega;
    let mut m0 = pencil.nonstructural_mass();
    let s = 1.0 / (omega2 * border.corner);
    for col in &border.columns {
        let nz: Vec<(usize, f64)> = col.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        for (a, &(i, vi)) in nz.iter().enumerate() {
            for &(j, vj) in &nz[a..] {
                m0.add(i, j, s * vi * vj);
            }
        }
    }
    m0.prune();
    let mut mass = pencil.structural_mass();
    mass.add_term(Monomial::one(pencil.n_vars()), &m0);
    let mut g = pencil.stiffness.clone();
    g.add_scaled(&mass, -omega2);
    let fv = PolyLmi {
        kind: LmiKind::FreeVibration,
        matrix: g,
        lambda: omega2,
        border: None,
        bound: None,
        label: String::from("augmented free-vibration"),
    };
    Ok((fv, m0))
}

/// Columns `Q` with `Q Q^T = M0` from the eigendecomposition of the
/// nonstructural mass, in descending eigenvalue order.
pub fn factor_nonstructural_mass(pencil: &StructuralPencil) -> Result<Vec<Vec<f64>>> {
    let m0 = pencil.nonstructural_mass();
    let support = m0.support();
    if support.is_empty() {
        return Ok(Vec::new());
    }
    let k = support.len();
    let local = Mat::from_fn(k, k, |i, j| m0.get(support[i], support[j]));
    let (values, vectors) = linalg::sym_eigen(local.as_ref())?;
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(&neg) = values.iter().find(|&&v| v < -1e-10 * max) {
        return Err(Error::IndefiniteMass(neg));
    }
    let mut cols = Vec::new();
    for p in (0..k).rev() {
        if values[p] > 1e-12 * max {
            let s = libm::sqrt(values[p]);
            let mut c = alloc::vec![0.0; pencil.n_dof()];
            for (i, &d) in support.iter().enumerate() {
                c[d] = s * vectors[(i, p)];
            }
            // Deterministic sign: largest-magnitude entry positive.
            let (imax, _) = c.iter().enumerate().fold((0, 0.0f64), |b, (i, v)| if v.abs() > b.1.abs() + 1e-14 { (i, *v) } else { b });
            if c[imax] < 0.0 {
                c.iter_mut().for_each(|v| *v = -*v);
            }
            cols.push(c);
        }
    }
    Ok(cols)
}

/// Bordered form of a free-vibration constraint with `omega^2 = lambda`,
/// corner `1/lambda` and `Q` factoring the nonstructural mass.
pub fn from_pencil_to_bordered(pencil: &StructuralPencil, fv: &PolyLmi) -> Result<PolyLmi> {
    if fv.kind != LmiKind::FreeVibration {
        return Err(Error::InvalidProblem("expected a free-vibration constraint".into()));
    }
    positive("eigenvalue bound", fv.lambda)?;
    let q = factor_nonstructural_mass(pencil)?;
    if q.is_empty() {
        return Ok(fv.clone());
    }
    let border = Border { columns: q, omega: libm::sqrt(fv.lambda), corner: 1.0 / fv.lambda };
    bordered(pencil, &pencil.structural_mass(), border, LmiKind::DynCompliance)
}

/// Columns of `Q` on the reduced DOFs: ellipsoid columns, or the fixed amplitude.
pub fn load_matrix(problem: &FrameProblem, pencil: &StructuralPencil) -> Result<Vec<Vec<f64>>> {
    let load = problem.load.as_ref().ok_or_else(|| Error::InvalidProblem("problem has no load".into()))?;
    if !load.columns.is_empty() {
        Ok(load
            .columns
            .iter()
            .map(|c| load_vector(&pencil.dof_map, [(c.node, [c.scale * c.direction[0], c.scale * c.direction[1]])]))
            .collect())
    } else {
        let f = load.amplitude.as_ref().expect("validated load");
        Ok(alloc::vec![load_vector(&pencil.dof_map, f.iter().map(|f| (f.node, f.force)))])
    }
}

/// Every response constraint implied by the problem thresholds.
pub fn response_lmis(problem: &FrameProblem, pencil: &StructuralPencil) -> Result<Vec<PolyLmi>> {
    let t = &problem.thresholds;
    let mut out = Vec::new();
    if let Some(l) = t.lambda_bar {
        out.push(free_vibration_lmi(pencil, l)?);
    }
    if t.cbar.is_some() || t.dbar.is_some() || t.pbar.is_some() {
        let q = load_matrix(problem, pencil)?;
        let omega = problem.load.as_ref().map(|l| l.omega).unwrap_or(0.0);
        if let Some(c) = t.cbar {
            out.push(robust_static_compliance_lmi(pencil, &q, c)?);
        }
        if let Some(d) = t.dbar {
            out.push(robust_dyn_compliance_lmi(pencil, &q, omega, d)?);
        }
        if let Some(p) = t.pbar {
            out.push(robust_peak_power_lmi(pencil, &q, omega, p)?);
        }
    }
    if out.is_empty() {
        return Err(Error::NoConstraints);
    }
    Ok(out)
}
