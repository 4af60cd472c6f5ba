//! Frame optimization problem data.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Material {
    /// Young modulus (Pa).
    pub young_modulus: f64,
    /// Mass density (kg/m^3).
    pub density: f64,
}

impl Material {
    pub fn new(young_modulus: f64, density: f64) -> Result<Self> {
        let m = Material { young_modulus, density };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if !(self.young_modulus > 0.0 && self.density > 0.0) || !self.young_modulus.is_finite() || !self.density.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "material constants must be positive, got E={} rho={}",
                self.young_modulus, self.density
            )));
        }
        Ok(())
    }
}

/// Relation between cross-sectional area and second moment of area.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CrossSectionLaw {
    /// Solid circle: `I = A^2 / (4 pi)`.
    Circular,
    /// Rectangle of fixed width `b` (m) and free height: `I = A^3 / (12 b^2)`.
    RectangularFixedWidth { width: f64 },
}

impl CrossSectionLaw {
    /// Polynomial degree of the bending stiffness in the area.
    pub fn bending_degree(&self) -> u8 {
        match self {
            CrossSectionLaw::Circular => 2,
            CrossSectionLaw::RectangularFixedWidth { .. } => 3,
        }
    }

    /// Coefficient `c` in `I = c A^d`.
    pub fn inertia_coefficient(&self) -> f64 {
        match *self {
            CrossSectionLaw::Circular => 1.0 / (4.0 * core::f64::consts::PI),
            CrossSectionLaw::RectangularFixedWidth { width } => 1.0 / (12.0 * width * width),
        }
    }

    fn validate(&self) -> Result<()> {
        if let CrossSectionLaw::RectangularFixedWidth { width } = *self {
            if !(width > 0.0 && width.is_finite()) {
                return Err(Error::InvalidProblem(format!("section width must be positive, got {width}")));
            }
        }
        Ok(())
    }
}

/// A straight member between two nodes, meshed into equal elements and
/// sharing the cross-sectional area variable `design_var` (0-based).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub material: Material,
    pub section: CrossSectionLaw,
    pub elements: usize,
    pub design_var: usize,
}

/// Fixed degrees of freedom `(u, v, theta)` of a node.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Support {
    pub node: usize,
    pub fixed: [bool; 3],
}

impl Support {
    pub fn clamped(node: usize) -> Self {
        Support { node, fixed: [true; 3] }
    }
}

/// Nonstructural point mass acting on both translations of a node.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointMass {
    pub node: usize,
    pub mass: f64,
}

/// One column of the load ellipsoid matrix `Q`: `scale * direction` at `node`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoadColumn {
    pub node: usize,
    pub direction: [f64; 2],
    pub scale: f64,
}

/// Nodal force `(fx, fy)` in N.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodalForce {
    pub node: usize,
    pub force: [f64; 2],
}

/// Harmonic load `f(t) = f_A (c1 cos wt + c2 sin wt)` with either an
/// ellipsoidal amplitude set `{Q e : |e| <= 1}` or a fixed amplitude.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarmonicLoadSpec {
    pub omega: f64,
    pub phase: (f64, f64),
    pub columns: Vec<LoadColumn>,
    pub amplitude: Option<Vec<NodalForce>>,
}

impl HarmonicLoadSpec {
    pub fn new(omega: f64, phase: (f64, f64), columns: Vec<LoadColumn>) -> Result<Self> {
        let spec = HarmonicLoadSpec { omega, phase, columns, amplitude: None };
        spec.validate()?;
        Ok(spec)
    }

    /// Number of ellipsoid columns, or 1 for a fixed amplitude.
    pub fn q(&self) -> usize {
        if self.columns.is_empty() && self.amplitude.is_some() {
            1
        } else {
            self.columns.len()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (c1, c2) = self.phase;
        let norm = c1 * c1 + c2 * c2;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::PhaseNotNormalized(norm));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidProblem(format!("omega must be nonnegative, got {}", self.omega)));
        }
        if self.columns.is_empty() && self.amplitude.is_none() {
            return Err(Error::InvalidProblem("load needs at least one ellipsoid column or an amplitude".into()));
        }
        for c in &self.columns {
            let n = libm::hypot(c.direction[0], c.direction[1]);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidProblem(format!("load direction at node {} is not a unit vector", c.node)));
            }
            if !(c.scale.is_finite()) {
                return Err(Error::InvalidProblem("load scale must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Constraint thresholds; `None` disables the constraint.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Thresholds {
    /// Lower bound on the fundamental eigenvalue (rad^2/s^2).
    pub lambda_bar: Option<f64>,
    /// Static compliance bound (N m).
    pub cbar: Option<f64>,
    /// Robust dynamic compliance bound (N m).
    pub dbar: Option<f64>,
    /// Robust peak input power bound (W).
    pub pbar: Option<f64>,
}

impl Thresholds {
    pub fn is_empty(&self) -> bool {
        self.lambda_bar.is_none() && self.cbar.is_none() && self.dbar.is_none() && self.pbar.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameProblem {
    pub name: String,
    pub nodes: Vec<[f64; 2]>,
    pub segments: Vec<Segment>,
    pub supports: Vec<Support>,
    pub masses: Vec<PointMass>,
    pub load: Option<HarmonicLoadSpec>,
    pub thresholds: Thresholds,
    pub weight_cap: Option<f64>,
}

impl FrameProblem {
    pub fn n_vars(&self) -> usize {
        self.segments.iter().map(|s| s.design_var + 1).max().unwrap_or(0)
    }

    pub fn segment_length(&self, s: usize) -> f64 {
        let seg = &self.segments[s];
        let p = self.nodes[seg.start];
        let q = self.nodes[seg.end];
        libm::hypot(q[0] - p[0], q[1] - p[1])
    }

    /// Checks every structural invariant of the problem.
    pub fn validate(&self) -> Result<()> {
        let nn = self.nodes.len();
        let bad_node = |what: &str, k: usize| Error::InvalidProblem(format!("{what} references missing node {k}"));
        if self.segments.is_empty() {
            return Err(Error::InvalidProblem("problem has no segments".into()));
        }
        for p in &self.nodes {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(Error::InvalidProblem("node coordinates must be finite".into()));
            }
        }
        let mut used = vec![false; nn];
        for (k, s) in self.segments.iter().enumerate() {
            if s.start >= nn || s.end >= nn {
                return Err(bad_node(&format!("segment {}", k + 1), s.start.max(s.end)));
            }
            if s.elements == 0 {
                return Err(Error::InvalidProblem(format!("segment {} needs at least one element", k + 1)));
            }
            s.material.validate()?;
            s.section.validate()?;
            if !(self.segment_length(k) > 0.0) {
                return Err(Error::NonPositiveLength { segment: k + 1 });
            }
            used[s.start] = true;
            used[s.end] = true;
        }
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(Error::InvalidProblem(format!("node {k} is not attached to any segment")));
        }
        let nv = self.n_vars();
        let mut seen = vec![false; nv];
        for s in &self.segments {
            seen[s.design_var] = true;
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidProblem(format!("inconsistent linking: design variable {} has no segment", v + 1)));
        }
        for v in 0..nv {
            let laws: Vec<_> = self.segments.iter().filter(|s| s.design_var == v).map(|s| s.section).collect();
            if laws.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::InvalidProblem(format!("inconsistent linking: design variable {} mixes cross-section laws", v + 1)));
            }
        }
        if !self.supports.iter().any(|s| s.fixed.iter().any(|&f| f)) {
            return Err(Error::Unsupported);
        }
        for s in &self.supports {
            if s.node >= nn {
                return Err(bad_node("support", s.node));
            }
        }
        for m in &self.masses {
            if m.node >= nn {
                return Err(bad_node("mass", m.node));
            }
            if !(m.mass >= 0.0 && m.mass.is_finite()) {
                return Err(Error::InvalidProblem(format!("mass at node {} must be nonnegative", m.node)));
            }
        }
        if let Some(load) = &self.load {
            load.validate()?;
            for c in &load.columns {
                if c.node >= nn {
                    return Err(bad_node("load column", c.node));
                }
            }
            for f in load.amplitude.iter().flatten() {
                if f.node >= nn {
                    return Err(bad_node("load amplitude", f.node));
                }
            }
            if load.omega == 0.0 && self.thresholds.pbar.is_some() {
                return Err(Error::ZeroFrequency);
            }
        }
        let t = &self.thresholds;
        for (name, v) in [("lambda_bar", t.lambda_bar), ("cbar", t.cbar), ("dbar", t.dbar), ("pbar", t.pbar)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidProblem(format!("threshold {name} must be positive, got {v}")));
                }
            }
        }
        if (t.cbar.is_some() || t.dbar.is_some() || t.pbar.is_some()) && self.load.is_none() {
            return Err(Error::InvalidProblem("response thresholds require a load".into()));
        }
        if let Some(w) = self.weight_cap {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidProblem(format!("weight cap must be positive, got {w}")));
            }
        }
        Ok(())
    }
}
