//! JSON problem documents. Nodes are 0-based; design links are 1-based.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use dynframe_core::model::{
    CrossSectionLaw, FrameProblem, HarmonicLoadSpec, LoadColumn, Material, NodalForce, PointMass, Segment, Support, Thresholds,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    name: String,
    nodes: Vec<[f64; 2]>,
    materials: BTreeMap<String, MaterialDoc>,
    sections: BTreeMap<String, SectionDoc>,
    segments: Vec<SegmentDoc>,
    supports: Vec<SupportDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    masses: Vec<MassDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    load: Option<LoadDoc>,
    #[serde(default)]
    constraints: ConstraintsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight_cap: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialDoc {
    young_modulus: f64,
    density: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SectionDoc {
    Circular,
    Rectangular { width: f64 },
}

fn default_mesh() -> usize {
    2
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    i: usize,
    j: usize,
    material: String,
    section: String,
    link: usize,
    #[serde(default = "default_mesh")]
    mesh: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportDoc {
    node: usize,
    fixed: [bool; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MassDoc {
    node: usize,
    mass: f64,
}

fn default_phase() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadDoc {
    omega: f64,
    #[serde(default = "default_phase")]
    phase: [f64; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    columns: Vec<ColumnDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude: Option<Vec<ForceDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnDoc {
    node: usize,
    dir: [f64; 2],
    scale: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForceDoc {
    node: usize,
    force: [f64; 2],
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fmin_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pbar: Option<f64>,
}

fn schema(path: &str, message: impl Into<String>) -> AppError {
    AppError::Schema { path: path.to_string(), message: message.into() }
}

/// Parses and validates a problem document.
pub fn parse_problem(text: &str) -> AppResult<FrameProblem> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ProblemDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, e.into_inner().to_string())
    })?;
    let problem = from_doc(doc)?;
    problem.validate()?;
    Ok(problem)
}

fn from_doc(doc: ProblemDoc) -> AppResult<FrameProblem> {
    let mut materials = BTreeMap::new();
    for (name, m) in &doc.materials {
        let mat = Material::new(m.young_modulus, m.density).map_err(|e| schema(&format!("materials.{name}"), e.to_string()))?;
        materials.insert(name.clone(), mat);
    }
    let sections: BTreeMap<&String, CrossSectionLaw> = doc
        .sections
        .iter()
        .map(|(name, s)| {
            (
                name,
                match *s {
                    SectionDoc::Circular => CrossSectionLaw::Circular,
                    SectionDoc::Rectangular { width } => CrossSectionLaw::RectangularFixedWidth { width },
                },
            )
        })
        .collect();
    let mut segments = Vec::with_capacity(doc.segments.len());
    for (k, s) in doc.segments.iter().enumerate() {
        let at = |field: &str| format!("segments[{k}].{field}");
        let material = *materials.get(&s.material).ok_or_else(|| schema(&at("material"), format!("unknown material `{}`", s.material)))?;
        let section = *sections.get(&s.section).ok_or_else(|| schema(&at("section"), format!("unknown section `{}`", s.section)))?;
        if s.link == 0 {
            return Err(schema(&at("link"), "design links are numbered from 1"));
        }
        segments.push(Segment { start: s.i, end: s.j, material, section, elements: s.mesh, design_var: s.link - 1 });
    }
    let c = &doc.constraints;
    let lambda_bar = match (c.fmin_hz, c.lambda_bar) {
        (Some(_), Some(_)) => return Err(schema("constraints", "give either fmin_hz or lambda_bar, not both")),
        (Some(f), None) => Some((2.0 * PI * f).powi(2)),
        (None, l) => l,
    };
    let load = doc.load.map(|l| HarmonicLoadSpec {
        omega: l.omega,
        phase: (l.phase[0], l.phase[1]),
        columns: l.columns.iter().map(|c| LoadColumn { node: c.node, direction: c.dir, scale: c.scale }).collect(),
        amplitude: l.amplitude.map(|a| a.iter().map(|f| NodalForce { node: f.node, force: f.force }).collect()),
    });
    Ok(FrameProblem {
        name: doc.name,
        nodes: doc.nodes,
        segments,
        supports: doc.supports.iter().map(|s| Support { node: s.node, fixed: s.fixed }).collect(),
        masses: doc.masses.iter().map(|m| PointMass { node: m.node, mass: m.mass }).collect(),
        load,
        thresholds: Thresholds { lambda_bar, cbar: c.cbar, dbar: c.dbar, pbar: c.pbar },
        weight_cap: doc.weight_cap,
    })
}

/// Serializes a problem as a pretty-printed document; `parse_problem` inverts it.
pub fn emit_problem(problem: &FrameProblem) -> String {
    let mut materials: Vec<Material> = Vec::new();
    let mut sections: Vec<CrossSectionLaw> = Vec::new();
    let mut segments = Vec::with_capacity(problem.segments.len());
    for s in &problem.segments {
        let mi = materials.iter().position(|m| *m == s.material).unwrap_or_else(|| {
            materials.push(s.material);
            materials.len() - 1
        });
        let si = sections.iter().position(|x| *x == s.section).unwrap_or_else(|| {
            sections.push(s.section);
            sections.len() - 1
        });
        segments.push(SegmentDoc {
            i: s.start,
            j: s.end,
            material: format!("material{}", mi + 1),
            section: format!("section{}", si + 1),
            link: s.design_var + 1,
            mesh: s.elements,
        });
    }
    let t = &problem.thresholds;
    let doc = ProblemDoc {
        name: problem.name.clone(),
        nodes: problem.nodes.clone(),
        materials: materials
            .iter()
            .enumerate()
            .map(|(k, m)| (format!("material{}", k + 1), MaterialDoc { young_modulus: m.young_modulus, density: m.density }))
            .collect(),
        sections: sections
            .iter()
            .enumerate()
            .map(|(k, s)| {
                (
                    format!("section{}", k + 1),
                    match *s {
                        CrossSectionLaw::Circular => SectionDoc::Circular,
                        CrossSectionLaw::RectangularFixedWidth { width } => SectionDoc::Rectangular { width },
                    },
                )
            })
            .collect(),
        segments,
        supports: problem.supports.iter().map(|s| SupportDoc { node: s.node, fixed: s.fixed }).collect(),
        masses: problem.masses.iter().map(|m| MassDoc { node: m.node, mass: m.mass }).collect(),
        load: problem.load.as_ref().map(|l| LoadDoc {
            omega: l.omega,
            phase: [l.phase.0, l.phase.1],
            columns: l.columns.iter().map(|c| ColumnDoc { node: c.node, dir: c.direction, scale: c.scale }).collect(),
            amplitude: l.amplitude.as_ref().map(|a| a.iter().map(|f| ForceDoc { node: f.node, force: f.force }).collect()),
        }),
        constraints: ConstraintsDoc { fmin_hz: None, lambda_bar: t.lambda_bar, cbar: t.cbar, dbar: t.dbar, pbar: t.pbar },
        weight_cap: problem.weight_cap,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("problem documents always serialize");
    s.push('\n');
    s
}

/// Design vectors are JSON arrays of areas in m^2.
pub fn parse_design(text: &str) -> AppResult<Vec<f64>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, e.into_inner().to_string())
    })
}
