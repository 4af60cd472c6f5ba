//! Built-in benchmark problems.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::model::{CrossSectionLaw, FrameProblem, HarmonicLoadSpec, LoadColumn, Material, PointMass, Segment, Support, Thresholds};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Benchmark {
    TenSegment,
    ThirtyFiveSegment,
    TwelveSegmentExperimental,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Variant {
    FreeVibration,
    DynCompliance,
    PeakPower,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::TenSegment, Benchmark::ThirtyFiveSegment, Benchmark::TwelveSegmentExperimental];

    pub fn slug(&self) -> &'static str {
        match self {
            Benchmark::TenSegment => "ten-segment",
            Benchmark::ThirtyFiveSegment => "thirty-five-segment",
            Benchmark::TwelveSegmentExperimental => "twelve-segment",
        }
    }
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::FreeVibration, Variant::DynCompliance, Variant::PeakPower];

    pub fn slug(&self) -> &'static str {
        match self {
            Variant::FreeVibration => "free-vibration",
            Variant::DynCompliance => "dyn-compliance",
            Variant::PeakPower => "peak-power",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Benchmark {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Benchmark::ALL.into_iter().find(|b| b.slug() == s).ok_or_else(|| Error::InvalidProblem(format!("unknown benchmark '{s}'")))
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Variant::ALL.into_iter().find(|v| v.slug() == s).ok_or_else(|| Error::InvalidProblem(format!("unknown variant '{s}'")))
    }
}

const ALUMINUM: Material = Material { young_modulus: 68.9e9, density: 2770.0 };
const PETG: Material = Material { young_modulus: 1.8e9, density: 1200.0 };

/// Excitation data of a benchmark family.
struct Excitation {
    f_min_hz: f64,
    masses: Vec<PointMass>,
    loaded_nodes: Vec<usize>,
    stated_radius: f64,
}

impl Excitation {
    fn omega(&self) -> f64 {
        2.0 * PI * self.f_min_hz
    }
    fn dbar(&self) -> f64 {
        1.0 / (self.omega() * self.omega())
    }
    fn pbar(&self) -> f64 {
        1.0 / (2.0 * self.omega())
    }
}

fn frame(
    name: &str,
    nodes: Vec<[f64; 2]>,
    conn: &[(usize, usize)],
    links: &[usize],
    material: Material,
    section: CrossSectionLaw,
    supports: &[usize],
) -> FrameProblem {
    let segments =
        conn.iter().zip(links).map(|(&(i, j), &v)| Segment { start: i, end: j, material, section, elements: 2, design_var: v }).collect();
    FrameProblem {
        name: String::from(name),
        nodes,
        segments,
        supports: supports.iter().map(|&n| Support::clamped(n)).collect(),
        masses: Vec::new(),
        load: None,
        thresholds: Thresholds::default(),
        weight_cap: None,
    }
}

fn geometry(b: Benchmark) -> (FrameProblem, Excitation) {
    match b {
        Benchmark::TenSegment => {
            let nodes = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]];
            let conn = [(3, 4), (3, 1), (0, 4), (0, 1), (1, 4), (4, 5), (4, 2), (1, 5), (1, 2), (2, 5)];
            let links: Vec<usize> = (0..10).collect();
            let p = frame("ten-segment", nodes.to_vec(), &conn, &links, ALUMINUM, CrossSectionLaw::Circular, &[0, 3]);
            let ex = Excitation {
                f_min_hz: 140.0,
                masses: [1, 5].iter().map(|&node| PointMass { node, mass: 10.0 }).collect(),
                loaded_nodes: [1, 5].to_vec(),
                stated_radius: 100.0,
            };
            (p, ex)
        }
        Benchmark::ThirtyFiveSegment => {
            let nodes = [
                [0.0, 0.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [1.0, 1.0],
                [-2.0, 2.0],
                [-1.0, 2.0],
                [0.0, 2.0],
                [1.0, 2.0],
                [2.0, 2.0],
                [3.0, 2.0],
                [-1.0, 3.0],
                [0.0, 3.0],
                [1.0, 3.0],
                [2.0, 3.0],
            ];
            let conn1: [(usize, usize); 35] = [
                (1, 3),
                (1, 8),
                (1, 4),
                (2, 3),
                (2, 7),
                (2, 4),
                (3, 4),
                (3, 7),
                (3, 13),
                (3, 8),
                (4, 7),
                (4, 12),
                (4, 8),
                (5, 6),
                (6, 7),
                (7, 8),
                (8, 9),
                (9, 10),
                (5, 11),
                (5, 12),
                (6, 11),
                (6, 12),
                (7, 11),
                (7, 12),
                (7, 13),
                (8, 12),
                (8, 13),
                (8, 14),
                (9, 13),
                (9, 14),
                (10, 13),
                (10, 14),
                (11, 12),
                (12, 13),
                (13, 14),
            ];
            let conn: Vec<_> = conn1.iter().map(|&(i, j)| (i - 1, j - 1)).collect();
            let links: Vec<usize> = (0..35).collect();
            let p = frame("thirty-five-segment", nodes.to_vec(), &conn, &links, ALUMINUM, CrossSectionLaw::Circular, &[0, 1]);
            let ex = Excitation {
                f_min_hz: 80.0,
                masses: [11, 12].iter().map(|&node| PointMass { node, mass: 10.0 }).collect(),
                loaded_nodes: [11, 12].to_vec(),
                stated_radius: 100.0,
            };
            (p, ex)
        }
        Benchmark::TwelveSegmentExperimental => {
            let cm = 0.01;
            // Bottom chord nodes 0..4, top chord nodes 5..9, 4 cm apart.
            let mut nodes = Vec::new();
            for y in [0.0, 2.0 * cm] {
                for k in 0..5 {
                    nodes.push([4.0 * cm * k as f64, y]);
                }
            }
            let conn = [(0, 1), (1, 2), (2, 3), (3, 4), (1, 6), (2, 7), (3, 8), (4, 9), (5, 6), (6, 7), (7, 8), (8, 9)];
            let links = [0, 1, 2, 3, 4, 5, 6, 7, 0, 1, 2, 3];
            let p =
                frame("twelve-segment", nodes, &conn, &links, PETG, CrossSectionLaw::RectangularFixedWidth { width: 2.0 * cm }, &[0, 5]);
            let ex = Excitation {
                f_min_hz: 30.0,
                masses: [PointMass { node: 4, mass: 0.02 }].to_vec(),
                loaded_nodes: [4].to_vec(),
                stated_radius: libm::sqrt(0.02),
            };
            (p, ex)
        }
    }
}

fn selector_columns(nodes: &[usize], radius: f64) -> Vec<LoadColumn> {
    nodes.iter().flat_map(|&node| [[1.0, 0.0], [0.0, 1.0]].map(|direction| LoadColumn { node, direction, scale: radius })).collect()
}

/// The benchmark exactly as stated, with the stated load ellipsoid radius.
pub fn builtin_benchmark(b: Benchmark, v: Variant) -> FrameProblem {
    let (_, ex) = geometry(b);
    with_radius(b, v, ex.stated_radius)
}

/// Dynamic variants with the radius `sqrt(m omega^2 dbar)` for which the
/// ellipsoid mass augmentation equals the free-vibration point masses.
pub fn builtin_benchmark_self_consistent(b: Benchmark, v: Variant) -> FrameProblem {
    with_radius(b, v, self_consistent_radius(b))
}

/// Radius per load column that makes `Q Q^T / (omega^2 dbar)` equal the point masses.
pub fn self_consistent_radius(b: Benchmark) -> f64 {
    let (_, ex) = geometry(b);
    let m = ex.masses[0].mass;
    libm::sqrt(m * ex.omega() * ex.omega() * ex.dbar())
}

/// Lower bound on the fundamental frequency in Hz.
pub fn frequency_bound_hz(b: Benchmark) -> f64 {
    geometry(b).1.f_min_hz
}

fn with_radius(b: Benchmark, v: Variant, radius: f64) -> FrameProblem {
    let (mut p, ex) = geometry(b);
    let omega = ex.omega();
    match v {
        Variant::FreeVibration => {
            p.masses = ex.masses.clone();
            p.thresholds.lambda_bar = Some(omega * omega);
        }
        Variant::DynCompliance | Variant::PeakPower => {
            p.load =
                Some(HarmonicLoadSpec { omega, phase: (1.0, 0.0), columns: selector_columns(&ex.loaded_nodes, radius), amplitude: None });
            if v == Variant::DynCompliance {
                p.thresholds.dbar = Some(ex.dbar());
            } else {
                p.thresholds.pbar = Some(ex.pbar());
            }
        }
    }
    p.name = format!("{}:{}", b.slug(), v.slug());
    p
}
