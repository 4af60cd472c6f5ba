mod common;

use common::{cantilever, tiny_dynamic, tiny_free_vibration};
use dynframe_core::benchmarks::{builtin_benchmark, frequency_bound_hz, Benchmark, Variant};
use dynframe_core::fem::assemble_pencil;
use dynframe_core::model::{CrossSectionLaw, HarmonicLoadSpec, LoadColumn, Material, PointMass, Support};
use dynframe_core::Error;

#[test]
fn toys_validate() {
    tiny_free_vibration(10.0).validate().unwrap();
    tiny_dynamic(10.0, 1.0).validate().unwrap();
}

#[test]
fn phase_must_be_normalized() {
    let err = HarmonicLoadSpec::new(1.0, (1.0, 1.0), vec![LoadColumn { node: 0, direction: [1.0, 0.0], scale: 1.0 }]).unwrap_err();
    assert!(matches!(err, Error::PhaseNotNormalized(v) if (v - 2.0).abs() < 1e-12));
}

#[test]
fn load_directions_are_unit_vectors() {
    let err = HarmonicLoadSpec::new(1.0, (0.0, 1.0), vec![LoadColumn { node: 0, direction: [1.0, 1.0], scale: 1.0 }]);
    assert!(matches!(err, Err(Error::InvalidProblem(_))));
}

#[test]
fn coincident_nodes_are_rejected() {
    let mut p = cantilever(2, 1.0, 1, CrossSectionLaw::Circular);
    p.nodes[2] = p.nodes[1];
    assert_eq!(p.validate().unwrap_err(), Error::NonPositiveLength { segment: 2 });
}

#[test]
fn unsupported_structures_are_rejected() {
    let mut p = cantilever(1, 1.0, 1, CrossSectionLaw::Circular);
    p.supports = vec![Support { node: 0, fixed: [false; 3] }];
    assert_eq!(p.validate().unwrap_err(), Error::Unsupported);
}

#[test]
fn structural_invariants() {
    let base = cantilever(2, 1.0, 1, CrossSectionLaw::Circular);

    let mut p = base.clone();
    p.segments[1].end = 9;
    assert!(matches!(p.validate(), Err(Error::InvalidProblem(_))));

    let mut p = base.clone();
    p.segments[1].design_var = 2;
    assert!(matches!(p.validate(), Err(Error::InvalidProblem(m)) if m.contains("linking")));

    let mut p = base.clone();
    p.segments[1].design_var = 0;
    p.segments[1].section = CrossSectionLaw::RectangularFixedWidth { width: 0.1 };
    assert!(matches!(p.validate(), Err(Error::InvalidProblem(m)) if m.contains("linking")));

    let mut p = base.clone();
    p.nodes.push([5.0, 5.0]);
    assert!(matches!(p.validate(), Err(Error::InvalidProblem(m)) if m.contains("not attached")));

    let mut p = base.clone();
    p.masses = vec![PointMass { node: 1, mass: -1.0 }];
    assert!(p.validate().is_err());

    let mut p = base.clone();
    p.thresholds.cbar = Some(1.0);
    assert!(matches!(p.validate(), Err(Error::InvalidProblem(m)) if m.contains("require a load")));

    let mut p = base;
    p.weight_cap = Some(-3.0);
    assert!(p.validate().is_err());

    assert!(Material::new(-1.0, 1.0).is_err());
    assert!(Material::new(1.0, 0.0).is_err());
}

#[test]
fn power_bound_needs_a_frequency() {
    let mut p = tiny_dynamic(0.0, 1.0);
    p.thresholds.pbar = Some(1.0);
    assert_eq!(p.validate().unwrap_err(), Error::ZeroFrequency);
}

#[test]
fn benchmark_dimensions() {
    let cases = [
        (Benchmark::TenSegment, 10, 42, 140.0),
        (Benchmark::TwelveSegmentExperimental, 8, 60, 30.0),
        (Benchmark::ThirtyFiveSegment, 35, 141, 80.0),
    ];
    for (b, nv, ndof, fmin) in cases {
        assert_eq!(frequency_bound_hz(b), fmin);
        for v in Variant::ALL {
            let p = builtin_benchmark(b, v);
            p.validate().unwrap();
            assert_eq!(p.n_vars(), nv, "{b}");
            let pencil = assemble_pencil(&p).unwrap();
            assert_eq!(pencil.n_dof(), ndof, "{b}");
        }
    }
}

#[test]
fn benchmark_names_round_trip() {
    for b in Benchmark::ALL {
        assert_eq!(b.slug().parse::<Benchmark>().unwrap(), b);
    }
    for v in Variant::ALL {
        assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
    }
    assert!("eleven-segment".parse::<Benchmark>().is_err());
}

#[test]
fn section_laws() {
    let c = CrossSectionLaw::Circular;
    assert_eq!(c.bending_degree(), 2);
    assert!((c.inertia_coefficient() * 4.0 * std::f64::consts::PI - 1.0).abs() < 1e-15);
    let r = CrossSectionLaw::RectangularFixedWidth { width: 0.5 };
    assert_eq!(r.bending_degree(), 3);
    assert!((r.inertia_coefficient() - 1.0 / 3.0).abs() < 1e-15);
}
