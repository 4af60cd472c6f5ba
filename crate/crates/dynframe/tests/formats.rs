use dynframe::problem_file::{emit_problem, parse_design, parse_problem};
use dynframe::sdpa::{read_sdpa, write_sdpa};
use dynframe::AppError;
use dynframe_core::benchmarks::{builtin_benchmark, Benchmark, Variant};
use dynframe_core::constraints::{compactification_lmis, response_lmis};
use dynframe_core::fem::assemble_pencil;
use dynframe_core::relaxation::{build_relaxation, RelaxationOptions};
use dynframe_core::sdp::SdpProblem;
use proptest::prelude::*;

const ALL: [(Benchmark, Variant); 5] = [
    (Benchmark::TenSegment, Variant::FreeVibration),
    (Benchmark::TenSegment, Variant::DynCompliance),
    (Benchmark::TenSegment, Variant::PeakPower),
    (Benchmark::TwelveSegmentExperimental, Variant::FreeVibration),
    (Benchmark::ThirtyFiveSegment, Variant::FreeVibration),
];

#[test]
fn builtin_problems_round_trip() {
    for (b, v) in ALL {
        let p = builtin_benchmark(b, v);
        let text = emit_problem(&p);
        let q = parse_problem(&text).unwrap();
        assert_eq!(p, q, "{b} {v}");
        assert_eq!(emit_problem(&q), text);
    }
}

const MINIMAL: &str = r#"{
  "nodes": [[0, 0], [1, 0]],
  "materials": {"steel": {"young_modulus": 210e9, "density": 7850}},
  "sections": {"c": {"kind": "circular"}},
  "segments": [{"i": 0, "j": 1, "material": "steel", "section": "c", "link": 1}],
  "supports": [{"node": 0, "fixed": [true, true, true]}],
  "masses": [{"node": 1, "mass": 2.0}],
  "constraints": {"fmin_hz": 10}
}"#;

#[test]
fn minimal_document_defaults() {
    let p = parse_problem(MINIMAL).unwrap();
    assert_eq!(p.n_vars(), 1);
    assert_eq!(p.segments[0].design_var, 0);
    assert_eq!(p.segments[0].elements, 2);
    let lb = p.thresholds.lambda_bar.unwrap();
    assert!((lb - (2.0 * std::f64::consts::PI * 10.0).powi(2)).abs() <= 1e-9 * lb);
}

fn schema_path(text: &str) -> String {
    match parse_problem(text).unwrap_err() {
        AppError::Schema { path, .. } => path,
        e => panic!("expected a schema error, got {e}"),
    }
}

#[test]
fn schema_errors_carry_a_path() {
    let unknown = MINIMAL.replace("\"link\": 1", "\"link\": 1, \"colour\": 3");
    assert_eq!(schema_path(&unknown), "segments[0].colour");
    let bad_type = MINIMAL.replace("\"mass\": 2.0", "\"mass\": \"heavy\"");
    assert_eq!(schema_path(&bad_type), "masses[0].mass");
    let bad_material = MINIMAL.replace("\"material\": \"steel\"", "\"material\": \"oak\"");
    assert!(schema_path(&bad_material).starts_with("segments[0]"));
    let zero_link = MINIMAL.replace("\"link\": 1", "\"link\": 0");
    assert!(schema_path(&zero_link).starts_with("segments[0]"));
    assert!(matches!(parse_problem("not json"), Err(AppError::Schema { .. })));
}

#[test]
fn invalid_models_are_rejected() {
    let coincident = MINIMAL.replace("[1, 0]]", "[0, 0]]");
    assert!(parse_problem(&coincident).is_err());
    let bad_node = MINIMAL.replace("\"node\": 1, \"mass\"", "\"node\": 7, \"mass\"");
    assert!(parse_problem(&bad_node).is_err());
}

#[test]
fn designs_parse() {
    assert_eq!(parse_design("[1e-3, 0.0, 2.5e-4]").unwrap(), vec![1e-3, 0.0, 2.5e-4]);
    assert!(matches!(parse_design("{\"a\": 1}"), Err(AppError::Schema { .. })));
}

fn relaxation_sdp(b: Benchmark, v: Variant, cap: f64, r: usize) -> SdpProblem {
    let p = builtin_benchmark(b, v);
    let pencil = assemble_pencil(&p).unwrap();
    let mut lmis = response_lmis(&p, &pencil).unwrap();
    lmis.extend(compactification_lmis(&pencil, cap).unwrap());
    build_relaxation(&pencil, &lmis, r, &RelaxationOptions::default()).unwrap().sdp
}

#[test]
fn sdpa_round_trip_is_byte_identical() {
    for (b, v, cap, r) in [
        (Benchmark::TenSegment, Variant::FreeVibration, 148.442, 1),
        (Benchmark::TenSegment, Variant::FreeVibration, 148.442, 2),
        (Benchmark::TenSegment, Variant::DynCompliance, 148.442, 1),
        (Benchmark::TwelveSegmentExperimental, Variant::FreeVibration, 0.017, 2),
    ] {
        let sdp = relaxation_sdp(b, v, cap, r);
        let text = write_sdpa(&sdp);
        assert_eq!(write_sdpa(&sdp), text, "writer is deterministic");
        let back = read_sdpa(&text).unwrap();
        assert_eq!(back.num_vars, sdp.num_vars);
        assert_eq!(back.blocks.len(), sdp.blocks.len());
        for (x, y) in back.blocks.iter().zip(&sdp.blocks) {
            assert_eq!(x.dim(), y.dim());
        }
        assert_eq!(write_sdpa(&back), text, "{b} {v} r={r}");
    }
}

#[test]
fn sdpa_header_counts() {
    let sdp = relaxation_sdp(Benchmark::TenSegment, Variant::FreeVibration, 148.442, 1);
    let text = write_sdpa(&sdp);
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('"') && !l.starts_with('*')).collect();
    assert_eq!(lines[0].trim().parse::<usize>().unwrap(), 65);
    assert_eq!(lines[1].trim().parse::<usize>().unwrap(), 13);
}

#[test]
fn malformed_sdpa_reports_a_line() {
    assert!(matches!(read_sdpa("2\n1\n1\n1 2 3\n0 1 1 1 x\n"), Err(AppError::Sdpa { .. })));
    assert!(matches!(read_sdpa(""), Err(AppError::Sdpa { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn perturbed_problems_round_trip(
        scale in 0.5f64..2.0,
        mass in 0.0f64..50.0,
        fmin in 1.0f64..500.0,
        mesh in 1usize..5,
        cap in prop::option::of(1.0f64..1e3),
    ) {
        let mut p = builtin_benchmark(Benchmark::TenSegment, Variant::FreeVibration);
        for n in &mut p.nodes {
            n[0] *= scale;
            n[1] *= scale;
        }
        for s in &mut p.segments {
            s.elements = mesh;
        }
        for m in &mut p.masses {
            m.mass = mass;
        }
        p.thresholds.lambda_bar = Some((2.0 * std::f64::consts::PI * fmin).powi(2));
        p.weight_cap = cap;
        let text = emit_problem(&p);
        let q = parse_problem(&text).unwrap();
        prop_assert_eq!(emit_problem(&q), text);
        prop_assert_eq!(q.segments, p.segments);
        prop_assert_eq!(q.nodes, p.nodes);
        prop_assert_eq!(q.weight_cap, p.weight_cap);
        let (a, b) = (q.thresholds.lambda_bar.unwrap(), p.thresholds.lambda_bar.unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}
