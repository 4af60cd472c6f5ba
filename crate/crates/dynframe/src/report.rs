//! Report files written by the command-line front end.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use dynframe_core::analysis::{EigenResult, TimeHistory, WorstCaseReport};
use dynframe_core::certify::{Certificate, HistoryRow, PRUNE_RATIO};
use serde_json::{json, Value};

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values always serialize");
    s.push('\n');
    s
}

/// 1-based indices of variables reported as removed.
pub fn removed_members(a: &[f64]) -> Vec<usize> {
    let max = a.iter().fold(0.0f64, |m, v| m.max(*v));
    a.iter().enumerate().filter(|(_, v)| **v < PRUNE_RATIO * max).map(|(k, _)| k + 1).collect()
}

fn row_json(h: &HistoryRow) -> Value {
    json!({
        "order": h.order,
        "lower_bound_kg": h.lower_bound,
        "upper_bound_kg": h.upper_bound,
        "weight_cap_kg": h.weight_cap,
        "relative_gap": h.relative_gap,
        "blocks": h.blocks,
        "n_moments": h.n_moments,
        "status": h.status,
        "iterations": h.iterations,
        "scaled_weight_kg": h.scaled_weight,
    })
}

/// Certificate document; wall times and the timestamp live under `meta`.
pub fn certificate_json(problem: &str, cert: &Certificate) -> String {
    let v = json!({
        "problem": problem,
        "eps": cert.eps,
        "verdict": cert.verdict,
        "lower_bound_kg": cert.lower_bound,
        "upper_bound_kg": cert.best_weight,
        "relative_gap": cert.relative_gap(),
        "initial_weight_kg": cert.initial_weight,
        "design_m2": cert.best_design,
        "design_cm2": cert.best_design.iter().map(|a| a * 1e4).collect::<Vec<_>>(),
        "removed": removed_members(&cert.best_design),
        "history": cert.history.iter().map(row_json).collect::<Vec<_>>(),
        "meta": {
            "generated_unix": unix_now(),
            "seconds": cert.history.iter().map(|h| h.seconds).collect::<Vec<_>>(),
        },
    });
    pretty(&v)
}

fn blocks_text(blocks: &[(usize, usize)]) -> String {
    blocks.iter().map(|(c, d)| format!("{c}x{d}")).collect::<Vec<_>>().join(" ")
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

/// Plain-text table with one row per relaxation solve.
pub fn history_table(cert: &Certificate) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>2}  {:>12}  {:>12}  {:>12}  {:>10}  {:<24}  {:>6}  {:>9}",
        "r", "lower", "upper", "cap", "gap", "n_c x m", "n", "t (s)"
    );
    for h in &cert.history {
        let _ = writeln!(
            s,
            "{:>2}  {:>12}  {:>12.3}  {:>12.3}  {:>10}  {:<24}  {:>6}  {:>9}",
            h.order,
            opt(h.lower_bound, 3),
            h.upper_bound,
            h.weight_cap,
            h.relative_gap.map_or_else(|| "-".to_string(), |g| format!("{g:.2e}")),
            blocks_text(&h.blocks),
            h.n_moments,
            opt(h.seconds, 2),
        );
    }
    let _ = writeln!(
        s,
        "verdict: {:?}  lower {:.3}  upper {:.3}  gap {:.2e}",
        cert.verdict,
        cert.lower_bound,
        cert.best_weight,
        cert.relative_gap()
    );
    s
}

pub fn eigen_json(e: &EigenResult) -> String {
    pretty(&json!({
        "eigenvalues": e.eigenvalues,
        "frequencies_hz": e.frequencies_hz(),
        "kernel_dim": e.kernel_dim,
        "eigenvectors": e.eigenvectors,
    }))
}

/// Worst-case report with magnitudes both raw and normalized by the ellipsoid radius.
pub fn worst_case_json(w: &WorstCaseReport, radius: f64, history: Option<&TimeHistory>) -> String {
    let r2 = radius * radius;
    let loads: Vec<Value> = w
        .loads
        .iter()
        .map(|l| {
            json!({
                "node": l.node,
                "force_n": l.force,
                "magnitude_n": l.magnitude,
                "magnitude_normalized": l.magnitude / radius,
                "angle_deg": l.angle_deg,
            })
        })
        .collect();
    let mut v = json!({
        "omega": w.omega,
        "radius_n": radius,
        "lambda_max": w.lambda_max,
        "gram": w.gram,
        "r_q": w.r_q,
        "top_eigenvectors": w.top_eigenvectors,
        "d_r": w.d_r,
        "p_r": w.p_r,
        "d_r_normalized": w.d_r / r2,
        "p_r_normalized": w.p_r / r2,
        "loads": loads,
        "f_r": w.f_r,
        "u_r": w.u_r,
        "v_r": w.v_r,
    });
    if let Some(h) = history {
        v["history"] = json!({
            "d_max": h.d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "p_abs_max": h.p.iter().map(|p| p.abs()).fold(0.0, f64::max),
            "t_peak_d": h.t_peak_d,
            "t_peak_p": h.t_peak_p,
        });
    }
    pretty(&v)
}

pub fn history_csv(h: &TimeHistory) -> String {
    let mut s = String::from("t,d,p\n");
    for k in 0..h.t.len() {
        let _ = writeln!(s, "{:e},{:e},{:e}", h.t[k], h.d[k], h.p[k]);
    }
    s
}
