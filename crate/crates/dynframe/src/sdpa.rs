//! SDPA sparse (`.dat-s`) export and import.
//!
//! A problem `min c^T y + offset` s.t. `C_b + sum_k y_k A_{b,k} >= 0` is written
//! as the SDPA primal `min c^T x` s.t. `sum_k F_k x_k - F_0 >= 0` with `F_0 = -C`
//! and `F_k = A_k`. The objective offset is recorded only in a comment line.

use std::fmt::Write as _;

use dynframe_core::sdp::{BlockData, SdpBlock, SdpProblem, SparseBlock, SparseEntry};

use crate::error::{AppError, AppResult};

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_sdpa(problem: &SdpProblem) -> String {
    let mut out = String::new();
    out.push_str("* SDPA sparse: min c^T x s.t. sum_k F_k x_k - F_0 >= 0\n");
    if problem.objective_offset != 0.0 {
        let _ = writeln!(out, "* objective offset {}", num(problem.objective_offset));
    }
    let _ = writeln!(out, "{}", problem.num_vars);
    let _ = writeln!(out, "{}", problem.blocks.len());
    let dims: Vec<String> = problem.block_dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "{}", dims.join(" "));
    let c: Vec<String> = problem.objective.iter().map(|v| num(*v)).collect();
    let _ = writeln!(out, "{}", c.join(" "));
    for (b, block) in problem.blocks.iter().enumerate() {
        let mut entries = block.triplets();
        // F_0 first, then by variable, row, column.
        entries.sort_by(|x, y| {
            let kx = x.0.map_or(0, |k| k + 1);
            let ky = y.0.map_or(0, |k| k + 1);
            (kx, x.1, x.2).cmp(&(ky, y.1, y.2))
        });
        for (var, i, j, v) in entries {
            let (k, v) = match var {
                None => (0, -v),
                Some(k) => (k + 1, v),
            };
            let _ = writeln!(out, "{} {} {} {} {}", k, b + 1, i + 1, j + 1, num(v));
        }
    }
    out
}

fn err(line: usize, message: impl Into<String>) -> AppError {
    AppError::Sdpa { line, message: message.into() }
}

/// Reads an SDPA sparse file into sparse blocks.
pub fn read_sdpa(text: &str) -> AppResult<SdpProblem> {
    let mut offset = 0.0;
    let mut lines = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if let Some(rest) = t.strip_prefix('*').or_else(|| t.strip_prefix('"')) {
            if let Some(v) = rest.trim().strip_prefix("objective offset ") {
                offset = v.trim().parse().map_err(|_| err(n + 1, "bad objective offset"))?;
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let cleaned: String = t.chars().map(|c| if "{}(),".contains(c) { ' ' } else { c }).collect();
        lines.push((n + 1, cleaned));
    }
    let mut it = lines.into_iter();
    let mut header = |what: &str| it.next().ok_or_else(|| err(0, format!("missing {what}")));
    let (ln, m) = header("variable count")?;
    let m: usize = first_token(&m).parse().map_err(|_| err(ln, "bad variable count"))?;
    let (ln, nb) = header("block count")?;
    let nb: usize = first_token(&nb).parse().map_err(|_| err(ln, "bad block count"))?;
    let (ln, dims) = header("block structure")?;
    let dims: Vec<i64> =
        dims.split_whitespace().take(nb).map(|t| t.parse::<i64>()).collect::<Result<_, _>>().map_err(|_| err(ln, "bad block structure"))?;
    if dims.len() != nb {
        return Err(err(ln, "block structure has too few entries"));
    }
    let objective: Vec<f64> = if m == 0 {
        Vec::new()
    } else {
        let (ln, c) = header("objective")?;
        let c: Vec<f64> =
            c.split_whitespace().take(m).map(|t| t.parse()).collect::<Result<_, _>>().map_err(|_| err(ln, "bad objective"))?;
        if c.len() != m {
            return Err(err(ln, "objective has too few entries"));
        }
        c
    };
    let mut blocks: Vec<SparseBlock> = dims.iter().map(|&d| SparseBlock { dim: d.unsigned_abs() as usize, entries: Vec::new() }).collect();
    for (ln, line) in it {
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() < 5 {
            return Err(err(ln, "entry needs five fields"));
        }
        let k: usize = tok[0].parse().map_err(|_| err(ln, "bad matrix index"))?;
        let b: usize = tok[1].parse().map_err(|_| err(ln, "bad block index"))?;
        let i: usize = tok[2].parse().map_err(|_| err(ln, "bad row"))?;
        let j: usize = tok[3].parse().map_err(|_| err(ln, "bad column"))?;
        let v: f64 = tok[4].parse().map_err(|_| err(ln, "bad value"))?;
        if k > m || b == 0 || b > nb {
            return Err(err(ln, "index out of range"));
        }
        let block = &mut blocks[b - 1];
        if i == 0 || j == 0 || i > block.dim || j > block.dim {
            return Err(err(ln, "entry outside its block"));
        }
        let (row, col) = if i <= j { (i - 1, j - 1) } else { (j - 1, i - 1) };
        let (var, value) = if k == 0 { (None, -v) } else { (Some(k - 1), v) };
        block.entries.push(SparseEntry { var, row, col, value });
    }
    Ok(SdpProblem {
        num_vars: m,
        objective,
        objective_offset: offset,
        blocks: blocks
            .into_iter()
            .enumerate()
            .map(|(b, s)| SdpBlock { label: format!("block{}", b + 1), data: BlockData::Sparse(s) })
            .collect(),
    })
}

fn first_token(s: &str) -> &str {
    s.split_whitespace().next().unwrap_or("")
}
