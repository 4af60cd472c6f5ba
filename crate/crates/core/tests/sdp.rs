mod common;

use approx::assert_relative_eq;
use common::{jacobi_eigen, Dense};
use dynframe_core::poly::SymSparse;
use dynframe_core::sdp::{solve, BlockData, IpmOptions, KronBlock, SdpBlock, SdpProblem, SolveStatus, SparseBlock, SparseEntry};
use faer::Mat;
use proptest::prelude::*;

fn entry(var: Option<usize>, row: usize, col: usize, value: f64) -> SparseEntry {
    SparseEntry { var, row, col, value }
}

fn sparse(label: &str, dim: usize, entries: Vec<SparseEntry>) -> SdpBlock {
    SdpBlock { label: label.into(), data: BlockData::Sparse(SparseBlock { dim, entries }) }
}

/// `min t` s.t. `t I - C >= 0`.
fn lambda_max_problem(c: &Dense) -> SdpProblem {
    let n = c.n;
    let mut e = Vec::new();
    for i in 0..n {
        e.push(entry(Some(0), i, i, 1.0));
        for j in i..n {
            if c.at(i, j) != 0.0 {
                e.push(entry(None, i, j, -c.at(i, j)));
            }
        }
    }
    SdpProblem { num_vars: 1, objective: vec![1.0], objective_offset: 0.0, blocks: vec![sparse("lmax", n, e)] }
}

#[test]
fn largest_eigenvalue() {
    let mut c = Dense::zeros(5);
    for i in 0..5 {
        for j in 0..5 {
            c.set(i, j, ((i * 7 + j * 7 + 3 * i * j) % 11) as f64 - 5.0);
        }
    }
    let want = *jacobi_eigen(&c).0.last().unwrap();
    let sol = solve(&lambda_max_problem(&c), &IpmOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_relative_eq!(sol.y[0], want, max_relative = 1e-7);
    assert_relative_eq!(sol.dual_objective, want, max_relative = 1e-7);
}

#[test]
fn two_by_two_with_offset() {
    // min y1 + y2 + 3 s.t. [[y1, 1], [1, y2]] >= 0: optimum y1 = y2 = 1.
    let p = SdpProblem {
        num_vars: 2,
        objective: vec![1.0, 1.0],
        objective_offset: 3.0,
        blocks: vec![sparse("b", 2, vec![entry(Some(0), 0, 0, 1.0), entry(Some(1), 1, 1, 1.0), entry(None, 0, 1, 1.0)])],
    };
    let sol = solve(&p, &IpmOptions::default()).unwrap();
    assert!(sol.is_usable());
    assert_relative_eq!(sol.primal_objective, 5.0, max_relative = 1e-7);
    assert_relative_eq!(sol.dual_objective, 5.0, max_relative = 1e-7);
    assert_relative_eq!(sol.y[0], 1.0, max_relative = 1e-6);
}

#[test]
fn infeasible_problem_is_not_usable() {
    // y >= 1 and -y >= 1.
    let p = SdpProblem {
        num_vars: 1,
        objective: vec![1.0],
        objective_offset: 0.0,
        blocks: vec![
            sparse("lo", 1, vec![entry(Some(0), 0, 0, 1.0), entry(None, 0, 0, -1.0)]),
            sparse("hi", 1, vec![entry(Some(0), 0, 0, -1.0), entry(None, 0, 0, -1.0)]),
        ],
    };
    let sol = solve(&p, &IpmOptions { max_iterations: 60, ..Default::default() }).unwrap();
    assert!(!sol.is_usable(), "{:?}", sol.status);
}

#[test]
fn objective_length_is_checked() {
    let p = SdpProblem { num_vars: 2, objective: vec![1.0], objective_offset: 0.0, blocks: vec![] };
    assert!(solve(&p, &IpmOptions::default()).is_err());
}

fn random_kron(outer: usize, inner: usize, n_vars: usize, seed: &[f64]) -> KronBlock {
    let mut k = 0;
    let mut next = || {
        k += 1;
        seed[k % seed.len()] * (1.0 + (k % 5) as f64)
    };
    let terms: Vec<SymSparse> = (0..2)
        .map(|_| {
            let mut s = SymSparse::new(inner);
            for i in 0..inner {
                for j in i..inner {
                    if (i + j) % 2 == 0 {
                        s.add(i, j, next());
                    }
                }
            }
            s
        })
        .collect();
    let mut vars = vec![None; 2 * outer * outer];
    for t in 0..2 {
        for i in 0..outer {
            for j in i..outer {
                let v = if t == 0 && i == 0 && j == 0 { None } else { Some((t + i + 2 * j) % n_vars) };
                vars[(t * outer + i) * outer + j] = v;
                vars[(t * outer + j) * outer + i] = v;
            }
        }
    }
    KronBlock { outer, inner, terms, vars }
}

fn sym_mat(n: usize, vals: &[f64]) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        vals[(a * n + b) % vals.len()]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Kronecker blocks and their sparse expansion define the same affine map,
    /// and the adjoint satisfies `<A(w), Z> = w^T A^*(Z)`.
    #[test]
    fn kron_expansion_and_adjoint(
        seed in prop::collection::vec(-1.0f64..1.0, 7),
        w in prop::collection::vec(-2.0f64..2.0, 4),
        zv in prop::collection::vec(-1.0f64..1.0, 11),
        outer in 1usize..4,
        inner in 1usize..4,
    ) {
        let kb = random_kron(outer, inner, 4, &seed);
        let kron = SdpBlock { label: "k".into(), data: BlockData::Kron(kb) };
        let sp = SdpBlock { label: "s".into(), data: BlockData::Sparse(kron.to_sparse()) };
        let n = kron.dim();
        for constant in [false, true] {
            let mut a = Mat::zeros(n, n);
            let mut b = Mat::zeros(n, n);
            kron.accumulate(&w, constant, &mut a);
            sp.accumulate(&w, constant, &mut b);
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((a[(i, j)] - b[(i, j)]).abs() <= 1e-12 * (1.0 + a[(i, j)].abs()));
                    prop_assert_eq!(a[(i, j)], a[(j, i)]);
                }
            }
        }
        let z = sym_mat(n, &zv);
        let mut aw = Mat::zeros(n, n);
        kron.accumulate(&w, false, &mut aw);
        let lhs: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| aw[(i, j)] * z[(i, j)]).sum();
        for block in [&kron, &sp] {
            let mut out = vec![0.0; 4];
            let c = block.adjoint(&z, &mut out);
            let rhs: f64 = out.iter().zip(&w).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            let mut c0 = Mat::zeros(n, n);
            block.accumulate(&[0.0; 4], true, &mut c0);
            let cz: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| c0[(i, j)] * z[(i, j)]).sum();
            prop_assert!((c - cz).abs() <= 1e-10 * (1.0 + cz.abs()));
        }
    }

    #[test]
    fn largest_eigenvalue_random(vals in prop::collection::vec(-3.0f64..3.0, 10)) {
        let n = 4;
        let mut c = Dense::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = vals[(i * n + j) % vals.len()];
                c.set(i, j, v);
                c.set(j, i, v);
            }
        }
        let want = *jacobi_eigen(&c).0.last().unwrap();
        let sol = solve(&lambda_max_problem(&c), &IpmOptions::default()).unwrap();
        prop_assert!(sol.is_usable());
        prop_assert!((sol.y[0] - want).abs() <= 1e-6 * (1.0 + want.abs()));
    }
}
