#![allow(clippy::needless_range_loop)]

mod common;

use approx::assert_relative_eq;
use common::{cantilever, jacobi_eigen, min_eig, Dense, STEEL};
use dynframe_core::analysis::eigenpairs;
use dynframe_core::fem::{assemble_pencil, element_matrices, structural_weight};
use dynframe_core::model::{CrossSectionLaw, PointMass};
use proptest::prelude::*;

/// Textbook local frame element (axial bar plus Euler-Bernoulli beam), rotated to global axes.
fn oracle_element(l: f64, e: f64, rho: f64, a: f64, i: f64, c: f64, s: f64) -> (Dense, Dense) {
    let ea = e * a / l;
    let ei = e * i;
    let kl = [
        [ea, 0.0, 0.0, -ea, 0.0, 0.0],
        [0.0, 12.0 * ei / l.powi(3), 6.0 * ei / l.powi(2), 0.0, -12.0 * ei / l.powi(3), 6.0 * ei / l.powi(2)],
        [0.0, 6.0 * ei / l.powi(2), 4.0 * ei / l, 0.0, -6.0 * ei / l.powi(2), 2.0 * ei / l],
        [-ea, 0.0, 0.0, ea, 0.0, 0.0],
        [0.0, -12.0 * ei / l.powi(3), -6.0 * ei / l.powi(2), 0.0, 12.0 * ei / l.powi(3), -6.0 * ei / l.powi(2)],
        [0.0, 6.0 * ei / l.powi(2), 2.0 * ei / l, 0.0, -6.0 * ei / l.powi(2), 4.0 * ei / l],
    ];
    let m = rho * a * l;
    let ml = [
        [m / 3.0, 0.0, 0.0, m / 6.0, 0.0, 0.0],
        [0.0, 156.0 * m / 420.0, 22.0 * l * m / 420.0, 0.0, 54.0 * m / 420.0, -13.0 * l * m / 420.0],
        [0.0, 22.0 * l * m / 420.0, 4.0 * l * l * m / 420.0, 0.0, 13.0 * l * m / 420.0, -3.0 * l * l * m / 420.0],
        [m / 6.0, 0.0, 0.0, m / 3.0, 0.0, 0.0],
        [0.0, 54.0 * m / 420.0, 13.0 * l * m / 420.0, 0.0, 156.0 * m / 420.0, -22.0 * l * m / 420.0],
        [0.0, -13.0 * l * m / 420.0, -3.0 * l * l * m / 420.0, 0.0, -22.0 * l * m / 420.0, 4.0 * l * l * m / 420.0],
    ];
    let mut t = [[0.0; 6]; 6];
    for k in [0, 3] {
        t[k][k] = c;
        t[k][k + 1] = s;
        t[k + 1][k] = -s;
        t[k + 1][k + 1] = c;
        t[k + 2][k + 2] = 1.0;
    }
    let rot = |loc: &[[f64; 6]; 6]| {
        let mut d = Dense::zeros(6);
        for i in 0..6 {
            for j in 0..6 {
                let mut acc = 0.0;
                for p in 0..6 {
                    for q in 0..6 {
                        acc += t[p][i] * loc[p][q] * t[q][j];
                    }
                }
                d.set(i, j, acc);
            }
        }
        d
    };
    (rot(&kl), rot(&ml))
}

fn combine(axial: &[[f64; 6]; 6], bending: &[[f64; 6]; 6], a: f64, d: u8) -> Dense {
    let mut out = Dense::zeros(6);
    for i in 0..6 {
        for j in 0..6 {
            out.set(i, j, a * axial[i][j] + a.powi(d as i32) * bending[i][j]);
        }
    }
    out
}

#[test]
fn element_matches_textbook_circular() {
    let (l, a) = (1.3, 2.5e-3);
    let ang: f64 = 0.7;
    let (c, s) = (ang.cos(), ang.sin());
    let em = element_matrices(l, STEEL, CrossSectionLaw::Circular, [c, s]).unwrap();
    let i = a * a / (4.0 * std::f64::consts::PI);
    let (ko, mo) = oracle_element(l, STEEL.young_modulus, STEEL.density, a, i, c, s);
    let k = combine(&em.axial, &em.bending, a, em.bending_degree);
    assert_eq!(em.bending_degree, 2);
    for p in 0..36 {
        assert_relative_eq!(k.v[p], ko.v[p], epsilon = 1e-9 * ko.max_abs());
        let mv = a * em.mass[p / 6][p % 6];
        assert_relative_eq!(mv, mo.v[p], epsilon = 1e-12 * mo.max_abs());
    }
}

#[test]
fn element_matches_textbook_rectangular() {
    let (l, a, b) = (0.4, 6e-5, 0.02);
    let em = element_matrices(l, STEEL, CrossSectionLaw::RectangularFixedWidth { width: b }, [0.0, -1.0]).unwrap();
    let h = a / b;
    let i = b * h.powi(3) / 12.0;
    let (ko, _) = oracle_element(l, STEEL.young_modulus, STEEL.density, a, i, 0.0, -1.0);
    let k = combine(&em.axial, &em.bending, a, em.bending_degree);
    assert_eq!(em.bending_degree, 3);
    for p in 0..36 {
        assert_relative_eq!(k.v[p], ko.v[p], epsilon = 1e-9 * ko.max_abs());
    }
}

#[test]
fn rigid_body_modes_are_stress_free_and_mass_is_consistent() {
    let l = 2.0;
    let ang: f64 = -1.1;
    let (c, s) = (ang.cos(), ang.sin());
    let em = element_matrices(l, STEEL, CrossSectionLaw::Circular, [c, s]).unwrap();
    let k = combine(&em.axial, &em.bending, 1e-2, 2);
    let modes = [[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 1.0, -l * s, l * c, 1.0]];
    for u in &modes {
        let r = k.mul_vec(u);
        assert!(r.iter().all(|v| v.abs() < 1e-6 * k.max_abs()), "{r:?}");
    }
    // Translational inertia equals rho * l per unit area in any direction.
    for u in &modes[..2] {
        let mut acc = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                acc += u[i] * em.mass[i][j] * u[j];
            }
        }
        assert_relative_eq!(acc, STEEL.density * l, max_relative = 1e-12);
    }
}

#[test]
fn element_rejects_zero_length() {
    assert!(element_matrices(0.0, STEEL, CrossSectionLaw::Circular, [1.0, 0.0]).is_err());
}

#[test]
fn cantilever_fundamental_frequency_matches_continuum() {
    let len = 2.0;
    let p = cantilever(1, len, 40, CrossSectionLaw::Circular);
    let pencil = assemble_pencil(&p).unwrap();
    assert_eq!(pencil.n_dof(), 3 * 40);
    let a = 1e-3;
    let eig = eigenpairs(&pencil, &[a], 2).unwrap();
    let i = a * a / (4.0 * std::f64::consts::PI);
    let c = (STEEL.young_modulus * i / (STEEL.density * a * len.powi(4))).sqrt();
    let beta = [1.875_104_068_711_961, 4.694_091_132_974_175];
    for k in 0..2 {
        let omega = beta[k] * beta[k] * c;
        assert_relative_eq!(eig.eigenvalues[k].sqrt(), omega, max_relative = 1e-5);
    }
}

#[test]
fn tip_mass_on_nearly_massless_cantilever() {
    let mut p = cantilever(1, 1.5, 4, CrossSectionLaw::Circular);
    p.segments[0].material.density = 1e-6;
    p.masses = vec![PointMass { node: 1, mass: 5.0 }];
    let pencil = assemble_pencil(&p).unwrap();
    let a = 1e-4;
    let eig = eigenpairs(&pencil, &[a], 1).unwrap();
    let i = a * a / (4.0 * std::f64::consts::PI);
    let lam = 3.0 * STEEL.young_modulus * i / (5.0 * 1.5f64.powi(3));
    assert_relative_eq!(eig.eigenvalues[0], lam, max_relative = 1e-6);
}

#[test]
fn eigenpairs_agree_with_dense_oracle() {
    let mut p = cantilever(3, 3.0, 2, CrossSectionLaw::Circular);
    p.masses = vec![PointMass { node: 3, mass: 40.0 }];
    let pencil = assemble_pencil(&p).unwrap();
    let a = [3e-3, 2e-3, 1e-3];
    let k = Dense::from_faer(&pencil.stiffness.evaluate(&a).unwrap());
    let m = Dense::from_faer(&pencil.mass.evaluate(&a).unwrap());
    let (mv, mq) = jacobi_eigen(&m);
    let n = m.n;
    // C = M^{-1/2} K M^{-1/2}
    let mut w = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            w.set(i, j, (0..n).map(|p| mq.at(i, p) * mq.at(j, p) / mv[p].sqrt()).sum());
        }
    }
    let mut c = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    acc += w.at(i, p) * k.at(p, q) * w.at(q, j);
                }
            }
            c.set(i, j, acc);
        }
    }
    let oracle = jacobi_eigen(&c).0;
    let eig = eigenpairs(&pencil, &a, 4).unwrap();
    assert_eq!(eig.kernel_dim, 0);
    for k_ in 0..4 {
        assert_relative_eq!(eig.eigenvalues[k_], oracle[k_], max_relative = 1e-8);
        let x = &eig.eigenvectors[k_];
        let mx = m.mul_vec(x);
        let norm: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        assert_relative_eq!(norm, 1.0, max_relative = 1e-8);
    }
}

#[test]
fn linked_segments_share_a_variable() {
    let mut linked = cantilever(2, 2.0, 2, CrossSectionLaw::Circular);
    linked.segments[1].design_var = 0;
    let free = cantilever(2, 2.0, 2, CrossSectionLaw::Circular);
    let pl = assemble_pencil(&linked).unwrap();
    let pf = assemble_pencil(&free).unwrap();
    assert_eq!(pl.n_vars(), 1);
    assert_relative_eq!(pl.weights[0], STEEL.density * 2.0, max_relative = 1e-14);
    let kl = pl.stiffness.evaluate(&[7e-4]).unwrap();
    let kf = pf.stiffness.evaluate(&[7e-4, 7e-4]).unwrap();
    for i in 0..pl.n_dof() {
        for j in 0..pl.n_dof() {
            assert_relative_eq!(kl[(i, j)], kf[(i, j)], epsilon = 1e-6);
        }
    }
    assert_relative_eq!(structural_weight(&pf, &[1e-3, 2e-3]), STEEL.density * 3e-3, max_relative = 1e-14);
}

#[test]
fn stiffness_degree_follows_section_law() {
    let pc = assemble_pencil(&cantilever(2, 1.0, 1, CrossSectionLaw::Circular)).unwrap();
    let pr = assemble_pencil(&cantilever(2, 1.0, 1, CrossSectionLaw::RectangularFixedWidth { width: 0.01 })).unwrap();
    assert_eq!(pc.stiffness_degree(), 2);
    assert_eq!(pr.stiffness_degree(), 3);
    assert_eq!(pc.mass.degree(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stiffness_is_psd_monotone(
        base in prop::collection::vec(0.0f64..2e-3, 3),
        inc in prop::collection::vec(0.0f64..2e-3, 3),
        rect in any::<bool>(),
    ) {
        let law = if rect { CrossSectionLaw::RectangularFixedWidth { width: 0.05 } } else { CrossSectionLaw::Circular };
        let mut p = cantilever(3, 1.5, 1, law);
        p.nodes[3] = [1.0, 0.8];
        let pencil = assemble_pencil(&p).unwrap();
        let hi: Vec<f64> = base.iter().zip(&inc).map(|(a, d)| a + d).collect();
        let ka = Dense::from_faer(&pencil.stiffness.evaluate(&base).unwrap());
        let kb = Dense::from_faer(&pencil.stiffness.evaluate(&hi).unwrap());
        let diff = kb.add_scaled(&ka, -1.0);
        let scale = kb.max_abs().max(1.0);
        prop_assert!(min_eig(&diff) >= -1e-10 * scale);
        prop_assert!(min_eig(&ka) >= -1e-10 * scale);
        let ma = Dense::from_faer(&pencil.mass.evaluate(&base).unwrap());
        let mb = Dense::from_faer(&pencil.mass.evaluate(&hi).unwrap());
        prop_assert!(min_eig(&mb.add_scaled(&ma, -1.0)) >= -1e-10 * mb.max_abs().max(1e-30));
    }

    #[test]
    fn element_is_rotation_equivariant(ang in -3.1f64..3.1, l in 0.1f64..5.0) {
        let e0 = element_matrices(l, STEEL, CrossSectionLaw::Circular, [1.0, 0.0]).unwrap();
        let e1 = element_matrices(l, STEEL, CrossSectionLaw::Circular, [ang.cos(), ang.sin()]).unwrap();
        // Invariants of a congruence by an orthogonal matrix: trace and Frobenius norm.
        for (x, y) in [(&e0.axial, &e1.axial), (&e0.bending, &e1.bending), (&e0.mass, &e1.mass)] {
            let tr0: f64 = (0..6).map(|i| x[i][i]).sum();
            let tr1: f64 = (0..6).map(|i| y[i][i]).sum();
            let f0: f64 = x.iter().flatten().map(|v| v * v).sum();
            let f1: f64 = y.iter().flatten().map(|v| v * v).sum();
            prop_assert!((tr0 - tr1).abs() <= 1e-9 * tr0.abs().max(1e-300));
            prop_assert!((f0 - f1).abs() <= 1e-9 * f0.max(1e-300));
        }
    }
}
