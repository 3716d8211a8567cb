use num_complex::Complex64;

use specwres::clifford::{
    build_hodge_gradings, build_lambda_ops, build_spin_chirality, build_spin_gammas, grading_residual, verify_trace_lemma_hodge,
    CliffordRep, GradingKind, ModuleKind,
};
use specwres::linalg::{anticomm, hermiticity_residual, max_abs, max_abs_diff, trace, Mat};
use specwres::tensor::levi_civita;

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-12
}

fn prod(ms: &[&Mat]) -> Mat {
    ms.iter().skip(1).fold((*ms[0]).clone(), |acc, m| acc * *m)
}

#[test]
fn spin_generators_anticommute() {
    for n in [2usize, 4, 6, 8] {
        let rep = build_spin_gammas(n).unwrap();
        assert_eq!(rep.fiber_dim(), 1 << (n / 2));
        assert_eq!(rep.clifford_residual(), 0.0);
        let d = rep.fiber_dim() as f64;
        for a in 0..n {
            assert_eq!(hermiticity_residual(rep.gamma(a)), 0.0);
            for b in 0..n {
                let expect = if a == b { d } else { 0.0 };
                assert!(close(trace(&(rep.gamma(a) * rep.gamma(b))), Complex64::new(expect, 0.0)));
            }
        }
    }
}

#[test]
fn spin_four_gamma_trace() {
    let rep = build_spin_gammas(4).unwrap();
    let dm = rep.fiber_dim() as f64;
    let k = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let t = trace(&prod(&[rep.gamma(a), rep.gamma(b), rep.gamma(c), rep.gamma(d)]));
                    let expect = dm * (k(a, b) * k(c, d) - k(a, c) * k(b, d) + k(a, d) * k(b, c));
                    assert!(close(t, Complex64::new(expect, 0.0)));
                    assert!(trace(&prod(&[rep.gamma(a), rep.gamma(b), rep.gamma(c)])).norm() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn spin_chirality_n2() {
    let rep = build_spin_gammas(2).unwrap();
    let chi = build_spin_chirality(&rep).unwrap();
    let t = trace(&prod(&[&chi.matrix, rep.gamma(0), rep.gamma(1)]));
    assert!(close(t, Complex64::new(0.0, 2.0)));
    assert_eq!(grading_residual(&rep, &chi), 0.0);
}

#[test]
fn spin_chirality_anticommutes() {
    for n in [2usize, 4, 6, 8] {
        let rep = build_spin_gammas(n).unwrap();
        let chi = build_spin_chirality(&rep).unwrap();
        for a in 0..n {
            assert_eq!(max_abs(&anticomm(&chi.matrix, rep.gamma(a))), 0.0);
        }
        assert_eq!(hermiticity_residual(&chi.matrix), 0.0);
    }
}

#[test]
fn spin_chirality_n4_is_epsilon() {
    let rep = build_spin_gammas(4).unwrap();
    let chi = build_spin_chirality(&rep).unwrap();
    let kappa = trace(&prod(&[&chi.matrix, rep.gamma(0), rep.gamma(1), rep.gamma(2), rep.gamma(3)]));
    assert!(close(kappa, Complex64::new(4.0, 0.0)));
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let t = trace(&prod(&[&chi.matrix, rep.gamma(a), rep.gamma(b), rep.gamma(c), rep.gamma(d)]));
                    assert!(close(t, kappa * levi_civita(&[a, b, c, d]) as f64));
                }
            }
        }
    }
}

#[test]
fn lambda_on_vacuum_creates_basis_form() {
    let rep = build_lambda_ops(4).unwrap();
    let ex = rep.hodge_extras().unwrap();
    assert!(ex.basis[0].is_empty());
    for p in 0..4 {
        let col = ex.lambda_plus[p].to_dense().column(0).into_owned();
        let target = ex.basis.iter().position(|b| b.0 == vec![p]).unwrap();
        for (r, v) in col.iter().enumerate() {
            let expect = if r == target { 1.0 } else { 0.0 };
            assert!(close(*v, Complex64::new(expect, 0.0)));
        }
    }
}

#[test]
fn canonical_anticommutation() {
    for n in [2usize, 4, 6] {
        let rep = build_lambda_ops(n).unwrap();
        assert_eq!(rep.car_residual().unwrap(), 0.0);
        assert_eq!(rep.clifford_residual(), 0.0);
        let ex = rep.hodge_extras().unwrap();
        let d = rep.fiber_dim();
        for p in 0..n {
            for r in 0..n {
                let ac = anticomm(&ex.lambda_plus[p].to_dense(), &ex.lambda_minus[r].to_dense());
                let expect = if p == r { Mat::identity(d, d) } else { Mat::zeros(d, d) };
                assert_eq!(max_abs_diff(&ac, &expect), 0.0);
                let mixed = anticomm(rep.gamma(p), &ex.gamma_tilde[r].to_dense());
                assert_eq!(max_abs(&mixed), 0.0);
            }
        }
    }
}

#[test]
fn gamma_lambda_trace() {
    for n in [2usize, 4, 6] {
        let rep = build_lambda_ops(n).unwrap();
        let ex = rep.hodge_extras().unwrap();
        let half = 2f64.powi(n as i32 - 1);
        for a in 0..n {
            for i in 0..n {
                let t = trace(&(rep.gamma(a) * ex.lambda_plus[i].to_dense()));
                let expect = if a == i { Complex64::new(0.0, half) } else { Complex64::new(0.0, 0.0) };
                assert!(close(t, expect));
                let t = trace(&(rep.gamma(a) * ex.lambda_minus[i].to_dense()));
                assert!(close(t, -expect));
            }
        }
    }
}

#[test]
fn hodge_gradings() {
    let rep = build_lambda_ops(4).unwrap();
    let ex = rep.hodge_extras().unwrap();
    let (chi_e, chi_h, chi_hat) = build_hodge_gradings(&rep).unwrap();
    let two_form = ex.basis.iter().position(|b| b.0 == vec![0, 2]).unwrap();
    assert!(close(chi_e.matrix[(two_form, two_form)], Complex64::new(1.0, 0.0)));
    let even = ex.basis.iter().filter(|b| b.len() % 2 == 0).count();
    let plus = (0..rep.fiber_dim()).filter(|&k| chi_e.matrix[(k, k)].re > 0.5).count();
    assert_eq!(plus, even);

    let d = rep.fiber_dim();
    assert_eq!(max_abs_diff(&(&chi_h.matrix * &chi_h.matrix), &Mat::identity(d, d)), 0.0);
    assert_eq!(hermiticity_residual(&chi_h.matrix), 0.0);
    let lp = ex.lambda_plus[0].to_dense();
    let lm = ex.lambda_minus[0].to_dense();
    assert_eq!(max_abs_diff(&(&chi_h.matrix * &lp), &(&lm * &chi_h.matrix)), 0.0);

    for g in [&chi_e, &chi_h, &chi_hat] {
        assert_eq!(grading_residual(&rep, g), 0.0);
    }
    assert_eq!(chi_hat.kind, GradingKind::Hat);
    assert!(!chi_hat.anticommutes_with_generators());
}

#[test]
fn trace_lemma_example_n4() {
    let rep = build_lambda_ops(4).unwrap();
    let ex = rep.hodge_extras().unwrap();
    let t = trace(&prod(&[rep.gamma(0), rep.gamma(1), &ex.lambda_minus[1].to_dense(), &ex.lambda_minus[0].to_dense()]));
    assert!(close(t, Complex64::new(-4.0, 0.0)));
}

#[test]
fn trace_lemmas_hold() {
    for n in [2usize, 4, 6] {
        let rep = build_lambda_ops(n).unwrap();
        let report = verify_trace_lemma_hodge(&rep).unwrap();
        assert!(report.max_residual() < 1e-12, "n={n}: {:?}", report.residuals);
    }
}

#[test]
fn rejects_odd_and_large_dimensions() {
    assert!(build_spin_gammas(3).is_err());
    assert!(build_spin_gammas(10).is_err());
    assert!(build_lambda_ops(8).is_err());
    assert!(CliffordRep::build(ModuleKind::Hodge, 0).is_err());
    let rep = build_spin_gammas(2).unwrap();
    assert!(rep.hodge_extras().is_err());
    assert!(build_spin_chirality(&build_lambda_ops(2).unwrap()).is_err());
}

#[test]
fn one_form_squares_to_norm() {
    let rep = build_spin_gammas(4).unwrap();
    let u = [Complex64::new(0.3, 0.0), Complex64::new(-1.2, 0.0), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)];
    let uh = rep.one_form(&u);
    let norm2: f64 = u.iter().map(|x| x.re * x.re).sum();
    let d = rep.fiber_dim();
    assert!(max_abs_diff(&(&uh * &uh), &(Mat::identity(d, d) * Complex64::new(norm2, 0.0))) < 1e-14);
}
