use num_complex::Complex64;

use specwres::clifford::{CliffordRep, ModuleKind};
use specwres::jets::{
    hodge_laplace_trace_data, perturb_laplace_data, random_geometry_jet, riemann_symmetry_residual, seeded_rng, spin_laplace_jet,
    GeometryJet, LaplaceJet, PerturbationJet, ResolvedScenario, Scenario, TorsionJet,
};
use specwres::linalg::{anticomm, max_abs, max_abs_diff, trace, Mat, I};
use specwres::tensor::Tensor;

fn spin(n: usize) -> CliffordRep {
    CliffordRep::build(ModuleKind::Spin, n).unwrap()
}

fn hodge(n: usize) -> CliffordRep {
    CliffordRep::build(ModuleKind::Hodge, n).unwrap()
}

/// Constant sectional curvature with scalar curvature `r`.
fn scalar_only(n: usize, r: f64) -> GeometryJet {
    let k = r / (n * (n - 1)) as f64;
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    GeometryJet::from_riemann(Tensor::from_real_fn(4, n, |i| k * (d(i[0], i[2]) * d(i[1], i[3]) - d(i[0], i[3]) * d(i[1], i[2])))).unwrap()
}

#[test]
fn random_geometry_is_reproducible_and_algebraic() {
    for n in [2usize, 4, 6] {
        let a = random_geometry_jet(n, 99);
        let b = random_geometry_jet(n, 99);
        assert_eq!(a, b);
        assert!(riemann_symmetry_residual(&a.riemann) < 1e-14);
        let r: f64 = (0..n).map(|x| a.ricci_at(x, x)).sum();
        assert!((r - a.scalar).abs() < 1e-14);
        for x in 0..n {
            for y in 0..n {
                let ric: f64 = (0..n).map(|c| a.riemann_at(c, x, c, y)).sum();
                assert!((ric - a.ricci_at(x, y)).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn zero_seed_gives_flat_jet() {
    let g = GeometryJet::from_seed_tensor(&Tensor::zeros(4, 4));
    assert_eq!(g, GeometryJet::flat(4));
    assert_eq!(g.scalar, 0.0);
}

#[test]
fn curvature_symmetries_are_enforced() {
    let mut t = Tensor::zeros(4, 4);
    t.set(&[0, 1, 2, 3], Complex64::new(1.0, 0.0));
    assert!(GeometryJet::from_riemann(t).is_err());
}

#[test]
fn zero_perturbation_leaves_base() {
    let rep = spin(4);
    let base = spin_laplace_jet(&random_geometry_jet(4, 3), &rep).unwrap();
    let out = perturb_laplace_data(&base, &PerturbationJet::zero(4, 4), &rep).unwrap();
    assert_eq!(out, base);
}

#[test]
fn perturbation_by_gamma_one() {
    let rep = spin(2);
    let mut b = PerturbationJet::zero(2, 2);
    b.b0 = rep.gamma(0).clone();
    let out = perturb_laplace_data(&LaplaceJet::zero(2, 2), &b, &rep).unwrap();
    assert!(max_abs_diff(&out.s[0], &(rep.identity() * Complex64::new(0.0, 2.0))) < 1e-15);
    assert!(max_abs(&out.s[1]) < 1e-15);
}

#[test]
fn perturbation_adds_gamma_b_and_square() {
    let mut rng = seeded_rng(4);
    for rep in [spin(4), hodge(4)] {
        let d = rep.fiber_dim();
        let b = PerturbationJet::random(d, 4, &mut rng);
        let mut base = LaplaceJet::zero(4, d);
        base.q = specwres::jets::random_matrix(d, &mut rng);
        let out = perturb_laplace_data(&base, &b, &rep).unwrap();
        let mut expect = Mat::zeros(d, d);
        for a in 0..4 {
            expect += rep.gamma(a) * &b.ba[a] * I;
        }
        assert!(max_abs_diff(&(&out.q - &base.q - &b.b0 * &b.b0), &expect) < 1e-12);
        for a in 0..4 {
            for c in 0..4 {
                assert!(max_abs_diff(&out.p[a][c], &(anticomm(rep.gamma(a), &b.ba[c]) * I)) < 1e-12);
            }
        }
    }
}

#[test]
fn nonzero_base_s_is_unsupported() {
    let rep = spin(2);
    let mut base = LaplaceJet::zero(2, 2);
    base.s[0] = rep.identity();
    assert!(perturb_laplace_data(&base, &PerturbationJet::zero(2, 2), &rep).is_err());
}

#[test]
fn spin_laplace_flat_is_zero() {
    let lj = spin_laplace_jet(&GeometryJet::flat(4), &spin(4)).unwrap();
    assert_eq!(lj, LaplaceJet::zero(4, 4));
}

#[test]
fn spin_laplace_traces() {
    for n in [2usize, 4, 6] {
        let rep = spin(n);
        let g = random_geometry_jet(n, 17);
        let lj = spin_laplace_jet(&g, &rep).unwrap();
        let dm = rep.fiber_dim() as f64;
        assert!((trace(&lj.q) - Complex64::new(dm * g.scalar / 4.0, 0.0)).norm() < 1e-12);
        assert!((trace(&lj.p_trace_sum()) - Complex64::new(dm * 2.0 / 3.0 * g.scalar, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn hodge_trace_data_examples() {
    let t = hodge_laplace_trace_data(&GeometryJet::flat(4), &hodge(4)).unwrap();
    assert_eq!((t.tr_p_aa, t.tr_q), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    let t = hodge_laplace_trace_data(&scalar_only(4, 3.0), &hodge(4)).unwrap();
    assert!((t.tr_p_aa - Complex64::new(16.0, 0.0)).norm() < 1e-12);
    assert!((t.tr_q - Complex64::new(4.0, 0.0)).norm() < 1e-12);
    let t = hodge_laplace_trace_data(&scalar_only(2, 6.0), &hodge(2)).unwrap();
    assert!((t.tr_p_aa - Complex64::new(8.0, 0.0)).norm() < 1e-12);
    assert!((t.tr_q - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    assert!(hodge_laplace_trace_data(&GeometryJet::flat(4), &spin(4)).is_err());
}

#[test]
fn torsion_jet_shapes() {
    let mut rng = seeded_rng(8);
    let t = TorsionJet::random_antisymmetric(4, &mut rng);
    assert!(t.antisymmetry_residual() < 1e-15);
    let h = TorsionJet::random_torsion(4, &mut rng);
    assert!(h.torsion_shape_residual() < 1e-15);
    assert!(h.antisymmetry_residual() > 1e-3);
    assert!(h.antisymmetric_part().antisymmetry_residual() < 1e-15);
    assert!(TorsionJet::new(Tensor::zeros(3, 4), Tensor::zeros(3, 4)).is_err());
}

#[test]
fn scenario_json_round_trip() {
    let text = r#"{"n": 4, "module": "spin", "seed": 7}"#;
    let sc = Scenario::from_json(text).unwrap();
    let a = sc.resolve().unwrap();
    let b = Scenario::from_json(&serde_json::to_string(&sc).unwrap()).unwrap().resolve().unwrap();
    assert_eq!(a, b);
    assert!(a.torsion.antisymmetry_residual() < 1e-15);
    assert_eq!(a.f, 1.0);
}

#[test]
fn scenario_without_seed_is_flat_and_torsion_free() {
    let sc = Scenario::from_json(r#"{"n": 2, "module": "hodge"}"#).unwrap().resolve().unwrap();
    assert_eq!(sc.geometry, GeometryJet::flat(2));
    assert_eq!(sc.torsion, TorsionJet::zeros(2));
}

#[test]
fn scenario_errors() {
    assert!(Scenario::from_json(r#"{"n": 4, "module": "spin", "bogus": 1}"#).is_err());
    assert!(Scenario::from_json(r#"{"n": 3, "module": "spin"}"#).unwrap().resolve().is_err());
    assert!(Scenario::from_json(r#"{"n": 8, "module": "hodge"}"#).unwrap().resolve().is_err());
    let bad_rank = r#"{"n": 2, "module": "spin", "u": {"value": {"rank": 2, "dim": 2, "entries": [[1,0],[0,0],[0,0],[0,0]]}}}"#;
    assert!(Scenario::from_json(bad_rank).unwrap().resolve().is_err());
}

#[test]
fn complex_entries_are_pairs() {
    let text = r#"{"n": 2, "module": "spin", "u": {"value": {"rank": 1, "dim": 2, "entries": [[1.5, -0.5], [0, 2]]}}}"#;
    let sc = Scenario::from_json(text).unwrap().resolve().unwrap();
    assert_eq!(sc.u.at(0), Complex64::new(1.5, -0.5));
    assert_eq!(sc.u.at(1), Complex64::new(0.0, 2.0));
}

#[test]
fn random_scenarios_match_module() {
    let s = ResolvedScenario::random(6, ModuleKind::Spin, 1).unwrap();
    assert!(s.torsion.antisymmetry_residual() < 1e-15);
    let h = ResolvedScenario::random(6, ModuleKind::Hodge, 1).unwrap();
    assert!(h.torsion.torsion_shape_residual() < 1e-15);
    assert!(ResolvedScenario::random(8, ModuleKind::Hodge, 1).is_err());
}
