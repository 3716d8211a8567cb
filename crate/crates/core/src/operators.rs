//! Torsion perturbations `B` of the spin and Hodge Dirac operators, the
//! trace identities they satisfy and grading compatibility checks.

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{CliffordRep, Grading, ModuleKind};
use crate::error::{Error, Result};
use crate::jets::{PerturbationJet, TorsionJet, SYMMETRY_TOL};
use crate::linalg::{c, max_abs, max_abs_diff, Mat, Monomial, I, ZERO};
use crate::parallel::Execution;
use crate::tensor::{antisymmetrize_torsion, vector_part, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiracKind {
    SpinTorsion,
    HodgeTorsion,
    Custom,
}

/// `D = D0 + B` over a Clifford module.
#[derive(Debug, Clone)]
pub struct PerturbedDirac {
    pub rep: CliffordRep,
    pub b: PerturbationJet,
    pub kind: DiracKind,
}

impl PerturbedDirac {
    pub fn spin_torsion(rep: &CliffordRep, t: &TorsionJet) -> Result<Self> {
        Ok(PerturbedDirac { rep: rep.clone(), b: spin_torsion_b(t, rep)?, kind: DiracKind::SpinTorsion })
    }

    pub fn hodge_torsion(rep: &CliffordRep, t: &TorsionJet) -> Result<Self> {
        Ok(PerturbedDirac { rep: rep.clone(), b: hodge_torsion_b(t, rep)?, kind: DiracKind::HodgeTorsion })
    }

    pub fn custom(rep: &CliffordRep, b: PerturbationJet) -> Result<Self> {
        b.check_shape(rep)?;
        Ok(PerturbedDirac { rep: rep.clone(), b, kind: DiracKind::Custom })
    }

    /// Torsion perturbation matching the module kind.
    pub fn torsion(rep: &CliffordRep, t: &TorsionJet) -> Result<Self> {
        match rep.kind() {
            ModuleKind::Spin => Self::spin_torsion(rep, t),
            ModuleKind::Hodge => Self::hodge_torsion(rep, t),
        }
    }
}

fn check_dim(t: &TorsionJet, rep: &CliffordRep) -> Result<()> {
    if t.n() != rep.n() {
        return Err(Error::Shape(format!("torsion over n = {} on a module over n = {}", t.n(), rep.n())));
    }
    Ok(())
}

fn triple_sum(t: &Tensor, d: usize, word: impl Fn(usize, usize, usize) -> Monomial, scale: Complex64) -> Mat {
    let n = t.dim();
    let mut out = Mat::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = t.get(&[i, j, k]);
                if v != Complex64::new(0.0, 0.0) {
                    word(i, j, k).add_scaled_to(&mut out, v * scale);
                }
            }
        }
    }
    out
}

fn per_slice(t: &TorsionJet, build: impl Fn(&Tensor) -> Mat) -> PerturbationJet {
    PerturbationJet { b0: build(&t.value), ba: (0..t.n()).map(|a| build(&t.deriv_slice(a))).collect() }
}

/// `B = -(i/8) T_ijk gamma^i gamma^j gamma^k` for totally antisymmetric `T`.
pub fn spin_torsion_b(t: &TorsionJet, rep: &CliffordRep) -> Result<PerturbationJet> {
    if rep.kind() != ModuleKind::Spin {
        return Err(Error::ModuleKind("spin torsion needs the spin module".into()));
    }
    check_dim(t, rep)?;
    let r = t.antisymmetry_residual();
    if r > SYMMETRY_TOL * t.scale_norm() {
        return Err(Error::NotAntisymmetric(r));
    }
    let d = rep.fiber_dim();
    let build = |x: &Tensor| triple_sum(x, d, |i, j, k| rep.gamma_word(&[i, j, k]), I * (-1.0 / 8.0));
    Ok(per_slice(t, build))
}

fn hodge_dense(x: &Tensor, rep: &CliffordRep, second: bool) -> Mat {
    let ex = rep.hodge_extras().expect("Hodge module");
    let (lp, lm) = (&ex.lambda_plus, &ex.lambda_minus);
    let n = rep.n();
    let d = rep.fiber_dim();
    let mut out = Mat::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = x.get(&[i, j, k]) * 0.5;
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if second {
                    if i == k {
                        lp[j].add_scaled_to(&mut out, v);
                        lm[j].add_scaled_to(&mut out, v);
                    }
                    lp[j].mul(&lm[k]).mul(&lp[i]).add_scaled_to(&mut out, -v);
                    lm[j].mul(&lp[k]).mul(&lm[i]).add_scaled_to(&mut out, v);
                } else {
                    lp[j].mul(&lp[i]).mul(&lm[k]).add_scaled_to(&mut out, v);
                    lp[k].mul(&lm[i]).mul(&lm[j]).add_scaled_to(&mut out, v);
                }
            }
        }
    }
    out
}

/// Torsion perturbation of the Hodge Dirac operator,
/// `B = (1/2) T_ijk (l+^j l+^i l-^k + l+^k l-^i l-^j)`.
///
/// `T` must have the torsion shape `T_ijk = -T_jik`; the normal-ordered
/// second expression is rebuilt and compared on construction.
pub fn hodge_torsion_b(t: &TorsionJet, rep: &CliffordRep) -> Result<PerturbationJet> {
    if rep.kind() != ModuleKind::Hodge {
        return Err(Error::ModuleKind("Hodge torsion needs the Hodge module".into()));
    }
    check_dim(t, rep)?;
    let r = t.torsion_shape_residual();
    if r > SYMMETRY_TOL * t.scale_norm() {
        return Err(Error::NotTorsion(r));
    }
    let b = per_slice(t, |x| hodge_dense(x, rep, false));
    let second = per_slice(t, |x| hodge_dense(x, rep, true));
    let diff = b.ba.iter().zip(&second.ba).map(|(x, y)| max_abs_diff(x, y)).fold(max_abs_diff(&b.b0, &second.b0), f64::max);
    if diff > 1e-12 * t.scale_norm() {
        return Err(Error::NotTorsion(diff));
    }
    Ok(b)
}

/// Both expressions of the Hodge torsion perturbation for a single tensor,
/// without any shape check.
pub fn hodge_torsion_forms(t: &Tensor, rep: &CliffordRep) -> Result<(Mat, Mat)> {
    rep.hodge_extras()?;
    Ok((hodge_dense(t, rep, false), hodge_dense(t, rep, true)))
}

/// Largest entry of `{chi, B0}` and `{chi, B_a}`.
pub fn grading_residual_of(b: &PerturbationJet, chi: &Grading) -> f64 {
    let anti = |m: &Mat| max_abs(&(chi.mono.mul_dense(m) + chi.mono.dense_mul(m)));
    b.ba.iter().map(anti).fold(anti(&b.b0), f64::max)
}

/// Whether `B` anticommutes with the grading, with the residual.
pub fn grading_compatibility(b: &PerturbationJet, chi: &Grading) -> (bool, f64) {
    let r = grading_residual_of(b, chi);
    (r <= 1e-12 * b.max_norm().max(1.0), r)
}

/// Clifford multiplication `u_a gamma^a`.
pub fn clifford_one_form(u: &[Complex64], rep: &CliffordRep) -> Result<Mat> {
    if u.len() != rep.n() {
        return Err(Error::Shape(format!("covector of length {} over n = {}", u.len(), rep.n())));
    }
    Ok(rep.one_form(u))
}

/// Residuals of the spin identities
/// `{g^a,B} = -(3i/4) T_ajk g^j g^k`, `g^a{g^a,B} = {g^a,B}g^a = 6B` and
/// `Tr(g^a g^b {g^c,B}) = -2^m (3i/2) T_cba`.
pub fn verify_spin_trace_identities(t: &Tensor, rep: &CliffordRep) -> Result<[f64; 3]> {
    let jet = TorsionJet::constant(t.clone());
    let b = spin_torsion_b(&jet, rep)?.b0;
    let n = rep.n();
    let d = rep.fiber_dim();
    let g = rep.gamma_monos();
    let mut res = [0.0f64; 3];
    let mut six = Mat::zeros(d, d);
    let mut six_right = Mat::zeros(d, d);
    let acs: Vec<Mat> = (0..n).map(|a| g[a].mul_dense(&b) + g[a].dense_mul(&b)).collect();
    for a in 0..n {
        let mut rhs = Mat::zeros(d, d);
        for j in 0..n {
            for k in 0..n {
                rep.gamma_word(&[j, k]).add_scaled_to(&mut rhs, I * (-0.75) * t.get(&[a, j, k]));
            }
        }
        res[0] = res[0].max(max_abs_diff(&acs[a], &rhs));
        six += g[a].mul_dense(&acs[a]);
        six_right += g[a].dense_mul(&acs[a]);
    }
    let target = &b * c(6.0);
    res[1] = max_abs_diff(&six, &target).max(max_abs_diff(&six_right, &target));
    let pm = 2f64.powi(rep.m() as i32);
    for a in 0..n {
        for bb in 0..n {
            let gg = g[a].mul(&g[bb]);
            for cc in 0..n {
                let lhs = gg.trace_with(&acs[cc]);
                let rhs = -I * (1.5 * pm) * t.get(&[cc, bb, a]);
                res[2] = res[2].max((lhs - rhs).norm());
            }
        }
    }
    Ok(res)
}

/// Residuals of the seven trace identities satisfied by the Hodge torsion
/// perturbation, with `C = 3 (^A T)` and `V_b = T_baa`. Each residual is
/// `|lhs - rhs| / max(|lhs|, |rhs|, 1)`: the traces grow like `2^n`.
#[derive(Debug, Clone, Serialize)]
pub struct TrbReport {
    pub n: usize,
    pub residuals: [f64; 7],
}

impl TrbReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn verify_trb_identities(t: &Tensor, rep: &CliffordRep, exec: Execution) -> Result<TrbReport> {
    let b = hodge_torsion_b(&TorsionJet::constant(t.clone()), rep)?.b0;
    let n = rep.n();
    let g = rep.gamma_monos();
    let p2 = |k: i32| 2f64.powi(n as i32 + k);
    let cyc = antisymmetrize_torsion(t)?.scale(c(3.0));
    let v = vector_part(t);
    let tt = |i: usize, j: usize, k: usize| t.get(&[i, j, k]);
    let acs: Vec<Mat> = (0..n).map(|a| g[a].mul_dense(&b) + g[a].dense_mul(&b)).collect();
    let mut res = [0.0f64; 7];

    for a in 0..n {
        res[0] = res[0].max(rel(g[a].trace_with(&b), ZERO));
    }
    res[1] = exec.max_range(n, |a| {
        let mut r: f64 = 0.0;
        for bb in 0..n {
            for cc in 0..n {
                let lhs = g[a].mul(&g[bb]).mul(&g[cc]).trace_with(&b);
                r = r.max(rel(lhs, I * p2(-2) * cyc.get(&[a, bb, cc])));
            }
        }
        r
    });
    res[2] = exec.max_range(n, |a| {
        let mut r: f64 = 0.0;
        for bb in 0..n {
            let gg = g[a].mul(&g[bb]);
            for cc in 0..n {
                let lhs = gg.trace_with(&acs[cc]);
                r = r.max(rel(lhs, I * p2(-1) * cyc.get(&[a, bb, cc])));
            }
        }
        r
    });
    res[3] = exec.max_range(n, |a| {
        let mut r: f64 = 0.0;
        for bb in 0..n {
            for cc in 0..n {
                let ggg = g[a].mul(&g[bb]).mul(&g[cc]);
                let lhs: Complex64 = (0..n).map(|dd| ggg.mul(&g[dd]).trace_with(&acs[dd])).sum();
                r = r.max(rel(lhs, I * (3.0 * p2(-1)) * cyc.get(&[a, bb, cc])));
            }
        }
        r
    });
    let tr_b2 = (&b * &b).trace();
    let vv: Complex64 = v.iter().map(|x| x * x).sum();
    let t2: Complex64 = t.entries().iter().map(|x| x * x).sum();
    res[4] = rel(tr_b2, vv * p2(-2) + t2 * p2(-3));
    res[5] = exec.max_range(n, |a| {
        let mut r: f64 = 0.0;
        for bb in 0..n {
            let lhs = g[a].trace_with(&(&acs[bb] * &b));
            let mut rhs = Complex64::new(0.0, 0.0);
            for j in 0..n {
                for k in 0..n {
                    rhs += -tt(a, j, k) * tt(bb, k, j) * p2(-2) + tt(a, j, k) * tt(bb, j, k) * p2(-2) + tt(j, k, a) * tt(j, k, bb) * p2(-3);
                }
            }
            r = r.max(rel(lhs, rhs));
        }
        r
    });
    res[6] = exec.max_range(n, |a| {
        let mut r: f64 = 0.0;
        for bb in 0..n {
            let lhs: Complex64 = (0..n).map(|cc| g[cc].mul(&g[a]).trace_with(&(&acs[bb] * &acs[cc]))).sum();
            let mut rhs = Complex64::new(0.0, 0.0);
            for j in 0..n {
                for k in 0..n {
                    rhs +=
                        tt(j, k, bb) * (tt(j, k, a) + tt(a, j, k)) + tt(bb, k, j) * (tt(k, j, a) + 2.0 * tt(a, k, j) - 2.0 * tt(a, j, k));
                }
            }
            r = r.max(rel(lhs, rhs * p2(-1)));
        }
        r
    });
    Ok(TrbReport { n, residuals: res })
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::GradingKind;
    use crate::jets::seeded_rng;
    use crate::linalg::hermiticity_residual;

    #[test]
    fn spin_b_zero_and_identities() {
        let rep = CliffordRep::build(ModuleKind::Spin, 4).unwrap();
        let b = spin_torsion_b(&TorsionJet::zeros(4), &rep).unwrap();
        assert_eq!(max_abs(&b.b0), 0.0);
        let mut rng = seeded_rng(1);
        let t = TorsionJet::random_antisymmetric(4, &mut rng);
        let r = verify_spin_trace_identities(&t.value, &rep).unwrap();
        assert!(r.iter().all(|x| *x < 1e-12), "{r:?}");
        let mut bad = Tensor::zeros(3, 4);
        bad.set(&[0, 1, 2], c(1.0));
        assert!(spin_torsion_b(&TorsionJet::constant(bad), &rep).is_err());
    }

    #[test]
    fn hodge_b_forms_and_hermiticity() {
        let rep = CliffordRep::build(ModuleKind::Hodge, 4).unwrap();
        let mut rng = seeded_rng(2);
        let t = TorsionJet::random_torsion(4, &mut rng);
        let b = hodge_torsion_b(&t, &rep).unwrap();
        assert!(hermiticity_residual(&b.b0) < 1e-13);
        let chi_e = rep.grading(GradingKind::Euler).unwrap();
        assert!(grading_compatibility(&b, &chi_e).0);
        let report = verify_trb_identities(&t.value, &rep, Execution::Sequential).unwrap();
        assert!(report.max_residual() < 1e-12, "{report:?}");
    }

    #[test]
    fn hodge_grading_needs_traceless_torsion() {
        let rep = CliffordRep::build(ModuleKind::Hodge, 4).unwrap();
        let chi_h = rep.grading(GradingKind::Hodge).unwrap();
        let mut t = Tensor::zeros(3, 4);
        t.set(&[0, 1, 1], c(1.0));
        t.set(&[1, 0, 1], c(-1.0));
        let b = hodge_torsion_b(&TorsionJet::constant(t), &rep).unwrap();
        assert!(!grading_compatibility(&b, &chi_h).0);
        let anti = TorsionJet::random_antisymmetric(4, &mut seeded_rng(3));
        let b = hodge_torsion_b(&anti, &rep).unwrap();
        assert!(grading_compatibility(&b, &chi_h).0);
    }

    #[test]
    fn one_form_squares_to_norm() {
        let rep = CliffordRep::build(ModuleKind::Spin, 4).unwrap();
        let u = [c(1.0), c(2.0), c(0.0), c(-1.0)];
        let uh = clifford_one_form(&u, &rep).unwrap();
        assert!(max_abs_diff(&(&uh * &uh), &(rep.identity() * c(6.0))) < 1e-14);
        assert!(clifford_one_form(&u[..3], &rep).is_err());
    }
}
