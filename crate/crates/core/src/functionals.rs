//! Densities of the spectral functionals (metric, Einstein, torsion, scalar
//! curvature) and their chiral versions, each through a general trace
//! expression in `B` and, where one exists, through a closed form in the
//! torsion tensor.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::{CliffordRep, Grading, GradingKind, ModuleKind};
use crate::error::{Error, Result};
use crate::jets::{
    base_traces, perturb_laplace_data, BaseTraces, GeometryJet, LaplaceJet, OneFormJet, PerturbationJet, ResolvedScenario, TorsionJet,
    SYMMETRY_TOL,
};
use crate::linalg::{anticomm, c, trace_product, Mat, I, ZERO};
use crate::operators::{grading_compatibility, PerturbedDirac};
use crate::tensor::{antisymmetrize_torsion, levi_civita, vector_part, Tensor};
use crate::wres::{ed_kernel, nu, wres_density_ed, wres_density_endo, wres_density_general, OperatorData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Metric,
    Einstein,
    Torsion,
    Scalar,
    Remark,
}

impl std::str::FromStr for FunctionalKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metric" => Ok(FunctionalKind::Metric),
            "einstein" => Ok(FunctionalKind::Einstein),
            "torsion" => Ok(FunctionalKind::Torsion),
            "scalar" => Ok(FunctionalKind::Scalar),
            "remark" => Ok(FunctionalKind::Remark),
            other => Err(Error::Unsupported(format!("functional '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleStatus {
    Matched,
    Mismatch,
    EngineOnly,
}

/// A density with its multilinear coefficients and the outcome of the
/// comparison against an independent evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub functional: FunctionalKind,
    pub n: usize,
    pub kind: ModuleKind,
    pub chiral: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grading: Option<GradingKind>,
    pub value: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff_uw: Option<Tensor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff_u_dw: Option<Tensor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff_uvw: Option<Tensor>,
    pub oracle: OracleStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `|a - b| / max(|a|, |b|, 1)`.
pub fn relative_residual(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn tensor_residual(a: &Option<Tensor>, b: &Option<Tensor>) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) => match x.sub(y) {
            Ok(d) => d.max_norm() / x.max_norm().max(y.max_norm()).max(1.0),
            Err(_) => f64::INFINITY,
        },
        _ => 0.0,
    }
}

impl DensityReport {
    fn new(functional: FunctionalKind, rep_n: usize, kind: ModuleKind, value: Complex64) -> Self {
        DensityReport {
            functional,
            n: rep_n,
            kind,
            chiral: false,
            grading: None,
            value,
            coeff_uw: None,
            coeff_u_dw: None,
            coeff_uvw: None,
            oracle: OracleStatus::EngineOnly,
            reference: None,
            residual: None,
            note: None,
        }
    }

    fn chiral(mut self, g: Option<GradingKind>) -> Self {
        self.chiral = g.is_some();
        self.grading = g;
        self
    }

    fn bilinear(functional: FunctionalKind, kind: ModuleKind, uw: Tensor, udw: Tensor, u: &OneFormJet, w: &OneFormJet) -> Self {
        let n = uw.dim();
        let mut r = DensityReport::new(functional, n, kind, ZERO);
        r.coeff_uw = Some(uw);
        r.coeff_u_dw = Some(udw);
        r.value = r.contract_uw(u, w);
        r
    }

    fn trilinear(functional: FunctionalKind, kind: ModuleKind, uvw: Tensor, u: &[Complex64], v: &[Complex64], w: &[Complex64]) -> Self {
        let n = uvw.dim();
        let mut r = DensityReport::new(functional, n, kind, ZERO);
        r.value = contract3(&uvw, u, v, w);
        r.coeff_uvw = Some(uvw);
        r
    }

    /// `coeff_uw[a][b] u_a w_b + coeff_u_dw[a][b][c] u_a w_bc`.
    pub fn contract_uw(&self, u: &OneFormJet, w: &OneFormJet) -> Complex64 {
        let mut acc = ZERO;
        if let Some(t) = &self.coeff_uw {
            for idx in t.indices() {
                acc += t.get(&idx) * u.at(idx[0]) * w.at(idx[1]);
            }
        }
        if let Some(t) = &self.coeff_u_dw {
            for idx in t.indices() {
                acc += t.get(&idx) * u.at(idx[0]) * w.d(idx[1], idx[2]);
            }
        }
        acc
    }

    /// Compares with an independent evaluation of the same density.
    pub fn against(mut self, other: &DensityReport, tol: f64) -> Self {
        let r = relative_residual(self.value, other.value)
            .max(tensor_residual(&self.coeff_uw, &other.coeff_uw))
            .max(tensor_residual(&self.coeff_u_dw, &other.coeff_u_dw))
            .max(tensor_residual(&self.coeff_uvw, &other.coeff_uvw));
        self.reference = Some(other.value);
        self.residual = Some(r);
        self.oracle = if r <= tol { OracleStatus::Matched } else { OracleStatus::Mismatch };
        self
    }

    pub fn against_value(mut self, reference: Complex64, tol: f64) -> Self {
        let r = relative_residual(self.value, reference);
        self.reference = Some(reference);
        self.residual = Some(r);
        self.oracle = if r <= tol { OracleStatus::Matched } else { OracleStatus::Mismatch };
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn contract3(t: &Tensor, u: &[Complex64], v: &[Complex64], w: &[Complex64]) -> Complex64 {
    t.indices().map(|i| t.get(&i) * u[i[0]] * v[i[1]] * w[i[2]]).sum()
}

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

fn dim_v(rep: &CliffordRep) -> f64 {
    rep.fiber_dim() as f64
}

fn require_chiral_grading(chi: &Grading) -> Result<()> {
    if !chi.anticommutes_with_generators() {
        return Err(Error::Grading(format!("{:?} commutes with the Clifford generators and does not grade D", chi.kind)));
    }
    Ok(())
}

/// Checks that `B` anticommutes with the grading, with a diagnostic naming
/// the vanishing-trace condition for the Hodge grading.
pub fn require_compatible(b: &PerturbationJet, chi: &Grading) -> Result<()> {
    require_chiral_grading(chi)?;
    let (ok, r) = grading_compatibility(b, chi);
    if ok {
        return Ok(());
    }
    let hint =
        if chi.kind == GradingKind::Hodge { "; the Hodge grading needs torsion with vanishing trace T_ijj = 0 for every i" } else { "" };
    Err(Error::Grading(format!("B does not anticommute with {:?} (residual {r:.3e}){hint}", chi.kind)))
}

fn antisymmetric_value(t: &TorsionJet) -> Result<Tensor> {
    antisymmetrize_torsion(&t.value)
}

fn require_antisymmetric(t: &TorsionJet) -> Result<()> {
    let r = t.antisymmetry_residual();
    if r > SYMMETRY_TOL * t.scale_norm() {
        return Err(Error::NotAntisymmetric(r));
    }
    Ok(())
}

// ---------------------------------------------------------------- metric

/// `dim V nu u.w`.
pub fn metric_density(u: &[Complex64], w: &[Complex64], rep: &CliffordRep) -> DensityReport {
    let n = rep.n();
    let k = dim_v(rep) * nu(n);
    let coeff = Tensor::from_fn(2, n, |i| c(k * kd(i[0], i[1])));
    let value = (0..n).map(|a| u[a] * w[a]).sum::<Complex64>() * k;
    let mut r = DensityReport::new(FunctionalKind::Metric, n, rep.kind(), value);
    r.coeff_uw = Some(coeff);
    r
}

/// `Wres((chi) u w D^-n)` through the general second-order formula.
pub fn metric_density_engine(u: &[Complex64], w: &[Complex64], rep: &CliffordRep, chi: Option<&Grading>) -> Result<DensityReport> {
    let n = rep.n();
    let d = rep.fiber_dim();
    let coeff = Tensor::from_fn(2, n, |i| {
        let mut od = OperatorData::zero(n, d);
        od.h = rep.gamma_word(&[i[0], i[1]]).to_dense();
        if let Some(g) = chi {
            od.h = g.mono.mul_dense(&od.h);
        }
        wres_density_general(&od, &LaplaceJet::zero(n, d), &GeometryJet::flat(n)).unwrap_or(ZERO)
    });
    let value = contract2(&coeff, u, w);
    let mut r = DensityReport::new(FunctionalKind::Metric, n, rep.kind(), value).chiral(chi.map(|g| g.kind));
    r.coeff_uw = Some(coeff);
    Ok(r)
}

fn contract2(t: &Tensor, u: &[Complex64], w: &[Complex64]) -> Complex64 {
    t.indices().map(|i| t.get(&i) * u[i[0]] * w[i[1]]).sum()
}

/// Closed-form chiral metric density: nonzero only for `n = 2`, where it is
/// `2 pi i 2^m eps^ab u_a w_b` (spin) or `-8 pi i eps^ab u_a w_b` (Hodge
/// grading), and zero for the Euler grading.
pub fn chiral_metric_density(u: &[Complex64], w: &[Complex64], rep: &CliffordRep, chi: &Grading) -> Result<DensityReport> {
    require_chiral_grading(chi)?;
    let n = rep.n();
    let k = match (rep.kind(), chi.kind, n) {
        (ModuleKind::Spin, GradingKind::SpinGamma, 2) => I * (2.0 * PI * pow2(rep.m() as i32)),
        (ModuleKind::Hodge, GradingKind::Hodge, 2) => I * (-8.0 * PI),
        _ => ZERO,
    };
    let coeff = Tensor::from_fn(2, n, |i| if n == 2 { k * levi_civita(i) as f64 } else { ZERO });
    let value = contract2(&coeff, u, w);
    let mut r = DensityReport::new(FunctionalKind::Metric, n, rep.kind(), value).chiral(Some(chi.kind));
    r.coeff_uw = Some(coeff);
    Ok(r)
}

/// Reference constant for the spin chiral metric at `n = 2`,
/// `4 pi i 2^m`.
pub fn quoted_spin_chiral_metric_constant(m: usize) -> Complex64 {
    I * (4.0 * PI * pow2(m as i32))
}

// --------------------------------------------------------------- Einstein

/// Einstein density minus its value for `B = 0`, from the trace expression
/// in `B`; with a grading, the chiral expression.
pub fn einstein_delta_general(
    u: &OneFormJet,
    w: &OneFormJet,
    b: &PerturbationJet,
    rep: &CliffordRep,
    chi: Option<&Grading>,
) -> Result<DensityReport> {
    b.check_shape(rep)?;
    let n = rep.n();
    let d = rep.fiber_dim();
    let g = rep.gamma_monos();
    let nv = nu(n);
    let b0 = &b.b0;
    let word = |idx: &[usize]| rep.gamma_word(idx);
    // Tr([gamma^a, gamma^b] m)
    let cm = |a: usize, bb: usize, m: &Mat| word(&[a, bb]).trace_with(m) - word(&[bb, a]).trace_with(m);
    let (uw, udw) = match chi {
        None => {
            let acs0: Vec<Mat> = g.iter().map(|ga| ga.mul_dense(b0) + ga.dense_mul(b0)).collect();
            let sum_bc = (0..n).fold(Mat::zeros(d, d), |acc, cc| acc + g[cc].mul_dense(&b.ba[cc]) + g[cc].dense_mul(&b.ba[cc]));
            let k = (0..n).fold(-(b0 * c(2.0)), |acc, cc| acc + g[cc].dense_mul(&acs0[cc]));
            let acs_k: Vec<Mat> = acs0.iter().map(|x| x * &k).collect();
            let tr_b0k = trace_product(b0, &k);
            let udw = Tensor::from_fn(3, n, |i| cm(i[0], i[1], &acs0[i[2]]) * I * (nv / 2.0));
            let uw = Tensor::from_fn(2, n, |i| {
                let (a, bb) = (i[0], i[1]);
                let lin = cm(a, bb, &sum_bc) * (I * 0.5);
                let quad = tr_b0k * kd(a, bb) - g[a].trace_with(&acs_k[bb]);
                (lin + quad) * (nv / 2.0)
            });
            (uw, udw)
        }
        Some(x) => {
            require_chiral_grading(x)?;
            let nf = n as f64;
            let chi_word = |idx: &[usize]| x.mono.mul(&word(idx));
            let gc_bc = (0..n).fold(Mat::zeros(d, d), |acc, cc| acc + g[cc].mul_dense(&b.ba[cc]));
            let k = (0..n).fold(Mat::zeros(d, d), |acc, cc| acc + g[cc].mul_dense(&g[cc].dense_mul(b0)));
            let b0k = b0 * &k;
            // B0 gamma^b K
            let b0gk: Vec<Mat> = g.iter().map(|gb| b0 * gb.mul_dense(&k)).collect();
            let udw = Tensor::from_fn(3, n, |i| {
                let (a, bb, cc) = (i[0], i[1], i[2]);
                let mut t = ZERO;
                if bb == cc {
                    t += chi_word(&[a]).trace_with(b0) * (2.0 * (3.0 - nf));
                }
                if a == bb {
                    t += chi_word(&[cc]).trace_with(b0) * 2.0;
                }
                if a == cc {
                    t -= chi_word(&[bb]).trace_with(b0) * 2.0;
                }
                t -= chi_word(&[a, bb, cc]).trace_with(b0) * (4.0 - nf);
                t * I * nv
            });
            let uw = Tensor::from_fn(2, n, |i| {
                let (a, bb) = (i[0], i[1]);
                let mut lin = chi_word(&[a]).trace_with(&b.ba[bb]) * (3.0 - nf) - chi_word(&[bb]).trace_with(&b.ba[a]);
                if a == bb {
                    lin += x.mono.trace_with(&gc_bc);
                }
                lin -= chi_word(&[a, bb]).trace_with(&gc_bc);
                let quad = (chi_word(&[bb, a]).trace_with(&b0k)
                    - chi_word(&[a, bb]).trace_with(&b0k)
                    - chi_word(&[a]).trace_with(&b0gk[bb]) * 2.0)
                    * 0.25;
                (lin * I + quad) * nv
            });
            (uw, udw)
        }
    };
    Ok(DensityReport::bilinear(FunctionalKind::Einstein, rep.kind(), uw, udw, u, w).chiral(chi.map(|g| g.kind)))
}

/// Closed-form Einstein delta for spin torsion:
/// `3 2^(m-1) nu [-u_a w_bc A_abc + (1/8) u_a w_b (delta |A|^2 - 4 A^c_abc - 6 A_ajk A_bjk)]`.
pub fn einstein_spin_torsion(u: &OneFormJet, w: &OneFormJet, t: &TorsionJet, n: usize) -> Result<DensityReport> {
    require_antisymmetric(t)?;
    let a = &t.value;
    let pref = 3.0 * pow2(n as i32 / 2 - 1) * nu(n);
    let a2: Complex64 = a.entries().iter().map(|x| x * x).sum();
    let udw = Tensor::from_fn(3, n, |i| -a.get(i) * pref);
    let uw = Tensor::from_fn(2, n, |i| {
        let (p, q) = (i[0], i[1]);
        let mut acc = a2 * kd(p, q);
        for cc in 0..n {
            acc -= t.deriv.get(&[cc, p, q, cc]) * 4.0;
        }
        for j in 0..n {
            for k in 0..n {
                acc -= a.get(&[p, j, k]) * a.get(&[q, j, k]) * 6.0;
            }
        }
        acc * (pref / 8.0)
    });
    Ok(DensityReport::bilinear(FunctionalKind::Einstein, ModuleKind::Spin, uw, udw, u, w))
}

/// Closed-form Einstein delta for Hodge torsion:
/// `3 nu 2^(n-3) u_a [-4 w_bc A_abc - 2 w_b A^c_abc - (2/3) w_a V.V
///  + w_b A_cjk A_djk ((1/2) delta_ab delta_cd - 3 delta_ac delta_bd)]`.
pub fn einstein_hodge_torsion(u: &OneFormJet, w: &OneFormJet, t: &TorsionJet, n: usize) -> Result<DensityReport> {
    let anti = t.antisymmetric_part();
    let a = &anti.value;
    let v = vector_part(&t.value);
    let vv: Complex64 = v.iter().map(|x| x * x).sum();
    let a2: Complex64 = a.entries().iter().map(|x| x * x).sum();
    let pref = 3.0 * nu(n) * pow2(n as i32 - 3);
    let udw = Tensor::from_fn(3, n, |i| -a.get(i) * (4.0 * pref));
    let uw = Tensor::from_fn(2, n, |i| {
        let (p, q) = (i[0], i[1]);
        let mut acc = (a2 * 0.5 - vv * (2.0 / 3.0)) * kd(p, q);
        for cc in 0..n {
            acc -= anti.deriv.get(&[cc, p, q, cc]) * 2.0;
        }
        for j in 0..n {
            for k in 0..n {
                acc -= a.get(&[p, j, k]) * a.get(&[q, j, k]) * 3.0;
            }
        }
        acc * pref
    });
    Ok(DensityReport::bilinear(FunctionalKind::Einstein, ModuleKind::Hodge, uw, udw, u, w))
}

/// Closed-form chiral Einstein density for spin torsion; nonzero only for
/// `n = 4` and `n = 6`.
pub fn chiral_einstein_spin_torsion(u: &OneFormJet, w: &OneFormJet, t: &TorsionJet, n: usize) -> Result<DensityReport> {
    require_antisymmetric(t)?;
    let t0 = &t.value;
    let (uw, udw) = match n {
        4 => {
            let k = 2.0 * PI * PI;
            let eps = |i: usize, j: usize, l: usize, m: usize| levi_civita(&[i, j, l, m]) as f64;
            let udw = Tensor::from_fn(3, n, |idx| {
                let (a, b, cc) = (idx[0], idx[1], idx[2]);
                let mut acc = ZERO;
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            let x = t0.get(&[i, j, l]);
                            acc += x * (eps(i, j, l, a) * kd(b, cc) - kd(a, b) * eps(i, j, l, cc) + kd(a, cc) * eps(i, j, l, b));
                        }
                    }
                }
                acc * k
            });
            let uw = Tensor::from_fn(2, n, |idx| {
                let (a, b) = (idx[0], idx[1]);
                let mut acc = ZERO;
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            acc += t.deriv.get(&[b, i, j, l]) * eps(i, j, l, a);
                            for m in 0..n {
                                acc += t0.get(&[i, j, l]) * t0.get(&[a, b, m]) * (0.75 * eps(i, j, l, m));
                            }
                        }
                    }
                }
                acc * k
            });
            (uw, udw)
        }
        6 => {
            let k = I * PI.powi(3);
            let eps6 = |i: usize, j: usize, l: usize, a: usize, b: usize, cc: usize| levi_civita(&[i, j, l, a, b, cc]) as f64;
            let udw = Tensor::from_fn(3, n, |idx| {
                let mut acc = ZERO;
                for i in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            acc += t0.get(&[i, j, l]) * eps6(i, j, l, idx[0], idx[1], idx[2]);
                        }
                    }
                }
                acc * k * 2.0
            });
            let uw = Tensor::from_fn(2, n, |idx| {
                let mut acc = ZERO;
                for cc in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            for l in 0..n {
                                acc += t.deriv.get(&[cc, i, j, l]) * eps6(i, j, l, idx[0], idx[1], cc);
                            }
                        }
                    }
                }
                -acc * k
            });
            (uw, udw)
        }
        _ => (Tensor::zeros(2, n), Tensor::zeros(3, n)),
    };
    Ok(DensityReport::bilinear(FunctionalKind::Einstein, ModuleKind::Spin, uw, udw, u, w).chiral(Some(GradingKind::SpinGamma)))
}

/// Residual of the total-derivative relation satisfied by the
/// non-tensorial part `N(u, w) = -u_a w_bc A_abc - (1/2) u_a w_b A^c_abc` of
/// the spin Einstein delta: `N(u, w) - N(w, u) = -d_c(u_a w_b A_abc)`.
pub fn einstein_total_derivative_residual(u: &OneFormJet, w: &OneFormJet, t: &TorsionJet) -> Result<f64> {
    require_antisymmetric(t)?;
    let n = t.n();
    let a = &t.value;
    let nt = |p: &OneFormJet, q: &OneFormJet| {
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc -= p.at(i) * q.d(j, k) * a.get(&[i, j, k]);
                    acc -= p.at(i) * q.at(j) * t.deriv.get(&[k, i, j, k]) * 0.5;
                }
            }
        }
        acc
    };
    let mut div = ZERO;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                div += u.d(i, k) * w.at(j) * a.get(&[i, j, k])
                    + u.at(i) * w.d(j, k) * a.get(&[i, j, k])
                    + u.at(i) * w.at(j) * t.deriv.get(&[k, i, j, k]);
            }
        }
    }
    let lhs = nt(u, w) - nt(w, u);
    Ok((lhs + div).norm() / lhs.norm().max(div.norm()).max(1.0))
}

// ---------------------------------------------------------------- torsion

/// `(nu/2) u_a v_b w_c Tr[[gamma^b, gamma^a]{gamma^c, B0}]`; with a grading,
/// `(nu/2) Tr[chi u v w (2 B0 - gamma^a {gamma^a, B0})]`.
pub fn torsion_general(
    u: &[Complex64],
    v: &[Complex64],
    w: &[Complex64],
    b0: &Mat,
    rep: &CliffordRep,
    chi: Option<&Grading>,
) -> Result<DensityReport> {
    let n = rep.n();
    let g = rep.gamma_monos();
    let nv = nu(n);
    let coeff = match chi {
        None => {
            let acs: Vec<Mat> = g.iter().map(|gc| gc.mul_dense(b0) + gc.dense_mul(b0)).collect();
            Tensor::from_fn(3, n, |i| {
                let (w1, w2) = (rep.gamma_word(&[i[1], i[0]]), rep.gamma_word(&[i[0], i[1]]));
                (w1.trace_with(&acs[i[2]]) - w2.trace_with(&acs[i[2]])) * (nv / 2.0)
            })
        }
        Some(x) => {
            require_chiral_grading(x)?;
            torsion_ed_coefficients(b0, rep, Some(x))?
        }
    };
    Ok(DensityReport::trilinear(FunctionalKind::Torsion, rep.kind(), coeff, u, v, w).chiral(chi.map(|g| g.kind)))
}

fn torsion_ed_coefficients(b0: &Mat, rep: &CliffordRep, chi: Option<&Grading>) -> Result<Tensor> {
    let k = ed_kernel(b0, rep)? * c(nu(rep.n()) / 2.0);
    Ok(Tensor::from_fn(3, rep.n(), |i| {
        let word = rep.gamma_word(i);
        match chi {
            Some(g) => g.mono.mul(&word).trace_with(&k),
            None => word.trace_with(&k),
        }
    }))
}

/// `Wres((chi) u v w D D^-2m)` as an `E D` residue.
pub fn torsion_via_ed(
    u: &[Complex64],
    v: &[Complex64],
    w: &[Complex64],
    b0: &Mat,
    rep: &CliffordRep,
    chi: Option<&Grading>,
) -> Result<DensityReport> {
    let coeff = torsion_ed_coefficients(b0, rep, chi)?;
    Ok(DensityReport::trilinear(FunctionalKind::Torsion, rep.kind(), coeff, u, v, w).chiral(chi.map(|g| g.kind)))
}

/// Closed-form torsion density: `-(3i/2) nu 2^m uvw.A` (spin) and
/// `-3i nu 2^(n-1) uvw.A` (Hodge), `A` the totally antisymmetric part.
pub fn torsion_closed(u: &[Complex64], v: &[Complex64], w: &[Complex64], t: &TorsionJet, kind: ModuleKind) -> Result<DensityReport> {
    let n = t.n();
    if kind == ModuleKind::Spin {
        require_antisymmetric(t)?;
    }
    let a = antisymmetric_value(t)?;
    let k = match kind {
        ModuleKind::Spin => -I * (1.5 * nu(n) * pow2(n as i32 / 2)),
        ModuleKind::Hodge => -I * (3.0 * nu(n) * pow2(n as i32 - 1)),
    };
    let coeff = a.scale(k);
    Ok(DensityReport::trilinear(FunctionalKind::Torsion, kind, coeff, u, v, w))
}

/// Closed-form chiral torsion density for spin torsion; nonzero only for
/// `n = 4` and `n = 6`.
pub fn chiral_torsion_spin(u: &[Complex64], v: &[Complex64], w: &[Complex64], t: &TorsionJet, n: usize) -> Result<DensityReport> {
    require_antisymmetric(t)?;
    let a = &t.value;
    let pm = pow2(n as i32 / 2);
    let coeff = match n {
        4 => Tensor::from_fn(3, n, |idx| {
            let (p, q, r) = (idx[0], idx[1], idx[2]);
            let mut acc = ZERO;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let e = levi_civita(&[i, j, k, l]) as f64;
                            if e != 0.0 {
                                acc += a.get(&[i, j, k]) * e * (kd(p, q) * kd(r, l) + kd(p, l) * kd(q, r) - kd(p, r) * kd(q, l));
                            }
                        }
                    }
                }
            }
            acc * (-I * (PI * PI / 2.0) * pm)
        }),
        6 => Tensor::from_fn(3, n, |idx| {
            let mut acc = ZERO;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        acc += a.get(&[i, j, k]) * levi_civita(&[idx[0], idx[1], idx[2], i, j, k]) as f64;
                    }
                }
            }
            acc * (PI.powi(3) / 4.0 * pm)
        }),
        _ => Tensor::zeros(3, n),
    };
    Ok(DensityReport::trilinear(FunctionalKind::Torsion, ModuleKind::Spin, coeff, u, v, w).chiral(Some(GradingKind::SpinGamma)))
}

// ----------------------------------------------------------------- scalar

/// `Wres(f D^-n+2)`: the torsionless part from the base traces plus
/// `((n-2) nu/24) f Tr(-12 B0^2 + 6 gamma^a {gamma^a, B0} B0)`.
pub fn scalar_density(f: f64, b0: &Mat, rep: &CliffordRep, traces: &BaseTraces, geom: &GeometryJet) -> Complex64 {
    let n = rep.n();
    let k = (n as f64 - 2.0) * nu(n) / 24.0;
    let base = traces.tr_q * -12.0 + traces.tr_p_aa * 6.0 - c(2.0 * geom.scalar * dim_v(rep));
    let g = rep.gammas();
    let mut m = -(b0 * b0) * c(12.0);
    for ga in g {
        m += ga * anticomm(ga, b0) * b0 * c(6.0);
    }
    (base + m.trace()) * (k * f)
}

/// The same density through the perturbed Laplace data: traces of
/// `Q = Q0 + i gamma^a B_a + B0^2`, `P_aa = P0_aa + i{gamma^a, B_a}` and `S_a`.
pub fn scalar_via_laplace_traces(
    f: f64,
    b: &PerturbationJet,
    rep: &CliffordRep,
    traces: &BaseTraces,
    geom: &GeometryJet,
) -> Result<Complex64> {
    b.check_shape(rep)?;
    let n = rep.n();
    let d = rep.fiber_dim();
    let lj = perturb_laplace_data(&LaplaceJet::zero(n, d), b, rep)?;
    let tr_q = traces.tr_q + lj.q.trace();
    let tr_p = traces.tr_p_aa + lj.p_trace_sum().trace();
    let tr_ss: Complex64 = lj.s.iter().map(|s| (s * s).trace()).sum();
    let k = (n as f64 - 2.0) * nu(n) / 24.0;
    Ok((tr_q * -12.0 + tr_p * 6.0 - c(2.0 * geom.scalar * dim_v(rep)) - tr_ss * 3.0) * (k * f))
}

/// Closed forms: spin `(2^m (n-2) nu/24) f (-R + (9/4)|A|^2)`, Hodge
/// `(2^(n-3)/3) (n-2) nu f (-R - 3 V.V + (9/4)|A|^2)`.
pub fn scalar_closed(f: f64, t: &TorsionJet, geom: &GeometryJet, kind: ModuleKind) -> Result<Complex64> {
    let n = t.n();
    let a = antisymmetric_value(t)?;
    let a2: Complex64 = a.entries().iter().map(|x| x * x).sum();
    let r = c(geom.scalar);
    Ok(match kind {
        ModuleKind::Spin => {
            require_antisymmetric(t)?;
            (-r + a2 * 2.25) * (pow2(n as i32 / 2) * (n as f64 - 2.0) * nu(n) / 24.0 * f)
        }
        ModuleKind::Hodge => {
            let v = vector_part(&t.value);
            let vv: Complex64 = v.iter().map(|x| x * x).sum();
            (-r - vv * 3.0 + a2 * 2.25) * (pow2(n as i32 - 3) / 3.0 * (n as f64 - 2.0) * nu(n) * f)
        }
    })
}

/// `R - (9/4)|A|^2`, plus `3 V.V` for the Hodge module.
pub fn effective_rt(r: f64, t: &Tensor, kind: ModuleKind) -> Result<f64> {
    let a = antisymmetrize_torsion(t)?;
    let a2: f64 = a.entries().iter().map(|x| x.re * x.re).sum();
    let extra = match kind {
        ModuleKind::Spin => 0.0,
        ModuleKind::Hodge => vector_part(t).iter().map(|x| x.re * x.re).sum::<f64>() * 3.0,
    };
    Ok(r - 2.25 * a2 + extra)
}

/// Torsion-dependent part of the chiral scalar density,
/// `-(i/2)(n-2) nu f Tr(chi gamma^a B_a)`.
pub fn chiral_scalar_density(f: f64, b: &PerturbationJet, rep: &CliffordRep, chi: &Grading) -> Result<Complex64> {
    require_compatible(b, chi)?;
    let n = rep.n();
    let tr: Complex64 = (0..n).map(|a| chi.mono.trace_with(&(rep.gamma(a) * &b.ba[a]))).sum();
    Ok(tr * (-I * 0.5 * (n as f64 - 2.0) * nu(n) * f))
}

/// `Wres(chi f L_B^-m+1) - Wres(chi f L_0^-m+1)` from the endomorphism residue.
pub fn chiral_scalar_oracle(
    f: f64,
    b: &PerturbationJet,
    rep: &CliffordRep,
    chi: &Grading,
    base: &LaplaceJet,
    geom: &GeometryJet,
) -> Result<Complex64> {
    let e = &chi.matrix * c(f);
    let perturbed = perturb_laplace_data(base, b, rep)?;
    Ok(wres_density_endo(&e, &perturbed, geom)? - wres_density_endo(&e, base, geom)?)
}

/// Spin closed form `-2^m (nu/8) delta_{n,4} eps^abcd d_a T_bcd f`.
pub fn chiral_scalar_spin_closed(f: f64, t: &TorsionJet, n: usize) -> Result<Complex64> {
    require_antisymmetric(t)?;
    if n != 4 {
        return Ok(ZERO);
    }
    let mut acc = ZERO;
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    acc += t.deriv.get(&[a, b, cc, d]) * levi_civita(&[a, b, cc, d]) as f64;
                }
            }
        }
    }
    Ok(acc * (-pow2(2) * nu(4) / 8.0 * f))
}

// ----------------------------------------------------------------- remark

/// `2^m (i nu/4) delta_{n,4} u_a T_ijk eps_aijk`.
pub fn chiral_remark_density(u: &[Complex64], t: &TorsionJet, n: usize) -> Result<Complex64> {
    require_antisymmetric(t)?;
    if n != 4 {
        return Ok(ZERO);
    }
    let mut acc = ZERO;
    for a in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc += u[a] * t.value.get(&[i, j, k]) * levi_civita(&[a, i, j, k]) as f64;
                }
            }
        }
    }
    Ok(acc * (I * pow2(2) * nu(4) / 4.0))
}

/// `Wres(u_a chi gamma^a D D^-2m)` as an `E D` residue.
pub fn chiral_remark_engine(u: &[Complex64], b0: &Mat, rep: &CliffordRep, chi: &Grading) -> Result<Complex64> {
    let e = chi.mono.mul_dense(&rep.one_form(u));
    wres_density_ed(&e, b0, rep, None)
}

// ------------------------------------------------------------- scenarios

/// Default grading of a module for chiral functionals.
pub fn default_grading(kind: ModuleKind) -> GradingKind {
    match kind {
        ModuleKind::Spin => GradingKind::SpinGamma,
        ModuleKind::Hodge => GradingKind::Euler,
    }
}

/// Evaluates a functional on a scenario through its primary path and, when
/// an independent path exists, compares the two within `tol`.
pub fn evaluate(sc: &ResolvedScenario, functional: FunctionalKind, grading: Option<GradingKind>, tol: f64) -> Result<DensityReport> {
    let rep = CliffordRep::build(sc.module, sc.n)?;
    let n = sc.n;
    let chi = match grading {
        Some(k) => Some(rep.grading(k)?),
        None => None,
    };
    let dirac = PerturbedDirac::torsion(&rep, &sc.torsion)?;
    let b = &dirac.b;
    if let Some(x) = &chi {
        require_compatible(b, x)?;
    }
    let (u, v, w) = (sc.u.values(), sc.v.values(), sc.w.values());
    let spin = sc.module == ModuleKind::Spin;
    let report = match (functional, &chi) {
        (FunctionalKind::Metric, None) => metric_density(&u, &w, &rep).against(&metric_density_engine(&u, &w, &rep, None)?, tol),
        (FunctionalKind::Metric, Some(x)) => {
            let closed = chiral_metric_density(&u, &w, &rep, x)?;
            let mut r = closed.against(&metric_density_engine(&u, &w, &rep, Some(x))?, tol);
            if spin && n == 2 {
                r = r.with_note(format!(
                    "the quoted constant 4 pi i 2^m = {:.6}i exceeds the bound |nu Tr(chi g1 g2)| <= 4 pi",
                    quoted_spin_chiral_metric_constant(rep.m()).im
                ));
            }
            r
        }
        (FunctionalKind::Einstein, None) => {
            let general = einstein_delta_general(&sc.u, &sc.w, b, &rep, None)?;
            let closed = if spin {
                einstein_spin_torsion(&sc.u, &sc.w, &sc.torsion, n)?
            } else {
                einstein_hodge_torsion(&sc.u, &sc.w, &sc.torsion, n)?
            };
            closed.against(&general, tol).with_note("difference from the torsionless value")
        }
        (FunctionalKind::Einstein, Some(x)) => {
            let general = einstein_delta_general(&sc.u, &sc.w, b, &rep, Some(x))?;
            if spin {
                chiral_einstein_spin_torsion(&sc.u, &sc.w, &sc.torsion, n)?
                    .against(&general, tol)
                    .with_note("the torsionless chiral Einstein density vanishes")
            } else {
                general.with_note("difference from the torsionless value; no closed form")
            }
        }
        (FunctionalKind::Torsion, None) => {
            let general = torsion_general(&u, &v, &w, &b.b0, &rep, None)?;
            let ed = torsion_via_ed(&u, &v, &w, &b.b0, &rep, None)?;
            let closed = torsion_closed(&u, &v, &w, &sc.torsion, sc.module)?.against(&general, tol);
            let r2 = relative_residual(general.value, ed.value);
            let mut out = closed;
            if r2 > out.residual.unwrap_or(0.0) {
                out.residual = Some(r2);
                if r2 > tol {
                    out.oracle = OracleStatus::Mismatch;
                }
            }
            out
        }
        (FunctionalKind::Torsion, Some(x)) => {
            let general = torsion_general(&u, &v, &w, &b.b0, &rep, Some(x))?;
            if spin {
                chiral_torsion_spin(&u, &v, &w, &sc.torsion, n)?.against(&general, tol)
            } else {
                general.with_note("no closed form")
            }
        }
        (FunctionalKind::Scalar, None) => {
            let traces = base_traces(&sc.geometry, &rep)?;
            let closed = scalar_closed(sc.f, &sc.torsion, &sc.geometry, sc.module)?;
            let via = scalar_via_laplace_traces(sc.f, b, &rep, &traces, &sc.geometry)?;
            let mut r = DensityReport::new(FunctionalKind::Scalar, n, sc.module, closed).against_value(via, tol);
            let direct = scalar_density(sc.f, &b.b0, &rep, &traces, &sc.geometry);
            let r2 = relative_residual(direct, via);
            if r2 > r.residual.unwrap_or(0.0) {
                r.residual = Some(r2);
                if r2 > tol {
                    r.oracle = OracleStatus::Mismatch;
                }
            }
            r
        }
        (FunctionalKind::Scalar, Some(x)) => {
            let delta = chiral_scalar_density(sc.f, b, &rep, x)?;
            let d = rep.fiber_dim();
            let oracle = chiral_scalar_oracle(sc.f, b, &rep, x, &LaplaceJet::zero(n, d), &GeometryJet::flat(n))?;
            if spin {
                let closed = chiral_scalar_spin_closed(sc.f, &sc.torsion, n)?;
                let mut r = DensityReport::new(FunctionalKind::Scalar, n, sc.module, closed).against_value(delta, tol);
                let r2 = relative_residual(delta, oracle);
                if r2 > r.residual.unwrap_or(0.0) {
                    r.residual = Some(r2);
                    if r2 > tol {
                        r.oracle = OracleStatus::Mismatch;
                    }
                }
                r.with_note("the torsionless chiral scalar density vanishes")
            } else {
                DensityReport::new(FunctionalKind::Scalar, n, sc.module, delta)
                    .against_value(oracle, tol)
                    .with_note("difference from the torsionless value; the torsionless chiral term is not included")
            }
            .chiral(Some(x.kind))
        }
        (FunctionalKind::Remark, _) => {
            if !spin {
                return Err(Error::ModuleKind("this density is defined for the spin module".into()));
            }
            let chi = rep.grading(GradingKind::SpinGamma)?;
            let engine = chiral_remark_engine(&u, &b.b0, &rep, &chi)?;
            let closed = chiral_remark_density(&u, &sc.torsion, n)?;
            DensityReport::new(FunctionalKind::Remark, n, sc.module, closed).against_value(engine, tol).chiral(Some(GradingKind::SpinGamma))
        }
    };
    Ok(report)
}

// ------------------------------------------------------------------ table

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub name: String,
    pub expression: String,
    pub value: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn row(name: &str, expression: &str, value: Complex64) -> TableRow {
    TableRow { name: name.into(), expression: expression.into(), value, note: None }
}

/// Constants of the closed-form densities for one module and dimension.
pub fn coefficient_table(kind: ModuleKind, n: usize) -> Result<Vec<TableRow>> {
    let rep = CliffordRep::build(kind, n)?;
    let nv = nu(n);
    let m = rep.m() as i32;
    let nf = n as f64;
    let mut rows = vec![row("nu", "volume of the unit sphere S^(n-1)", c(nv)), row("metric", "dim V nu  (times u.w)", c(dim_v(&rep) * nv))];
    match kind {
        ModuleKind::Spin => {
            let p = 3.0 * pow2(m - 1) * nv;
            rows.push(row("einstein prefactor", "3 2^(m-1) nu", c(p)));
            rows.push(row("einstein u_a w_bc A_abc", "-3 2^(m-1) nu", c(-p)));
            rows.push(row("einstein u_a w_a |A|^2", "3 2^(m-1) nu / 8", c(p / 8.0)));
            rows.push(row("einstein u_a w_b d_c A_abc", "-3 2^(m-1) nu / 2", c(-p / 2.0)));
            rows.push(row("einstein u_a w_b A_ajk A_bjk", "-9 2^(m-1) nu / 4", c(-p * 6.0 / 8.0)));
            rows.push(row("torsion", "-(3i/2) nu 2^m  (times u_a v_b w_c A_abc)", -I * (1.5 * nv * pow2(m))));
            let s = pow2(m) * (nf - 2.0) * nv / 24.0;
            rows.push(row("scalar prefactor", "2^m (n-2) nu / 24", c(s)));
            rows.push(row("scalar R", "-2^m (n-2) nu / 24", c(-s)));
            rows.push(row("scalar |A|^2", "(9/4) 2^m (n-2) nu / 24", c(2.25 * s)));
            let cm = if n == 2 { I * (2.0 * PI * pow2(m)) } else { ZERO };
            let mut r = row("chiral metric", "2 pi i 2^m delta_{n,2}  (times eps^ab u_a w_b)", cm);
            if n == 2 {
                r.note = Some(format!(
                    "the quoted value 4 pi i 2^m = {:.6}i disagrees with the residue engine",
                    quoted_spin_chiral_metric_constant(rep.m()).im
                ));
            }
            rows.push(r);
            rows.push(row(
                "chiral torsion n=4",
                "-i (pi^2/2) 2^m delta_{n,4}  (times A_ijk eps_ijkl (d_ab d_cl + d_al d_bc - d_ac d_bl))",
                if n == 4 { -I * (PI * PI / 2.0 * pow2(m)) } else { ZERO },
            ));
            rows.push(row(
                "chiral torsion n=6",
                "(pi^3/4) 2^m delta_{n,6}  (times A_ijk eps_abcijk)",
                if n == 6 { c(PI.powi(3) / 4.0 * pow2(m)) } else { ZERO },
            ));
            rows.push(row("chiral einstein n=4", "2 pi^2 delta_{n,4}", if n == 4 { c(2.0 * PI * PI) } else { ZERO }));
            rows.push(row(
                "chiral einstein n=4 quadratic",
                "(3/2) pi^2 delta_{n,4}  (times u_a w_b eps_ijkl T_ijk T_abl)",
                if n == 4 { c(1.5 * PI * PI) } else { ZERO },
            ));
            rows.push(row(
                "chiral einstein n=6 w_bc",
                "2 i pi^3 delta_{n,6}  (times u_a w_bc T_ijk eps_ijkabc)",
                if n == 6 { I * (2.0 * PI.powi(3)) } else { ZERO },
            ));
            rows.push(row(
                "chiral einstein n=6 w_b",
                "-i pi^3 delta_{n,6}  (times u_a w_b d_c T_ijk eps_ijkabc)",
                if n == 6 { -I * PI.powi(3) } else { ZERO },
            ));
            rows.push(row(
                "chiral scalar",
                "-2^m (nu/8) delta_{n,4}  (times f eps_abcd d_a T_bcd)",
                if n == 4 { c(-pow2(m) * nv / 8.0) } else { ZERO },
            ));
            rows.push(row(
                "chiral remark",
                "i 2^m (nu/4) delta_{n,4}  (times u_a T_ijk eps_aijk)",
                if n == 4 { I * (pow2(m) * nv / 4.0) } else { ZERO },
            ));
        }
        ModuleKind::Hodge => {
            let p = 3.0 * nv * pow2(n as i32 - 3);
            rows.push(row("einstein prefactor", "3 nu 2^(n-3)", c(p)));
            rows.push(row("einstein u_a w_bc A_abc", "-12 nu 2^(n-3)", c(-4.0 * p)));
            rows.push(row("einstein u_a w_b d_c A_abc", "-6 nu 2^(n-3)", c(-2.0 * p)));
            rows.push(row("einstein u_a w_a V.V", "-2 nu 2^(n-3)", c(-2.0 / 3.0 * p)));
            rows.push(row("einstein u_a w_a |A|^2", "(3/2) nu 2^(n-3)", c(0.5 * p)));
            rows.push(row("einstein u_a w_b A_ajk A_bjk", "-9 nu 2^(n-3)", c(-3.0 * p)));
            rows.push(row("torsion", "-3i nu 2^(n-1)  (times u_a v_b w_c A_abc)", -I * (3.0 * nv * pow2(n as i32 - 1))));
            let s = pow2(n as i32 - 3) / 3.0 * (nf - 2.0) * nv;
            rows.push(row("scalar prefactor", "(2^(n-3)/3) (n-2) nu", c(s)));
            rows.push(row("scalar R", "-(2^(n-3)/3) (n-2) nu", c(-s)));
            rows.push(row("scalar V.V", "-2^(n-3) (n-2) nu", c(-3.0 * s)));
            rows.push(row("scalar |A|^2", "(3/4) 2^(n-3) (n-2) nu", c(2.25 * s)));
            rows.push(row(
                "chiral metric (Hodge grading)",
                "-8 pi i delta_{n,2}  (times eps^ab u_a w_b)",
                if n == 2 { I * (-8.0 * PI) } else { ZERO },
            ));
            rows.push(row("chiral metric (Euler grading)", "0", ZERO));
        }
    }
    rows.push(row("chiral scalar trace", "-(i/2)(n-2) nu  (times f Tr(chi gamma^a B_a))", -I * (0.5 * (nf - 2.0) * nv)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::seeded_rng;
    use crate::oracle::RawOracle;

    fn rep(kind: ModuleKind, n: usize) -> CliffordRep {
        CliffordRep::build(kind, n).unwrap()
    }

    #[test]
    fn metric_example() {
        let r = rep(ModuleKind::Spin, 4);
        let e1 = [c(1.0), c(0.0), c(0.0), c(0.0)];
        let m = metric_density(&e1, &e1, &r);
        assert!((m.value - c(8.0 * PI * PI)).norm() < 1e-12);
    }

    #[test]
    fn einstein_spin_two_paths() {
        let mut rng = seeded_rng(30);
        for n in [2, 4, 6] {
            let r = rep(ModuleKind::Spin, n);
            let t = TorsionJet::random_antisymmetric(n, &mut rng);
            let u = OneFormJet::random(n, &mut rng);
            let w = OneFormJet::random(n, &mut rng);
            let b = crate::operators::spin_torsion_b(&t, &r).unwrap();
            let general = einstein_delta_general(&u, &w, &b, &r, None).unwrap();
            let closed = einstein_spin_torsion(&u, &w, &t, n).unwrap().against(&general, 1e-9);
            assert_eq!(closed.oracle, OracleStatus::Matched, "n={n} residual {:?}", closed.residual);
        }
    }

    #[test]
    fn einstein_hodge_two_paths() {
        let mut rng = seeded_rng(31);
        for n in [2, 4] {
            let r = rep(ModuleKind::Hodge, n);
            let t = TorsionJet::random_torsion(n, &mut rng);
            let u = OneFormJet::random(n, &mut rng);
            let w = OneFormJet::random(n, &mut rng);
            let b = crate::operators::hodge_torsion_b(&t, &r).unwrap();
            let general = einstein_delta_general(&u, &w, &b, &r, None).unwrap();
            let closed = einstein_hodge_torsion(&u, &w, &t, n).unwrap().against(&general, 1e-9);
            assert_eq!(closed.oracle, OracleStatus::Matched, "n={n} residual {:?}", closed.residual);
        }
    }

    #[test]
    fn einstein_general_matches_raw_symbols() {
        let mut rng = seeded_rng(32);
        for n in [2, 4] {
            let r = rep(ModuleKind::Spin, n);
            let d = r.fiber_dim();
            let b = PerturbationJet::random(d, n, &mut rng);
            let u = OneFormJet::random(n, &mut rng);
            let w = OneFormJet::random(n, &mut rng);
            let oracle = RawOracle::new(&r, None, &b).unwrap();
            let raw = oracle.wres_top(&oracle.einstein_operator(&u, &w, None).unwrap()).unwrap();
            let general = einstein_delta_general(&u, &w, &b, &r, None).unwrap();
            assert!(relative_residual(general.value, raw) < 1e-9, "n={n}: {} vs {raw}", general.value);

            let chi = r.grading(GradingKind::SpinGamma).unwrap();
            let t = TorsionJet::random_antisymmetric(n, &mut rng);
            let bt = crate::operators::spin_torsion_b(&t, &r).unwrap();
            let oracle = RawOracle::new(&r, None, &bt).unwrap();
            let raw = oracle.wres_top(&oracle.einstein_operator(&u, &w, Some(&chi.matrix)).unwrap()).unwrap();
            let general = einstein_delta_general(&u, &w, &bt, &r, Some(&chi)).unwrap();
            assert!(relative_residual(general.value, raw) < 1e-9, "chiral n={n}: {} vs {raw}", general.value);
        }
    }

    #[test]
    fn chiral_spin_closed_forms() {
        let mut rng = seeded_rng(33);
        for n in [2, 4, 6, 8] {
            let r = rep(ModuleKind::Spin, n);
            let chi = r.grading(GradingKind::SpinGamma).unwrap();
            let t = TorsionJet::random_antisymmetric(n, &mut rng);
            let b = crate::operators::spin_torsion_b(&t, &r).unwrap();
            let u = OneFormJet::random(n, &mut rng);
            let v = OneFormJet::random(n, &mut rng);
            let w = OneFormJet::random(n, &mut rng);
            let (uv, vv, wv) = (u.values(), v.values(), w.values());
            let engine = torsion_general(&uv, &vv, &wv, &b.b0, &r, Some(&chi)).unwrap();
            let closed = chiral_torsion_spin(&uv, &vv, &wv, &t, n).unwrap().against(&engine, 1e-9);
            assert_eq!(closed.oracle, OracleStatus::Matched, "torsion n={n} {:?}", closed.residual);
            if n <= 6 {
                let engine = einstein_delta_general(&u, &w, &b, &r, Some(&chi)).unwrap();
                let closed = chiral_einstein_spin_torsion(&u, &w, &t, n).unwrap().against(&engine, 1e-9);
                assert_eq!(closed.oracle, OracleStatus::Matched, "einstein n={n} {:?}", closed.residual);
            }
            let delta = chiral_scalar_density(0.7, &b, &r, &chi).unwrap();
            let closed = chiral_scalar_spin_closed(0.7, &t, n).unwrap();
            assert!(relative_residual(delta, closed) < 1e-9, "scalar n={n}");
            let engine = chiral_remark_engine(&uv, &b.b0, &r, &chi).unwrap();
            let closed = chiral_remark_density(&uv, &t, n).unwrap();
            assert!(relative_residual(engine, closed) < 1e-9, "remark n={n}: {engine} vs {closed}");
        }
    }

    #[test]
    fn scalar_two_paths() {
        let mut rng = seeded_rng(34);
        for kind in [ModuleKind::Spin, ModuleKind::Hodge] {
            for n in [2, 4, 6] {
                let r = rep(kind, n);
                let geom = crate::jets::random_geometry_jet(n, 7);
                let t = match kind {
                    ModuleKind::Spin => TorsionJet::random_antisymmetric(n, &mut rng),
                    ModuleKind::Hodge => TorsionJet::random_torsion(n, &mut rng),
                };
                let b = PerturbedDirac::torsion(&r, &t).unwrap().b;
                let traces = base_traces(&geom, &r).unwrap();
                let via = scalar_via_laplace_traces(0.3, &b, &r, &traces, &geom).unwrap();
                let closed = scalar_closed(0.3, &t, &geom, kind).unwrap();
                assert!(relative_residual(via, closed) < 1e-9, "{kind} n={n}: {via} vs {closed}");
            }
        }
    }

    #[test]
    fn chiral_metric_values() {
        let e1 = [c(1.0), c(0.0)];
        let e2 = [c(0.0), c(1.0)];
        let r = rep(ModuleKind::Spin, 2);
        let chi = r.grading(GradingKind::SpinGamma).unwrap();
        let engine = metric_density_engine(&e1, &e2, &r, Some(&chi)).unwrap();
        assert!((engine.value - I * (4.0 * PI)).norm() < 1e-12);
        let h = rep(ModuleKind::Hodge, 2);
        let chi_h = h.grading(GradingKind::Hodge).unwrap();
        let engine = metric_density_engine(&e1, &e2, &h, Some(&chi_h)).unwrap();
        assert!((engine.value - I * (-8.0 * PI)).norm() < 1e-12);
        let chi_e = h.grading(GradingKind::Euler).unwrap();
        assert!(metric_density_engine(&e1, &e2, &h, Some(&chi_e)).unwrap().value.norm() < 1e-12);
    }

    #[test]
    fn table_values() {
        let t = coefficient_table(ModuleKind::Spin, 4).unwrap();
        let tor = t.iter().find(|r| r.name == "torsion").unwrap();
        assert!((tor.value - (-I * (1.5 * 2.0 * PI * PI * 4.0))).norm() < 1e-12);
        let h = coefficient_table(ModuleKind::Hodge, 4).unwrap();
        let sc = h.iter().find(|r| r.name == "scalar prefactor").unwrap();
        assert!((sc.value - c(2.0 / 3.0 * 2.0 * 2.0 * PI * PI)).norm() < 1e-12);
    }

    #[test]
    fn total_derivative_identity() {
        let mut rng = seeded_rng(35);
        let t = TorsionJet::random_antisymmetric(4, &mut rng);
        let u = OneFormJet::random(4, &mut rng);
        let w = OneFormJet::random(4, &mut rng);
        assert!(einstein_total_derivative_residual(&u, &w, &t).unwrap() < 1e-12);
    }
}
