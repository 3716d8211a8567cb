//! Seeded verification sweeps. Every check reports the largest residual it
//! saw against the tolerance it is held to; a sweep passes when every check
//! does.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::clifford::{grading_residual, verify_trace_lemma_hodge_with, CliffordRep, GradingKind, ModuleKind};
use crate::error::{Error, Result};
use crate::functionals::{
    chiral_einstein_spin_torsion, chiral_metric_density, chiral_remark_density, chiral_remark_engine, chiral_scalar_density,
    chiral_scalar_oracle, chiral_scalar_spin_closed, chiral_torsion_spin, einstein_delta_general, einstein_total_derivative_residual,
    evaluate, metric_density_engine, quoted_spin_chiral_metric_constant, relative_residual, torsion_closed, torsion_general, DensityReport,
    FunctionalKind, OracleStatus,
};
use crate::jets::{
    perturb_laplace_data, random_matrix, random_vector, seeded_rng, GeometryJet, LaplaceJet, OneFormJet, PerturbationJet, ResolvedScenario,
    TorsionJet,
};
use crate::linalg::{c, comm, max_abs, Mat, I, ONE, ZERO};
use crate::operators::{grading_compatibility, hodge_torsion_b, spin_torsion_b, verify_spin_trace_identities, verify_trb_identities};
use crate::oracle::RawOracle;
use crate::parallel::Execution;
use crate::symbol::inverse_power_delta_residuals;
use crate::tensor::Tensor;
use crate::wres::{wres_density_ed, wres_density_general, OperatorData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    Clifford,
    TraceLemmas,
    SpinTraces,
    Vanishing,
    TwoPath,
    Fluctuation,
    RawSymbol,
    Parametrix,
    Chiral,
    Grading,
    Antisymmetry,
}

impl Group {
    pub const ALL: [Group; 11] = [
        Group::Clifford,
        Group::TraceLemmas,
        Group::SpinTraces,
        Group::Vanishing,
        Group::TwoPath,
        Group::Fluctuation,
        Group::RawSymbol,
        Group::Parametrix,
        Group::Chiral,
        Group::Grading,
        Group::Antisymmetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Clifford => "clifford",
            Group::TraceLemmas => "trace-lemmas",
            Group::SpinTraces => "spin-traces",
            Group::Vanishing => "vanishing",
            Group::TwoPath => "two-path",
            Group::Fluctuation => "fluctuation",
            Group::RawSymbol => "raw-symbol",
            Group::Parametrix => "parametrix",
            Group::Chiral => "chiral",
            Group::Grading => "grading",
            Group::Antisymmetry => "antisymmetry",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Group::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| Error::Unsupported(format!("unknown group '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub groups: Vec<Group>,
    /// Restricts every sweep to this dimension when set.
    pub n: Option<usize>,
    pub seed: u64,
    /// Random draws per dimension and module.
    pub count: usize,
    /// Relative tolerance of the two-path and chiral comparisons.
    pub tolerance: f64,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { groups: Group::ALL.to_vec(), n: None, seed: 0, count: 50, tolerance: 1e-9, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub group: Group,
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub count: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifySummary {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Sink<'a> {
    group: Group,
    out: &'a mut Vec<Check>,
}

impl Sink<'_> {
    fn push(&mut self, name: impl Into<String>, samples: usize, max_residual: f64, tolerance: f64) -> &mut Check {
        // NaN never passes
        let passed = max_residual <= tolerance;
        self.out.push(Check { group: self.group, name: name.into(), samples, max_residual, tolerance, passed, note: None });
        self.out.last_mut().expect("just pushed")
    }

    /// Records an evaluation error as a failed check.
    fn push_result(&mut self, name: impl Into<String>, samples: usize, r: Result<f64>, tolerance: f64) {
        match r {
            Ok(x) => {
                self.push(name, samples, x, tolerance);
            }
            Err(e) => {
                self.push(name, samples, f64::INFINITY, tolerance).note = Some(e.to_string());
            }
        }
    }
}

fn dims(opts: &VerifyOptions, candidates: &[usize]) -> Vec<usize> {
    candidates.iter().copied().filter(|n| opts.n.is_none_or(|m| m == *n)).collect()
}

fn sub_seed(seed: u64, group: u64, n: usize, k: usize) -> u64 {
    seed.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(group << 48).wrapping_add((n as u64) << 32).wrapping_add(k as u64)
}

fn max_all(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m: f64 = 0.0;
    for r in it {
        let x = r?;
        if x.is_nan() {
            return Ok(f64::NAN);
        }
        m = m.max(x);
    }
    Ok(m)
}

pub fn run(opts: &VerifyOptions) -> Result<VerifySummary> {
    let mut groups = opts.groups.clone();
    groups.sort();
    groups.dedup();
    let mut checks = Vec::new();
    for g in groups {
        let mut sink = Sink { group: g, out: &mut checks };
        match g {
            Group::Clifford => clifford(opts, &mut sink)?,
            Group::TraceLemmas => trace_lemmas(opts, &mut sink)?,
            Group::SpinTraces => spin_traces(opts, &mut sink),
            Group::Vanishing => vanishing(opts, &mut sink)?,
            Group::TwoPath => two_path(opts, &mut sink),
            Group::Fluctuation => fluctuation(opts, &mut sink),
            Group::RawSymbol => raw_symbol(opts, &mut sink),
            Group::Parametrix => parametrix(opts, &mut sink),
            Group::Chiral => chiral(opts, &mut sink)?,
            Group::Grading => grading(opts, &mut sink)?,
            Group::Antisymmetry => antisymmetry(opts, &mut sink),
        }
    }
    Ok(VerifySummary { seed: opts.seed, count: opts.count, passed: checks.iter().all(|c| c.passed), checks })
}

fn clifford(opts: &VerifyOptions, sink: &mut Sink) -> Result<()> {
    for n in dims(opts, &[2, 4, 6, 8]) {
        let rep = CliffordRep::build(ModuleKind::Spin, n)?;
        sink.push(format!("spin n={n} anticommutators"), 1, rep.clifford_residual(), 0.0);
        let chi = rep.grading(GradingKind::SpinGamma)?;
        sink.push(format!("spin n={n} chirality"), 1, grading_residual(&rep, &chi), 0.0);
    }
    for n in dims(opts, &[2, 4, 6]) {
        let rep = CliffordRep::build(ModuleKind::Hodge, n)?;
        sink.push(format!("hodge n={n} anticommutators"), 1, rep.clifford_residual(), 0.0);
        sink.push(format!("hodge n={n} canonical anticommutation"), 1, rep.car_residual()?, 0.0);
        for g in rep.gradings()? {
            sink.push(format!("hodge n={n} grading {:?}", g.kind), 1, grading_residual(&rep, &g), 0.0);
        }
    }
    Ok(())
}

fn trace_lemmas(opts: &VerifyOptions, sink: &mut Sink) -> Result<()> {
    for n in dims(opts, &[2, 4, 6]) {
        let rep = CliffordRep::build(ModuleKind::Hodge, n)?;
        let lemma = verify_trace_lemma_hodge_with(&rep, opts.exec)?;
        sink.push(format!("hodge n={n} exterior trace identities"), 1, lemma.max_residual(), 1e-12);
        let draws = opts.count.clamp(1, 10);
        let r = max_all(opts.exec.map_range(draws, |k| {
            let mut rng = seeded_rng(sub_seed(opts.seed, 2, n, k));
            let t = TorsionJet::random_torsion(n, &mut rng).value;
            verify_trb_identities(&t, &rep, Execution::Sequential).map(|r| r.max_residual())
        }));
        sink.push_result(format!("hodge n={n} torsion perturbation trace identities"), draws, r, 1e-12);
    }
    Ok(())
}

fn spin_traces(opts: &VerifyOptions, sink: &mut Sink) {
    let draws = opts.count.max(100);
    for n in dims(opts, &[2, 4, 6]) {
        let Ok(rep) = CliffordRep::build(ModuleKind::Spin, n) else { continue };
        let rs = opts.exec.map_range(draws, |k| {
            let mut rng = seeded_rng(sub_seed(opts.seed, 3, n, k));
            verify_spin_trace_identities(&TorsionJet::random_antisymmetric(n, &mut rng).value, &rep)
        });
        for (i, label) in ["anticommutator expansion", "contracted anticommutator", "triple trace"].iter().enumerate() {
            let r = max_all(rs.iter().map(|x| x.as_ref().map(|a| a[i]).map_err(Clone::clone)));
            sink.push_result(format!("spin n={n} {label}"), draws, r, 1e-12);
        }
    }
}

/// Elements commuting with every generator: scalars for the spin module;
/// scalars, products of two `gamma~` and grading times `gamma~` for the
/// Hodge module.
fn commutant(rep: &CliffordRep) -> Result<(Vec<Mat>, Vec<Mat>)> {
    let id = rep.identity();
    let scalars = vec![id.clone(), &id * Complex64::new(0.3, -1.2)];
    if rep.kind() == ModuleKind::Spin {
        return Ok((scalars, Vec::new()));
    }
    let ex = rep.hodge_extras()?;
    let n = rep.n();
    let eul = rep.grading(GradingKind::Euler)?.matrix;
    let mut others = Vec::new();
    for a in 0..n {
        others.push(&eul * ex.gamma_tilde[a].to_dense());
        for b in (a + 1)..n {
            others.push(ex.gamma_tilde[a].mul(&ex.gamma_tilde[b]).to_dense());
        }
    }
    Ok((scalars, others))
}

fn vanishing(opts: &VerifyOptions, sink: &mut Sink) -> Result<()> {
    let draws = opts.count.max(200);
    let cases: Vec<(ModuleKind, usize)> = dims(opts, &[2, 4, 6, 8])
        .into_iter()
        .map(|n| (ModuleKind::Spin, n))
        .chain(dims(opts, &[2, 4, 6]).into_iter().map(|n| (ModuleKind::Hodge, n)))
        .collect();
    for (kind, n) in cases {
        let rep = CliffordRep::build(kind, n)?;
        let d = rep.fiber_dim();
        let (scalars, others) = commutant(&rep)?;
        let comm_res =
            others.iter().chain(&scalars).flat_map(|k| rep.gammas().iter().map(move |g| max_abs(&comm(g, k)))).fold(0.0, f64::max);
        sink.push(format!("{kind} n={n} commutant elements commute with generators"), 1, comm_res, 1e-12);
        let families: Vec<(&str, &Vec<Mat>)> =
            if others.is_empty() { vec![("scalar", &scalars)] } else { vec![("scalar", &scalars), ("gamma~ commutant", &others)] };
        for (label, ks) in families {
            let one_form_b = opts.exec.max_range(draws, |k| {
                let mut rng = seeded_rng(sub_seed(opts.seed, 4, n, k));
                let kmat = &ks[k % ks.len()];
                let bvec = random_vector(n, &mut rng);
                let b0 = rep.one_form(&bvec) * kmat;
                let e = random_matrix(d, &mut rng);
                wres_density_ed(&e, &b0, &rep, None).map(|z| z.norm()).unwrap_or(f64::INFINITY)
            });
            sink.push(format!("{kind} n={n} one-form B, {label} factor"), draws, one_form_b, 1e-12);
            let one_form_e = opts.exec.max_range(draws, |k| {
                let mut rng = seeded_rng(sub_seed(opts.seed, 5, n, k));
                let kmat = &ks[k % ks.len()];
                let evec = random_vector(n, &mut rng);
                let e = rep.one_form(&evec) * kmat;
                let b0 = random_matrix(d, &mut rng);
                wres_density_ed(&e, &b0, &rep, None).map(|z| z.norm()).unwrap_or(f64::INFINITY)
            });
            sink.push(format!("{kind} n={n} one-form E, {label} factor"), draws, one_form_e, 1e-12);
        }
    }
    Ok(())
}

fn report_residual(r: Result<DensityReport>) -> Result<f64> {
    let r = r?;
    match r.oracle {
        OracleStatus::EngineOnly => Err(Error::Unsupported("no independent evaluation".into())),
        _ => Ok(r.residual.unwrap_or(f64::INFINITY)),
    }
}

fn two_path(opts: &VerifyOptions, sink: &mut Sink) {
    for kind in [ModuleKind::Spin, ModuleKind::Hodge] {
        for n in dims(opts, &[2, 4, 6]) {
            for (fi, functional) in
                [FunctionalKind::Metric, FunctionalKind::Einstein, FunctionalKind::Torsion, FunctionalKind::Scalar].into_iter().enumerate()
            {
                let r = max_all(opts.exec.map_range(opts.count, |k| {
                    let sc = ResolvedScenario::random(n, kind, sub_seed(opts.seed, 10 + fi as u64, n, k))?;
                    report_residual(evaluate(&sc, functional, None, opts.tolerance))
                }));
                sink.push_result(
                    format!("{kind} n={n} {functional:?} closed form vs trace formula").to_lowercase(),
                    opts.count,
                    r,
                    opts.tolerance,
                );
            }
        }
    }
}

fn random_fluctuation(n: usize, rng: &mut impl Rng) -> (Vec<Complex64>, Tensor) {
    let a0: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0))).collect();
    let ad = Tensor::from_real_fn(2, n, |_| rng.random_range(-1.0..1.0));
    (a0, ad)
}

fn report_gap(a: &DensityReport, b: &DensityReport) -> f64 {
    let t = |x: &Option<Tensor>, y: &Option<Tensor>| match (x, y) {
        (Some(p), Some(q)) => p.sub(q).map(|d| d.max_norm() / p.max_norm().max(1.0)).unwrap_or(f64::INFINITY),
        _ => 0.0,
    };
    relative_residual(a.value, b.value)
        .max(t(&a.coeff_uw, &b.coeff_uw))
        .max(t(&a.coeff_u_dw, &b.coeff_u_dw))
        .max(t(&a.coeff_uvw, &b.coeff_uvw))
}

fn fluctuation(opts: &VerifyOptions, sink: &mut Sink) {
    for kind in [ModuleKind::Spin, ModuleKind::Hodge] {
        for n in dims(opts, &[2, 4, 6]) {
            let Ok(rep) = CliffordRep::build(kind, n) else { continue };
            let d = rep.fiber_dim();
            let one = |k: usize, torsion: bool| -> Result<f64> {
                let mut rng = seeded_rng(sub_seed(opts.seed, 20 + torsion as u64, n, k));
                let b = if torsion {
                    let t = match kind {
                        ModuleKind::Spin => TorsionJet::random_antisymmetric(n, &mut rng),
                        ModuleKind::Hodge => TorsionJet::random_torsion(n, &mut rng),
                    };
                    crate::operators::PerturbedDirac::torsion(&rep, &t)?.b
                } else {
                    PerturbationJet::random(d, n, &mut rng)
                };
                let (a0, ad) = random_fluctuation(n, &mut rng);
                let bf = b.with_fluctuation(&a0, &ad, &rep);
                let u = OneFormJet::random(n, &mut rng);
                let v = OneFormJet::random(n, &mut rng);
                let w = OneFormJet::random(n, &mut rng);
                let e1 = einstein_delta_general(&u, &w, &b, &rep, None)?;
                let e2 = einstein_delta_general(&u, &w, &bf, &rep, None)?;
                let (uv, vv, wv) = (u.values(), v.values(), w.values());
                let t1 = torsion_general(&uv, &vv, &wv, &b.b0, &rep, None)?;
                let t2 = torsion_general(&uv, &vv, &wv, &bf.b0, &rep, None)?;
                Ok(report_gap(&e1, &e2).max(report_gap(&t1, &t2)))
            };
            for (torsion, label) in [(false, "arbitrary B"), (true, "torsion B")] {
                let r = max_all(opts.exec.map_range(opts.count, |k| one(k, torsion)));
                sink.push_result(format!("{kind} n={n} Einstein and torsion under B + A_a gamma^a, {label}"), opts.count, r, 1e-12);
            }
        }
    }
}

fn raw_symbol(opts: &VerifyOptions, sink: &mut Sink) {
    let draws = opts.count.clamp(1, 20);
    for kind in [ModuleKind::Spin, ModuleKind::Hodge] {
        for n in dims(opts, &[2, 4]) {
            let Ok(rep) = CliffordRep::build(kind, n) else { continue };
            let d = rep.fiber_dim();
            let rs = opts.exec.map_range(draws, |k| -> Result<(f64, f64)> {
                let mut rng = seeded_rng(sub_seed(opts.seed, 30, n, k));
                let b = PerturbationJet::random(d, n, &mut rng);
                let oracle = RawOracle::new(&rep, None, &b)?;
                let e = random_matrix(d, &mut rng);
                let raw = oracle.wres_top(&oracle.ed_operator(&e)?)?;
                let ed = relative_residual(wres_density_ed(&e, &b.b0, &rep, None)?, raw);
                let od = OperatorData::random(n, d, &mut rng);
                let raw = oracle.wres_top(&od.to_symbol()?)?;
                let lj = perturb_laplace_data(&LaplaceJet::zero(n, d), &b, &rep)?;
                let general = relative_residual(wres_density_general(&od, &lj, &GeometryJet::flat(n))?, raw);
                Ok((ed, general))
            });
            let ed = max_all(rs.iter().map(|r| r.as_ref().map(|x| x.0).map_err(Clone::clone)));
            let gen = max_all(rs.iter().map(|r| r.as_ref().map(|x| x.1).map_err(Clone::clone)));
            sink.push_result(format!("{kind} n={n} E D residue vs raw symbols"), draws, ed, 1e-9);
            sink.push_result(format!("{kind} n={n} second-order residue vs raw symbols"), draws, gen, 1e-9);
        }
    }
}

fn parametrix(opts: &VerifyOptions, sink: &mut Sink) {
    let draws = opts.count.clamp(1, 20);
    for kind in [ModuleKind::Spin, ModuleKind::Hodge] {
        for n in dims(opts, &[2, 4]) {
            let Ok(rep) = CliffordRep::build(kind, n) else { continue };
            let d = rep.fiber_dim();
            for k in [1usize, 2] {
                let rs = opts.exec.map_range(draws, |j| {
                    let mut rng = seeded_rng(sub_seed(opts.seed, 40 + k as u64, n, j));
                    let b = PerturbationJet::random(d, n, &mut rng);
                    // homogeneous pieces: sample the unit cosphere
                    let samples: Vec<Vec<f64>> = (0..3)
                        .map(|_| {
                            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
                            v.into_iter().map(|x| x / r).collect()
                        })
                        .collect();
                    inverse_power_delta_residuals(&rep, &b, k, &samples)
                });
                for (i, label) in ["first subleading", "second subleading"].iter().enumerate() {
                    let r = max_all(rs.iter().map(|x| x.as_ref().map(|a| a[i]).map_err(Clone::clone)));
                    sink.push_result(format!("{kind} n={n} D^-{} {label} B-dependence", 2 * k), draws, r, 1e-10);
                }
            }
        }
    }
}

fn chiral(opts: &VerifyOptions, sink: &mut Sink) -> Result<()> {
    let tol = opts.tolerance;
    let e = |n: usize, a: usize| -> Vec<Complex64> { (0..n).map(|b| if a == b { ONE } else { ZERO }).collect() };

    if opts.n.is_none_or(|m| m == 2) {
        let rep = CliffordRep::build(ModuleKind::Spin, 2)?;
        let chi = rep.grading(GradingKind::SpinGamma)?;
        let engine = metric_density_engine(&e(2, 0), &e(2, 1), &rep, Some(&chi))?.value;
        let closed = chiral_metric_density(&e(2, 0), &e(2, 1), &rep, &chi)?.value;
        sink.push("spin n=2 chiral metric closed form vs engine", 1, relative_residual(closed, engine), tol);
        let quoted = quoted_spin_chiral_metric_constant(rep.m());
        sink.push("spin n=2 chiral metric equals 8 pi i", 1, relative_residual(engine, quoted), tol).note =
            Some(format!("engine value {:.12}i; |nu Tr(chi g1 g2)| cannot exceed 4 pi", engine.im));
        let hodge = CliffordRep::build(ModuleKind::Hodge, 2)?;
        let chi_h = hodge.grading(GradingKind::Hodge)?;
        let v = metric_density_engine(&e(2, 0), &e(2, 1), &hodge, Some(&chi_h))?.value;
        sink.push("hodge n=2 chiral metric (Hodge grading) equals -8 pi i", 1, relative_residual(v, I * (-8.0 * PI)), tol);
        let chi_e = hodge.grading(GradingKind::Euler)?;
        let v = metric_density_engine(&e(2, 0), &e(2, 1), &hodge, Some(&chi_e))?.value;
        sink.push("hodge n=2 chiral metric (Euler grading) vanishes", 1, v.norm(), 1e-12);
    }

    let draws = opts.count.max(1);
    for n in dims(opts, &[2, 4, 6, 8]) {
        let rep = CliffordRep::build(ModuleKind::Spin, n)?;
        let chi = rep.grading(GradingKind::SpinGamma)?;
        let rs = opts.exec.map_range(draws, |k| -> Result<[f64; 6]> {
            let mut rng = seeded_rng(sub_seed(opts.seed, 50, n, k));
            let t = TorsionJet::random_antisymmetric(n, &mut rng);
            let b = spin_torsion_b(&t, &rep)?;
            let (u, v, w) = (OneFormJet::random(n, &mut rng), OneFormJet::random(n, &mut rng), OneFormJet::random(n, &mut rng));
            let (uv, vv, wv) = (u.values(), v.values(), w.values());
            let mut out = [0.0; 6];
            let engine = torsion_general(&uv, &vv, &wv, &b.b0, &rep, Some(&chi))?;
            out[0] = report_gap(&chiral_torsion_spin(&uv, &vv, &wv, &t, n)?, &engine);
            let zero_b = PerturbationJet::zero(rep.fiber_dim(), n);
            out[1] = einstein_delta_general(&u, &w, &zero_b, &rep, Some(&chi))?.value.norm();
            if n <= 6 {
                let engine = einstein_delta_general(&u, &w, &b, &rep, Some(&chi))?;
                out[2] = report_gap(&chiral_einstein_spin_torsion(&u, &w, &t, n)?, &engine);
            }
            let f = rng.random_range(-1.0..1.0);
            let density = chiral_scalar_density(f, &b, &rep, &chi)?;
            let oracle = chiral_scalar_oracle(f, &b, &rep, &chi, &LaplaceJet::zero(n, rep.fiber_dim()), &GeometryJet::flat(n))?;
            out[3] = relative_residual(density, oracle).max(relative_residual(density, chiral_scalar_spin_closed(f, &t, n)?));
            let still = TorsionJet::constant(t.value.clone());
            out[4] = chiral_scalar_density(f, &spin_torsion_b(&still, &rep)?, &rep, &chi)?.norm();
            out[5] = relative_residual(chiral_remark_engine(&uv, &b.b0, &rep, &chi)?, chiral_remark_density(&uv, &t, n)?);
            Ok(out)
        });
        let col = |i: usize| max_all(rs.iter().map(|r| r.as_ref().map(|x| x[i]).map_err(Clone::clone)));
        sink.push_result(format!("spin n={n} chiral torsion closed form vs engine"), draws, col(0), tol);
        sink.push_result(format!("spin n={n} torsionless chiral Einstein vanishes"), draws, col(1), 1e-12);
        if n <= 6 {
            sink.push_result(format!("spin n={n} chiral Einstein closed form vs engine"), draws, col(2), tol);
        }
        sink.push_result(format!("spin n={n} chiral scalar trace formula vs residue and closed form"), draws, col(3), tol);
        sink.push_result(format!("spin n={n} chiral scalar vanishes for constant torsion"), draws, col(4), 0.0);
        sink.push_result(format!("spin n={n} chiral one-form remark closed form vs engine"), draws, col(5), tol);
    }

    for n in dims(opts, &[2, 4, 6]) {
        let rep = CliffordRep::build(ModuleKind::Hodge, n)?;
        for gk in [GradingKind::Euler, GradingKind::Hodge] {
            let chi = rep.grading(gk)?;
            let r = max_all(opts.exec.map_range(draws.min(20), |k| {
                let mut rng = seeded_rng(sub_seed(opts.seed, 51, n, k));
                let t = remove_vector_part(&TorsionJet::random_torsion(n, &mut rng));
                let b = hodge_torsion_b(&t, &rep)?;
                let f = rng.random_range(-1.0..1.0);
                let density = chiral_scalar_density(f, &b, &rep, &chi)?;
                let oracle = chiral_scalar_oracle(f, &b, &rep, &chi, &LaplaceJet::zero(n, rep.fiber_dim()), &GeometryJet::flat(n))?;
                Ok(relative_residual(density, oracle))
            }));
            sink.push_result(format!("hodge n={n} chiral scalar ({gk:?} grading) trace formula vs residue"), draws.min(20), r, tol);
        }
    }
    Ok(())
}

/// `T_ijk - (delta_jk V_i - delta_ik V_j) / (n - 1)`, which has vanishing
/// vector part and keeps the torsion shape.
pub fn remove_vector_part(t: &TorsionJet) -> TorsionJet {
    let n = t.n();
    let k = 1.0 / (n as f64 - 1.0);
    let strip = |x: &Tensor| {
        let v = crate::tensor::vector_part(x);
        Tensor::from_fn(3, n, |i| {
            let (a, b, cc) = (i[0], i[1], i[2]);
            let mut s = ZERO;
            if b == cc {
                s += v[a];
            }
            if a == cc {
                s -= v[b];
            }
            x.get(i) - s * k
        })
    };
    let slices: Vec<Tensor> = (0..n).map(|cc| strip(&t.deriv_slice(cc))).collect();
    let deriv = Tensor::from_fn(4, n, |i| slices[i[0]].get(&i[1..]));
    TorsionJet { value: strip(&t.value), deriv }
}

/// Pure vector torsion `T_ijk = delta_jk v_i - delta_ik v_j`.
pub fn vector_torsion(v: &[Complex64]) -> TorsionJet {
    let n = v.len();
    TorsionJet::constant(Tensor::from_fn(3, n, |i| {
        let mut s = ZERO;
        if i[1] == i[2] {
            s += v[i[0]];
        }
        if i[0] == i[2] {
            s -= v[i[1]];
        }
        s
    }))
}

fn grading(opts: &VerifyOptions, sink: &mut Sink) -> Result<()> {
    for n in dims(opts, &[2, 4, 6]) {
        let rep = CliffordRep::build(ModuleKind::Hodge, n)?;
        let chi = rep.grading(GradingKind::Hodge)?;
        let draws = opts.count.clamp(1, 50);
        let rs = opts.exec.map_range(draws, |k| -> Result<(f64, f64)> {
            let mut rng = seeded_rng(sub_seed(opts.seed, 60, n, k));
            let t = TorsionJet::random_torsion(n, &mut rng);
            let traceless = remove_vector_part(&t);
            let (ok, _) = grading_compatibility(&hodge_torsion_b(&traceless, &rep)?, &chi);
            let vt = vector_torsion(&random_vector(n, &mut rng));
            let (bad, _) = grading_compatibility(&hodge_torsion_b(&vt, &rep)?, &chi);
            let mut with_vector = t.clone();
            with_vector.value = traceless.value.add(&vt.value)?;
            let (bad2, _) = grading_compatibility(&hodge_torsion_b(&with_vector, &rep)?, &chi);
            Ok(((!ok) as u8 as f64, (bad || bad2) as u8 as f64))
        });
        let a = max_all(rs.iter().map(|r| r.as_ref().map(|x| x.0).map_err(Clone::clone)));
        let b = max_all(rs.iter().map(|r| r.as_ref().map(|x| x.1).map_err(Clone::clone)));
        sink.push_result(format!("hodge n={n} vanishing vector part gives a graded B"), draws, a, 0.0);
        sink.push_result(format!("hodge n={n} nonzero vector part breaks the grading"), draws, b, 0.0);
        let eul = rep.grading(GradingKind::Euler)?;
        let r = max_all(opts.exec.map_range(draws, |k| {
            let mut rng = seeded_rng(sub_seed(opts.seed, 61, n, k));
            let b = hodge_torsion_b(&TorsionJet::random_torsion(n, &mut rng), &rep)?;
            Ok((!grading_compatibility(&b, &eul).0) as u8 as f64)
        }));
        sink.push_result(format!("hodge n={n} Euler grading compatible with every torsion"), draws, r, 0.0);
    }
    Ok(())
}

fn antisymmetry(opts: &VerifyOptions, sink: &mut Sink) {
    for kind in [ModuleKind::Spin, ModuleKind::Hodge] {
        for n in dims(opts, &[2, 4, 6]) {
            let Ok(rep) = CliffordRep::build(kind, n) else { continue };
            let rs = opts.exec.map_range(opts.count, |k| -> Result<(f64, f64)> {
                let mut rng = seeded_rng(sub_seed(opts.seed, 70, n, k));
                let t = match kind {
                    ModuleKind::Spin => TorsionJet::random_antisymmetric(n, &mut rng),
                    ModuleKind::Hodge => TorsionJet::random_torsion(n, &mut rng),
                };
                let z = vec![ZERO; n];
                let closed = torsion_closed(&z, &z, &z, &t, kind)?.coeff_uvw.expect("trilinear");
                let b = crate::operators::PerturbedDirac::torsion(&rep, &t)?.b;
                let engine = torsion_general(&z, &z, &z, &b.b0, &rep, None)?.coeff_uvw.expect("trilinear");
                Ok((transposition_gap(&closed, true), transposition_gap(&engine, false)))
            });
            let exact = max_all(rs.iter().map(|r| r.as_ref().map(|x| x.0).map_err(Clone::clone)));
            let engine = max_all(rs.iter().map(|r| r.as_ref().map(|x| x.1).map_err(Clone::clone)));
            sink.push_result(
                format!("{kind} n={n} torsion closed-form coefficients change sign under transpositions"),
                opts.count,
                exact,
                0.0,
            );
            sink.push_result(
                format!("{kind} n={n} torsion trace-formula coefficients change sign under transpositions"),
                opts.count,
                engine,
                1e-12,
            );
        }
    }
    for n in dims(opts, &[2, 4, 6]) {
        let r = max_all(opts.exec.map_range(opts.count, |k| {
            let mut rng = seeded_rng(sub_seed(opts.seed, 71, n, k));
            let t = TorsionJet::random_antisymmetric(n, &mut rng);
            let u = OneFormJet::random(n, &mut rng);
            let w = OneFormJet::random(n, &mut rng);
            einstein_total_derivative_residual(&u, &w, &t)
        }));
        sink.push_result(format!("spin n={n} Einstein non-tensorial part is symmetric up to a divergence"), opts.count, r, 1e-12);
    }
}

/// Largest `|C_sigma(abc) + C_abc|` over the three transpositions; relative
/// to the largest coefficient unless `exact`.
fn transposition_gap(t: &Tensor, exact: bool) -> f64 {
    let scale = if exact { 1.0 } else { t.max_norm().max(1.0) };
    [[1, 0, 2], [0, 2, 1], [2, 1, 0]]
        .iter()
        .map(|p| t.permute_axes(p).add(t).map(|s| s.max_norm()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(groups: &[Group], n: Option<usize>) -> VerifySummary {
        run(&VerifyOptions { groups: groups.to_vec(), n, seed: 1, count: 3, ..Default::default() }).unwrap()
    }

    #[test]
    fn group_names_round_trip() {
        for g in Group::ALL {
            assert_eq!(g.name().parse::<Group>().unwrap(), g);
        }
        assert!("nope".parse::<Group>().is_err());
    }

    #[test]
    fn small_sweeps_pass() {
        let s =
            quick(&[Group::Clifford, Group::TwoPath, Group::Fluctuation, Group::Grading, Group::Antisymmetry, Group::Parametrix], Some(4));
        for c in &s.checks {
            assert!(c.passed, "{} {}: {:e}", c.group, c.name, c.max_residual);
        }
    }

    #[test]
    fn deterministic() {
        let a = serde_json::to_string(&quick(&[Group::TwoPath], Some(2))).unwrap();
        let b = serde_json::to_string(&quick(&[Group::TwoPath], Some(2))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stripped_torsion_has_no_vector_part() {
        let mut rng = seeded_rng(2);
        let t = remove_vector_part(&TorsionJet::random_torsion(4, &mut rng));
        assert!(t.vector_part().iter().all(|v| v.norm() < 1e-14));
        assert!(t.torsion_shape_residual() < 1e-14);
    }
}
