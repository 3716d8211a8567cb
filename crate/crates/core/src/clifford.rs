//! Explicit Clifford module representations: the irreducible spin module of
//! dimension `2^m` and the exterior-algebra (Hodge) module of dimension `2^n`,
//! together with their gradings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, Mat, Monomial, I, ONE, ZERO};
use crate::parallel::Execution;
use crate::tensor::{generalized_delta, MultiIndex, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Spin,
    Hodge,
}

impl std::fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModuleKind::Spin => "spin",
            ModuleKind::Hodge => "hodge",
        })
    }
}

impl std::str::FromStr for ModuleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin" => Ok(ModuleKind::Spin),
            "hodge" => Ok(ModuleKind::Hodge),
            other => Err(Error::Unsupported(format!("module kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradingKind {
    /// Chirality of the spin module.
    SpinGamma,
    /// `(-1)^p` on degree-`p` forms.
    Euler,
    /// `i^m gamma^1 ... gamma^n` on forms.
    Hodge,
    /// Product of the Hodge and Euler gradings; commutes with the generators.
    Hat,
}

impl std::str::FromStr for GradingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin_gamma" | "gamma" | "chirality" => Ok(GradingKind::SpinGamma),
            "euler" | "e" => Ok(GradingKind::Euler),
            "hodge" | "h" => Ok(GradingKind::Hodge),
            "hat" => Ok(GradingKind::Hat),
            other => Err(Error::Unsupported(format!("grading '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Grading {
    pub kind: GradingKind,
    pub mono: Monomial,
    pub matrix: Mat,
}

impl Grading {
    fn new(kind: GradingKind, mono: Monomial) -> Self {
        let matrix = mono.to_dense();
        Grading { kind, mono, matrix }
    }

    /// Whether this grading should anticommute with the Clifford generators.
    pub fn anticommutes_with_generators(&self) -> bool {
        self.kind != GradingKind::Hat
    }
}

/// Exterior-algebra operators on the basis of ordered multi-indices.
#[derive(Debug, Clone)]
pub struct HodgeExtras {
    pub basis: Vec<MultiIndex>,
    pub lambda_plus: Vec<Monomial>,
    pub lambda_minus: Vec<Monomial>,
    pub gamma_tilde: Vec<Monomial>,
}

#[derive(Debug, Clone)]
pub struct CliffordRep {
    n: usize,
    kind: ModuleKind,
    fiber_dim: usize,
    gamma_mono: Vec<Monomial>,
    gammas: Vec<Mat>,
    hodge: Option<HodgeExtras>,
}

fn sigma1() -> Monomial {
    Monomial::new(vec![1, 0], vec![ONE, ONE])
}

fn sigma2() -> Monomial {
    Monomial::new(vec![1, 0], vec![I, -I])
}

fn sigma3() -> Monomial {
    Monomial::new(vec![0, 1], vec![ONE, -ONE])
}

fn check_even(n: usize, max: usize, range: &'static str) -> Result<()> {
    if n < 2 || n > max || n % 2 == 1 {
        return Err(Error::Dimension(n, range));
    }
    Ok(())
}

/// Spin generators by the tensor ladder: each step tensors the previous
/// generators with `sigma3` and appends `1 (x) sigma1`, `1 (x) sigma2`.
pub fn build_spin_gammas(n: usize) -> Result<CliffordRep> {
    check_even(n, 8, "2..=8")?;
    let mut gens = vec![sigma1(), sigma2()];
    while gens.len() < n {
        let d = gens[0].dim();
        let id = Monomial::identity(d);
        let mut next: Vec<Monomial> = gens.iter().map(|g| g.kron(&sigma3())).collect();
        next.push(id.kron(&sigma1()));
        next.push(id.kron(&sigma2()));
        gens = next;
    }
    Ok(CliffordRep::from_generators(n, ModuleKind::Spin, gens, None))
}

/// Exterior algebra `Lambda R^n` with the raising and lowering operators.
/// Basis forms are ordered by degree, then lexicographically.
pub fn build_lambda_ops(n: usize) -> Result<CliffordRep> {
    check_even(n, 6, "2..=6")?;
    let basis = form_basis(n);
    let d = basis.len();
    let position = |idx: &[usize]| basis.iter().position(|b| b.0 == idx).expect("basis form");
    let mut lambda_plus = Vec::with_capacity(n);
    let mut lambda_minus = Vec::with_capacity(n);
    for p in 0..n {
        let (mut rp, mut cp) = ((0..d).collect::<Vec<_>>(), vec![ZERO; d]);
        let (mut rm, mut cm) = ((0..d).collect::<Vec<_>>(), vec![ZERO; d]);
        for (j, form) in basis.iter().enumerate() {
            if form.contains(p) {
                let rest: Vec<usize> = form.0.iter().copied().filter(|&x| x != p).collect();
                rm[j] = position(&rest);
                cm[j] = c(generalized_delta(&form.0, &MultiIndex::new(rest).prefixed(p).0) as f64);
            } else {
                let pj = form.prefixed(p);
                let mut sorted = pj.0.clone();
                sorted.sort_unstable();
                rp[j] = position(&sorted);
                cp[j] = c(generalized_delta(&sorted, &pj.0) as f64);
            }
        }
        lambda_plus.push(Monomial::new(rp, cp));
        lambda_minus.push(Monomial::new(rm, cm));
    }
    let gammas: Vec<Monomial> = (0..n)
        .map(|p| {
            let mut g = lambda_plus[p].to_dense() - lambda_minus[p].to_dense();
            g *= -I;
            Monomial::from_dense(&g).expect("gamma is monomial")
        })
        .collect();
    let gamma_tilde: Vec<Monomial> = (0..n)
        .map(|p| Monomial::from_dense(&(lambda_plus[p].to_dense() + lambda_minus[p].to_dense())).expect("gamma tilde is monomial"))
        .collect();
    let extras = HodgeExtras { basis, lambda_plus, lambda_minus, gamma_tilde };
    Ok(CliffordRep::from_generators(n, ModuleKind::Hodge, gammas, Some(extras)))
}

fn form_basis(n: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(1 << n);
    for degree in 0..=n {
        let mut forms: Vec<Vec<usize>> = (0u32..(1 << n))
            .filter(|mask| mask.count_ones() as usize == degree)
            .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
            .collect();
        forms.sort();
        out.extend(forms.into_iter().map(MultiIndex));
    }
    out
}

/// `-i^m gamma^1 ... gamma^n`: hermitian, squares to one, and
/// `Tr(chi gamma^1 gamma^2) = 2i` in two dimensions.
pub fn build_spin_chirality(rep: &CliffordRep) -> Result<Grading> {
    if rep.kind != ModuleKind::Spin {
        return Err(Error::ModuleKind("chirality needs the spin module".into()));
    }
    let phase = -I.powu(rep.m() as u32);
    Ok(Grading::new(GradingKind::SpinGamma, rep.gamma_product().scale(phase)))
}

/// Euler, Hodge and hat gradings of the exterior algebra.
pub fn build_hodge_gradings(rep: &CliffordRep) -> Result<(Grading, Grading, Grading)> {
    let extras = rep.hodge_extras()?;
    let d = rep.fiber_dim;
    let tilde = Monomial::product(d, &extras.gamma_tilde);
    let chi_e = rep.gamma_product().mul(&tilde);
    let chi_h = rep.gamma_product().scale(I.powu(rep.m() as u32));
    let chi_hat = chi_h.mul(&chi_e);
    Ok((Grading::new(GradingKind::Euler, chi_e), Grading::new(GradingKind::Hodge, chi_h), Grading::new(GradingKind::Hat, chi_hat)))
}

impl CliffordRep {
    fn from_generators(n: usize, kind: ModuleKind, gamma_mono: Vec<Monomial>, hodge: Option<HodgeExtras>) -> Self {
        let fiber_dim = gamma_mono[0].dim();
        let gammas = gamma_mono.iter().map(Monomial::to_dense).collect();
        CliffordRep { n, kind, fiber_dim, gamma_mono, gammas, hodge }
    }

    /// Spin module for `ModuleKind::Spin`, exterior algebra for `Hodge`.
    pub fn build(kind: ModuleKind, n: usize) -> Result<Self> {
        match kind {
            ModuleKind::Spin => build_spin_gammas(n),
            ModuleKind::Hodge => build_lambda_ops(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.n / 2
    }

    pub fn kind(&self) -> ModuleKind {
        self.kind
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn gamma(&self, a: usize) -> &Mat {
        &self.gammas[a]
    }

    pub fn gammas(&self) -> &[Mat] {
        &self.gammas
    }

    pub fn gamma_mono(&self, a: usize) -> &Monomial {
        &self.gamma_mono[a]
    }

    pub fn gamma_monos(&self) -> &[Monomial] {
        &self.gamma_mono
    }

    pub fn hodge_extras(&self) -> Result<&HodgeExtras> {
        self.hodge.as_ref().ok_or_else(|| Error::ModuleKind("needs the Hodge module".into()))
    }

    pub fn identity(&self) -> Mat {
        Mat::identity(self.fiber_dim, self.fiber_dim)
    }

    /// `gamma^1 gamma^2 ... gamma^n`.
    pub fn gamma_product(&self) -> Monomial {
        Monomial::product(self.fiber_dim, &self.gamma_mono)
    }

    /// Product of the generators with the listed indices, in order.
    pub fn gamma_word(&self, idx: &[usize]) -> Monomial {
        Monomial::product(self.fiber_dim, idx.iter().map(|&a| &self.gamma_mono[a]))
    }

    /// Clifford multiplication `u_a gamma^a` by a covector.
    pub fn one_form(&self, u: &[num_complex::Complex64]) -> Mat {
        assert_eq!(u.len(), self.n);
        let mut out = Mat::zeros(self.fiber_dim, self.fiber_dim);
        for (a, ua) in u.iter().enumerate() {
            self.gamma_mono[a].add_scaled_to(&mut out, *ua);
        }
        out
    }

    /// The gradings available on this module.
    pub fn gradings(&self) -> Result<Vec<Grading>> {
        match self.kind {
            ModuleKind::Spin => Ok(vec![build_spin_chirality(self)?]),
            ModuleKind::Hodge => {
                let (e, h, hat) = build_hodge_gradings(self)?;
                Ok(vec![e, h, hat])
            }
        }
    }

    pub fn grading(&self, kind: GradingKind) -> Result<Grading> {
        self.gradings()?
            .into_iter()
            .find(|g| g.kind == kind)
            .ok_or_else(|| Error::ModuleKind(format!("grading {kind:?} not defined on the {} module", self.kind)))
    }

    /// Largest deviation from `{gamma^a, gamma^b} = 2 delta^{ab}`, hermiticity
    /// and tracelessness of the generators.
    pub fn clifford_residual(&self) -> f64 {
        let d = self.fiber_dim;
        let id = Mat::identity(d, d);
        let mut r: f64 = 0.0;
        for a in 0..self.n {
            let ga = &self.gamma_mono[a];
            r = r.max((ga.adjoint().to_dense() - &self.gammas[a]).camax());
            r = r.max(ga.trace().norm());
            for b in 0..self.n {
                let gb = &self.gamma_mono[b];
                let ac = ga.mul(gb).to_dense() + gb.mul(ga).to_dense();
                let target = if a == b { &id * c(2.0) } else { Mat::zeros(d, d) };
                r = r.max((ac - target).camax());
            }
        }
        r
    }

    /// Largest deviation from the canonical anticommutation relations and
    /// from `{gamma~^p, gamma^s} = 0`, `{gamma~^p, gamma~^r} = 2 delta`.
    pub fn car_residual(&self) -> Result<f64> {
        let ex = self.hodge_extras()?;
        let d = self.fiber_dim;
        let id = Mat::identity(d, d);
        let anti = |x: &Monomial, y: &Monomial| x.mul(y).to_dense() + y.mul(x).to_dense();
        let mut r: f64 = 0.0;
        for p in 0..self.n {
            for q in 0..self.n {
                let delta = if p == q { id.clone() } else { Mat::zeros(d, d) };
                r = r.max(anti(&ex.lambda_plus[p], &ex.lambda_plus[q]).camax());
                r = r.max(anti(&ex.lambda_minus[p], &ex.lambda_minus[q]).camax());
                r = r.max((anti(&ex.lambda_plus[p], &ex.lambda_minus[q]) - &delta).camax());
                r = r.max(anti(&ex.gamma_tilde[p], &self.gamma_mono[q]).camax());
                r = r.max((anti(&ex.gamma_tilde[p], &ex.gamma_tilde[q]) - &delta * c(2.0)).camax());
            }
        }
        Ok(r)
    }

    /// Dumps the generators as rank-3 tensors `[a][row][col]` (fiber
    /// dimension must not exceed 8).
    pub fn gammas_as_tensors(&self) -> Vec<Tensor> {
        self.gammas
            .iter()
            .map(|g| {
                let d = g.nrows();
                let mut entries = Vec::with_capacity(d * d);
                for i in 0..d {
                    for j in 0..d {
                        entries.push(g[(i, j)]);
                    }
                }
                Tensor::from_entries(2, d, entries).expect("square matrix")
            })
            .collect()
    }
}

/// Residuals of the grading axioms: `chi^2 = 1`, hermiticity, and
/// anticommutation (or commutation, for the hat grading) with every
/// generator.
pub fn grading_residual(rep: &CliffordRep, g: &Grading) -> f64 {
    let d = rep.fiber_dim();
    let id = Mat::identity(d, d);
    let mut r = (g.mono.mul(&g.mono).to_dense() - id).camax();
    r = r.max((g.mono.adjoint().to_dense() - &g.matrix).camax());
    let sign = if g.anticommutes_with_generators() { 1.0 } else { -1.0 };
    for ga in rep.gamma_monos() {
        let x = g.mono.mul(ga).to_dense() + ga.mul(&g.mono).to_dense() * c(sign);
        r = r.max(x.camax());
    }
    r
}

/// Residuals of the six exterior-algebra trace identities, each maximized
/// over both sign choices and every index combination.
#[derive(Debug, Clone, Serialize)]
pub struct TraceLemmaReport {
    pub n: usize,
    pub residuals: [f64; 6],
}

impl TraceLemmaReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn eps2(j: usize, i: usize, a: usize, b: usize) -> f64 {
    generalized_delta(&[j, i], &[a, b]) as f64
}

pub fn verify_trace_lemma_hodge(rep: &CliffordRep) -> Result<TraceLemmaReport> {
    verify_trace_lemma_hodge_with(rep, Execution::default())
}

pub fn verify_trace_lemma_hodge_with(rep: &CliffordRep, exec: Execution) -> Result<TraceLemmaReport> {
    let ex = rep.hodge_extras()?;
    let n = rep.n();
    let p2 = |k: i32| 2f64.powi(n as i32 + k);
    let g = rep.gamma_monos();
    let mut residuals = [0.0f64; 6];
    for s in [1.0f64, -1.0] {
        let (same, other) = if s > 0.0 { (&ex.lambda_plus, &ex.lambda_minus) } else { (&ex.lambda_minus, &ex.lambda_plus) };
        let si = I * s;
        for a in 0..n {
            for i in 0..n {
                let lhs = g[a].trace_mul(&same[i]);
                residuals[0] = residuals[0].max((lhs - si * p2(-1) * kd(a, i)).norm());
            }
        }
        let r1 = exec.max_range(n, |a| {
            let mut r: f64 = 0.0;
            for j in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        let word = other[j].mul(&same[k]).mul(&other[i]);
                        let lhs = g[a].trace_mul(&word);
                        let rhs = -si * p2(-2) * (kd(a, i) * kd(k, j) + kd(a, j) * kd(k, i));
                        r = r.max((lhs - rhs).norm());
                    }
                }
            }
            r
        });
        residuals[1] = residuals[1].max(r1);
        let r2 = exec.max_range(n, |a| {
            let mut r: f64 = 0.0;
            for b in 0..n {
                for cc in 0..n {
                    let ggg = g[a].mul(&g[b]).mul(&g[cc]);
                    for i in 0..n {
                        let lhs = ggg.trace_mul(&same[i]);
                        let rhs = si * p2(-1) * (kd(a, i) * kd(b, cc) - kd(b, i) * kd(a, cc) + kd(cc, i) * kd(a, b));
                        r = r.max((lhs - rhs).norm());
                    }
                }
            }
            r
        });
        residuals[2] = residuals[2].max(r2);
        let r3 = exec.max_range(n, |a| {
            let mut r: f64 = 0.0;
            for b in 0..n {
                for cc in 0..n {
                    let ggg = g[a].mul(&g[b]).mul(&g[cc]);
                    for j in 0..n {
                        for k in 0..n {
                            let jk = same[j].mul(&other[k]);
                            for i in 0..n {
                                let lhs = ggg.trace_mul(&jk.mul(&same[i]));
                                let bracket = 2.0 * kd(b, cc) * (kd(a, i) * kd(k, j) + kd(a, j) * kd(k, i))
                                    - 2.0 * kd(a, cc) * (kd(b, i) * kd(k, j) + kd(b, j) * kd(k, i))
                                    + 2.0 * kd(a, b) * (kd(i, cc) * kd(k, j) + kd(cc, j) * kd(k, i))
                                    + kd(k, a) * eps2(j, i, b, cc)
                                    + kd(k, b) * eps2(j, i, cc, a)
                                    + kd(k, cc) * eps2(j, i, a, b);
                                r = r.max((lhs - si * p2(-3) * bracket).norm());
                            }
                        }
                    }
                }
            }
            r
        });
        residuals[3] = residuals[3].max(r3);
        for a in 0..n {
            for b in 0..n {
                let gg = g[a].mul(&g[b]);
                for j in 0..n {
                    for i in 0..n {
                        let lhs = gg.trace_mul(&other[j].mul(&other[i]));
                        let rhs = -p2(-2) * eps2(i, j, a, b);
                        residuals[4] = residuals[4].max((lhs - rhs).norm());
                    }
                }
            }
        }
        let r5 = exec.max_range(n, |a| {
            let mut r: f64 = 0.0;
            for b in 0..n {
                for cc in 0..n {
                    for dd in 0..n {
                        let gggg = g[a].mul(&g[b]).mul(&g[cc]).mul(&g[dd]);
                        for j in 0..n {
                            for i in 0..n {
                                let lhs = gggg.trace_mul(&same[j].mul(&same[i]));
                                let rhs = p2(-2)
                                    * (kd(a, b) * eps2(j, i, cc, dd)
                                        + kd(a, cc) * eps2(j, i, dd, b)
                                        + kd(a, dd) * eps2(j, i, b, cc)
                                        + kd(b, cc) * eps2(j, i, a, dd)
                                        + kd(b, dd) * eps2(j, i, cc, a)
                                        + kd(cc, dd) * eps2(j, i, a, b));
                                r = r.max((lhs - rhs).norm());
                            }
                        }
                    }
                }
            }
            r
        });
        residuals[5] = residuals[5].max(r5);
    }
    Ok(TraceLemmaReport { n, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace;

    #[test]
    fn spin_reps_are_clifford() {
        for n in [2, 4, 6, 8] {
            let rep = build_spin_gammas(n).unwrap();
            assert_eq!(rep.fiber_dim(), 1 << (n / 2));
            assert_eq!(rep.clifford_residual(), 0.0);
        }
        assert!(build_spin_gammas(3).is_err());
        assert!(build_spin_gammas(10).is_err());
    }

    #[test]
    fn spin_chirality_phase() {
        let rep = build_spin_gammas(2).unwrap();
        let chi = build_spin_chirality(&rep).unwrap();
        let t = trace(&(&chi.matrix * rep.gamma(0) * rep.gamma(1)));
        assert!((t - c(2.0) * I).norm() < 1e-15);
        for n in [4, 6, 8] {
            let rep = build_spin_gammas(n).unwrap();
            let chi = build_spin_chirality(&rep).unwrap();
            assert_eq!(grading_residual(&rep, &chi), 0.0);
        }
        let rep4 = build_spin_gammas(4).unwrap();
        let chi = build_spin_chirality(&rep4).unwrap();
        assert_eq!(chi.mono.trace_mul(&rep4.gamma_word(&[0, 1, 2, 3])), c(4.0));
    }

    #[test]
    fn hodge_rep_relations() {
        for n in [2, 4, 6] {
            let rep = build_lambda_ops(n).unwrap();
            assert_eq!(rep.fiber_dim(), 1 << n);
            assert_eq!(rep.clifford_residual(), 0.0);
            assert_eq!(rep.car_residual().unwrap(), 0.0);
        }
        assert!(build_lambda_ops(8).is_err());
    }

    #[test]
    fn lambda_plus_on_vacuum() {
        let rep = build_lambda_ops(4).unwrap();
        let ex = rep.hodge_extras().unwrap();
        let lp = ex.lambda_plus[2].to_dense();
        let target = ex.basis.iter().position(|b| b.0 == vec![2]).unwrap();
        assert_eq!(lp[(target, 0)], ONE);
    }

    #[test]
    fn hodge_gradings() {
        let rep = build_lambda_ops(4).unwrap();
        let (e, h, hat) = build_hodge_gradings(&rep).unwrap();
        for g in [&e, &h, &hat] {
            assert_eq!(grading_residual(&rep, g), 0.0);
        }
        let ex = rep.hodge_extras().unwrap();
        for (k, form) in ex.basis.iter().enumerate() {
            let sign = if form.len() % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(e.matrix[(k, k)], c(sign));
        }
        for p in 0..4 {
            let (lp, lm) = (&ex.lambda_plus[p], &ex.lambda_minus[p]);
            assert_eq!(h.mono.mul(lp).to_dense(), lm.mul(&h.mono).to_dense());
            assert_eq!(hat.mono.mul(lp).to_dense(), -lm.mul(&hat.mono).to_dense());
        }
        assert!(build_hodge_gradings(&build_spin_gammas(4).unwrap()).is_err());
    }

    #[test]
    fn trace_lemma_small() {
        let rep = build_lambda_ops(4).unwrap();
        let ex = rep.hodge_extras().unwrap();
        let lhs = rep.gamma_word(&[0, 1]).trace_mul(&ex.lambda_minus[1].mul(&ex.lambda_minus[0]));
        assert_eq!(lhs, c(-4.0));
        let report = verify_trace_lemma_hodge(&rep).unwrap();
        assert!(report.max_residual() < 1e-12, "{report:?}");
    }
}
