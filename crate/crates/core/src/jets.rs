//! Pointwise data in normal coordinates: curvature, torsion, one-form and
//! endomorphism jets, the Laplace-type coefficients `(P, S, Q)` and the
//! scenario file format that bundles them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordRep, ModuleKind};
use crate::error::{Error, Result};
use crate::linalg::{anticomm, c, max_abs, Mat, I};
use crate::tensor::{antisymmetrize_torsion, permutation_parity, vector_part, Tensor};

/// Tolerance used when validating algebraic symmetries of input tensors.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tensor with independent entries uniform in `[-1, 1)`.
pub fn random_tensor(rank: usize, n: usize, rng: &mut impl Rng) -> Tensor {
    Tensor::from_real_fn(rank, n, |_| rng.random_range(-1.0..1.0))
}

pub fn random_vector(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..n).map(|_| c(rng.random_range(-1.0..1.0))).collect()
}

/// Complex matrix with entries uniform in the unit square.
pub fn random_matrix(d: usize, rng: &mut impl Rng) -> Mat {
    Mat::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Alternating projection of a tensor over all its slots.
pub fn alternate(t: &Tensor) -> Tensor {
    let k = t.rank();
    let perms = permutations(k);
    let norm = perms.len() as f64;
    Tensor::from_fn(k, t.dim(), |idx| {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &perms {
            let src: Vec<usize> = p.iter().map(|&s| idx[s]).collect();
            acc += t.get(&src) * permutation_parity(p) as f64;
        }
        acc / norm
    })
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryJet {
    pub riemann: Tensor,
    pub ricci: Tensor,
    pub scalar: f64,
}

impl GeometryJet {
    pub fn flat(n: usize) -> Self {
        GeometryJet { riemann: Tensor::zeros(4, n), ricci: Tensor::zeros(2, n), scalar: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.riemann.dim()
    }

    /// Builds a jet from a curvature tensor, rejecting one that lacks the
    /// pair antisymmetries, pair exchange symmetry or first Bianchi identity.
    pub fn from_riemann(riemann: Tensor) -> Result<Self> {
        if riemann.rank() != 4 {
            return Err(Error::Rank { expected: 4, got: riemann.rank() });
        }
        let r = riemann_symmetry_residual(&riemann);
        if r > SYMMETRY_TOL * riemann.max_norm().max(1.0) {
            return Err(Error::Scenario(format!("curvature tensor violates its symmetries (residual {r:.3e})")));
        }
        Ok(Self::contract(riemann))
    }

    /// Projects an arbitrary rank-4 seed onto the space of algebraic
    /// curvature tensors.
    pub fn from_seed_tensor(seed: &Tensor) -> Self {
        let n = seed.dim();
        let pairs = Tensor::from_fn(4, n, |i| {
            let (a, b, cc, d) = (i[0], i[1], i[2], i[3]);
            let x = |a, b, cc, d| seed.get(&[a, b, cc, d]);
            let anti = |a, b, cc, d| (x(a, b, cc, d) - x(b, a, cc, d) - x(a, b, d, cc) + x(b, a, d, cc)) / 4.0;
            (anti(a, b, cc, d) + anti(cc, d, a, b)) / 2.0
        });
        let alt = alternate(&pairs);
        Self::contract(pairs.sub(&alt).expect("same shape"))
    }

    fn contract(riemann: Tensor) -> Self {
        let n = riemann.dim();
        let ricci = Tensor::from_fn(2, n, |i| (0..n).map(|cc| riemann.get(&[cc, i[0], cc, i[1]])).sum());
        let scalar = (0..n).map(|a| ricci.get(&[a, a]).re).sum();
        GeometryJet { riemann, ricci, scalar }
    }

    pub fn riemann_at(&self, a: usize, b: usize, cc: usize, d: usize) -> f64 {
        self.riemann.get(&[a, b, cc, d]).re
    }

    pub fn ricci_at(&self, a: usize, b: usize) -> f64 {
        self.ricci.get(&[a, b]).re
    }
}

/// Largest violation of the algebraic curvature symmetries.
pub fn riemann_symmetry_residual(r: &Tensor) -> f64 {
    let mut res = r.symmetry_residual((0, 1), -1.0).max(r.symmetry_residual((2, 3), -1.0));
    let exchanged = r.permute_axes(&[2, 3, 0, 1]);
    res = res.max(r.sub(&exchanged).map(|t| t.max_norm()).unwrap_or(f64::INFINITY));
    let n = r.dim();
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    let bianchi = r.get(&[a, b, cc, d]) + r.get(&[a, cc, d, b]) + r.get(&[a, d, b, cc]);
                    res = res.max(bianchi.norm());
                }
            }
        }
    }
    res
}

pub fn random_geometry_jet(n: usize, seed: u64) -> GeometryJet {
    let mut rng = seeded_rng(seed);
    GeometryJet::from_seed_tensor(&random_tensor(4, n, &mut rng))
}

/// Torsion value `T_ijk` and first derivatives `deriv[c][i][j][k] = d_c T_ijk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionJet {
    pub value: Tensor,
    pub deriv: Tensor,
}

impl TorsionJet {
    pub fn zeros(n: usize) -> Self {
        TorsionJet { value: Tensor::zeros(3, n), deriv: Tensor::zeros(4, n) }
    }

    pub fn constant(value: Tensor) -> Self {
        let n = value.dim();
        TorsionJet { value, deriv: Tensor::zeros(4, n) }
    }

    pub fn new(value: Tensor, deriv: Tensor) -> Result<Self> {
        if value.rank() != 3 {
            return Err(Error::Rank { expected: 3, got: value.rank() });
        }
        if deriv.rank() != 4 {
            return Err(Error::Rank { expected: 4, got: deriv.rank() });
        }
        if value.dim() != deriv.dim() {
            return Err(Error::Shape("torsion value and derivative dimensions differ".into()));
        }
        Ok(TorsionJet { value, deriv })
    }

    pub fn n(&self) -> usize {
        self.value.dim()
    }

    /// Totally antisymmetric value and derivatives.
    pub fn random_antisymmetric(n: usize, rng: &mut impl Rng) -> Self {
        let value = alternate(&random_tensor(3, n, rng));
        let slices: Vec<Tensor> = (0..n).map(|_| alternate(&random_tensor(3, n, rng))).collect();
        TorsionJet { value, deriv: stack(&slices) }
    }

    /// Antisymmetric in the first two slots only (the general torsion shape).
    pub fn random_torsion(n: usize, rng: &mut impl Rng) -> Self {
        let shape = |t: Tensor| t.sub(&t.permute_axes(&[1, 0, 2])).expect("same shape");
        let value = shape(random_tensor(3, n, rng));
        let slices: Vec<Tensor> = (0..n).map(|_| shape(random_tensor(3, n, rng))).collect();
        TorsionJet { value, deriv: stack(&slices) }
    }

    /// `d_c T` as a rank-3 tensor.
    pub fn deriv_slice(&self, cc: usize) -> Tensor {
        Tensor::from_fn(3, self.n(), |i| self.deriv.get(&[cc, i[0], i[1], i[2]]))
    }

    /// Cyclic averages of value and derivatives.
    pub fn antisymmetric_part(&self) -> TorsionJet {
        let n = self.n();
        let value = antisymmetrize_torsion(&self.value).expect("rank 3");
        let slices: Vec<Tensor> = (0..n).map(|cc| antisymmetrize_torsion(&self.deriv_slice(cc)).expect("rank 3")).collect();
        TorsionJet { value, deriv: stack(&slices) }
    }

    /// Residual of total antisymmetry over value and derivatives.
    pub fn antisymmetry_residual(&self) -> f64 {
        (0..self.n()).map(|cc| self.deriv_slice(cc).antisymmetry_residual()).fold(self.value.antisymmetry_residual(), f64::max)
    }

    /// Residual of `T_ijk = -T_jik` over value and derivatives.
    pub fn torsion_shape_residual(&self) -> f64 {
        (0..self.n())
            .map(|cc| self.deriv_slice(cc).symmetry_residual((0, 1), -1.0))
            .fold(self.value.symmetry_residual((0, 1), -1.0), f64::max)
    }

    pub fn vector_part(&self) -> Vec<Complex64> {
        vector_part(&self.value)
    }

    pub fn scale_norm(&self) -> f64 {
        self.value.max_norm().max(self.deriv.max_norm()).max(1.0)
    }
}

fn stack(slices: &[Tensor]) -> Tensor {
    let n = slices.len();
    Tensor::from_fn(4, n, |i| slices[i[0]].get(&i[1..]))
}

/// A covector field to first order: `value[a]` and `deriv[b][c] = d_c w_b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneFormJet {
    pub value: Tensor,
    pub deriv: Tensor,
}

impl OneFormJet {
    pub fn zeros(n: usize) -> Self {
        OneFormJet { value: Tensor::zeros(1, n), deriv: Tensor::zeros(2, n) }
    }

    pub fn constant(v: &[Complex64]) -> Self {
        let n = v.len();
        OneFormJet { value: Tensor::from_fn(1, n, |i| v[i[0]]), deriv: Tensor::zeros(2, n) }
    }

    pub fn basis(n: usize, a: usize) -> Self {
        let mut v = vec![c(0.0); n];
        v[a] = c(1.0);
        Self::constant(&v)
    }

    pub fn new(value: Tensor, deriv: Tensor) -> Result<Self> {
        if value.rank() != 1 {
            return Err(Error::Rank { expected: 1, got: value.rank() });
        }
        if deriv.rank() != 2 {
            return Err(Error::Rank { expected: 2, got: deriv.rank() });
        }
        if value.dim() != deriv.dim() {
            return Err(Error::Shape("one-form value and derivative dimensions differ".into()));
        }
        Ok(OneFormJet { value, deriv })
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        OneFormJet { value: random_tensor(1, n, rng), deriv: random_tensor(2, n, rng) }
    }

    pub fn n(&self) -> usize {
        self.value.dim()
    }

    pub fn at(&self, a: usize) -> Complex64 {
        self.value.get(&[a])
    }

    /// `d_c w_b`.
    pub fn d(&self, b: usize, cc: usize) -> Complex64 {
        self.deriv.get(&[b, cc])
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.value.entries().to_vec()
    }
}

/// Perturbation `B = B0 + B_a x^a + o(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationJet {
    pub b0: Mat,
    pub ba: Vec<Mat>,
}

impl PerturbationJet {
    pub fn zero(d: usize, n: usize) -> Self {
        PerturbationJet { b0: Mat::zeros(d, d), ba: vec![Mat::zeros(d, d); n] }
    }

    pub fn random(d: usize, n: usize, rng: &mut impl Rng) -> Self {
        PerturbationJet { b0: random_matrix(d, rng), ba: (0..n).map(|_| random_matrix(d, rng)).collect() }
    }

    pub fn n(&self) -> usize {
        self.ba.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.b0.nrows()
    }

    pub fn check_shape(&self, rep: &CliffordRep) -> Result<()> {
        let d = rep.fiber_dim();
        let ok = self.ba.len() == rep.n() && self.b0.shape() == (d, d) && self.ba.iter().all(|m| m.shape() == (d, d));
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!("perturbation does not fit the {}-dimensional fiber over n = {}", d, rep.n())))
        }
    }

    pub fn add(&self, other: &PerturbationJet) -> PerturbationJet {
        PerturbationJet { b0: &self.b0 + &other.b0, ba: self.ba.iter().zip(&other.ba).map(|(a, b)| a + b).collect() }
    }

    /// `B + A_a gamma^a` with `A_a(x) = a0[a] + a_deriv[a][c] x^c`.
    pub fn with_fluctuation(&self, a0: &[Complex64], a_deriv: &Tensor, rep: &CliffordRep) -> PerturbationJet {
        let n = rep.n();
        let mut out = self.clone();
        out.b0 += rep.one_form(a0);
        for (cc, bc) in out.ba.iter_mut().enumerate() {
            let col: Vec<Complex64> = (0..n).map(|a| a_deriv.get(&[a, cc])).collect();
            *bc += rep.one_form(&col);
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.ba.iter().map(max_abs).fold(max_abs(&self.b0), f64::max)
    }
}

/// Coefficients of a Laplace-type symbol at the origin:
/// `a1 = i (P_ab x^b + S_a) xi_a`, `a0 = Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceJet {
    pub p: Vec<Vec<Mat>>,
    pub s: Vec<Mat>,
    pub q: Mat,
}

impl LaplaceJet {
    pub fn zero(n: usize, d: usize) -> Self {
        LaplaceJet { p: vec![vec![Mat::zeros(d, d); n]; n], s: vec![Mat::zeros(d, d); n], q: Mat::zeros(d, d) }
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn p_trace_sum(&self) -> Mat {
        let d = self.fiber_dim();
        (0..self.n()).fold(Mat::zeros(d, d), |acc, a| acc + &self.p[a][a])
    }

    pub fn traces(&self) -> BaseTraces {
        BaseTraces { tr_p_aa: self.p_trace_sum().trace(), tr_q: self.q.trace() }
    }
}

/// Traces `Tr P_aa` and `Tr Q` of a torsionless Laplace jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseTraces {
    pub tr_p_aa: Complex64,
    pub tr_q: Complex64,
}

/// `(P0_ab + i{g^a,B_b}, i{g^a,B0}, Q0 + i g^a B_a + B0^2)`.
pub fn perturb_laplace_data(base: &LaplaceJet, b: &PerturbationJet, rep: &CliffordRep) -> Result<LaplaceJet> {
    b.check_shape(rep)?;
    if base.n() != rep.n() || base.fiber_dim() != rep.fiber_dim() {
        return Err(Error::Shape("Laplace jet does not match the Clifford module".into()));
    }
    let s0 = base.s.iter().map(max_abs).fold(0.0, f64::max);
    if s0 > 0.0 {
        return Err(Error::Unsupported(format!("base jet with nonzero S (max entry {s0:.3e})")));
    }
    let n = rep.n();
    let g = rep.gammas();
    let p = (0..n).map(|a| (0..n).map(|bb| &base.p[a][bb] + anticomm(&g[a], &b.ba[bb]) * I).collect()).collect();
    let s = (0..n).map(|a| anticomm(&g[a], &b.b0) * I).collect();
    let mut q = &base.q + &b.b0 * &b.b0;
    for a in 0..n {
        q += &g[a] * &b.ba[a] * I;
    }
    Ok(LaplaceJet { p, s, q })
}

/// Laplace data of the squared torsionless spin Dirac operator.
pub fn spin_laplace_jet(geom: &GeometryJet, rep: &CliffordRep) -> Result<LaplaceJet> {
    if rep.kind() != ModuleKind::Spin {
        return Err(Error::ModuleKind("spin Laplace data needs the spin module".into()));
    }
    let n = rep.n();
    if geom.n() != n {
        return Err(Error::Shape("geometry and module dimensions differ".into()));
    }
    let d = rep.fiber_dim();
    let id = rep.identity();
    let mut p = vec![vec![Mat::zeros(d, d); n]; n];
    for (a, row) in p.iter_mut().enumerate() {
        for (bb, pab) in row.iter_mut().enumerate() {
            *pab = &id * c(2.0 / 3.0 * geom.ricci_at(a, bb));
            for j in 0..n {
                for k in 0..n {
                    let r = geom.riemann_at(a, bb, j, k);
                    if r != 0.0 {
                        rep.gamma_word(&[j, k]).add_scaled_to(pab, c(r / 4.0));
                    }
                }
            }
        }
    }
    Ok(LaplaceJet { p, s: vec![Mat::zeros(d, d); n], q: id * c(geom.scalar / 4.0) })
}

/// `(Tr P0_aa, Tr Q0) = (2^n R / 3, 2^(n-2) R / 3)` for the Hodge Laplacian.
pub fn hodge_laplace_trace_data(geom: &GeometryJet, rep: &CliffordRep) -> Result<BaseTraces> {
    if rep.kind() != ModuleKind::Hodge {
        return Err(Error::ModuleKind("Hodge trace data needs the Hodge module".into()));
    }
    let n = rep.n() as i32;
    let r = geom.scalar;
    Ok(BaseTraces { tr_p_aa: c(2f64.powi(n) * r / 3.0), tr_q: c(2f64.powi(n - 2) * r / 3.0) })
}

/// Torsionless base traces for either module.
pub fn base_traces(geom: &GeometryJet, rep: &CliffordRep) -> Result<BaseTraces> {
    match rep.kind() {
        ModuleKind::Spin => Ok(spin_laplace_jet(geom, rep)?.traces()),
        ModuleKind::Hodge => hodge_laplace_trace_data(geom, rep),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryInput {
    pub riemann: Tensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetInput {
    pub value: Tensor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deriv: Option<Tensor>,
}

/// Scenario file. Fields left out are drawn from `seed` when it is given and
/// are zero (flat, torsion-free) otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: usize,
    pub module: ModuleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<JetInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<JetInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<JetInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<JetInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A scenario with every jet filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub n: usize,
    pub module: ModuleKind,
    pub geometry: GeometryJet,
    pub torsion: TorsionJet,
    pub u: OneFormJet,
    pub v: OneFormJet,
    pub w: OneFormJet,
    pub f: f64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let n = self.n;
        let max = match self.module {
            ModuleKind::Spin => 8,
            ModuleKind::Hodge => 6,
        };
        if n < 2 || n > max || n % 2 == 1 {
            return Err(Error::Scenario(format!("n = {n} is not an even dimension in 2..={max} for the {} module", self.module)));
        }
        let check = |t: &Tensor, rank: usize, what: &str| -> Result<()> {
            if t.rank() != rank || t.dim() != n {
                return Err(Error::Scenario(format!("{what} must have rank {rank} and dim {n}, got rank {} dim {}", t.rank(), t.dim())));
            }
            Ok(())
        };
        let sub_rng = |k: u64| self.seed.map(|s| seeded_rng(s.wrapping_mul(0x9E37_79B9).wrapping_add(k)));

        let geometry = match (&self.geometry, sub_rng(1)) {
            (Some(g), _) => {
                check(&g.riemann, 4, "geometry.riemann")?;
                GeometryJet::from_riemann(g.riemann.clone())?
            }
            (None, Some(mut rng)) => GeometryJet::from_seed_tensor(&random_tensor(4, n, &mut rng)),
            (None, None) => GeometryJet::flat(n),
        };
        let torsion = match (&self.torsion, sub_rng(2)) {
            (Some(t), _) => {
                check(&t.value, 3, "torsion.value")?;
                let deriv = t.deriv.clone().unwrap_or_else(|| Tensor::zeros(4, n));
                check(&deriv, 4, "torsion.deriv")?;
                TorsionJet::new(t.value.clone(), deriv)?
            }
            (None, Some(mut rng)) => match self.module {
                ModuleKind::Spin => TorsionJet::random_antisymmetric(n, &mut rng),
                ModuleKind::Hodge => TorsionJet::random_torsion(n, &mut rng),
            },
            (None, None) => TorsionJet::zeros(n),
        };
        let one_form = |input: &Option<JetInput>, k: u64, what: &str| -> Result<OneFormJet> {
            match (input, sub_rng(k)) {
                (Some(j), _) => {
                    check(&j.value, 1, what)?;
                    let deriv = j.deriv.clone().unwrap_or_else(|| Tensor::zeros(2, n));
                    check(&deriv, 2, what)?;
                    OneFormJet::new(j.value.clone(), deriv)
                }
                (None, Some(mut rng)) => Ok(OneFormJet::random(n, &mut rng)),
                (None, None) => Ok(OneFormJet::zeros(n)),
            }
        };
        Ok(ResolvedScenario {
            n,
            module: self.module,
            geometry,
            torsion,
            u: one_form(&self.u, 3, "u")?,
            v: one_form(&self.v, 4, "v")?,
            w: one_form(&self.w, 5, "w")?,
            f: self.f.unwrap_or(1.0),
        })
    }
}

impl ResolvedScenario {
    /// Fully random scenario with the torsion shape suited to `module`.
    pub fn random(n: usize, module: ModuleKind, seed: u64) -> Result<Self> {
        let mut sc = Scenario { n, module, geometry: None, torsion: None, u: None, v: None, w: None, f: None, seed: Some(seed) };
        let mut rng = seeded_rng(seed ^ 0xF00D);
        sc.f = Some(rng.random_range(-1.0..1.0));
        sc.resolve()
    }
}
