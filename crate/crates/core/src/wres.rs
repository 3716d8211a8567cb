//! Closed-form Wodzicki residue densities for second-order operators
//! against powers of a Laplace-type operator, and for `E D D^-2m`.
//!
//! All values are pointwise densities at the origin of normal coordinates.

use num_complex::Complex64;
use rand::Rng;

use crate::clifford::{CliffordRep, Grading};
use crate::error::{Error, Result};
use crate::jets::{random_matrix, GeometryJet, LaplaceJet};
use crate::linalg::{c, max_abs, max_abs_diff, trace_product, Mat, I};
use crate::symbol::{operator_data_symbol, SymbolPoly};
use crate::tensor::sphere_volume;

/// `nu_{n-1}`, the volume of the unit sphere in `R^n`.
pub fn nu(n: usize) -> f64 {
    sphere_volume(n)
}

/// Coefficients of `sigma(O) = F^ab xi_a xi_b + i G^a xi_a + H` at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorData {
    pub f: Vec<Vec<Mat>>,
    pub g: Vec<Mat>,
    pub h: Mat,
}

impl OperatorData {
    pub fn zero(n: usize, d: usize) -> Self {
        OperatorData { f: vec![vec![Mat::zeros(d, d); n]; n], g: vec![Mat::zeros(d, d); n], h: Mat::zeros(d, d) }
    }

    /// Random data with symmetric `F`.
    pub fn random(n: usize, d: usize, rng: &mut impl Rng) -> Self {
        let mut od = Self::zero(n, d);
        for a in 0..n {
            for b in a..n {
                let m = random_matrix(d, rng);
                od.f[a][b] = m.clone();
                od.f[b][a] = m;
            }
            od.g[a] = random_matrix(d, rng);
        }
        od.h = random_matrix(d, rng);
        od
    }

    /// `O = E D` with `D = D0 + B`: `F = 0`, `G^a = i E gamma^a`, `H = E B0`.
    pub fn from_ed(e: &Mat, b0: &Mat, rep: &CliffordRep) -> Self {
        let n = rep.n();
        let d = rep.fiber_dim();
        OperatorData { f: vec![vec![Mat::zeros(d, d); n]; n], g: rep.gammas().iter().map(|ga| e * ga * I).collect(), h: e * b0 }
    }

    /// The Laplace-type operator itself: `F = delta Id`, `G = S`, `H = Q`.
    pub fn laplace(lj: &LaplaceJet) -> Self {
        let n = lj.n();
        let d = lj.fiber_dim();
        let f = (0..n).map(|a| (0..n).map(|b| if a == b { Mat::identity(d, d) } else { Mat::zeros(d, d) }).collect()).collect();
        OperatorData { f, g: lj.s.clone(), h: lj.q.clone() }
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn f_trace(&self) -> Mat {
        let d = self.fiber_dim();
        (0..self.n()).fold(Mat::zeros(d, d), |acc, a| acc + &self.f[a][a])
    }

    /// Left multiplication of every coefficient by `m`.
    pub fn left_mul(&self, m: &Mat) -> Self {
        OperatorData {
            f: self.f.iter().map(|r| r.iter().map(|x| m * x).collect()).collect(),
            g: self.g.iter().map(|x| m * x).collect(),
            h: m * &self.h,
        }
    }

    pub fn sub(&self, other: &OperatorData) -> Self {
        OperatorData {
            f: self.f.iter().zip(&other.f).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect(),
            g: self.g.iter().zip(&other.g).map(|(x, y)| x - y).collect(),
            h: &self.h - &other.h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let d = self.fiber_dim();
        if self.f.len() != n || self.f.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("F must be n x n".into()));
        }
        let sized = |m: &Mat| m.shape() == (d, d);
        if !self.f.iter().flatten().all(sized) || !self.g.iter().all(sized) {
            return Err(Error::Shape("operator data matrices of unequal size".into()));
        }
        for a in 0..n {
            for b in 0..a {
                let r = max_abs_diff(&self.f[a][b], &self.f[b][a]);
                if r > 1e-12 * (1.0 + crate::linalg::max_abs(&self.f[a][b])) {
                    return Err(Error::Shape(format!("F is not symmetric (residual {r:.3e})")));
                }
            }
        }
        Ok(())
    }

    pub fn to_symbol(&self) -> Result<SymbolPoly> {
        operator_data_symbol(self.n(), &self.f, &self.g, &self.h)
    }
}

fn check(od: &OperatorData, lj: &LaplaceJet, geom: &GeometryJet) -> Result<()> {
    od.validate()?;
    if od.n() != lj.n() || od.fiber_dim() != lj.fiber_dim() || geom.n() != od.n() {
        return Err(Error::Shape("operator data, Laplace jet and geometry disagree".into()));
    }
    Ok(())
}

fn ss(lj: &LaplaceJet, a: usize, b: usize) -> Mat {
    &lj.s[a] * &lj.s[b]
}

/// `Wres(O L^-m)` for `O` with symbol data `od` and `L` with data `lj`.
pub fn wres_density_general(od: &OperatorData, lj: &LaplaceJet, geom: &GeometryJet) -> Result<Complex64> {
    check(od, lj, geom)?;
    let n = od.n();
    let d = od.fiber_dim();
    let id = Mat::identity(d, d);
    let has_s = lj.s.iter().any(|s| max_abs(s) > 0.0);
    let mut tr = od.h.trace() * 24.0;
    if has_s {
        for a in 0..n {
            tr += trace_product(&(&od.g[a] * &lj.s[a]), &id) * 12.0;
        }
    }
    let mut scalar_part = &lj.q * c(-12.0) + lj.p_trace_sum() * c(6.0) - &id * c(2.0 * geom.scalar);
    if has_s {
        for b in 0..n {
            scalar_part -= ss(lj, b, b) * c(3.0);
        }
    }
    tr += trace_product(&od.f_trace(), &scalar_part);
    for a in 0..n {
        for b in 0..n {
            let mut t = &lj.p[a][b] * c(-6.0) + &id * c(2.0 * geom.ricci_at(a, b));
            if has_s {
                t -= ss(lj, a, b) * c(3.0);
            }
            tr += trace_product(&od.f[a][b], &t) * 2.0;
        }
    }
    Ok(tr * (nu(n) / 24.0))
}

/// `Wres(E L^{-m+1})` for an endomorphism `E`.
pub fn wres_density_endo(e: &Mat, lj: &LaplaceJet, geom: &GeometryJet) -> Result<Complex64> {
    let n = lj.n();
    let d = lj.fiber_dim();
    if e.shape() != (d, d) || geom.n() != n {
        return Err(Error::Shape("endomorphism, Laplace jet and geometry disagree".into()));
    }
    let mut t = &lj.q * c(-12.0) + lj.p_trace_sum() * c(6.0) - Mat::identity(d, d) * c(2.0 * geom.scalar);
    for a in 0..n {
        t -= ss(lj, a, a) * c(3.0);
    }
    Ok((e * t).trace() * ((n as f64 - 2.0) * nu(n) / 24.0))
}

/// `Wres((O - F^aa L/(n-2)) L^-m)`.
pub fn wres_density_reduced(od: &OperatorData, lj: &LaplaceJet, geom: &GeometryJet) -> Result<Complex64> {
    check(od, lj, geom)?;
    let n = od.n();
    if n == 2 {
        return Err(Error::Dimension(n, "4..=8 (the reduced formula divides by n - 2)"));
    }
    let d = od.fiber_dim();
    let id = Mat::identity(d, d);
    let mut inner = &od.h * c(24.0);
    for a in 0..n {
        inner += &od.g[a] * &lj.s[a] * c(12.0);
        for b in 0..n {
            let t = &lj.p[a][b] * c(-6.0) + &id * c(2.0 * geom.ricci_at(a, b)) - ss(lj, a, b) * c(3.0);
            inner += &od.f[a][b] * t * c(2.0);
        }
    }
    Ok(inner.trace() * (nu(n) / 24.0))
}

/// The operator `F^aa L/(n-2)` as symbol data at the origin.
pub fn trace_laplace_part(od: &OperatorData, lj: &LaplaceJet) -> OperatorData {
    let n = od.n();
    let k = c(1.0 / (n as f64 - 2.0));
    let fa = od.f_trace() * k;
    OperatorData::laplace(lj).left_mul(&fa)
}

/// `2 B0 - gamma^a {gamma^a, B0}`.
pub fn ed_kernel(b0: &Mat, rep: &CliffordRep) -> Result<Mat> {
    let d = rep.fiber_dim();
    if b0.shape() != (d, d) {
        return Err(Error::Shape("endomorphism does not fit the module".into()));
    }
    let mut k = b0 * c(2.0);
    for gm in rep.gamma_monos() {
        let ac = gm.mul_dense(b0) + gm.dense_mul(b0);
        k -= gm.mul_dense(&ac);
    }
    Ok(k)
}

/// `Wres(E D D^-2m) = (nu/2) Tr[(chi) E (2 B0 - gamma^a {gamma^a, B0})]`.
pub fn wres_density_ed(e: &Mat, b0: &Mat, rep: &CliffordRep, chi: Option<&Grading>) -> Result<Complex64> {
    let d = rep.fiber_dim();
    if e.shape() != (d, d) {
        return Err(Error::Shape("endomorphisms do not fit the module".into()));
    }
    let k = ed_kernel(b0, rep)?;
    let tr = match chi {
        Some(g) => trace_product(&g.mono.mul_dense(e), &k),
        None => trace_product(e, &k),
    };
    Ok(tr * (nu(rep.n()) / 2.0))
}
