//! Dense multi-index tensors over a fixed dimension, permutation symbols and
//! moments of monomials over the unit sphere.
//!
//! All axis indices are 0-based.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 6;
pub const MAX_DIM: usize = 8;
/// Largest total degree accepted by [`sphere_monomial_integral`]. Symbol
/// compositions with curvature produce monomials up to degree ~16.
pub const MAX_MONOMIAL_DEGREE: u32 = 32;

/// Ordered list of axis indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(idx: impl Into<Vec<usize>>) -> Self {
        MultiIndex(idx.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Form indices must be strictly increasing.
    pub fn is_form_index(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.contains(&p)
    }

    /// The sequence `p` followed by `self`.
    pub fn prefixed(&self, p: usize) -> MultiIndex {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(p);
        v.extend_from_slice(&self.0);
        MultiIndex(v)
    }
}

/// Sign of the permutation `pi` with `lower = pi(upper)`, or 0 when `lower`
/// is not a rearrangement of `upper` (including repeated indices).
///
/// This is the generalized Kronecker symbol: with `upper = I` and
/// `lower = pJ` it gives the coefficients of the exterior raising operators.
pub fn generalized_delta(upper: &[usize], lower: &[usize]) -> i8 {
    if upper.len() != lower.len() {
        return 0;
    }
    let mut pos = Vec::with_capacity(lower.len());
    for l in lower {
        match upper.iter().position(|u| u == l) {
            Some(p) => pos.push(p),
            None => return 0,
        }
    }
    permutation_parity(&pos)
}

/// Parity of a sequence of distinct integers (0 if any repeat).
pub fn permutation_parity(seq: &[usize]) -> i8 {
    let mut sign = 1i8;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] == seq[j] {
                return 0;
            }
            if seq[i] > seq[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `epsilon^I_{pJ}`: +/-1 if `pJ` is a permutation of `I` with that parity.
pub fn epsilon_generalized(upper: &MultiIndex, p: usize, lower: &MultiIndex) -> i8 {
    generalized_delta(&upper.0, &lower.prefixed(p).0)
}

/// Levi-Civita symbol with `n = idx.len()` slots, normalized so that
/// `epsilon(0,1,...,n-1) = 1`.
pub fn levi_civita(idx: &[usize]) -> i8 {
    if idx.iter().any(|&i| i >= idx.len()) {
        return 0;
    }
    permutation_parity(idx)
}

/// Gamma function at `k/2` for a positive integer `k`.
fn gamma_half(k: u32) -> f64 {
    assert!(k > 0);
    let (mut x, mut g) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_volume(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n as u32)
}

/// Integral of `xi^degrees` over the unit sphere `S^{n-1}`, `n = degrees.len()`.
pub fn sphere_monomial_integral(degrees: &[u32]) -> Result<f64> {
    let total: u32 = degrees.iter().sum();
    if total > MAX_MONOMIAL_DEGREE {
        return Err(Error::DegreeOverflow(total, MAX_MONOMIAL_DEGREE));
    }
    if degrees.is_empty() {
        return Err(Error::Shape("empty degree list".into()));
    }
    if degrees.iter().any(|d| d % 2 == 1) {
        return Ok(0.0);
    }
    let n = degrees.len() as u32;
    let num: f64 = degrees.iter().map(|&d| gamma_half(d + 1)).product();
    Ok(2.0 * num / gamma_half(total + n))
}

/// Dense complex tensor of rank `rank` over `dim` axes, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    rank: usize,
    dim: usize,
    entries: Vec<Complex64>,
}

impl Tensor {
    pub fn zeros(rank: usize, dim: usize) -> Self {
        assert!(rank <= MAX_RANK && (1..=MAX_DIM).contains(&dim), "tensor shape out of range");
        Tensor { rank, dim, entries: vec![Complex64::new(0.0, 0.0); dim.pow(rank as u32)] }
    }

    pub fn from_fn(rank: usize, dim: usize, mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let mut t = Tensor::zeros(rank, dim);
        let mut idx = vec![0usize; rank];
        for flat in 0..t.entries.len() {
            t.unflatten_into(flat, &mut idx);
            t.entries[flat] = f(&idx);
        }
        t
    }

    pub fn from_real_fn(rank: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        Self::from_fn(rank, dim, |i| Complex64::new(f(i), 0.0))
    }

    /// Builds a tensor from raw row-major entries, validating the length.
    pub fn from_entries(rank: usize, dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rank > MAX_RANK || dim == 0 || dim > MAX_DIM {
            return Err(Error::Shape(format!("rank {rank}, dim {dim} out of range")));
        }
        if entries.len() != dim.pow(rank as u32) {
            return Err(Error::Shape(format!("rank {rank} dim {dim} needs {} entries, got {}", dim.pow(rank as u32), entries.len())));
        }
        Ok(Tensor { rank, dim, entries })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    fn unflatten_into(&self, mut flat: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.entries[self.flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Complex64) {
        let f = self.flatten(idx);
        self.entries[f] = v;
    }

    /// All multi-indices in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.entries.len()).map(move |flat| {
            let mut idx = vec![0; self.rank];
            self.unflatten_into(flat, &mut idx);
            idx
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Tensor {
        let mut t = self.clone();
        t.entries.iter_mut().for_each(|z| *z *= s);
        t
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_shape(other)?;
        let mut t = self.clone();
        t.entries.iter_mut().zip(&other.entries).for_each(|(a, b)| *a += b);
        Ok(t)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.rank != other.rank || self.dim != other.dim {
            return Err(Error::Shape(format!("({}, {}) vs ({}, {})", self.rank, self.dim, other.rank, other.dim)));
        }
        Ok(())
    }

    /// Tensor with axes reordered so that `out[i_0..] = self[i_{perm[0]}..]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.rank);
        Tensor::from_fn(self.rank, self.dim, |idx| {
            let src: Vec<usize> = perm.iter().map(|&p| idx[p]).collect();
            self.get(&src)
        })
    }

    /// Full contraction `sum_I self[I] * other[I]` (no conjugation).
    pub fn contract_full(&self, other: &Tensor) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum())
    }

    /// Largest deviation from `T[..i..j..] = sign * T[..j..i..]` over all
    /// pairs of the listed axes.
    pub fn symmetry_residual(&self, axes: (usize, usize), sign: f64) -> f64 {
        let mut perm: Vec<usize> = (0..self.rank).collect();
        perm.swap(axes.0, axes.1);
        let swapped = self.permute_axes(&perm);
        self.entries.iter().zip(&swapped.entries).map(|(a, b)| (a - b * sign).norm()).fold(0.0, f64::max)
    }

    /// Residual of total antisymmetry (checks every adjacent transposition).
    pub fn antisymmetry_residual(&self) -> f64 {
        (0..self.rank.saturating_sub(1)).map(|k| self.symmetry_residual((k, k + 1), -1.0)).fold(0.0, f64::max)
    }

    /// Approximate equality with absolute tolerance `tol` scaled by the max-norm
    /// of the operands (floored at 1).
    pub fn approx_eq(&self, other: &Tensor, tol: f64) -> bool {
        if self.rank != other.rank || self.dim != other.dim {
            return false;
        }
        let scale = self.max_norm().max(other.max_norm()).max(1.0);
        self.entries.iter().zip(&other.entries).all(|(a, b)| (a - b).norm() <= tol * scale)
    }
}

/// Cyclic average `(T_ijk + T_kij + T_jki) / 3`. For a torsion tensor
/// (antisymmetric in its first two slots) this is the totally antisymmetric
/// part.
pub fn antisymmetrize_torsion(t: &Tensor) -> Result<Tensor> {
    if t.rank() != 3 {
        return Err(Error::Rank { expected: 3, got: t.rank() });
    }
    let cyc = |a: usize, b: usize, c: usize| (t.get(&[a, b, c]) + t.get(&[c, a, b]) + t.get(&[b, c, a])) / 3.0;
    Ok(Tensor::from_fn(3, t.dim(), |i| {
        if i[0] == i[1] || i[1] == i[2] || i[0] == i[2] {
            return cyc(i[0], i[1], i[2]);
        }
        // evaluated on the sorted triple so that sign flips are exact
        let mut s = [i[0], i[1], i[2]];
        s.sort_unstable();
        cyc(s[0], s[1], s[2]) * permutation_parity(i) as f64
    }))
}

/// Vector part `V_j = T_jii` of a rank-3 tensor.
pub fn vector_part(t: &Tensor) -> Vec<Complex64> {
    let n = t.dim();
    (0..n).map(|j| (0..n).map(|i| t.get(&[j, i, i])).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn epsilon_examples() {
        // (1,2) with p=1, J=(2): identity.
        assert_eq!(epsilon_generalized(&MultiIndex::new([0, 1]), 0, &MultiIndex::new([1])), 1);
        assert_eq!(epsilon_generalized(&MultiIndex::new([0, 1]), 1, &MultiIndex::new([0])), -1);
        assert_eq!(epsilon_generalized(&MultiIndex::new([0, 2]), 1, &MultiIndex::new([0])), 0);
        // repeated index
        assert_eq!(epsilon_generalized(&MultiIndex::new([0, 1]), 0, &MultiIndex::new([0])), 0);
        assert_eq!(epsilon_generalized(&MultiIndex::new([0]), 0, &MultiIndex::new([])), 1);
    }

    #[test]
    fn levi_civita_values() {
        assert_eq!(levi_civita(&[0, 1, 2, 3]), 1);
        assert_eq!(levi_civita(&[1, 0, 2, 3]), -1);
        assert_eq!(levi_civita(&[1, 2, 3, 0]), -1);
        assert_eq!(levi_civita(&[0, 0, 2, 3]), 0);
    }

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume(6) - PI.powi(3)).abs() < 1e-13);
        assert!((sphere_volume(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn monomial_moments() {
        assert!((sphere_monomial_integral(&[0, 0, 0, 0]).unwrap() - sphere_volume(4)).abs() < 1e-13);
        assert_eq!(sphere_monomial_integral(&[1, 1, 0, 0]).unwrap(), 0.0);
        let q = sphere_monomial_integral(&[2, 0, 0, 0]).unwrap();
        assert!((q - sphere_volume(4) / 4.0).abs() < 1e-13);
        assert!(matches!(sphere_monomial_integral(&[20, 14, 0, 0]), Err(Error::DegreeOverflow(34, _))));
    }

    #[test]
    fn cyclic_average_examples() {
        let mut t = Tensor::zeros(3, 4);
        t.set(&[0, 0, 1], c(1.0));
        let a = antisymmetrize_torsion(&t).unwrap();
        assert!((a.get(&[0, 0, 1]) - c(1.0 / 3.0)).norm() < 1e-15);
        assert!(antisymmetrize_torsion(&Tensor::zeros(2, 4)).is_err());
    }

    #[test]
    fn tensor_entries_validate_length() {
        assert!(Tensor::from_entries(2, 3, vec![c(0.0); 8]).is_err());
        let t = Tensor::from_entries(2, 3, vec![c(1.0); 9]).unwrap();
        assert_eq!(t.get(&[2, 1]), c(1.0));
    }
}
