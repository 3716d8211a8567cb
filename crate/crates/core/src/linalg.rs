//! Dense complex matrices and sparse monomial (generalized permutation)
//! matrices. Clifford generators, exterior raising/lowering operators and
//! all their products are monomial, so traces and products of them cost
//! `O(d)` instead of `O(d^3)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Mat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> Mat {
    Mat::identity(d, d)
}

pub fn zeros(d: usize) -> Mat {
    Mat::zeros(d, d)
}

pub fn anticomm(a: &Mat, b: &Mat) -> Mat {
    a * b + b * a
}

pub fn comm(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn trace(a: &Mat) -> Complex64 {
    a.trace()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &Mat, b: &Mat) -> Complex64 {
    let d = a.nrows();
    let mut t = ZERO;
    for i in 0..d {
        for k in 0..d {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermiticity_residual(a: &Mat) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// A matrix with at most one nonzero entry per column: column `j` holds
/// `coef[j]` in row `row[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    row: Vec<usize>,
    coef: Vec<Complex64>,
}

impl Monomial {
    pub fn identity(d: usize) -> Self {
        Monomial { row: (0..d).collect(), coef: vec![ONE; d] }
    }

    pub fn zero(d: usize) -> Self {
        Monomial { row: (0..d).collect(), coef: vec![ZERO; d] }
    }

    /// Builds `M` with `M e_j = coef[j] e_{row[j]}`.
    pub fn new(row: Vec<usize>, coef: Vec<Complex64>) -> Self {
        assert_eq!(row.len(), coef.len());
        assert!(row.iter().all(|&r| r < row.len()));
        Monomial { row, coef }
    }

    /// Recovers the monomial structure of a dense matrix, if it has one.
    pub fn from_dense(m: &Mat) -> Option<Self> {
        let d = m.ncols();
        let mut row = (0..d).collect::<Vec<_>>();
        let mut coef = vec![ZERO; d];
        for j in 0..d {
            for i in 0..d {
                let z = m[(i, j)];
                if z != ZERO {
                    if coef[j] != ZERO {
                        return None;
                    }
                    row[j] = i;
                    coef[j] = z;
                }
            }
        }
        Some(Monomial { row, coef })
    }

    pub fn dim(&self) -> usize {
        self.row.len()
    }

    pub fn to_dense(&self) -> Mat {
        let d = self.dim();
        let mut m = zeros(d);
        for j in 0..d {
            if self.coef[j] != ZERO {
                m[(self.row[j], j)] = self.coef[j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Monomial {
        Monomial { row: self.row.clone(), coef: self.coef.iter().map(|z| z * s).collect() }
    }

    /// `self * other`.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let d = self.dim();
        let mut row = vec![0; d];
        let mut coef = vec![ZERO; d];
        for j in 0..d {
            let k = other.row[j];
            row[j] = self.row[k];
            coef[j] = self.coef[k] * other.coef[j];
        }
        Monomial { row, coef }
    }

    pub fn product<'a>(d: usize, factors: impl IntoIterator<Item = &'a Monomial>) -> Monomial {
        factors.into_iter().fold(Monomial::identity(d), |acc, f| acc.mul(f))
    }

    pub fn adjoint(&self) -> Monomial {
        let d = self.dim();
        let mut row: Vec<usize> = (0..d).collect();
        let mut coef = vec![ZERO; d];
        for j in 0..d {
            if self.coef[j] != ZERO {
                row[self.row[j]] = j;
                coef[self.row[j]] = self.coef[j].conj();
            }
        }
        Monomial { row, coef }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).filter(|&j| self.row[j] == j).map(|j| self.coef[j]).sum()
    }

    /// `Tr(self * other)` in `O(d)`.
    pub fn trace_mul(&self, other: &Monomial) -> Complex64 {
        (0..self.dim()).filter(|&j| self.row[other.row[j]] == j).map(|j| self.coef[other.row[j]] * other.coef[j]).sum()
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Monomial) -> Monomial {
        let (da, db) = (self.dim(), other.dim());
        let mut row = vec![0; da * db];
        let mut coef = vec![ZERO; da * db];
        for ja in 0..da {
            for jb in 0..db {
                let j = ja * db + jb;
                row[j] = self.row[ja] * db + other.row[jb];
                coef[j] = self.coef[ja] * other.coef[jb];
            }
        }
        Monomial { row, coef }
    }

    /// `Tr(self * a)` in `O(d)`.
    pub fn trace_with(&self, a: &Mat) -> Complex64 {
        (0..self.dim()).map(|k| self.coef[k] * a[(k, self.row[k])]).sum()
    }

    /// `self * a`.
    pub fn mul_dense(&self, a: &Mat) -> Mat {
        let d = self.dim();
        let mut out = zeros(d);
        for k in 0..d {
            let ck = self.coef[k];
            if ck == ZERO {
                continue;
            }
            let r = self.row[k];
            for j in 0..d {
                out[(r, j)] += ck * a[(k, j)];
            }
        }
        out
    }

    /// `a * self`.
    pub fn dense_mul(&self, a: &Mat) -> Mat {
        let d = self.dim();
        let mut out = zeros(d);
        for j in 0..d {
            let cj = self.coef[j];
            if cj == ZERO {
                continue;
            }
            let r = self.row[j];
            for i in 0..d {
                out[(i, j)] += a[(i, r)] * cj;
            }
        }
        out
    }

    /// `acc += s * self`.
    pub fn add_scaled_to(&self, acc: &mut Mat, s: Complex64) {
        for j in 0..self.dim() {
            if self.coef[j] != ZERO {
                acc[(self.row[j], j)] += s * self.coef[j];
            }
        }
    }
}
