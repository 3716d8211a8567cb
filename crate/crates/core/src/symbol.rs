//! Matrix-valued polynomial symbols in normal coordinates.
//!
//! A symbol is a sum of terms `M x^alpha xi^beta |xi|^p` grouped by
//! homogeneity `|beta| + p` in `xi`. Only the Taylor part of degree at most
//! [`MAX_X_DEGREE`] in `x` is kept. Every homogeneous piece records the
//! largest `x`-degree up to which its terms are known exactly, and the symbol
//! records the lowest homogeneity it resolves, so that compositions never
//! return under-resolved data silently.
//!
//! Conventions: `sigma(d_a) = i xi_a`, and
//! `sigma(AB) = sum_alpha (1/alpha!) d_xi^alpha sigma(A) (-i)^|alpha| d_x^alpha sigma(B)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::jets::{GeometryJet, LaplaceJet, OneFormJet, PerturbationJet};
use crate::linalg::{c, max_abs, Mat, I, ONE, ZERO};
use crate::tensor::{sphere_monomial_integral, MAX_DIM};

pub const MAX_X_DEGREE: u8 = 2;

/// Validity marker for a piece whose every `x`-coefficient is exact.
pub const EXACT: i8 = i8::MAX;

/// `x^x xi^xi |xi|^norm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monom {
    pub x: [u8; MAX_DIM],
    pub xi: [u8; MAX_DIM],
    pub norm: i16,
}

impl Monom {
    pub const ONE: Monom = Monom { x: [0; MAX_DIM], xi: [0; MAX_DIM], norm: 0 };

    pub fn x_degree(&self) -> u8 {
        self.x.iter().sum()
    }

    pub fn xi_degree(&self) -> u8 {
        self.xi.iter().sum()
    }

    pub fn hom(&self) -> i32 {
        self.xi_degree() as i32 + self.norm as i32
    }

    pub fn with_xi(mut self, a: usize) -> Self {
        self.xi[a] += 1;
        self
    }

    pub fn with_x(mut self, a: usize) -> Self {
        self.x[a] += 1;
        self
    }

    pub fn with_norm(mut self, p: i16) -> Self {
        self.norm += p;
        self
    }

    fn times(&self, o: &Monom) -> Monom {
        let mut out = *self;
        for k in 0..MAX_DIM {
            out.x[k] += o.x[k];
            out.xi[k] += o.xi[k];
        }
        out.norm += o.norm;
        out
    }

    fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        let mut v = 1.0;
        for (k, &xk) in x.iter().enumerate() {
            v *= xk.powi(self.x[k] as i32);
        }
        let mut r2 = 0.0;
        for (k, &q) in xi.iter().enumerate() {
            v *= q.powi(self.xi[k] as i32);
            r2 += q * q;
        }
        if self.norm != 0 {
            v *= r2.sqrt().powi(self.norm as i32);
        }
        v
    }
}

/// The terms of one homogeneity together with their `x`-validity.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub terms: BTreeMap<Monom, Mat>,
    pub valid_x: i8,
}

impl Piece {
    fn new(valid_x: i8) -> Self {
        Piece { terms: BTreeMap::new(), valid_x }
    }

    fn add_term(&mut self, m: Monom, coef: Mat) {
        match self.terms.get_mut(&m) {
            Some(acc) => *acc += coef,
            None => {
                self.terms.insert(m, coef);
            }
        }
    }

    fn prune(&mut self) {
        let keep = self.valid_x;
        self.terms.retain(|m, v| (m.x_degree() as i32) <= keep as i32 && max_abs(v) != 0.0);
    }

    fn is_exact_zero(&self) -> bool {
        self.valid_x == EXACT && self.terms.is_empty()
    }
}

/// A truncated symbol over `R^n` with `d x d` matrix coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPoly {
    n: usize,
    d: usize,
    pieces: BTreeMap<i32, Piece>,
    /// Lowest homogeneity that is resolved. Absent pieces at or above it are zero.
    min_hom: i32,
    /// Whether every piece below `min_hom` is exactly zero.
    tail_exact: bool,
    /// Polynomial in `xi` (a differential operator).
    differential: bool,
}

fn d_xi(m: &Monom, coef: Complex64, a: usize) -> Vec<(Monom, Complex64)> {
    let mut out = Vec::with_capacity(2);
    if m.xi[a] > 0 {
        let mut t = *m;
        t.xi[a] -= 1;
        out.push((t, coef * m.xi[a] as f64));
    }
    if m.norm != 0 {
        let mut t = *m;
        t.xi[a] += 1;
        t.norm -= 2;
        out.push((t, coef * m.norm as f64));
    }
    out
}

fn d_x(m: &Monom, coef: Complex64, a: usize) -> Option<(Monom, Complex64)> {
    if m.x[a] == 0 {
        return None;
    }
    let mut t = *m;
    t.x[a] -= 1;
    Some((t, coef * m.x[a] as f64))
}

/// Multi-indices of order 0, 1 and 2 with the factor `(-i)^|alpha| / alpha!`.
fn derivative_orders(n: usize) -> Vec<(Vec<usize>, Complex64)> {
    let mut out = vec![(vec![], ONE)];
    for a in 0..n {
        out.push((vec![a], -I));
    }
    for a in 0..n {
        for b in a..n {
            let fact = if a == b { 0.5 } else { 1.0 };
            out.push((vec![a, b], c(-fact)));
        }
    }
    out
}

/// Derivative of a piece along the listed `xi` (or `x`) axes, as scalar
/// multipliers per monomial, keyed on the source monomial.
fn derive_piece(piece: &Piece, axes: &[usize], in_xi: bool) -> Vec<(Monom, Complex64, Monom)> {
    let mut out = Vec::new();
    for m in piece.terms.keys() {
        let mut cur = vec![(*m, ONE)];
        for &a in axes {
            let mut next = Vec::new();
            for (t, s) in cur {
                if in_xi {
                    next.extend(d_xi(&t, s, a));
                } else if let Some(r) = d_x(&t, s, a) {
                    next.push(r);
                }
            }
            cur = next;
        }
        for (t, s) in cur {
            out.push((*m, s, t));
        }
    }
    out
}

impl SymbolPoly {
    pub fn zero(n: usize, d: usize) -> Self {
        SymbolPoly { n, d, pieces: BTreeMap::new(), min_hom: i32::MIN / 4, tail_exact: true, differential: true }
    }

    /// Constant endomorphism as an order-zero symbol with exactly known `x`-dependence.
    pub fn constant(n: usize, m: Mat) -> Self {
        let d = m.nrows();
        let mut s = Self::zero(n, d);
        let mut p = Piece::new(EXACT);
        p.add_term(Monom::ONE, m);
        p.prune();
        s.pieces.insert(0, p);
        s.min_hom = 0;
        s
    }

    pub fn identity(n: usize, d: usize) -> Self {
        Self::constant(n, Mat::identity(d, d))
    }

    /// `|xi|^-2 Id`, exact.
    pub fn inverse_norm_square(n: usize, d: usize) -> Self {
        let mut s = Self::zero(n, d);
        let mut p = Piece::new(EXACT);
        p.add_term(Monom::ONE.with_norm(-2), Mat::identity(d, d));
        s.pieces.insert(-2, p);
        s.min_hom = -2;
        s.differential = false;
        s
    }

    /// Builds a differential symbol from explicit pieces.
    pub fn from_terms(n: usize, d: usize, terms: Vec<(Monom, Mat)>, validity: &[(i32, i8)]) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::Dimension(n, "2..=8"));
        }
        let mut s = Self::zero(n, d);
        for (h, v) in validity {
            s.pieces.insert(*h, Piece::new(*v));
        }
        for (m, coef) in terms {
            if coef.shape() != (d, d) {
                return Err(Error::Shape("symbol coefficient of wrong size".into()));
            }
            if m.x_degree() > MAX_X_DEGREE {
                return Err(Error::Truncation(format!("x-degree {} above {}", m.x_degree(), MAX_X_DEGREE)));
            }
            if m.norm != 0 {
                s.differential = false;
            }
            s.pieces.entry(m.hom()).or_insert_with(|| Piece::new(EXACT)).add_term(m, coef);
        }
        for p in s.pieces.values_mut() {
            p.prune();
        }
        s.min_hom = s.pieces.keys().next().copied().unwrap_or(0).min(0);
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fiber_dim(&self) -> usize {
        self.d
    }

    pub fn min_hom(&self) -> i32 {
        self.min_hom
    }

    pub fn max_hom(&self) -> Option<i32> {
        self.pieces.iter().rev().find(|(_, p)| !p.is_exact_zero()).map(|(h, _)| *h)
    }

    pub fn is_differential(&self) -> bool {
        self.differential
    }

    pub fn tail_exact(&self) -> bool {
        self.tail_exact
    }

    pub fn piece(&self, hom: i32) -> Option<&Piece> {
        self.pieces.get(&hom)
    }

    pub fn pieces(&self) -> impl Iterator<Item = (i32, &Piece)> {
        self.pieces.iter().map(|(h, p)| (*h, p))
    }

    /// `x`-validity of the piece of homogeneity `hom`, `None` if unresolved.
    pub fn validity(&self, hom: i32) -> Option<i8> {
        match self.pieces.get(&hom) {
            Some(p) => Some(p.valid_x),
            None if hom >= self.min_hom || self.tail_exact => Some(EXACT),
            None => None,
        }
    }

    pub fn validity_pattern(&self) -> Vec<(i32, i8)> {
        self.pieces.iter().rev().map(|(h, p)| (*h, p.valid_x)).collect()
    }

    fn check_compatible(&self, other: &SymbolPoly) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::Shape(format!("symbols over (n, d) = ({}, {}) and ({}, {})", self.n, self.d, other.n, other.d)));
        }
        Ok(())
    }

    pub fn scale(&self, s: Complex64) -> SymbolPoly {
        let mut out = self.clone();
        for p in out.pieces.values_mut() {
            for v in p.terms.values_mut() {
                *v *= s;
            }
            p.prune();
        }
        out
    }

    pub fn add(&self, other: &SymbolPoly) -> Result<SymbolPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.min_hom = self.min_hom.max(other.min_hom);
        out.tail_exact = self.tail_exact && other.tail_exact;
        out.differential = self.differential && other.differential;
        for (h, p) in &other.pieces {
            let dst = out.pieces.entry(*h).or_insert_with(|| Piece::new(EXACT));
            dst.valid_x = dst.valid_x.min(p.valid_x);
            for (m, v) in &p.terms {
                dst.add_term(*m, v.clone());
            }
        }
        let lo = out.min_hom;
        if !out.tail_exact {
            out.pieces.retain(|h, _| *h >= lo);
        }
        for p in out.pieces.values_mut() {
            p.prune();
        }
        Ok(out)
    }

    /// Product of coefficients without derivative terms.
    pub fn pointwise_mul(&self, other: &SymbolPoly, drop_below: i32) -> Result<SymbolPoly> {
        compose_impl(self, other, drop_below, 0)
    }

    /// Terms of every resolved piece evaluated at `(x, xi)`.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.d, self.d);
        for p in self.pieces.values() {
            for (m, v) in &p.terms {
                out += v * c(m.eval(x, xi));
            }
        }
        out
    }

    pub fn eval_piece(&self, hom: i32, x: &[f64], xi: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.d, self.d);
        if let Some(p) = self.pieces.get(&hom) {
            for (m, v) in &p.terms {
                out += v * c(m.eval(x, xi));
            }
        }
        out
    }

    /// Coefficient of a given monomial.
    pub fn coefficient(&self, m: &Monom) -> Mat {
        self.pieces.get(&m.hom()).and_then(|p| p.terms.get(m)).cloned().unwrap_or_else(|| Mat::zeros(self.d, self.d))
    }

    /// Drops every term with positive `x`-degree.
    pub fn at_origin(&self) -> SymbolPoly {
        let mut out = self.clone();
        for p in out.pieces.values_mut() {
            p.terms.retain(|m, _| m.x_degree() == 0);
            p.valid_x = p.valid_x.min(0);
        }
        out
    }

    /// Term list as JSON, coefficients as nested `[re, im]` pairs.
    pub fn to_json(&self) -> Value {
        let n = self.n;
        let pieces: Vec<Value> = self
            .pieces
            .iter()
            .rev()
            .map(|(h, p)| {
                let terms: Vec<Value> = p
                    .terms
                    .iter()
                    .map(|(m, v)| {
                        let rows: Vec<Vec<[f64; 2]>> =
                            (0..v.nrows()).map(|r| (0..v.ncols()).map(|cc| [v[(r, cc)].re, v[(r, cc)].im]).collect()).collect();
                        json!({"x": &m.x[..n], "xi": &m.xi[..n], "norm_power": m.norm, "coef": rows})
                    })
                    .collect();
                let valid = if p.valid_x == EXACT { json!("exact") } else { json!(p.valid_x) };
                json!({"homogeneity": h, "valid_x_degree": valid, "terms": terms})
            })
            .collect();
        json!({"n": n, "fiber_dim": self.d, "min_homogeneity": self.min_hom, "pieces": pieces})
    }
}

/// Symbol of the composition, resolved down to homogeneity `drop_below`
/// where the inputs allow it.
pub fn compose(a: &SymbolPoly, b: &SymbolPoly, drop_below: i32) -> Result<SymbolPoly> {
    compose_impl(a, b, drop_below, 2)
}

fn compose_impl(a: &SymbolPoly, b: &SymbolPoly, drop_below: i32, max_order: usize) -> Result<SymbolPoly> {
    a.check_compatible(b)?;
    let n = a.n;
    let d = a.d;
    let mut out = SymbolPoly::zero(n, d);
    out.differential = a.differential && b.differential;
    let (Some(amax), Some(bmax)) = (a.max_hom(), b.max_hom()) else {
        out.tail_exact = a.tail_exact && b.tail_exact;
        out.min_hom = if out.tail_exact { out.min_hom } else { drop_below };
        return Ok(out);
    };
    let mut lo = drop_below;
    if !a.tail_exact {
        lo = lo.max(a.min_hom + bmax);
    }
    if !b.tail_exact {
        lo = lo.max(b.min_hom + amax);
    }
    out.min_hom = lo;
    out.tail_exact = a.tail_exact && b.tail_exact;

    let orders: Vec<(Vec<usize>, Complex64)> = derivative_orders(n).into_iter().filter(|(al, _)| al.len() <= max_order).collect();
    let mut dropped_x = false;
    let mut dropped_low = false;
    let mut validity: BTreeMap<i32, i8> = BTreeMap::new();
    let mark = |validity: &mut BTreeMap<i32, i8>, h: i32, v: i8| {
        let e = validity.entry(h).or_insert(EXACT);
        *e = (*e).min(v);
    };

    for (&j, pa) in &a.pieces {
        for (&k, pb) in &b.pieces {
            if pa.is_exact_zero() || pb.is_exact_zero() {
                continue;
            }
            // Orders above two: the x-derivative of b vanishes exactly only
            // when b's x-expansion is exact.
            if max_order == 2 && pb.valid_x != EXACT && !(a.differential && j < 3) {
                let mut l = 3;
                while j + k - l >= lo {
                    mark(&mut validity, j + k - l, -1);
                    l += 1;
                }
            }
            for (alpha, fac) in &orders {
                let l = alpha.len() as i32;
                let h = j + k - l;
                if a.differential && l > j {
                    continue;
                }
                if h < lo {
                    dropped_low = true;
                    continue;
                }
                let vb = if pb.valid_x == EXACT { EXACT } else { pb.valid_x - l as i8 };
                mark(&mut validity, h, pa.valid_x.min(vb));
                let da = derive_piece(pa, alpha, true);
                let db = derive_piece(pb, alpha, false);
                if da.is_empty() || db.is_empty() {
                    continue;
                }
                let piece = out.pieces.entry(h).or_insert_with(|| Piece::new(EXACT));
                for (ma, sa, ta) in &da {
                    let ca = &pa.terms[ma];
                    for (mb, sb, tb) in &db {
                        let m = ta.times(tb);
                        if m.x_degree() > MAX_X_DEGREE {
                            dropped_x = true;
                            continue;
                        }
                        let cb = &pb.terms[mb];
                        piece.add_term(m, ca * cb * (sa * sb * fac));
                    }
                }
            }
        }
    }
    if dropped_low {
        out.tail_exact = false;
    }
    for (h, v) in validity {
        let p = out.pieces.entry(h).or_insert_with(|| Piece::new(EXACT));
        p.valid_x = if dropped_x { v.min(MAX_X_DEGREE as i8) } else { v };
    }
    for p in out.pieces.values_mut() {
        if dropped_x {
            p.valid_x = p.valid_x.min(MAX_X_DEGREE as i8);
        }
        p.prune();
    }
    Ok(out)
}

/// Principal part `a2` of a Laplace-type symbol, split as `|xi|^2 Id + c`
/// with `c` vanishing at `x = 0`.
fn principal_correction(l: &SymbolPoly) -> Result<SymbolPoly> {
    let Some(p2) = l.piece(2) else {
        return Err(Error::NotElliptic("no second-order piece".into()));
    };
    let n = l.n;
    let d = l.d;
    let mut corr = SymbolPoly::zero(n, d);
    let mut piece = Piece::new(p2.valid_x);
    for (m, v) in &p2.terms {
        piece.add_term(*m, v.clone());
    }
    for a in 0..n {
        let mut m = Monom::ONE;
        m.xi[a] = 2;
        piece.add_term(m, -Mat::identity(d, d));
    }
    piece.prune();
    if piece.terms.keys().any(|m| m.x_degree() == 0) || piece.terms.keys().any(|m| m.norm != 0) {
        return Err(Error::NotElliptic("principal symbol is not |xi|^2 Id at the origin".into()));
    }
    if p2.valid_x < 0 {
        return Err(Error::NotElliptic("principal symbol is unresolved".into()));
    }
    corr.pieces.insert(2, piece);
    corr.min_hom = 2;
    Ok(corr)
}

/// Parametrix of `D^2` from the symbol of `D`, with homogeneous pieces
/// `-2, -3, -4`.
pub fn parametrix_inverse_square(d_symbol: &SymbolPoly) -> Result<SymbolPoly> {
    let l = compose(d_symbol, d_symbol, 0)?;
    parametrix_of_laplace(&l, 3)
}

/// Parametrix of a Laplace-type symbol with `pieces` homogeneous pieces
/// starting at `-2`.
pub fn parametrix_of_laplace(l: &SymbolPoly, pieces: usize) -> Result<SymbolPoly> {
    if pieces == 0 {
        return Err(Error::Truncation("at least one parametrix piece".into()));
    }
    let n = l.n;
    let d = l.d;
    let corr = principal_correction(l)?;
    let inv2 = SymbolPoly::inverse_norm_square(n, d);
    // b0 = |xi|^-2 - c |xi|^-4 + c^2 |xi|^-6, exact to x-degree 2 since c = O(x).
    let c_over = corr.pointwise_mul(&inv2, i32::MIN / 4)?.pointwise_mul(&inv2, i32::MIN / 4)?;
    let mut b0 = inv2.add(&c_over.scale(-ONE))?;
    let c2 = corr.pointwise_mul(&c_over, i32::MIN / 4)?.pointwise_mul(&inv2, i32::MIN / 4)?;
    b0 = b0.add(&c2)?;
    if corr.piece(2).is_some_and(|p| !p.terms.is_empty()) {
        for p in b0.pieces.values_mut() {
            p.valid_x = p.valid_x.min(MAX_X_DEGREE as i8);
        }
    }
    let mut b = b0.clone();
    b.tail_exact = true;
    for j in 1..pieces as i32 {
        let r = compose(l, &b, -j)?;
        let rest = match r.piece(-j) {
            Some(p) => p.clone(),
            None => Piece::new(EXACT),
        };
        let mut rest_sym = SymbolPoly::zero(n, d);
        rest_sym.differential = false;
        rest_sym.pieces.insert(-j, rest);
        rest_sym.min_hom = -j;
        let next = b0.pointwise_mul(&rest_sym, i32::MIN / 4)?.scale(-ONE);
        let piece = next.piece(-2 - j).cloned().unwrap_or_else(|| {
            let v = r.validity(-j).unwrap_or(-1).min(b0.validity(-2).unwrap_or(-1));
            Piece::new(v)
        });
        b.pieces.insert(-2 - j, piece);
        b.min_hom = -2 - j;
    }
    b.tail_exact = false;
    b.differential = false;
    Ok(b)
}

/// `k`-fold composition keeping as many homogeneous pieces as `b` carries.
pub fn power_symbol(b: &SymbolPoly, k: usize) -> Result<SymbolPoly> {
    if k == 0 {
        return Err(Error::Truncation("power must be positive".into()));
    }
    let Some(top) = b.max_hom() else {
        return Ok(b.clone());
    };
    let span = top - b.min_hom;
    let mut out = b.clone();
    for step in 2..=k as i32 {
        let target = step * top - span;
        out = compose(&out, b, target)?;
        if out.min_hom > target {
            return Err(Error::Truncation(format!("power {step} resolves homogeneity down to {} only, {target} requested", out.min_hom)));
        }
    }
    Ok(out)
}

/// Cosphere integral of the traced homogeneity `-n` part of `op o inv` at `x = 0`.
pub fn raw_wres(op: &SymbolPoly, inv: &SymbolPoly) -> Result<Complex64> {
    let n = op.n as i32;
    let prod = compose(op, inv, -n)?;
    if prod.min_hom > -n {
        return Err(Error::Truncation(format!("composition resolves homogeneity down to {} only, {} needed", prod.min_hom, -n)));
    }
    let Some(piece) = prod.piece(-n) else {
        return Ok(ZERO);
    };
    if piece.valid_x < 0 {
        return Err(Error::Truncation("homogeneity -n piece is unresolved at x = 0".into()));
    }
    let mut acc = ZERO;
    for (m, v) in &piece.terms {
        if m.x_degree() != 0 {
            continue;
        }
        let degs: Vec<u32> = m.xi[..op.n].iter().map(|&e| e as u32).collect();
        let w = sphere_monomial_integral(&degs)?;
        if w != 0.0 {
            acc += v.trace() * w;
        }
    }
    Ok(acc)
}

/// Reads `(P, S, Q)` off a Laplace-type symbol
/// `|xi|^2 + O(x^2) xi xi + i (P_ab x^b + S_a) xi_a + Q`.
pub fn laplace_data(l: &SymbolPoly) -> Result<LaplaceJet> {
    principal_correction(l)?;
    let n = l.n;
    let d = l.d;
    if l.validity(1).unwrap_or(-1) < 1 || l.validity(0).unwrap_or(-1) < 0 {
        return Err(Error::Truncation("Laplace data needs the order-one piece to x-degree 1".into()));
    }
    let mut out = LaplaceJet::zero(n, d);
    let mi = -I;
    for a in 0..n {
        let xa = Monom::ONE.with_xi(a);
        out.s[a] = l.coefficient(&xa) * mi;
        for b in 0..n {
            out.p[a][b] = l.coefficient(&xa.with_x(b)) * mi;
        }
    }
    out.q = l.coefficient(&Monom::ONE);
    Ok(out)
}

/// Symbol of `D = i gamma^a (d_a + curvature terms) + B` in normal
/// coordinates: `-gamma^a xi_a + (1/6) gamma^a R_abcd x^b x^c xi_d
/// - (i/4) gamma^a Ric_ab x^b + B0 + B_a x^a`.
pub fn dirac_symbol(rep: &CliffordRep, geom: Option<&GeometryJet>, b: &PerturbationJet) -> Result<SymbolPoly> {
    b.check_shape(rep)?;
    let n = rep.n();
    let d = rep.fiber_dim();
    let g = rep.gammas();
    let mut terms = Vec::new();
    for a in 0..n {
        terms.push((Monom::ONE.with_xi(a), -g[a].clone()));
    }
    let curved = geom.is_some_and(|gj| gj.riemann.max_norm() > 0.0);
    if let Some(gj) = geom {
        if gj.n() != n {
            return Err(Error::Shape("geometry and module dimensions differ".into()));
        }
        for a in 0..n {
            for bb in 0..n {
                for cc in 0..n {
                    for dd in 0..n {
                        let r = gj.riemann_at(a, bb, cc, dd);
                        if r != 0.0 {
                            terms.push((Monom::ONE.with_x(bb).with_x(cc).with_xi(dd), &g[a] * c(r / 6.0)));
                        }
                    }
                }
                let ric = gj.ricci_at(a, bb);
                if ric != 0.0 {
                    terms.push((Monom::ONE.with_x(bb), &g[a] * (I * (-ric / 4.0))));
                }
            }
        }
    }
    terms.push((Monom::ONE, b.b0.clone()));
    for (a, ba) in b.ba.iter().enumerate() {
        terms.push((Monom::ONE.with_x(a), ba.clone()));
    }
    let jet_zero = b.max_norm() == 0.0;
    let v1 = if curved { 2 } else { EXACT };
    let v0 = if curved || !jet_zero { 1 } else { EXACT };
    SymbolPoly::from_terms(n, d, terms, &[(1, v1), (0, v0)])
}

/// Clifford multiplication by a one-form jet, `(w_b + w_bc x^c) gamma^b`.
pub fn one_form_symbol(rep: &CliffordRep, w: &OneFormJet) -> Result<SymbolPoly> {
    let n = rep.n();
    if w.n() != n {
        return Err(Error::Shape("one-form and module dimensions differ".into()));
    }
    let mut terms = vec![(Monom::ONE, rep.one_form(&w.values()))];
    for cc in 0..n {
        let col: Vec<Complex64> = (0..n).map(|bb| w.d(bb, cc)).collect();
        if col.iter().any(|z| z.norm() != 0.0) {
            terms.push((Monom::ONE.with_x(cc), rep.one_form(&col)));
        }
    }
    SymbolPoly::from_terms(n, rep.fiber_dim(), terms, &[(0, 1)])
}

/// `F^ab xi_a xi_b + i G^a xi_a + H`, known at `x = 0` only.
pub fn operator_data_symbol(n: usize, f: &[Vec<Mat>], g: &[Mat], h: &Mat) -> Result<SymbolPoly> {
    let d = h.nrows();
    if f.len() != n || g.len() != n || f.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("operator data of wrong length".into()));
    }
    let mut terms = Vec::new();
    for a in 0..n {
        for b in 0..n {
            terms.push((Monom::ONE.with_xi(a).with_xi(b), f[a][b].clone()));
        }
        terms.push((Monom::ONE.with_xi(a), &g[a] * I));
    }
    terms.push((Monom::ONE, h.clone()));
    SymbolPoly::from_terms(n, d, terms, &[(2, 0), (1, 0), (0, 0)])
}

/// Differences between the `B`-dependent parts of `sigma(D^-2k)` at `x = 0`
/// and the closed expressions
/// `k xi_a |xi|^(-2k-2) {gamma^a, B0}` (homogeneity `-2k-1`) and
/// `-k |xi|^(-2k-2) (i gamma^a B_a + B0^2)
///  + k(k+1) |xi|^(-2k-4) (i {gamma^a, B_b} + (1/2){gamma^a, B0}{gamma^b, B0}) xi_a xi_b`
/// (homogeneity `-2k-2`), as max-norm residuals over the sample covectors.
pub fn inverse_power_delta_residuals(rep: &CliffordRep, b: &PerturbationJet, k: usize, samples: &[Vec<f64>]) -> Result<[f64; 2]> {
    let n = rep.n();
    let d = rep.fiber_dim();
    let g = rep.gammas();
    let full = power_symbol(&parametrix_inverse_square(&dirac_symbol(rep, None, b)?)?, k)?;
    let bare = power_symbol(&parametrix_inverse_square(&dirac_symbol(rep, None, &PerturbationJet::zero(d, n))?)?, k)?;
    let kf = k as f64;
    let ac0: Vec<Mat> = g.iter().map(|ga| ga * &b.b0 + &b.b0 * ga).collect();
    let gb: Mat = (0..n).fold(Mat::zeros(d, d), |acc, a| acc + &g[a] * &b.ba[a]);
    let x0 = vec![0.0; n];
    let hom = -2 * k as i32;
    let mut out = [0.0f64; 2];
    for xi in samples {
        if xi.len() != n {
            return Err(Error::Shape("sample covector of wrong length".into()));
        }
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        let odd = full.eval_piece(hom - 1, &x0, xi) - bare.eval_piece(hom - 1, &x0, xi);
        let mut want = Mat::zeros(d, d);
        for a in 0..n {
            want += &ac0[a] * c(kf * xi[a] * r2.powf(-kf - 1.0));
        }
        out[0] = out[0].max(max_abs(&(odd - want)));
        let even = full.eval_piece(hom - 2, &x0, xi) - bare.eval_piece(hom - 2, &x0, xi);
        let mut want = -(&gb * I + &b.b0 * &b.b0) * c(kf * r2.powf(-kf - 1.0));
        let w2 = kf * (kf + 1.0) * r2.powf(-kf - 2.0);
        for a in 0..n {
            for bb in 0..n {
                let m = (&g[a] * &b.ba[bb] + &b.ba[bb] * &g[a]) * I + &ac0[a] * &ac0[bb] * c(0.5);
                want += m * c(w2 * xi[a] * xi[bb]);
            }
        }
        out[1] = out[1].max(max_abs(&(even - want)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::ModuleKind;
    use crate::jets::{random_geometry_jet, seeded_rng, spin_laplace_jet};
    use crate::linalg::max_abs_diff;

    fn rep(n: usize) -> CliffordRep {
        CliffordRep::build(ModuleKind::Spin, n).unwrap()
    }

    #[test]
    fn identity_composition() {
        let r = rep(4);
        let mut rng = seeded_rng(3);
        let b = PerturbationJet::random(4, 4, &mut rng);
        let dsym = dirac_symbol(&r, None, &b).unwrap();
        let id = SymbolPoly::identity(4, 4);
        let prod = compose(&id, &dsym, -10).unwrap();
        let x = [0.1, -0.2, 0.3, 0.05];
        let xi = [0.3, 0.4, -0.1, 0.9];
        assert!(max_abs_diff(&prod.eval(&x, &xi), &dsym.eval(&x, &xi)) < 1e-14);
    }

    #[test]
    fn flat_dirac_squares_to_norm() {
        let r = rep(4);
        let dsym = dirac_symbol(&r, None, &PerturbationJet::zero(4, 4)).unwrap();
        let l = compose(&dsym, &dsym, -10).unwrap();
        let xi = [0.3, 0.4, -0.1, 0.9];
        let n2: f64 = xi.iter().map(|v| v * v).sum();
        assert!(max_abs_diff(&l.eval(&[0.0; 4], &xi), &(r.identity() * c(n2))) < 1e-14);
        let b = parametrix_inverse_square(&dsym).unwrap();
        assert_eq!(b.validity_pattern(), vec![(-2, EXACT), (-3, EXACT), (-4, EXACT)]);
        assert!(b.piece(-3).unwrap().terms.is_empty());
    }

    #[test]
    fn product_rule_term() {
        let n = 2;
        let m = Mat::identity(1, 1);
        let a = SymbolPoly::from_terms(n, 1, vec![(Monom::ONE.with_xi(0), m.clone())], &[]).unwrap();
        let b = SymbolPoly::from_terms(n, 1, vec![(Monom::ONE.with_x(0), m)], &[]).unwrap();
        let p = compose(&a, &b, -5).unwrap();
        // xi_0 x_0 - i
        assert_eq!(p.coefficient(&Monom::ONE)[(0, 0)], -I);
        assert_eq!(p.coefficient(&Monom::ONE.with_x(0).with_xi(0))[(0, 0)], ONE);
    }

    #[test]
    fn curved_spin_laplace_data() {
        for n in [2, 4] {
            let r = rep(n);
            let g = random_geometry_jet(n, 9);
            let dsym = dirac_symbol(&r, Some(&g), &PerturbationJet::zero(r.fiber_dim(), n)).unwrap();
            let l = compose(&dsym, &dsym, 0).unwrap();
            let lj = laplace_data(&l).unwrap();
            let expected = spin_laplace_jet(&g, &r).unwrap();
            for a in 0..n {
                assert!(max_abs(&lj.s[a]) < 1e-13);
                for b in 0..n {
                    assert!(max_abs_diff(&lj.p[a][b], &expected.p[a][b]) < 1e-12, "P mismatch n={n}");
                }
            }
            assert!(max_abs_diff(&lj.q, &expected.q) < 1e-12, "Q mismatch n={n}");
            let b = parametrix_inverse_square(&dsym).unwrap();
            assert_eq!(b.validity_pattern(), vec![(-2, 2), (-3, 1), (-4, 0)]);
        }
    }

    #[test]
    fn parametrix_inverts() {
        let r = rep(4);
        let mut rng = seeded_rng(5);
        let b = PerturbationJet::random(4, 4, &mut rng);
        let g = random_geometry_jet(4, 6);
        let dsym = dirac_symbol(&r, Some(&g), &b).unwrap();
        let l = compose(&dsym, &dsym, 0).unwrap();
        let inv = parametrix_of_laplace(&l, 3).unwrap();
        let prod = compose(&l, &inv, -2).unwrap();
        let xi = [0.6, -0.3, 0.2, 0.7];
        let x0 = [0.0; 4];
        let id = r.identity();
        assert!(max_abs_diff(&prod.eval_piece(0, &x0, &xi), &id) < 1e-12);
        assert!(max_abs(&prod.eval_piece(-1, &x0, &xi)) < 1e-12);
        assert!(max_abs(&prod.eval_piece(-2, &x0, &xi)) < 1e-12);
    }

    #[test]
    fn inverse_power_deltas() {
        let mut rng = seeded_rng(8);
        let samples = vec![vec![0.6, -0.3, 0.2, 0.7], vec![1.1, 0.4, -0.9, 0.05]];
        let r = rep(4);
        let b = PerturbationJet::random(4, 4, &mut rng);
        for k in [1, 2] {
            let res = inverse_power_delta_residuals(&r, &b, k, &samples).unwrap();
            assert!(res[0] < 1e-10 && res[1] < 1e-10, "k={k}: {res:?}");
        }
    }

    #[test]
    fn json_dump_has_pieces() {
        let s = SymbolPoly::identity(2, 2);
        let v = s.to_json();
        assert_eq!(v["pieces"][0]["homogeneity"], 0);
        assert_eq!(v["pieces"][0]["terms"][0]["coef"][0][0][0], 1.0);
    }
}
