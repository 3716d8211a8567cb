//! Raw residues computed directly from composed symbols: the operator is
//! assembled symbol by symbol, composed with a parametrix power of `D^2`,
//! and its homogeneity `-n` part is integrated over the cosphere.

use num_complex::Complex64;

use crate::clifford::CliffordRep;
use crate::error::Result;
use crate::jets::{GeometryJet, LaplaceJet, OneFormJet, PerturbationJet};
use crate::linalg::Mat;
use crate::symbol::{compose, dirac_symbol, laplace_data, one_form_symbol, parametrix_inverse_square, power_symbol, raw_wres, SymbolPoly};

/// Symbol of `D`, of `D^2` and a parametrix of `D^2`.
#[derive(Debug, Clone)]
pub struct RawOracle {
    rep: CliffordRep,
    dirac: SymbolPoly,
    laplace: SymbolPoly,
    parametrix: SymbolPoly,
}

impl RawOracle {
    pub fn new(rep: &CliffordRep, geom: Option<&GeometryJet>, b: &PerturbationJet) -> Result<Self> {
        let dirac = dirac_symbol(rep, geom, b)?;
        let laplace = compose(&dirac, &dirac, 0)?;
        let parametrix = parametrix_inverse_square(&dirac)?;
        Ok(RawOracle { rep: rep.clone(), dirac, laplace, parametrix })
    }

    pub fn dirac(&self) -> &SymbolPoly {
        &self.dirac
    }

    pub fn laplace(&self) -> &SymbolPoly {
        &self.laplace
    }

    pub fn parametrix(&self) -> &SymbolPoly {
        &self.parametrix
    }

    pub fn laplace_jet(&self) -> Result<LaplaceJet> {
        laplace_data(&self.laplace)
    }

    /// Symbol of `D^-2k`.
    pub fn inverse_power(&self, k: usize) -> Result<SymbolPoly> {
        power_symbol(&self.parametrix, k)
    }

    /// `Wres(op D^-2k)`.
    pub fn wres(&self, op: &SymbolPoly, k: usize) -> Result<Complex64> {
        raw_wres(op, &self.inverse_power(k)?)
    }

    /// `Wres(op D^-n)`.
    pub fn wres_top(&self, op: &SymbolPoly) -> Result<Complex64> {
        self.wres(op, self.rep.m())
    }

    pub fn constant(&self, m: Mat) -> SymbolPoly {
        SymbolPoly::constant(self.rep.n(), m)
    }

    /// `(left) u {D, w} D`.
    pub fn einstein_operator(&self, u: &OneFormJet, w: &OneFormJet, left: Option<&Mat>) -> Result<SymbolPoly> {
        let n = self.rep.n();
        let uh = self.constant(self.rep.one_form(&u.values()));
        let wh = one_form_symbol(&self.rep, w)?;
        let floor = -4;
        let anti = compose(&self.dirac, &wh, floor)?.add(&compose(&wh, &self.dirac, floor)?)?;
        let mut op = compose(&compose(&uh, &anti, floor)?, &self.dirac, floor)?;
        if let Some(m) = left {
            op = compose(&SymbolPoly::constant(n, m.clone()), &op, floor)?;
        }
        Ok(op)
    }

    /// `E D`.
    pub fn ed_operator(&self, e: &Mat) -> Result<SymbolPoly> {
        compose(&self.constant(e.clone()), &self.dirac, -4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::ModuleKind;
    use crate::jets::{perturb_laplace_data, random_geometry_jet, random_matrix, seeded_rng, spin_laplace_jet};
    use crate::wres::{wres_density_ed, wres_density_general, OperatorData};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn ed_and_general_match_raw_on_flat_background() {
        let mut rng = seeded_rng(21);
        for kind in [ModuleKind::Spin, ModuleKind::Hodge] {
            for n in [2, 4] {
                let rep = CliffordRep::build(kind, n).unwrap();
                let d = rep.fiber_dim();
                let b = PerturbationJet::random(d, n, &mut rng);
                let oracle = RawOracle::new(&rep, None, &b).unwrap();
                let e = random_matrix(d, &mut rng);
                let raw = oracle.wres_top(&oracle.ed_operator(&e).unwrap()).unwrap();
                let formula = wres_density_ed(&e, &b.b0, &rep, None).unwrap();
                assert!(close(raw, formula, 1e-9), "ED {kind} n={n}: {raw} vs {formula}");

                let od = OperatorData::random(n, d, &mut rng);
                let raw = oracle.wres_top(&od.to_symbol().unwrap()).unwrap();
                let lj = perturb_laplace_data(&LaplaceJet::zero(n, d), &b, &rep).unwrap();
                let formula = wres_density_general(&od, &lj, &GeometryJet::flat(n)).unwrap();
                assert!(close(raw, formula, 1e-9), "general {kind} n={n}: {raw} vs {formula}");
            }
        }
    }

    #[test]
    fn general_matches_raw_with_curvature() {
        let mut rng = seeded_rng(22);
        for n in [2, 4] {
            let rep = CliffordRep::build(ModuleKind::Spin, n).unwrap();
            let d = rep.fiber_dim();
            let geom = random_geometry_jet(n, 40 + n as u64);
            let b = PerturbationJet::random(d, n, &mut rng);
            let oracle = RawOracle::new(&rep, Some(&geom), &b).unwrap();
            let lj = perturb_laplace_data(&spin_laplace_jet(&geom, &rep).unwrap(), &b, &rep).unwrap();
            let od = OperatorData::random(n, d, &mut rng);
            let raw = oracle.wres_top(&od.to_symbol().unwrap()).unwrap();
            let formula = wres_density_general(&od, &lj, &geom).unwrap();
            assert!(close(raw, formula, 1e-9), "curved n={n}: {raw} vs {formula}");
        }
    }
}
