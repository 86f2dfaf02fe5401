//! The one-parameter renormalization group: subtracts a constant multiple
//! of the unit from the singular product.

use alloc::vec;
use alloc::vec::Vec;

use crate::group::GammaMatrix;
use crate::symbols::{Basis, Structure, Symbol};
use crate::translate::LinComb;
use crate::tplus::Rational;

/// The unique basis symbol the subtraction touches.
pub fn renorm_target() -> Symbol {
    Symbol::prod([Symbol::integ(Symbol::Xi), Symbol::Xi])
}

/// Renormalization map with constant `c`: fixes every basis symbol except
/// the singular product, from which it subtracts `c` times the unit.
///
/// On the extended structure the map acts the same way; in particular it
/// leaves every symbol carrying the deterministic channel untouched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenormMap {
    pub c: f64,
    pub structure: Structure,
}

impl RenormMap {
    pub fn new(c: f64, structure: Structure) -> RenormMap {
        RenormMap { c, structure }
    }

    /// Image of a single symbol as (symbol, weight) terms.
    pub fn apply(&self, tau: &Symbol) -> Vec<(Symbol, f64)> {
        if *tau == renorm_target() {
            vec![(tau.clone(), 1.0), (Symbol::One, -self.c)]
        } else {
            vec![(tau.clone(), 1.0)]
        }
    }

    /// One-parameter group law: constants add.
    pub fn compose(&self, other: &RenormMap) -> RenormMap {
        assert_eq!(self.structure, other.structure);
        RenormMap::new(self.c + other.c, self.structure)
    }

    pub fn inverse(&self) -> RenormMap {
        RenormMap::new(-self.c, self.structure)
    }
}

/// Matrix of the renormalization map on the given basis.
pub fn renorm_matrix(map: &RenormMap, basis: &Basis) -> GammaMatrix {
    assert_eq!(map.structure, basis.structure);
    let mut m = GammaMatrix::identity(basis.structure, basis.len());
    let target = renorm_target();
    if let (Some(j), Some(i)) = (basis.index_of(&target), basis.index_of(&Symbol::One)) {
        m.set(i, j, -map.c);
    }
    m
}

/// Exact-coefficient image, used by the identity checker.
pub fn renorm_apply_exact(c: Rational, tau: &Symbol) -> LinComb {
    let mut out = LinComb::new();
    out.insert(tau.clone(), Rational::from_integer(1));
    if *tau == renorm_target() {
        out.insert(Symbol::One, -c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::StructureParams;
    use crate::symbols::{enumerate_basis, parse_symbol};

    fn sym(s: &str) -> Symbol {
        parse_symbol(s).unwrap()
    }

    #[test]
    fn target_symbol() {
        assert_eq!(renorm_target(), sym("I(Xi)*Xi"));
    }

    #[test]
    fn action_on_symbols() {
        let m = RenormMap::new(2.5, Structure::Base);
        assert_eq!(
            m.apply(&sym("I(Xi)*Xi")),
            vec![(sym("I(Xi)*Xi"), 1.0), (Symbol::One, -2.5)]
        );
        assert_eq!(m.apply(&sym("Xi")), vec![(sym("Xi"), 1.0)]);
        assert_eq!(m.apply(&sym("X1*Xi")), vec![(sym("X1*Xi"), 1.0)]);
    }

    #[test]
    fn extended_action_fixes_channel_symbols() {
        let m = RenormMap::new(1.0, Structure::Extended);
        for s in ["I(Xi)*H", "I(H)*Xi", "I(H)*H", "H", "I(H)"] {
            assert_eq!(m.apply(&sym(s)), vec![(sym(s), 1.0)]);
        }
    }

    #[test]
    fn matrix_group_law() {
        let p = StructureParams::default();
        for structure in [Structure::Base, Structure::Extended] {
            let basis = enumerate_basis(structure, &p);
            let a = RenormMap::new(0.75, structure);
            let b = RenormMap::new(-2.0, structure);
            let lhs = renorm_matrix(&a, &basis).matmul(&renorm_matrix(&b, &basis));
            let rhs = renorm_matrix(&a.compose(&b), &basis);
            assert!(lhs.is_exactly(&rhs));
            let inv = renorm_matrix(&a, &basis).matmul(&renorm_matrix(&a.inverse(), &basis));
            assert!(inv.is_exactly(&GammaMatrix::identity(structure, basis.len())));
        }
    }

    #[test]
    fn zero_constant_is_identity() {
        let p = StructureParams::default();
        let basis = enumerate_basis(Structure::Base, &p);
        let m = renorm_matrix(&RenormMap::new(0.0, Structure::Base), &basis);
        assert!(m.is_exactly(&GammaMatrix::identity(Structure::Base, basis.len())));
    }
}
