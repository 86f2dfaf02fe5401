//! Reexpansion maps as matrices on the ordered basis.

use alloc::vec;
use alloc::vec::Vec;

use crate::coproduct::coproduct;
use crate::params::StructureParams;
use crate::symbols::{Basis, Structure, Symbol};
use crate::tplus::Character;

/// Dense square matrix acting on coordinate vectors over a fixed basis.
///
/// Column `j` holds the expansion of the `j`-th basis symbol, so the map
/// acts by `y = M x` on coefficient vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaMatrix {
    pub structure: Structure,
    n: usize,
    data: Vec<f64>,
}

impl GammaMatrix {
    pub fn identity(structure: Structure, n: usize) -> GammaMatrix {
        let mut m = GammaMatrix {
            structure,
            n,
            data: vec![0.0; n * n],
        };
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.n + col] = v;
    }

    pub fn matmul(&self, other: &GammaMatrix) -> GammaMatrix {
        assert_eq!(self.n, other.n);
        assert_eq!(self.structure, other.structure);
        let n = self.n;
        let mut out = GammaMatrix {
            structure: self.structure,
            n,
            data: vec![0.0; n * n],
        };
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Applies the matrix to a coefficient vector.
    pub fn apply(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.get(i, j) * coeffs[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &GammaMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Entrywise bitwise equality.
    pub fn is_exactly(&self, other: &GammaMatrix) -> bool {
        self.n == other.n && self.data == other.data
    }
}

/// Reexpansion of a single symbol under the character `f`: the terms of
/// `(id (x) f)` applied to the expansion of `tau`.
pub fn gamma_apply_symbol(
    f: &Character,
    tau: &Symbol,
    params: &StructureParams,
) -> Vec<(Symbol, f64)> {
    let mut out: Vec<(Symbol, f64)> = Vec::new();
    for ((s, m), c) in coproduct(tau, params).terms() {
        let w = (*c.numer() as f64 / *c.denom() as f64) * f.eval_mono(m);
        if w == 0.0 {
            continue;
        }
        match out.iter_mut().find(|(t, _)| t == s) {
            Some((_, acc)) => *acc += w,
            None => out.push((s.clone(), w)),
        }
    }
    out
}

/// Matrix of the reexpansion map induced by `f` on the given basis.
pub fn gamma_matrix(f: &Character, basis: &Basis) -> GammaMatrix {
    let n = basis.len();
    let mut m = GammaMatrix {
        structure: basis.structure,
        n,
        data: vec![0.0; n * n],
    };
    for (j, tau) in basis.symbols().iter().enumerate() {
        for (s, w) in gamma_apply_symbol(f, tau, &basis.params) {
            let i = basis
                .index_of(&s)
                .expect("reexpansion stays inside the basis");
            m.set(i, j, m.get(i, j) + w);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{enumerate_basis, parse_symbol};

    fn sym(s: &str) -> Symbol {
        parse_symbol(s).unwrap()
    }

    /// Expected matrix on the 8-symbol basis. Basis order:
    /// Xi, I(Xi)*Xi, X1*Xi, X2*Xi, 1, I(Xi), X1, X2. The only nonzero
    /// off-diagonal entries sit in the first row of the noise block and the
    /// first row of the function block.
    fn expected_base(f: &Character, basis: &Basis) -> GammaMatrix {
        let mut m = GammaMatrix::identity(Structure::Base, 8);
        let idx = |s: &str| basis.index_of(&sym(s)).unwrap();
        let xi = idx("Xi");
        m.set(xi, idx("I(Xi)*Xi"), f.j_xi);
        m.set(xi, idx("X1*Xi"), f.x1);
        m.set(xi, idx("X2*Xi"), f.x2);
        let one = idx("1");
        m.set(one, idx("I(Xi)"), f.j_xi);
        m.set(one, idx("X1"), f.x1);
        m.set(one, idx("X2"), f.x2);
        m
    }

    /// Expected matrix on the 15-symbol extended basis.
    fn expected_extended(f: &Character, basis: &Basis) -> GammaMatrix {
        let mut m = GammaMatrix::identity(Structure::Extended, 15);
        let idx = |s: &str| basis.index_of(&sym(s)).unwrap();
        let xi = idx("Xi");
        let h = idx("H");
        m.set(xi, idx("I(Xi)*Xi"), f.j_xi);
        m.set(h, idx("I(Xi)*H"), f.j_xi);
        m.set(xi, idx("I(H)*Xi"), f.j_h);
        m.set(h, idx("I(H)*H"), f.j_h);
        m.set(xi, idx("X1*Xi"), f.x1);
        m.set(h, idx("X1*H"), f.x1);
        m.set(xi, idx("X2*Xi"), f.x2);
        m.set(h, idx("X2*H"), f.x2);
        let one = idx("1");
        m.set(one, idx("I(Xi)"), f.j_xi);
        m.set(one, idx("I(H)"), f.j_h);
        m.set(one, idx("X1"), f.x1);
        m.set(one, idx("X2"), f.x2);
        m
    }

    #[test]
    fn matrix_layout_base() {
        let p = StructureParams::default();
        let basis = enumerate_basis(Structure::Base, &p);
        let f = Character::new(2.0, 0.0, 3.0, 5.0);
        let m = gamma_matrix(&f, &basis);
        assert!(m.is_exactly(&expected_base(&f, &basis)));
    }

    #[test]
    fn matrix_layout_extended() {
        let p = StructureParams::default();
        let basis = enumerate_basis(Structure::Extended, &p);
        let f = Character::new(2.0, 7.0, 3.0, 5.0);
        let m = gamma_matrix(&f, &basis);
        assert!(m.is_exactly(&expected_extended(&f, &basis)));
    }

    #[test]
    fn zero_character_is_identity() {
        let p = StructureParams::default();
        for structure in [Structure::Base, Structure::Extended] {
            let basis = enumerate_basis(structure, &p);
            let m = gamma_matrix(&Character::default(), &basis);
            assert!(m.is_exactly(&GammaMatrix::identity(structure, basis.len())));
        }
    }

    #[test]
    fn group_law_is_exact() {
        let p = StructureParams::default();
        let basis = enumerate_basis(Structure::Extended, &p);
        let f = Character::new(0.125, -2.5, 1.75, -0.375);
        let g = Character::new(-3.0, 0.0625, -1.25, 2.0);
        let lhs = gamma_matrix(&f, &basis).matmul(&gamma_matrix(&g, &basis));
        let rhs = gamma_matrix(&f.compose(&g), &basis);
        assert!(lhs.is_exactly(&rhs));
        let inv = gamma_matrix(&f, &basis).matmul(&gamma_matrix(&f.invert(), &basis));
        assert!(inv.is_exactly(&GammaMatrix::identity(Structure::Extended, 15)));
    }

    #[test]
    fn apply_vector() {
        let p = StructureParams::default();
        let basis = enumerate_basis(Structure::Base, &p);
        let f = Character::new(2.0, 0.0, 0.0, 0.0);
        let m = gamma_matrix(&f, &basis);
        let mut coeffs = vec![0.0; basis.len()];
        coeffs[basis.index_of(&sym("I(Xi)*Xi")).unwrap()] = 1.0;
        let out = m.apply(&coeffs);
        assert_eq!(out[basis.index_of(&sym("Xi")).unwrap()], 2.0);
        assert_eq!(out[basis.index_of(&sym("I(Xi)*Xi")).unwrap()], 1.0);
    }
}
