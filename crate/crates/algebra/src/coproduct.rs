//! Structural expansion of symbols against the label algebra.
//!
//! The expansion of a symbol records how its realization at one base point
//! rewrites over another: a sum of (symbol, label monomial) pairs with
//! exact rational coefficients. Reexpansion maps arise by evaluating the
//! label leg with a character.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_integer::binomial;

use crate::params::{StructureParams, HOM_TOL};
use crate::symbols::Symbol;
use crate::tplus::{Mono, Rational};

/// Sum of `symbol (x) label-monomial` terms with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Expansion(pub BTreeMap<(Symbol, Mono), Rational>);

impl Expansion {
    pub fn zero() -> Expansion {
        Expansion::default()
    }

    pub fn term(s: Symbol, m: Mono) -> Expansion {
        let mut e = Expansion::zero();
        e.add_term(s, m, Rational::from_integer(1));
        e
    }

    pub fn add_term(&mut self, s: Symbol, m: Mono, c: Rational) {
        use num_traits::Zero;
        if c.is_zero() {
            return;
        }
        let key = (s, m);
        let total = match self.0.get(&key) {
            Some(v) => *v + c,
            None => c,
        };
        if total.is_zero() {
            self.0.remove(&key);
        } else {
            self.0.insert(key, total);
        }
    }

    pub fn add(&mut self, other: &Expansion) {
        for ((s, m), c) in &other.0 {
            self.add_term(s.clone(), *m, *c);
        }
    }

    /// Bilinear product: symbols multiply on the left leg, monomials on the
    /// right leg.
    pub fn mul(&self, other: &Expansion) -> Expansion {
        let mut out = Expansion::zero();
        for ((s1, m1), c1) in &self.0 {
            for ((s2, m2), c2) in &other.0 {
                out.add_term(
                    Symbol::prod([s1.clone(), s2.clone()]),
                    m1.mul(m2),
                    c1 * c2,
                );
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Symbol, Mono), &Rational)> {
        self.0.iter()
    }

    /// Applies the integration map to the left leg of every term.
    fn integ_left(&self) -> Expansion {
        let mut out = Expansion::zero();
        for ((s, m), c) in &self.0 {
            out.add_term(Symbol::integ(s.clone()), *m, *c);
        }
        out
    }
}

fn label_of(tau: &Symbol) -> Mono {
    match tau {
        Symbol::Xi => Mono::j_xi(),
        Symbol::H => Mono::j_h(),
        other => panic!("integration label of {other} is outside the truncated label algebra"),
    }
}

/// Exact expansion of a symbol, truncated by the homogeneity rule:
/// integration labels of order `l` are dropped when `|tau| + 2 - |l| <= 0`.
pub fn coproduct(tau: &Symbol, params: &StructureParams) -> Expansion {
    match tau {
        Symbol::One => Expansion::term(Symbol::One, Mono::ONE),
        Symbol::Xi => Expansion::term(Symbol::Xi, Mono::ONE),
        Symbol::H => Expansion::term(Symbol::H, Mono::ONE),
        Symbol::X { axis, power } => {
            let mut out = Expansion::zero();
            let k = *power;
            for j in 0..=k {
                let c = binomial(k as i64, j as i64);
                out.add_term(
                    Symbol::x(*axis, j),
                    Mono::x(*axis, k - j),
                    Rational::from_integer(c),
                );
            }
            out
        }
        Symbol::Prod(fs) => {
            let mut out = Expansion::term(Symbol::One, Mono::ONE);
            for f in fs {
                out = out.mul(&coproduct(f, params));
            }
            out
        }
        Symbol::Integ(t) => {
            let mut out = coproduct(t, params).integ_left();
            // Label terms X^k/k! (x) X^l/l! J_{k+l}(t): only |k+l| = 0
            // survives the cutoff here, since every integrand has
            // homogeneity below -1.
            let ht = t.homogeneity(params);
            assert!(
                ht + 1.0 < HOM_TOL,
                "integrand {t} admits first-order labels, outside this truncation"
            );
            if ht + 2.0 > HOM_TOL {
                out.add_term(Symbol::One, label_of(t), Rational::from_integer(1));
            }
            out
        }
    }
}

/// Expansion terms as (symbol, monomial, coefficient) triples, for tests
/// and reporting.
pub fn expansion_terms(e: &Expansion) -> Vec<(Symbol, Mono, Rational)> {
    e.0.iter()
        .map(|((s, m), c)| (s.clone(), *m, *c))
        .collect()
}
