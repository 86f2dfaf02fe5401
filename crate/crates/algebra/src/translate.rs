//! The shift morphism: moves the primary forcing by the deterministic
//! channel, on symbols and on integration labels.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_integer::binomial;

use crate::symbols::Symbol;
use crate::tplus::{Mono, Poly, Rational};

/// Linear combination of symbols with exact rational coefficients.
pub type LinComb = BTreeMap<Symbol, Rational>;

fn add_term(out: &mut LinComb, s: Symbol, c: Rational) {
    use num_traits::Zero;
    if c.is_zero() {
        return;
    }
    let total = match out.get(&s) {
        Some(v) => *v + c,
        None => c,
    };
    if total.is_zero() {
        out.remove(&s);
    } else {
        out.insert(s, total);
    }
}

fn single(s: Symbol) -> LinComb {
    let mut out = LinComb::new();
    add_term(&mut out, s, Rational::from_integer(1));
    out
}

fn mul_lincomb(a: &LinComb, b: &LinComb) -> LinComb {
    let mut out = LinComb::new();
    for (s1, c1) in a {
        for (s2, c2) in b {
            add_term(&mut out, Symbol::prod([s1.clone(), s2.clone()]), c1 * c2);
        }
    }
    out
}

/// Symbol-level shift: sends the primary forcing to the sum of both
/// channels, fixes coordinates, commutes with integration and is
/// multiplicative over products. Maps the base structure into the extended
/// one.
pub fn translate_symbol(tau: &Symbol) -> LinComb {
    match tau {
        Symbol::One | Symbol::X { .. } | Symbol::H => single(tau.clone()),
        Symbol::Xi => {
            let mut out = single(Symbol::Xi);
            add_term(&mut out, Symbol::H, Rational::from_integer(1));
            out
        }
        Symbol::Integ(t) => {
            let inner = translate_symbol(t);
            let mut out = LinComb::new();
            for (s, c) in inner {
                add_term(&mut out, Symbol::integ(s), c);
            }
            out
        }
        Symbol::Prod(fs) => {
            let mut out = single(Symbol::One);
            for f in fs {
                out = mul_lincomb(&out, &translate_symbol(f));
            }
            out
        }
    }
}

/// Label-level shift: acts on each integration label by shifting its
/// argument, fixes the polynomial coordinates, extends multiplicatively.
pub fn translate_mono(m: &Mono) -> Poly {
    // J(Xi) -> J(Xi) + J(H): expand the j_xi power binomially.
    let mut out = Poly::zero();
    let a = m.j_xi;
    for j in 0..=a {
        let c = Rational::from_integer(binomial(a as i64, j as i64));
        let t = Mono {
            j_xi: j,
            j_h: m.j_h + (a - j),
            x: m.x,
        };
        out.add_term(t, c);
    }
    out
}

/// Shift of a whole linear combination of symbols.
pub fn translate_lincomb(v: &LinComb) -> LinComb {
    let mut out = LinComb::new();
    for (s, c) in v {
        for (t, w) in translate_symbol(s) {
            add_term(&mut out, t, c * w);
        }
    }
    out
}

/// Terms of a linear combination in deterministic order.
pub fn lincomb_terms(v: &LinComb) -> Vec<(Symbol, Rational)> {
    v.iter().map(|(s, c)| (s.clone(), *c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::StructureParams;
    use crate::symbols::parse_symbol;

    fn sym(s: &str) -> Symbol {
        parse_symbol(s).unwrap()
    }

    fn comb(terms: &[(&str, i64)]) -> LinComb {
        let mut out = LinComb::new();
        for (s, c) in terms {
            add_term(&mut out, sym(s), Rational::from_integer(*c));
        }
        out
    }

    #[test]
    fn forcing_splits() {
        assert_eq!(translate_symbol(&sym("Xi")), comb(&[("Xi", 1), ("H", 1)]));
        assert_eq!(translate_symbol(&sym("H")), comb(&[("H", 1)]));
        assert_eq!(translate_symbol(&sym("X1")), comb(&[("X1", 1)]));
        assert_eq!(translate_symbol(&sym("1")), comb(&[("1", 1)]));
    }

    #[test]
    fn commutes_with_integration() {
        assert_eq!(
            translate_symbol(&sym("I(Xi)")),
            comb(&[("I(Xi)", 1), ("I(H)", 1)])
        );
    }

    #[test]
    fn multiplicative_on_singular_product() {
        assert_eq!(
            translate_symbol(&sym("I(Xi)*Xi")),
            comb(&[
                ("I(Xi)*Xi", 1),
                ("I(Xi)*H", 1),
                ("I(H)*Xi", 1),
                ("I(H)*H", 1)
            ])
        );
        assert_eq!(
            translate_symbol(&sym("X1*Xi")),
            comb(&[("X1*Xi", 1), ("X1*H", 1)])
        );
    }

    #[test]
    fn label_shift() {
        let p = translate_mono(&Mono::j_xi());
        let mut want = Poly::zero();
        want.add_term(Mono::j_xi(), Rational::from_integer(1));
        want.add_term(Mono::j_h(), Rational::from_integer(1));
        assert_eq!(p, want);

        let m = Mono::j_xi().mul(&Mono::x(1, 1));
        let p = translate_mono(&m);
        let mut want = Poly::zero();
        want.add_term(Mono::j_xi().mul(&Mono::x(1, 1)), Rational::from_integer(1));
        want.add_term(Mono::j_h().mul(&Mono::x(1, 1)), Rational::from_integer(1));
        assert_eq!(p, want);

        let m = Mono {
            j_xi: 2,
            j_h: 0,
            x: [0, 0],
        };
        let p = translate_mono(&m);
        let mut want = Poly::zero();
        want.add_term(
            Mono {
                j_xi: 2,
                ..Mono::ONE
            },
            Rational::from_integer(1),
        );
        want.add_term(Mono::j_xi().mul(&Mono::j_h()), Rational::from_integer(2));
        want.add_term(
            Mono {
                j_h: 2,
                ..Mono::ONE
            },
            Rational::from_integer(1),
        );
        assert_eq!(p, want);
    }

    #[test]
    fn preserves_homogeneity() {
        let p = StructureParams::default();
        let basis = crate::symbols::enumerate_basis(crate::symbols::Structure::Base, &p);
        for tau in basis.symbols() {
            let h = tau.homogeneity(&p);
            for (s, _) in translate_symbol(tau) {
                assert!(
                    (s.homogeneity(&p) - h).abs() < 1e-12,
                    "shift must preserve homogeneity: {tau} -> {s}"
                );
            }
        }
    }
}
