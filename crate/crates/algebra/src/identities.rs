//! Machine verification of the structural identities tying the expansion,
//! the shift and the renormalization together.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::coproduct::{coproduct, Expansion};
use crate::group::{gamma_apply_symbol, gamma_matrix, GammaMatrix};
use crate::params::{StructureParams, HOM_TOL};
use crate::renorm::{renorm_apply_exact, RenormMap};
use crate::symbols::{enumerate_basis, Structure};
use crate::tplus::{Character, Rational};
use crate::translate::{translate_lincomb, translate_mono, translate_symbol, LinComb};

/// Outcome of one identity instance.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub identity: &'static str,
    pub symbol: String,
    pub pass: bool,
    pub detail: String,
}

impl IdentityCheck {
    fn pass(identity: &'static str, symbol: String) -> IdentityCheck {
        IdentityCheck {
            identity,
            symbol,
            pass: true,
            detail: String::new(),
        }
    }

    fn fail(identity: &'static str, symbol: String, detail: String) -> IdentityCheck {
        IdentityCheck {
            identity,
            symbol,
            pass: false,
            detail,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Random character with entries in [-1, 1].
pub fn random_character(state: &mut u64, extended: bool) -> Character {
    Character {
        j_xi: uniform(state),
        j_h: if extended { uniform(state) } else { 0.0 },
        x1: uniform(state),
        x2: uniform(state),
    }
}

/// Pushes the expansion of a base symbol through the shift on both legs.
fn shift_expansion(e: &Expansion) -> Expansion {
    let mut out = Expansion::zero();
    for ((s, m), c) in e.terms() {
        let left = translate_symbol(s);
        let right = translate_mono(m);
        for (s2, cs) in &left {
            for (m2, cm) in &right.0 {
                out.add_term(s2.clone(), *m2, *c * *cs * *cm);
            }
        }
    }
    out
}

/// Expansion of a linear combination of symbols.
fn expand_lincomb(v: &LinComb, params: &StructureParams) -> Expansion {
    let mut out = Expansion::zero();
    for (s, c) in v {
        for ((t, m), w) in coproduct(s, params).terms() {
            out.add_term(t.clone(), *m, *c * *w);
        }
    }
    out
}

/// Applies the renormalization with exact constant to a linear combination.
fn renorm_lincomb(c: Rational, v: &LinComb) -> LinComb {
    use num_traits::Zero;
    let mut out = LinComb::new();
    for (s, w) in v {
        for (t, u) in renorm_apply_exact(c, s) {
            let total = *w * u
                + match out.get(&t) {
                    Some(prev) => *prev,
                    None => Rational::from_integer(0),
                };
            if total.is_zero() {
                out.remove(&t);
            } else {
                out.insert(t, total);
            }
        }
    }
    out
}

/// Checks, for every base-structure symbol, that expanding and then
/// shifting both legs agrees with shifting first and expanding in the
/// extended structure. Exact rational comparison.
pub fn check_shift_compatibility(params: &StructureParams) -> Vec<IdentityCheck> {
    const NAME: &str = "shift-compatible-expansion";
    let basis = enumerate_basis(Structure::Base, params);
    let mut out = Vec::new();
    for tau in basis.symbols() {
        let lhs = shift_expansion(&coproduct(tau, params));
        let rhs = expand_lincomb(&translate_symbol(tau), params);
        if lhs == rhs {
            out.push(IdentityCheck::pass(NAME, format!("{tau}")));
        } else {
            out.push(IdentityCheck::fail(
                NAME,
                format!("{tau}"),
                format!("lhs {lhs:?} != rhs {rhs:?}"),
            ));
        }
    }
    out
}

/// Checks that the shift intertwines the base and extended renormalization
/// maps on every base-structure symbol. Exact rational comparison.
pub fn check_renorm_shift_commutation(params: &StructureParams) -> Vec<IdentityCheck> {
    const NAME: &str = "renormalization-commutes-with-shift";
    let basis = enumerate_basis(Structure::Base, params);
    let constants = [
        Rational::from_integer(2),
        Rational::new(7, 3),
        Rational::new(-11, 4),
    ];
    let mut out = Vec::new();
    for tau in basis.symbols() {
        for c in constants {
            let mut v = LinComb::new();
            v.insert(tau.clone(), Rational::from_integer(1));
            let lhs = translate_lincomb(&renorm_lincomb(c, &v));
            let rhs = renorm_lincomb(c, &translate_lincomb(&v));
            if lhs == rhs {
                out.push(IdentityCheck::pass(NAME, format!("{tau} (c = {c})")));
            } else {
                out.push(IdentityCheck::fail(
                    NAME,
                    format!("{tau} (c = {c})"),
                    format!("lhs {lhs:?} != rhs {rhs:?}"),
                ));
            }
        }
    }
    out
}

/// Checks that reexpansion moves symbols only towards strictly lower
/// homogeneity, over sampled characters.
pub fn check_triangularity(params: &StructureParams, seed: u64) -> Vec<IdentityCheck> {
    const NAME: &str = "reexpansion-lowers-homogeneity";
    let mut state = seed;
    let mut out = Vec::new();
    for structure in [Structure::Base, Structure::Extended] {
        let basis = enumerate_basis(structure, params);
        let f = random_character(&mut state, structure == Structure::Extended);
        for tau in basis.symbols() {
            let h = tau.homogeneity(params);
            let mut ok = true;
            let mut detail = String::new();
            for (s, w) in gamma_apply_symbol(&f, tau, params) {
                if s == *tau {
                    if (w - 1.0).abs() > 0.0 {
                        ok = false;
                        detail = format!("diagonal weight {w} != 1");
                    }
                } else if s.homogeneity(params) >= h - HOM_TOL {
                    ok = false;
                    detail = format!("term {s} does not drop below {h}");
                }
            }
            out.push(if ok {
                IdentityCheck::pass(NAME, format!("{tau}"))
            } else {
                IdentityCheck::fail(NAME, format!("{tau}"), detail)
            });
        }
    }
    out
}

/// Checks the group law and inverses on sampled characters, requiring
/// bitwise equality of the assembled matrices.
pub fn check_group_law(params: &StructureParams, seed: u64, rounds: usize) -> Vec<IdentityCheck> {
    const NAME: &str = "reexpansion-group-law";
    let mut state = seed;
    let mut out = Vec::new();
    for structure in [Structure::Base, Structure::Extended] {
        let basis = enumerate_basis(structure, params);
        let id = GammaMatrix::identity(structure, basis.len());
        let mut worst: Option<String> = None;
        for _ in 0..rounds {
            let f = random_character(&mut state, structure == Structure::Extended);
            let g = random_character(&mut state, structure == Structure::Extended);
            let prod = gamma_matrix(&f, &basis).matmul(&gamma_matrix(&g, &basis));
            let composed = gamma_matrix(&f.compose(&g), &basis);
            if !prod.is_exactly(&composed) {
                worst = Some(format!(
                    "composition mismatch, max diff {}",
                    prod.max_abs_diff(&composed)
                ));
            }
            let inv = gamma_matrix(&f, &basis).matmul(&gamma_matrix(&f.invert(), &basis));
            if !inv.is_exactly(&id) {
                worst = Some(format!(
                    "inverse mismatch, max diff {}",
                    inv.max_abs_diff(&id)
                ));
            }
        }
        let label = match structure {
            Structure::Base => "base structure",
            Structure::Extended => "extended structure",
        };
        out.push(match worst {
            None => IdentityCheck::pass(NAME, String::from(label)),
            Some(d) => IdentityCheck::fail(NAME, String::from(label), d),
        });
    }
    out
}

/// Checks the one-parameter law of the renormalization maps.
pub fn check_renorm_group_law(params: &StructureParams) -> Vec<IdentityCheck> {
    const NAME: &str = "renormalization-one-parameter-law";
    let mut out = Vec::new();
    for structure in [Structure::Base, Structure::Extended] {
        let basis = enumerate_basis(structure, params);
        let a = RenormMap::new(0.75, structure);
        let b = RenormMap::new(-2.0, structure);
        let lhs = crate::renorm::renorm_matrix(&a, &basis)
            .matmul(&crate::renorm::renorm_matrix(&b, &basis));
        let rhs = crate::renorm::renorm_matrix(&a.compose(&b), &basis);
        let label = match structure {
            Structure::Base => "base structure",
            Structure::Extended => "extended structure",
        };
        out.push(if lhs.is_exactly(&rhs) {
            IdentityCheck::pass(NAME, String::from(label))
        } else {
            IdentityCheck::fail(
                NAME,
                String::from(label),
                format!("max diff {}", lhs.max_abs_diff(&rhs)),
            )
        });
    }
    out
}

/// Runs the full identity suite.
pub fn check_identities(params: &StructureParams) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    out.extend(check_shift_compatibility(params));
    out.extend(check_renorm_shift_commutation(params));
    out.extend(check_triangularity(params, 0x5EED));
    out.extend(check_group_law(params, 0xFEED, 10));
    out.extend(check_renorm_group_law(params));
    out
}
