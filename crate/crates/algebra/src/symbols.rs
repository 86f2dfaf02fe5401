//! Symbols of the truncated model space and their ordered basis.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::params::{StructureParams, HOM_TOL};

/// Which model space a basis, matrix or map refers to.
///
/// `Base` is the structure driven by the noise alone; `Extended` adjoins a
/// second, deterministic forcing channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    Base,
    Extended,
}

/// Basis symbol in canonical form.
///
/// Products are flattened, sorted and unit-free, and `X` powers are
/// positive; build through [`Symbol::prod`], [`Symbol::x`] and
/// [`Symbol::integ`] so structural equality and ordering are canonical.
/// The variant order is chosen so that sorting by `(homogeneity, Symbol)`
/// reproduces the conventional basis layout.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    One,
    Integ(Box<Symbol>),
    X { axis: u8, power: u8 },
    Xi,
    H,
    Prod(Vec<Symbol>),
}

impl Symbol {
    /// Monomial `X_axis^power`; power 0 collapses to the unit.
    pub fn x(axis: u8, power: u8) -> Symbol {
        assert!(axis == 1 || axis == 2, "axis must be 1 or 2");
        if power == 0 {
            Symbol::One
        } else {
            Symbol::X { axis, power }
        }
    }

    pub fn integ(inner: Symbol) -> Symbol {
        Symbol::Integ(Box::new(inner))
    }

    /// Canonical commutative product: flattens nested products, merges `X`
    /// powers on the same axis, drops units and sorts the factors.
    pub fn prod<It: IntoIterator<Item = Symbol>>(factors: It) -> Symbol {
        fn push(flat: &mut Vec<Symbol>, s: Symbol) {
            match s {
                Symbol::One => {}
                Symbol::Prod(fs) => {
                    for f in fs {
                        push(flat, f);
                    }
                }
                other => flat.push(other),
            }
        }
        let mut flat = Vec::new();
        for f in factors {
            push(&mut flat, f);
        }
        let mut powers = [0u16; 2];
        let mut rest: Vec<Symbol> = Vec::new();
        for f in flat {
            match f {
                Symbol::X { axis, power } => powers[(axis - 1) as usize] += power as u16,
                other => rest.push(other),
            }
        }
        for (i, &k) in powers.iter().enumerate() {
            if k > 0 {
                assert!(k <= u8::MAX as u16, "polynomial power overflow");
                rest.push(Symbol::X {
                    axis: i as u8 + 1,
                    power: k as u8,
                });
            }
        }
        rest.sort();
        match rest.len() {
            0 => Symbol::One,
            1 => rest.pop().expect("nonempty"),
            _ => Symbol::Prod(rest),
        }
    }

    /// Homogeneity of the symbol under the given parameters.
    pub fn homogeneity(&self, params: &StructureParams) -> f64 {
        match self {
            Symbol::One => 0.0,
            Symbol::Xi | Symbol::H => params.alpha_min(),
            Symbol::X { power, .. } => *power as f64,
            Symbol::Integ(t) => t.homogeneity(params) + 2.0,
            Symbol::Prod(fs) => fs.iter().map(|f| f.homogeneity(params)).sum(),
        }
    }

    /// True when the tree contains the second forcing channel anywhere.
    pub fn contains_h(&self) -> bool {
        match self {
            Symbol::H => true,
            Symbol::One | Symbol::Xi | Symbol::X { .. } => false,
            Symbol::Integ(t) => t.contains_h(),
            Symbol::Prod(fs) => fs.iter().any(Symbol::contains_h),
        }
    }

    /// True when the symbol has a bare forcing factor at top level, i.e.
    /// belongs to the noise sector rather than the function-like sector.
    pub fn in_noise_sector(&self) -> bool {
        match self {
            Symbol::Xi | Symbol::H => true,
            Symbol::Prod(fs) => fs
                .iter()
                .any(|f| matches!(f, Symbol::Xi | Symbol::H)),
            _ => false,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::One => write!(f, "1"),
            Symbol::Xi => write!(f, "Xi"),
            Symbol::H => write!(f, "H"),
            Symbol::X { axis, power: 1 } => write!(f, "X{axis}"),
            Symbol::X { axis, power } => write!(f, "X{axis}^{power}"),
            Symbol::Integ(t) => write!(f, "I({t})"),
            Symbol::Prod(fs) => {
                for (i, t) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "symbol parse error at byte {}: {}", self.position, self.message)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError {
            message: String::from(message),
            position: self.pos,
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u8, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a digit");
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("digits");
        match text.parse::<u8>() {
            Ok(v) => Ok(v),
            Err(_) => self.err("power out of range"),
        }
    }

    fn factor(&mut self) -> Result<Symbol, ParseError> {
        match self.peek() {
            Some(b'1') => {
                self.pos += 1;
                Ok(Symbol::One)
            }
            Some(b'H') => {
                self.pos += 1;
                Ok(Symbol::H)
            }
            Some(b'X') => {
                self.pos += 1;
                if self.eat(b'i') {
                    return Ok(Symbol::Xi);
                }
                let axis = match self.peek() {
                    Some(b'1') => 1,
                    Some(b'2') => 2,
                    _ => return self.err("expected axis 1 or 2 after X"),
                };
                self.pos += 1;
                let power = if self.eat(b'^') { self.number()? } else { 1 };
                Ok(Symbol::x(axis, power))
            }
            Some(b'I') => {
                self.pos += 1;
                if !self.eat(b'(') {
                    return self.err("expected ( after I");
                }
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected )");
                }
                Ok(Symbol::integ(inner))
            }
            _ => self.err("expected 1, Xi, H, X1, X2 or I(...)"),
        }
    }

    fn expr(&mut self) -> Result<Symbol, ParseError> {
        let mut factors = alloc::vec![self.factor()?];
        while self.eat(b'*') {
            factors.push(self.factor()?);
        }
        Ok(Symbol::prod(factors))
    }
}

/// Parses the ASCII symbol grammar, e.g. `I(Xi)*Xi` or `X1^2`.
pub fn parse_symbol(s: &str) -> Result<Symbol, ParseError> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
    };
    let sym = p.expr()?;
    if p.pos != p.src.len() {
        return p.err("trailing input");
    }
    Ok(sym)
}

impl FromStr for Symbol {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_symbol(s)
    }
}

/// Ordered basis of the truncated structure, noise sector first.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub structure: Structure,
    pub params: StructureParams,
    symbols: Vec<Symbol>,
    n_noise: usize,
}

impl Basis {
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, s: &Symbol) -> Option<usize> {
        self.symbols.iter().position(|t| t == s)
    }

    /// Symbols carrying a bare forcing factor.
    pub fn noise_sector(&self) -> &[Symbol] {
        &self.symbols[..self.n_noise]
    }

    /// Function-like symbols.
    pub fn function_sector(&self) -> &[Symbol] {
        &self.symbols[self.n_noise..]
    }
}

fn push_unique(set: &mut Vec<Symbol>, s: Symbol) -> bool {
    if set.contains(&s) {
        false
    } else {
        set.push(s);
        true
    }
}

/// Enumerates the basis generated by the two production rules, truncated at
/// the sector cutoffs, in canonical `(homogeneity, symbol)` order.
///
/// Function-like symbols are polynomials and integrals of noise-sector
/// symbols below the `gamma` cutoff; noise-sector symbols are products of a
/// function-like symbol with a forcing factor below the `gamma + alpha_min`
/// cutoff.
pub fn enumerate_basis(structure: Structure, params: &StructureParams) -> Basis {
    let forcings: &[Symbol] = match structure {
        Structure::Base => &[Symbol::Xi],
        Structure::Extended => &[Symbol::Xi, Symbol::H],
    };

    let mut u: Vec<Symbol> = Vec::new();
    let kmax = num_traits::float::FloatCore::ceil(params.gamma) as u16 + 1;
    for a in 0..=kmax {
        for b in 0..=kmax {
            if a + b > u8::MAX as u16 {
                continue;
            }
            let s = Symbol::prod([Symbol::x(1, a as u8), Symbol::x(2, b as u8)]);
            if s.homogeneity(params) < params.cutoff_u() - HOM_TOL {
                push_unique(&mut u, s);
            }
        }
    }

    let mut w: Vec<Symbol> = Vec::new();
    loop {
        let mut changed = false;
        for t in u.clone() {
            for z in forcings {
                let s = Symbol::prod([t.clone(), z.clone()]);
                if s.homogeneity(params) < params.cutoff_w() - HOM_TOL {
                    changed |= push_unique(&mut w, s);
                }
            }
        }
        for t in w.clone() {
            let s = Symbol::integ(t);
            if s.homogeneity(params) < params.cutoff_u() - HOM_TOL {
                changed |= push_unique(&mut u, s);
            }
        }
        if !changed {
            break;
        }
    }

    let sort_key = |s: &Symbol| s.homogeneity(params);
    let by_hom = |a: &Symbol, b: &Symbol| {
        let (ha, hb) = (sort_key(a), sort_key(b));
        if (ha - hb).abs() <= HOM_TOL {
            a.cmp(b)
        } else {
            ha.partial_cmp(&hb).expect("finite homogeneities")
        }
    };
    w.sort_by(by_hom);
    u.sort_by(by_hom);

    let n_noise = w.len();
    let mut symbols = w;
    symbols.extend(u);
    Basis {
        structure,
        params: *params,
        symbols,
        n_noise,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn sym(s: &str) -> Symbol {
        parse_symbol(s).unwrap()
    }

    #[test]
    fn display_round_trip() {
        for s in [
            "1",
            "Xi",
            "H",
            "X1",
            "X2^3",
            "I(Xi)",
            "I(Xi)*Xi",
            "I(H)*Xi",
            "X1*Xi",
            "I(X1*Xi)",
        ] {
            assert_eq!(sym(s).to_string(), s);
        }
    }

    #[test]
    fn product_canonicalization() {
        assert_eq!(sym("Xi*I(Xi)"), sym("I(Xi)*Xi"));
        assert_eq!(sym("X2*X1"), sym("X1*X2"));
        assert_eq!(sym("X1*X1"), sym("X1^2"));
        assert_eq!(sym("1*Xi"), Symbol::Xi);
        assert_eq!(Symbol::prod([]), Symbol::One);
        assert_eq!(Symbol::x(1, 0), Symbol::One);
    }

    #[test]
    fn parse_rejects_junk() {
        assert!(parse_symbol("").is_err());
        assert!(parse_symbol("X3").is_err());
        assert!(parse_symbol("I(Xi").is_err());
        assert!(parse_symbol("Xi*").is_err());
        assert!(parse_symbol("Y").is_err());
        assert!(parse_symbol("Xi Xi").is_err());
    }

    #[test]
    fn homogeneities_at_defaults() {
        let p = StructureParams::default();
        let cases = [
            ("1", 0.0),
            ("Xi", -1.05),
            ("H", -1.05),
            ("X1", 1.0),
            ("X1^2", 2.0),
            ("I(Xi)", 0.95),
            ("I(Xi)*Xi", -0.10),
            ("I(H)*H", -0.10),
            ("X1*Xi", -0.05),
        ];
        for (s, h) in cases {
            assert!(
                (sym(s).homogeneity(&p) - h).abs() < HOM_TOL,
                "homogeneity of {s}"
            );
        }
    }

    #[test]
    fn base_basis_layout() {
        let p = StructureParams::default();
        let b = enumerate_basis(Structure::Base, &p);
        let want: Vec<Symbol> = ["Xi", "I(Xi)*Xi", "X1*Xi", "X2*Xi", "1", "I(Xi)", "X1", "X2"]
            .iter()
            .map(|s| sym(s))
            .collect();
        assert_eq!(b.symbols(), &want[..]);
        assert_eq!(b.noise_sector().len(), 4);
        assert_eq!(b.function_sector().len(), 4);
    }

    #[test]
    fn extended_basis_layout() {
        let p = StructureParams::default();
        let b = enumerate_basis(Structure::Extended, &p);
        let want: Vec<Symbol> = [
            "Xi",
            "H",
            "I(Xi)*Xi",
            "I(Xi)*H",
            "I(H)*Xi",
            "I(H)*H",
            "X1*Xi",
            "X1*H",
            "X2*Xi",
            "X2*H",
            "1",
            "I(Xi)",
            "I(H)",
            "X1",
            "X2",
        ]
        .iter()
        .map(|s| sym(s))
        .collect();
        assert_eq!(b.symbols(), &want[..]);
        assert_eq!(b.noise_sector().len(), 10);
    }

    #[test]
    fn homogeneity_set_at_defaults() {
        let p = StructureParams::default();
        for structure in [Structure::Base, Structure::Extended] {
            let b = enumerate_basis(structure, &p);
            let mut homs: Vec<f64> = b.symbols().iter().map(|s| s.homogeneity(&p)).collect();
            homs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            homs.dedup_by(|a, b| (*a - *b).abs() < HOM_TOL);
            let want = [-1.05, -0.10, -0.05, 0.0, 0.95, 1.0];
            assert_eq!(homs.len(), want.len());
            for (h, w) in homs.iter().zip(want.iter()) {
                assert!((h - w).abs() < HOM_TOL);
            }
        }
    }

    #[test]
    fn basis_stable_across_valid_parameters() {
        let p = StructureParams::new(0.3, 1.31, 0.0).unwrap();
        let b = enumerate_basis(Structure::Base, &p);
        assert_eq!(b.len(), 8);
        let b = enumerate_basis(Structure::Extended, &p);
        assert_eq!(b.len(), 15);
    }

    #[test]
    fn base_embeds_in_extended() {
        let p = StructureParams::default();
        let base = enumerate_basis(Structure::Base, &p);
        let ext = enumerate_basis(Structure::Extended, &p);
        for s in base.symbols() {
            assert!(ext.index_of(s).is_some(), "missing {s}");
            assert!(!s.contains_h());
        }
        let extra: Vec<&Symbol> = ext
            .symbols()
            .iter()
            .filter(|s| base.index_of(s).is_none())
            .collect();
        assert_eq!(extra.len(), 7);
        for s in extra {
            assert!(s.contains_h(), "extension symbol {s} must carry H");
        }
    }

    #[test]
    fn sector_classification() {
        assert!(sym("Xi").in_noise_sector());
        assert!(sym("I(Xi)*Xi").in_noise_sector());
        assert!(sym("X1*H").in_noise_sector());
        assert!(!sym("I(Xi)").in_noise_sector());
        assert!(!sym("1").in_noise_sector());
        assert!(!sym("I(X1*Xi)").in_noise_sector());
    }
}
