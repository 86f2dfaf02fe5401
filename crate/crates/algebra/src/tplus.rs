//! Monomials in the integration labels and polynomial coordinates, with
//! exact rational combinations and point evaluations (characters).

use alloc::collections::BTreeMap;
use core::fmt;

use num_rational::Ratio;

use crate::params::StructureParams;

pub type Rational = Ratio<i64>;

/// Monomial `J(Xi)^a J(H)^b X1^c X2^d` in the label algebra.
///
/// Higher-order labels would carry a derivative multi-index; in this
/// truncated structure they are cut off by the homogeneity rule and never
/// appear, so the four generators above are complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mono {
    pub j_xi: u8,
    pub j_h: u8,
    pub x: [u8; 2],
}

impl Mono {
    pub const ONE: Mono = Mono {
        j_xi: 0,
        j_h: 0,
        x: [0, 0],
    };

    pub fn j_xi() -> Mono {
        Mono {
            j_xi: 1,
            ..Mono::ONE
        }
    }

    pub fn j_h() -> Mono {
        Mono {
            j_h: 1,
            ..Mono::ONE
        }
    }

    pub fn x(axis: u8, power: u8) -> Mono {
        assert!(axis == 1 || axis == 2);
        let mut m = Mono::ONE;
        m.x[(axis - 1) as usize] = power;
        m
    }

    pub fn is_one(&self) -> bool {
        *self == Mono::ONE
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono {
            j_xi: self.j_xi + other.j_xi,
            j_h: self.j_h + other.j_h,
            x: [self.x[0] + other.x[0], self.x[1] + other.x[1]],
        }
    }

    /// Homogeneity: each integration label counts `alpha_min + 2`, each
    /// polynomial coordinate counts 1.
    pub fn homogeneity(&self, params: &StructureParams) -> f64 {
        let jl = params.alpha_min() + 2.0;
        (self.j_xi + self.j_h) as f64 * jl + (self.x[0] + self.x[1]) as f64
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut part = |f: &mut fmt::Formatter<'_>, name: &str, p: u8| -> fmt::Result {
            if p == 0 {
                return Ok(());
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if p == 1 {
                write!(f, "{name}")
            } else {
                write!(f, "{name}^{p}")
            }
        };
        part(f, "J(Xi)", self.j_xi)?;
        part(f, "J(H)", self.j_h)?;
        part(f, "X1", self.x[0])?;
        part(f, "X2", self.x[1])
    }
}

/// Polynomial in the label monomials with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(pub BTreeMap<Mono, Rational>);

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::mono(Mono::ONE)
    }

    pub fn mono(m: Mono) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, Rational::from_integer(1));
        p
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        use num_traits::Zero;
        if c.is_zero() {
            return;
        }
        let entry = self.0.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn add(&mut self, other: &Poly) {
        for (m, c) in &other.0 {
            self.add_term(*m, *c);
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&mut self, c: Rational) {
        use num_traits::Zero;
        if c.is_zero() {
            self.0.clear();
        } else {
            for v in self.0.values_mut() {
                *v *= c;
            }
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if *c == Rational::from_integer(1) {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Point evaluation on the label algebra, determined by its values on the
/// four generators and extended multiplicatively.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Character {
    pub j_xi: f64,
    pub j_h: f64,
    pub x1: f64,
    pub x2: f64,
}

impl Character {
    pub fn new(j_xi: f64, j_h: f64, x1: f64, x2: f64) -> Character {
        Character { j_xi, j_h, x1, x2 }
    }

    pub fn eval_mono(&self, m: &Mono) -> f64 {
        use num_traits::float::FloatCore;
        FloatCore::powi(self.j_xi, m.j_xi as i32)
            * FloatCore::powi(self.j_h, m.j_h as i32)
            * FloatCore::powi(self.x1, m.x[0] as i32)
            * FloatCore::powi(self.x2, m.x[1] as i32)
    }

    pub fn eval_poly(&self, p: &Poly) -> f64 {
        p.0.iter()
            .map(|(m, c)| {
                let cf = *c.numer() as f64 / *c.denom() as f64;
                cf * self.eval_mono(m)
            })
            .sum()
    }

    /// Group composition of the induced reexpansion maps: values add
    /// generator by generator.
    pub fn compose(&self, other: &Character) -> Character {
        Character {
            j_xi: self.j_xi + other.j_xi,
            j_h: self.j_h + other.j_h,
            x1: self.x1 + other.x1,
            x2: self.x2 + other.x2,
        }
    }

    pub fn invert(&self) -> Character {
        Character {
            j_xi: -self.j_xi,
            j_h: -self.j_h,
            x1: -self.x1,
            x2: -self.x2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn mono_display() {
        assert_eq!(Mono::ONE.to_string(), "1");
        assert_eq!(Mono::j_xi().to_string(), "J(Xi)");
        assert_eq!(
            Mono::j_xi().mul(&Mono::x(1, 2)).to_string(),
            "J(Xi)*X1^2"
        );
    }

    #[test]
    fn poly_arithmetic() {
        let mut p = Poly::mono(Mono::j_xi());
        p.add_term(Mono::j_xi(), Rational::new(1, 2));
        let q = Poly::mono(Mono::x(1, 1));
        let r = p.mul(&q);
        assert_eq!(r.0.len(), 1);
        let m = Mono::j_xi().mul(&Mono::x(1, 1));
        assert_eq!(r.0[&m], Rational::new(3, 2));
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = Poly::mono(Mono::j_h());
        p.add_term(Mono::j_h(), Rational::from_integer(-1));
        assert_eq!(p, Poly::zero());
    }

    #[test]
    fn character_eval_and_group() {
        let f = Character::new(2.0, 3.0, 5.0, 7.0);
        assert_eq!(f.eval_mono(&Mono::ONE), 1.0);
        assert_eq!(f.eval_mono(&Mono::j_xi().mul(&Mono::x(2, 1))), 14.0);
        let g = Character::new(1.0, -3.0, 0.5, 0.0);
        let fg = f.compose(&g);
        assert_eq!(fg, Character::new(3.0, 0.0, 5.5, 7.0));
        let id = f.compose(&f.invert());
        assert_eq!(id, Character::default());
    }

    #[test]
    fn mono_homogeneity() {
        let p = StructureParams::default();
        assert!((Mono::j_xi().homogeneity(&p) - 0.95).abs() < 1e-12);
        assert!((Mono::x(1, 2).homogeneity(&p) - 2.0).abs() < 1e-12);
    }
}
