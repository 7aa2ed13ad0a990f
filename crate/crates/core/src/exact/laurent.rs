//! Laurent polynomials in one variable `y` with exact rational coefficients.
//!
//! Coefficients live in a sorted map keyed by the (possibly negative) power
//! of `y`; zero coefficients are never stored, so equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use super::rat::{rat_to_f64, Rat};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rat>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: Rat) -> Self {
        Self::monomial(0, value)
    }

    pub fn one() -> Self {
        Self::constant(Rat::from_integer(1.into()))
    }

    /// `value * y^degree`
    pub fn monomial(degree: i64, value: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !value.is_zero() {
            coeffs.insert(degree, value);
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, degree: i64) -> Rat {
        self.coeffs.get(&degree).cloned().unwrap_or_else(Rat::zero)
    }

    /// Lowest stored power of `y`, if nonzero.
    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Highest stored power of `y`, if nonzero.
    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    pub fn insert_term(&mut self, degree: i64, value: Rat) {
        if value.is_zero() {
            return;
        }
        match self.coeffs.entry(degree) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &value;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Multiplies by `y^shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(d, c)| (d + shift, c.clone()))
                .collect(),
        }
    }

    /// Exact division: `Some(q)` with `self = q * divisor`, or `None` when
    /// the divisor does not divide exactly in the Laurent ring.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        // Shift both to ordinary polynomials and long-divide; a unit y^k
        // shuffles freely between quotient and divisor.
        let a_min = self.min_degree().unwrap();
        let b_min = divisor.min_degree().unwrap();
        let a = self.shifted(-a_min);
        let b = divisor.shifted(-b_min);
        let b_deg = b.max_degree().unwrap();
        let b_lead = b.coeff(b_deg);
        let mut rem = a;
        let mut quotient = Self::zero();
        while !rem.is_zero() {
            let r_deg = rem.max_degree().unwrap();
            if r_deg < b_deg {
                return None;
            }
            let factor = rem.coeff(r_deg) / &b_lead;
            let term = Self::monomial(r_deg - b_deg, factor);
            rem = &rem - &(&term * &b);
            quotient = &quotient + &term;
        }
        Some(quotient.shifted(a_min - b_min))
    }

    pub fn eval_complex(&self, y: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(d, c)| Complex64::new(rat_to_f64(c), 0.0) * y.powi(*d as i32))
            .sum()
    }

    /// Coefficients of `self * y^(-min_degree)` in ascending order, i.e. the
    /// numerator polynomial after clearing negative powers.
    pub fn numerator_coeffs(&self) -> Vec<Rat> {
        match (self.min_degree(), self.max_degree()) {
            (Some(lo), Some(hi)) => (lo..=hi).map(|d| self.coeff(d)).collect(),
            _ => vec![],
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (d, c) in &rhs.coeffs {
            out.insert_term(*d, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (d, c) in &rhs.coeffs {
            out.insert_term(*d, -c.clone());
        }
        out
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (da, ca) in &self.coeffs {
            for (db, cb) in &rhs.coeffs {
                out.insert_term(da + db, ca * cb);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(d, c)| (*d, -c.clone())).collect(),
        }
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().rev() {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            match d {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*y")?,
                _ => write!(f, "{c}*y^{d}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::rat_int;
    use rand::{Rng, SeedableRng};

    fn random_poly(rng: &mut impl Rng) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for _ in 0..rng.gen_range(0..4) {
            p.insert_term(
                rng.gen_range(-3..=3),
                crate::exact::rat::rat(rng.gen_range(-5..=5), rng.gen_range(1..=4)),
            );
        }
        p
    }

    #[test]
    fn ring_axioms_hold_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let (a, b, c) = (
                random_poly(&mut rng),
                random_poly(&mut rng),
                random_poly(&mut rng),
            );
            assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            assert_eq!(&a * &b, &b * &a);
            assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            assert_eq!(&(&a + &b) - &b, a);
        }
    }

    #[test]
    fn division_is_exact_when_divisible() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = random_poly(&mut rng);
            let b = random_poly(&mut rng);
            if b.is_zero() {
                continue;
            }
            let product = &a * &b;
            assert_eq!(product.div_exact(&b).unwrap(), a);
        }
        // 1 is not divisible by 1 + y.
        let unit = LaurentPoly::one();
        let mut one_plus_y = LaurentPoly::one();
        one_plus_y.insert_term(1, rat_int(1));
        assert!(unit.div_exact(&one_plus_y).is_none());
    }

    #[test]
    fn eval_matches_hand_value() {
        // 2 - 12 y^-1 at y = 4 -> -1
        let mut p = LaurentPoly::constant(rat_int(2));
        p.insert_term(-1, rat_int(-12));
        let v = p.eval_complex(Complex64::new(4.0, 0.0));
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }
}
