//! Bivariate polynomials: ordinary powers of `x`, Laurent powers of `y`,
//! exact rational coefficients. This is the home of the spectral polynomial
//! `F(x, y)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use super::laurent::LaurentPoly;
use super::rat::{rat_to_f64, Rat};

#[derive(Clone, PartialEq, Eq, Default)]
pub struct BivarLaurent {
    /// Keyed by (x-degree >= 0, y-degree in Z); zero coefficients absent.
    coeffs: BTreeMap<(u32, i64), Rat>,
}

impl BivarLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `value * x^x_deg * y^y_deg`
    pub fn monomial(x_deg: u32, y_deg: i64, value: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !value.is_zero() {
            coeffs.insert((x_deg, y_deg), value);
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, x_deg: u32, y_deg: i64) -> Rat {
        self.coeffs
            .get(&(x_deg, y_deg))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn insert_term(&mut self, x_deg: u32, y_deg: i64, value: Rat) {
        if value.is_zero() {
            return;
        }
        match self.coeffs.entry((x_deg, y_deg)) {
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

    pub fn terms(&self) -> impl Iterator<Item = (u32, i64, &Rat)> {
        self.coeffs.iter().map(|((x, y), c)| (*x, *y, c))
    }

    pub fn x_degree(&self) -> u32 {
        self.coeffs.keys().map(|(x, _)| *x).max().unwrap_or(0)
    }

    pub fn y_degree_range(&self) -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for (_, y) in self.coeffs.keys() {
            lo = lo.min(*y);
            hi = hi.max(*y);
        }
        if self.coeffs.is_empty() {
            None
        } else {
            Some((lo, hi))
        }
    }

    /// The coefficient of `x^x_deg` as a Laurent polynomial in `y`.
    pub fn x_slice(&self, x_deg: u32) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for ((x, y), c) in &self.coeffs {
            if *x == x_deg {
                out.insert_term(*y, c.clone());
            }
        }
        out
    }

    /// Exact substitution of `x = value`, leaving a Laurent polynomial in `y`.
    pub fn substitute_x(&self, value: &Rat) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        let mut power = Rat::from_integer(1.into());
        for x_deg in 0..=self.x_degree() {
            for (y_deg, c) in self.x_slice(x_deg).terms() {
                out.insert_term(y_deg, c * &power);
            }
            power *= value;
        }
        out
    }

    pub fn eval_complex(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|((xd, yd), c)| {
                Complex64::new(rat_to_f64(c), 0.0) * x.powi(*xd as i32) * y.powi(*yd as i32)
            })
            .sum()
    }

    /// Sum of term magnitudes at `(x, y)`: the natural backward-error scale
    /// for residuals of points meant to lie on the zero set.
    pub fn eval_magnitude(&self, x: Complex64, y: Complex64) -> f64 {
        self.coeffs
            .iter()
            .map(|((xd, yd), c)| {
                rat_to_f64(c).abs() * x.norm().powi(*xd as i32) * y.norm().powi(*yd as i32)
            })
            .sum()
    }
}

impl Add for &BivarLaurent {
    type Output = BivarLaurent;
    fn add(self, rhs: &BivarLaurent) -> BivarLaurent {
        let mut out = self.clone();
        for ((x, y), c) in &rhs.coeffs {
            out.insert_term(*x, *y, c.clone());
        }
        out
    }
}

impl Sub for &BivarLaurent {
    type Output = BivarLaurent;
    fn sub(self, rhs: &BivarLaurent) -> BivarLaurent {
        let mut out = self.clone();
        for ((x, y), c) in &rhs.coeffs {
            out.insert_term(*x, *y, -c.clone());
        }
        out
    }
}

impl Mul for &BivarLaurent {
    type Output = BivarLaurent;
    fn mul(self, rhs: &BivarLaurent) -> BivarLaurent {
        let mut out = BivarLaurent::zero();
        for ((xa, ya), ca) in &self.coeffs {
            for ((xb, yb), cb) in &rhs.coeffs {
                out.insert_term(xa + xb, ya + yb, ca * cb);
            }
        }
        out
    }
}

impl Neg for &BivarLaurent {
    type Output = BivarLaurent;
    fn neg(self) -> BivarLaurent {
        BivarLaurent {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (*k, -c.clone()))
                .collect(),
        }
    }
}

impl fmt::Debug for BivarLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BivarLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((xd, yd), c) in self.coeffs.iter().rev() {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if *xd > 0 {
                write!(f, "*x")?;
                if *xd > 1 {
                    write!(f, "^{xd}")?;
                }
            }
            if *yd != 0 {
                write!(f, "*y")?;
                if *yd != 1 {
                    write!(f, "^{yd}")?;
                }
            }
        }
        Ok(())
    }
}
