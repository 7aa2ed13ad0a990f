//! Square matrices over the Laurent ring: products, exact cofactor
//! determinants, adjugates, and the characteristic polynomial in `x`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::bivar::BivarLaurent;
use super::laurent::LaurentPoly;
use super::rat::Rat;
use crate::error::AlgebraError;

/// Cofactor expansion is exponential; lattice periods stay small so anything
/// larger than this is a usage error, not a workload.
pub const MAX_COFACTOR_DIM: usize = 8;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentMatrix {
    n: usize,
    entries: Vec<LaurentPoly>, // row-major, n * n
}

impl LaurentMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![LaurentPoly::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            *m.entry_mut(i, i) = LaurentPoly::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> &LaurentPoly {
        &self.entries[row * self.n + col]
    }

    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut LaurentPoly {
        &mut self.entries[row * self.n + col]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = LaurentPoly::zero();
                for k in 0..self.n {
                    acc = &acc + &(self.entry(i, k) * rhs.entry(k, j));
                }
                *out.entry_mut(i, j) = acc;
            }
        }
        out
    }

    pub fn scale(&self, factor: &LaurentPoly) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = &*e * factor;
        }
        out
    }

    /// Entrywise exact division; `None` when some entry is not divisible.
    pub fn div_exact(&self, divisor: &LaurentPoly) -> Option<Self> {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = e.div_exact(divisor)?;
        }
        Some(out)
    }

    /// Evaluates every entry at a complex `y`.
    pub fn eval_complex(&self, y: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).eval_complex(y))
    }

    /// Adjugate via cofactor minors: `self * adjugate = det * identity`.
    pub fn adjugate(&self) -> Result<Self, AlgebraError> {
        guard_dim(self.n)?;
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let minor = self.minor(i, j);
                let mut cof = det_laurent_unchecked(&minor);
                if (i + j) % 2 == 1 {
                    cof = -&cof;
                }
                *out.entry_mut(j, i) = cof;
            }
        }
        Ok(out)
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let mut rows = Vec::with_capacity(self.n - 1);
        for i in 0..self.n {
            if i == row {
                continue;
            }
            let mut r = Vec::with_capacity(self.n - 1);
            for j in 0..self.n {
                if j == col {
                    continue;
                }
                r.push(self.entry(i, j).clone());
            }
            rows.push(r);
        }
        Self::from_rows(rows)
    }
}

fn guard_dim(n: usize) -> Result<(), AlgebraError> {
    if n > MAX_COFACTOR_DIM {
        Err(AlgebraError::DimensionTooLarge(n))
    } else {
        Ok(())
    }
}

/// Exact determinant by cofactor expansion along the first row.
pub fn laurent_det(m: &LaurentMatrix) -> Result<LaurentPoly, AlgebraError> {
    guard_dim(m.dim())?;
    Ok(det_laurent_unchecked(m))
}

fn det_laurent_unchecked(m: &LaurentMatrix) -> LaurentPoly {
    match m.dim() {
        0 => LaurentPoly::one(),
        1 => m.entry(0, 0).clone(),
        2 => &(m.entry(0, 0) * m.entry(1, 1)) - &(m.entry(0, 1) * m.entry(1, 0)),
        n => {
            let mut acc = LaurentPoly::zero();
            for j in 0..n {
                if m.entry(0, j).is_zero() {
                    continue;
                }
                let term = m.entry(0, j) * &det_laurent_unchecked(&m.minor(0, j));
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Characteristic polynomial `det(M - x * identity)` of a Laurent matrix,
/// as an exact bivariate polynomial. The `x^n` coefficient is `(-1)^n`.
///
/// Internally the matrix is scaled by the common denominator `c` of all
/// entry coefficients and the expansion runs over integer coefficients
/// (reduction on every big-rational multiply dominates once the lattice
/// entries have grown to hundreds of digits). With `H = det(cM - x'E)`,
/// the coefficient of `x^j` in the result is the one of `H` divided by
/// `c^(n-j)`.
pub fn charpoly(m: &LaurentMatrix) -> Result<BivarLaurent, AlgebraError> {
    guard_dim(m.dim())?;
    let n = m.dim();
    let mut denom = BigInt::one();
    for e in &m.entries {
        for (_, c) in e.terms() {
            denom = denom.lcm(c.denom());
        }
    }
    let mut scaled: Vec<Vec<IntBivar>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = IntBivar::default();
            for (d, c) in m.entry(i, j).terms() {
                e.insert((0, d), c.numer() * (&denom / c.denom()));
            }
            if i == j {
                e.insert((1, 0), -BigInt::one());
            }
            row.push(e);
        }
        scaled.push(row);
    }
    let det = det_int_subsets(&scaled);
    let mut out = BivarLaurent::zero();
    for ((x_deg, y_deg), value) in det.coeffs {
        out.insert_term(
            x_deg,
            y_deg,
            Rat::new(value, denom.pow((n as u32) - x_deg)),
        );
    }
    Ok(out)
}

/// Integer bivariate polynomial used only inside the determinant expansion.
#[derive(Clone, Default)]
struct IntBivar {
    coeffs: BTreeMap<(u32, i64), BigInt>,
}

impl IntBivar {
    fn insert(&mut self, key: (u32, i64), value: BigInt) {
        if value.is_zero() {
            return;
        }
        match self.coeffs.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += value;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn mul_add_into(&self, rhs: &IntBivar, negate: bool, acc: &mut IntBivar) {
        for ((xa, ya), ca) in &self.coeffs {
            for ((xb, yb), cb) in &rhs.coeffs {
                let term = ca * cb;
                acc.insert((xa + xb, ya + yb), if negate { -term } else { term });
            }
        }
    }
}

/// Determinant by Laplace expansion with shared minors: `dp[s]` is the
/// determinant of the leading |s| rows restricted to the column set `s`,
/// so every minor is computed once instead of once per expansion path.
fn det_int_subsets(m: &[Vec<IntBivar>]) -> IntBivar {
    let n = m.len();
    if n == 0 {
        let mut one = IntBivar::default();
        one.insert((0, 0), BigInt::one());
        return one;
    }
    let full = (1usize << n) - 1;
    let mut dp: Vec<Option<IntBivar>> = vec![None; full + 1];
    let mut empty = IntBivar::default();
    empty.insert((0, 0), BigInt::one());
    dp[0] = Some(empty);
    let mut by_count: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for s in 1..=full {
        by_count[s.count_ones() as usize].push(s);
    }
    for count in 1..=n {
        for &s in &by_count[count] {
            let row = count - 1;
            let mut acc = IntBivar::default();
            let mut position = 0;
            for col in 0..n {
                if s & (1 << col) == 0 {
                    continue;
                }
                let sub = dp[s & !(1 << col)].as_ref().expect("filled by count order");
                if !m[row][col].coeffs.is_empty() {
                    m[row][col]
                        .mul_add_into(sub, (row + position) % 2 == 1, &mut acc);
                }
                position += 1;
            }
            dp[s] = Some(acc);
        }
        // Entries of lower popcount than the current row window are dead.
        if count >= 2 {
            for &s in &by_count[count - 2] {
                dp[s] = None;
            }
        }
    }
    dp[full].take().expect("full set computed")
}
