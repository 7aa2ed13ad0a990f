//! Lax matrices, conjugation maps, and the spectral polynomial.
//!
//! The evolution is equivalent to the matrix refactorization
//! `L_{t+1} R_{t+M} = R_t L_t`, with `L` carrying the V-variables and one
//! `R_j` per I-layer. The product `X_t = L_t R_{t+M-1} ... R_t` evolves by
//! conjugation, so `F(x, y) = det(X_t(y) - x E)` is a generating function of
//! conserved quantities. The curve `F = 0` carries M + 1 marked points over
//! x = 0 whose y-values are the layer products, and its genus follows from
//! N, M and their gcd.

use num_integer::Integer;

use crate::error::SpectralError;
use crate::exact::{
    charpoly, format_rat, laurent_det, rat_int, BivarLaurent, LaurentMatrix, LaurentPoly, Rat,
};
use crate::lattice::{evolve, TodaState};

/// The Lax factors of one state: `x_matrix = l * r_layers[M-1] * ... * r_layers[0]`.
#[derive(Clone, Debug)]
pub struct LaxMatrices {
    pub l: LaurentMatrix,
    pub r_layers: Vec<LaurentMatrix>,
    pub x_matrix: LaurentMatrix,
}

/// `L`: unit diagonal, subdiagonal V_1..V_{N-1}, corner entry V_N / y.
fn l_matrix(v: &[Rat]) -> LaurentMatrix {
    let n = v.len();
    let mut m = LaurentMatrix::identity(n);
    for (i, value) in v.iter().take(n - 1).enumerate() {
        *m.entry_mut(i + 1, i) = LaurentPoly::constant(value.clone());
    }
    *m.entry_mut(0, n - 1) = LaurentPoly::monomial(-1, v[n - 1].clone());
    m
}

/// `R`: diagonal I_1..I_N, unit superdiagonal, corner entry y.
fn r_matrix(i_layer: &[Rat]) -> LaurentMatrix {
    let n = i_layer.len();
    let mut m = LaurentMatrix::zeros(n);
    for (i, value) in i_layer.iter().enumerate() {
        *m.entry_mut(i, i) = LaurentPoly::constant(value.clone());
    }
    for i in 0..n - 1 {
        *m.entry_mut(i, i + 1) = LaurentPoly::one();
    }
    *m.entry_mut(n - 1, 0) = LaurentPoly::monomial(1, rat_int(1));
    m
}

/// The cyclic-shift matrix: unit superdiagonal with corner entry y.
pub fn shift_matrix(n: usize) -> LaurentMatrix {
    let mut s = LaurentMatrix::zeros(n);
    for i in 0..n - 1 {
        *s.entry_mut(i, i + 1) = LaurentPoly::one();
    }
    *s.entry_mut(n - 1, 0) = LaurentPoly::monomial(1, rat_int(1));
    s
}

fn shift_matrix_inverse(n: usize) -> LaurentMatrix {
    let mut s = LaurentMatrix::zeros(n);
    for i in 0..n - 1 {
        *s.entry_mut(i + 1, i) = LaurentPoly::one();
    }
    *s.entry_mut(0, n - 1) = LaurentPoly::monomial(-1, rat_int(1));
    s
}

pub fn lax_matrices(state: &TodaState) -> LaxMatrices {
    let l = l_matrix(state.v());
    let r_layers: Vec<LaurentMatrix> = (0..state.depth())
        .map(|j| r_matrix(state.i_layer(j)))
        .collect();
    let mut x_matrix = l.clone();
    for r in r_layers.iter().rev() {
        x_matrix = x_matrix.mul(r);
    }
    LaxMatrices {
        l,
        r_layers,
        x_matrix,
    }
}

/// The three conjugations acting on the Lax matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjugationKind {
    /// Site shift n -> n+1: conjugation by the cyclic-shift matrix.
    SiteShift,
    /// One time step t -> t+1: conjugation by the front R factor.
    TimeStep,
    /// M time steps t -> t+M: conjugation by the inverse of L.
    TimeStepM,
}

/// Conjugates `x_matrix` (which must be the Lax matrix of `state`).
///
/// The site shift is exact over the Laurent ring. The time conjugations are
/// computed as adjugate products divided exactly by the determinant, then
/// cross-checked against the Lax matrix of the stepped state; the two routes
/// are independent, so agreement is a real test of the refactorization.
pub fn conjugate(
    x_matrix: &LaurentMatrix,
    kind: ConjugationKind,
    state: &TodaState,
) -> Result<LaurentMatrix, SpectralError> {
    let n = state.sites();
    match kind {
        ConjugationKind::SiteShift => {
            Ok(shift_matrix(n).mul(x_matrix).mul(&shift_matrix_inverse(n)))
        }
        ConjugationKind::TimeStep => {
            let r = r_matrix(state.front_layer());
            let det = laurent_det(&r)?;
            if det.is_zero() {
                return Err(SpectralError::NonInvertibleFactor("R"));
            }
            let conjugated = r
                .mul(x_matrix)
                .mul(&r.adjugate()?)
                .div_exact(&det)
                .ok_or(SpectralError::InexactConjugation)?;
            let stepped = lax_matrices(&state.step()?).x_matrix;
            if conjugated != stepped {
                return Err(SpectralError::InexactConjugation);
            }
            Ok(conjugated)
        }
        ConjugationKind::TimeStepM => {
            let l = l_matrix(state.v());
            let det = laurent_det(&l)?;
            if det.is_zero() {
                return Err(SpectralError::NonInvertibleFactor("L"));
            }
            let conjugated = l
                .adjugate()?
                .mul(x_matrix)
                .mul(&l)
                .div_exact(&det)
                .ok_or(SpectralError::InexactConjugation)?;
            let mut advanced = state.clone();
            for _ in 0..state.depth() {
                advanced = advanced.step()?;
            }
            let stepped = lax_matrices(&advanced).x_matrix;
            if conjugated != stepped {
                return Err(SpectralError::InexactConjugation);
            }
            Ok(conjugated)
        }
    }
}

/// The spectral polynomial together with its marked points and genus.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub f: BivarLaurent,
    pub genus: usize,
    pub gcd_m: usize,
    /// y-values of the points A_j over x = 0: `(-1)^N * prod_n I_n^{t+j}`.
    pub points_a: Vec<Rat>,
    /// y-value of the point B over x = 0. The displayed value `prod_n V_n^t`
    /// lies on the curve with the sign `(-1)^N`, same as for the A_j.
    pub point_b: Rat,
    /// The constant E: product of all I entries times the V product.
    pub q_constant: Rat,
}

pub fn genus_of(n: usize, m: usize) -> usize {
    let gcd = n.gcd(&m);
    let numerator = (n - 1) * (m + 1) + 1 - gcd;
    debug_assert_eq!(numerator % 2, 0);
    numerator / 2
}

pub fn spectral_data(state: &TodaState) -> Result<SpectralData, SpectralError> {
    let n = state.sites();
    let m = state.depth();
    let lax = lax_matrices(state);
    let f = charpoly(&lax.x_matrix)?;

    let sign = if n.is_multiple_of(2) {
        rat_int(1)
    } else {
        rat_int(-1)
    };
    let points_a: Vec<Rat> = (0..m).map(|j| &sign * &state.layer_product(j)).collect();
    let point_b = &sign * &state.v_product();
    let q_constant = (0..m)
        .map(|j| state.layer_product(j))
        .product::<Rat>()
        * state.v_product();

    // Exact multiset check: y * F(0, y) must equal its factorization over the
    // marked points, up to the leading coefficient.
    let f0 = f.x_slice(0).shifted(1);
    let mut expected = LaurentPoly::constant(f0.coeff(f0.max_degree().unwrap_or(0)));
    for root in points_a.iter().chain(std::iter::once(&point_b)) {
        let mut factor = LaurentPoly::monomial(1, rat_int(1));
        factor.insert_term(0, -root.clone());
        expected = &expected * &factor;
    }
    if f0 != expected {
        return Err(SpectralError::SpecialPointMismatch);
    }

    Ok(SpectralData {
        f,
        genus: genus_of(n, m),
        gcd_m: n.gcd(&m),
        points_a,
        point_b,
        q_constant,
    })
}

/// Per-step spectral coefficients along a trajectory, with an exactness verdict.
#[derive(Clone, Debug)]
pub struct InvariantReport {
    /// (x-degree, y-degree) keys of the first state's polynomial.
    pub keys: Vec<(u32, i64)>,
    /// One row per step: the coefficients at `keys`.
    pub rows: Vec<Vec<Rat>>,
    pub exact: bool,
}

impl InvariantReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,x_deg,y_deg,value\n");
        for (step, row) in self.rows.iter().enumerate() {
            for ((x_deg, y_deg), value) in self.keys.iter().zip(row) {
                out.push_str(&format!(
                    "{step},{x_deg},{y_deg},{}\n",
                    format_rat(value)
                ));
            }
        }
        out
    }
}

pub fn invariant_report(trajectory: &[TodaState]) -> Result<InvariantReport, SpectralError> {
    assert!(!trajectory.is_empty());
    let first = charpoly(&lax_matrices(&trajectory[0]).x_matrix)?;
    let keys: Vec<(u32, i64)> = first.terms().map(|(x, y, _)| (x, y)).collect();
    let mut rows = Vec::with_capacity(trajectory.len());
    let mut exact = true;
    for state in trajectory {
        let f = charpoly(&lax_matrices(state).x_matrix)?;
        if f != first {
            exact = false;
        }
        rows.push(keys.iter().map(|&(x, y)| f.coeff(x, y)).collect());
    }
    Ok(InvariantReport { keys, rows, exact })
}

/// The N = M = 2 conserved quantities, including the one the spectral curve
/// does not see.
#[derive(Clone, Debug)]
pub struct Gcd2Diagnostics {
    pub u: [Rat; 5],
    /// Exact conservation verdict for each of U_1..U_5 along the trajectory.
    pub conserved: [bool; 5],
    /// Whether the spectral polynomial matches its closed form in U_1..U_4.
    pub charpoly_matches: bool,
}

/// U_1..U_4 (the spectral coefficients) and U_5 (the hidden invariant) of an
/// N = M = 2 state.
pub fn gcd2_quantities(state: &TodaState) -> [Rat; 5] {
    assert!(state.sites() == 2 && state.depth() == 2);
    let (i0, i1, v) = (state.i_layer(0), state.i_layer(1), state.v());
    let u1 = &(&(&i0[0] * &i0[1]) + &(&i1[0] * &i1[1])) + &(&v[0] * &v[1]);
    let u2 = [
        &i0[0] * &i1[0],
        &i0[1] * &i1[1],
        &i0[0] * &v[1],
        &i1[0] * &v[0],
        &i0[1] * &v[0],
        &i1[1] * &v[1],
    ]
    .iter()
    .sum();
    let p0 = &i0[0] * &i0[1];
    let p1 = &i1[0] * &i1[1];
    let w = &v[0] * &v[1];
    let u3 = &(&(&p0 * &p1) + &(&p1 * &w)) + &(&w * &p0);
    let u4 = &(&p0 * &p1) * &w;
    let u5 = [&i0[0], &i0[1], &i1[0], &i1[1], &v[0], &v[1]]
        .iter()
        .copied()
        .sum();
    [u1, u2, u3, u4, u5]
}

/// Closed form of the N = M = 2 spectral polynomial:
/// `y^2 - y (2x + U_1) + x^2 - U_2 x + U_3 - U_4 / y`.
pub fn gcd2_charpoly_from_quantities(u: &[Rat; 5]) -> BivarLaurent {
    let mut f = BivarLaurent::monomial(0, 2, rat_int(1));
    f.insert_term(1, 1, rat_int(-2));
    f.insert_term(0, 1, -u[0].clone());
    f.insert_term(2, 0, rat_int(1));
    f.insert_term(1, 0, -u[1].clone());
    f.insert_term(0, 0, u[2].clone());
    f.insert_term(0, -1, -u[3].clone());
    f
}

pub fn gcd2_diagnostics(
    state: &TodaState,
    steps: usize,
) -> Result<Gcd2Diagnostics, SpectralError> {
    assert!(
        state.sites() == 2 && state.depth() == 2,
        "diagnostics are specific to N = M = 2"
    );
    let u = gcd2_quantities(state);
    let f = charpoly(&lax_matrices(state).x_matrix)?;
    let charpoly_matches = f == gcd2_charpoly_from_quantities(&u);

    let trajectory = evolve(state, steps)?;
    let mut conserved = [true; 5];
    for later in &trajectory[1..] {
        let u_later = gcd2_quantities(later);
        for (flag, (a, b)) in conserved.iter_mut().zip(u.iter().zip(u_later.iter())) {
            if a != b {
                *flag = false;
            }
        }
    }
    Ok(Gcd2Diagnostics {
        u,
        conserved,
        charpoly_matches,
    })
}
