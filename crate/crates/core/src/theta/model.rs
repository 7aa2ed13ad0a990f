//! Hyperelliptic completion of the N = 2, M = 1 spectral curve.
//!
//! The spectral polynomial has the shape `F = p(x) - y - c/y` with a monic
//! quadratic `p`. Multiplying by `-y` gives `y^2 - p(x) y + c = 0`, and the
//! substitution `w = 2y - p(x)` turns it into `w^2 = q(x) := p(x)^2 - 4c`,
//! a genus-1 quartic model. The two points over x = infinity separate by the
//! sign of `w / x^2`: +1 on the branch with y ~ x^2, -1 on the branch with
//! y -> 0.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::ThetaError;
use crate::exact::{rat_int, rat_to_f64, Rat};
use crate::lattice::TodaState;
use crate::spectral::spectral_data;

#[derive(Clone, Debug)]
pub struct HyperellipticModel {
    /// p(x) = x^2 + p1 x + p0, exact.
    pub p1: Rat,
    pub p0: Rat,
    /// The y * y^-1 coefficient: y^2 - p(x) y + c = 0, exact.
    pub c: Rat,
    /// Monic quartic q = p^2 - 4c, float coefficients ascending.
    pub q: [f64; 5],
    /// Branch points (roots of q), sorted by (re, im).
    pub branch_points: [Complex64; 4],
}

impl HyperellipticModel {
    pub fn from_state(state: &TodaState) -> Result<Self, ThetaError> {
        if state.sites() != 2 || state.depth() != 1 {
            return Err(ThetaError::UnsupportedShape {
                n: state.sites(),
                m: state.depth(),
            });
        }
        let data = spectral_data(state)?;
        let f = &data.f;
        // Expected monomials: x^2, x, 1, y, y^-1 and nothing else.
        debug_assert_eq!(f.coeff(2, 0), rat_int(1));
        debug_assert_eq!(f.coeff(0, 1), rat_int(-1));
        let p1 = f.coeff(1, 0);
        let p0 = f.coeff(0, 0);
        let c = -f.coeff(0, -1);
        debug_assert_eq!(c, data.q_constant);

        let (p1f, p0f, cf) = (rat_to_f64(&p1), rat_to_f64(&p0), rat_to_f64(&c));
        // q = (x^2 + p1 x + p0)^2 - 4c
        let q = [
            p0f * p0f - 4.0 * cf,
            2.0 * p0f * p1f,
            p1f * p1f + 2.0 * p0f,
            2.0 * p1f,
            1.0,
        ];
        let mut roots = crate::curve::poly_roots(&q.map(|v| Complex64::new(v, 0.0)));
        roots.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .expect("finite")
                .then(a.im.partial_cmp(&b.im).expect("finite"))
        });
        let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
        for i in 0..4 {
            for j in i + 1..4 {
                if (roots[i] - roots[j]).norm() < 1e-8 * scale {
                    return Err(ThetaError::CurveSingular(format!(
                        "branch points {i} and {j} collide"
                    )));
                }
            }
        }
        Ok(Self {
            p1,
            p0,
            c,
            q,
            branch_points: [roots[0], roots[1], roots[2], roots[3]],
        })
    }

    pub fn p_eval(&self, x: Complex64) -> Complex64 {
        let p1 = rat_to_f64(&self.p1);
        let p0 = rat_to_f64(&self.p0);
        x * x + p1 * x + p0
    }

    pub fn q_eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for c in self.q.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sheet coordinate of a curve point: w = 2y - p(x), with w^2 = q(x).
    pub fn w_of(&self, x: Complex64, y: Complex64) -> Complex64 {
        2.0 * y - self.p_eval(x)
    }

    /// y recovered from a sheet point: y = (p(x) + w) / 2.
    pub fn y_of(&self, x: Complex64, w: Complex64) -> Complex64 {
        (self.p_eval(x) + w) / 2.0
    }

    /// `u^4 q(1/u)`, the quartic seen from infinity; regular with value 1 at
    /// u = 0, and its square root at u = 0 is +1 on the branch through the
    /// point with y ~ x^2 and -1 on the branch with y -> 0.
    pub fn q_at_infinity(&self, u: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for c in self.q.iter() {
            acc = acc * u + c;
        }
        acc
    }
}
