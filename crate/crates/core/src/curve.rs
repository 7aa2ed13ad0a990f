//! Floating-point work on the spectral curve.
//!
//! The exact modules stop at the polynomial `F(x, y)`; this one evaluates it:
//! x-fibers over a given y, eigenvector chains of the Lax matrix at a curve
//! point, the boundary limits of the two eigenvector-ratio functions at the
//! points over x = infinity, and divisor extraction for N = 2.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::CurveError;
use crate::exact::{rat_to_f64, BivarLaurent, LaurentMatrix};
use crate::lattice::TodaState;
use crate::spectral::{lax_matrices, spectral_data, LaxMatrices};

/// Relative backward-error budget for points meant to lie on the curve.
const FIBER_RESIDUAL_TOL: f64 = 1e-8;
/// Relative separation below which two fiber roots count as repeated.
const EIGENVALUE_SEPARATION: f64 = 1e-10;

/// A numerical point on (or near) the curve `F(x, y) = 0`.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub x: Complex64,
    pub y: Complex64,
    pub residual: f64,
}

/// Roots of a complex polynomial, coefficients in ascending order.
///
/// Degrees one and two are closed forms; higher degrees use the
/// Durand-Kerner simultaneous iteration with magnitude prescaling, finished
/// by a couple of Newton steps. Deterministic for fixed input.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|l| l.norm() == 0.0) {
        c.pop();
    }
    let degree = c.len().saturating_sub(1);
    match degree {
        0 => vec![],
        1 => vec![-c[0] / c[1]],
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = (b * b - 4.0 * a * cc).sqrt();
            // Pick the sign that avoids cancellation in -b -/+ disc.
            let q = if (b.conj() * disc).re >= 0.0 {
                -0.5 * (b + disc)
            } else {
                -0.5 * (b - disc)
            };
            if q.norm() == 0.0 {
                vec![Complex64::new(0.0, 0.0), -b / a]
            } else {
                vec![q / a, cc / q]
            }
        }
        n => durand_kerner(&c, n),
    }
}

fn durand_kerner(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    // Prescale by a root-magnitude estimate so the iteration starts near the
    // right scale even when the roots are ~1e4 or larger.
    let mut scale: f64 = 0.0;
    for (i, c) in monic.iter().enumerate().take(n) {
        if c.norm() > 0.0 {
            scale = scale.max(c.norm().powf(1.0 / (n - i) as f64));
        }
    }
    if scale == 0.0 {
        return vec![Complex64::new(0.0, 0.0); n];
    }
    let scaled: Vec<Complex64> = monic
        .iter()
        .enumerate()
        .map(|(i, c)| c * scale.powi(-((n - i) as i32)))
        .collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for c in scaled.iter().rev().skip(1) {
            acc = acc * z + c;
        }
        acc
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            Complex64::from_polar(1.5, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.7)
        })
        .collect();
    for _ in 0..400 {
        let mut max_update: f64 = 0.0;
        for k in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let delta = eval(z[k]) / denom;
            z[k] -= delta;
            max_update = max_update.max(delta.norm() / (1.0 + z[k].norm()));
        }
        if max_update < 1e-15 {
            break;
        }
    }
    // Newton polish against the original (unscaled) polynomial.
    let eval_orig = |w: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            dp = dp * w + p;
            p = p * w + c;
        }
        (p, dp)
    };
    z.iter()
        .map(|&root| {
            let mut w = root * scale;
            for _ in 0..3 {
                let (p, dp) = eval_orig(w);
                if dp.norm() > 0.0 {
                    let d = p / dp;
                    if d.norm() < 0.5 * (1.0 + w.norm()) {
                        w -= d;
                    }
                }
            }
            w
        })
        .collect()
}

/// The N points of the fiber of `F(x, y) = 0` over a fixed nonzero y.
pub fn x_fiber(f: &BivarLaurent, y: Complex64) -> Result<Vec<CurvePoint>, CurveError> {
    assert!(y.norm() > 0.0, "the fiber over y = 0 is not affine");
    let n = f.x_degree();
    let coeffs: Vec<Complex64> = (0..=n).map(|j| f.x_slice(j).eval_complex(y)).collect();
    let roots = poly_roots(&coeffs);
    let mut points = Vec::with_capacity(roots.len());
    for x in roots {
        let residual = f.eval_complex(x, y).norm();
        let tol = FIBER_RESIDUAL_TOL * (1.0 + f.eval_magnitude(x, y));
        if !residual.is_finite() || residual > tol {
            return Err(CurveError::IllConditionedFiber { y, residual });
        }
        points.push(CurvePoint { x, y, residual });
    }
    Ok(points)
}

/// Eigenvector of the Lax matrix at a curve point, together with its images
/// one step and M steps along the flow.
///
/// The later vectors come from the exact transfer relations `g' = R(y) g`
/// and `L(y) g'' = g`, never from independent eigendecompositions, so every
/// component ratio is scale-free within the chain.
#[derive(Clone, Debug)]
pub struct EigenChain {
    pub g_t: DVector<Complex64>,
    pub g_t1: DVector<Complex64>,
    pub g_tm: DVector<Complex64>,
}

pub fn eigen_chain(
    state: &TodaState,
    f: &BivarLaurent,
    point: &CurvePoint,
) -> Result<EigenChain, CurveError> {
    let fiber = x_fiber(f, point.y)?;
    let scale = fiber.iter().map(|p| p.x.norm()).fold(0.0, f64::max);
    for (i, a) in fiber.iter().enumerate() {
        for b in fiber.iter().skip(i + 1) {
            if (a.x - b.x).norm() < EIGENVALUE_SEPARATION * (1.0 + scale) {
                return Err(CurveError::RepeatedEigenvalue);
            }
        }
    }
    let lax = lax_matrices(state);
    let x_num = lax.x_matrix.eval_complex(point.y);
    let g_t = null_direction(&x_num, point.x)?;
    chain_from(&lax, point.y, g_t)
}

fn chain_from(
    lax: &LaxMatrices,
    y: Complex64,
    g_t: DVector<Complex64>,
) -> Result<EigenChain, CurveError> {
    let r = lax.r_layers[0].eval_complex(y);
    let g_t1 = &r * &g_t;
    let l = lax.l.eval_complex(y);
    let g_tm = l
        .lu()
        .solve(&g_t)
        .ok_or(CurveError::DegenerateDivisor("singular L factor".into()))?;
    Ok(EigenChain { g_t, g_t1, g_tm })
}

/// Unit vector spanning the (numerical) kernel of `m - x * identity`.
/// Contract: ||(m - xE) g|| <= 1e-8 ||m|| ||g||.
fn null_direction(
    m: &DMatrix<Complex64>,
    x: Complex64,
) -> Result<DVector<Complex64>, CurveError> {
    let n = m.nrows();
    let scale = m.norm().max(1.0);
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= x;
    }
    let svd = (shifted.clone() / Complex64::new(scale, 0.0)).svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let g = v_t.row(n - 1).conjugate().transpose();
    let residual = (&shifted * &g).norm() / scale;
    if residual > FIBER_RESIDUAL_TOL {
        return Err(CurveError::BadEigenvector(residual));
    }
    Ok(g)
}

/// Geometric radius schedule `start, ..., end` with `count` points.
#[derive(Clone, Copy, Debug)]
pub struct RadiusSchedule {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self {
            start: 1e2,
            end: 1e8,
            count: 12,
        }
    }
}

impl RadiusSchedule {
    pub fn radii(&self) -> Vec<f64> {
        assert!(self.count >= 2 && self.start > 0.0 && self.end > self.start);
        let ratio = (self.end / self.start).powf(1.0 / (self.count - 1) as f64);
        (0..self.count)
            .map(|j| self.start * ratio.powi(j as i32))
            .collect()
    }

    fn ratio(&self) -> f64 {
        (self.end / self.start).powf(1.0 / (self.count - 1) as f64)
    }
}

/// One sampled radius on one side of the boundary-limit computation.
#[derive(Clone, Debug)]
pub struct BoundaryRow {
    pub toward_infinity: bool,
    pub radius: f64,
    pub psi: Complex64,
    pub phi: Complex64,
    /// |g_i / g_N| for i = 1..N-1.
    pub ratio_abs: Vec<f64>,
}

/// Extrapolated limits of the eigenvector-ratio functions at the two points
/// over x = infinity, with the measured growth exponents of |g_i / g_N|.
#[derive(Clone, Debug)]
pub struct BoundaryLimits {
    pub psi_p: Complex64,
    pub psi_q: Complex64,
    pub phi_p: Complex64,
    pub phi_q: Complex64,
    /// Log-log slope of |g_i / g_N| against |k| near P; expected N - i.
    pub slopes_p: Vec<f64>,
    /// Same near Q; expected -(N - i).
    pub slopes_q: Vec<f64>,
    pub rows: Vec<BoundaryRow>,
}

impl BoundaryLimits {
    pub fn psi_ratio(&self) -> Complex64 {
        self.psi_q / self.psi_p
    }

    pub fn phi_ratio(&self) -> Complex64 {
        self.phi_q / self.phi_p
    }

    pub fn to_csv(&self) -> String {
        let n_ratios = self.slopes_p.len();
        let mut out = String::from("kind,side,radius,psi_re,psi_im,phi_re,phi_im");
        for i in 1..=n_ratios {
            out.push_str(&format!(",abs_g{i}_over_gN"));
        }
        out.push('\n');
        for row in &self.rows {
            let side = if row.toward_infinity { 'P' } else { 'Q' };
            out.push_str(&format!(
                "sample,{side},{:.6e},{:.17e},{:.17e},{:.17e},{:.17e}",
                row.radius, row.psi.re, row.psi.im, row.phi.re, row.phi.im
            ));
            for r in &row.ratio_abs {
                out.push_str(&format!(",{r:.17e}"));
            }
            out.push('\n');
        }
        for (side, psi, phi, slopes) in [
            ('P', self.psi_p, self.phi_p, &self.slopes_p),
            ('Q', self.psi_q, self.phi_q, &self.slopes_q),
        ] {
            out.push_str(&format!(
                "limit,{side},,{:.17e},{:.17e},{:.17e},{:.17e}",
                psi.re, psi.im, phi.re, phi.im
            ));
            for s in slopes.iter() {
                out.push_str(&format!(",{s:.6}"));
            }
            out.push('\n');
        }
        let (pr, fr) = (self.psi_ratio(), self.phi_ratio());
        out.push_str(&format!(
            "ratio,,,{:.17e},{:.17e},{:.17e},{:.17e}",
            pr.re, pr.im, fr.re, fr.im
        ));
        for _ in 0..n_ratios {
            out.push(',');
        }
        out.push('\n');
        out
    }
}

/// Evaluates the two ratio functions along `|y| = r` (toward the point over
/// y = infinity) and `|y| = 1/r` (toward the one over y = 0), on the fiber
/// branch of maximal |x|, followed by continuity along the schedule. One
/// Richardson step on the last four samples extrapolates the limits.
///
/// Requires gcd(N, M) = 1 so that each of the two fibers collapses to a
/// single point of the completed curve.
pub fn boundary_limits(
    state: &TodaState,
    schedule: &RadiusSchedule,
    angle: f64,
    tol: f64,
) -> Result<BoundaryLimits, CurveError> {
    let n = state.sites();
    let m = state.depth();
    if num_integer::gcd(n, m) != 1 {
        return Err(CurveError::NotCoprime { n, m });
    }
    let data = spectral_data(state).map_err(Box::new)?;
    let f = &data.f;
    let radii = schedule.radii();
    let ratio = schedule.ratio();

    let mut rows = Vec::new();
    let mut limits = [Complex64::default(); 4]; // psi_p, phi_p, psi_q, phi_q
    let mut slopes = [Vec::new(), Vec::new()];

    for (side, toward_infinity) in [(0usize, true), (1usize, false)] {
        // |x| grows like r^(M/N) toward P and like r^(1/N) toward Q.
        let growth = if toward_infinity {
            ratio.powf(m as f64 / n as f64)
        } else {
            ratio.powf(1.0 / n as f64)
        };
        let mut psi_vals = Vec::with_capacity(radii.len());
        let mut phi_vals = Vec::with_capacity(radii.len());
        let mut log_ratios: Vec<Vec<f64>> = vec![Vec::new(); n - 1];
        let mut log_k = Vec::with_capacity(radii.len());
        let mut previous: Option<Complex64> = None;

        for &r in &radii {
            let y = Complex64::from_polar(if toward_infinity { r } else { 1.0 / r }, angle);
            let fiber = x_fiber(f, y)?;
            let x = select_branch(&fiber, previous.map(|p| p * growth));
            previous = Some(x);
            let point = CurvePoint {
                x,
                y,
                residual: f.eval_complex(x, y).norm(),
            };
            let chain = eigen_chain(state, f, &point)?;
            let (g, g1, gm) = (&chain.g_t, &chain.g_t1, &chain.g_tm);
            // The ratio functions read the extreme components, which decay
            // like k^(N-1); once they sink toward the f64 noise floor of the
            // null-vector extraction the limits become silently meaningless,
            // so refuse instead.
            let smallest = g.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min) / g.norm();
            if smallest < 1e-14 {
                return Err(CurveError::ComponentBelowNoiseFloor(smallest));
            }
            let psi = g[0] * g1[n - 1] / (g[n - 1] * g1[0]);
            let phi = g[n - 1] * gm[n - 1] / (g[0] * gm[n - 2] * y);
            psi_vals.push(psi);
            phi_vals.push(phi);
            // Local coordinate modulus: |k| = |y|^(-1/N) toward P, |y|^(1/N) toward Q.
            let k_abs = if toward_infinity {
                r.powf(-1.0 / n as f64)
            } else {
                (1.0 / r).powf(1.0 / n as f64)
            };
            log_k.push(k_abs.ln());
            let mut ratio_abs = Vec::with_capacity(n - 1);
            for i in 0..n - 1 {
                let value = (g[i] / g[n - 1]).norm();
                ratio_abs.push(value);
                log_ratios[i].push(value.ln());
            }
            rows.push(BoundaryRow {
                toward_infinity,
                radius: r,
                psi,
                phi,
                ratio_abs,
            });
        }

        let q = ratio.powf(-1.0 / n as f64);
        limits[2 * side] = richardson_limit(&psi_vals, q, tol)?;
        limits[2 * side + 1] = richardson_limit(&phi_vals, q, tol)?;
        slopes[side] = (0..n - 1)
            .map(|i| fit_slope(&log_k, &log_ratios[i], q))
            .collect();
    }

    Ok(BoundaryLimits {
        psi_p: limits[0],
        phi_p: limits[1],
        psi_q: limits[2],
        phi_q: limits[3],
        slopes_p: slopes[0].clone(),
        slopes_q: slopes[1].clone(),
        rows,
    })
}

/// Branch selection: nearest to the continuity prediction when available,
/// otherwise maximal |x| with a deterministic tie-break.
fn select_branch(fiber: &[CurvePoint], predicted: Option<Complex64>) -> Complex64 {
    match predicted {
        Some(p) => {
            fiber
                .iter()
                .map(|pt| pt.x)
                .min_by(|a, b| {
                    (a - p)
                        .norm()
                        .partial_cmp(&(b - p).norm())
                        .expect("finite")
                })
                .expect("fiber is nonempty")
        }
        None => {
            let mut xs: Vec<Complex64> = fiber.iter().map(|pt| pt.x).collect();
            xs.sort_by(|a, b| {
                b.norm()
                    .partial_cmp(&a.norm())
                    .expect("finite")
                    .then(b.im.partial_cmp(&a.im).expect("finite"))
                    .then(b.re.partial_cmp(&a.re).expect("finite"))
            });
            xs[0]
        }
    }
}

/// Three Richardson levels on the last five samples of a sequence with
/// error expansion C1 q^j + C2 q^{2j} + ...; the spread of the final pair is
/// the convergence certificate. One level (as would suffice for a rapidly
/// decaying expansion) was measured at ~3e-4 on random period-3 lattices,
/// above the 1e-4 contract; the local-coordinate series there has large
/// coefficients, and three levels bring the defect to ~1e-6.
fn richardson_limit(values: &[Complex64], q: f64, tol: f64) -> Result<Complex64, CurveError> {
    assert!(values.len() >= 5, "need at least five samples");
    let mut seq: Vec<Complex64> = values[values.len() - 5..].to_vec();
    let mut power = q;
    for _ in 0..3 {
        seq = seq
            .windows(2)
            .map(|w| (w[1] - power * w[0]) / (1.0 - power))
            .collect();
        power *= q;
    }
    let spread = (seq[1] - seq[0]).norm();
    let scale = 1.0 + seq[1].norm();
    if spread > tol * scale {
        return Err(CurveError::NoConvergence {
            spread,
            tol: tol * scale,
        });
    }
    Ok(seq[1])
}

/// Growth exponent from the last four samples: local finite-difference
/// slopes carry an O(q^j) bias, which one Richardson step removes.
fn fit_slope(xs: &[f64], ys: &[f64], q: f64) -> f64 {
    let n = xs.len();
    assert!(n >= 4);
    let local: Vec<f64> = (n - 4..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let extrap: Vec<f64> = local
        .windows(2)
        .map(|w| (w[1] - q * w[0]) / (1.0 - q))
        .collect();
    extrap[1]
}

/// The affine poles of g_1/g_2 for an N = 2 state: the divisor that tracks
/// the Lax matrix inside the Picard group. Each pole sits over a root y0 of
/// the lower-left matrix entry, with x0 the upper-left entry at y0.
pub fn divisor_points(state: &TodaState) -> Result<Vec<CurvePoint>, CurveError> {
    if state.sites() != 2 {
        return Err(CurveError::UnsupportedPeriod(state.sites()));
    }
    if num_integer::gcd(state.sites(), state.depth()) != 1 {
        return Err(CurveError::NotCoprime {
            n: state.sites(),
            m: state.depth(),
        });
    }
    let data = spectral_data(state).map_err(Box::new)?;
    divisor_points_of_matrix(&lax_matrices(state).x_matrix, &data.f, data.genus)
}

/// Divisor extraction from an arbitrary 2x2 Lax matrix sharing the curve `f`.
pub fn divisor_points_of_matrix(
    x_matrix: &LaurentMatrix,
    f: &BivarLaurent,
    genus: usize,
) -> Result<Vec<CurvePoint>, CurveError> {
    assert_eq!(x_matrix.dim(), 2);
    let lower_left = x_matrix.entry(1, 0);
    let coeffs: Vec<Complex64> = lower_left
        .numerator_coeffs()
        .iter()
        .map(|c| Complex64::new(rat_to_f64(c), 0.0))
        .collect();
    let roots = poly_roots(&coeffs);
    if roots.len() != genus {
        return Err(CurveError::DegenerateDivisor(format!(
            "found {} poles, expected genus {}",
            roots.len(),
            genus
        )));
    }
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    for (i, a) in roots.iter().enumerate() {
        for b in roots.iter().skip(i + 1) {
            if (a - b).norm() < 1e-8 * scale {
                return Err(CurveError::DegenerateDivisor("repeated pole".into()));
            }
        }
    }
    let x11 = x_matrix.entry(0, 0);
    let mut points = Vec::with_capacity(roots.len());
    for y0 in roots {
        let x0 = x11.eval_complex(y0);
        let residual = f.eval_complex(x0, y0).norm();
        let tol = FIBER_RESIDUAL_TOL * (1.0 + f.eval_magnitude(x0, y0));
        if residual > tol {
            return Err(CurveError::DegenerateDivisor(format!(
                "pole candidate off the curve: residual {residual:.3e}"
            )));
        }
        points.push(CurvePoint {
            x: x0,
            y: y0,
            residual,
        });
    }
    Ok(points)
}
