//! Periods and Abel integrals on the genus-1 quartic model.
//!
//! The holomorphic differential is dx/w on w^2 = q(x). Cycle periods come
//! from segment integrals between branch points with the sine substitution
//! that removes both endpoint singularities. Abel integrals run along
//! piecewise-straight paths from a fixed branch point, with the square-root
//! sheet tracked continuously; paths are planned around the other branch
//! points and segments split adaptively whenever the sheet would drift by
//! more than a quarter turn. Targets at x = infinity are reached in the
//! coordinate u = 1/x, where the integrand is regular.
//!
//! Everything is normalized by the first period, so Abel values live in
//! C / (Z + Omega Z). All verified identities are differences modulo that
//! lattice; raw representatives depend on the fixed path conventions.

use num_complex::Complex64;

use crate::curve::{divisor_points, CurvePoint};
use crate::error::ThetaError;
use crate::exact::rat_to_f64;
use crate::lattice::TodaState;
use crate::spectral::spectral_data;

use super::model::HyperellipticModel;
use super::quad::gauss_legendre;

const LEG_NODES: usize = 32;
const MAX_SPLIT_DEPTH: usize = 48;
const QUARTER_TURN: f64 = std::f64::consts::FRAC_PI_4;

/// Cycle periods of dx/w and their ratio, oriented so Im(omega) > 0.
#[derive(Clone, Copy, Debug)]
pub struct PeriodData {
    pub a_period: Complex64,
    pub b_period: Complex64,
    pub omega: Complex64,
    pub nodes: usize,
}

/// Loop integrals of dx/w around adjacent branch-point pairs, computed on a
/// monic quartic with the given roots. Exposed separately from the model so
/// synthetic quartics can cross-check the machinery.
pub fn periods_of_quartic(
    branch_points: &[Complex64; 4],
    nodes: usize,
) -> Result<PeriodData, ThetaError> {
    let coarse = periods_once(branch_points, nodes);
    let fine = periods_once(branch_points, 2 * nodes);
    let drift = (coarse.2 - fine.2).norm();
    if !drift.is_finite() || drift > 1e-9 {
        return Err(ThetaError::QuadratureNoConverge(drift));
    }
    let (a_period, mut b_period, mut omega) = fine;
    if omega.im == 0.0 || !omega.im.is_finite() {
        return Err(ThetaError::BadPeriodMatrix);
    }
    if omega.im < 0.0 {
        b_period = -b_period;
        omega = -omega;
    }
    Ok(PeriodData {
        a_period,
        b_period,
        omega,
        nodes: 2 * nodes,
    })
}

pub fn periods(model: &HyperellipticModel, nodes: usize) -> Result<PeriodData, ThetaError> {
    periods_of_quartic(&model.branch_points, nodes)
}

fn periods_once(e: &[Complex64; 4], nodes: usize) -> (Complex64, Complex64, Complex64) {
    let a = cut_loop_integral(e[0], e[1], e[2], e[3], nodes);
    let b = cut_loop_integral(e[1], e[2], e[0], e[3], nodes);
    (a, b, b / a)
}

/// Loop integral of dx/w around the cut joining `ea` and `eb`, equal to twice
/// the segment integral. The substitution x = mid + half sin(phi) cancels
/// both square-root endpoint factors, leaving the smooth integrand
/// -i / sqrt((x - ec)(x - ed)) with the root tracked continuously in phi.
fn cut_loop_integral(
    ea: Complex64,
    eb: Complex64,
    ec: Complex64,
    ed: Complex64,
    nodes: usize,
) -> Complex64 {
    let (ns, ws) = gauss_legendre(nodes);
    let mid = 0.5 * (ea + eb);
    let half = 0.5 * (eb - ea);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut h_prev: Option<Complex64> = None;
    for (t, w) in ns.iter().zip(&ws) {
        let phi = std::f64::consts::FRAC_PI_2 * t;
        let x = mid + half * phi.sin();
        let g = (x - ec) * (x - ed);
        let h = match h_prev {
            None => g.sqrt(),
            Some(prev) => nearest_sqrt(g, prev),
        };
        h_prev = Some(h);
        acc += w / h;
    }
    acc *= std::f64::consts::FRAC_PI_2;
    2.0 * Complex64::new(0.0, -1.0) * acc
}

fn nearest_sqrt(value: Complex64, previous: Complex64) -> Complex64 {
    let root = value.sqrt();
    if (root - previous).norm() <= (root + previous).norm() {
        root
    } else {
        -root
    }
}

fn turn_angle(a: Complex64, b: Complex64) -> f64 {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return std::f64::consts::PI;
    }
    (b / a).arg().abs()
}

/// Target of an Abel integral.
#[derive(Clone, Copy, Debug)]
pub enum AbelTarget {
    /// A finite curve point (x, y); y selects the sheet through w = 2y - p(x).
    Finite { x: Complex64, y: Complex64 },
    /// The point over x = infinity with y ~ x^2 (sheet w / x^2 -> +1).
    InfinityPlus,
    /// The point over x = infinity with y -> 0 (sheet w / x^2 -> -1).
    InfinityMinus,
}

struct PathIntegrator<'a> {
    model: &'a HyperellipticModel,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> PathIntegrator<'a> {
    fn new(model: &'a HyperellipticModel) -> Self {
        let (nodes, weights) = gauss_legendre(LEG_NODES);
        Self {
            model,
            nodes,
            weights,
        }
    }

    /// Monic quartic as the product over its roots; no cancellation against
    /// the coefficient form near a branch point.
    fn q(&self, x: Complex64) -> Complex64 {
        self.model
            .branch_points
            .iter()
            .map(|e| x - e)
            .product()
    }

    fn scale(&self) -> f64 {
        let e = &self.model.branch_points;
        let mut s: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                s = s.max((e[i] - e[j]).norm());
            }
        }
        s.max(1.0)
    }

    /// Integrates dx/w from the base branch point `e0` to `x1`, which must be
    /// close enough that no other branch point interferes. The substitution
    /// x = e0 + (x1 - e0) s^2 makes the integrand regular:
    /// dx/w = 2 (x1 - e0) ds / h(s) with h^2 = (x1 - e0) prod_others(x - e).
    fn leg_from_base(&self, x1: Complex64) -> (Complex64, Complex64) {
        let e0 = self.model.branch_points[0];
        let others = &self.model.branch_points[1..];
        let step = x1 - e0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut h_prev: Option<Complex64> = None;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let s = 0.5 * (t + 1.0);
            let x = e0 + step * s * s;
            let r: Complex64 = step * others.iter().map(|e| x - e).product::<Complex64>();
            let h = match h_prev {
                None => r.sqrt(),
                Some(prev) => nearest_sqrt(r, prev),
            };
            h_prev = Some(h);
            acc += w / h;
        }
        acc *= step; // 2 (x1 - e0) * (1/2 from the [-1,1] -> [0,1] map)
        let r1: Complex64 = step * others.iter().map(|e| x1 - e).product::<Complex64>();
        let w_end = nearest_sqrt(r1, h_prev.expect("at least one node"));
        (acc, w_end)
    }

    /// Integrates dx/w along the straight segment [x0, x1], continuing the
    /// sheet from w0. Splits whenever the sheet would turn by more than a
    /// quarter turn between samples.
    fn leg(
        &self,
        x0: Complex64,
        x1: Complex64,
        w0: Complex64,
        depth: usize,
    ) -> Result<(Complex64, Complex64), ThetaError> {
        if depth > MAX_SPLIT_DEPTH {
            return Err(ThetaError::SheetTrackingLost(format!(
                "segment split limit reached near x = {x0}"
            )));
        }
        let scale4 = self.scale().powi(4);
        let mid = 0.5 * (x0 + x1);
        let w_mid = nearest_sqrt(self.q(mid), w0);
        let w_end = nearest_sqrt(self.q(x1), w_mid);
        if self.q(mid).norm() < 1e-24 * scale4 {
            return Err(ThetaError::SheetTrackingLost(
                "path passes through a branch point".into(),
            ));
        }
        // Keep segments shorter than their distance to the branch points so
        // the quadrature stays deep inside the integrand's analyticity
        // region; this refines geometrically near the cluster and takes
        // large steps far away.
        let dist_mid = self
            .model
            .branch_points
            .iter()
            .map(|e| (mid - e).norm())
            .fold(f64::INFINITY, f64::min);
        let too_long = (x1 - x0).norm() > 1.5 * dist_mid;
        if too_long || turn_angle(w0, w_mid) > QUARTER_TURN || turn_angle(w_mid, w_end) > QUARTER_TURN
        {
            let (i0, wm) = self.leg(x0, mid, w0, depth + 1)?;
            let (i1, we) = self.leg(mid, x1, wm, depth + 1)?;
            return Ok((i0 + i1, we));
        }
        let half = 0.5 * (x1 - x0);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut w_prev = w0;
        for (t, wt) in self.nodes.iter().zip(&self.weights) {
            let x = mid + half * t;
            let w = nearest_sqrt(self.q(x), w_prev);
            if turn_angle(w_prev, w) > 2.0 * QUARTER_TURN {
                let (i0, wm) = self.leg(x0, mid, w0, depth + 1)?;
                let (i1, we) = self.leg(mid, x1, wm, depth + 1)?;
                return Ok((i0 + i1, we));
            }
            w_prev = w;
            acc += wt / w;
        }
        let w_end = nearest_sqrt(self.q(x1), w_prev);
        Ok((acc * half, w_end))
    }

    /// Integrates dx/w from `x_far` out to x = infinity in the coordinate
    /// u = 1/x, where dx/w = -du / s(u) with s(u)^2 = prod (1 - e u),
    /// s(0) = +-1. Returns the integral and the arrival sign.
    fn leg_to_infinity(
        &self,
        x_far: Complex64,
        w_far: Complex64,
    ) -> Result<(Complex64, f64), ThetaError> {
        let u1 = 1.0 / x_far;
        let s_of = |u: Complex64| -> Complex64 {
            self.model
                .branch_points
                .iter()
                .map(|e| Complex64::new(1.0, 0.0) - e * u)
                .product()
        };
        // Sheet at the junction: w = x^2 s(1/x).
        let mut s_prev = w_far * u1 * u1;
        let mut acc = Complex64::new(0.0, 0.0);
        // March u from u1 to 0; the integrand is analytic in the disc
        // |u| <= |u1| because all zeros of s^2 lie at |u| = 1/|e| >> |u1|.
        for (t, wt) in self.nodes.iter().zip(&self.weights) {
            let u = u1 * 0.5 * (1.0 - t);
            let s = nearest_sqrt(s_of(u), s_prev);
            if turn_angle(s_prev, s) > 2.0 * QUARTER_TURN {
                return Err(ThetaError::SheetTrackingLost(
                    "sheet drift on the leg to infinity".into(),
                ));
            }
            s_prev = s;
            acc += wt / s;
        }
        // du = -u1/2 dt under u = u1 (1 - t) / 2, and dx/w = -du/s.
        let integral = acc * u1 * 0.5;
        let s0 = nearest_sqrt(s_of(Complex64::new(0.0, 0.0)), s_prev);
        Ok((integral, s0.re.signum()))
    }

    /// Straight route from `from` to `to` with detours around branch points.
    fn plan_route(&self, from: Complex64, to: Complex64) -> Vec<Complex64> {
        let delta = 0.03 * self.scale();
        let mut route = vec![from, to];
        for _ in 0..3 {
            let mut next = vec![route[0]];
            let mut changed = false;
            for pair in route.windows(2) {
                if let Some(wp) = self.detour(pair[0], pair[1], delta) {
                    next.push(wp);
                    changed = true;
                }
                next.push(pair[1]);
            }
            route = next;
            if !changed {
                break;
            }
        }
        route
    }

    fn detour(&self, a: Complex64, b: Complex64, delta: f64) -> Option<Complex64> {
        let dir = b - a;
        let len = dir.norm();
        if len < 1e-12 {
            return None;
        }
        // The achievable clearance around a branch point is capped by how
        // close the endpoints themselves sit to it (a target just off a
        // branch point is legitimate; exact crossings are not).
        let mut worst: Option<(f64, Complex64, Complex64, f64)> = None;
        for &e in &self.model.branch_points {
            let clearance = delta
                .min(0.45 * (e - a).norm())
                .min(0.45 * (e - b).norm());
            if clearance < 1e-9 {
                continue;
            }
            let t = ((e - a) * dir.conj()).re / (len * len);
            if !(0.01..=0.99).contains(&t) {
                continue;
            }
            let foot = a + dir * t;
            let ratio = (e - foot).norm() / clearance;
            if ratio < 1.0 && worst.is_none_or(|(r, _, _, _)| ratio < r) {
                worst = Some((ratio, foot, e, clearance));
            }
        }
        let (_, foot, e, clearance) = worst?;
        let normal = Complex64::new(0.0, 1.0) * dir / len;
        let candidate_a = foot + normal * (2.0 * clearance);
        let candidate_b = foot - normal * (2.0 * clearance);
        if (candidate_a - e).norm() >= (candidate_b - e).norm() {
            Some(candidate_a)
        } else {
            Some(candidate_b)
        }
    }

    /// Raw (unnormalized) Abel integral from the base branch point.
    fn raw_integral(&self, target: &AbelTarget) -> Result<Complex64, ThetaError> {
        let e0 = self.model.branch_points[0];
        let (endpoint, w_target): (Complex64, Option<Complex64>) = match target {
            AbelTarget::Finite { x, y } => (*x, Some(self.model.w_of(*x, *y))),
            AbelTarget::InfinityPlus | AbelTarget::InfinityMinus => {
                let centroid: Complex64 =
                    self.model.branch_points.iter().sum::<Complex64>() / 4.0;
                let r_far = 40.0 * self.scale() + centroid.norm();
                (centroid + Complex64::from_polar(r_far, 0.9), None)
            }
        };
        if let AbelTarget::Finite { x, .. } = target {
            if self.q(*x).norm() < 1e-20 * self.scale().powi(4) {
                // Branch points are their own Abel targets: half-periods.
                // Reaching them through the generic path machinery would sit
                // on top of the integrable singularity, so route the one we
                // know (the base point) and refuse the rest.
                if (*x - e0).norm() < 1e-9 * self.scale() {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                return Err(ThetaError::SheetTrackingLost(
                    "target coincides with a branch point".into(),
                ));
            }
        }

        let route = self.plan_route(e0, endpoint);
        // Keep the first leg short so the square-root substitution around the
        // base point sees an essentially constant regular factor.
        let first_limit = 0.25
            * self.model.branch_points[1..]
                .iter()
                .map(|e| (e - e0).norm())
                .fold(f64::INFINITY, f64::min);
        let first_step = route[1] - route[0];
        let first = if first_step.norm() > first_limit {
            e0 + first_step / first_step.norm() * first_limit
        } else {
            route[1]
        };

        let (mut total, mut w_current) = self.leg_from_base(first);
        let mut x_current = first;
        let mut remaining: Vec<Complex64> = route[1..].to_vec();
        if first != route[1] {
            remaining.insert(0, route[1]);
        }
        for next in remaining {
            if (next - x_current).norm() == 0.0 {
                continue;
            }
            let (value, w_end) = self.leg(x_current, next, w_current, 0)?;
            total += value;
            w_current = w_end;
            x_current = next;
        }

        match target {
            AbelTarget::Finite { .. } => {
                let wt = w_target.expect("finite target has a sheet");
                if (w_current - wt).norm() <= (w_current + wt).norm() {
                    Ok(total)
                } else {
                    Ok(-total)
                }
            }
            AbelTarget::InfinityPlus | AbelTarget::InfinityMinus => {
                let (tail, sign) = self.leg_to_infinity(x_current, w_current)?;
                let total = total + tail;
                let wanted = if matches!(target, AbelTarget::InfinityPlus) {
                    1.0
                } else {
                    -1.0
                };
                if sign == wanted {
                    Ok(total)
                } else {
                    Ok(-total)
                }
            }
        }
    }
}

/// Abel integral of the normalized differential from the base branch point to
/// the target; a fixed representative of a class in C / (Z + Omega Z).
pub fn abel_map(
    model: &HyperellipticModel,
    periods: &PeriodData,
    target: &AbelTarget,
) -> Result<Complex64, ThetaError> {
    let integrator = PathIntegrator::new(model);
    Ok(integrator.raw_integral(target)? / periods.a_period)
}

/// Normalized integral of dx/w around a closed polygon; lands in the period
/// lattice when the polygon is a cycle of the curve.
pub fn loop_integral(
    model: &HyperellipticModel,
    periods: &PeriodData,
    polygon: &[Complex64],
) -> Result<Complex64, ThetaError> {
    assert!(polygon.len() >= 3);
    let integrator = PathIntegrator::new(model);
    let mut w = integrator.q(polygon[0]).sqrt();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..polygon.len() {
        let a = polygon[i];
        let b = polygon[(i + 1) % polygon.len()];
        let (value, w_end) = integrator.leg(a, b, w, 0)?;
        total += value;
        w = w_end;
    }
    Ok(total / periods.a_period)
}

/// Nearest decomposition v ~ n + omega m over the integers, with residual.
pub fn lattice_decompose(
    v: Complex64,
    omega: Complex64,
) -> Result<(i64, i64, f64), ThetaError> {
    let m_real = v.im / omega.im;
    let n_real = v.re - omega.re * m_real;
    let m = m_real.round() as i64;
    let n = n_real.round() as i64;
    let residual = (v - Complex64::new(n as f64, 0.0) - omega * m as f64).norm();
    if residual > 1e-6 {
        return Err(ThetaError::NotLatticePoint(residual));
    }
    Ok((n, m, residual))
}

/// Abel images of the marked points and of the eigenvector divisor, all with
/// the same path conventions, plus the theta-characteristic shift.
#[derive(Clone, Copy, Debug)]
pub struct AbelImages {
    pub omega: Complex64,
    pub u_p: Complex64,
    pub u_q: Complex64,
    pub u_a0: Complex64,
    pub u_b: Complex64,
    pub u_d0: Complex64,
    pub u_delta: Complex64,
}

pub fn abel_images(
    model: &HyperellipticModel,
    periods: &PeriodData,
    state: &TodaState,
) -> Result<AbelImages, ThetaError> {
    let data = spectral_data(state)?;
    let y_a = Complex64::new(rat_to_f64(&data.points_a[0]), 0.0);
    let y_b = Complex64::new(rat_to_f64(&data.point_b), 0.0);
    let divisor: Vec<CurvePoint> = divisor_points(state)?;
    let d0 = divisor[0];

    let u_p = abel_map(model, periods, &AbelTarget::InfinityPlus)?;
    let u_q = abel_map(model, periods, &AbelTarget::InfinityMinus)?;
    let zero = Complex64::new(0.0, 0.0);
    let u_a0 = abel_map(model, periods, &AbelTarget::Finite { x: zero, y: y_a })?;
    let u_b = abel_map(model, periods, &AbelTarget::Finite { x: zero, y: y_b })?;
    let u_d0 = abel_map(model, periods, &AbelTarget::Finite { x: d0.x, y: d0.y })?;
    Ok(AbelImages {
        omega: periods.omega,
        u_p,
        u_q,
        u_a0,
        u_b,
        u_d0,
        u_delta: (Complex64::new(1.0, 0.0) + periods.omega) / 2.0,
    })
}
