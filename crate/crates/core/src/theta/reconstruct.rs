//! Tau grids, the linearization checks, and end-to-end reconstruction of the
//! N = 2, M = 1 trajectory from theta quotients.
//!
//! The flow is linear on the Jacobian: the site shift adds u_P - u_Q and one
//! time step adds u_P - u_A0. The grid value
//!
//! ```text
//! z(n, t) = u_D0 + (n+1)(u_P - u_Q) + t (u_P - u_A0) - u_P - u_delta
//! tau_n^t = theta(z(n, t); Omega)
//! ```
//!
//! reproduces the lattice through the quotient formulas
//!
//! ```text
//! I_n^t = d  tau_{n-1}^t tau_n^{t+1} / (tau_n^t tau_{n-1}^{t+1})
//! V_n^t = d' tau_{n+1}^t tau_{n-1}^{t+1} / (tau_n^t tau_n^{t+1})
//! ```
//!
//! with constants d, d' calibrated once at (n, t) = (1, 0). The choice of
//! path representatives and of the base point cancels in every quotient.

use num_complex::Complex64;
use serde::Serialize;

use crate::curve::{divisor_points, divisor_points_of_matrix};
use crate::error::ThetaError;
use crate::exact::{format_rat, rat_to_f64, Rat};
use crate::lattice::{evolve, TodaState};
use crate::spectral::{conjugate, lax_matrices, spectral_data, ConjugationKind};

use super::abel::{abel_images, abel_map, lattice_decompose, periods, AbelImages, AbelTarget, PeriodData};
use super::model::HyperellipticModel;
use super::theta_fn::theta1;

const PI: f64 = std::f64::consts::PI;
const PERIOD_NODES: usize = 64;

/// Lattice of theta values along the linear flow.
#[derive(Clone, Debug)]
pub struct TauGrid {
    pub n_hi: i64,
    pub t_hi: i64,
    pub omega: Complex64,
    pub z_base: Complex64,
    pub site_shift: Complex64,
    pub time_shift: Complex64,
    values: Vec<Complex64>,
}

impl TauGrid {
    /// Builds tau values for n = 0..=n_hi, t = 0..=t_hi.
    pub fn build(images: &AbelImages, n_hi: i64, t_hi: i64) -> Result<Self, ThetaError> {
        let site_shift = images.u_p - images.u_q;
        let time_shift = images.u_p - images.u_a0;
        let z_base = images.u_d0 - images.u_p - images.u_delta;
        let mut values = Vec::with_capacity(((n_hi + 1) * (t_hi + 1)) as usize);
        for n in 0..=n_hi {
            for t in 0..=t_hi {
                let z = z_base + site_shift * (n + 1) as f64 + time_shift * t as f64;
                let tau = theta1(z, images.omega)?;
                if tau.norm() < 1e-12 {
                    return Err(ThetaError::ThetaZeroHit { n, t });
                }
                values.push(tau);
            }
        }
        Ok(Self {
            n_hi,
            t_hi,
            omega: images.omega,
            z_base,
            site_shift,
            time_shift,
            values,
        })
    }

    pub fn z(&self, n: i64, t: i64) -> Complex64 {
        self.z_base + self.site_shift * (n + 1) as f64 + self.time_shift * t as f64
    }

    pub fn tau(&self, n: i64, t: i64) -> Complex64 {
        assert!((0..=self.n_hi).contains(&n) && (0..=self.t_hi).contains(&t));
        self.values[(n * (self.t_hi + 1) + t) as usize]
    }

    /// Largest relative defect of the quasi-periodicity relation
    /// `tau_{n+N} = tau_n exp(-2 pi i m z - pi i m^2 Omega)` over the grid,
    /// given the decomposition `N (u_P - u_Q) = n0 + Omega m`.
    pub fn quasi_periodicity_defect(&self, sites: i64, m: i64) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..=(self.n_hi - sites) {
            for t in 0..=self.t_hi {
                let z = self.z(n, t);
                let mf = m as f64;
                let factor = (Complex64::new(0.0, -2.0 * PI) * z * mf
                    + Complex64::new(0.0, -PI) * self.omega * mf * mf)
                    .exp();
                let expected = self.tau(n, t) * factor;
                let actual = self.tau(n + sites, t);
                worst = worst.max((actual - expected).norm() / expected.norm());
            }
        }
        worst
    }
}

/// Residuals (distance to the period lattice) of the three flow identities
/// on the Jacobian.
#[derive(Clone, Copy, Debug)]
pub struct LinearizationReport {
    /// Abel(d(sigma X)) - Abel(d(X)) = u_P - u_Q.
    pub site_shift_residual: f64,
    /// Abel(d(X_1)) - Abel(d(X_0)) = u_P - u_A0.
    pub time_shift_residual: f64,
    /// The same difference against u_B - u_Q.
    pub full_period_residual: f64,
}

pub fn linearization_check(state: &TodaState) -> Result<LinearizationReport, ThetaError> {
    let model = HyperellipticModel::from_state(state)?;
    let period_data = periods(&model, PERIOD_NODES)?;
    let images = abel_images(&model, &period_data, state)?;
    let data = spectral_data(state)?;

    let abel_of = |pt: &crate::curve::CurvePoint| -> Result<Complex64, ThetaError> {
        abel_map(
            &model,
            &period_data,
            &AbelTarget::Finite { x: pt.x, y: pt.y },
        )
    };

    let u0 = abel_of(&divisor_points(state)?[0])?;
    let shifted = conjugate(
        &lax_matrices(state).x_matrix,
        ConjugationKind::SiteShift,
        state,
    )?;
    let u_sigma = abel_of(&divisor_points_of_matrix(&shifted, &data.f, data.genus)?[0])?;
    let next = state.step().map_err(ThetaError::Lattice)?;
    let u1 = abel_of(&divisor_points(&next)?[0])?;

    let residual_of = |v: Complex64| -> f64 {
        let m = (v.im / images.omega.im).round();
        let n = (v.re - images.omega.re * m).round();
        (v - Complex64::new(n, 0.0) - images.omega * m).norm()
    };

    Ok(LinearizationReport {
        site_shift_residual: residual_of(u_sigma - u0 - (images.u_p - images.u_q)),
        time_shift_residual: residual_of(u1 - u0 - (images.u_p - images.u_a0)),
        full_period_residual: residual_of(u1 - u0 - (images.u_b - images.u_q)),
    })
}

/// One comparison row of the reconstruction table.
#[derive(Clone, Debug)]
pub struct ReconRow {
    pub quantity: char,
    pub site: usize,
    pub t: i64,
    pub exact: Rat,
    pub reconstructed: Complex64,
    pub rel_error: f64,
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub rows: Vec<ReconRow>,
    pub d: Complex64,
    pub d_prime: Complex64,
    /// Max relative spread of d (resp. d') recalibrated at every grid cell.
    pub d_deviation: f64,
    pub d_prime_deviation: f64,
    /// Max error of the telescoped product identities against the conserved
    /// products, both through tau quotients and through the exponential form.
    pub product_i_error: f64,
    pub product_v_error: f64,
    pub quasi_periodicity_defect: f64,
    pub max_rel_error: f64,
    /// Integer decomposition of N (u_P - u_Q) in the period lattice.
    pub m_vector: (i64, i64),
}

impl ReconstructionReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("quantity,site,t,exact,reconstructed,reconstructed_imag,rel_error,exact_fraction\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.17e},{:.17e},{:.17e},{:.3e},{}\n",
                row.quantity,
                row.site,
                row.t,
                rat_to_f64(&row.exact),
                row.reconstructed.re,
                row.reconstructed.im,
                row.rel_error,
                format_rat(&row.exact),
            ));
        }
        out
    }
}

/// Serializable dump of the period and Abel data for reproducibility.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodDump {
    pub branch_points: Vec<[f64; 2]>,
    pub a_period: [f64; 2],
    pub b_period: [f64; 2],
    pub omega: [f64; 2],
    pub u_p: [f64; 2],
    pub u_q: [f64; 2],
    pub u_a0: [f64; 2],
    pub u_b: [f64; 2],
    pub u_d0: [f64; 2],
    pub u_delta: [f64; 2],
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn period_dump(
    model: &HyperellipticModel,
    period_data: &PeriodData,
    images: &AbelImages,
) -> PeriodDump {
    PeriodDump {
        branch_points: model.branch_points.iter().map(|&b| pair(b)).collect(),
        a_period: pair(period_data.a_period),
        b_period: pair(period_data.b_period),
        omega: pair(period_data.omega),
        u_p: pair(images.u_p),
        u_q: pair(images.u_q),
        u_a0: pair(images.u_a0),
        u_b: pair(images.u_b),
        u_d0: pair(images.u_d0),
        u_delta: pair(images.u_delta),
    }
}

/// Builds the tau grid for `state`, reconstructs I and V for t = 0..=t_max,
/// and verifies constancy of the calibration constants, the product
/// identities, and the quasi-periodicity of the grid.
pub fn reconstruct_and_verify(
    state: &TodaState,
    t_max: usize,
) -> Result<ReconstructionReport, ThetaError> {
    let sites = state.sites();
    if sites != 2 || state.depth() != 1 {
        return Err(ThetaError::UnsupportedShape {
            n: sites,
            m: state.depth(),
        });
    }
    let trajectory = evolve(state, t_max + 1).map_err(ThetaError::Lattice)?;

    let model = HyperellipticModel::from_state(state)?;
    let period_data = periods(&model, PERIOD_NODES)?;
    let images = abel_images(&model, &period_data, state)?;
    let omega = period_data.omega;

    let n_hi = sites as i64 + 1;
    let t_hi = t_max as i64 + 1;
    let grid = TauGrid::build(&images, n_hi, t_hi)?;

    let (_, m_int, _) = lattice_decompose(
        (images.u_p - images.u_q) * sites as f64,
        omega,
    )?;
    let n_of_lattice = {
        let v = (images.u_p - images.u_q) * sites as f64;
        (v.re - omega.re * m_int as f64).round() as i64
    };

    // Quotients of the two reconstruction formulas (M = 1).
    let i_quot = |n: i64, t: i64| -> Complex64 {
        grid.tau(n - 1, t) * grid.tau(n, t + 1) / (grid.tau(n, t) * grid.tau(n - 1, t + 1))
    };
    let v_quot = |n: i64, t: i64| -> Complex64 {
        grid.tau(n + 1, t) * grid.tau(n - 1, t + 1) / (grid.tau(n, t) * grid.tau(n, t + 1))
    };

    let exact_i = |n: i64, t: i64| -> &Rat { &trajectory[t as usize].front_layer()[(n - 1) as usize] };
    let exact_v = |n: i64, t: i64| -> &Rat { &trajectory[t as usize].v()[(n - 1) as usize] };

    let d = Complex64::new(rat_to_f64(exact_i(1, 0)), 0.0) / i_quot(1, 0);
    let d_prime = Complex64::new(rat_to_f64(exact_v(1, 0)), 0.0) / v_quot(1, 0);

    let mut rows = Vec::new();
    let mut max_rel_error: f64 = 0.0;
    let mut d_deviation: f64 = 0.0;
    let mut d_prime_deviation: f64 = 0.0;
    for t in 0..=t_max as i64 {
        for n in 1..=sites as i64 {
            let recon_i = d * i_quot(n, t);
            let exact = exact_i(n, t).clone();
            let exact_f = rat_to_f64(&exact);
            let err_i = (recon_i - exact_f).norm() / exact_f.abs();
            max_rel_error = max_rel_error.max(err_i);
            d_deviation = d_deviation
                .max((Complex64::new(exact_f, 0.0) / i_quot(n, t) - d).norm() / d.norm());
            rows.push(ReconRow {
                quantity: 'I',
                site: n as usize,
                t,
                exact,
                reconstructed: recon_i,
                rel_error: err_i,
            });

            let recon_v = d_prime * v_quot(n, t);
            let exact = exact_v(n, t).clone();
            let exact_f = rat_to_f64(&exact);
            let err_v = (recon_v - exact_f).norm() / exact_f.abs();
            max_rel_error = max_rel_error.max(err_v);
            d_prime_deviation = d_prime_deviation.max(
                (Complex64::new(exact_f, 0.0) / v_quot(n, t) - d_prime).norm() / d_prime.norm(),
            );
            rows.push(ReconRow {
                quantity: 'V',
                site: n as usize,
                t,
                exact,
                reconstructed: recon_v,
                rel_error: err_v,
            });
        }
    }
    if d_deviation > 1e-8 {
        return Err(ThetaError::CalibrationDrift {
            quantity: "d",
            deviation: d_deviation,
        });
    }
    if d_prime_deviation > 1e-8 {
        return Err(ThetaError::CalibrationDrift {
            quantity: "d'",
            deviation: d_prime_deviation,
        });
    }

    // Telescoped product identities, both as tau quotients and in the
    // exponential form built from the lattice decomposition.
    let d_pow = d.powu(sites as u32);
    let dp_pow = d_prime.powu(sites as u32);
    let mf = m_int as f64;
    let exp_i = d_pow * (Complex64::new(0.0, -2.0 * PI) * mf * (images.u_p - images.u_a0)).exp();
    let exp_v = dp_pow * (Complex64::new(0.0, -2.0 * PI) * mf * (images.u_a0 - images.u_q)).exp();
    let mut product_i_error: f64 = 0.0;
    let mut product_v_error: f64 = 0.0;
    let ns = sites as i64;
    for t in 0..=t_max as i64 {
        let prod_i = rat_to_f64(&trajectory[t as usize].layer_product(0));
        let quot_i =
            d_pow * grid.tau(1, t) * grid.tau(ns + 1, t + 1) / (grid.tau(ns + 1, t) * grid.tau(1, t + 1));
        product_i_error = product_i_error
            .max((quot_i - prod_i).norm() / prod_i.abs())
            .max((exp_i - prod_i).norm() / prod_i.abs());

        let prod_v = rat_to_f64(&trajectory[t as usize].v_product());
        let quot_v =
            dp_pow * grid.tau(ns + 1, t) * grid.tau(0, t + 1) / (grid.tau(1, t) * grid.tau(ns, t + 1));
        product_v_error = product_v_error
            .max((quot_v - prod_v).norm() / prod_v.abs())
            .max((exp_v - prod_v).norm() / prod_v.abs());
    }

    let quasi = grid.quasi_periodicity_defect(ns, m_int);

    Ok(ReconstructionReport {
        rows,
        d,
        d_prime,
        d_deviation,
        d_prime_deviation,
        product_i_error,
        product_v_error,
        quasi_periodicity_defect: quasi,
        max_rel_error,
        m_vector: (n_of_lattice, m_int),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn worked_state() -> TodaState {
        TodaState::from_ints(0, &[&[1, 2]], &[3, 4])
    }

    #[test]
    fn linearization_shifts_land_on_lattice() {
        let report = linearization_check(&worked_state()).unwrap();
        assert!(report.site_shift_residual < 1e-7, "{report:?}");
        assert!(report.time_shift_residual < 1e-7, "{report:?}");
        assert!(report.full_period_residual < 1e-7, "{report:?}");
    }

    #[test]
    fn reconstruction_matches_exact_trajectory() {
        let report = reconstruct_and_verify(&worked_state(), 8).unwrap();
        assert!(
            report.max_rel_error < 1e-6,
            "max relative error {}",
            report.max_rel_error
        );
        assert!(report.d_deviation < 1e-8);
        assert!(report.d_prime_deviation < 1e-8);
        assert!(report.product_i_error < 1e-6);
        assert!(report.product_v_error < 1e-6);
        assert!(report.quasi_periodicity_defect < 1e-8);

        // Spot check the first step against the hand values.
        let i11 = report
            .rows
            .iter()
            .find(|r| r.quantity == 'I' && r.site == 1 && r.t == 1)
            .unwrap();
        assert_eq!(i11.exact, rat(4, 3));
        assert!((i11.reconstructed.re - 4.0 / 3.0).abs() < 1e-6);
        let v21 = report
            .rows
            .iter()
            .find(|r| r.quantity == 'V' && r.site == 2 && r.t == 1)
            .unwrap();
        assert_eq!(v21.exact, rat(8, 3));
    }

    #[test]
    fn reconstruction_refuses_wrong_shape() {
        let state = TodaState::from_ints(0, &[&[1, 2], &[3, 1]], &[2, 5]);
        assert!(matches!(
            reconstruct_and_verify(&state, 4),
            Err(ThetaError::UnsupportedShape { .. })
        ));
    }
}
