//! Depth-reduction experiments: embedding the depth-(M-1) system inside the
//! depth-M one by a large front layer.
//!
//! Lifting a depth-(M-1) state with a uniform front layer (zeta, ..., zeta)
//! and evolving exactly, the residuals of the depth-(M-1) relations measured
//! on the block subsequence must vanish as zeta grows. All residuals are
//! exact rationals; floats appear only in the report.

use num_traits::{One, Zero};

use crate::error::ReductionError;
use crate::exact::{charpoly, format_rat, rat_int, rat_to_f64, BivarLaurent, Rat};
use crate::lattice::{evolve, TodaState};
use crate::spectral::{gcd2_quantities, lax_matrices};

/// A zeta-sweep configuration over a base state of depth M-1.
#[derive(Clone, Debug)]
pub struct ZetaExperiment {
    pub base: TodaState,
    pub zeta_values: Vec<Rat>,
    /// Number of M-blocks measured per run.
    pub k_range: usize,
}

/// Prepends the uniform front layer `(zeta, ..., zeta)` to a depth-(M-1)
/// state, producing a valid depth-M state.
pub fn lift_with_zeta(base: &TodaState, zeta: &Rat) -> Result<TodaState, ReductionError> {
    if zeta.is_zero() {
        return Err(ReductionError::BadExperiment("zeta must be nonzero".into()));
    }
    let n = base.sites();
    let mut i_layers = vec![vec![zeta.clone(); n]];
    for j in 0..base.depth() {
        i_layers.push(base.i_layer(j).to_vec());
    }
    let lifted = TodaState::new(base.time(), i_layers, base.v().to_vec());
    lifted
        .validate()
        .map_err(ReductionError::ConstraintViolated)?;
    Ok(lifted)
}

/// Exact residuals of the depth-reduction relations measured on one block.
#[derive(Clone, Debug)]
pub struct BlockResiduals {
    pub k: usize,
    /// I_n^{kM+M-1} - I_n^{kM-1} - V_n^{kM-1} + V_{n-1}^{kM+1}, per site.
    pub r1: Vec<Rat>,
    /// V_n^{kM+1} I_n^{kM+M-1} - I_{n+1}^{kM-1} V_n^{kM-1}, per site.
    pub r2: Vec<Rat>,
    /// V_n^{kM+1} - V_n^{kM}, per site.
    pub r3: Vec<Rat>,
    /// I_n^{kM+M} / zeta - 1, per site.
    pub r4: Vec<Rat>,
}

#[derive(Clone, Debug)]
pub struct ResidualTable {
    pub blocks: Vec<BlockResiduals>,
}

impl ResidualTable {
    pub fn max_abs(&self, select: impl Fn(&BlockResiduals) -> &[Rat]) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| select(b).iter())
            .map(|r| rat_to_f64(r).abs())
            .fold(0.0, f64::max)
    }
}

/// Measures the reduction relations on blocks k = 1..=k_range of an exact
/// depth-M trajectory whose front layer was lifted with `zeta`.
pub fn residuals_prop_reduction(
    trajectory: &[TodaState],
    k_range: usize,
    zeta: &Rat,
) -> Result<ResidualTable, ReductionError> {
    let m = trajectory[0].depth();
    let n = trajectory[0].sites();
    let needed = k_range * m + m;
    if trajectory.len() <= needed {
        return Err(ReductionError::TrajectoryTooShort {
            needed: needed + 1,
            available: trajectory.len(),
        });
    }
    // Front layer of the state at absolute time s is I^s; its V row is V^s.
    let i_at = |s: usize, site: usize| -> &Rat { &trajectory[s].front_layer()[site] };
    let v_at = |s: usize, site: usize| -> &Rat { &trajectory[s].v()[site] };

    let mut blocks = Vec::with_capacity(k_range);
    for k in 1..=k_range {
        let (t_prev, t_mid, t_late, t_next) = (k * m - 1, k * m + 1, k * m + m - 1, k * m + m);
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        let mut r3 = Vec::with_capacity(n);
        let mut r4 = Vec::with_capacity(n);
        for site in 0..n {
            let prev_site = (site + n - 1) % n;
            let next_site = (site + 1) % n;
            r1.push(
                &(&(i_at(t_late, site) - i_at(t_prev, site)) - v_at(t_prev, site))
                    + v_at(t_mid, prev_site),
            );
            r2.push(
                &(v_at(t_mid, site) * i_at(t_late, site))
                    - &(i_at(t_prev, next_site) * v_at(t_prev, site)),
            );
            r3.push(v_at(t_mid, site) - v_at(k * m, site));
            r4.push(&(i_at(t_next, site) / zeta) - &Rat::one());
        }
        blocks.push(BlockResiduals { k, r1, r2, r3, r4 });
    }
    Ok(ResidualTable { blocks })
}

/// One row of the sweep report, all magnitudes from exact residuals.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub zeta: Rat,
    pub max_r1: f64,
    pub max_r2: f64,
    pub max_r3: f64,
    pub max_r4: f64,
    /// Max deviation between the extracted block subsequence and a direct
    /// depth-(M-1) run started from the first block.
    pub subsequence_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Fitted log-log slope of max(r1, r2) against zeta.
    pub slope: f64,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("zeta,max_r1,max_r2,max_r3,max_r4,subsequence_deviation\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                format_rat(&row.zeta),
                row.max_r1,
                row.max_r2,
                row.max_r3,
                row.max_r4,
                row.subsequence_deviation
            ));
        }
        out.push_str(&format!("slope,{:.6},,,,\n", self.slope));
        out
    }

    pub fn residuals_decrease_monotonically(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].max_r1 <= w[0].max_r1
                && w[1].max_r2 <= w[0].max_r2
                && w[1].max_r3 <= w[0].max_r3
        })
    }
}

/// Runs the lifted system exactly for each zeta and reports residual decay
/// plus the deviation of the block subsequence from a genuine depth-(M-1)
/// trajectory. Block k of the lifted run is compared against step k of the
/// reduced run started from layers I^{1..M-1} and row V^1.
pub fn zeta_sweep(experiment: &ZetaExperiment) -> Result<SweepReport, ReductionError> {
    if experiment.zeta_values.len() < 3 {
        return Err(ReductionError::BadExperiment(
            "need at least three zeta values".into(),
        ));
    }
    let m = experiment.base.depth() + 1;
    let k_range = experiment.k_range.max(1);
    let steps = k_range * m + m + 1;

    let mut rows = Vec::with_capacity(experiment.zeta_values.len());
    for zeta in &experiment.zeta_values {
        let lifted = lift_with_zeta(&experiment.base, zeta)?;
        let trajectory = evolve(&lifted, steps)?;
        let table = residuals_prop_reduction(&trajectory, k_range, zeta)?;

        let deviation = if m >= 2 {
            subsequence_deviation(&trajectory, k_range)?
        } else {
            0.0
        };
        rows.push(SweepRow {
            zeta: zeta.clone(),
            max_r1: table.max_abs(|b| &b.r1),
            max_r2: table.max_abs(|b| &b.r2),
            max_r3: table.max_abs(|b| &b.r3),
            max_r4: table.max_abs(|b| &b.r4),
            subsequence_deviation: deviation,
        });
    }

    // Slope of log max-residual against log zeta, pooled over r1 and r2.
    let xs: Vec<f64> = rows.iter().map(|r| rat_to_f64(&r.zeta).ln()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| r.max_r1.max(r.max_r2).max(1e-300).ln())
        .collect();
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = num / den;

    Ok(SweepReport { rows, slope })
}

/// Max float deviation between the block subsequence of a lifted trajectory
/// and a direct depth-(M-1) run aligned as I'^j := I^{j+1}, V'^0 := V^1.
fn subsequence_deviation(
    trajectory: &[TodaState],
    k_range: usize,
) -> Result<f64, ReductionError> {
    let m = trajectory[0].depth();
    let reduced_depth = m - 1;
    let n = trajectory[0].sites();
    let start = TodaState::new(
        0,
        (0..reduced_depth)
            .map(|j| trajectory[1].i_layer(j).to_vec())
            .collect(),
        trajectory[1].v().to_vec(),
    );
    start
        .validate()
        .map_err(ReductionError::ConstraintViolated)?;
    let reduced = evolve(&start, k_range * reduced_depth.max(1))?;

    // Reduced time s = k (M-1) + r corresponds to lifted time kM + 1 + r.
    let mut deviation: f64 = 0.0;
    for k in 0..=k_range {
        for r in 0..reduced_depth {
            let s = k * reduced_depth + r;
            let lifted_t = k * m + 1 + r;
            if s >= reduced.len() || lifted_t >= trajectory.len() {
                continue;
            }
            for site in 0..n {
                let di = rat_to_f64(
                    &(&reduced[s].front_layer()[site] - &trajectory[lifted_t].front_layer()[site]),
                )
                .abs();
                deviation = deviation.max(di);
            }
            if r == 0 {
                for site in 0..n {
                    let dv = rat_to_f64(
                        &(&reduced[s].v()[site] - &trajectory[lifted_t].v()[site]),
                    )
                    .abs();
                    deviation = deviation.max(dv);
                }
            }
        }
    }
    Ok(deviation)
}

/// Closed form of `det(X_0 - x E)` for the depth-3, period-2 lift with front
/// layer (zeta, zeta): coefficients built from the base quantities U_1..U_6.
pub fn lifted_charpoly_closed_form(base: &TodaState, zeta: &Rat) -> BivarLaurent {
    assert!(base.sites() == 2 && base.depth() == 2);
    let u = gcd2_quantities(base);
    let (i0, i1, v) = (base.i_layer(0), base.i_layer(1), base.v());
    let u6 = &(&(&i0[0] * &i1[0]) * &v[0]) + &(&(&i0[1] * &i1[1]) * &v[1]);
    let z2 = zeta * zeta;

    let mut f = BivarLaurent::monomial(0, 3, rat_int(-1));
    f.insert_term(0, 2, &z2 + &u[0]);
    f.insert_term(1, 1, &rat_int(-2) * zeta - &u[4]);
    f.insert_term(0, 1, -(&(&u[0] * &z2) + &u[2]));
    f.insert_term(2, 0, rat_int(1));
    f.insert_term(1, 0, -(&(&u[1] * zeta) + &u6));
    f.insert_term(0, 0, &(&u[2] * &z2) + &u[3]);
    f.insert_term(0, -1, -(&u[3] * &z2));
    f
}

/// Verifies that the characteristic polynomial of the lifted depth-3 Lax
/// matrix matches its closed form at each zeta sample. The zeta-degree of
/// every coefficient is at most two, so five agreeing samples certify the
/// polynomial identity. Purely algebraic: the uniqueness constraint of the
/// dynamics plays no role, so the lift is built without validation.
pub fn example4_identity(
    base: &TodaState,
    zeta_samples: &[Rat],
) -> Result<(), ReductionError> {
    assert!(base.sites() == 2 && base.depth() == 2);
    assert!(
        zeta_samples.len() >= 5,
        "need five samples to certify a degree-2 identity"
    );
    for zeta in zeta_samples {
        let mut i_layers = vec![vec![zeta.clone(); 2]];
        i_layers.push(base.i_layer(0).to_vec());
        i_layers.push(base.i_layer(1).to_vec());
        let lifted = TodaState::new(base.time(), i_layers, base.v().to_vec());
        let f = charpoly(&lax_matrices(&lifted).x_matrix)
            .map_err(crate::error::SpectralError::Algebra)?;
        let expected = lifted_charpoly_closed_form(base, zeta);
        if f != expected {
            let diff = &f - &expected;
            let (x_deg, y_deg, _) = diff.terms().next().expect("difference is nonzero");
            return Err(ReductionError::IdentityMismatch {
                x_deg,
                y_deg,
                zeta: format_rat(zeta),
            });
        }
    }
    Ok(())
}

/// Sanity helper for the sweep: the lifted run conserves its own spectral
/// coefficients exactly.
pub fn lifted_run_is_isospectral(
    base: &TodaState,
    zeta: &Rat,
    steps: usize,
) -> Result<bool, ReductionError> {
    let lifted = lift_with_zeta(base, zeta)?;
    let trajectory = evolve(&lifted, steps)?;
    let report =
        crate::spectral::invariant_report(&trajectory).map_err(ReductionError::Spectral)?;
    Ok(report.exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn base_21() -> TodaState {
        TodaState::from_ints(0, &[&[1, 2]], &[3, 4])
    }

    fn base_22() -> TodaState {
        TodaState::from_ints(0, &[&[1, 2], &[3, 1]], &[2, 5])
    }

    #[test]
    fn lift_builds_expected_layers() {
        let lifted = lift_with_zeta(&base_21(), &rat_int(100)).unwrap();
        assert_eq!(lifted.depth(), 2);
        assert_eq!(lifted.front_layer(), &[rat_int(100), rat_int(100)]);
        assert_eq!(lifted.i_layer(1), &[rat_int(1), rat_int(2)]);
        assert_eq!(lifted.v(), &[rat_int(3), rat_int(4)]);
        for exp in [2u32, 4, 6] {
            let zeta = Rat::from_integer(10u32.pow(exp).into());
            assert!(lift_with_zeta(&base_21(), &zeta).is_ok());
        }
    }

    #[test]
    fn uniform_base_has_zero_residuals() {
        let base = TodaState::from_ints(0, &[&[2, 2]], &[1, 1]);
        let lifted = lift_with_zeta(&base, &rat_int(7)).unwrap();
        let traj = evolve(&lifted, 9).unwrap();
        let table = residuals_prop_reduction(&traj, 3, &rat_int(7)).unwrap();
        assert_eq!(table.max_abs(|b| &b.r1), 0.0);
        assert_eq!(table.max_abs(|b| &b.r2), 0.0);
        assert_eq!(table.max_abs(|b| &b.r3), 0.0);
    }

    #[test]
    fn residuals_shrink_with_zeta() {
        let experiment = ZetaExperiment {
            base: base_21(),
            zeta_values: vec![rat_int(100), rat_int(10_000), rat_int(1_000_000)],
            k_range: 3,
        };
        let report = zeta_sweep(&experiment).unwrap();
        assert!(report.residuals_decrease_monotonically());
        let last = report.rows.last().unwrap();
        assert!(last.max_r1 <= 1e-4, "max r1 = {}", last.max_r1);
        assert!(last.max_r2 <= 1e-4, "max r2 = {}", last.max_r2);
        assert!(last.subsequence_deviation <= 1e-4);
        assert!((report.slope + 1.0).abs() < 0.1, "slope = {}", report.slope);
        // The front layer stays at zeta + o(zeta): r4 decays as well.
        assert!(report.rows.windows(2).all(|w| w[1].max_r4 <= w[0].max_r4));
        assert!(last.max_r4 <= 1e-4, "max r4 = {}", last.max_r4);
    }

    #[test]
    fn lifted_runs_stay_isospectral() {
        assert!(lifted_run_is_isospectral(&base_21(), &rat_int(100), 8).unwrap());
    }

    #[test]
    fn closed_form_identity_holds() {
        let samples: Vec<Rat> = [1i64, 2, 3, 5, 7].iter().map(|&k| rat_int(k)).collect();
        example4_identity(&base_22(), &samples).unwrap();
    }

    #[test]
    fn closed_form_specific_coefficients() {
        let zeta = rat_int(3);
        let f = lifted_charpoly_closed_form(&base_22(), &zeta);
        // y-coefficient of x is -(2 zeta + U_5) with U_5 = 14.
        assert_eq!(f.coeff(1, 1), rat_int(-20));
        // y^-1 coefficient is -U_4 zeta^2 with U_4 = 60.
        assert_eq!(f.coeff(0, -1), rat_int(-540));
        assert_eq!(f.coeff(0, 3), rat_int(-1));
    }

    #[test]
    fn identity_holds_for_random_bases() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let samples: Vec<Rat> = [1i64, 2, 3, 5, 7].iter().map(|&k| rat_int(k)).collect();
        let mut tried = 0;
        while tried < 10 {
            let state = TodaState::new(
                0,
                vec![
                    (0..2).map(|_| rat(rng.gen_range(1..9), rng.gen_range(1..4))).collect(),
                    (0..2).map(|_| rat(rng.gen_range(1..9), rng.gen_range(1..4))).collect(),
                ],
                (0..2).map(|_| rat(rng.gen_range(1..9), rng.gen_range(1..4))).collect(),
            );
            if state.validate().is_err() {
                continue;
            }
            tried += 1;
            example4_identity(&state, &samples).unwrap();
        }
    }
}
