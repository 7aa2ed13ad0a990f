//! Exact time evolution of the hungry periodic discrete Toda lattice.
//!
//! The system couples M layers of I-variables with one layer of V-variables
//! on a ring of N sites:
//!
//! ```text
//! I_n^{t+M} = I_n^t + V_n^t - V_{n-1}^{t+1}
//! V_n^{t+1} = I_{n+1}^t V_n^t / I_n^{t+M}        (indices mod N)
//! ```
//!
//! The update is implicit and periodic. Writing x_n for V_{n-1}^{t+1}, each
//! site induces the Moebius map x_{n+1} = I_{n+1} V_n / (I_n + V_n - x_n);
//! composing around the ring gives a 2x2 rational matrix G whose fixed-point
//! quadratic has exactly two roots. One root, x = I_1^t, reproduces the
//! discarded swap solution (I^{t+M} = V^t, V^{t+1} = shifted I^t); the Vieta
//! companion root -b/(c x) is the genuine successor. Everything stays in Q.

use num_traits::{One, Zero};

use crate::error::{LatticeError, Violation};
use crate::exact::Rat;

/// One time slice of the lattice: layers `I^{t}, ..., I^{t+M-1}` plus `V^t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TodaState {
    t: i64,
    i_layers: Vec<Vec<Rat>>,
    v: Vec<Rat>,
}

impl TodaState {
    /// Builds a state from layers `I^{t+j}` (row j, sites 1..N) and `V^t`.
    /// Shape errors panic; value constraints are reported by [`validate`].
    ///
    /// [`validate`]: TodaState::validate
    pub fn new(t: i64, i_layers: Vec<Vec<Rat>>, v: Vec<Rat>) -> Self {
        assert!(!i_layers.is_empty(), "need at least one I layer");
        assert!(v.len() >= 2, "need at least two sites");
        assert!(
            i_layers.iter().all(|row| row.len() == v.len()),
            "every I layer must have N entries"
        );
        Self { t, i_layers, v }
    }

    /// Convenience constructor from integer data.
    pub fn from_ints(t: i64, i_layers: &[&[i64]], v: &[i64]) -> Self {
        Self::new(
            t,
            i_layers
                .iter()
                .map(|row| row.iter().map(|&k| Rat::from_integer(k.into())).collect())
                .collect(),
            v.iter().map(|&k| Rat::from_integer(k.into())).collect(),
        )
    }

    pub fn sites(&self) -> usize {
        self.v.len()
    }

    pub fn depth(&self) -> usize {
        self.i_layers.len()
    }

    pub fn time(&self) -> i64 {
        self.t
    }

    /// Layer `I^{t+j}`.
    pub fn i_layer(&self, j: usize) -> &[Rat] {
        &self.i_layers[j]
    }

    pub fn front_layer(&self) -> &[Rat] {
        &self.i_layers[0]
    }

    pub fn v(&self) -> &[Rat] {
        &self.v
    }

    pub fn layer_product(&self, j: usize) -> Rat {
        self.i_layers[j].iter().product()
    }

    pub fn v_product(&self) -> Rat {
        self.v.iter().product()
    }

    /// Checks the standing constraints: no zero entries, and no I layer whose
    /// product equals the V product (which would make the update non-unique).
    /// Reports the first violated condition.
    pub fn validate(&self) -> Result<(), Violation> {
        for (layer, row) in self.i_layers.iter().enumerate() {
            for (site, value) in row.iter().enumerate() {
                if value.is_zero() {
                    return Err(Violation::ZeroEntry {
                        kind: "I",
                        layer,
                        site: site + 1,
                    });
                }
            }
        }
        for (site, value) in self.v.iter().enumerate() {
            if value.is_zero() {
                return Err(Violation::ZeroEntry {
                    kind: "V",
                    layer: 0,
                    site: site + 1,
                });
            }
        }
        let w = self.v_product();
        for layer in 0..self.depth() {
            if self.layer_product(layer) == w {
                return Err(Violation::ProductCollision { layer });
            }
        }
        Ok(())
    }

    /// Advances one time step, consuming layer `I^t` and producing `I^{t+M}`
    /// and `V^{t+1}`. Exact; conserves the layer product and the V product.
    pub fn step(&self) -> Result<TodaState, LatticeError> {
        self.validate().map_err(LatticeError::Invalid)?;
        self.step_assuming_valid()
    }

    /// The update itself. Validity is conserved by the flow (products are
    /// invariant), so trajectories check it once instead of per step; all
    /// singularity guards stay in place regardless.
    fn step_assuming_valid(&self) -> Result<TodaState, LatticeError> {
        let n = self.sites();
        let front = &self.i_layers[0];
        let v = &self.v;

        // Compose the per-site Moebius matrices [[0, I_{k+1} V_k], [-1, I_k + V_k]]
        // around the ring: G = M_N * ... * M_1.
        let mut g = [
            [Rat::one(), Rat::zero()],
            [Rat::zero(), Rat::one()],
        ];
        for k in 0..n {
            let p = &front[(k + 1) % n] * &v[k];
            let s = &front[k] + &v[k];
            g = [
                [&p * &g[1][0], &p * &g[1][1]],
                [&(&s * &g[1][0]) - &g[0][0], &(&s * &g[1][1]) - &g[0][1]],
            ];
        }
        let (a, b, c, d) = (&g[0][0], &g[0][1], &g[1][0], &g[1][1]);

        // Fixed points solve c x^2 + (d - a) x - b = 0. The trivial root is
        // I_1^t; Vieta gives the companion as -b / (c * I_1^t).
        let trivial = front[0].clone();
        if c.is_zero() {
            return Err(LatticeError::SingularEvolution(
                "composed map is affine; the companion fixed point is at infinity".into(),
            ));
        }
        debug_assert!(
            (&(&(c * &trivial) * &trivial) + &(&(d - a) * &trivial) - b).is_zero(),
            "trivial root must satisfy the composed fixed-point equation"
        );
        let selected = -b / &(c * &trivial);
        if selected == trivial {
            return Err(LatticeError::DegenerateRoot);
        }

        // Propagate x_{k+1} = I_{k+1} V_k / (I_k + V_k - x_k) around the ring.
        let mut x = Vec::with_capacity(n + 1);
        x.push(selected);
        for k in 0..n {
            let den = &(&front[k] + &v[k]) - &x[k];
            if den.is_zero() {
                return Err(LatticeError::SingularEvolution(format!(
                    "propagation denominator vanished at site {}",
                    k + 1
                )));
            }
            x.push(&(&front[(k + 1) % n] * &v[k]) / &den);
        }
        debug_assert_eq!(x[n], x[0], "ring closure of the fixed point");

        let mut new_layer = Vec::with_capacity(n);
        for k in 0..n {
            let value = &(&front[k] + &v[k]) - &x[k];
            if value.is_zero() {
                return Err(LatticeError::SingularEvolution(format!(
                    "produced zero I entry at site {}",
                    k + 1
                )));
            }
            new_layer.push(value);
        }
        let new_v: Vec<Rat> = (0..n).map(|k| x[k + 1].clone()).collect();
        if new_v.iter().any(|value| value.is_zero()) {
            return Err(LatticeError::SingularEvolution(
                "produced zero V entry".into(),
            ));
        }

        let layer_product: Rat = new_layer.iter().product();
        if layer_product != self.layer_product(0) {
            return Err(LatticeError::RootSelectionFailure);
        }
        let v_product: Rat = new_v.iter().product();
        if v_product != self.v_product() {
            return Err(LatticeError::RootSelectionFailure);
        }

        let mut i_layers: Vec<Vec<Rat>> = self.i_layers[1..].to_vec();
        i_layers.push(new_layer);
        Ok(TodaState {
            t: self.t + 1,
            i_layers,
            v: new_v,
        })
    }
}

/// Evolves `steps` times and returns the whole trajectory, re-verifying the
/// defining relations on every consecutive pair by exact substitution.
pub fn evolve(state: &TodaState, steps: usize) -> Result<Vec<TodaState>, LatticeError> {
    state.validate().map_err(LatticeError::Invalid)?;
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(state.clone());
    for index in 0..steps {
        let next = trajectory[index].step_assuming_valid().map_err(|source| {
            LatticeError::StepFailed {
                index,
                source: Box::new(source),
            }
        })?;
        assert!(
            pair_satisfies_equations(&trajectory[index], &next),
            "step output must satisfy the defining relations exactly"
        );
        trajectory.push(next);
    }
    Ok(trajectory)
}

/// Exact substitution of a consecutive pair into the defining relations.
pub fn pair_satisfies_equations(current: &TodaState, next: &TodaState) -> bool {
    let n = current.sites();
    let m = current.depth();
    let front = current.front_layer();
    let v = current.v();
    let produced = next.i_layer(m - 1); // I^{t+M}
    let v_next = next.v();
    for k in 0..n {
        let prev_site = (k + n - 1) % n;
        // I_n^{t+M} = I_n^t + V_n^t - V_{n-1}^{t+1}
        if produced[k] != &(&front[k] + &v[k]) - &v_next[prev_site] {
            return false;
        }
        // V_n^{t+1} * I_n^{t+M} = I_{n+1}^t * V_n^t
        if &v_next[k] * &produced[k] != &front[(k + 1) % n] * &v[k] {
            return false;
        }
    }
    // Interior layers just shift.
    (0..m - 1).all(|j| current.i_layer(j + 1) == next.i_layer(j))
}
