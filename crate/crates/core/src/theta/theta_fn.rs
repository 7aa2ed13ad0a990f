//! Riemann theta function by truncated lattice sum.
//!
//! theta(z; Omega) = sum over n in Z^g of exp(pi i <n, Omega n> + 2 pi i <n, z>).
//!
//! The sum is centered on the stationary point of the Gaussian weight and
//! truncated at a radius where the tail bound drops below 1e-13 of the peak
//! term, so doubling the radius moves the value by less than 1e-12 relative.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::ThetaError;

const PI: f64 = std::f64::consts::PI;
const TAIL_LOG: f64 = 32.0; // exp(-32) ~ 1.3e-14

/// General-genus theta value. `omega` is the g x g period matrix with
/// positive-definite imaginary part.
pub fn riemann_theta(
    z: &[Complex64],
    omega: &[Vec<Complex64>],
    extra_radius: i64,
) -> Result<Complex64, ThetaError> {
    let g = z.len();
    assert!(g >= 1 && omega.len() == g && omega.iter().all(|row| row.len() == g));
    let im = DMatrix::from_fn(g, g, |i, j| omega[i][j].im);
    let sym_defect = (&im - im.transpose()).norm();
    if sym_defect > 1e-12 * (1.0 + im.norm()) {
        return Err(ThetaError::BadPeriodMatrix);
    }
    let eigen = im.clone().symmetric_eigen();
    let lambda_min = eigen.eigenvalues.min();
    if lambda_min.is_nan() || lambda_min <= 0.0 {
        return Err(ThetaError::BadPeriodMatrix);
    }

    // Center the sum where the Gaussian weight peaks: Im(Omega) c = -Im(z).
    let im_z = DVector::from_fn(g, |i, _| z[i].im);
    let center = im
        .clone()
        .lu()
        .solve(&(-&im_z))
        .expect("positive definite imaginary part");

    let radius = ((TAIL_LOG / (PI * lambda_min)).sqrt()).ceil() as i64 + 2 + extra_radius;
    let mut index = vec![0i64; g];
    let mut total = Complex64::new(0.0, 0.0);
    sum_box(
        z,
        omega,
        &center,
        radius,
        0,
        &mut index,
        &mut total,
    );
    Ok(total)
}

fn sum_box(
    z: &[Complex64],
    omega: &[Vec<Complex64>],
    center: &DVector<f64>,
    radius: i64,
    dim: usize,
    index: &mut Vec<i64>,
    total: &mut Complex64,
) {
    let g = z.len();
    if dim == g {
        let mut quad = Complex64::new(0.0, 0.0);
        let mut lin = Complex64::new(0.0, 0.0);
        for i in 0..g {
            let ni = index[i] as f64;
            lin += z[i] * ni;
            for j in 0..g {
                quad += omega[i][j] * ni * index[j] as f64;
            }
        }
        let exponent = Complex64::new(0.0, PI) * quad + Complex64::new(0.0, 2.0 * PI) * lin;
        *total += exponent.exp();
        return;
    }
    let c = center[dim].round() as i64;
    for n in (c - radius)..=(c + radius) {
        index[dim] = n;
        sum_box(z, omega, center, radius, dim + 1, index, total);
    }
}

/// Genus-1 convenience wrapper.
pub fn theta1(z: Complex64, omega: Complex64) -> Result<Complex64, ThetaError> {
    riemann_theta(&[z], &[vec![omega]], 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn sample_omega() -> Complex64 {
        Complex64::new(0.31, 1.27)
    }

    #[test]
    fn evenness() {
        let omega = sample_omega();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
            let a = theta1(z, omega).unwrap();
            let b = theta1(-z, omega).unwrap();
            assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn quasi_periodicity() {
        let omega = sample_omega();
        let z = Complex64::new(0.37, 0.21);
        let base = theta1(z, omega).unwrap();
        // Integer shifts leave theta unchanged.
        let shifted = theta1(z + Complex64::new(3.0, 0.0), omega).unwrap();
        assert!((base - shifted).norm() < 1e-12 * base.norm());
        // Lattice shifts by Omega m pick up the exponential factor.
        for m in [-2i64, -1, 1, 2] {
            let mf = m as f64;
            let lhs = theta1(z + omega * mf, omega).unwrap();
            let factor = (Complex64::new(0.0, -2.0 * PI) * z * mf
                + Complex64::new(0.0, -PI) * omega * mf * mf)
                .exp();
            let rhs = factor * base;
            assert!(
                (lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()),
                "m = {m}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn odd_half_period_is_the_zero() {
        for omega in [sample_omega(), Complex64::new(-0.4, 0.9)] {
            let z = (Complex64::new(1.0, 0.0) + omega) / 2.0;
            let value = theta1(z, omega).unwrap();
            assert!(value.norm() <= 1e-10, "theta at the odd half period: {value}");
            // Nearby values are far from zero, so the zero is genuine.
            let nearby = theta1(z + Complex64::new(0.05, 0.0), omega).unwrap();
            assert!(nearby.norm() > 1e-3);
        }
    }

    #[test]
    fn truncation_is_converged() {
        let omega = sample_omega();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-2.0..2.0));
            let base = riemann_theta(&[z], &[vec![omega]], 0).unwrap();
            let wide = riemann_theta(&[z], &[vec![omega]], 8).unwrap();
            assert!((base - wide).norm() < 1e-12 * (1.0 + wide.norm()));
        }
    }

    #[test]
    fn genus_two_product_case() {
        // A diagonal period matrix factorizes theta into a product.
        let o1 = Complex64::new(0.2, 1.1);
        let o2 = Complex64::new(-0.3, 0.8);
        let omega = vec![
            vec![o1, Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), o2],
        ];
        let z1 = Complex64::new(0.15, 0.05);
        let z2 = Complex64::new(-0.4, 0.1);
        let joint = riemann_theta(&[z1, z2], &omega, 0).unwrap();
        let product = theta1(z1, o1).unwrap() * theta1(z2, o2).unwrap();
        assert!((joint - product).norm() < 1e-12 * (1.0 + product.norm()));
    }

    #[test]
    fn rejects_bad_period_matrix() {
        let z = Complex64::new(0.1, 0.0);
        assert!(matches!(
            theta1(z, Complex64::new(0.5, -1.0)),
            Err(ThetaError::BadPeriodMatrix)
        ));
    }
}
