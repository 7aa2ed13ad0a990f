//! Genus-1 machinery for N = 2, M = 1: the hyperelliptic curve model, cycle
//! periods, Abel integrals, the Riemann theta function, and reconstruction of
//! the trajectory from tau quotients.

mod abel;
mod model;
mod quad;
mod reconstruct;
mod theta_fn;

pub use abel::{
    abel_images, abel_map, lattice_decompose, loop_integral, periods, periods_of_quartic,
    AbelImages, AbelTarget, PeriodData,
};
pub use model::HyperellipticModel;
pub use quad::gauss_legendre;
pub use reconstruct::{
    linearization_check, period_dump, reconstruct_and_verify, LinearizationReport, PeriodDump,
    ReconRow, ReconstructionReport, TauGrid,
};
pub use theta_fn::{riemann_theta, theta1};
