//! Theta functions, elliptic hypergeometric sums, the elliptic gamma function,
//! elliptic beta integrals and the elliptic SOS model, evaluated in double
//! precision together with numerical checks of the identities relating them.

// NaN must fail the negated range checks; parameter lists follow the formulas;
// matrix kernels index explicitly
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::needless_range_loop
)]

pub mod beta;
pub mod biorthogonal;
pub mod error;
pub mod gamma;
pub mod numerics;
pub mod series;
pub mod sos;
pub mod suites;
pub mod theta;
pub mod toolkit;

pub use beta::{spiridonov_eval, wp_integrand, IntegralSpec};
pub use biorthogonal::{gram_matrix, r_fn, BiorthogonalFamily, GramMatrix};
pub use error::{Error, Result};
pub use gamma::{egamma, gamma_residue_constant, GammaGridPlan};
pub use numerics::{CheckResult, EllipticContext, Quadrature, Sampler, Witness};
pub use series::{e_sum, v_sum, SeriesKind, SeriesSpec, SeriesSum};
pub use sos::{fused_weight, phi, phi_m, sos_weight, FusedWeightSpec, SosWeightKey};
pub use suites::{run_suite, CheckRecord, Suite, SuiteOptions};
pub use theta::{qpochhammer_inf, theta, theta_multi, theta_pm, theta_series, ThetaProductPlan};
pub use toolkit::{efac, efac_multi, efac_pm};

/// Complex double.
pub type C64 = num_complex::Complex<f64>;

/// Shorthand constructor for a complex number.
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
