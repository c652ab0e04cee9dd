//! Random variates and special functions shared by every other module.

mod conjugate;
mod dist;
mod hyper;
mod ks;
mod rng;
mod truncnorm;

pub use conjugate::{
    sample_inverse_wishart, sample_nig_posterior, sample_niw_posterior, NigParams, NiwParams,
};
pub use dist::{
    bernoulli, categorical, categorical_log, ln_beta_pdf, ln_gamma_pdf, open01, sample_beta,
    sample_gamma, std_normal,
};
pub(crate) use dist::beta_unchecked;
pub use hyper::{hyp2f1_terminating, hyp2f1_terminating_exact, rational_from_f64};
pub use ks::{ks_two_sample, KsResult};
pub use rng::RngHandle;
pub use truncnorm::{cdf, ln_normal_interval, ln_surv, sample_truncated_normal, surv};

pub use statrs::function::beta::ln_beta;
pub use statrs::function::gamma::ln_gamma;
