//! Observation kernels: likelihood evaluation and atom updates.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::atoms::{Atom, BaseMeasure};
use crate::data::{GroupedDataset, Observations};
use crate::error::{Error, Result};
use crate::stats::{ln_gamma, ln_normal_interval, sample_truncated_normal};

/// Lower and upper latent thresholds for count `x`: `(-inf, 0)` for zero,
/// `[x - 1, x)` otherwise.
pub fn count_bin(x: u64) -> (f64, f64) {
    if x == 0 {
        (f64::NEG_INFINITY, 0.0)
    } else {
        ((x - 1) as f64, x as f64)
    }
}

/// Probability of count `x` under N(eta mu, eta^2 var) rounding, in logs.
pub fn ln_count_prob(x: u64, mu: f64, var: f64, eta: f64) -> f64 {
    let (lo, hi) = count_bin(x);
    let sd = eta * var.sqrt();
    ln_normal_interval((lo - eta * mu) / sd, (hi - eta * mu) / sd)
}

/// Sum of count probabilities over `0..=omega_max`.
pub fn count_mass(mu: f64, var: f64, eta: f64, omega_max: u64) -> f64 {
    (0..=omega_max).map(|x| ln_count_prob(x, mu, var, eta).exp()).sum()
}

/// Per-atom quantities reused across every likelihood call in a sweep.
pub(crate) enum AtomCache {
    Uni { mu: f64, var: f64, ln_norm: f64 },
    Multi { mu: DVector<f64>, chol_l: DMatrix<f64>, ln_norm: f64 },
}

impl AtomCache {
    pub fn new(atom: &Atom) -> Self {
        match atom {
            Atom::Univariate { mu, var } => AtomCache::Uni {
                mu: *mu,
                var: *var,
                ln_norm: -0.5 * (2.0 * PI * var).ln(),
            },
            Atom::Multivariate { mu, cov } => {
                let q = mu.len() as f64;
                let l = cov.clone().cholesky().expect("covariance is SPD").l();
                let ln_det: f64 = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
                AtomCache::Multi {
                    mu: mu.clone(),
                    chol_l: l,
                    ln_norm: -0.5 * (q * (2.0 * PI).ln() + ln_det),
                }
            }
        }
    }
}

/// Borrowed view of the observations with kernel-specific extras.
pub(crate) enum ObsView<'a> {
    Uni(&'a [Vec<f64>]),
    Multi(&'a [Vec<DVector<f64>>]),
    Count { x: &'a [Vec<u64>], eta: Vec<f64> },
}

impl<'a> ObsView<'a> {
    pub fn new(data: &'a GroupedDataset, base: &BaseMeasure, eta: Option<Vec<f64>>) -> Result<Self> {
        match (&data.obs, base) {
            (Observations::Univariate(g), BaseMeasure::Nig(_)) => Ok(ObsView::Uni(g)),
            (Observations::Multivariate { dim, groups }, BaseMeasure::Niw(p)) if *dim == p.dim() => {
                Ok(ObsView::Multi(groups))
            }
            (Observations::Counts(g), BaseMeasure::Nig(_)) => {
                let eta = eta.unwrap_or_else(|| vec![1.0; g.len()]);
                if eta.len() != g.len() || eta.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                    return Err(Error::Validation("one positive scale factor per group required".into()));
                }
                Ok(ObsView::Count { x: g, eta })
            }
            _ => Err(Error::Validation(format!(
                "{} data does not match the configured base measure",
                data.kind()
            ))),
        }
    }

    pub fn is_count(&self) -> bool {
        matches!(self, ObsView::Count { .. })
    }

    /// Log likelihood of observation (j, i) under an atom; the count kernel
    /// uses the rounding probability rather than the latent value.
    pub fn ln_lik(&self, j: usize, i: usize, c: &AtomCache) -> f64 {
        match (self, c) {
            (ObsView::Uni(g), AtomCache::Uni { mu, var, ln_norm }) => {
                let d = g[j][i] - mu;
                ln_norm - 0.5 * d * d / var
            }
            (ObsView::Multi(g), AtomCache::Multi { mu, chol_l, ln_norm }) => {
                let d = &g[j][i] - mu;
                let s = chol_l.solve_lower_triangular(&d).expect("nonsingular");
                ln_norm - 0.5 * s.norm_squared()
            }
            (ObsView::Count { x, eta }, AtomCache::Uni { mu, var, .. }) => {
                ln_count_prob(x[j][i], *mu, *var, eta[j])
            }
            _ => unreachable!("kernel and atom type checked at construction"),
        }
    }

    /// Conjugate draw for one atom from the members `(j, i)`.
    pub fn sample_atom<R: Rng + ?Sized>(
        &self,
        base: &BaseMeasure,
        members: &[(usize, usize)],
        latent: &[Vec<f64>],
        rng: &mut R,
    ) -> Atom {
        match (self, base) {
            (ObsView::Uni(g), BaseMeasure::Nig(p)) => {
                let ys: Vec<f64> = members.iter().map(|&(j, i)| g[j][i]).collect();
                let (mu, var) = p.posterior(&ys).sample(rng);
                Atom::Univariate { mu, var }
            }
            (ObsView::Count { eta, .. }, BaseMeasure::Nig(p)) => {
                let ys: Vec<f64> = members.iter().map(|&(j, i)| latent[j][i] / eta[j]).collect();
                let (mu, var) = p.posterior(&ys).sample(rng);
                Atom::Univariate { mu, var }
            }
            (ObsView::Multi(g), BaseMeasure::Niw(p)) => {
                let ys: Vec<DVector<f64>> = members.iter().map(|&(j, i)| g[j][i].clone()).collect();
                let (mu, cov) = p.posterior(&ys).sample(rng);
                Atom::Multivariate { mu, cov }
            }
            _ => unreachable!("kernel and base measure checked at construction"),
        }
    }

    /// Redraw the latent value of a count observation given its atom.
    pub fn sample_latent<R: Rng + ?Sized>(&self, j: usize, i: usize, atom: &Atom, rng: &mut R) -> f64 {
        match (self, atom) {
            (ObsView::Count { x, eta }, Atom::Univariate { mu, var }) => {
                let (lo, hi) = count_bin(x[j][i]);
                let e = eta[j];
                sample_truncated_normal(e * mu, e * e * var, lo, hi, rng)
                    .expect("count bins are nonempty")
            }
            _ => unreachable!("latent values exist only for counts"),
        }
    }

    /// Point used for initial clustering.
    pub fn init_point(&self, j: usize, i: usize) -> Vec<f64> {
        match self {
            ObsView::Uni(g) => vec![g[j][i]],
            ObsView::Multi(g) => g[j][i].iter().copied().collect(),
            ObsView::Count { x, eta } => vec![initial_latent(x[j][i]) / eta[j]],
        }
    }
}

/// Midpoint of the count's latent bin.
pub(crate) fn initial_latent(x: u64) -> f64 {
    if x == 0 {
        -0.5
    } else {
        x as f64 - 0.5
    }
}

/// Log density of a base-measure draw.
pub(crate) fn ln_base_density(base: &BaseMeasure, atom: &Atom) -> f64 {
    match (base, atom) {
        (BaseMeasure::Nig(p), Atom::Univariate { mu, var }) => {
            let ln_ig = p.a_sig * p.b_sig.ln() - ln_gamma(p.a_sig) - (p.a_sig + 1.0) * var.ln()
                - p.b_sig / var;
            let s2 = var / p.k0;
            ln_ig - 0.5 * (2.0 * PI * s2).ln() - 0.5 * (mu - p.m0).powi(2) / s2
        }
        (BaseMeasure::Niw(p), Atom::Multivariate { mu, cov }) => {
            let q = p.dim() as f64;
            let Some(chol) = cov.clone().cholesky() else {
                return f64::NEG_INFINITY;
            };
            let ln_det_s: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            let ln_det_psi: f64 = match p.psi.clone().cholesky() {
                Some(c) => 2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
                None => return f64::NEG_INFINITY,
            };
            let inv = chol.inverse();
            let tr = (&p.psi * &inv).trace();
            let ln_mgamma: f64 = q * (q - 1.0) / 4.0 * PI.ln()
                + (0..p.dim()).map(|i| ln_gamma(0.5 * (p.v0 - i as f64))).sum::<f64>();
            let ln_iw = 0.5 * p.v0 * ln_det_psi - 0.5 * p.v0 * q * 2f64.ln() - ln_mgamma
                - 0.5 * (p.v0 + q + 1.0) * ln_det_s
                - 0.5 * tr;
            let d = mu - &p.m0;
            let quad = (d.transpose() * &inv * &d)[(0, 0)] * p.k0;
            let ln_n = -0.5 * (q * (2.0 * PI).ln() + ln_det_s - q * p.k0.ln()) - 0.5 * quad;
            ln_iw + ln_n
        }
        _ => f64::NEG_INFINITY,
    }
}
